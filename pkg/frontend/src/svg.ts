/** SVG rendering of per-variant training curves with seed bands. */

import { VariantBand } from "./series.js";

const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

const WIDTH = 760;
const PANEL_HEIGHT = 300;
const MARGIN = { left: 64, right: 16, top: 28, bottom: 40 };

interface Scale {
  (value: number): number;
}

function linearScale(lo: number, hi: number, outLo: number, outHi: number): Scale {
  const span = hi - lo || 1;
  return (v) => outLo + ((v - lo) / span) * (outHi - outLo);
}

function ticks(lo: number, hi: number, count = 5): number[] {
  const span = hi - lo || 1;
  const rawStep = span / count;
  const mag = 10 ** Math.floor(Math.log10(rawStep));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((s) => span / s <= count) ?? mag * 10;
  const first = Math.ceil(lo / step) * step;
  const out: number[] = [];
  for (let v = first; v <= hi + 1e-12; v += step) {
    out.push(Number(v.toPrecision(12)));
  }
  return out;
}

function fmt(v: number): string {
  return Number.isInteger(v) ? String(v) : String(Number(v.toPrecision(4)));
}

function polylinePoints(xs: number[], ys: number[], x: Scale, y: Scale): string {
  return xs.map((v, i) => `${x(v).toFixed(2)},${y(ys[i]).toFixed(2)}`).join(" ");
}

function bandPoints(xs: number[], lo: number[], hi: number[], x: Scale, y: Scale): string {
  const upper = xs.map((v, i) => `${x(v).toFixed(2)},${y(hi[i]).toFixed(2)}`);
  const lower = xs
    .map((v, i) => `${x(v).toFixed(2)},${y(lo[i]).toFixed(2)}`)
    .reverse();
  return [...upper, ...lower].join(" ");
}

interface PanelSpec {
  title: string;
  yLabel: string;
  top: number;
  curves: { label: string; color: string; xs: number[]; ys: number[]; lo?: number[]; hi?: number[] }[];
}

function renderPanel(panel: PanelSpec): string {
  const { top, curves } = panel;
  const xs = curves[0].xs;
  const xLo = Math.min(...curves.map((c) => c.xs[0]));
  const xHi = Math.max(...curves.map((c) => c.xs[c.xs.length - 1]));
  const yValues = curves.flatMap((c) => [...c.ys, ...(c.lo ?? []), ...(c.hi ?? [])]);
  let yLo = Math.min(...yValues);
  let yHi = Math.max(...yValues);
  if (yLo === yHi) {
    yLo -= 0.5;
    yHi += 0.5;
  }
  const pad = 0.05 * (yHi - yLo);
  yLo -= pad;
  yHi += pad;

  const x = linearScale(xLo, xHi, MARGIN.left, WIDTH - MARGIN.right);
  const y = linearScale(yLo, yHi, top + PANEL_HEIGHT - MARGIN.bottom, top + MARGIN.top);

  const parts: string[] = [];
  parts.push(
    `<text class="title" x="${MARGIN.left}" y="${top + 18}" font-size="14" font-weight="bold">${panel.title}</text>`,
  );
  // axes
  const axisY = top + PANEL_HEIGHT - MARGIN.bottom;
  parts.push(
    `<line x1="${MARGIN.left}" y1="${axisY}" x2="${WIDTH - MARGIN.right}" y2="${axisY}" stroke="#333"/>`,
    `<line x1="${MARGIN.left}" y1="${top + MARGIN.top}" x2="${MARGIN.left}" y2="${axisY}" stroke="#333"/>`,
  );
  for (const t of ticks(xLo, xHi)) {
    parts.push(
      `<line x1="${x(t).toFixed(2)}" y1="${axisY}" x2="${x(t).toFixed(2)}" y2="${axisY + 4}" stroke="#333"/>`,
      `<text x="${x(t).toFixed(2)}" y="${axisY + 18}" font-size="11" text-anchor="middle">${fmt(t)}</text>`,
    );
  }
  for (const t of ticks(yLo, yHi)) {
    parts.push(
      `<line x1="${MARGIN.left - 4}" y1="${y(t).toFixed(2)}" x2="${MARGIN.left}" y2="${y(t).toFixed(2)}" stroke="#333"/>`,
      `<text x="${MARGIN.left - 8}" y="${(y(t) + 4).toFixed(2)}" font-size="11" text-anchor="end">${fmt(t)}</text>`,
    );
  }
  parts.push(
    `<text x="${(MARGIN.left + WIDTH - MARGIN.right) / 2}" y="${top + PANEL_HEIGHT - 6}" font-size="12" text-anchor="middle">training steps</text>`,
    `<text x="16" y="${top + PANEL_HEIGHT / 2}" font-size="12" text-anchor="middle" transform="rotate(-90 16 ${top + PANEL_HEIGHT / 2})">${panel.yLabel}</text>`,
  );
  // bands first so curves draw on top
  for (const c of curves) {
    if (c.lo && c.hi && c.xs.length > 1) {
      parts.push(
        `<polygon class="band" data-variant="${c.label}" points="${bandPoints(c.xs, c.lo, c.hi, x, y)}" fill="${c.color}" fill-opacity="0.18" stroke="none"/>`,
      );
    }
  }
  for (const c of curves) {
    parts.push(
      `<polyline class="curve" data-variant="${c.label}" points="${polylinePoints(c.xs, c.ys, x, y)}" fill="none" stroke="${c.color}" stroke-width="2"/>`,
    );
  }
  void xs;
  return parts.join("\n");
}

/**
 * Render the comparison figure: a mean-return panel with one curve per
 * variant (min-max band across seeds when a variant has more than one), and
 * a second alpha panel when any variant carries a policy-mixing trace.
 */
export function renderFigure(bands: VariantBand[], smoothWindow: number): string {
  if (bands.length === 0) {
    throw new Error("nothing to plot: no usable run series");
  }
  const withAlpha = bands.filter((b) => b.hasAlpha);
  const panels: PanelSpec[] = [
    {
      title: `mean return (smooth window ${smoothWindow})`,
      yLabel: "mean return",
      top: 0,
      curves: bands.map((b, i) => ({
        label: b.variant,
        color: PALETTE[i % PALETTE.length],
        xs: b.steps,
        ys: b.mean,
        lo: b.seeds.length > 1 ? b.min : undefined,
        hi: b.seeds.length > 1 ? b.max : undefined,
      })),
    },
  ];
  if (withAlpha.length > 0) {
    panels.push({
      title: "policy mixing weight",
      yLabel: "alpha",
      top: PANEL_HEIGHT,
      curves: withAlpha.map((b) => ({
        label: b.variant,
        color: PALETTE[bands.indexOf(b) % PALETTE.length],
        xs: b.steps,
        ys: b.alphaMean,
      })),
    });
  }
  const height = PANEL_HEIGHT * panels.length;
  const legend = bands
    .map((b, i) => {
      const x = MARGIN.left + 150 * i;
      return (
        `<rect x="${x}" y="6" width="12" height="12" fill="${PALETTE[i % PALETTE.length]}"/>` +
        `<text x="${x + 16}" y="16" font-size="12">${b.variant} (${b.seeds.length} seeds)</text>`
      );
    })
    .join("\n");
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${height + 24}" viewBox="0 0 ${WIDTH} ${height + 24}" font-family="sans-serif">`,
    `<rect width="${WIDTH}" height="${height + 24}" fill="white"/>`,
    legend,
    `<g transform="translate(0 24)">`,
    ...panels.map(renderPanel),
    `</g>`,
    `</svg>`,
    ``,
  ].join("\n");
}
