/** Loading run directories and aggregating per-variant seed bands. */

import * as fs from "node:fs";
import * as path from "node:path";

import { MetricsRow, SchemaError, parseMetricsCsv, parseVariantLabel } from "./schema.js";

/** One run directory's training trace. */
export interface RunSeries {
  variant: string;
  seed: number;
  steps: number[];
  meanReturn: number[];
  satisfaction: number[];
  alpha: number[];
}

/** Mean curve plus min-max band for one variant across seeds. */
export interface VariantBand {
  variant: string;
  seeds: number[];
  steps: number[];
  mean: number[];
  min: number[];
  max: number[];
  alphaMean: number[];
  /** True when any seed's alpha trace differs from the plain-policy 1.0. */
  hasAlpha: boolean;
}

export interface LoadResult {
  series: RunSeries[];
  /** Per-directory warnings for skipped (missing/empty) runs. */
  warnings: string[];
}

function seedOf(dir: string, configText: string): number {
  let section = "";
  for (const raw of configText.split(/\r?\n/)) {
    const line = raw.split("#", 1)[0].trim();
    if (line.startsWith("[") && line.endsWith("]")) {
      section = line.slice(1, -1).trim();
      continue;
    }
    const eq = line.indexOf("=");
    if (section === "cell" && eq > 0 && line.slice(0, eq).trim() === "seed") {
      return Number(line.slice(eq + 1).trim());
    }
  }
  throw new SchemaError(`${dir}: config.txt has no [cell] seed entry`);
}

function toSeries(dir: string, rows: MetricsRow[], variant: string, seed: number): RunSeries {
  const steps = rows.map((r) => r.steps);
  for (let i = 1; i < steps.length; i++) {
    if (steps[i] <= steps[i - 1]) {
      throw new SchemaError(`${dir}: steps not strictly increasing at row ${i}`);
    }
  }
  return {
    variant,
    seed,
    steps,
    meanReturn: rows.map((r) => r.mean_return),
    satisfaction: rows.map((r) => r.satisfaction_rate),
    alpha: rows.map((r) => r.alpha),
  };
}

/**
 * Load run directories.  Directories with a missing metrics.csv or an empty
 * metrics body are skipped with a warning; a present file with a drifted
 * schema is a hard SchemaError.
 */
export function loadRunDirs(dirs: string[]): LoadResult {
  const series: RunSeries[] = [];
  const warnings: string[] = [];
  for (const dir of dirs) {
    const metricsPath = path.join(dir, "metrics.csv");
    const configPath = path.join(dir, "config.txt");
    if (!fs.existsSync(metricsPath) || !fs.existsSync(configPath)) {
      warnings.push(`${dir}: missing metrics.csv or config.txt, skipped`);
      continue;
    }
    const rows = parseMetricsCsv(fs.readFileSync(metricsPath, "utf8"));
    if (rows.length === 0) {
      warnings.push(`${dir}: metrics body is empty, skipped`);
      continue;
    }
    const configText = fs.readFileSync(configPath, "utf8");
    series.push(
      toSeries(dir, rows, parseVariantLabel(configText), seedOf(dir, configText)),
    );
  }
  return { series, warnings };
}

/** Centered moving average; window 1 reproduces the input exactly. */
export function smooth(values: number[], window: number): number[] {
  if (!Number.isInteger(window) || window < 1) {
    throw new RangeError(`smoothing window must be a positive integer, got ${window}`);
  }
  if (window === 1) {
    return values.slice();
  }
  const half = Math.floor(window / 2);
  return values.map((_, i) => {
    const lo = Math.max(0, i - half);
    const hi = Math.min(values.length - 1, i + half);
    let sum = 0;
    for (let j = lo; j <= hi; j++) {
      sum += values[j];
    }
    return sum / (hi - lo + 1);
  });
}

/**
 * Group series by variant and fold seeds into mean curves with min-max
 * bands.  Seeds of one variant must share an identical step grid.
 */
export function aggregateByVariant(series: RunSeries[], window = 1): VariantBand[] {
  const byVariant = new Map<string, RunSeries[]>();
  for (const s of series) {
    const group = byVariant.get(s.variant) ?? [];
    group.push(s);
    byVariant.set(s.variant, group);
  }
  const bands: VariantBand[] = [];
  for (const [variant, group] of byVariant) {
    const steps = group[0].steps;
    for (const s of group.slice(1)) {
      if (s.steps.length !== steps.length || s.steps.some((v, i) => v !== steps[i])) {
        throw new SchemaError(
          `variant ${variant}: seeds logged on different step grids`,
        );
      }
    }
    const curves = group.map((s) => smooth(s.meanReturn, window));
    const alphas = group.map((s) => smooth(s.alpha, window));
    const n = steps.length;
    const mean = new Array<number>(n);
    const min = new Array<number>(n);
    const max = new Array<number>(n);
    const alphaMean = new Array<number>(n);
    for (let i = 0; i < n; i++) {
      const at = curves.map((c) => c[i]);
      mean[i] = at.reduce((a, b) => a + b, 0) / at.length;
      min[i] = Math.min(...at);
      max[i] = Math.max(...at);
      alphaMean[i] = alphas.reduce((a, c) => a + c[i], 0) / alphas.length;
    }
    bands.push({
      variant,
      seeds: group.map((s) => s.seed).sort((a, b) => a - b),
      steps,
      mean,
      min,
      max,
      alphaMean,
      hasAlpha: group.some((s) => s.alpha.some((a) => a !== 1.0)),
    });
  }
  bands.sort((a, b) => a.variant.localeCompare(b.variant));
  return bands;
}
