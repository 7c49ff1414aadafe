/** End-to-end: run directories in, SVG comparison figure out. */

import * as fs from "node:fs";
import * as path from "node:path";

import { aggregateByVariant, loadRunDirs } from "./series.js";
import { renderFigure } from "./svg.js";

export interface PlotResult {
  /** Variants plotted, sorted. */
  variants: string[];
  warnings: string[];
}

export function plotTrainingCurves(
  runDirs: string[],
  smoothWindow: number,
  outPath: string,
): PlotResult {
  const { series, warnings } = loadRunDirs(runDirs);
  const bands = aggregateByVariant(series, smoothWindow);
  const svg = renderFigure(bands, smoothWindow);
  fs.mkdirSync(path.dirname(path.resolve(outPath)), { recursive: true });
  fs.writeFileSync(outPath, svg);
  return { variants: bands.map((b) => b.variant), warnings };
}
