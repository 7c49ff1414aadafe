#!/usr/bin/env node
/**
 * Render a training-curve comparison figure from experiment run dirs.
 *
 *   plot --runs <dir>... --out fig.svg [--smooth N]
 *
 * Exit codes: 0 success, 1 domain failure (schema drift, nothing to plot),
 * 2 usage error.
 */

import { parseArgs } from "node:util";

import { plotTrainingCurves } from "./plot.js";
import { SchemaError } from "./schema.js";

export function main(argv: string[]): number {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      options: {
        runs: { type: "string", multiple: true },
        out: { type: "string" },
        smooth: { type: "string", default: "1" },
      },
      allowPositionals: true,
    });
  } catch (err) {
    console.error(`usage error: ${(err as Error).message}`);
    return 2;
  }
  // `--runs a b c` arrives as runs=[a] plus positionals [b, c]
  const runs = [...(parsed.values.runs ?? []), ...parsed.positionals];
  const out = parsed.values.out;
  const smooth = Number(parsed.values.smooth);
  if (runs.length === 0 || !out) {
    console.error("usage: plot --runs <dir>... --out fig.svg [--smooth N]");
    return 2;
  }
  if (!Number.isInteger(smooth) || smooth < 1) {
    console.error(`usage error: --smooth must be a positive integer`);
    return 2;
  }
  try {
    const result = plotTrainingCurves(runs, smooth, out);
    for (const warning of result.warnings) {
      console.error(`warning: ${warning}`);
    }
    console.log(`wrote ${out} (${result.variants.length} variants: ${result.variants.join(", ")})`);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError || err instanceof Error) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    throw err;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
