import * as path from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { SchemaError } from "../src/schema.js";
import { aggregateByVariant, loadRunDirs, smooth } from "../src/series.js";

const FIXTURES = path.join(path.dirname(fileURLToPath(import.meta.url)), "fixtures");

const SIX_RUN_DIRS = ["vanilla", "mixing"].flatMap((variant) =>
  [0, 1, 2].map((seed) => path.join(FIXTURES, variant, `seed${seed}`)),
);

describe("smooth", () => {
  it("window 1 reproduces raw values exactly", () => {
    const values = [3, 1, 4, 1, 5, 9, 2, 6];
    expect(smooth(values, 1)).toEqual(values);
  });

  it("window 3 is the centered average with shrunken edges", () => {
    expect(smooth([0, 3, 6], 3)).toEqual([1.5, 3, 4.5]);
    expect(smooth([1, 1, 1, 1], 3)).toEqual([1, 1, 1, 1]);
  });

  it("rejects non-positive windows", () => {
    expect(() => smooth([1], 0)).toThrow(RangeError);
  });
});

describe("loadRunDirs", () => {
  it("loads all six fixture runs with variant labels from configs", () => {
    const { series, warnings } = loadRunDirs(SIX_RUN_DIRS);
    expect(series).toHaveLength(6);
    expect(warnings).toHaveLength(0);
    const variants = new Set(series.map((s) => s.variant));
    expect(variants).toEqual(new Set(["vanilla", "mixing"]));
    for (const s of series) {
      expect(s.steps).toHaveLength(15);
      expect(s.steps[0]).toBe(2048);
    }
  });

  it("throws SchemaError on the drifted fixture", () => {
    expect(() => loadRunDirs([path.join(FIXTURES, "drift", "seed0")])).toThrow(
      SchemaError,
    );
  });

  it("skips missing and empty run dirs with warnings", () => {
    const { series, warnings } = loadRunDirs([
      path.join(FIXTURES, "does-not-exist"),
      path.join(FIXTURES, "empty", "seed0"),
      path.join(FIXTURES, "vanilla", "seed0"),
    ]);
    expect(series).toHaveLength(1);
    expect(warnings).toHaveLength(2);
  });
});

describe("aggregateByVariant", () => {
  it("folds three seeds into a mean curve bracketed by the band", () => {
    const { series } = loadRunDirs(SIX_RUN_DIRS);
    const bands = aggregateByVariant(series);
    expect(bands.map((b) => b.variant)).toEqual(["mixing", "vanilla"]);
    for (const band of bands) {
      expect(band.seeds).toEqual([0, 1, 2]);
      for (let i = 0; i < band.steps.length; i++) {
        expect(band.min[i]).toBeLessThanOrEqual(band.mean[i]);
        expect(band.mean[i]).toBeLessThanOrEqual(band.max[i]);
      }
    }
    const byName = Object.fromEntries(bands.map((b) => [b.variant, b]));
    expect(byName.mixing.hasAlpha).toBe(true);
    expect(byName.vanilla.hasAlpha).toBe(false);
  });

  it("rejects seeds logged on different step grids", () => {
    const { series } = loadRunDirs(SIX_RUN_DIRS.slice(0, 2));
    series[1] = { ...series[1], steps: series[1].steps.map((s) => s + 1) };
    expect(() => aggregateByVariant(series)).toThrow(SchemaError);
  });
});
