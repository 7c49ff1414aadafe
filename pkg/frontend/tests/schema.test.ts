import { describe, expect, it } from "vitest";

import {
  METRICS_COLUMNS,
  SchemaError,
  parseMetricsCsv,
  parseVariantLabel,
} from "../src/schema.js";

const HEADER = METRICS_COLUMNS.join(",");
const ROW = "1,2048,0.5,0.6,0.7,0.1,-0.01,1.2,1.05,0.02,0.3";

describe("parseMetricsCsv", () => {
  it("parses a valid body into typed rows", () => {
    const rows = parseMetricsCsv(`${HEADER}\n${ROW}\n`);
    expect(rows).toHaveLength(1);
    expect(rows[0].steps).toBe(2048);
    expect(rows[0].mean_return).toBeCloseTo(0.5);
    expect(rows[0].alpha).toBeCloseTo(0.1);
  });

  it("accepts a header-only file as zero rows", () => {
    expect(parseMetricsCsv(`${HEADER}\n`)).toHaveLength(0);
  });

  it("rejects renamed columns", () => {
    const drifted = HEADER.replace("mean_return", "avg_return");
    expect(() => parseMetricsCsv(`${drifted}\n${ROW}\n`)).toThrow(SchemaError);
  });

  it("rejects extra columns", () => {
    expect(() => parseMetricsCsv(`${HEADER},extra\n${ROW},1\n`)).toThrow(
      SchemaError,
    );
  });

  it("rejects ragged and non-numeric rows", () => {
    expect(() => parseMetricsCsv(`${HEADER}\n1,2\n`)).toThrow(SchemaError);
    const bad = ROW.replace("0.5", "half");
    expect(() => parseMetricsCsv(`${HEADER}\n${bad}\n`)).toThrow(SchemaError);
  });

  it("rejects an empty file", () => {
    expect(() => parseMetricsCsv("")).toThrow(SchemaError);
  });
});

describe("parseVariantLabel", () => {
  it("reads the variant from the [cell] section", () => {
    const text = "[run]\nenv = pendulum\n\n[cell]\nvariant = shaping+mixing\nseed = 3\n";
    expect(parseVariantLabel(text)).toBe("shaping+mixing");
  });

  it("ignores variant keys outside [cell]", () => {
    const text = "[run]\nvariant = wrong\n";
    expect(() => parseVariantLabel(text)).toThrow(SchemaError);
  });
});
