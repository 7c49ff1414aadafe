/**
 * The metrics.csv column contract shared with the training pipeline.
 *
 * The plot tool consumes exactly this schema; any drift in the header is a
 * hard error so silent misreads cannot produce plausible-looking figures.
 */

export const METRICS_COLUMNS = [
  "update",
  "steps",
  "mean_return",
  "mean_shaped_return",
  "satisfaction_rate",
  "alpha",
  "policy_loss",
  "value_loss",
  "entropy",
  "tv_distance",
  "robustness_mean",
] as const;

export type MetricsColumn = (typeof METRICS_COLUMNS)[number];

export type MetricsRow = Record<MetricsColumn, number>;

export class SchemaError extends Error {}

/** Parse a metrics.csv body, enforcing the exact column contract. */
export function parseMetricsCsv(text: string): MetricsRow[] {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new SchemaError("empty metrics file (no header)");
  }
  const header = lines[0].split(",");
  if (
    header.length !== METRICS_COLUMNS.length ||
    header.some((name, i) => name !== METRICS_COLUMNS[i])
  ) {
    throw new SchemaError(
      `metrics header mismatch: expected "${METRICS_COLUMNS.join(",")}", ` +
        `got "${lines[0]}"`,
    );
  }
  const rows: MetricsRow[] = [];
  for (const [index, line] of lines.slice(1).entries()) {
    const cells = line.split(",");
    if (cells.length !== METRICS_COLUMNS.length) {
      throw new SchemaError(
        `metrics row ${index + 1}: expected ${METRICS_COLUMNS.length} ` +
          `cells, got ${cells.length}`,
      );
    }
    const row = {} as MetricsRow;
    METRICS_COLUMNS.forEach((name, i) => {
      const value = Number(cells[i]);
      if (!Number.isFinite(value)) {
        throw new SchemaError(
          `metrics row ${index + 1}: non-numeric ${name} value "${cells[i]}"`,
        );
      }
      row[name] = value;
    });
    rows.push(row);
  }
  return rows;
}

/**
 * Read the variant label from a resolved run config.  The label lives in the
 * trailing `[cell]` section written by the training pipeline; reading it from
 * the config (not the directory name) keeps figures robust to renames.
 */
export function parseVariantLabel(configText: string): string {
  let section = "";
  for (const raw of configText.split(/\r?\n/)) {
    const line = raw.split("#", 1)[0].trim();
    if (line.startsWith("[") && line.endsWith("]")) {
      section = line.slice(1, -1).trim();
      continue;
    }
    const eq = line.indexOf("=");
    if (section === "cell" && eq > 0) {
      const key = line.slice(0, eq).trim();
      if (key === "variant") {
        return line.slice(eq + 1).trim();
      }
    }
  }
  throw new SchemaError("config.txt has no [cell] variant entry");
}
