export { METRICS_COLUMNS, MetricsRow, SchemaError, parseMetricsCsv, parseVariantLabel } from "./schema.js";
export { RunSeries, VariantBand, aggregateByVariant, loadRunDirs, smooth } from "./series.js";
export { renderFigure } from "./svg.js";
export { plotTrainingCurves } from "./plot.js";
