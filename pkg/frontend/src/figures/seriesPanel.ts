/** Multi-line metric panel: one line per report column, annotated. */
import { basename } from "node:path";

import { linePanel } from "../chart.js";
import { readAnnotations, readSeries, type Annotations } from "../schema.js";
import { document } from "../svg.js";

export interface SeriesPanelOptions {
  input: string;
  annotations?: string;
  width?: number;
  height?: number;
  logY?: boolean;
  title?: string;
}

export function renderSeriesPanel(options: SeriesPanelOptions): string {
  const table = readSeries(options.input);
  let annotations: Annotations | undefined;
  if (options.annotations) {
    annotations = readAnnotations(options.annotations);
  }
  const { frame, nodes } = linePanel(table.starts, table.isoStarts, table.labels, table.values, {
    width: options.width,
    height: options.height,
    titleText: options.title ?? basename(options.input, ".csv"),
    xLabel: "window start (UTC)",
    yLabel: options.logY ? "value (log)" : "value",
    logY: options.logY,
    annotations,
  });
  return document(frame.width, frame.height, ...nodes);
}
