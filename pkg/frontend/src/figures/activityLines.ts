/** Wallets-by-layer-count lines over time; optional per-row share mode. */
import { basename } from "node:path";

import { linePanel } from "../chart.js";
import { readActivitySeries, readAnnotations, type Annotations } from "../schema.js";
import { document } from "../svg.js";

export interface ActivityLinesOptions {
  input: string;
  annotations?: string;
  width?: number;
  height?: number;
  /** Plot each count as a share of that window's active wallets. */
  share?: boolean;
  logY?: boolean;
  title?: string;
}

export function renderActivityLines(options: ActivityLinesOptions): string {
  const table = readActivitySeries(options.input);
  let annotations: Annotations | undefined;
  if (options.annotations) {
    annotations = readAnnotations(options.annotations);
  }
  const k = table.layerLabels.length;
  const labels = table.layerLabels.map((_, i) => (i === 0 ? "1 layer" : `${i + 1} layers`));
  const columns: (number | null)[][] = [];
  for (let j = 0; j < k; j++) {
    columns.push(
      table.counts.map((row) => {
        if (!options.share) {
          return row[j]!;
        }
        const total = row.reduce((a, b) => a + b, 0);
        return total === 0 ? null : row[j]! / total;
      }),
    );
  }
  const { frame, nodes } = linePanel(table.starts, table.isoStarts, labels, columns, {
    width: options.width,
    height: options.height,
    titleText: options.title ?? basename(options.input, ".csv"),
    xLabel: "window start (UTC)",
    yLabel: options.share ? "share of active wallets" : "wallets",
    logY: options.logY,
    annotations,
  });
  return document(frame.width, frame.height, ...nodes);
}
