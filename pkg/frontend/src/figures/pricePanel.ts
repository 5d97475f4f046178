/** Daily close-price panel; optional per-ticker rebase to the first quote. */
import { basename } from "node:path";

import { linePanel } from "../chart.js";
import {
  dateToUnix,
  readAnnotations,
  readPrices,
  type Annotations,
} from "../schema.js";
import { document } from "../svg.js";

export interface PricePanelOptions {
  input: string;
  annotations?: string;
  width?: number;
  height?: number;
  logY?: boolean;
  /** Divide each column by its first non-blank close. */
  normalize?: boolean;
  title?: string;
}

export function renderPricePanel(options: PricePanelOptions): string {
  const table = readPrices(options.input);
  let annotations: Annotations | undefined;
  if (options.annotations) {
    annotations = readAnnotations(options.annotations);
  }
  const starts = table.dates.map(dateToUnix);
  let columns = table.closes;
  if (options.normalize) {
    columns = columns.map((column) => {
      const base = column.find((v): v is number => v !== null);
      if (base === undefined || base === 0) {
        return column;
      }
      return column.map((v) => (v === null ? null : v / base));
    });
  }
  const { frame, nodes } = linePanel(
    starts,
    table.dates.map((d) => `${d}T00:00:00Z`),
    table.tickers,
    columns,
    {
      width: options.width,
      height: options.height,
      titleText: options.title ?? basename(options.input, ".csv"),
      xLabel: "date (UTC)",
      yLabel: options.normalize ? "close (rebased to first day)" : "close (USD)",
      logY: options.logY,
      annotations,
    },
  );
  return document(frame.width, frame.height, ...nodes);
}
