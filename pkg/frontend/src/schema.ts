/**
 * Readers for the report bundle's file formats.
 *
 * Every reader validates shape up front and raises SchemaError carrying
 * the offending file and line, which the CLI prints verbatim. Values
 * are plain numbers after parsing; empty cells become null.
 */
import { readFileSync } from "node:fs";

import Papa from "papaparse";

export class SchemaError extends Error {
  readonly file: string;
  readonly line: number;

  constructor(file: string, line: number, message: string) {
    super(`${file}:${line}: ${message}`);
    this.name = "SchemaError";
    this.file = file;
    this.line = line;
  }
}

function readText(file: string): string {
  try {
    return readFileSync(file, "utf-8");
  } catch (error) {
    throw new SchemaError(file, 0, `cannot read file (${(error as Error).message})`);
  }
}

/** Rows of raw cells; row i sits on line i+1 of the file. */
function readCsv(file: string): string[][] {
  const parsed = Papa.parse<string[]>(readText(file), {
    skipEmptyLines: true,
  });
  const blocking = parsed.errors.find((e) => e.code !== "UndetectableDelimiter");
  if (blocking) {
    throw new SchemaError(file, (blocking.row ?? 0) + 1, blocking.message);
  }
  if (parsed.data.length === 0) {
    throw new SchemaError(file, 1, "empty file");
  }
  return parsed.data;
}

function requireColumns(file: string, header: string[], required: string[]): number[] {
  return required.map((name) => {
    const index = header.indexOf(name);
    if (index < 0) {
      throw new SchemaError(file, 1, `missing column ${JSON.stringify(name)}`);
    }
    return index;
  });
}

function cell(row: string[], index: number): string {
  return (row[index] ?? "").trim();
}

function parseNumber(file: string, line: number, text: string, column: string): number {
  const value = Number(text);
  if (text === "" || !Number.isFinite(value)) {
    throw new SchemaError(file, line, `bad number ${JSON.stringify(text)} in column ${column}`);
  }
  return value;
}

function parseOptionalNumber(
  file: string,
  line: number,
  text: string,
  column: string,
): number | null {
  return text === "" ? null : parseNumber(file, line, text, column);
}

// ------------------------------------------------------------ series

export interface SeriesTable {
  labels: string[];
  /** Unix window starts, one per row. */
  starts: number[];
  /** ISO-8601 window starts, same order. */
  isoStarts: string[];
  /** values[column][row]; null for blank cells. */
  values: (number | null)[][];
}

export function readSeries(file: string): SeriesTable {
  const rows = readCsv(file);
  const header = rows[0]!;
  requireColumns(file, header, ["window_start_unix", "window_start_iso"]);
  if (header[0] !== "window_start_unix" || header[1] !== "window_start_iso") {
    throw new SchemaError(file, 1, "expected window_start_unix,window_start_iso leading columns");
  }
  const labels = header.slice(2);
  if (labels.length === 0) {
    throw new SchemaError(file, 1, "no value columns");
  }
  const starts: number[] = [];
  const isoStarts: string[] = [];
  const values: (number | null)[][] = labels.map(() => []);
  for (let i = 1; i < rows.length; i++) {
    const row = rows[i]!;
    const line = i + 1;
    if (row.length !== header.length) {
      throw new SchemaError(file, line, `expected ${header.length} cells, found ${row.length}`);
    }
    starts.push(parseNumber(file, line, cell(row, 0), header[0]!));
    isoStarts.push(cell(row, 1));
    labels.forEach((label, j) => {
      values[j]!.push(parseOptionalNumber(file, line, cell(row, j + 2), label));
    });
  }
  return { labels, starts, isoStarts, values };
}

// -------------------------------------------------------- annotations

export interface Marker {
  name: string;
  unix: number;
  iso: string;
}

export interface Annotations {
  markers: Marker[];
  exclusion?: { startUnix: number; endUnix: number; startIso: string; endIso: string };
}

export function readAnnotations(file: string): Annotations {
  let payload: unknown;
  try {
    payload = JSON.parse(readText(file));
  } catch (error) {
    throw new SchemaError(file, 1, `invalid JSON (${(error as Error).message})`);
  }
  const root = payload as Record<string, unknown>;
  if (typeof root !== "object" || root === null || !Array.isArray(root.markers)) {
    throw new SchemaError(file, 1, "expected an object with a markers array");
  }
  const markers: Marker[] = root.markers.map((raw, index) => {
    const m = raw as Record<string, unknown>;
    if (typeof m.name !== "string" || typeof m.unix !== "number" || typeof m.iso !== "string") {
      throw new SchemaError(file, 1, `marker ${index} needs string name, number unix, string iso`);
    }
    return { name: m.name, unix: m.unix, iso: m.iso };
  });
  const annotations: Annotations = { markers };
  if (root.exclusion !== undefined) {
    const zone = root.exclusion as Record<string, unknown>;
    if (
      typeof zone.start_unix !== "number" ||
      typeof zone.end_unix !== "number" ||
      typeof zone.start_iso !== "string" ||
      typeof zone.end_iso !== "string"
    ) {
      throw new SchemaError(file, 1, "exclusion needs start_unix/end_unix/start_iso/end_iso");
    }
    annotations.exclusion = {
      startUnix: zone.start_unix,
      endUnix: zone.end_unix,
      startIso: zone.start_iso,
      endIso: zone.end_iso,
    };
  }
  return annotations;
}

// ------------------------------------------------------------ matrices

export interface LabelledMatrix {
  labels: string[];
  /** values[row][col] in label order. */
  values: number[][];
}

/** Square label-led matrix: correlation grids, lag grids, transition counts. */
export function readMatrix(file: string): LabelledMatrix {
  const rows = readCsv(file);
  const header = rows[0]!;
  if (header[0] !== "label") {
    throw new SchemaError(file, 1, 'expected leading "label" column');
  }
  const labels = header.slice(1);
  if (rows.length - 1 !== labels.length) {
    throw new SchemaError(file, 1, `expected ${labels.length} rows, found ${rows.length - 1}`);
  }
  const values = labels.map((label, i) => {
    const row = rows[i + 1]!;
    const line = i + 2;
    if (cell(row, 0) !== label) {
      throw new SchemaError(file, line, `row label ${cell(row, 0)} does not match ${label}`);
    }
    if (row.length !== header.length) {
      throw new SchemaError(file, line, `expected ${header.length} cells, found ${row.length}`);
    }
    return labels.map((col, j) => parseNumber(file, line, cell(row, j + 1), col));
  });
  return { labels, values };
}

// ----------------------------------------------------------- histograms

export interface DegreeHistogram {
  degrees: number[];
  counts: number[];
  probabilities: number[];
}

export function readDegreeHistogram(file: string): DegreeHistogram {
  const rows = readCsv(file);
  const [d, c, p] = requireColumns(file, rows[0]!, ["degree", "count", "probability"]);
  const out: DegreeHistogram = { degrees: [], counts: [], probabilities: [] };
  for (let i = 1; i < rows.length; i++) {
    const row = rows[i]!;
    const line = i + 1;
    out.degrees.push(parseNumber(file, line, cell(row, d!), "degree"));
    out.counts.push(parseNumber(file, line, cell(row, c!), "count"));
    out.probabilities.push(parseNumber(file, line, cell(row, p!), "probability"));
  }
  return out;
}

export interface LogBins {
  los: number[];
  his: number[];
  counts: number[];
  densities: number[];
}

export function readLogBins(file: string): LogBins {
  const rows = readCsv(file);
  const [lo, hi, c, d] = requireColumns(file, rows[0]!, ["bin_lo", "bin_hi", "count", "density"]);
  const out: LogBins = { los: [], his: [], counts: [], densities: [] };
  for (let i = 1; i < rows.length; i++) {
    const row = rows[i]!;
    const line = i + 1;
    out.los.push(parseNumber(file, line, cell(row, lo!), "bin_lo"));
    out.his.push(parseNumber(file, line, cell(row, hi!), "bin_hi"));
    out.counts.push(parseNumber(file, line, cell(row, c!), "count"));
    out.densities.push(parseNumber(file, line, cell(row, d!), "density"));
  }
  return out;
}

// ------------------------------------------------------------- activity

export interface ActivityTable {
  /** layers_1..layers_k column labels, in k order. */
  layerLabels: string[];
  starts: number[];
  isoStarts: string[];
  /** counts[row][k-1] = wallets active on exactly k layers. */
  counts: number[][];
}

export function readActivitySeries(file: string): ActivityTable {
  const rows = readCsv(file);
  const header = rows[0]!;
  requireColumns(file, header, ["window_start_unix", "window_start_iso"]);
  const layerLabels = header.slice(2);
  layerLabels.forEach((label, k) => {
    if (label !== `layers_${k + 1}`) {
      throw new SchemaError(file, 1, `expected column layers_${k + 1}, found ${label}`);
    }
  });
  if (layerLabels.length === 0) {
    throw new SchemaError(file, 1, "no layer columns");
  }
  const out: ActivityTable = { layerLabels, starts: [], isoStarts: [], counts: [] };
  for (let i = 1; i < rows.length; i++) {
    const row = rows[i]!;
    const line = i + 1;
    out.starts.push(parseNumber(file, line, cell(row, 0), header[0]!));
    out.isoStarts.push(cell(row, 1));
    out.counts.push(
      layerLabels.map((label, j) => parseNumber(file, line, cell(row, j + 2), label)),
    );
  }
  return out;
}

// -------------------------------------------------------- concentration

export interface ConcentrationEntry {
  /** 1-based rank, or "tail" / "none" sentinel rows. */
  rank: number | "tail" | "none";
  wallet: string;
  tokens: number;
  share: number;
}

export interface ConcentrationWindow {
  unix: number;
  iso: string;
  ticker: string;
  entries: ConcentrationEntry[];
}

export function readConcentration(file: string): ConcentrationWindow[] {
  const rows = readCsv(file);
  const header = rows[0]!;
  const [u, iso, ticker, rank, wallet, tokens, share] = requireColumns(file, header, [
    "window_start_unix",
    "window_start_iso",
    "ticker",
    "rank",
    "wallet",
    "tokens",
    "share",
  ]);
  const windows: ConcentrationWindow[] = [];
  for (let i = 1; i < rows.length; i++) {
    const row = rows[i]!;
    const line = i + 1;
    const unix = parseNumber(file, line, cell(row, u!), "window_start_unix");
    const rankText = cell(row, rank!);
    const entry: ConcentrationEntry = {
      rank:
        rankText === "tail" || rankText === "none"
          ? rankText
          : parseNumber(file, line, rankText, "rank"),
      wallet: cell(row, wallet!),
      tokens: parseNumber(file, line, cell(row, tokens!), "tokens"),
      share: parseNumber(file, line, cell(row, share!), "share"),
    };
    const last = windows[windows.length - 1];
    if (last && last.unix === unix) {
      last.entries.push(entry);
    } else {
      windows.push({
        unix,
        iso: cell(row, iso!),
        ticker: cell(row, ticker!),
        entries: [entry],
      });
    }
  }
  return windows;
}

// --------------------------------------------------------------- prices

export interface PriceTable {
  dates: string[];
  tickers: string[];
  /** closes[ticker][row]; null where the source had a gap. */
  closes: (number | null)[][];
}

export function readPrices(file: string): PriceTable {
  const rows = readCsv(file);
  const header = rows[0]!;
  if (header[0] !== "date") {
    throw new SchemaError(file, 1, 'expected leading "date" column');
  }
  const tickers = header.slice(1);
  if (tickers.length === 0) {
    throw new SchemaError(file, 1, "no ticker columns");
  }
  const out: PriceTable = { dates: [], tickers, closes: tickers.map(() => []) };
  for (let i = 1; i < rows.length; i++) {
    const row = rows[i]!;
    const line = i + 1;
    const date = cell(row, 0);
    if (!/^\d{4}-\d{2}-\d{2}$/.test(date)) {
      throw new SchemaError(file, line, `bad date ${JSON.stringify(date)}`);
    }
    out.dates.push(date);
    tickers.forEach((ticker, j) => {
      out.closes[j]!.push(parseOptionalNumber(file, line, cell(row, j + 1), ticker));
    });
  }
  return out;
}

/** Days since the Unix epoch for an ISO calendar date. */
export function dateToUnix(date: string): number {
  const [y, m, d] = date.split("-").map(Number);
  return Date.UTC(y!, m! - 1, d!) / 1000;
}
