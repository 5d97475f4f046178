/**
 * plotkit <kind> --input report.csv --out figure.svg [options]
 *
 * One subcommand per figure kind; consumes report-bundle files and
 * writes SVG, or PNG when asked. Schema problems exit nonzero with the
 * offending file and line on stderr.
 */
import { writeFileSync } from "node:fs";
import { pathToFileURL } from "node:url";
import { parseArgs } from "node:util";

import { renderActivityLines } from "./figures/activityLines.js";
import { renderConcentrationBars } from "./figures/concentrationBars.js";
import { renderDegreePdf } from "./figures/degreePdf.js";
import { renderHeatmap } from "./figures/heatmap.js";
import { renderPricePanel } from "./figures/pricePanel.js";
import { renderSankey } from "./figures/sankey.js";
import { renderSeriesPanel } from "./figures/seriesPanel.js";
import { SchemaError } from "./schema.js";

export const EXIT_OK = 0;
export const EXIT_ERROR = 1;
export const EXIT_USAGE = 2;

interface CommonFlags {
  input: string;
  out: string;
  width?: number;
  height?: number;
  title?: string;
}

type Renderer = (flags: CommonFlags, values: Record<string, unknown>) => string;

const RENDERERS: Record<string, Renderer> = {
  "series-panel": (flags, values) =>
    renderSeriesPanel({
      ...flags,
      annotations: values.annotations as string | undefined,
      logY: Boolean(values["log-y"]),
    }),
  "price-panel": (flags, values) =>
    renderPricePanel({
      ...flags,
      annotations: values.annotations as string | undefined,
      logY: Boolean(values["log-y"]),
      normalize: Boolean(values.normalize),
    }),
  heatmap: (flags, values) =>
    renderHeatmap({ ...flags, showValues: Boolean(values["show-values"]) }),
  "degree-pdf": (flags, values) =>
    renderDegreePdf({ ...flags, logbins: values.logbins as string | undefined }),
  "activity-lines": (flags, values) =>
    renderActivityLines({
      ...flags,
      annotations: values.annotations as string | undefined,
      share: Boolean(values.share),
      logY: Boolean(values["log-y"]),
    }),
  sankey: (flags) => renderSankey(flags),
  "concentration-bars": (flags) => renderConcentrationBars(flags),
};

function usage(): string {
  return [
    "usage: plotkit <kind> --input FILE --out FILE [options]",
    "",
    `kinds: ${Object.keys(RENDERERS).join(", ")}`,
    "",
    "common options:",
    "  --input FILE        report file to plot (required)",
    "  --out FILE          output path; .png rasterizes, anything else is SVG",
    "  --format svg|png    override the extension-based format choice",
    "  --width N           canvas width in pixels",
    "  --height N          canvas height in pixels",
    "  --title TEXT        figure title (defaults to the input file name)",
    "",
    "kind-specific options:",
    "  --annotations FILE  marker/exclusion sidecar (series, price, activity)",
    "  --log-y             log y axis (series, price, activity)",
    "  --normalize         rebase each price column to its first quote",
    "  --share             plot activity counts as per-window shares",
    "  --logbins FILE      overlay a .logbins.csv density (degree-pdf)",
    "  --show-values       print coefficients inside heatmap cells",
  ].join("\n");
}

async function writeImage(out: string, format: string, svg: string): Promise<void> {
  if (format === "png") {
    const { Resvg } = await import("@resvg/resvg-js");
    const png = new Resvg(svg).render().asPng();
    writeFileSync(out, png);
  } else {
    writeFileSync(out, svg, "utf-8");
  }
}

function parsePixels(raw: unknown, flag: string): number | undefined {
  if (raw === undefined) {
    return undefined;
  }
  const value = Number(raw);
  if (!Number.isInteger(value) || value < 100 || value > 10_000) {
    throw new UsageError(`${flag} must be an integer between 100 and 10000`);
  }
  return value;
}

class UsageError extends Error {}

export async function run(argv: string[]): Promise<number> {
  const kind = argv[0];
  if (kind === undefined || kind === "--help" || kind === "-h") {
    console.error(usage());
    return kind === undefined ? EXIT_USAGE : EXIT_OK;
  }
  const renderer = RENDERERS[kind];
  if (renderer === undefined) {
    console.error(`error: unknown figure kind ${JSON.stringify(kind)}\n\n${usage()}`);
    return EXIT_USAGE;
  }
  try {
    const { values } = parseArgs({
      args: argv.slice(1),
      options: {
        input: { type: "string" },
        out: { type: "string" },
        format: { type: "string" },
        width: { type: "string" },
        height: { type: "string" },
        title: { type: "string" },
        annotations: { type: "string" },
        logbins: { type: "string" },
        "log-y": { type: "boolean" },
        normalize: { type: "boolean" },
        share: { type: "boolean" },
        "show-values": { type: "boolean" },
      },
      strict: true,
    });
    if (!values.input || !values.out) {
      throw new UsageError("--input and --out are required");
    }
    const format = values.format ?? (values.out.endsWith(".png") ? "png" : "svg");
    if (format !== "svg" && format !== "png") {
      throw new UsageError(`unknown format ${JSON.stringify(format)}`);
    }
    const flags: CommonFlags = {
      input: values.input,
      out: values.out,
      width: parsePixels(values.width, "--width"),
      height: parsePixels(values.height, "--height"),
      title: values.title,
    };
    const svg = renderer(flags, values);
    await writeImage(values.out, format, svg);
    return EXIT_OK;
  } catch (error) {
    if (error instanceof UsageError || (error as { code?: string }).code?.startsWith("ERR_PARSE_ARGS")) {
      console.error(`error: ${(error as Error).message}\n\n${usage()}`);
      return EXIT_USAGE;
    }
    if (error instanceof SchemaError) {
      console.error(`error: ${error.message}`);
      return EXIT_ERROR;
    }
    console.error(`error: ${(error as Error).message}`);
    return EXIT_ERROR;
  }
}

const invokedDirectly =
  typeof process.argv[1] === "string" &&
  import.meta.url === pathToFileURL(process.argv[1]).href;

if (invokedDirectly) {
  run(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
