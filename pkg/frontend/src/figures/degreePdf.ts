/** Degree probability distribution on log-log axes, optional log-bin overlay. */
import { basename } from "node:path";

import { axisLabels, frame, logXAxis, logYAxis, title } from "../chart.js";
import { readDegreeHistogram, readLogBins } from "../schema.js";
import { document, el, px, type SvgNode } from "../svg.js";

export interface DegreePdfOptions {
  input: string;
  /** Companion .logbins.csv to overlay as a binned density line. */
  logbins?: string;
  width?: number;
  height?: number;
  title?: string;
}

export function renderDegreePdf(options: DegreePdfOptions): string {
  const histogram = readDegreeHistogram(options.input);
  const bins = options.logbins ? readLogBins(options.logbins) : undefined;

  const points: [number, number][] = [];
  for (let i = 0; i < histogram.degrees.length; i++) {
    const degree = histogram.degrees[i]!;
    const probability = histogram.probabilities[i]!;
    if (degree > 0 && probability > 0) {
      points.push([degree, probability]);
    }
  }
  if (points.length === 0) {
    throw new Error(`${options.input}: no positive-degree rows to plot`);
  }
  const binPoints: [number, number][] = [];
  if (bins) {
    for (let i = 0; i < bins.los.length; i++) {
      if (bins.densities[i]! > 0) {
        binPoints.push([Math.sqrt(bins.los[i]! * bins.his[i]!), bins.densities[i]!]);
      }
    }
  }

  const all = points.concat(binPoints);
  const xDomain: [number, number] = [
    Math.min(...all.map((p) => p[0])),
    Math.max(...all.map((p) => p[0])),
  ];
  const yDomain: [number, number] = [
    Math.min(...all.map((p) => p[1])),
    Math.max(...all.map((p) => p[1])),
  ];

  const frameBox = frame(options.width ?? 560, options.height ?? 440, false);
  const plot = frameBox.plot;
  const xAxis = logXAxis(plot, xDomain);
  const yAxis = logYAxis(plot, yDomain);
  const nodes: SvgNode[] = [
    title(frameBox, options.title ?? basename(options.input, ".csv")),
    yAxis.node,
    xAxis.node,
  ];
  for (const [degree, probability] of points) {
    nodes.push(
      el("circle", {
        cx: xAxis.scale(degree),
        cy: yAxis.scale(probability),
        r: 2.5,
        fill: "#1f77b4",
        "fill-opacity": 0.75,
        class: "pdf-point",
      }),
    );
  }
  if (binPoints.length > 0) {
    const path = binPoints
      .map(
        ([cx, density], i) =>
          `${i === 0 ? "M" : "L"}${px(xAxis.scale(cx))} ${px(yAxis.scale(density))}`,
      )
      .join(" ");
    nodes.push(
      el("path", {
        d: path,
        fill: "none",
        stroke: "#d62728",
        "stroke-width": 1.5,
        class: "bin-line",
      }),
    );
  }
  nodes.push(axisLabels(plot, "degree", "probability"));
  return document(frameBox.width, frameBox.height, ...nodes);
}
