/**
 * Shared plot scaffolding: margins, linear/log/time axes, legends, the
 * annotation layer (marker lines plus exclusion shading), and the line
 * panel core reused by the time-series figure kinds.
 */
import { extent } from "d3-array";
import { scaleLinear, scaleLog } from "d3-scale";

import type { Annotations } from "./schema.js";
import { el, px, color, type SvgNode } from "./svg.js";

export interface Box {
  left: number;
  top: number;
  width: number;
  height: number;
}

export interface Frame {
  width: number;
  height: number;
  plot: Box;
}

export const DEFAULT_WIDTH = 880;
export const DEFAULT_HEIGHT = 420;

const MARGIN = { top: 42, right: 150, bottom: 46, left: 64 };

export function frame(width = DEFAULT_WIDTH, height = DEFAULT_HEIGHT, rightGutter = true): Frame {
  const right = rightGutter ? MARGIN.right : 24;
  return {
    width,
    height,
    plot: {
      left: MARGIN.left,
      top: MARGIN.top,
      width: width - MARGIN.left - right,
      height: height - MARGIN.top - MARGIN.bottom,
    },
  };
}

export type Scale = (value: number) => number;

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const scale = scaleLinear().domain(domain).range(range);
  return (value) => scale(value);
}

export function title(frameBox: Frame, text: string): SvgNode {
  return el(
    "text",
    {
      x: frameBox.width / 2,
      y: 20,
      "text-anchor": "middle",
      "font-size": 15,
      "font-weight": "bold",
      class: "title",
    },
    text,
  );
}

/** Evenly spaced date ticks along the x axis, labelled YYYY-MM-DD. */
export function timeAxis(
  plot: Box,
  x: Scale,
  starts: number[],
  isoStarts: string[],
  tickTarget = 7,
): SvgNode {
  const stride = Math.max(1, Math.ceil(starts.length / tickTarget));
  const children: SvgNode[] = [
    el("line", {
      x1: plot.left,
      y1: plot.top + plot.height,
      x2: plot.left + plot.width,
      y2: plot.top + plot.height,
      stroke: "#222222",
    }),
  ];
  for (let i = 0; i < starts.length; i += stride) {
    const tickX = x(starts[i]!);
    children.push(
      el("line", {
        x1: tickX,
        y1: plot.top + plot.height,
        x2: tickX,
        y2: plot.top + plot.height + 5,
        stroke: "#222222",
      }),
      el(
        "text",
        {
          x: tickX,
          y: plot.top + plot.height + 18,
          "text-anchor": "middle",
          "font-size": 10,
          class: "tick-label-x",
        },
        (isoStarts[i] ?? "").slice(0, 10),
      ),
    );
  }
  return el("g", { class: "axis axis-x" }, ...children);
}

function formatTick(value: number): string {
  if (value !== 0 && (Math.abs(value) >= 1e6 || Math.abs(value) < 1e-3)) {
    return value.toExponential(1).replace("e+", "e");
  }
  const text = value.toFixed(3);
  return text.includes(".") ? text.replace(/\.?0+$/, "") : text;
}

export function linearYAxis(plot: Box, domain: [number, number]): { scale: Scale; node: SvgNode } {
  const scale = scaleLinear()
    .domain(domain)
    .range([plot.top + plot.height, plot.top])
    .nice();
  const ticks = scale.ticks(6);
  const children: SvgNode[] = [
    el("line", {
      x1: plot.left,
      y1: plot.top,
      x2: plot.left,
      y2: plot.top + plot.height,
      stroke: "#222222",
    }),
  ];
  for (const tick of ticks) {
    const y = scale(tick);
    children.push(
      el("line", {
        x1: plot.left,
        y1: y,
        x2: plot.left + plot.width,
        y2: y,
        stroke: "#dddddd",
        "stroke-width": 0.6,
      }),
      el(
        "text",
        {
          x: plot.left - 7,
          y: y + 3,
          "text-anchor": "end",
          "font-size": 10,
          class: "tick-label-y",
        },
        formatTick(tick),
      ),
    );
  }
  return { scale: (v) => scale(v), node: el("g", { class: "axis axis-y" }, ...children) };
}

/** Decade ticks; adds 2x/5x mantissas when fewer than three decades fit. */
function logTicks(domain: [number, number]): number[] {
  const [lo, hi] = domain;
  const lowExp = Math.floor(Math.log10(lo));
  const highExp = Math.ceil(Math.log10(hi));
  const inDomain = (v: number) => v >= lo / 1.0001 && v <= hi * 1.0001;
  let decades = 0;
  for (let exp = lowExp; exp <= highExp; exp++) {
    if (inDomain(10 ** exp)) decades++;
  }
  const mantissas = decades >= 3 ? [1] : [1, 2, 5];
  const ticks: number[] = [];
  for (let exp = lowExp - 1; exp <= highExp; exp++) {
    for (const m of mantissas) {
      const value = m * 10 ** exp;
      if (inDomain(value)) ticks.push(value);
    }
  }
  return ticks;
}

/** Log y axis over positive values. */
export function logYAxis(plot: Box, domain: [number, number]): { scale: Scale; node: SvgNode } {
  const scale = scaleLog()
    .domain(domain)
    .range([plot.top + plot.height, plot.top]);
  const children: SvgNode[] = [
    el("line", {
      x1: plot.left,
      y1: plot.top,
      x2: plot.left,
      y2: plot.top + plot.height,
      stroke: "#222222",
    }),
  ];
  for (const value of logTicks(domain)) {
    const y = scale(value);
    children.push(
      el("line", {
        x1: plot.left,
        y1: y,
        x2: plot.left + plot.width,
        y2: y,
        stroke: "#dddddd",
        "stroke-width": 0.6,
      }),
      el(
        "text",
        {
          x: plot.left - 7,
          y: y + 3,
          "text-anchor": "end",
          "font-size": 10,
          class: "tick-label-y",
        },
        formatTick(value),
      ),
    );
  }
  return {
    scale: (v) => scale(v),
    node: el("g", { class: "axis axis-y log-axis" }, ...children),
  };
}

/** Log x axis for degree PDFs. */
export function logXAxis(plot: Box, domain: [number, number]): { scale: Scale; node: SvgNode } {
  const scale = scaleLog()
    .domain(domain)
    .range([plot.left, plot.left + plot.width]);
  const children: SvgNode[] = [
    el("line", {
      x1: plot.left,
      y1: plot.top + plot.height,
      x2: plot.left + plot.width,
      y2: plot.top + plot.height,
      stroke: "#222222",
    }),
  ];
  for (const value of logTicks(domain)) {
    const x = scale(value);
    children.push(
      el("line", {
        x1: x,
        y1: plot.top + plot.height,
        x2: x,
        y2: plot.top + plot.height + 5,
        stroke: "#222222",
      }),
      el(
        "text",
        {
          x,
          y: plot.top + plot.height + 18,
          "text-anchor": "middle",
          "font-size": 10,
          class: "tick-label-x",
        },
        formatTick(value),
      ),
    );
  }
  return {
    scale: (v) => scale(v),
    node: el("g", { class: "axis axis-x log-axis" }, ...children),
  };
}

export function axisLabels(plot: Box, xLabel: string, yLabel: string): SvgNode {
  return el(
    "g",
    { class: "axis-labels" },
    el(
      "text",
      {
        x: plot.left + plot.width / 2,
        y: plot.top + plot.height + 36,
        "text-anchor": "middle",
        "font-size": 11,
      },
      xLabel,
    ),
    el(
      "text",
      {
        x: 14,
        y: plot.top + plot.height / 2,
        "text-anchor": "middle",
        "font-size": 11,
        transform: `rotate(-90 14 ${px(plot.top + plot.height / 2)})`,
      },
      yLabel,
    ),
  );
}

export function legend(plot: Box, labels: string[]): SvgNode {
  const children: SvgNode[] = [];
  labels.forEach((label, i) => {
    const y = plot.top + 14 * i;
    children.push(
      el("rect", {
        x: plot.left + plot.width + 14,
        y: y - 7,
        width: 10,
        height: 10,
        fill: color(i),
        class: "legend-swatch",
      }),
      el(
        "text",
        {
          x: plot.left + plot.width + 29,
          y: y + 2,
          "font-size": 10,
          class: "legend-item",
        },
        label,
      ),
    );
  });
  return el("g", { class: "legend" }, ...children);
}

/**
 * Exclusion shading plus labelled vertical marker lines. Drawn behind
 * the data; markers outside the x domain are dropped.
 */
export function annotationLayer(
  plot: Box,
  x: Scale,
  domain: [number, number],
  annotations: Annotations,
): SvgNode {
  const children: SvgNode[] = [];
  if (annotations.exclusion) {
    const lo = Math.max(annotations.exclusion.startUnix, domain[0]);
    const hi = Math.min(annotations.exclusion.endUnix, domain[1]);
    if (lo < hi) {
      children.push(
        el("rect", {
          x: x(lo),
          y: plot.top,
          width: x(hi) - x(lo),
          height: plot.height,
          fill: "#f4c7c3",
          "fill-opacity": 0.45,
          class: "exclusion",
        }),
      );
    }
  }
  for (const marker of annotations.markers) {
    if (marker.unix < domain[0] || marker.unix > domain[1]) continue;
    const markerX = x(marker.unix);
    children.push(
      el(
        "g",
        { class: "marker", "data-marker": marker.name },
        el("line", {
          x1: markerX,
          y1: plot.top,
          x2: markerX,
          y2: plot.top + plot.height,
          stroke: "#555555",
          "stroke-dasharray": "4 3",
        }),
        el(
          "text",
          {
            x: markerX,
            y: plot.top - 5,
            "text-anchor": "middle",
            "font-size": 11,
            class: "marker-label",
          },
          marker.name,
        ),
      ),
    );
  }
  return el("g", { class: "annotations" }, ...children);
}

/** Polyline path with gaps at null (or non-positive, in log mode) points. */
export function linePath(
  xs: number[],
  values: (number | null)[],
  x: Scale,
  y: Scale,
  logY: boolean,
): string {
  const parts: string[] = [];
  let pen = false;
  for (let i = 0; i < xs.length; i++) {
    const value = values[i] ?? null;
    if (value === null || (logY && value <= 0)) {
      pen = false;
      continue;
    }
    parts.push(`${pen ? "L" : "M"}${px(x(xs[i]!))} ${px(y(value))}`);
    pen = true;
  }
  return parts.join(" ");
}

export interface LinePanelOptions {
  width?: number;
  height?: number;
  titleText: string;
  xLabel: string;
  yLabel: string;
  logY?: boolean;
  annotations?: Annotations;
}

/** Core shared by the series, price, and activity figures. */
export function linePanel(
  starts: number[],
  isoStarts: string[],
  labels: string[],
  columns: (number | null)[][],
  options: LinePanelOptions,
): { frame: Frame; nodes: SvgNode[] } {
  const frameBox = frame(options.width, options.height);
  const plot = frameBox.plot;
  if (starts.length === 0) {
    throw new Error("no rows to plot");
  }
  const xDomain = extent(starts) as [number, number];
  const x = linearScale(xDomain, [plot.left, plot.left + plot.width]);
  const flat = columns.flat().filter((v): v is number => v !== null);
  const positive = flat.filter((v) => v > 0);
  const yAxis = options.logY
    ? logYAxis(plot, [
        Math.min(...(positive.length ? positive : [1])),
        Math.max(...(positive.length ? positive : [1])),
      ])
    : linearYAxis(plot, [Math.min(0, ...flat), Math.max(1e-9, ...flat)]);

  const nodes: SvgNode[] = [title(frameBox, options.titleText)];
  if (options.annotations) {
    nodes.push(annotationLayer(plot, x, xDomain, options.annotations));
  }
  nodes.push(yAxis.node, timeAxis(plot, x, starts, isoStarts));
  labels.forEach((label, i) => {
    const path = linePath(starts, columns[i]!, x, yAxis.scale, options.logY ?? false);
    if (path) {
      nodes.push(
        el("path", {
          d: path,
          fill: "none",
          stroke: color(i),
          "stroke-width": 1.5,
          class: "series-line",
          "data-label": label,
        }),
      );
    }
  });
  nodes.push(legend(plot, labels), axisLabels(plot, options.xLabel, options.yLabel));
  return { frame: frameBox, nodes };
}
