/** Correlation-matrix heatmap with one labelled tick per row/column. */
import { basename } from "node:path";

import { frame, title } from "../chart.js";
import { readMatrix } from "../schema.js";
import { document, el, type SvgNode } from "../svg.js";

export interface HeatmapOptions {
  input: string;
  width?: number;
  height?: number;
  /** Print the coefficient inside each cell. */
  showValues?: boolean;
  title?: string;
}

/** Blue-white-red diverging ramp over [-1, 1]. */
export function divergingColor(value: number): string {
  const clamped = Math.max(-1, Math.min(1, value));
  const blend = (from: number, to: number, t: number) => Math.round(from + (to - from) * t);
  let r: number, g: number, b: number;
  if (clamped < 0) {
    const t = clamped + 1; // -1 -> 0, 0 -> 1
    r = blend(0x21, 0xff, t);
    g = blend(0x66, 0xff, t);
    b = blend(0xac, 0xff, t);
  } else {
    const t = clamped;
    r = blend(0xff, 0xb2, t);
    g = blend(0xff, 0x18, t);
    b = blend(0xff, 0x2b, t);
  }
  return `#${((r << 16) | (g << 8) | b).toString(16).padStart(6, "0")}`;
}

export function renderHeatmap(options: HeatmapOptions): string {
  const matrix = readMatrix(options.input);
  const size = matrix.labels.length;
  const frameBox = frame(options.width ?? 560, options.height ?? 520, false);
  const plot = frameBox.plot;
  const cell = Math.min(plot.width, plot.height) / size;
  const nodes: SvgNode[] = [title(frameBox, options.title ?? basename(options.input, ".csv"))];

  for (let i = 0; i < size; i++) {
    for (let j = 0; j < size; j++) {
      const value = matrix.values[i]![j]!;
      const x = plot.left + j * cell;
      const y = plot.top + i * cell;
      nodes.push(
        el("rect", {
          x,
          y,
          width: cell,
          height: cell,
          fill: divergingColor(value),
          stroke: "#ffffff",
          "stroke-width": 0.5,
          class: "cell",
          "data-row": matrix.labels[i]!,
          "data-col": matrix.labels[j]!,
        }),
      );
      if (options.showValues) {
        nodes.push(
          el(
            "text",
            {
              x: x + cell / 2,
              y: y + cell / 2 + 3,
              "text-anchor": "middle",
              "font-size": 9,
              fill: Math.abs(value) > 0.6 ? "#ffffff" : "#222222",
              class: "cell-value",
            },
            value.toFixed(2),
          ),
        );
      }
    }
  }
  matrix.labels.forEach((label, i) => {
    nodes.push(
      el(
        "text",
        {
          x: plot.left + i * cell + cell / 2,
          y: plot.top + size * cell + 14,
          "text-anchor": "middle",
          "font-size": 10,
          class: "tick-label-x",
        },
        label,
      ),
      el(
        "text",
        {
          x: plot.left - 6,
          y: plot.top + i * cell + cell / 2 + 3,
          "text-anchor": "end",
          "font-size": 10,
          class: "tick-label-y",
        },
        label,
      ),
    );
  });

  // compact color bar under the grid
  const barY = plot.top + size * cell + 28;
  const steps = 40;
  const barWidth = size * cell;
  for (let s = 0; s < steps; s++) {
    nodes.push(
      el("rect", {
        x: plot.left + (s * barWidth) / steps,
        y: barY,
        width: barWidth / steps + 0.5,
        height: 8,
        fill: divergingColor(-1 + (2 * s) / (steps - 1)),
        class: "colorbar",
      }),
    );
  }
  for (const [t, label] of [
    [0, "-1"],
    [0.5, "0"],
    [1, "1"],
  ] as const) {
    nodes.push(
      el(
        "text",
        {
          x: plot.left + barWidth * t,
          y: barY + 20,
          "text-anchor": "middle",
          "font-size": 9,
          class: "colorbar-label",
        },
        label,
      ),
    );
  }
  return document(frameBox.width, frameBox.height, ...nodes);
}
