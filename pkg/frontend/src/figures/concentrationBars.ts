/**
 * Stacked share bars, one per analysed window: ranked sellers from the
 * bottom up, the tail in grey on top, empty windows marked as such.
 */
import { basename } from "node:path";

import { axisLabels, frame, linearYAxis, title } from "../chart.js";
import { readConcentration } from "../schema.js";
import { color, document, el, type SvgNode } from "../svg.js";

export interface ConcentrationBarsOptions {
  input: string;
  width?: number;
  height?: number;
  title?: string;
}

const TAIL_COLOR = "#b0b0b0";

export function renderConcentrationBars(options: ConcentrationBarsOptions): string {
  const windows = readConcentration(options.input);
  if (windows.length === 0) {
    throw new Error(`${options.input}: no windows to plot`);
  }
  const frameBox = frame(options.width ?? 680, options.height ?? 440);
  const plot = frameBox.plot;
  const yAxis = linearYAxis(plot, [0, 1]);
  const slot = plot.width / windows.length;
  const barWidth = Math.min(slot * 0.6, 80);

  const nodes: SvgNode[] = [
    title(frameBox, options.title ?? basename(options.input, ".csv")),
    yAxis.node,
  ];
  let maxRank = 0;
  windows.forEach((window, index) => {
    const xMid = plot.left + slot * (index + 0.5);
    const x = xMid - barWidth / 2;
    nodes.push(
      el(
        "text",
        {
          x: xMid,
          y: plot.top + plot.height + 18,
          "text-anchor": "middle",
          "font-size": 10,
          class: "tick-label-x",
        },
        window.iso.slice(0, 10),
      ),
    );
    const isEmpty = window.entries.length === 1 && window.entries[0]!.rank === "none";
    if (isEmpty) {
      nodes.push(
        el(
          "text",
          {
            x: xMid,
            y: plot.top + plot.height - 6,
            "text-anchor": "middle",
            "font-size": 9,
            fill: "#888888",
            class: "no-activity",
          },
          "no activity",
        ),
      );
      return;
    }
    let cumulative = 0;
    for (const entry of window.entries) {
      if (entry.share <= 0) continue;
      const y0 = yAxis.scale(cumulative);
      const y1 = yAxis.scale(cumulative + entry.share);
      cumulative += entry.share;
      const fill =
        entry.rank === "tail" ? TAIL_COLOR : color((entry.rank as number) - 1);
      nodes.push(
        el(
          "rect",
          {
            x,
            y: y1,
            width: barWidth,
            height: y0 - y1,
            fill,
            stroke: "#ffffff",
            "stroke-width": 0.5,
            class: "bar-segment",
            "data-rank": String(entry.rank),
          },
          el(
            "title",
            {},
            entry.rank === "tail"
              ? `tail (${entry.wallet}): ${entry.share.toFixed(4)}`
              : `#${entry.rank} ${entry.wallet}: ${entry.share.toFixed(4)}`,
          ),
        ),
      );
      if (typeof entry.rank === "number") {
        maxRank = Math.max(maxRank, entry.rank);
      }
    }
  });

  const legendLabels = Array.from({ length: maxRank }, (_, i) => `rank ${i + 1}`);
  legendLabels.forEach((label, i) => {
    const y = plot.top + 14 * i;
    nodes.push(
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
        { x: plot.left + plot.width + 29, y: y + 2, "font-size": 10, class: "legend-item" },
        label,
      ),
    );
  });
  const tailY = plot.top + 14 * legendLabels.length;
  nodes.push(
    el("rect", {
      x: plot.left + plot.width + 14,
      y: tailY - 7,
      width: 10,
      height: 10,
      fill: TAIL_COLOR,
      class: "legend-swatch",
    }),
    el(
      "text",
      { x: plot.left + plot.width + 29, y: tailY + 2, "font-size": 10, class: "legend-item" },
      "tail",
    ),
    axisLabels(plot, "window start (UTC)", "share of sold tokens"),
  );
  return document(frameBox.width, frameBox.height, ...nodes);
}
