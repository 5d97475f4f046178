/**
 * Two-column flow diagram for favorite-layer transitions: left nodes
 * are the earlier period's favorites, right nodes the later period's,
 * ribbon thickness proportional to the wallet count that moved.
 */
import { basename } from "node:path";

import { frame, title } from "../chart.js";
import { readMatrix } from "../schema.js";
import { color, document, el, px, type SvgNode } from "../svg.js";

export interface SankeyOptions {
  input: string;
  width?: number;
  height?: number;
  title?: string;
}

const NODE_WIDTH = 14;
const NODE_GAP = 10;

interface Column {
  /** label index -> y offset of the next unplaced ribbon end. */
  cursor: Map<number, number>;
  /** label index -> [top, height] of the node bar. */
  bars: Map<number, [number, number]>;
}

function layoutColumn(totals: number[], top: number, scale: number): Column {
  const cursor = new Map<number, number>();
  const bars = new Map<number, [number, number]>();
  let y = top;
  totals.forEach((total, index) => {
    if (total <= 0) {
      return;
    }
    bars.set(index, [y, total * scale]);
    cursor.set(index, y);
    y += total * scale + NODE_GAP;
  });
  return { cursor, bars };
}

export function renderSankey(options: SankeyOptions): string {
  const matrix = readMatrix(options.input);
  const size = matrix.labels.length;
  const leftTotals = matrix.values.map((row) => row.reduce((a, b) => a + b, 0));
  const rightTotals = matrix.labels.map((_, j) =>
    matrix.values.reduce((a, row) => a + row[j]!, 0),
  );
  const flow = leftTotals.reduce((a, b) => a + b, 0);
  if (flow === 0) {
    throw new Error(`${options.input}: transition matrix has no flows`);
  }

  const frameBox = frame(options.width ?? 640, options.height ?? 480, false);
  const plot = frameBox.plot;
  const occupied = (totals: number[]) => totals.filter((t) => t > 0).length;
  const gaps = Math.max(occupied(leftTotals), occupied(rightTotals)) - 1;
  const scale = (plot.height - Math.max(gaps, 0) * NODE_GAP) / flow;

  const left = layoutColumn(leftTotals, plot.top, scale);
  const right = layoutColumn(rightTotals, plot.top, scale);
  const leftX = plot.left + 60;
  const rightX = plot.left + plot.width - 60 - NODE_WIDTH;
  const midX = (leftX + NODE_WIDTH + rightX) / 2;

  const nodes: SvgNode[] = [title(frameBox, options.title ?? basename(options.input, ".csv"))];

  for (let i = 0; i < size; i++) {
    for (let j = 0; j < size; j++) {
      const count = matrix.values[i]![j]!;
      if (count <= 0) continue;
      const band = count * scale;
      const sy = left.cursor.get(i)!;
      const ty = right.cursor.get(j)!;
      left.cursor.set(i, sy + band);
      right.cursor.set(j, ty + band);
      const sx = leftX + NODE_WIDTH;
      const tx = rightX;
      const d =
        `M${px(sx)} ${px(sy)} ` +
        `C${px(midX)} ${px(sy)} ${px(midX)} ${px(ty)} ${px(tx)} ${px(ty)} ` +
        `L${px(tx)} ${px(ty + band)} ` +
        `C${px(midX)} ${px(ty + band)} ${px(midX)} ${px(sy + band)} ${px(sx)} ${px(sy + band)} Z`;
      nodes.push(
        el(
          "path",
          {
            d,
            fill: color(i),
            "fill-opacity": 0.5,
            class: "ribbon",
            "data-from": matrix.labels[i]!,
            "data-to": matrix.labels[j]!,
          },
          el("title", {}, `${matrix.labels[i]} -> ${matrix.labels[j]}: ${count}`),
        ),
      );
    }
  }

  const drawBars = (column: Column, x: number, anchorEnd: boolean, totals: number[]) => {
    for (const [index, [top, height]] of column.bars) {
      nodes.push(
        el("rect", {
          x,
          y: top,
          width: NODE_WIDTH,
          height: Math.max(height, 1),
          fill: color(index),
          class: "node",
          "data-label": matrix.labels[index]!,
        }),
        el(
          "text",
          {
            x: anchorEnd ? x - 6 : x + NODE_WIDTH + 6,
            y: top + Math.max(height, 1) / 2 + 3,
            "text-anchor": anchorEnd ? "end" : "start",
            "font-size": 10,
            class: "node-label",
          },
          `${matrix.labels[index]} (${totals[index]})`,
        ),
      );
    }
  };
  drawBars(left, leftX, true, leftTotals);
  drawBars(right, rightX, false, rightTotals);

  nodes.push(
    el(
      "text",
      {
        x: leftX + NODE_WIDTH / 2,
        y: plot.top - 8,
        "text-anchor": "middle",
        "font-size": 11,
        class: "column-label",
      },
      "before",
    ),
    el(
      "text",
      {
        x: rightX + NODE_WIDTH / 2,
        y: plot.top - 8,
        "text-anchor": "middle",
        "font-size": 11,
        class: "column-label",
      },
      "after",
    ),
  );
  return document(frameBox.width, frameBox.height, ...nodes);
}
