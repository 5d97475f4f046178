/**
 * Tiny deterministic SVG builder.
 *
 * Rendering walks an element tree and prints attributes in insertion
 * order with all coordinates run through one rounding helper, so the
 * same figure inputs always yield byte-identical markup.
 */

export type AttrValue = string | number;
export type Attrs = Record<string, AttrValue>;

export interface SvgNode {
  tag: string;
  attrs: Attrs;
  children: (SvgNode | string)[];
}

export function el(tag: string, attrs: Attrs = {}, ...children: (SvgNode | string)[]): SvgNode {
  return { tag, attrs, children };
}

/** Round to 2 decimals and drop trailing zeros: 12.30 -> "12.3", 5.00 -> "5". */
export function px(value: number): string {
  if (!Number.isFinite(value)) {
    throw new Error(`non-finite coordinate: ${value}`);
  }
  const rounded = value.toFixed(2);
  return rounded.includes(".") ? rounded.replace(/\.?0+$/, "") : rounded;
}

function escapeText(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function escapeAttr(text: string): string {
  return escapeText(text).replace(/"/g, "&quot;");
}

function renderAttr(value: AttrValue): string {
  return typeof value === "number" ? px(value) : escapeAttr(value);
}

export function render(node: SvgNode, indent = 0): string {
  const pad = "  ".repeat(indent);
  const attrs = Object.entries(node.attrs)
    .map(([key, value]) => ` ${key}="${renderAttr(value)}"`)
    .join("");
  if (node.children.length === 0) {
    return `${pad}<${node.tag}${attrs}/>`;
  }
  const inline =
    node.children.length === 1 && typeof node.children[0] === "string";
  if (inline) {
    return `${pad}<${node.tag}${attrs}>${escapeText(node.children[0] as string)}</${node.tag}>`;
  }
  const body = node.children
    .map((child) =>
      typeof child === "string" ? pad + "  " + escapeText(child) : render(child, indent + 1),
    )
    .join("\n");
  return `${pad}<${node.tag}${attrs}>\n${body}\n${pad}</${node.tag}>`;
}

export function document(width: number, height: number, ...children: (SvgNode | string)[]): string {
  const root = el(
    "svg",
    {
      xmlns: "http://www.w3.org/2000/svg",
      width,
      height,
      viewBox: `0 0 ${px(width)} ${px(height)}`,
      "font-family": "sans-serif",
    },
    el("rect", { width, height, fill: "#ffffff" }),
    ...children,
  );
  return render(root) + "\n";
}

/** Categorical palette (tab10); figures cycle when they run out. */
export const PALETTE = [
  "#1f77b4",
  "#ff7f0e",
  "#2ca02c",
  "#d62728",
  "#9467bd",
  "#8c564b",
  "#e377c2",
  "#7f7f7f",
  "#bcbd22",
  "#17becf",
] as const;

export function color(index: number): string {
  return PALETTE[index % PALETTE.length]!;
}
