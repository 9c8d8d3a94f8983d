/** Tidy layout and SVG rendering for decision-tree explanations.
 *
 * Split tests are labeled with original column names: one-hot columns render
 * as "column = value?" (left edge: no, right edge: yes) and continuous
 * columns as "column <= threshold?" (left edge: yes, right edge: no).
 * Leaves carry the predicted class. Node boxes are sized to their labels and
 * leaves get disjoint horizontal slots, so boxes never overlap; the SVG
 * viewBox scales the whole drawing into the viewport.
 */

import type { EncodedFeature, TreeDocument } from "./types.js";

export interface LaidOutNode {
  index: number;
  x: number; // center
  y: number; // center
  width: number;
  height: number;
  label: string;
  isLeaf: boolean;
}

export interface Layout {
  nodes: LaidOutNode[];
  edges: { from: number; to: number; label: string }[];
  width: number;
  height: number;
}

const CHAR_WIDTH = 7.2;
const BOX_HEIGHT = 34;
const H_GAP = 18;
const V_GAP = 64;
const PADDING = 16;

export function nodeLabel(
  doc: TreeDocument,
  index: number,
  classNames: [string, string] = ["class 0", "class 1"],
): string {
  const node = doc.nodes[index];
  if (node.feature === null) {
    return classNames[node.label];
  }
  const meta: EncodedFeature | undefined = doc.meta.encoded_features?.[node.feature];
  if (meta === undefined) {
    return `feature ${node.feature} ≤ ${node.threshold!.toFixed(2)}?`;
  }
  if (meta.value !== null) {
    return `${meta.column} = ${meta.value}?`;
  }
  return `${meta.column} ≤ ${node.threshold!.toFixed(2)}?`;
}

export function edgeLabels(doc: TreeDocument, index: number): [string, string] {
  const node = doc.nodes[index];
  const meta = node.feature === null ? undefined : doc.meta.encoded_features?.[node.feature];
  if (meta !== undefined && meta.value !== null) {
    return ["no", "yes"]; // one-hot: left means the value is absent
  }
  return ["yes", "no"]; // continuous: left means <= threshold
}

export function layoutTree(
  doc: TreeDocument,
  classNames: [string, string] = ["class 0", "class 1"],
): Layout {
  const labels = doc.nodes.map((_, i) => nodeLabel(doc, i, classNames));
  const widths = labels.map((l) => Math.max(60, l.length * CHAR_WIDTH + 14));
  const slot = Math.max(...widths) + H_GAP;

  const depths = new Array<number>(doc.nodes.length).fill(0);
  const order: number[] = [];
  let nextLeafSlot = 0;
  const xs = new Array<number>(doc.nodes.length).fill(0);

  const place = (index: number, depth: number): number => {
    depths[index] = depth;
    order.push(index);
    const node = doc.nodes[index];
    if (node.feature === null) {
      xs[index] = (nextLeafSlot++ + 0.5) * slot;
    } else {
      const lx = place(node.left, depth + 1);
      const rx = place(node.right, depth + 1);
      xs[index] = (lx + rx) / 2;
    }
    return xs[index];
  };
  place(doc.root, 0);

  const maxDepth = Math.max(...depths);
  const nodes: LaidOutNode[] = order.map((i) => ({
    index: i,
    x: xs[i] + PADDING,
    y: depths[i] * (BOX_HEIGHT + V_GAP) + BOX_HEIGHT / 2 + PADDING,
    width: widths[i],
    height: BOX_HEIGHT,
    label: labels[i],
    isLeaf: doc.nodes[i].feature === null,
  }));
  const edges = order
    .filter((i) => doc.nodes[i].feature !== null)
    .flatMap((i) => {
      const [leftLabel, rightLabel] = edgeLabels(doc, i);
      return [
        { from: i, to: doc.nodes[i].left, label: leftLabel },
        { from: i, to: doc.nodes[i].right, label: rightLabel },
      ];
    });
  return {
    nodes,
    edges,
    width: nextLeafSlot * slot + 2 * PADDING,
    height: (maxDepth + 1) * (BOX_HEIGHT + V_GAP) - V_GAP + 2 * PADDING,
  };
}

export function boxesOverlap(a: LaidOutNode, b: LaidOutNode): boolean {
  return (
    Math.abs(a.x - b.x) < (a.width + b.width) / 2 &&
    Math.abs(a.y - b.y) < (a.height + b.height) / 2
  );
}

function escapeXml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function renderTreeSvg(
  doc: TreeDocument,
  classNames: [string, string] = ["class 0", "class 1"],
  viewportWidth = 1280,
): string {
  const layout = layoutTree(doc, classNames);
  const byIndex = new Map(layout.nodes.map((n) => [n.index, n]));
  const parts: string[] = [];
  const scale = Math.min(1, viewportWidth / layout.width);
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${Math.round(layout.width * scale)}" ` +
      `height="${Math.round(layout.height * scale)}" viewBox="0 0 ${layout.width} ${layout.height}" ` +
      `font-family="sans-serif" font-size="13">`,
  );
  for (const edge of layout.edges) {
    const a = byIndex.get(edge.from)!;
    const b = byIndex.get(edge.to)!;
    const x1 = a.x;
    const y1 = a.y + a.height / 2;
    const x2 = b.x;
    const y2 = b.y - b.height / 2;
    parts.push(`<line x1="${x1}" y1="${y1}" x2="${x2}" y2="${y2}" stroke="#888"/>`);
    parts.push(
      `<text x="${(x1 + x2) / 2}" y="${(y1 + y2) / 2 - 4}" text-anchor="middle" fill="#555">` +
        `${escapeXml(edge.label)}</text>`,
    );
  }
  for (const node of layout.nodes) {
    const x = node.x - node.width / 2;
    const y = node.y - node.height / 2;
    const fill = node.isLeaf ? "#e8f4e8" : "#eef2fa";
    parts.push(
      `<g class="${node.isLeaf ? "leaf" : "split"}" data-node="${node.index}">` +
        `<rect x="${x}" y="${y}" width="${node.width}" height="${node.height}" rx="6" ` +
        `fill="${fill}" stroke="#445"/>` +
        `<text x="${node.x}" y="${node.y + 4}" text-anchor="middle">${escapeXml(node.label)}</text></g>`,
    );
  }
  parts.push("</svg>");
  return parts.join("");
}
