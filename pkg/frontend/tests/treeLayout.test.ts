import { describe, expect, it } from "vitest";

import { boxesOverlap, edgeLabels, layoutTree, nodeLabel, renderTreeSvg } from "../src/treeLayout.js";
import { completeDoc, leafDoc, stumpDoc } from "./helpers.js";

describe("layoutTree", () => {
  it("renders a stump as three nodes and two edges", () => {
    const layout = layoutTree(stumpDoc());
    expect(layout.nodes).toHaveLength(3);
    expect(layout.edges).toHaveLength(2);
  });

  it("renders a single leaf as one labeled node", () => {
    const layout = layoutTree(leafDoc(1), ["edible", "poisonous"]);
    expect(layout.nodes).toHaveLength(1);
    expect(layout.nodes[0].label).toBe("poisonous");
  });

  it("keeps every node of a depth-7 tree free of overlap", () => {
    // layout oracle: an exhaustive bounding-box intersection scan
    const layout = layoutTree(completeDoc(7));
    expect(layout.nodes).toHaveLength(2 ** 8 - 1);
    for (let i = 0; i < layout.nodes.length; i++) {
      for (let j = i + 1; j < layout.nodes.length; j++) {
        expect(boxesOverlap(layout.nodes[i], layout.nodes[j])).toBe(false);
      }
    }
  });

  it("children sit strictly below their parent", () => {
    const doc = completeDoc(3);
    const layout = layoutTree(doc);
    const byIndex = new Map(layout.nodes.map((n) => [n.index, n]));
    for (const edge of layout.edges) {
      expect(byIndex.get(edge.to)!.y).toBeGreaterThan(byIndex.get(edge.from)!.y);
    }
  });
});

describe("labels", () => {
  it("one-hot splits read as column = value with no/yes edges", () => {
    const doc = stumpDoc([{ column: "odor", value: "f" }]);
    expect(nodeLabel(doc, 0)).toBe("odor = f?");
    expect(edgeLabels(doc, 0)).toEqual(["no", "yes"]);
  });

  it("continuous splits read as column <= threshold with yes/no edges", () => {
    const doc = stumpDoc([{ column: "age", value: null }]);
    expect(nodeLabel(doc, 0)).toBe("age ≤ 0.50?");
    expect(edgeLabels(doc, 0)).toEqual(["yes", "no"]);
  });

  it("leaves carry the predicted class name", () => {
    const doc = stumpDoc([{ column: "odor", value: "f" }]);
    expect(nodeLabel(doc, 1, ["edible", "poisonous"])).toBe("edible");
    expect(nodeLabel(doc, 2, ["edible", "poisonous"])).toBe("poisonous");
  });
});

describe("renderTreeSvg", () => {
  it("emits one group per node and one line per edge", () => {
    const svg = renderTreeSvg(completeDoc(3));
    expect(svg.match(/<g class="(leaf|split)"/g)).toHaveLength(2 ** 4 - 1);
    expect(svg.match(/<line /g)).toHaveLength(2 ** 4 - 2);
  });

  it("scales wide trees into the viewport via the viewBox", () => {
    const svg = renderTreeSvg(completeDoc(7), ["a", "b"], 1280);
    const width = Number(/width="(\d+)"/.exec(svg)![1]);
    expect(width).toBeLessThanOrEqual(1280);
    expect(svg).toContain("viewBox=");
  });

  it("escapes XML-hostile labels", () => {
    const doc = stumpDoc([{ column: "a<b", value: "x&y" }]);
    const svg = renderTreeSvg(doc);
    expect(svg).toContain("a&lt;b = x&amp;y?");
  });
});
