/**
 * Provenance panel: the design history as a node-link tree whose nodes
 * are small treemaps.
 *
 * Node elements are keyed by id and reused across renders, with CSS
 * transitions on their positions, so inserting a node slides its
 * neighbors instead of teleporting them. Links carry the single-letter
 * action badge and a tooltip with the action's parameters. The path from
 * the root to the selection is drawn in red.
 */

import { hierarchy, tree, type HierarchyPointNode } from "d3-hierarchy";

import type { DiffPayload, Layout, TreePayload, TreeNode } from "./api";
import type { ComparisonMode } from "./color";
import { renderTreemap } from "./treemap";

export const NODE_WIDTH = 88;
const NODE_GAP_X = 26;
const NODE_GAP_Y = 58;
const MARGIN = 16;

interface Placed {
  node: TreeNode;
  x: number;
  y: number;
}

interface NestedNode {
  node: TreeNode;
  children: NestedNode[];
}

function nest(payload: TreePayload): NestedNode {
  const byParent = new Map<string | null, TreeNode[]>();
  for (const n of payload.nodes) {
    const list = byParent.get(n.parent_id) ?? [];
    list.push(n);
    byParent.set(n.parent_id, list);
  }
  const build = (node: TreeNode): NestedNode => ({
    node,
    children: (byParent.get(node.id) ?? []).map(build),
  });
  const root = payload.nodes.find((n) => n.id === payload.root_id);
  if (!root) throw new Error("tree payload has no root node");
  return build(root);
}

/** Tidy-tree positions for every node, depth growing downward. */
export function placeNodes(payload: TreePayload, nodeHeight: number): Placed[] {
  const root = hierarchy<NestedNode>(nest(payload), (d) => d.children);
  const laid = tree<NestedNode>().nodeSize([
    NODE_WIDTH + NODE_GAP_X,
    nodeHeight + NODE_GAP_Y,
  ])(root);
  let minX = Infinity;
  laid.each((d: HierarchyPointNode<NestedNode>) => {
    minX = Math.min(minX, d.x);
  });
  const placed: Placed[] = [];
  laid.each((d: HierarchyPointNode<NestedNode>) => {
    placed.push({ node: d.data.node, x: d.x - minX + MARGIN, y: d.y + MARGIN });
  });
  return placed;
}

export interface ProvenanceOptions {
  layouts: Record<string, Layout>;
  mode: ComparisonMode;
  diff: DiffPayload | null;
  onSelect: (nodeId: string) => void;
  onHover: (nodeId: string | null) => void;
}

function actionTooltip(node: TreeNode): string {
  if (!node.action) return node.description;
  return `${node.description}\n${JSON.stringify(node.action.params)}`;
}

export function renderProvenance(
  host: HTMLElement,
  payload: TreePayload,
  opts: ProvenanceOptions,
): void {
  host.classList.add("provenance");
  host.style.position = "relative";

  let svg = host.querySelector<SVGSVGElement>("svg.prov-links");
  let layer = host.querySelector<HTMLElement>(".prov-nodes");
  if (!svg || !layer) {
    host.innerHTML = "";
    svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
    svg.classList.add("prov-links");
    svg.style.position = "absolute";
    svg.style.inset = "0";
    layer = document.createElement("div");
    layer.className = "prov-nodes";
    layer.style.position = "absolute";
    layer.style.inset = "0";
    host.append(svg, layer);
  }

  const sampleLayout = opts.layouts[payload.root_id];
  const mapHeight = sampleLayout ? NODE_WIDTH / sampleLayout.aspect : NODE_WIDTH / 1.6;
  const nodeHeight = mapHeight + 18; // treemap plus the score line
  const placed = placeNodes(payload, nodeHeight);
  const positions = new Map(placed.map((p) => [p.node.id, p]));
  const onPath = new Set(payload.path);

  const width = Math.max(...placed.map((p) => p.x)) + NODE_WIDTH + MARGIN;
  const height = Math.max(...placed.map((p) => p.y)) + nodeHeight + MARGIN;
  host.style.minWidth = `${width}px`;
  host.style.minHeight = `${height}px`;
  svg.setAttribute("width", String(width));
  svg.setAttribute("height", String(height));

  // links are cheap to redraw wholesale; constancy lives in the node layer
  svg.innerHTML = "";
  for (const p of placed) {
    const parentId = p.node.parent_id;
    if (parentId === null) continue;
    const from = positions.get(parentId);
    if (!from) continue;
    const x1 = from.x + NODE_WIDTH / 2;
    const y1 = from.y + nodeHeight;
    const x2 = p.x + NODE_WIDTH / 2;
    const y2 = p.y;
    const path = document.createElementNS("http://www.w3.org/2000/svg", "path");
    const midY = (y1 + y2) / 2;
    path.setAttribute("d", `M ${x1} ${y1} C ${x1} ${midY}, ${x2} ${midY}, ${x2} ${y2}`);
    path.setAttribute("fill", "none");
    const selected = onPath.has(p.node.id) && onPath.has(parentId);
    path.setAttribute("stroke", selected ? "#c0392b" : "#9aa5a5");
    path.setAttribute("stroke-width", selected ? "2.5" : "1.5");
    if (p.node.kind === "suggestion") path.setAttribute("stroke-dasharray", "4 3");
    svg.appendChild(path);

    const letter = document.createElementNS("http://www.w3.org/2000/svg", "text");
    letter.setAttribute("x", String((x1 + x2) / 2 + 6));
    letter.setAttribute("y", String(midY));
    letter.setAttribute("class", "action-letter");
    letter.textContent = p.node.label;
    const tip = document.createElementNS("http://www.w3.org/2000/svg", "title");
    tip.textContent = actionTooltip(p.node);
    letter.appendChild(tip);
    svg.appendChild(letter);
  }

  const seen = new Set<string>();
  for (const p of placed) {
    seen.add(p.node.id);
    let el = layer.querySelector<HTMLElement>(`[data-node-id="${p.node.id}"]`);
    if (!el) {
      el = document.createElement("div");
      el.className = "prov-node";
      el.dataset.nodeId = p.node.id;
      el.style.position = "absolute";
      el.style.width = `${NODE_WIDTH}px`;
      el.style.transition = "left 300ms ease, top 300ms ease";
      const map = document.createElement("div");
      map.className = "prov-map";
      const score = document.createElement("div");
      score.className = "prov-score";
      el.append(map, score);
      el.addEventListener("click", () => opts.onSelect(p.node.id));
      el.addEventListener("mouseenter", () => opts.onHover(p.node.id));
      el.addEventListener("mouseleave", () => opts.onHover(null));
      layer.appendChild(el);
    }
    el.style.left = `${p.x}px`;
    el.style.top = `${p.y}px`;
    el.title = actionTooltip(p.node);
    el.classList.toggle("selected", p.node.id === payload.selection_id);
    el.classList.toggle("on-path", onPath.has(p.node.id));
    el.classList.toggle("proposal", p.node.kind === "suggestion");

    const map = el.querySelector<HTMLElement>(".prov-map");
    const layout = opts.layouts[p.node.id];
    if (map && layout) {
      renderTreemap(map, layout, {
        width: NODE_WIDTH,
        mode: opts.mode,
        diff: opts.diff?.[p.node.id],
      });
    }
    const score = el.querySelector<HTMLElement>(".prov-score");
    if (score) score.textContent = `${p.node.id} · ${p.node.score.toFixed(3)}`;
  }

  for (const el of Array.from(layer.querySelectorAll<HTMLElement>(".prov-node"))) {
    if (!seen.has(el.dataset.nodeId ?? "")) el.remove();
  }
}
