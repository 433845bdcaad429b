/**
 * Treemap rendering from server layout payloads.
 *
 * The server computes all geometry in the unit square; the client only
 * scales it to pixels. Cell areas therefore agree across every node of a
 * history, and re-rendering after a weight change means nothing more than
 * fetching the new payload.
 */

import type { DiffCell, Layout, LayoutCell } from "./api";
import { cellColor, type ComparisonMode } from "./color";

export interface PixelRect {
  x: number;
  y: number;
  w: number;
  h: number;
}

/** Scale a unit-square cell to pixels for a node drawn `width` px wide. */
export function cellRect(cell: LayoutCell, layout: Layout, width: number): PixelRect {
  const height = width / layout.aspect;
  return {
    x: cell.x * width,
    y: cell.y * height,
    w: cell.w * width,
    h: cell.h * height,
  };
}

export interface TreemapOptions {
  width: number;
  mode: ComparisonMode;
  /** diff lightness per cell key; required when mode is not "off" */
  diff?: Record<string, DiffCell>;
  onCellClick?: (cell: LayoutCell) => void;
}

/**
 * Render one node's treemap into `host` as absolutely positioned divs.
 *
 * Every cell carries its key in `data-key` and its fill in inline style,
 * so tests and linked highlighting can address cells directly. Cells
 * missing from a diff payload (unmeasured in the reference) stay blank.
 */
export function renderTreemap(host: HTMLElement, layout: Layout, opts: TreemapOptions): void {
  const height = opts.width / layout.aspect;
  host.innerHTML = "";
  host.classList.add("treemap");
  host.style.position = "relative";
  host.style.width = `${opts.width}px`;
  host.style.height = `${height}px`;

  for (const cell of layout.cells) {
    const rect = cellRect(cell, layout, opts.width);
    const div = document.createElement("div");
    div.className = "treemap-cell";
    div.dataset.key = cell.key;
    div.dataset.kind = cell.kind;
    div.style.position = "absolute";
    div.style.left = `${rect.x}px`;
    div.style.top = `${rect.y}px`;
    div.style.width = `${rect.w}px`;
    div.style.height = `${rect.h}px`;
    div.style.boxSizing = "border-box";
    div.style.border = "1px solid rgba(255, 255, 255, 0.6)";

    if (opts.mode === "off") {
      div.style.backgroundColor = cellColor(cell.fulfillment, cell.kind, "off");
    } else {
      const diffCell = opts.diff?.[cell.key];
      if (diffCell !== undefined) {
        div.style.backgroundColor = cellColor(diffCell.lightness, cell.kind, opts.mode);
      }
    }
    div.title = cellTitle(cell);
    if (opts.onCellClick) {
      div.addEventListener("click", () => opts.onCellClick?.(cell));
    }
    host.appendChild(div);
  }
}

function cellTitle(cell: LayoutCell): string {
  const scope = cell.object_id ?? cell.group_id;
  return `${cell.kind} on ${scope}: f = ${cell.fulfillment.toFixed(3)}`;
}

/** Pixel extents of every rendered cell, keyed like the payload. */
export function renderedExtents(host: HTMLElement): Record<string, PixelRect> {
  const out: Record<string, PixelRect> = {};
  for (const el of Array.from(host.querySelectorAll<HTMLElement>(".treemap-cell"))) {
    out[el.dataset.key ?? ""] = {
      x: parseFloat(el.style.left),
      y: parseFloat(el.style.top),
      w: parseFloat(el.style.width),
      h: parseFloat(el.style.height),
    };
  }
  return out;
}
