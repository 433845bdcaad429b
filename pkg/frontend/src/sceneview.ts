/**
 * Scene panel: an overhead plan of the room next to the server-rendered
 * impression thumbnail.
 *
 * Luminaires are draggable; releasing one posts a move edit and the new
 * design state comes back through the normal commit flow. Measuring
 * surface outlines are drawn after everything else so they always stay
 * visible, echoing outline-based highlighting. A toggle switches the
 * thumbnail between realistic and false-color shading.
 */

import type { SceneDocument } from "./api";
import type { Camera } from "./viewstate";

const SVG_NS = "http://www.w3.org/2000/svg";
const PANEL_WIDTH = 320;

export interface SceneOptions {
  thumbnailUrl: string;
  falseColor: boolean;
  camera: Camera;
  onMoveLight: (lightId: string, dx: number, dy: number) => void;
  onToggleFalseColor: (on: boolean) => void;
}

interface RectDoc {
  id: string;
  axis: string;
  offset: number;
  u_range: [number, number];
  v_range: [number, number];
}

/** Top-down bounding box of a serialized rectangle, in floor coordinates. */
export function planBounds(rect: RectDoc): { x: number; y: number; w: number; h: number } {
  if (rect.axis === "z") {
    return {
      x: rect.u_range[0],
      y: rect.v_range[0],
      w: rect.u_range[1] - rect.u_range[0],
      h: rect.v_range[1] - rect.v_range[0],
    };
  }
  if (rect.axis === "x") {
    // vertical plane at x = offset: a line segment along y
    return { x: rect.offset, y: rect.u_range[0], w: 0, h: rect.u_range[1] - rect.u_range[0] };
  }
  return { x: rect.u_range[0], y: rect.offset, w: rect.u_range[1] - rect.u_range[0], h: 0 };
}

function viewBoxFor(doc: SceneDocument, camera: Camera): string {
  if (camera.focus) {
    const target = doc.measuring_surfaces.find((m) => m.id === camera.focus);
    if (target) {
      const b = planBounds(target as unknown as RectDoc);
      const pad = Math.max(b.w, b.h, 0.5) * 0.4;
      return `${b.x - pad} ${b.y - pad} ${b.w + 2 * pad} ${b.h + 2 * pad}`;
    }
  }
  const margin = 0.2 / camera.zoom;
  return `${-margin} ${-margin} ${doc.room.width + 2 * margin} ${doc.room.depth + 2 * margin}`;
}

export function renderScene(host: HTMLElement, doc: SceneDocument, opts: SceneOptions): void {
  host.innerHTML = "";
  host.classList.add("scene");

  const svg = document.createElementNS(SVG_NS, "svg");
  svg.classList.add("scene-plan");
  svg.setAttribute("width", String(PANEL_WIDTH));
  const vb = viewBoxFor(doc, opts.camera);
  svg.setAttribute("viewBox", vb);
  const vbWidth = Number(vb.split(" ")[2]);
  svg.setAttribute("height", String(Math.round((PANEL_WIDTH * doc.room.depth) / doc.room.width)));
  const metersPerPixel = vbWidth / PANEL_WIDTH;

  const room = document.createElementNS(SVG_NS, "rect");
  room.setAttribute("x", "0");
  room.setAttribute("y", "0");
  room.setAttribute("width", String(doc.room.width));
  room.setAttribute("height", String(doc.room.depth));
  room.setAttribute("fill", "#f6f4ee");
  room.setAttribute("stroke", "#444");
  room.setAttribute("stroke-width", String(2 * metersPerPixel));
  svg.appendChild(room);

  for (const lum of doc.luminaires) {
    const g = document.createElementNS(SVG_NS, "g");
    g.classList.add("luminaire");
    g.dataset.lightId = lum.id;
    const circle = document.createElementNS(SVG_NS, "circle");
    circle.setAttribute("cx", String(lum.position[0]));
    circle.setAttribute("cy", String(lum.position[1]));
    circle.setAttribute("r", "0.12");
    // dim level shows as how lit the marker itself looks
    const glow = Math.round(150 + 105 * Math.min(1, lum.dim));
    circle.setAttribute("fill", `rgb(${glow}, ${glow}, 80)`);
    circle.setAttribute("stroke", "#333");
    circle.setAttribute("stroke-width", String(1.5 * metersPerPixel));
    const name = document.createElementNS(SVG_NS, "title");
    name.textContent = `${lum.id} (${lum.model}, dim ${lum.dim})`;
    circle.appendChild(name);
    g.appendChild(circle);
    svg.appendChild(g);
    attachDrag(g, circle, lum.id, metersPerPixel, opts);
  }

  // outlines last: measuring surfaces stay on top of everything
  for (const m of doc.measuring_surfaces) {
    const b = planBounds(m as unknown as RectDoc);
    const outline = document.createElementNS(SVG_NS, "rect");
    outline.classList.add("measure-outline");
    outline.dataset.surfaceId = m.id;
    outline.setAttribute("x", String(b.x));
    outline.setAttribute("y", String(b.y));
    outline.setAttribute("width", String(Math.max(b.w, 0.02)));
    outline.setAttribute("height", String(Math.max(b.h, 0.02)));
    outline.setAttribute("fill", "none");
    outline.setAttribute("stroke", m.id === opts.camera.focus ? "#c0392b" : "#1f7a8c");
    outline.setAttribute("stroke-width", String(2 * metersPerPixel));
    outline.setAttribute("stroke-dasharray", `${6 * metersPerPixel} ${4 * metersPerPixel}`);
    svg.appendChild(outline);
  }

  const thumb = document.createElement("div");
  thumb.className = "scene-thumb";
  const img = document.createElement("img");
  img.src = opts.thumbnailUrl;
  img.alt = "rendered impression";
  img.width = PANEL_WIDTH;
  const toggle = document.createElement("label");
  toggle.className = "false-color-toggle";
  const box = document.createElement("input");
  box.type = "checkbox";
  box.checked = opts.falseColor;
  box.addEventListener("change", () => opts.onToggleFalseColor(box.checked));
  toggle.append(box, document.createTextNode(" false color"));
  thumb.append(img, toggle);

  host.append(svg, thumb);
}

function attachDrag(
  g: SVGGElement,
  circle: SVGCircleElement,
  lightId: string,
  metersPerPixel: number,
  opts: SceneOptions,
): void {
  let startX = 0;
  let startY = 0;
  let dragging = false;

  const move = (e: MouseEvent) => {
    if (!dragging) return;
    const dx = (e.clientX - startX) * metersPerPixel;
    const dy = (e.clientY - startY) * metersPerPixel;
    g.setAttribute("transform", `translate(${dx}, ${dy})`);
  };
  const up = (e: MouseEvent) => {
    if (!dragging) return;
    dragging = false;
    document.removeEventListener("mousemove", move);
    document.removeEventListener("mouseup", up);
    const dx = (e.clientX - startX) * metersPerPixel;
    const dy = (e.clientY - startY) * metersPerPixel;
    if (Math.hypot(dx, dy) >= 0.01) opts.onMoveLight(lightId, dx, dy);
    else g.removeAttribute("transform");
  };
  circle.addEventListener("mousedown", (e) => {
    dragging = true;
    startX = e.clientX;
    startY = e.clientY;
    document.addEventListener("mousemove", move);
    document.addEventListener("mouseup", up);
    e.preventDefault();
  });
}
