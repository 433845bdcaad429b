/**
 * Bullet chart panel: one bullet per measured constraint.
 *
 * A bullet shows the measured value as a marker over a track whose shaded
 * region is the satisfied zone, matching the treemap's hue for the same
 * kind. The overall score s sits in the panel's top right corner.
 */

import type { Report, ReportEntry, Weights } from "./api";
import { KIND_LABELS, kindSwatch, type Kind } from "./color";

// glare is satisfied at or below target; color temperature inside a band
const AT_MOST_KINDS = ["ugr"];
const BAND_KINDS = ["color_temperature"];

export interface BulletGeometry {
  domain: [number, number];
  zone: [number, number]; // satisfied stretch, in measured units
  marker: number;
}

/** Map an entry's target semantics onto a drawable track. */
export function bulletGeometry(entry: ReportEntry): BulletGeometry {
  const measured = entry.measured ?? 0;
  if (BAND_KINDS.includes(entry.kind)) {
    const [lo, hi] = entry.target as [number, number];
    return { domain: [0, Math.max(hi * 1.4, measured * 1.1)], zone: [lo, hi], marker: measured };
  }
  const target = entry.target as number;
  const top = Math.max(target * 1.5, measured * 1.1, 1e-9);
  if (AT_MOST_KINDS.includes(entry.kind)) {
    return { domain: [0, top], zone: [0, target], marker: measured };
  }
  return { domain: [0, top], zone: [target, top], marker: measured };
}

export interface BulletOptions {
  weights: Weights;
  onHover?: (entry: ReportEntry | null) => void;
  onClickObject?: (objectId: string) => void;
}

function kindWeight(weights: Weights, kind: string): number {
  return weights.constraints[kind] ?? 1;
}

/**
 * Render the quality view into `host`.
 *
 * Constraints whose kind is weighted to zero are omitted entirely; they
 * do not take part in the score, so showing them would only distract.
 */
export function renderBullets(host: HTMLElement, report: Report, opts: BulletOptions): void {
  host.innerHTML = "";
  host.classList.add("quality");

  const head = document.createElement("div");
  head.className = "quality-head";
  const title = document.createElement("strong");
  title.textContent = "Quality";
  const score = document.createElement("span");
  score.className = "quality-score";
  score.textContent = `s = ${report.score.toFixed(3)}`;
  head.append(title, score);
  host.appendChild(head);

  for (const entry of report.entries) {
    if (kindWeight(opts.weights, entry.kind) <= 0) continue;
    host.appendChild(bulletRow(entry, opts));
  }
}

function bulletRow(entry: ReportEntry, opts: BulletOptions): HTMLElement {
  const row = document.createElement("div");
  row.className = "bullet-row";
  row.dataset.kind = entry.kind;
  row.dataset.object = entry.object_id;

  const label = document.createElement("span");
  label.className = "bullet-label";
  const kindName = KIND_LABELS[entry.kind as Kind] ?? entry.kind;
  label.textContent = `${kindName} · ${entry.object_id}`;
  label.style.borderLeft = `4px solid ${kindSwatch(entry.kind)}`;

  const geo = bulletGeometry(entry);
  const span = geo.domain[1] - geo.domain[0];
  const pct = (v: number) => `${(100 * (v - geo.domain[0])) / span}%`;

  const track = document.createElement("div");
  track.className = "bullet-track";

  const zone = document.createElement("div");
  zone.className = "bullet-zone";
  zone.style.left = pct(geo.zone[0]);
  zone.style.width = pct(geo.zone[1] - geo.zone[0] + geo.domain[0]);
  zone.style.backgroundColor = kindSwatch(entry.kind);
  zone.style.opacity = "0.35";

  const marker = document.createElement("div");
  marker.className = "bullet-marker";
  marker.style.left = pct(Math.min(geo.marker, geo.domain[1]));
  marker.title = `measured ${geo.marker.toFixed(1)}`;

  track.append(zone, marker);
  row.append(label, track);

  row.addEventListener("mouseenter", () => opts.onHover?.(entry));
  row.addEventListener("mouseleave", () => opts.onHover?.(null));
  row.addEventListener("click", () => opts.onClickObject?.(entry.object_id));
  return row;
}

/** Add or remove the linked-highlight class on treemap cells of a kind/object. */
export function highlightCells(root: ParentNode, entry: ReportEntry | null): void {
  for (const el of Array.from(root.querySelectorAll<HTMLElement>(".treemap-cell"))) {
    const key = el.dataset.key ?? "";
    const match =
      entry !== null &&
      key.startsWith(`${entry.kind}/${entry.group_id}`) &&
      (!key.includes(`${entry.kind}/${entry.group_id}/`) ||
        key === `${entry.kind}/${entry.group_id}/${entry.object_id}`);
    el.classList.toggle("linked", match);
  }
}
