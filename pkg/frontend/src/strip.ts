/**
 * Suggestion strip: the current batch's proposals, best first.
 *
 * Each card previews the suggested state's thumbnail and score with an
 * accept button. The strip always reflects exactly one batch generation;
 * stale cards disappear wholesale when a new batch replaces them.
 */

import type { Client, SuggestionsPayload } from "./api";

export interface StripOptions {
  client: Client;
  sessionId: string;
  onAccept: (nodeId: string) => void;
  onHover?: (nodeId: string | null) => void;
}

export function renderStrip(
  host: HTMLElement,
  payload: SuggestionsPayload,
  opts: StripOptions,
): void {
  host.innerHTML = "";
  host.classList.add("strip");
  host.dataset.generation = String(payload.batch.generation);
  host.dataset.state = payload.batch.state;

  if (payload.batch.state === "running") {
    const busy = document.createElement("span");
    busy.className = "strip-busy";
    busy.textContent = "computing suggestions";
    host.appendChild(busy);
    return;
  }

  if (payload.suggestions.length === 0) {
    const empty = document.createElement("span");
    empty.className = "strip-empty";
    empty.textContent = "no suggestions";
    host.appendChild(empty);
    return;
  }

  for (const s of payload.suggestions) {
    const card = document.createElement("div");
    card.className = "suggestion";
    card.dataset.nodeId = s.id;
    card.dataset.batch = String(s.batch);

    const img = document.createElement("img");
    img.className = "suggestion-thumb";
    img.src = opts.client.thumbnailUrl(opts.sessionId, s.id);
    img.alt = s.description;
    img.width = 120;

    const badge = document.createElement("span");
    badge.className = "suggestion-badge";
    badge.textContent = s.label;

    const text = document.createElement("div");
    text.className = "suggestion-text";
    text.textContent = `${s.description} (s=${s.score.toFixed(3)})`;

    const accept = document.createElement("button");
    accept.className = "suggestion-accept";
    accept.textContent = "Accept";
    accept.addEventListener("click", () => opts.onAccept(s.id));

    card.append(img, badge, text, accept);
    card.addEventListener("mouseenter", () => opts.onHover?.(s.id));
    card.addEventListener("mouseleave", () => opts.onHover?.(null));
    host.appendChild(card);
  }
}
