/**
 * Focus sliders: one per constraint kind plus one per measurement group.
 *
 * Dragging reweights the designer's priorities. Slider changes are
 * debounced and posted as a whole weight configuration; the panel owner
 * refreshes layouts only after the server acknowledges, because treemap
 * geometry is server truth.
 */

import type { Weights } from "./api";
import { KINDS, KIND_LABELS, kindSwatch } from "./color";

const DEBOUNCE_MS = 250;

export interface SliderOptions {
  groups: string[]; // group ids present in the current report
  onCommit: (weights: Weights) => void;
}

export function debounce<A extends unknown[]>(
  fn: (...args: A) => void,
  ms: number,
): (...args: A) => void {
  let timer: ReturnType<typeof setTimeout> | undefined;
  return (...args: A) => {
    if (timer !== undefined) clearTimeout(timer);
    timer = setTimeout(() => fn(...args), ms);
  };
}

/** Read the full weight configuration out of the rendered sliders. */
export function readWeights(host: HTMLElement): Weights {
  const weights: Weights = { constraints: {}, groups: {} };
  for (const input of Array.from(host.querySelectorAll<HTMLInputElement>("input[data-kind]"))) {
    weights.constraints[input.dataset.kind ?? ""] = Number(input.value);
  }
  for (const input of Array.from(host.querySelectorAll<HTMLInputElement>("input[data-group]"))) {
    weights.groups[input.dataset.group ?? ""] = Number(input.value);
  }
  return weights;
}

export function renderSliders(host: HTMLElement, current: Weights, opts: SliderOptions): void {
  host.innerHTML = "";
  host.classList.add("sliders");

  const commit = debounce(() => opts.onCommit(readWeights(host)), DEBOUNCE_MS);

  const addRow = (
    labelText: string,
    swatch: string | null,
    value: number,
    data: { kind?: string; group?: string },
  ) => {
    const row = document.createElement("label");
    row.className = "slider-row";
    const name = document.createElement("span");
    name.textContent = labelText;
    if (swatch) name.style.borderLeft = `4px solid ${swatch}`;
    const input = document.createElement("input");
    input.type = "range";
    input.min = "0";
    input.max = "4";
    input.step = "0.1";
    input.value = String(value);
    if (data.kind) input.dataset.kind = data.kind;
    if (data.group) input.dataset.group = data.group;
    const readout = document.createElement("span");
    readout.className = "slider-value";
    readout.textContent = input.value;
    input.addEventListener("input", () => {
      readout.textContent = input.value;
      commit();
    });
    row.append(name, input, readout);
    host.appendChild(row);
  };

  const heading = (text: string) => {
    const h = document.createElement("div");
    h.className = "slider-heading";
    h.textContent = text;
    host.appendChild(h);
  };

  heading("Constraint focus");
  for (const kind of KINDS) {
    addRow(KIND_LABELS[kind], kindSwatch(kind), current.constraints[kind] ?? 1, { kind });
  }
  heading("Group focus");
  for (const group of opts.groups) {
    addRow(group, null, current.groups[group] ?? 1, { group });
  }
}
