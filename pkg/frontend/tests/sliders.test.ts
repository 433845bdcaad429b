import { beforeEach, describe, expect, it, vi } from "vitest";

import type { Weights } from "../src/api";
import { debounce, readWeights, renderSliders } from "../src/sliders";

let host: HTMLElement;

beforeEach(() => {
  document.body.innerHTML = "";
  host = document.createElement("div");
  document.body.appendChild(host);
});

function setSlider(input: HTMLInputElement, value: string): void {
  input.value = value;
  input.dispatchEvent(new Event("input", { bubbles: true }));
}

describe("renderSliders", () => {
  it("renders one slider per kind plus one per group, defaulting to 1", () => {
    renderSliders(host, { constraints: {}, groups: {} }, { groups: ["comfort", "tasks"], onCommit: () => {} });
    const kinds = host.querySelectorAll("input[data-kind]");
    const groups = host.querySelectorAll("input[data-group]");
    expect(kinds.length).toBe(6);
    expect(groups.length).toBe(2);
    for (const input of Array.from(kinds) as HTMLInputElement[]) {
      expect(input.value).toBe("1");
    }
  });

  it("seeds sliders from the current weights", () => {
    const current: Weights = { constraints: { ugr: 2.5 }, groups: { tasks: 0.5 } };
    renderSliders(host, current, { groups: ["tasks"], onCommit: () => {} });
    const ugr = host.querySelector<HTMLInputElement>('input[data-kind="ugr"]');
    const tasks = host.querySelector<HTMLInputElement>('input[data-group="tasks"]');
    expect(ugr?.value).toBe("2.5");
    expect(tasks?.value).toBe("0.5");
  });

  it("reads the full configuration back out of the DOM", () => {
    renderSliders(host, { constraints: {}, groups: {} }, { groups: ["tasks"], onCommit: () => {} });
    const lux = host.querySelector<HTMLInputElement>('input[data-kind="average_lux"]');
    setSlider(lux!, "3.2");
    const weights = readWeights(host);
    expect(weights.constraints.average_lux).toBe(3.2);
    expect(weights.constraints.ugr).toBe(1);
    expect(weights.groups.tasks).toBe(1);
  });

  it("coalesces a drag into one commit after the debounce window", () => {
    vi.useFakeTimers();
    try {
      const commits: Weights[] = [];
      renderSliders(host, { constraints: {}, groups: {} }, {
        groups: [],
        onCommit: (w) => commits.push(w),
      });
      const lux = host.querySelector<HTMLInputElement>('input[data-kind="average_lux"]');
      setSlider(lux!, "1.5");
      vi.advanceTimersByTime(100);
      setSlider(lux!, "2.0");
      vi.advanceTimersByTime(100);
      setSlider(lux!, "2.8");
      expect(commits.length).toBe(0);
      vi.advanceTimersByTime(300);
      expect(commits.length).toBe(1);
      expect(commits[0].constraints.average_lux).toBe(2.8);
    } finally {
      vi.useRealTimers();
    }
  });
});

describe("debounce", () => {
  it("fires once with the last arguments", () => {
    vi.useFakeTimers();
    try {
      const calls: number[] = [];
      const fn = debounce((v: number) => calls.push(v), 50);
      fn(1);
      fn(2);
      fn(3);
      vi.advanceTimersByTime(60);
      expect(calls).toEqual([3]);
    } finally {
      vi.useRealTimers();
    }
  });
});
