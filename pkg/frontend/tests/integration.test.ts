/**
 * End-to-end checks against a live service instance.
 *
 * A real server process is spawned once for the file; the app under test
 * talks to it over HTTP exactly as a browser would (with the polling
 * event fallback, since jsdom has no EventSource). Three contracts are
 * verified: slider-driven treemap geometry, comparison-mode grayscale,
 * and the accept round-trip through the suggestion strip.
 */

import { spawn, type ChildProcess } from "node:child_process";
import { readFileSync } from "node:fs";
import path from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { Client } from "../src/api";
import { App, FOCUS_MAP_WIDTH } from "../src/app";
import { grayscale, parseColor } from "../src/color";
import { renderedExtents } from "../src/treemap";

const PKG_ROOT = path.resolve(__dirname, "..", "..");
const PORT = 8400 + Math.floor(Math.random() * 400);
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess;
let client: Client;
let app: App;
let root: HTMLElement;

async function until<T>(probe: () => Promise<T | null>, what: string, ms = 60_000): Promise<T> {
  const deadline = Date.now() + ms;
  while (Date.now() < deadline) {
    const value = await probe();
    if (value !== null) return value;
    await new Promise((r) => setTimeout(r, 150));
  }
  throw new Error(`timed out waiting for ${what}`);
}

/** Settled means the strip shows a finished batch, not a spinner. */
async function settled(): Promise<void> {
  await app.idle();
  await until(async () => {
    await app.idle();
    const strip = root.querySelector<HTMLElement>("#strip");
    return strip && strip.dataset.state !== "running" ? strip : null;
  }, "suggestion batch to settle");
}

beforeAll(async () => {
  server = spawn("python3", ["-m", "luxplan.cli", "serve", "--port", String(PORT)], {
    cwd: PKG_ROOT,
    stdio: "ignore",
  });
  await until(
    () => fetch(`${BASE}/docs`).then(() => true).catch(() => null),
    "server to come up",
    30_000,
  );

  const scene = JSON.parse(readFileSync(path.join(PKG_ROOT, "fixtures", "studio.json"), "utf-8"));
  client = new Client(BASE);
  root = document.createElement("div");
  document.body.appendChild(root);
  app = await App.create(client, root, {
    scene,
    seed: 7,
    resolution: 0.3,
    candidate_resolution: 0.3,
  });
  await settled();
});

afterAll(() => {
  app?.dispose();
  server?.kill();
});

describe("live service round-trips", () => {
  it("redraws the treemap to match the server layout after a slider change", async () => {
    const focusMap = root.querySelector<HTMLElement>("#focus-map");
    expect(focusMap).not.toBeNull();
    expect(focusMap!.querySelectorAll(".treemap-cell").length).toBeGreaterThan(0);

    const before = await client.layout(app.vs.sessionId, app.vs.selected, [], 1.6);
    const luxBefore = before.cells
      .filter((c) => c.kind === "average_lux")
      .reduce((a, c) => a + c.area, 0);

    const slider = root.querySelector<HTMLInputElement>('input[data-kind="average_lux"]');
    expect(slider).not.toBeNull();
    slider!.value = "4";
    slider!.dispatchEvent(new Event("input", { bubbles: true }));

    // debounce window, then the post, ack, and refresh
    await new Promise((r) => setTimeout(r, 400));
    await settled();

    const after = await client.layout(app.vs.sessionId, app.vs.selected, [], 1.6);
    const luxAfter = after.cells
      .filter((c) => c.kind === "average_lux")
      .reduce((a, c) => a + c.area, 0);
    expect(luxAfter).toBeGreaterThan(luxBefore);

    const extents = renderedExtents(focusMap!);
    const height = FOCUS_MAP_WIDTH / after.aspect;
    expect(Object.keys(extents).sort()).toEqual(after.cells.map((c) => c.key).sort());
    for (const cell of after.cells) {
      const got = extents[cell.key];
      expect(Math.abs(got.x - cell.x * FOCUS_MAP_WIDTH)).toBeLessThanOrEqual(2);
      expect(Math.abs(got.y - cell.y * height)).toBeLessThanOrEqual(2);
      expect(Math.abs(got.w - cell.w * FOCUS_MAP_WIDTH)).toBeLessThanOrEqual(2);
      expect(Math.abs(got.h - cell.h * height)).toBeLessThanOrEqual(2);
    }
  }, 120_000);

  it("renders comparison mode in exactly the grayscale the diff payload dictates", async () => {
    const globalBtn = root.querySelector<HTMLButtonElement>('button[data-mode="global"]');
    globalBtn!.click();
    await settled();

    const payload = await client.diff(app.vs.sessionId, app.vs.selected, "global");
    const reference = payload[app.vs.selected];
    expect(Object.keys(reference).length).toBeGreaterThan(0);

    const focusMap = root.querySelector<HTMLElement>("#focus-map")!;
    const cells = Array.from(focusMap.querySelectorAll<HTMLElement>(".treemap-cell"));
    expect(cells.length).toBeGreaterThan(0);
    for (const el of cells) {
      const diffCell = reference[el.dataset.key ?? ""];
      expect(diffCell).toBeDefined();
      const [r, g, b] = parseColor(el.style.backgroundColor);
      expect(r).toBe(g);
      expect(g).toBe(b);
      expect(el.style.backgroundColor).toBe(grayscale(diffCell.lightness));
      // the selection is its own reference: medium gray everywhere
      expect(diffCell.lightness).toBe(0.5);
      expect(r).toBe(128);
    }

    // provenance nodes of other states use their own diff entries
    const tree = await client.tree(app.vs.sessionId);
    for (const node of tree.nodes) {
      const nodeEl = root.querySelector<HTMLElement>(`[data-node-id="${node.id}"]`);
      expect(nodeEl).not.toBeNull();
      for (const el of Array.from(nodeEl!.querySelectorAll<HTMLElement>(".treemap-cell"))) {
        const diffCell = payload[node.id]?.[el.dataset.key ?? ""];
        if (diffCell === undefined) continue;
        expect(el.style.backgroundColor).toBe(grayscale(diffCell.lightness));
      }
    }

    root.querySelector<HTMLButtonElement>('button[data-mode="off"]')!.click();
    await settled();
  }, 120_000);

  it("accepts a suggestion from the strip and shows the follow-up batch", async () => {
    await settled();
    const strip = root.querySelector<HTMLElement>("#strip")!;
    const generationBefore = Number(strip.dataset.generation);
    const card = strip.querySelector<HTMLElement>(".suggestion");
    expect(card).not.toBeNull();
    const suggestionId = card!.dataset.nodeId!;

    card!.querySelector<HTMLButtonElement>(".suggestion-accept")!.click();
    await until(async () => {
      await app.idle();
      const tree = await client.tree(app.vs.sessionId);
      const node = tree.nodes.find((n) => n.id === suggestionId);
      return node && node.kind === "committed" ? node : null;
    }, "acceptance to commit the node");

    const tree = await client.tree(app.vs.sessionId);
    expect(tree.selection_id).toBe(suggestionId);
    expect(app.vs.selected).toBe(suggestionId);

    // the strip must refresh to the batch spawned by the acceptance
    await settled();
    const generationAfter = Number(strip.dataset.generation);
    expect(generationAfter).toBeGreaterThan(generationBefore);

    const fresh = await client.suggestions(app.vs.sessionId);
    const shown = Array.from(strip.querySelectorAll<HTMLElement>(".suggestion")).map(
      (el) => el.dataset.nodeId,
    );
    expect(shown.sort()).toEqual(fresh.suggestions.map((s) => s.id).sort());
    for (const el of Array.from(strip.querySelectorAll<HTMLElement>(".suggestion"))) {
      expect(Number(el.dataset.batch)).toBe(generationAfter);
    }

    // the committed node now sits on the red path in the provenance panel
    const nodeEl = root.querySelector<HTMLElement>(`[data-node-id="${suggestionId}"]`);
    expect(nodeEl?.classList.contains("on-path")).toBe(true);
  }, 120_000);
});
