/**
 * Application shell: wires the panels to one session.
 *
 * The server is authoritative for everything except presentation state.
 * Every command goes to the API; the response to change is always the
 * same: schedule a refresh, which re-reads the views the current
 * ViewState needs and re-renders. Asynchronous results (suggestion
 * batches) arrive through the single event subscription and feed the
 * same refresh path, so the client never guesses.
 */

import {
  Client,
  type DiffPayload,
  type Layout,
  type Report,
  type SessionEvent,
  type SuggestionsPayload,
  type TreePayload,
  type Weights,
} from "./api";
import { highlightCells, renderBullets } from "./bullets";
import { renderProvenance } from "./provenance";
import { renderScene } from "./sceneview";
import { renderSliders } from "./sliders";
import { renderStrip } from "./strip";
import { renderTreemap } from "./treemap";
import {
  effectiveComparison,
  focusCamera,
  initialViewState,
  toggleDetail,
  withComparison,
  withHover,
  withSelection,
  type ViewState,
} from "./viewstate";

/** Width of the selected node's close-up treemap, in pixels. */
export const FOCUS_MAP_WIDTH = 200;

const REFRESH_EVENTS = new Set([
  "node_committed",
  "node_selected",
  "node_deleted",
  "batch_ready",
  "batch_started",
  "batch_cancelled",
  "batch_failed",
  "weights_changed",
]);

export class App {
  vs: ViewState;
  weights: Weights = { constraints: {}, groups: {} };

  private panels: {
    status: HTMLElement;
    provenance: HTMLElement;
    focusMap: HTMLElement;
    quality: HTMLElement;
    sliders: HTMLElement;
    scene: HTMLElement;
    strip: HTMLElement;
  };
  private unsubscribe: () => void;
  private refreshQueued = false;
  private refreshRunning: Promise<void> | null = null;

  constructor(
    public client: Client,
    public root: HTMLElement,
    sessionId: string,
    rootId: string,
  ) {
    this.vs = initialViewState(sessionId, rootId);
    this.panels = buildSkeleton(root, {
      onComparison: (mode) => {
        this.vs = withComparison(this.vs, mode);
        this.scheduleRefresh();
      },
    });
    this.unsubscribe = client.subscribe(sessionId, 0, this.onEvent);
  }

  /** Create a session on the server and mount the app for it. */
  static async create(
    client: Client,
    root: HTMLElement,
    body: {
      scene: unknown;
      seed?: number;
      resolution?: number;
      candidate_resolution?: number;
    },
  ): Promise<App> {
    const created = await client.createSession(body);
    const app = new App(client, root, created.session_id, created.root_id);
    app.scheduleRefresh();
    return app;
  }

  dispose(): void {
    this.unsubscribe();
  }

  private onEvent = (event: SessionEvent) => {
    if (REFRESH_EVENTS.has(event.type)) this.scheduleRefresh();
  };

  // -------------------------------------------------------------------
  // Refresh pipeline
  // -------------------------------------------------------------------

  scheduleRefresh = (): void => {
    this.refreshQueued = true;
    void this.pump();
  };

  private async pump(): Promise<void> {
    if (this.refreshRunning) return;
    while (this.refreshQueued) {
      this.refreshQueued = false;
      this.refreshRunning = this.refresh().catch((err: unknown) => {
        this.panels.status.textContent = `error: ${String(err)}`;
      });
      try {
        await this.refreshRunning;
      } finally {
        this.refreshRunning = null;
      }
    }
  }

  /** Wait until no refresh is running or queued (test hook). */
  async idle(): Promise<void> {
    while (this.refreshRunning || this.refreshQueued) {
      await (this.refreshRunning ?? Promise.resolve());
      await new Promise((r) => setTimeout(r, 5));
    }
  }

  async refresh(): Promise<void> {
    const sid = this.vs.sessionId;
    const tree = await this.client.tree(sid);
    if (!tree.nodes.some((n) => n.id === this.vs.selected)) {
      this.vs = withSelection(this.vs, tree.selection_id);
    }
    if (this.vs.hovered && !tree.nodes.some((n) => n.id === this.vs.hovered)) {
      this.vs = withHover(this.vs, null);
    }
    const selected = this.vs.selected;
    const mode = effectiveComparison(this.vs);

    const [report, sceneDoc, suggestions, focusLayout, nodeLayouts, diff] = await Promise.all([
      this.client.report(sid, selected),
      this.client.scene(sid, selected),
      this.client.suggestions(sid),
      this.client.layout(sid, selected, this.vs.detailGroups, 1.6),
      this.fetchNodeLayouts(tree),
      this.fetchDiff(mode),
    ]);

    this.renderAll(tree, report, sceneDoc, suggestions, focusLayout, nodeLayouts, diff);
    this.panels.status.textContent = `session ${sid} · batch ${tree.batch.state}`;
  }

  private fetchNodeLayouts(tree: TreePayload): Promise<Record<string, Layout>> {
    const sid = this.vs.sessionId;
    return Promise.all(
      tree.nodes.map(async (n) => {
        const layout = await this.client.layout(sid, n.id, this.vs.detailGroups, 1.6);
        return [n.id, layout] as const;
      }),
    ).then(Object.fromEntries);
  }

  private fetchDiff(mode: "off" | "global" | "local"): Promise<DiffPayload | null> {
    if (mode === "off") return Promise.resolve(null);
    const other = mode === "local" ? (this.vs.hovered ?? undefined) : undefined;
    return this.client.diff(this.vs.sessionId, this.vs.selected, mode, other, this.vs.detailGroups);
  }

  private renderAll(
    tree: TreePayload,
    report: Report,
    sceneDoc: Awaited<ReturnType<Client["scene"]>>,
    suggestions: SuggestionsPayload,
    focusLayout: Layout,
    nodeLayouts: Record<string, Layout>,
    diff: DiffPayload | null,
  ): void {
    const mode = effectiveComparison(this.vs);

    renderProvenance(this.panels.provenance, tree, {
      layouts: nodeLayouts,
      mode,
      diff,
      onSelect: (nodeId) => void this.select(nodeId),
      onHover: (nodeId) => this.hover(nodeId),
    });

    renderTreemap(this.panels.focusMap, focusLayout, {
      width: FOCUS_MAP_WIDTH,
      mode,
      diff: diff?.[this.vs.selected],
      onCellClick: (cell) => {
        this.vs = toggleDetail(this.vs, cell.group_id);
        this.scheduleRefresh();
      },
    });

    renderBullets(this.panels.quality, report, {
      weights: this.weights,
      onHover: (entry) => highlightCells(this.root, entry),
      onClickObject: (objectId) => {
        const known = sceneDoc.measuring_surfaces.some((m) => m.id === objectId);
        this.vs = focusCamera(this.vs, known ? objectId : null);
        this.scheduleRefresh();
      },
    });

    renderSliders(this.panels.sliders, this.weights, {
      groups: [...new Set(report.entries.map((e) => e.group_id))].sort(),
      onCommit: (weights) => void this.commitWeights(weights),
    });

    renderScene(this.panels.scene, sceneDoc, {
      thumbnailUrl: this.client.thumbnailUrl(
        this.vs.sessionId,
        this.vs.selected,
        this.vs.falseColor,
      ),
      falseColor: this.vs.falseColor,
      camera: this.vs.camera,
      onMoveLight: (lightId, dx, dy) => void this.moveLight(lightId, dx, dy),
      onToggleFalseColor: (on) => {
        this.vs = { ...this.vs, falseColor: on };
        this.scheduleRefresh();
      },
    });

    renderStrip(this.panels.strip, suggestions, {
      client: this.client,
      sessionId: this.vs.sessionId,
      onAccept: (nodeId) => void this.accept(nodeId),
      onHover: (nodeId) => this.hover(nodeId),
    });
  }

  // -------------------------------------------------------------------
  // Commands
  // -------------------------------------------------------------------

  async select(nodeId: string): Promise<void> {
    await this.client.select(this.vs.sessionId, nodeId);
    this.vs = withSelection(this.vs, nodeId);
    this.scheduleRefresh();
  }

  hover(nodeId: string | null): void {
    if (this.vs.hovered === nodeId) return;
    this.vs = withHover(this.vs, nodeId);
    // hue colors need no data; a live local comparison needs the diff
    if (this.vs.comparison === "local") this.scheduleRefresh();
  }

  async accept(nodeId: string): Promise<void> {
    const result = await this.client.accept(this.vs.sessionId, nodeId);
    this.vs = withSelection(this.vs, result.selection_id);
    this.scheduleRefresh();
  }

  async commitWeights(weights: Weights): Promise<void> {
    await this.client.postWeights(this.vs.sessionId, weights);
    this.weights = weights;
    this.scheduleRefresh();
  }

  async moveLight(lightId: string, dx: number, dy: number): Promise<void> {
    await this.client.postEdit(this.vs.sessionId, {
      kind: "move_light",
      params: { light_id: lightId, delta: [dx, dy, 0] },
    });
    this.scheduleRefresh();
  }
}

function buildSkeleton(
  root: HTMLElement,
  handlers: { onComparison: (mode: "off" | "global" | "local") => void },
): App["panels"] {
  root.innerHTML = "";
  root.classList.add("app");

  const header = document.createElement("header");
  const status = document.createElement("span");
  status.className = "status";
  status.textContent = "connecting";
  const modes = document.createElement("span");
  modes.className = "comparison-modes";
  for (const mode of ["off", "global", "local"] as const) {
    const btn = document.createElement("button");
    btn.textContent = `compare: ${mode}`;
    btn.dataset.mode = mode;
    btn.addEventListener("click", () => handlers.onComparison(mode));
    modes.appendChild(btn);
  }
  header.append(status, modes);

  const main = document.createElement("main");
  const provenance = document.createElement("section");
  provenance.id = "provenance";
  const aside = document.createElement("aside");
  const focusMap = document.createElement("section");
  focusMap.id = "focus-map";
  const quality = document.createElement("section");
  quality.id = "quality";
  const sliders = document.createElement("section");
  sliders.id = "sliders";
  aside.append(focusMap, quality, sliders);
  const scene = document.createElement("section");
  scene.id = "scene";
  main.append(provenance, aside, scene);

  const strip = document.createElement("footer");
  strip.id = "strip";

  root.append(header, main, strip);
  return { status, provenance, focusMap, quality, sliders, scene, strip };
}
