/**
 * Typed client for the lighting service HTTP and event API.
 *
 * The server is the single source of truth: every mutation returns only an
 * acknowledgment and the client re-reads whatever views it needs. Events
 * arrive over one server-sent-event subscription per session, with a
 * polling fallback for hosts without EventSource (tests, old webviews).
 */

export interface BatchInfo {
  state: "idle" | "running" | "ready";
  generation: number;
}

export interface TreeNode {
  id: string;
  parent_id: string | null;
  label: string;
  description: string;
  kind: "committed" | "suggestion";
  batch: number;
  score: number;
  action: { kind: string; params: Record<string, unknown> } | null;
}

export interface TreePayload {
  root_id: string;
  selection_id: string;
  batch: BatchInfo;
  path: string[];
  nodes: TreeNode[];
}

export interface Suggestion {
  id: string;
  parent_id: string | null;
  label: string;
  description: string;
  score: number;
  batch: number;
  action: { kind: string; params: Record<string, unknown> } | null;
}

export interface SuggestionsPayload {
  batch: BatchInfo;
  suggestions: Suggestion[];
}

export interface ReportEntry {
  object_id: string;
  group_id: string;
  kind: string;
  measured: number | null;
  target: number | [number, number];
  fulfillment: number;
}

export interface Report {
  entries: ReportEntry[];
  score: number;
}

export interface LayoutCell {
  key: string;
  kind: string;
  group_id: string;
  object_id: string | null;
  x: number;
  y: number;
  w: number;
  h: number;
  area: number;
  fulfillment: number;
}

export interface Layout {
  aspect: number;
  cells: LayoutCell[];
}

export interface DiffCell {
  delta: number;
  lightness: number;
}

export type DiffPayload = Record<string, Record<string, DiffCell>>;

export interface Weights {
  constraints: Record<string, number>;
  groups: Record<string, number>;
}

export interface SessionEvent {
  seq: number;
  type: string;
  data: Record<string, unknown>;
}

export interface SceneDocument {
  room: { width: number; depth: number; height: number; patch_resolution: number };
  surfaces: { id: string; kind: string; reflectance: number; [k: string]: unknown }[];
  luminaires: {
    id: string;
    model: string;
    position: [number, number, number];
    aim: [number, number, number];
    dim: number;
  }[];
  measuring_surfaces: {
    id: string;
    origin: [number, number, number];
    u: [number, number, number];
    v: [number, number, number];
    targets: Record<string, unknown>;
  }[];
  glare_probes: { id: string; eye: number[]; view: number[]; fov_deg: number }[];
  groups: { id: string; name: string; members: string[] }[];
}

export interface EditRequest {
  kind: string;
  params: Record<string, unknown>;
}

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

async function asJson<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = await resp.json();
      if (body && typeof body.detail === "string") detail = body.detail;
    } catch {
      // non-JSON error body, keep the status text
    }
    throw new ApiError(resp.status, detail);
  }
  return resp.json() as Promise<T>;
}

export class Client {
  constructor(public base: string) {}

  private url(path: string): string {
    return this.base.replace(/\/$/, "") + path;
  }

  async createSession(body: {
    scene: unknown;
    seed?: number;
    bounces?: number;
    resolution?: number;
    candidate_resolution?: number;
    weights?: Weights;
  }): Promise<{ session_id: string; root_id: string; score: number }> {
    const resp = await fetch(this.url("/sessions"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    return asJson(resp);
  }

  tree(sid: string): Promise<TreePayload> {
    return fetch(this.url(`/sessions/${sid}/tree`)).then((r) => asJson<TreePayload>(r));
  }

  suggestions(sid: string): Promise<SuggestionsPayload> {
    return fetch(this.url(`/sessions/${sid}/suggestions`)).then((r) =>
      asJson<SuggestionsPayload>(r),
    );
  }

  report(sid: string, nodeId: string): Promise<Report> {
    return fetch(this.url(`/sessions/${sid}/nodes/${nodeId}/report`)).then((r) =>
      asJson<Report>(r),
    );
  }

  scene(sid: string, nodeId: string): Promise<SceneDocument> {
    return fetch(this.url(`/sessions/${sid}/nodes/${nodeId}/scene`)).then((r) =>
      asJson<SceneDocument>(r),
    );
  }

  layout(sid: string, nodeId: string, detail: string[] = [], aspect = 1.6): Promise<Layout> {
    const q = new URLSearchParams({ detail: detail.join(","), aspect: String(aspect) });
    return fetch(this.url(`/sessions/${sid}/nodes/${nodeId}/layout?${q}`)).then((r) =>
      asJson<Layout>(r),
    );
  }

  diff(
    sid: string,
    reference: string,
    mode: "global" | "local",
    other?: string,
    detail: string[] = [],
  ): Promise<DiffPayload> {
    const q = new URLSearchParams({ reference, mode, detail: detail.join(",") });
    if (other) q.set("other", other);
    return fetch(this.url(`/sessions/${sid}/diff?${q}`)).then((r) => asJson<DiffPayload>(r));
  }

  postEdit(sid: string, edit: EditRequest): Promise<{ node_id: string; score: number }> {
    return fetch(this.url(`/sessions/${sid}/edits`), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(edit),
    }).then((r) => asJson<{ node_id: string; score: number }>(r));
  }

  postWeights(sid: string, weights: Weights): Promise<{ changed: boolean }> {
    return fetch(this.url(`/sessions/${sid}/weights`), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(weights),
    }).then((r) => asJson<{ changed: boolean }>(r));
  }

  accept(sid: string, nodeId: string): Promise<{ node_id: string; selection_id: string }> {
    return fetch(this.url(`/sessions/${sid}/suggestions/${nodeId}/accept`), {
      method: "POST",
    }).then((r) => asJson<{ node_id: string; selection_id: string }>(r));
  }

  select(sid: string, nodeId: string): Promise<{ path: string[] }> {
    return fetch(this.url(`/sessions/${sid}/select/${nodeId}`), { method: "POST" }).then((r) =>
      asJson<{ path: string[] }>(r),
    );
  }

  deleteNode(sid: string, nodeId: string): Promise<{ deleted: string }> {
    return fetch(this.url(`/sessions/${sid}/nodes/${nodeId}`), { method: "DELETE" }).then((r) =>
      asJson<{ deleted: string }>(r),
    );
  }

  eventLog(sid: string, after = 0): Promise<{ events: SessionEvent[]; next: number }> {
    return fetch(this.url(`/sessions/${sid}/events/log?after=${after}`)).then((r) =>
      asJson<{ events: SessionEvent[]; next: number }>(r),
    );
  }

  thumbnailUrl(sid: string, nodeId: string, falseColor = false): string {
    const q = falseColor ? "?false_color=true" : "";
    return this.url(`/sessions/${sid}/nodes/${nodeId}/thumbnail.png${q}`);
  }

  /**
   * Subscribe to the session's event stream, starting after `after`.
   *
   * Returns an unsubscribe function. Uses EventSource when the host
   * provides one, otherwise polls the log endpoint; either way events
   * are delivered in seq order, exactly once.
   */
  subscribe(sid: string, after: number, onEvent: (e: SessionEvent) => void): () => void {
    if (typeof EventSource !== "undefined") {
      const source = new EventSource(this.url(`/sessions/${sid}/events?after=${after}`));
      source.onmessage = (msg) => onEvent(JSON.parse(msg.data));
      return () => source.close();
    }
    let cursor = after;
    let stopped = false;
    const poll = async () => {
      while (!stopped) {
        try {
          const { events } = await this.eventLog(sid, cursor);
          for (const e of events) {
            cursor = e.seq;
            if (!stopped) onEvent(e);
          }
        } catch {
          // transient fetch failure, retry on the next tick
        }
        await new Promise((r) => setTimeout(r, 100));
      }
    };
    void poll();
    return () => {
      stopped = true;
    };
  }
}
