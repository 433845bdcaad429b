"""Session service: the engine behind an HTTP + event-stream API.

One session wraps one design history. Mutating commands (edits, weight
changes, accepts) are serialized per session under a lock; suggestion
batches run on background worker threads and are cancellable as a unit.
Clients learn about asynchronous results exclusively through the ordered
event log, served both as a server-sent-event stream and as a JSON polling
endpoint.
"""

from __future__ import annotations

import asyncio
import json
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response, StreamingResponse

from . import thumbnails
from .guidance import derive_seed, generate_suggestions
from .metrics import WeightConfig, evaluate
from .provenance import COMMITTED, SUGGESTION, ProvenanceTree, to_dot
from .scene import Edit, Scene, apply_edit, scene_from_document, scene_to_document
from .simulation import LightMap, SimSettings, SimulationCancelled, simulate
from .treemap import diff_encoding, layout_treemap

BATCH_IDLE = "idle"
BATCH_RUNNING = "running"
BATCH_READY = "ready"


@dataclass
class Session:
    id: str
    seed: int
    settings: SimSettings
    candidate_settings: SimSettings
    weights: WeightConfig
    tree: ProvenanceTree = field(default_factory=ProvenanceTree)
    batch_state: str = BATCH_IDLE
    batch_generation: int = 0
    batch_parent_id: str | None = None
    events: list = field(default_factory=list)
    lock: threading.RLock = field(default_factory=threading.RLock)
    maps: dict = field(default_factory=dict)  # node id -> LightMap
    _cancel: threading.Event | None = None
    _worker: threading.Thread | None = None

    # -- events ---------------------------------------------------------------

    def emit(self, event_type: str, **data) -> None:
        self.events.append({"seq": len(self.events) + 1, "type": event_type, "data": data})

    def events_after(self, seq: int) -> list:
        return [e for e in self.events if e["seq"] > seq]

    # -- maps -----------------------------------------------------------------

    def map_for(self, node_id: str) -> LightMap:
        """The node's light map, re-simulated deterministically if not cached."""
        if node_id not in self.maps:
            node = self.tree.node(node_id)
            settings = (
                self.candidate_settings if node.kind == SUGGESTION else self.settings
            )
            self.maps[node_id] = simulate(node.scene, settings)
        return self.maps[node_id]


class SessionManager:
    """All live sessions, plus the command handlers the routes call."""

    def __init__(self, suggestion_workers: int = 2):
        self.sessions: dict[str, Session] = {}
        self.suggestion_workers = suggestion_workers
        self._lock = threading.Lock()

    def get(self, session_id: str) -> Session:
        with self._lock:
            if session_id not in self.sessions:
                raise KeyError(session_id)
            return self.sessions[session_id]

    # -- commands -------------------------------------------------------------

    def create_session(
        self,
        scene_doc: dict,
        settings: SimSettings | None = None,
        weights: WeightConfig | None = None,
        seed: int = 0,
        candidate_resolution: float | None = None,
    ) -> Session:
        scene = scene_from_document(scene_doc)
        settings = settings or SimSettings()
        candidate = SimSettings(
            bounces=settings.bounces,
            resolution=candidate_resolution
            if candidate_resolution is not None
            else settings.resolution,
        )
        session = Session(
            id=uuid.uuid4().hex[:12],
            seed=seed,
            settings=settings,
            candidate_settings=candidate,
            weights=(weights or WeightConfig()).validated(),
        )
        with session.lock:
            light_map = simulate(scene, settings)
            report = evaluate(scene, light_map, session.weights)
            node = session.tree.commit(
                scene, report, label="M", description="Initial state", action=None,
                camera=dict(thumbnails.DEFAULT_CAMERA),
            )
            session.maps[node.id] = light_map
            session.emit("node_committed", node_id=node.id, score=node.score)
            self._start_batch(session)
        with self._lock:
            self.sessions[session.id] = session
        return session

    def handle_edit(self, session: Session, edit: Edit) -> str:
        """Apply, simulate, commit, restart suggestions. Returns the node id.

        Editing while previewing a suggestion adopts that suggestion first,
        so manual work forked from a proposal keeps it in the lineage and
        suggestion nodes stay leaves.
        """
        with session.lock:
            current = session.tree.selection()
            scene = apply_edit(current.scene, edit)  # ValueError bubbles to a 400
            if current.kind == SUGGESTION:
                accepted = session.tree.accept(current.id)
                session.emit(
                    "node_committed",
                    node_id=current.id,
                    score=accepted.score,
                    accepted=True,
                )
                current = accepted
            light_map = simulate(scene, session.settings)
            report = evaluate(scene, light_map, session.weights)
            node = session.tree.commit(
                scene,
                report,
                label="M",
                description=_describe_edit(edit),
                action=edit.to_dict(),
            )
            session.maps[node.id] = light_map
            session.emit("node_committed", node_id=node.id, score=node.score)
            self._start_batch(session)
            return node.id

    def handle_weights(self, session: Session, weights: WeightConfig) -> bool:
        """Store new weights and restart the batch; no-op when unchanged."""
        weights.validated()
        with session.lock:
            if weights.to_dict() == session.weights.to_dict():
                return False
            session.weights = weights
            session.emit("weights_changed", weights=weights.to_dict())
            self._start_batch(session)
            return True

    def accept_suggestion(self, session: Session, node_id: str) -> str:
        with session.lock:
            node = session.tree.node(node_id)
            if node.kind != SUGGESTION:
                raise ValueError(f"node {node_id!r} is not a suggestion")
            if node.batch != session.batch_generation:
                raise StaleSuggestionError(
                    f"suggestion {node_id!r} belongs to a superseded batch"
                )
            accepted = session.tree.accept(node_id)
            session.emit("node_committed", node_id=node_id, score=accepted.score, accepted=True)
            self._start_batch(session)
            return node_id

    def select(self, session: Session, node_id: str) -> list[str]:
        """Move the selection; suggestions follow committed selections.

        Selecting a suggestion is a preview and leaves the batch alone.
        Selecting a different committed state retargets the batch there.
        """
        with session.lock:
            path = session.tree.select(node_id)
            session.emit("node_selected", node_id=node_id, path=path)
            if (
                session.tree.node(node_id).kind == COMMITTED
                and node_id != session.batch_parent_id
            ):
                self._start_batch(session)
            return path

    def delete_node(self, session: Session, node_id: str) -> None:
        with session.lock:
            session.tree.delete(node_id)
            session.maps.pop(node_id, None)
            session.emit("node_deleted", node_id=node_id)
            if node_id == session.batch_parent_id:
                # the running batch lost its parent state; regrow from the
                # selection the deletion fell back to
                self._start_batch(session)

    # -- suggestion batches ----------------------------------------------------

    def _start_batch(self, session: Session) -> None:
        """Cancel any in-flight batch and launch a new one off the selection.

        Callers hold the session lock. The batch-started event always
        follows whatever event triggered the restart.
        """
        if session._cancel is not None and session.batch_state == BATCH_RUNNING:
            session._cancel.set()
            session.emit("batch_cancelled", generation=session.batch_generation)
        session.batch_generation += 1
        generation = session.batch_generation
        session.tree.prune_suggestions(before_batch=generation)
        session.batch_state = BATCH_RUNNING
        session._cancel = threading.Event()
        parent_id = session.tree.selection_id
        session.batch_parent_id = parent_id
        session.emit("batch_started", generation=generation, parent_id=parent_id)
        worker = threading.Thread(
            target=self._run_batch,
            args=(session, generation, parent_id, session._cancel),
            daemon=True,
        )
        session._worker = worker
        worker.start()

    def _run_batch(
        self, session: Session, generation: int, parent_id: str, cancel: threading.Event
    ) -> None:
        try:
            parent = session.tree.node(parent_id)
            suggestions = generate_suggestions(
                parent.scene,
                session.weights,
                session.candidate_settings,
                seed=derive_seed(session.seed, generation),
                cancel=cancel,
                workers=self.suggestion_workers,
            )
        except SimulationCancelled:
            return  # the canceller already emitted batch_cancelled
        except Exception as exc:
            # never leave the batch stuck in "running" on a worker crash
            with session.lock:
                if generation == session.batch_generation and not cancel.is_set():
                    session.batch_state = BATCH_IDLE
                    session.emit("batch_failed", generation=generation, error=str(exc))
            return
        with session.lock:
            if generation != session.batch_generation or cancel.is_set():
                return  # superseded while finishing up
            node_ids = []
            for s in suggestions:
                node = session.tree.add_suggestion(
                    parent_id,
                    s.scene,
                    s.report,
                    label=s.label,
                    description=s.description,
                    action=s.edit.to_dict(),
                    batch=generation,
                )
                session.maps[node.id] = s.light_map
                node_ids.append(node.id)
            session.batch_state = BATCH_READY
            session.emit("batch_ready", generation=generation, node_ids=node_ids)

    def wait_for_batch(self, session: Session, timeout: float = 60.0) -> None:
        """Block until no batch is running (test and CLI convenience)."""
        deadline = threading.Event()
        waited = 0.0
        while waited < timeout:
            with session.lock:
                if session.batch_state != BATCH_RUNNING:
                    return
                worker = session._worker
            if worker is not None:
                worker.join(0.05)
            else:
                deadline.wait(0.05)
            waited += 0.05
        raise TimeoutError("suggestion batch did not settle in time")


class StaleSuggestionError(ValueError):
    """Accepting a suggestion from a batch that has been superseded."""


def _describe_edit(edit: Edit) -> str:
    p = edit.params
    if edit.kind == "move_light":
        d = p["delta"]
        return f"Move {p['light_id']} by ({d[0]:.2f}, {d[1]:.2f}, {d[2]:.2f})"
    if edit.kind == "set_dim":
        target = p.get("light_id") or "all lights"
        return f"Set dim of {target} to {float(p['value']):.0%}"
    if edit.kind == "scale_dim":
        return f"Scale dim of all lights by {float(p['factor']):.2f}"
    if edit.kind == "add_light":
        return f"Add {p['model']}"
    if edit.kind == "remove_light":
        return f"Remove {p['light_id']}"
    if edit.kind == "shift_height":
        return f"Shift height by {float(p['dz']):+.2f} m"
    if edit.kind == "change_collection":
        return f"Switch to collection {p['collection']}"
    if edit.kind == "change_version":
        return f"Switch to version {p['version']}"
    return edit.kind


# ---------------------------------------------------------------------------
# Session persistence
# ---------------------------------------------------------------------------


def session_to_dict(session: Session) -> dict:
    return {
        "version": 1,
        "id": session.id,
        "seed": session.seed,
        "settings": {
            "bounces": session.settings.bounces,
            "resolution": session.settings.resolution,
        },
        "candidate_settings": {
            "bounces": session.candidate_settings.bounces,
            "resolution": session.candidate_settings.resolution,
        },
        "weights": session.weights.to_dict(),
        "batch_generation": session.batch_generation,
        "tree": session.tree.to_dict(),
    }


def save_session(session: Session, path: str | Path) -> None:
    Path(path).write_text(json.dumps(session_to_dict(session), indent=2) + "\n")


def session_from_dict(d: dict) -> Session:
    settings = SimSettings(
        bounces=d["settings"]["bounces"], resolution=d["settings"]["resolution"]
    )
    candidate = SimSettings(
        bounces=d["candidate_settings"]["bounces"],
        resolution=d["candidate_settings"]["resolution"],
    )
    session = Session(
        id=d["id"],
        seed=d["seed"],
        settings=settings,
        candidate_settings=candidate,
        weights=WeightConfig.from_dict(d["weights"]),
        tree=ProvenanceTree.from_dict(d["tree"]),
    )
    session.batch_generation = d["batch_generation"]
    return session


def load_session(path: str | Path) -> Session:
    return session_from_dict(json.loads(Path(path).read_text()))


# ---------------------------------------------------------------------------
# HTTP app
# ---------------------------------------------------------------------------


def create_app(manager: SessionManager | None = None) -> FastAPI:
    app = FastAPI(title="luxplan service", version="1")
    # the browser client is served from its own origin during development
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    mgr = manager or SessionManager()
    app.state.manager = mgr

    def _session(session_id: str) -> Session:
        try:
            return mgr.get(session_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")

    def _node(session: Session, node_id: str):
        try:
            return session.tree.node(node_id)
        except ValueError as exc:
            raise HTTPException(status_code=404, detail=str(exc))

    @app.exception_handler(ValueError)
    async def value_error_handler(request: Request, exc: ValueError):
        status = 409 if isinstance(exc, StaleSuggestionError) else 400
        return JSONResponse(status_code=status, content={"detail": str(exc)})

    @app.post("/sessions")
    def create_session(body: dict):
        settings = SimSettings(
            bounces=int(body.get("bounces", 3)),
            resolution=body.get("resolution"),
        )
        weights = (
            WeightConfig.from_dict(body["weights"]) if body.get("weights") else WeightConfig()
        )
        session = mgr.create_session(
            body["scene"],
            settings=settings,
            weights=weights,
            seed=int(body.get("seed", 0)),
            candidate_resolution=body.get("candidate_resolution"),
        )
        return {
            "session_id": session.id,
            "root_id": session.tree.root_id,
            "score": session.tree.selection().score,
        }

    @app.get("/sessions/{session_id}/tree")
    def get_tree(session_id: str):
        session = _session(session_id)
        with session.lock:
            nodes = [
                {
                    "id": n.id,
                    "parent_id": n.parent_id,
                    "label": n.label,
                    "description": n.description,
                    "kind": n.kind,
                    "batch": n.batch,
                    "score": n.score,
                    "action": n.action,
                }
                for n in session.tree.nodes.values()
            ]
            return {
                "root_id": session.tree.root_id,
                "selection_id": session.tree.selection_id,
                "batch": {
                    "state": session.batch_state,
                    "generation": session.batch_generation,
                },
                "path": session.tree.path_to(session.tree.selection_id),
                "nodes": nodes,
            }

    @app.post("/sessions/{session_id}/edits")
    def post_edit(session_id: str, body: dict):
        session = _session(session_id)
        node_id = mgr.handle_edit(session, Edit.from_dict(body))
        return {"node_id": node_id, "score": session.tree.node(node_id).score}

    @app.post("/sessions/{session_id}/weights")
    def post_weights(session_id: str, body: dict):
        session = _session(session_id)
        changed = mgr.handle_weights(session, WeightConfig.from_dict(body))
        return {"changed": changed}

    @app.get("/sessions/{session_id}/suggestions")
    def get_suggestions(session_id: str):
        session = _session(session_id)
        with session.lock:
            nodes = [
                {
                    "id": n.id,
                    "parent_id": n.parent_id,
                    "label": n.label,
                    "description": n.description,
                    "score": n.score,
                    "batch": n.batch,
                    "action": n.action,
                }
                for n in session.tree.nodes.values()
                if n.kind == SUGGESTION and n.batch == session.batch_generation
            ]
            return {
                "batch": {
                    "state": session.batch_state,
                    "generation": session.batch_generation,
                },
                "suggestions": sorted(nodes, key=lambda n: -n["score"]),
            }

    @app.post("/sessions/{session_id}/suggestions/{node_id}/accept")
    def accept(session_id: str, node_id: str):
        session = _session(session_id)
        _node(session, node_id)
        accepted = mgr.accept_suggestion(session, node_id)
        return {"node_id": accepted, "selection_id": session.tree.selection_id}

    @app.post("/sessions/{session_id}/select/{node_id}")
    def select(session_id: str, node_id: str):
        session = _session(session_id)
        _node(session, node_id)
        return {"path": mgr.select(session, node_id)}

    @app.delete("/sessions/{session_id}/nodes/{node_id}")
    def delete_node(session_id: str, node_id: str):
        session = _session(session_id)
        _node(session, node_id)
        mgr.delete_node(session, node_id)
        return {"deleted": node_id}

    @app.get("/sessions/{session_id}/nodes/{node_id}/report")
    def get_report(session_id: str, node_id: str):
        session = _session(session_id)
        node = _node(session, node_id)
        return node.report.to_dict()

    @app.get("/sessions/{session_id}/nodes/{node_id}/scene")
    def get_scene(session_id: str, node_id: str):
        session = _session(session_id)
        node = _node(session, node_id)
        return scene_to_document(node.scene)

    @app.get("/sessions/{session_id}/nodes/{node_id}/layout")
    def get_layout(session_id: str, node_id: str, detail: str = "", aspect: float = 1.6):
        session = _session(session_id)
        node = _node(session, node_id)
        detail_groups = frozenset(g for g in detail.split(",") if g)
        with session.lock:
            layout = layout_treemap(
                node.report.entries, session.weights, detail_groups, aspect
            )
        return layout.to_dict()

    @app.get("/sessions/{session_id}/diff")
    def get_diff(
        session_id: str,
        reference: str,
        mode: str = "global",
        other: str | None = None,
        detail: str = "",
    ):
        session = _session(session_id)
        _node(session, reference)
        detail_groups = frozenset(g for g in detail.split(",") if g)
        with session.lock:
            reports = {n.id: n.report for n in session.tree.nodes.values()}
            return diff_encoding(reports, reference, mode, other, detail_groups)

    @app.get("/sessions/{session_id}/nodes/{node_id}/thumbnail.png")
    def get_thumbnail(session_id: str, node_id: str, false_color: bool = False):
        session = _session(session_id)
        node = _node(session, node_id)
        with session.lock:
            light_map = session.map_for(node_id)
            pixels = thumbnails.render_thumbnail(
                node.scene, light_map, camera=node.camera, false_color=false_color
            )
        return Response(content=thumbnails.encode_png(pixels), media_type="image/png")

    @app.get("/sessions/{session_id}/tree.dot")
    def get_dot(session_id: str):
        session = _session(session_id)
        with session.lock:
            return Response(content=to_dot(session.tree), media_type="text/vnd.graphviz")

    @app.get("/sessions/{session_id}/events/log")
    def get_events(session_id: str, after: int = 0):
        session = _session(session_id)
        with session.lock:
            events = session.events_after(after)
            return {"events": events, "next": session.events[-1]["seq"] if session.events else 0}

    @app.get("/sessions/{session_id}/events")
    async def stream_events(session_id: str, request: Request, after: int = 0):
        session = _session(session_id)

        async def stream():
            cursor = after
            while True:
                if await request.is_disconnected():
                    return
                with session.lock:
                    fresh = session.events_after(cursor)
                for event in fresh:
                    cursor = event["seq"]
                    yield f"data: {json.dumps(event)}\n\n"
                await asyncio.sleep(0.05)

        return StreamingResponse(stream(), media_type="text/event-stream")

    return app


app = create_app()
