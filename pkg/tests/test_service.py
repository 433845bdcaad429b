"""HTTP session service: commands, suggestion batches, events, persistence."""

import threading
from dataclasses import dataclass

import pytest
from fastapi.testclient import TestClient

from luxplan.provenance import COMMITTED, SUGGESTION
from luxplan.service import (
    SessionManager,
    create_app,
    load_session,
    save_session,
    session_to_dict,
)

from conftest import fixture_doc


@dataclass
class Box:
    manager: SessionManager
    client: TestClient
    sid: str
    root: str

    @property
    def session(self):
        return self.manager.get(self.sid)

    def url(self, tail: str) -> str:
        return f"/sessions/{self.sid}{tail}"

    def settle(self):
        self.manager.wait_for_batch(self.session)

    def events(self):
        return self.client.get(self.url("/events/log")).json()["events"]

    def suggestions(self):
        return self.client.get(self.url("/suggestions")).json()["suggestions"]


@pytest.fixture()
def box():
    manager = SessionManager()
    client = TestClient(create_app(manager))
    resp = client.post("/sessions", json={"scene": fixture_doc("studio"), "seed": 7})
    assert resp.status_code == 200
    body = resp.json()
    return Box(manager=manager, client=client, sid=body["session_id"], root=body["root_id"])


# ---------------------------------------------------------------------------
# Session creation and the event contract
# ---------------------------------------------------------------------------


def test_create_session_commits_a_root(box):
    tree = box.client.get(box.url("/tree")).json()
    assert tree["root_id"] == box.root
    assert tree["selection_id"] == box.root
    assert tree["path"] == [box.root]
    root = next(n for n in tree["nodes"] if n["id"] == box.root)
    assert root["kind"] == COMMITTED
    assert 0.0 <= root["score"] <= 1.0


def test_events_follow_commit_then_batch_order(box):
    box.settle()
    events = box.events()
    seqs = [e["seq"] for e in events]
    assert seqs == sorted(seqs) and len(set(seqs)) == len(seqs)
    kinds = [e["type"] for e in events]
    assert kinds[0] == "node_committed"
    assert kinds[1] == "batch_started"
    assert "batch_ready" in kinds
    ready = next(e for e in events if e["type"] == "batch_ready")
    started = next(e for e in events if e["type"] == "batch_started")
    assert ready["data"]["generation"] == started["data"]["generation"] == 1
    # the log endpoint supports incremental polling
    tail = box.client.get(box.url("/events/log"), params={"after": seqs[-1]}).json()
    assert tail["events"] == []


def test_suggestions_are_capped_sorted_and_current(box):
    box.settle()
    body = box.client.get(box.url("/suggestions")).json()
    assert body["batch"]["state"] == "ready"
    suggs = body["suggestions"]
    assert 0 < len(suggs) <= 3
    scores = [s["score"] for s in suggs]
    assert scores == sorted(scores, reverse=True)
    for s in suggs:
        assert s["parent_id"] == box.root
        assert s["batch"] == 1
        assert s["action"]["kind"]
        assert s["label"]  # one-letter action badge for the tree view


# ---------------------------------------------------------------------------
# Edits
# ---------------------------------------------------------------------------


def test_edit_commits_a_child_and_restarts_the_batch(box):
    box.settle()
    resp = box.client.post(
        box.url("/edits"),
        json={"kind": "set_dim", "params": {"light_id": "S1", "value": 0.5}},
    )
    assert resp.status_code == 200
    node_id = resp.json()["node_id"]
    box.settle()
    tree = box.client.get(box.url("/tree")).json()
    assert tree["selection_id"] == node_id
    node = next(n for n in tree["nodes"] if n["id"] == node_id)
    assert node["parent_id"] == box.root
    assert node["kind"] == COMMITTED
    assert node["action"] == {"kind": "set_dim", "params": {"light_id": "S1", "value": 0.5}}
    assert "dim" in node["description"].lower()

    events = box.events()
    commit_seq = next(
        e["seq"]
        for e in events
        if e["type"] == "node_committed" and e["data"]["node_id"] == node_id
    )
    start_seq = next(
        e["seq"]
        for e in events
        if e["type"] == "batch_started" and e["data"]["generation"] == 2
    )
    assert commit_seq < start_seq


def test_rapid_edits_yield_one_final_batch(box):
    for value in (0.9, 0.7, 0.5):
        resp = box.client.post(
            box.url("/edits"),
            json={"kind": "set_dim", "params": {"light_id": "S1", "value": value}},
        )
        assert resp.status_code == 200
    box.settle()
    events = box.events()
    final_gen = max(
        e["data"]["generation"] for e in events if e["type"] == "batch_started"
    )
    ready_gens = [
        e["data"]["generation"] for e in events if e["type"] == "batch_ready"
    ]
    assert ready_gens.count(final_gen) == 1, "final batch must land exactly once"
    # every ready batch matches a started one, never a phantom generation
    started = {
        e["data"]["generation"] for e in events if e["type"] == "batch_started"
    }
    assert set(ready_gens) <= started
    # only final-generation suggestions remain visible
    for s in box.suggestions():
        assert s["batch"] == final_gen
    tree = box.client.get(box.url("/tree")).json()
    stale = [
        n
        for n in tree["nodes"]
        if n["kind"] == SUGGESTION and n["batch"] != final_gen
    ]
    assert stale == []


def test_invalid_edit_is_rejected_without_a_commit(box):
    box.settle()
    before = box.client.get(box.url("/tree")).json()
    resp = box.client.post(
        box.url("/edits"),
        json={"kind": "remove_light", "params": {"light_id": "nope"}},
    )
    assert resp.status_code == 400
    assert "nope" in resp.json()["detail"]
    after = box.client.get(box.url("/tree")).json()
    assert len(after["nodes"]) == len(before["nodes"])
    assert after["selection_id"] == before["selection_id"]


# ---------------------------------------------------------------------------
# Accepting suggestions
# ---------------------------------------------------------------------------


def test_accept_commits_prunes_and_reselects(box):
    box.settle()
    suggs = box.suggestions()
    top = suggs[0]["id"]
    resp = box.client.post(box.url(f"/suggestions/{top}/accept"))
    assert resp.status_code == 200
    assert resp.json()["selection_id"] == top
    box.settle()
    tree = box.client.get(box.url("/tree")).json()
    accepted = next(n for n in tree["nodes"] if n["id"] == top)
    assert accepted["kind"] == COMMITTED
    # losing siblings of the accepted batch are gone
    assert all(
        n["id"] == top or n["batch"] != 1
        for n in tree["nodes"]
        if n["kind"] == SUGGESTION or n["batch"] == 1
        if n["id"] != box.root
    )
    committed = next(
        e
        for e in box.events()
        if e["type"] == "node_committed" and e["data"].get("accepted")
    )
    assert committed["data"]["node_id"] == top
    # undo: selecting the parent brings the old state back
    path = box.client.post(box.url(f"/select/{box.root}")).json()["path"]
    assert path == [box.root]


def test_stale_suggestion_id_is_an_error(box):
    box.settle()
    old = box.suggestions()[0]["id"]
    box.client.post(
        box.url("/edits"),
        json={"kind": "scale_dim", "params": {"factor": 0.9}},
    )
    box.settle()
    resp = box.client.post(box.url(f"/suggestions/{old}/accept"))
    assert resp.status_code in (404, 409)
    # the fresh batch still accepts normally
    fresh = box.suggestions()[0]["id"]
    assert box.client.post(box.url(f"/suggestions/{fresh}/accept")).status_code == 200


def test_accepting_a_committed_node_is_rejected(box):
    box.settle()
    resp = box.client.post(box.url(f"/suggestions/{box.root}/accept"))
    assert resp.status_code == 400
    assert "not a suggestion" in resp.json()["detail"]


# ---------------------------------------------------------------------------
# Weights
# ---------------------------------------------------------------------------


def test_same_weights_are_a_no_op(box):
    box.settle()
    gen = box.client.get(box.url("/tree")).json()["batch"]["generation"]
    resp = box.client.post(box.url("/weights"), json={"constraints": {}, "groups": {}})
    assert resp.json() == {"changed": False}
    assert box.client.get(box.url("/tree")).json()["batch"]["generation"] == gen


def test_changed_weights_restart_suggestions(box):
    box.settle()
    gen = box.client.get(box.url("/tree")).json()["batch"]["generation"]
    resp = box.client.post(
        box.url("/weights"), json={"constraints": {"average_lux": 5.0}, "groups": {}}
    )
    assert resp.json() == {"changed": True}
    box.settle()
    assert box.client.get(box.url("/tree")).json()["batch"]["generation"] == gen + 1
    assert any(e["type"] == "weights_changed" for e in box.events())


def test_invalid_weights_are_rejected(box):
    resp = box.client.post(
        box.url("/weights"), json={"constraints": {"sparkle": 1.0}, "groups": {}}
    )
    assert resp.status_code == 400
    assert "sparkle" in resp.json()["detail"]


# ---------------------------------------------------------------------------
# Views: report, scene, layout, diff, thumbnail, dot
# ---------------------------------------------------------------------------


def test_report_and_scene_views(box):
    report = box.client.get(box.url(f"/nodes/{box.root}/report")).json()
    assert set(report) == {"entries", "score"}
    kinds = {e["kind"] for e in report["entries"]}
    assert "average_lux" in kinds
    scene = box.client.get(box.url(f"/nodes/{box.root}/scene")).json()
    assert scene["room"]["width"] == 3.0
    assert [lum["id"] for lum in scene["luminaires"]] == ["S1"]


def test_layout_respects_the_session_weights(box):
    layout = box.client.get(box.url(f"/nodes/{box.root}/layout")).json()
    kinds = {c["kind"] for c in layout["cells"]}
    assert "average_lux" in kinds
    box.client.post(
        box.url("/weights"),
        json={"constraints": {"average_lux": 0.0}, "groups": {}},
    )
    box.settle()
    layout = box.client.get(box.url(f"/nodes/{box.root}/layout")).json()
    assert all(c["kind"] != "average_lux" for c in layout["cells"])
    total = sum(c["area"] for c in layout["cells"])
    assert total == pytest.approx(1.0, abs=1e-9)


def test_layout_detail_query_splits_groups(box):
    layout = box.client.get(
        box.url(f"/nodes/{box.root}/layout"), params={"detail": "main", "aspect": 2.0}
    ).json()
    assert layout["aspect"] == 2.0
    detailed = [c for c in layout["cells"] if c["group_id"] == "main"]
    assert all(c["object_id"] == "floor_all" for c in detailed)


def test_diff_view_centers_the_reference(box):
    box.settle()
    enc = box.client.get(box.url("/diff"), params={"reference": box.root}).json()
    assert box.root in enc
    for cell in enc[box.root].values():
        assert cell["delta"] == 0.0
        assert cell["lightness"] == 0.5
    resp = box.client.get(
        box.url("/diff"), params={"reference": box.root, "mode": "sideways"}
    )
    assert resp.status_code == 400


def test_thumbnail_endpoint_serves_png(box):
    resp = box.client.get(box.url(f"/nodes/{box.root}/thumbnail.png"))
    assert resp.status_code == 200
    assert resp.headers["content-type"] == "image/png"
    assert resp.content[:8] == b"\x89PNG\r\n\x1a\n"
    false = box.client.get(
        box.url(f"/nodes/{box.root}/thumbnail.png"), params={"false_color": "true"}
    )
    assert false.content != resp.content


def test_dot_export(box):
    resp = box.client.get(box.url("/tree.dot"))
    assert resp.headers["content-type"].startswith("text/vnd.graphviz")
    assert resp.text.startswith("digraph")
    assert box.root in resp.text


def test_event_stream_replays_the_log(box):
    # TestClient cannot hang up on an endless stream, so run a real server
    # and read the first frame over a raw connection.
    import http.client
    import json as jsonlib
    import time

    import uvicorn

    config = uvicorn.Config(
        box.client.app, host="127.0.0.1", port=0, log_level="warning"
    )
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    try:
        deadline = time.monotonic() + 10
        while not server.started:
            assert time.monotonic() < deadline, "server did not start"
            time.sleep(0.02)
        port = server.servers[0].sockets[0].getsockname()[1]
        box.settle()
        conn = http.client.HTTPConnection("127.0.0.1", port, timeout=10)
        conn.request("GET", box.url("/events?after=0"))
        resp = conn.getresponse()
        assert resp.status == 200
        assert resp.headers["content-type"].startswith("text/event-stream")
        line = resp.readline().decode()  # readline() decodes the chunking
        conn.close()
        assert line.startswith("data: ")
        event = jsonlib.loads(line[len("data: ") :])
        assert event["seq"] == 1
        assert event["type"] == "node_committed"
    finally:
        server.should_exit = True
        thread.join(timeout=10)


# ---------------------------------------------------------------------------
# Node management and error paths
# ---------------------------------------------------------------------------


def test_delete_removes_a_leaf_but_not_the_root(box):
    box.settle()
    node_id = box.client.post(
        box.url("/edits"),
        json={"kind": "scale_dim", "params": {"factor": 0.8}},
    ).json()["node_id"]
    box.settle()
    # going back to the root retargets suggestions there, which clears the
    # edit node's suggestion children and makes it a deletable leaf
    assert box.client.post(box.url(f"/select/{box.root}")).status_code == 200
    resp = box.client.delete(box.url(f"/nodes/{node_id}"))
    assert resp.status_code == 200
    tree = box.client.get(box.url("/tree")).json()
    assert node_id not in {n["id"] for n in tree["nodes"]}
    assert box.client.delete(box.url(f"/nodes/{box.root}")).status_code == 400
    box.settle()


def test_selecting_a_committed_node_retargets_suggestions(box):
    box.settle()
    node_id = box.client.post(
        box.url("/edits"),
        json={"kind": "scale_dim", "params": {"factor": 0.8}},
    ).json()["node_id"]
    box.settle()
    gen = box.client.get(box.url("/tree")).json()["batch"]["generation"]
    box.client.post(box.url(f"/select/{box.root}"))
    box.settle()
    suggs = box.suggestions()
    assert suggs and all(s["parent_id"] == box.root for s in suggs)
    # reselecting the batch parent leaves the ready batch alone
    gen = box.client.get(box.url("/tree")).json()["batch"]["generation"]
    ids = [s["id"] for s in box.suggestions()]
    box.client.post(box.url(f"/select/{box.root}"))
    assert box.client.get(box.url("/tree")).json()["batch"]["generation"] == gen
    assert [s["id"] for s in box.suggestions()] == ids
    # previewing a suggestion is also not a retarget
    box.client.post(box.url(f"/select/{ids[0]}"))
    assert box.client.get(box.url("/tree")).json()["batch"]["generation"] == gen
    assert node_id in {n["id"] for n in box.client.get(box.url("/tree")).json()["nodes"]}


def test_editing_a_previewed_suggestion_adopts_it(box):
    box.settle()
    top = box.suggestions()[0]["id"]
    box.client.post(box.url(f"/select/{top}"))
    resp = box.client.post(
        box.url("/edits"),
        json={"kind": "scale_dim", "params": {"factor": 0.9}},
    )
    assert resp.status_code == 200
    node_id = resp.json()["node_id"]
    box.settle()
    tree = box.client.get(box.url("/tree")).json()
    adopted = next(n for n in tree["nodes"] if n["id"] == top)
    assert adopted["kind"] == COMMITTED
    edited = next(n for n in tree["nodes"] if n["id"] == node_id)
    assert edited["parent_id"] == top


def test_unknown_ids_return_404(box):
    assert box.client.get("/sessions/nope/tree").status_code == 404
    assert box.client.get(box.url("/nodes/n9999/report")).status_code == 404
    assert box.client.post(box.url("/select/n9999")).status_code == 404
    assert box.client.post(box.url("/suggestions/n9999/accept")).status_code == 404


def test_cross_origin_requests_are_allowed(box):
    resp = box.client.get(box.url("/tree"), headers={"origin": "http://localhost:5173"})
    assert resp.status_code == 200
    assert resp.headers["access-control-allow-origin"] == "*"


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------


def test_session_save_and_reload_bit_identical(box, tmp_path):
    box.settle()
    box.client.post(
        box.url("/edits"), json={"kind": "scale_dim", "params": {"factor": 0.85}}
    )
    box.settle()
    session = box.session
    first = tmp_path / "session.json"
    second = tmp_path / "reload.json"
    with session.lock:
        save_session(session, first)
    reloaded = load_session(first)
    save_session(reloaded, second)
    assert first.read_bytes() == second.read_bytes()
    assert reloaded.id == session.id
    assert reloaded.tree.selection_id == session.tree.selection_id
    assert session_to_dict(reloaded) == session_to_dict(session)
    # the reloaded session can reproduce any node's light field on demand
    light_map = reloaded.map_for(reloaded.tree.root_id)
    with session.lock:
        original = session.map_for(session.tree.root_id)
    for a, b in zip(light_map.grids, original.grids):
        assert a.surface_id == b.surface_id
        assert (a.grid() == b.grid()).all()


def test_concurrent_commands_serialize_cleanly(box):
    box.settle()
    errors = []

    def hammer(value):
        try:
            resp = box.client.post(
                box.url("/edits"),
                json={"kind": "set_dim", "params": {"light_id": "S1", "value": value}},
            )
            if resp.status_code != 200:
                errors.append(resp.status_code)
        except Exception as exc:  # pragma: no cover - failure reporting
            errors.append(repr(exc))

    threads = [threading.Thread(target=hammer, args=(0.3 + i * 0.1,)) for i in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert errors == []
    box.settle()
    tree = box.client.get(box.url("/tree")).json()
    committed = [n for n in tree["nodes"] if n["kind"] == COMMITTED]
    assert len(committed) == 5  # root plus one per edit
    final_gen = tree["batch"]["generation"]
    for s in box.suggestions():
        assert s["batch"] == final_gen
