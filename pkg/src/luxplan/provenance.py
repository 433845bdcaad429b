"""Design history: an append-only tree of committed states and suggestions.

Every state the designer commits, and every suggestion the engine
generates, becomes a node. Nodes never change once created, with a single
exception: accepting a suggestion flips its kind to committed (and, unless
sibling retention is enabled, removes the suggestion siblings that lost).
Deleting is allowed only on leaves, so history ancestry is never rewritten.

Node labels are single letters naming the action that produced the state:
M manual edit, A add light, R remove light, d dim, H height change,
C collection/version change.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

from .metrics import FulfillmentReport
from .scene import Scene, scene_from_document, scene_to_document

COMMITTED = "committed"
SUGGESTION = "suggestion"


@dataclass(frozen=True)
class ProvenanceNode:
    id: str
    parent_id: str | None
    label: str  # single action letter
    description: str
    kind: str  # committed | suggestion
    action: dict | None  # edit descriptor that produced this state, None at root
    scene: Scene
    report: FulfillmentReport
    score: float  # progress score as generated, kept even if weights change later
    batch: int = 0  # suggestion batch generation, 0 for manual commits
    camera: dict | None = None  # thumbnail viewing angle inherited by children

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "parent_id": self.parent_id,
            "label": self.label,
            "description": self.description,
            "kind": self.kind,
            "action": self.action,
            "batch": self.batch,
            "camera": self.camera,
            "score": self.score,
            "scene": scene_to_document(self.scene),
            "report": self.report.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ProvenanceNode":
        return cls(
            id=d["id"],
            parent_id=d["parent_id"],
            label=d["label"],
            description=d["description"],
            kind=d["kind"],
            action=d["action"],
            batch=d["batch"],
            camera=d["camera"],
            score=d["score"],
            scene=scene_from_document(d["scene"]),
            report=FulfillmentReport.from_dict(d["report"]),
        )


@dataclass
class ProvenanceTree:
    """The tree plus the current selection.

    ``retain_siblings`` controls what accepting a suggestion does with the
    sibling suggestions that were not chosen: by default they are pruned,
    optionally they are kept for later comparison.
    """

    nodes: dict[str, ProvenanceNode] = field(default_factory=dict)
    root_id: str | None = None
    selection_id: str | None = None
    retain_siblings: bool = False
    _counter: int = 0

    # -- queries -------------------------------------------------------------

    def node(self, node_id: str) -> ProvenanceNode:
        if node_id not in self.nodes:
            raise ValueError(f"unknown node {node_id!r}")
        return self.nodes[node_id]

    def selection(self) -> ProvenanceNode:
        return self.node(self.selection_id)

    def children(self, node_id: str) -> list[ProvenanceNode]:
        return [n for n in self.nodes.values() if n.parent_id == node_id]

    def path_to(self, node_id: str) -> list[str]:
        """Node ids from the root to the given node, inclusive."""
        path = []
        current: str | None = node_id
        while current is not None:
            node = self.node(current)
            path.append(node.id)
            current = node.parent_id
        path.reverse()
        return path

    # -- mutations -----------------------------------------------------------

    def _new_id(self) -> str:
        self._counter += 1
        return f"n{self._counter:04d}"

    def commit(
        self,
        scene: Scene,
        report: FulfillmentReport,
        label: str,
        description: str,
        action: dict | None = None,
        parent_id: str | None = None,
        camera: dict | None = None,
    ) -> ProvenanceNode:
        """Append a committed node and select it.

        The first commit becomes the root; later commits default to
        branching off the current selection.
        """
        if self.root_id is None:
            parent = None
        else:
            parent = parent_id if parent_id is not None else self.selection_id
            self.node(parent)
        if camera is None and parent is not None:
            camera = self.node(parent).camera
        node = ProvenanceNode(
            id=self._new_id(),
            parent_id=parent,
            label=label,
            description=description,
            kind=COMMITTED,
            action=action,
            scene=scene,
            report=report,
            score=report.score,
            camera=camera,
        )
        self.nodes[node.id] = node
        if self.root_id is None:
            self.root_id = node.id
        self.selection_id = node.id
        return node

    def add_suggestion(
        self,
        parent_id: str,
        scene: Scene,
        report: FulfillmentReport,
        label: str,
        description: str,
        action: dict,
        batch: int,
    ) -> ProvenanceNode:
        parent = self.node(parent_id)
        node = ProvenanceNode(
            id=self._new_id(),
            parent_id=parent.id,
            label=label,
            description=description,
            kind=SUGGESTION,
            action=action,
            scene=scene,
            report=report,
            score=report.score,
            batch=batch,
            camera=parent.camera,
        )
        self.nodes[node.id] = node
        return node

    def accept(self, node_id: str) -> ProvenanceNode:
        """Flip a suggestion to committed, prune its losing siblings, select it."""
        node = self.node(node_id)
        if node.kind != SUGGESTION:
            raise ValueError(f"node {node_id!r} is not a suggestion")
        accepted = replace(node, kind=COMMITTED)
        self.nodes[node_id] = accepted
        if not self.retain_siblings:
            for sibling in self.children(node.parent_id):
                if sibling.id != node_id and sibling.kind == SUGGESTION:
                    del self.nodes[sibling.id]
        self.selection_id = node_id
        return accepted

    def select(self, node_id: str) -> list[str]:
        """Move the selection; returns the root-to-node path."""
        self.node(node_id)
        self.selection_id = node_id
        return self.path_to(node_id)

    def delete(self, node_id: str) -> None:
        """Remove a leaf. The root and interior nodes are not deletable."""
        node = self.node(node_id)
        if node_id == self.root_id:
            raise ValueError("the root state cannot be deleted")
        if self.children(node_id):
            raise ValueError(f"node {node_id!r} has children; only leaves can be deleted")
        del self.nodes[node_id]
        if self.selection_id == node_id:
            self.selection_id = node.parent_id

    def prune_suggestions(self, before_batch: int) -> list[str]:
        """Drop unaccepted suggestion nodes of batches older than the given one."""
        stale = [
            n.id
            for n in self.nodes.values()
            if n.kind == SUGGESTION and n.batch < before_batch
        ]
        for node_id in stale:
            # suggestions never have children, so this is always leaf removal
            parent_id = self.nodes[node_id].parent_id
            del self.nodes[node_id]
            if self.selection_id == node_id:
                self.selection_id = parent_id
        return stale

    # -- serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "root_id": self.root_id,
            "selection_id": self.selection_id,
            "retain_siblings": self.retain_siblings,
            "counter": self._counter,
            "nodes": [n.to_dict() for n in self.nodes.values()],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ProvenanceTree":
        tree = cls(
            root_id=d["root_id"],
            selection_id=d["selection_id"],
            retain_siblings=d.get("retain_siblings", False),
        )
        tree._counter = d["counter"]
        for nd in d["nodes"]:
            node = ProvenanceNode.from_dict(nd)
            tree.nodes[node.id] = node
        return tree


# ---------------------------------------------------------------------------
# Exports
# ---------------------------------------------------------------------------


def to_dot(tree: ProvenanceTree) -> str:
    """Graphviz DOT rendering of the history tree.

    Committed nodes are solid boxes, suggestions dashed; the selected node
    is drawn bold. Deterministic output: nodes appear in id order.
    """
    lines = ["digraph design_history {", "  rankdir=TB;", '  node [fontname="sans-serif"];']
    for node_id in sorted(tree.nodes):
        n = tree.nodes[node_id]
        style = "dashed" if n.kind == SUGGESTION else "solid"
        if node_id == tree.selection_id:
            style += ",bold"
        label = f"{n.label} {n.score:.2f}"
        lines.append(f'  {node_id} [label="{label}" shape=box style="{style}"];')
    for node_id in sorted(tree.nodes):
        n = tree.nodes[node_id]
        if n.parent_id is not None:
            lines.append(f"  {n.parent_id} -> {node_id};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def save_tree(tree: ProvenanceTree, path: str | Path) -> None:
    Path(path).write_text(json.dumps(tree.to_dict(), indent=2) + "\n")


def load_tree(path: str | Path) -> ProvenanceTree:
    return ProvenanceTree.from_dict(json.loads(Path(path).read_text()))
