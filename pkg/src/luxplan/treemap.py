"""Treemap layout of a fulfillment report, and grayscale state comparison.

Every design state is summarized as a weighted treemap inside the unit
square. The first level splits the area between constraint kinds in
proportion to their weights; within a kind, the area splits between the
measurement groups the kind applies to, in proportion to group weights.
A group cell either shows the group's worst fulfillment (summary) or is
subdivided equally into one cell per member object (detail).

Cell areas depend only on the report's structure and the weights, never on
the fulfillment values, so all nodes of one design history share the same
geometry and remain visually comparable.
"""

from __future__ import annotations

from dataclasses import dataclass

from .metrics import KINDS, WeightConfig

_EPS = 1e-9


@dataclass(frozen=True)
class Cell:
    kind: str
    group_id: str
    object_id: str | None  # None for summary cells
    x: float
    y: float
    w: float
    h: float
    area: float  # assigned area fraction of the unit square
    fulfillment: float

    @property
    def key(self) -> str:
        if self.object_id is None:
            return f"{self.kind}/{self.group_id}"
        return f"{self.kind}/{self.group_id}/{self.object_id}"

    def to_dict(self) -> dict:
        return {
            "key": self.key,
            "kind": self.kind,
            "group_id": self.group_id,
            "object_id": self.object_id,
            "x": self.x,
            "y": self.y,
            "w": self.w,
            "h": self.h,
            "area": self.area,
            "fulfillment": self.fulfillment,
        }


@dataclass(frozen=True)
class TreemapLayout:
    cells: tuple[Cell, ...]
    aspect: float

    def cell(self, key: str) -> Cell:
        for c in self.cells:
            if c.key == key:
                return c
        raise ValueError(f"no cell {key!r}")

    def to_dict(self) -> dict:
        return {"aspect": self.aspect, "cells": [c.to_dict() for c in self.cells]}


# ---------------------------------------------------------------------------
# Squarified subdivision
# ---------------------------------------------------------------------------


def _worst_aspect(row_areas: list[float], side: float) -> float:
    s = sum(row_areas)
    worst = 0.0
    for a in row_areas:
        worst = max(worst, max(side * side * a / (s * s), s * s / (side * side * a)))
    return worst


def squarify(items: list[tuple[object, float]], x: float, y: float, w: float, h: float) -> dict:
    """Squarified treemap of (key, area) items inside a rectangle.

    Areas must sum to w * h (within float noise). Items should arrive
    sorted by descending area; the classic greedy row building then keeps
    cell aspect ratios near 1. Returns {key: (x, y, w, h)}. The last cell
    of every strip is snapped to the strip edge so the result tiles the
    rectangle without hairline gaps.
    """
    out: dict = {}
    items = [(k, a) for k, a in items if a > 0.0]
    if not items:
        return out

    def place(row: list[tuple[object, float]], x: float, y: float, w: float, h: float):
        s = sum(a for _, a in row)
        if w >= h:  # lay a vertical strip on the left
            strip = s / h if h > 0 else 0.0
            cy = y
            for i, (key, a) in enumerate(row):
                ch = a / strip if strip > 0 else 0.0
                if i == len(row) - 1:
                    ch = y + h - cy
                out[key] = (x, cy, strip, ch)
                cy += a / strip if strip > 0 else 0.0
            return x + strip, y, w - strip, h
        strip = s / w if w > 0 else 0.0
        cx = x
        for i, (key, a) in enumerate(row):
            cw = a / strip if strip > 0 else 0.0
            if i == len(row) - 1:
                cw = x + w - cx
            out[key] = (cx, y, cw, strip)
            cx += a / strip if strip > 0 else 0.0
        return x, y + strip, w, h - strip

    row: list[tuple[object, float]] = []
    rest = list(items)
    while rest:
        side = min(w, h)
        head = rest[0]
        if not row or _worst_aspect([a for _, a in row + [head]], side) <= _worst_aspect(
            [a for _, a in row], side
        ):
            row.append(head)
            rest.pop(0)
        else:
            x, y, w, h = place(row, x, y, w, h)
            row = []
    if row:
        # the remaining areas sum to w * h, so the last strip fills the rect
        place(row, x, y, w, h)
    return out


# ---------------------------------------------------------------------------
# Report -> layout
# ---------------------------------------------------------------------------


def _structure(entries):
    """(kind -> group -> sorted object ids) for all measured entries."""
    kinds: dict[str, dict[str, list[str]]] = {}
    for e in entries:
        kinds.setdefault(e.kind, {}).setdefault(e.group_id, [])
        if e.object_id not in kinds[e.kind][e.group_id]:
            kinds[e.kind][e.group_id].append(e.object_id)
    for groups in kinds.values():
        for members in groups.values():
            members.sort()
    return kinds


def cell_values(entries, detail_groups=frozenset()) -> dict[tuple, float]:
    """Fulfillment per cell key (kind, group, object or None).

    Summary cells carry the group's worst member fulfillment, detail
    cells the member's own.
    """
    out: dict[tuple, float] = {}
    for e in entries:
        if e.group_id in detail_groups:
            out[(e.kind, e.group_id, e.object_id)] = e.fulfillment
        else:
            key = (e.kind, e.group_id, None)
            out[key] = min(out.get(key, 1.0), e.fulfillment)
    return out


def layout_treemap(
    entries,
    weights: WeightConfig,
    detail_groups=frozenset(),
    aspect: float = 1.6,
) -> TreemapLayout:
    """Lay out one report as a treemap in the unit square.

    Kinds with zero weight produce no cells; groups with zero weight
    produce none within their kinds. ``detail_groups`` selects which
    groups are expanded into per-object cells. ``aspect`` is the width to
    height ratio of the node the layout will be drawn in; the returned
    coordinates are still normalized to the unit square.
    """
    weights.validated()
    structure = _structure(entries)
    values = cell_values(entries, detail_groups)

    kind_areas: list[tuple[str, float]] = []
    total_w = 0.0
    for kind in KINDS:  # canonical order keeps ties deterministic
        if kind not in structure:
            continue
        w = weights.constraint(kind)
        if w <= 0:
            continue
        group_ws = [weights.group(g) for g in structure[kind]]
        if sum(group_ws) <= 0:
            continue
        kind_areas.append((kind, w))
        total_w += w
    if total_w <= 0:
        raise ValueError("no positively weighted constraint kind in the report")
    kind_areas = [(k, w / total_w) for k, w in kind_areas]

    # The subdivision works in an aspect x 1 rectangle so the squarified
    # choices match how the node is actually drawn; areas are scaled by
    # aspect on the way in and x/w divided by aspect on the way out. The
    # ``area`` each cell reports is its exact assigned unit-square
    # fraction, computed from the weights, not from rectangle products.
    kind_rects = squarify(
        sorted([(k, a * aspect) for k, a in kind_areas], key=lambda t: -t[1]),
        0.0,
        0.0,
        aspect,
        1.0,
    )

    cells: list[Cell] = []
    for kind, kind_area in kind_areas:
        kx, ky, kw, kh = kind_rects[kind]
        groups = structure[kind]
        gw_total = sum(weights.group(g) for g in groups if weights.group(g) > 0)
        group_areas = [
            (g, kind_area * (weights.group(g) / gw_total))
            for g in sorted(groups)
            if weights.group(g) > 0
        ]
        group_rects = squarify(
            sorted([(g, a * aspect) for g, a in group_areas], key=lambda t: -t[1]),
            kx,
            ky,
            kw,
            kh,
        )
        for g, g_area in group_areas:
            gx, gy, gw, gh = group_rects[g]
            if g in detail_groups:
                members = groups[g]
                per = g_area / len(members)
                member_rects = squarify(
                    [(m, per * aspect) for m in members], gx, gy, gw, gh
                )
                for m in members:
                    mx, my, mw, mh = member_rects[m]
                    cells.append(
                        Cell(
                            kind=kind,
                            group_id=g,
                            object_id=m,
                            x=mx / aspect,
                            y=my,
                            w=mw / aspect,
                            h=mh,
                            area=per,
                            fulfillment=values[(kind, g, m)],
                        )
                    )
            else:
                cells.append(
                    Cell(
                        kind=kind,
                        group_id=g,
                        object_id=None,
                        x=gx / aspect,
                        y=gy,
                        w=gw / aspect,
                        h=gh,
                        area=g_area,
                        fulfillment=values[(kind, g, None)],
                    )
                )
    return TreemapLayout(cells=tuple(cells), aspect=aspect)


# ---------------------------------------------------------------------------
# Grayscale comparison
# ---------------------------------------------------------------------------


def diff_lightness(delta: float) -> float:
    """Map a fulfillment delta in [-1, 1] to a lightness in [0, 1].

    The reference state sits at medium gray (0.5); cells that do better
    than the reference are lighter, worse ones darker.
    """
    return min(1.0, max(0.0, 0.5 + 0.5 * delta))


def diff_encoding(
    reports: dict[str, object],
    reference_id: str,
    mode: str = "global",
    other_id: str | None = None,
    detail_groups=frozenset(),
) -> dict:
    """Per-node, per-cell comparison against a reference state.

    ``reports`` maps node id to FulfillmentReport. ``mode`` is "global"
    (encode every node against the reference) or "local" (only
    ``other_id``). Cells measured in only one of the two reports are
    skipped. The reference node compares to itself at exactly 0.5.
    """
    if reference_id not in reports:
        raise ValueError(f"unknown reference node {reference_id!r}")
    if mode not in ("global", "local"):
        raise ValueError(f"unknown comparison mode {mode!r}")
    if mode == "local":
        if other_id is None:
            raise ValueError("local comparison needs the hovered node id")
        if other_id not in reports:
            raise ValueError(f"unknown node {other_id!r}")
        node_ids = [other_id]
    else:
        node_ids = list(reports)

    ref_values = cell_values(reports[reference_id].entries, detail_groups)
    out: dict = {}
    for node_id in node_ids:
        node_values = cell_values(reports[node_id].entries, detail_groups)
        cells = {}
        for key, f in node_values.items():
            if key not in ref_values:
                continue
            delta = f - ref_values[key]
            kind, group, obj = key
            name = f"{kind}/{group}" if obj is None else f"{kind}/{group}/{obj}"
            cells[name] = {"delta": delta, "lightness": diff_lightness(delta)}
        out[node_id] = cells
    return out
