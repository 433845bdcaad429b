"""Lighting quality metrics, constraint fulfillment and the progress score.

Six constraint kinds are tracked, in the canonical order used throughout
the package (ranking table columns, report ordering, treemap cells):

    color_temperature  scene-wide band, Kelvin
    cri                scene-wide minimum color rendering index
    ugr                per glare probe, unified glare rating (at most)
    average_lux        per measuring surface, mean illuminance (at least)
    uniformity_min_avg per measuring surface, E_min / E_avg (at least)
    uniformity_min_max per measuring surface, E_min / E_max (at least)

Every measured constraint maps to a fulfillment value in [0, 1], and the
fulfillments aggregate over measurement groups and constraint kinds into a
single progress score, also in [0, 1], that weights reflect the designer's
current focus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .scene import RESERVED_GROUP_ID, RESERVED_OBJECT_ID, Scene
from .simulation import GlareScan, LightMap, probe_scan

KINDS = (
    "color_temperature",
    "cri",
    "ugr",
    "average_lux",
    "uniformity_min_avg",
    "uniformity_min_max",
)

# ugr is satisfied below its target, color_temperature inside a band, the
# rest at or above their targets.
KIND_AT_MOST = ("ugr",)
KIND_BAND = ("color_temperature",)


# ---------------------------------------------------------------------------
# Raw measurements
# ---------------------------------------------------------------------------


def measure_surface(light_map: LightMap, rect) -> dict:
    """Illuminance statistics over one measuring surface.

    Averages are area-weighted so surfaces that span patches of different
    sizes are handled correctly. Uniformities of an unlit surface are 0.
    """
    values, areas = light_map.samples_in(rect)
    avg = float(np.average(values, weights=areas))
    lo = float(values.min())
    hi = float(values.max())
    return {
        "average": avg,
        "minimum": lo,
        "maximum": hi,
        "uniformity_min_avg": lo / avg if avg > 0 else 0.0,
        "uniformity_min_max": lo / hi if hi > 0 else 0.0,
    }


def measure_ugr(scan: GlareScan) -> float:
    """Unified glare rating for one probe scan.

    UGR = 8 * log10(0.25 / L_b * sum(L^2 * omega / p^2)). The background
    luminance is floored at 1 cd/m^2 so a dark adapted scene cannot blow
    up the rating. An empty scan (no source in the field of view) returns
    the 0 sentinel: no sources, no glare.
    """
    if not scan.sources:
        return 0.0
    l_b = max(scan.background_luminance, 1.0)
    total = sum(s.luminance**2 * s.solid_angle / s.position_index**2 for s in scan.sources)
    if total <= 0.0:
        return 0.0
    return 8.0 * math.log10(0.25 / l_b * total)


def measure_global(scene: Scene) -> tuple[float | None, float | None]:
    """Scene-wide color temperature and CRI.

    Color temperature is the flux-and-dim weighted mean over emitting
    luminaires; CRI is the minimum over them. Both are None when nothing
    emits.
    """
    weights = []
    temps = []
    cris = []
    for lum in scene.luminaires:
        if lum.dim <= 0.0:
            continue
        model = scene.model_of(lum)
        weights.append(model.flux * lum.dim)
        temps.append(model.color_temperature)
        cris.append(model.cri)
    total = sum(weights)
    if total <= 0.0:
        return None, None
    k = sum(w * t for w, t in zip(weights, temps)) / total
    return k, min(cris)


# ---------------------------------------------------------------------------
# Fulfillment
# ---------------------------------------------------------------------------


def fulfillment(kind: str, measured: float | None, target) -> float:
    """Map a measured value against its target to [0, 1].

    At-least kinds score measured/target, at-most kinds (ugr) score
    target/measured once the target is exceeded, and the band kind
    (color_temperature) falls off linearly with the distance outside the
    band, reaching 0 one full band-width away. Unmeasurable values (None)
    score 0.
    """
    if measured is None:
        return 0.0
    if kind in KIND_BAND:
        lo, hi = target
        if lo <= measured <= hi:
            return 1.0
        dist = (lo - measured) if measured < lo else (measured - hi)
        return 1.0 - min(1.0, dist / (hi - lo))
    if kind in KIND_AT_MOST:
        if measured <= target:
            return 1.0
        return min(1.0, target / measured) if measured > 0 else 1.0
    if target <= 0:
        raise ValueError(f"{kind}: target must be positive")
    return min(1.0, measured / target)


# ---------------------------------------------------------------------------
# Report
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Entry:
    """One measured constraint on one measurement object."""

    object_id: str
    group_id: str
    kind: str
    measured: float | None
    target: object  # float, or (lo, hi) for band kinds
    fulfillment: float

    def to_dict(self) -> dict:
        target = list(self.target) if isinstance(self.target, tuple) else self.target
        return {
            "object_id": self.object_id,
            "group_id": self.group_id,
            "kind": self.kind,
            "measured": self.measured,
            "target": target,
            "fulfillment": self.fulfillment,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Entry":
        target = d["target"]
        if isinstance(target, list):
            target = tuple(target)
        return cls(
            object_id=d["object_id"],
            group_id=d["group_id"],
            kind=d["kind"],
            measured=d["measured"],
            target=target,
            fulfillment=d["fulfillment"],
        )


@dataclass(frozen=True)
class WeightConfig:
    """Designer focus: one weight per constraint kind and per group.

    Missing kinds and groups default to 1. All-zero configurations are
    rejected because the score would be undefined.
    """

    constraints: dict = field(default_factory=dict)
    groups: dict = field(default_factory=dict)

    def constraint(self, kind: str) -> float:
        return float(self.constraints.get(kind, 1.0))

    def group(self, group_id: str) -> float:
        return float(self.groups.get(group_id, 1.0))

    def validated(self) -> "WeightConfig":
        for name, value in list(self.constraints.items()) + list(self.groups.items()):
            if value < 0:
                raise ValueError(f"weight {name!r} must be non-negative")
        unknown = set(self.constraints) - set(KINDS)
        if unknown:
            raise ValueError(f"unknown constraint kinds: {sorted(unknown)}")
        # Unlisted kinds default to 1, so only a config that explicitly
        # zeroes every kind leaves the score undefined.
        if all(self.constraint(k) == 0 for k in KINDS):
            raise ValueError("all constraint weights are zero")
        return self

    def to_dict(self) -> dict:
        return {"constraints": dict(self.constraints), "groups": dict(self.groups)}

    @classmethod
    def from_dict(cls, d: dict) -> "WeightConfig":
        return cls(
            constraints={k: float(v) for k, v in d.get("constraints", {}).items()},
            groups={k: float(v) for k, v in d.get("groups", {}).items()},
        ).validated()


@dataclass(frozen=True)
class FulfillmentReport:
    """All measured constraints of one design state, plus its score.

    The score is stored as computed with the weights in effect when the
    report was generated; re-weighting later recomputes scores from the
    entries without touching stored reports.
    """

    entries: tuple[Entry, ...]
    score: float

    def entry(self, object_id: str, kind: str) -> Entry:
        for e in self.entries:
            if e.object_id == object_id and e.kind == kind:
                return e
        raise ValueError(f"no entry for {object_id!r}/{kind}")

    def all_met(self) -> bool:
        return all(e.fulfillment >= 1.0 for e in self.entries)

    def to_dict(self) -> dict:
        return {"entries": [e.to_dict() for e in self.entries], "score": self.score}

    @classmethod
    def from_dict(cls, d: dict) -> "FulfillmentReport":
        return cls(
            entries=tuple(Entry.from_dict(e) for e in d["entries"]),
            score=d["score"],
        )


def evaluate(scene: Scene, light_map: LightMap, weights: WeightConfig) -> FulfillmentReport:
    """Measure every constraint with a target and assemble the report.

    Scene-wide color temperature and CRI attach to the synthetic object
    ``scene`` in the synthetic group ``global`` so they take part in the
    same aggregation as per-surface and per-probe constraints.
    """
    entries: list[Entry] = []
    gt = scene.room.global_targets
    if gt.color_temperature is not None or gt.cri is not None:
        k, cri = measure_global(scene)
        if gt.color_temperature is not None:
            entries.append(
                Entry(
                    object_id=RESERVED_OBJECT_ID,
                    group_id=RESERVED_GROUP_ID,
                    kind="color_temperature",
                    measured=k,
                    target=gt.color_temperature,
                    fulfillment=fulfillment("color_temperature", k, gt.color_temperature),
                )
            )
        if gt.cri is not None:
            entries.append(
                Entry(
                    object_id=RESERVED_OBJECT_ID,
                    group_id=RESERVED_GROUP_ID,
                    kind="cri",
                    measured=cri,
                    target=gt.cri,
                    fulfillment=fulfillment("cri", cri, gt.cri),
                )
            )
    for probe in scene.glare_probes:
        if probe.target_ugr is None:
            continue
        scan = probe_scan(scene, light_map, probe)
        value = measure_ugr(scan)
        entries.append(
            Entry(
                object_id=probe.id,
                group_id=scene.group_of(probe.id).id,
                kind="ugr",
                measured=value,
                target=probe.target_ugr,
                fulfillment=fulfillment("ugr", value, probe.target_ugr),
            )
        )
    for ms in scene.measuring_surfaces:
        t = ms.targets
        if t.average_lux is None and t.uniformity_min_avg is None and t.uniformity_min_max is None:
            continue
        stats = measure_surface(light_map, ms.rect)
        group = scene.group_of(ms.id).id
        for kind, target, measured in (
            ("average_lux", t.average_lux, stats["average"]),
            ("uniformity_min_avg", t.uniformity_min_avg, stats["uniformity_min_avg"]),
            ("uniformity_min_max", t.uniformity_min_max, stats["uniformity_min_max"]),
        ):
            if target is None:
                continue
            entries.append(
                Entry(
                    object_id=ms.id,
                    group_id=group,
                    kind=kind,
                    measured=measured,
                    target=target,
                    fulfillment=fulfillment(kind, measured, target),
                )
            )
    ordered = tuple(sorted(entries, key=lambda e: (KINDS.index(e.kind), e.group_id, e.object_id)))
    return FulfillmentReport(entries=ordered, score=progress_score(ordered, weights))


# ---------------------------------------------------------------------------
# Progress score
# ---------------------------------------------------------------------------


def group_fulfillments(entries) -> dict[tuple[str, str], float]:
    """Unweighted mean fulfillment per (group, kind) over member objects."""
    sums: dict[tuple[str, str], list[float]] = {}
    for e in entries:
        sums.setdefault((e.group_id, e.kind), []).append(e.fulfillment)
    return {key: sum(v) / len(v) for key, v in sums.items()}


def kind_fulfillments(entries, weights: WeightConfig) -> dict[str, float]:
    """Group-weighted mean fulfillment per kind.

    Groups with zero weight drop out; a kind measured only in zero-weight
    groups has no defined value and is omitted.
    """
    per_group = group_fulfillments(entries)
    out: dict[str, float] = {}
    for kind in KINDS:
        num = 0.0
        den = 0.0
        for (group_id, k), f in per_group.items():
            if k != kind:
                continue
            w = weights.group(group_id)
            num += w * f
            den += w
        if den > 0:
            out[kind] = num / den
    return out


def progress_score(entries, weights: WeightConfig) -> float:
    """Single score in [0, 1]: constraint-weighted mean of per-kind fulfillment.

    Kinds with zero weight, and kinds without any weighted measurement,
    are excluded from the denominator. The score is 1 exactly when every
    fulfillment on a positively weighted path is 1, and it is invariant
    under rescaling all weights by a common factor.
    """
    weights.validated()
    per_kind = kind_fulfillments(entries, weights)
    num = 0.0
    den = 0.0
    for kind, f in per_kind.items():
        w = weights.constraint(kind)
        num += w * f
        den += w
    if den <= 0:
        return 0.0
    return num / den
