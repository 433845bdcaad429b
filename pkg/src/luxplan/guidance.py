"""Suggestion engine: rank action types, draw concrete candidates, keep the best.

The pipeline has three stages. A weighted-sum ranking over a fixed
expert-judgment table picks the two action types most likely to improve the
currently weighted constraints. Each picked type is instantiated into up to
five concrete, geometrically valid actions with randomized parameters. All
candidates (at most ten) are simulated and scored, and the three best by
progress score become suggestions.

Everything is deterministic for a given seed: candidate RNG streams are
spawned per action rank, so neither thread scheduling nor action order can
change the draws.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .metrics import KINDS, FulfillmentReport, WeightConfig, evaluate
from .scene import Edit, Scene, apply_edit
from .simulation import LightMap, SimSettings, SimulationCancelled, simulate

MANUAL_LABEL = "M"

_RETRY_CAP = 20
_DRAWS_PER_ACTION = 5
_CANDIDATE_CAP = 10
_SUGGESTION_COUNT = 3

# Guidance never lowers a pendant into the working plane, whatever the
# model's own legal range allows.
WORKING_PLANE_GUARD = 1.2


# ---------------------------------------------------------------------------
# Action ranking
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ActionProfile:
    id: str
    label: str
    name: str
    impact: dict  # kind -> expected improvement potential, 1..10


@dataclass(frozen=True)
class PerformanceTable:
    version: int
    actions: tuple[ActionProfile, ...]


def load_performance_table() -> PerformanceTable:
    """Load the packaged action/constraint impact table."""
    raw = json.loads(
        resources.files("luxplan").joinpath("data/performance_table.json").read_text()
    )
    kinds = tuple(raw["kinds"])
    if kinds != KINDS:
        raise ValueError("performance table kinds out of sync with metrics")
    actions = tuple(
        ActionProfile(
            id=a["id"],
            label=a["label"],
            name=a["name"],
            impact=dict(zip(kinds, (float(v) for v in a["impact"]))),
        )
        for a in raw["actions"]
    )
    return PerformanceTable(version=int(raw["version"]), actions=actions)


def derive_seed(seed: int, index: int) -> int:
    """A per-batch seed that is stable across runs but distinct per index."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(index,))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def wsm_rank(table: PerformanceTable, weights: WeightConfig) -> list[tuple[str, float]]:
    """Rank action types by weighted-sum score, descending.

    Ties keep the table's row order, so the ranking is total and stable.
    """
    weights.validated()
    scored = []
    for row, action in enumerate(table.actions):
        score = sum(weights.constraint(kind) * action.impact[kind] for kind in KINDS)
        scored.append((score, row, action.id))
    scored.sort(key=lambda t: (-t[0], t[1]))
    return [(action_id, score) for score, _, action_id in scored]


# ---------------------------------------------------------------------------
# Candidate parameterization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CandidateAction:
    """A concrete, already validated action ready to preview."""

    action_id: str
    label: str
    description: str
    edit: Edit
    scene: Scene  # result of applying the edit


def _most_common(values: list[str]) -> str:
    counts: dict[str, int] = {}
    for v in values:
        counts[v] = counts.get(v, 0) + 1
    return max(sorted(counts), key=lambda v: counts[v])


def _next_light_ids(scene: Scene, n: int) -> list[str]:
    existing = {l.id for l in scene.luminaires}
    out = []
    i = 1
    while len(out) < n:
        candidate = f"L{i}"
        if candidate not in existing:
            out.append(candidate)
        i += 1
    return out


def _pendant_ids(scene: Scene) -> list[str]:
    return [l.id for l in scene.luminaires if scene.model_of(l).mount == "pendant"]


def parameterize(
    action_id: str, scene: Scene, rng: np.random.Generator, count: int = _DRAWS_PER_ACTION
) -> list[CandidateAction]:
    """Draw up to ``count`` concrete actions of one type.

    Geometrically invalid draws are rejected and redrawn up to a retry cap;
    an action type that does not apply to the scene at all (no lights to
    remove, no alternative collection, ...) returns an empty list.
    """
    builders = {
        "add_light": _draw_add,
        "remove_light": _draw_remove,
        "dim_lights": _draw_dim,
        "increase_height": _draw_raise,
        "decrease_height": _draw_lower,
        "change_collection": _draw_collection,
        "change_version": _draw_version,
    }
    if action_id not in builders:
        raise ValueError(f"unknown action {action_id!r}")
    return builders[action_id](scene, rng, count)


def _try(scene: Scene, edit: Edit) -> Scene | None:
    try:
        return apply_edit(scene, edit)
    except ValueError:
        return None


def _draw_add(scene: Scene, rng: np.random.Generator, count: int) -> list[CandidateAction]:
    if not scene.luminaires:
        return []
    model_id = _most_common([l.model_id for l in scene.luminaires])
    new_ids = _next_light_ids(scene, count)
    out: list[CandidateAction] = []
    for slot in range(count):
        for _ in range(_RETRY_CAP):
            base = scene.luminaires[int(rng.integers(len(scene.luminaires)))]
            r = 1.0 * np.sqrt(rng.uniform())
            phi = rng.uniform(0.0, 2.0 * np.pi)
            pos = (
                base.position[0] + r * float(np.cos(phi)),
                base.position[1] + r * float(np.sin(phi)),
                base.position[2],
            )
            edit = Edit(
                kind="add_light",
                params={"id": new_ids[slot], "model": model_id, "position": list(pos)},
            )
            result = _try(scene, edit)
            if result is not None:
                out.append(
                    CandidateAction(
                        action_id="add_light",
                        label="A",
                        description=f"Add {model_id} near {base.id}",
                        edit=edit,
                        scene=result,
                    )
                )
                break
    return out


def _draw_remove(scene: Scene, rng: np.random.Generator, count: int) -> list[CandidateAction]:
    ids = [l.id for l in scene.luminaires]
    if not ids:
        return []
    order = rng.permutation(len(ids))
    out = []
    for idx in order[:count]:
        light_id = ids[int(idx)]
        edit = Edit(kind="remove_light", params={"light_id": light_id})
        result = _try(scene, edit)
        if result is not None:
            out.append(
                CandidateAction(
                    action_id="remove_light",
                    label="R",
                    description=f"Remove {light_id}",
                    edit=edit,
                    scene=result,
                )
            )
    return out


def _draw_dim(scene: Scene, rng: np.random.Generator, count: int) -> list[CandidateAction]:
    if not any(l.dim > 0 for l in scene.luminaires):
        return []
    out = []
    for _ in range(count):
        factor = float(rng.uniform(0.5, 0.95))
        edit = Edit(kind="scale_dim", params={"factor": factor})
        result = _try(scene, edit)
        if result is not None:
            out.append(
                CandidateAction(
                    action_id="dim_lights",
                    label="d",
                    description=f"Dim all lights to {factor:.0%}",
                    edit=edit,
                    scene=result,
                )
            )
    return out


def _draw_shift(
    scene: Scene, rng: np.random.Generator, count: int, sign: float, action_id: str
) -> list[CandidateAction]:
    pendants = _pendant_ids(scene)
    if not pendants:
        return []
    out: list[CandidateAction] = []
    for _ in range(count):
        for _ in range(_RETRY_CAP):
            dz = sign * float(rng.uniform(0.1, 0.6))
            light_id = None
            if rng.uniform() < 0.5:
                light_id = pendants[int(rng.integers(len(pendants)))]
            edit = Edit(kind="shift_height", params={"dz": dz, "light_id": light_id})
            result = _try(scene, edit)
            if result is None:
                continue
            affected = [light_id] if light_id else pendants
            if sign < 0 and any(
                result.luminaire(i).position[2] < WORKING_PLANE_GUARD for i in affected
            ):
                continue
            verb = "Raise" if sign > 0 else "Lower"
            what = light_id if light_id else "all pendants"
            out.append(
                CandidateAction(
                    action_id=action_id,
                    label="H",
                    description=f"{verb} {what} by {abs(dz):.2f} m",
                    edit=edit,
                    scene=result,
                )
            )
            break
    return out


def _draw_raise(scene, rng, count):
    return _draw_shift(scene, rng, count, +1.0, "increase_height")


def _draw_lower(scene, rng, count):
    return _draw_shift(scene, rng, count, -1.0, "decrease_height")


def _draw_collection(scene: Scene, rng: np.random.Generator, count: int) -> list[CandidateAction]:
    if not scene.luminaires:
        return []
    in_use = {scene.model_of(l).collection for l in scene.luminaires}
    options = [c for c in scene.catalog.collections() if not (len(in_use) == 1 and c in in_use)]
    if not options:
        return []
    order = rng.permutation(len(options))
    out = []
    for idx in order[:count]:
        collection = options[int(idx)]
        edit = Edit(kind="change_collection", params={"collection": collection})
        result = _try(scene, edit)
        if result is not None:
            out.append(
                CandidateAction(
                    action_id="change_collection",
                    label="C",
                    description=f"Switch all lights to collection {collection}",
                    edit=edit,
                    scene=result,
                )
            )
    return out


def _draw_version(scene: Scene, rng: np.random.Generator, count: int) -> list[CandidateAction]:
    if not scene.luminaires:
        return []
    collection = _most_common([scene.model_of(l).collection for l in scene.luminaires])
    current = {scene.model_of(l).version for l in scene.luminaires}
    options = [v for v in scene.catalog.versions(collection) if not (len(current) == 1 and v in current)]
    if not options:
        return []
    order = rng.permutation(len(options))
    out = []
    for idx in order[:count]:
        version = options[int(idx)]
        edit = Edit(kind="change_version", params={"version": version})
        result = _try(scene, edit)
        if result is not None:
            out.append(
                CandidateAction(
                    action_id="change_version",
                    label="C",
                    description=f"Switch all lights to version {version}",
                    edit=edit,
                    scene=result,
                )
            )
    return out


# ---------------------------------------------------------------------------
# Suggestion generation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Suggestion:
    """One previewed candidate: the action, its scene and its evaluation."""

    action_id: str
    label: str
    description: str
    edit: Edit
    scene: Scene
    light_map: LightMap
    report: FulfillmentReport
    score: float


def generate_suggestions(
    scene: Scene,
    weights: WeightConfig,
    settings: SimSettings,
    seed: int,
    table: PerformanceTable | None = None,
    cancel=None,
    workers: int = 2,
) -> list[Suggestion]:
    """Produce up to three scored suggestions for the given state.

    Candidates of the two top-ranked action types are simulated
    concurrently; ``cancel`` (a threading.Event) aborts the whole batch as
    a unit via SimulationCancelled. Suggestions are generated even when
    every constraint is already met - a better score may still exist.
    """
    if table is None:
        table = load_performance_table()
    ranked = wsm_rank(table, weights)
    candidates: list[CandidateAction] = []
    for rank_index, (action_id, _) in enumerate(ranked[:2]):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(rank_index,)))
        candidates.extend(parameterize(action_id, scene, rng))
    candidates = candidates[:_CANDIDATE_CAP]
    if not candidates:
        return []

    def run(candidate: CandidateAction) -> Suggestion:
        if cancel is not None and cancel.is_set():
            raise SimulationCancelled()
        light_map = simulate(candidate.scene, settings, cancel=cancel)
        report = evaluate(candidate.scene, light_map, weights)
        return Suggestion(
            action_id=candidate.action_id,
            label=candidate.label,
            description=candidate.description,
            edit=candidate.edit,
            scene=candidate.scene,
            light_map=light_map,
            report=report,
            score=report.score,
        )

    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(run, candidates))
    order = sorted(range(len(results)), key=lambda i: (-results[i].score, i))
    return [results[i] for i in order[:_SUGGESTION_COUNT]]
