"""Scene model: room, surfaces, luminaires, measurement setup, catalog.

A scene is an immutable snapshot. Edits never mutate in place; they produce
a new validated snapshot, which is what makes design-history branching and
candidate generation safe to run concurrently.

The on-disk format is a JSON document with the sections ``room``,
``surfaces``, ``luminaires``, ``measuring_surfaces``, ``glare_probes``,
``groups`` and ``catalog_ref``, in that canonical order. ``save`` always
writes the canonical form, so write(read(doc)) is byte-identical for
canonical documents.
"""

from __future__ import annotations

import json
import math
import uuid
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .geometry import AXIS_INDEX, AXIS_NAME, Rect3

VALID_SURFACE_KINDS = ("floor", "ceiling", "wall", "slab")
VALID_MOUNTS = ("pendant", "surface")

# Reserved identifiers used by the reporting layer for scene-wide measures.
RESERVED_GROUP_ID = "global"
RESERVED_OBJECT_ID = "scene"

_EPS = 1e-9


# ---------------------------------------------------------------------------
# Luminaire catalog
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Distribution:
    """Luminous intensity distribution of a luminaire model.

    Three shapes are supported:

    * ``isotropic`` - equal intensity in all directions.
    * ``cosine`` - a cosine-power lobe around the aim direction, the usual
      idealization of a downlight. ``exponent`` 1 is Lambertian.
    * ``tabulated`` - a polar curve sampled at ``angles_deg`` from the aim
      axis, in candela per 1000 lm.
    """

    type: str
    exponent: float = 1.0
    angles_deg: tuple[float, ...] = ()
    cd_per_klm: tuple[float, ...] = ()

    def intensity_cd(self, theta: np.ndarray, flux_lm: float) -> np.ndarray:
        """Intensity (cd) toward directions at angle ``theta`` (rad) off aim."""
        theta = np.asarray(theta, dtype=float)
        if self.type == "isotropic":
            return np.full_like(theta, flux_lm / (4.0 * math.pi))
        if self.type == "cosine":
            n = self.exponent
            peak = flux_lm * (n + 1.0) / (2.0 * math.pi)
            c = np.cos(theta)
            return np.where(c > 0.0, peak * np.power(np.clip(c, 0.0, None), n), 0.0)
        if self.type == "tabulated":
            deg = np.degrees(theta)
            return np.interp(deg, self.angles_deg, self.cd_per_klm) * (flux_lm / 1000.0)
        raise ValueError(f"unknown distribution type {self.type!r}")

    def emitted_flux(self, flux_lm: float) -> float:
        """Total emitted flux (lm), integrating the intensity over the sphere.

        Exact for the analytic shapes; numeric quadrature for tabulated
        curves, which therefore emit exactly what the curve integrates to
        rather than the nominal rating.
        """
        if self.type in ("isotropic", "cosine"):
            return flux_lm
        theta = np.linspace(0.0, math.pi, 1441)
        intensity = self.intensity_cd(theta, flux_lm)
        return float(np.trapezoid(intensity * np.sin(theta), theta) * 2.0 * math.pi)

    def to_dict(self) -> dict:
        if self.type == "isotropic":
            return {"type": "isotropic"}
        if self.type == "cosine":
            return {"type": "cosine", "exponent": self.exponent}
        return {
            "type": "tabulated",
            "angles_deg": list(self.angles_deg),
            "cd_per_klm": list(self.cd_per_klm),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Distribution":
        t = d.get("type")
        if t == "isotropic":
            return cls(type="isotropic")
        if t == "cosine":
            return cls(type="cosine", exponent=float(d.get("exponent", 1.0)))
        if t == "tabulated":
            angles = tuple(float(a) for a in d["angles_deg"])
            values = tuple(float(v) for v in d["cd_per_klm"])
            if len(angles) != len(values) or len(angles) < 2:
                raise ValueError("tabulated distribution needs matching angle/value arrays")
            if any(b <= a for a, b in zip(angles, angles[1:])):
                raise ValueError("tabulated angles must be strictly increasing")
            return cls(type="tabulated", angles_deg=angles, cd_per_klm=values)
        raise ValueError(f"unknown distribution type {t!r}")


@dataclass(frozen=True)
class LuminaireModel:
    """A catalog entry: one version of one collection."""

    id: str
    collection: str
    version: str
    flux: float  # rated luminous flux, lm
    color_temperature: float  # K
    cri: float
    distribution: Distribution
    mount: str  # pendant | surface
    luminous_area: float = 0.05  # m^2, used for glare luminance
    height_range: tuple[float, float] | None = None  # pendants: legal z range

    def to_dict(self) -> dict:
        d = {
            "id": self.id,
            "collection": self.collection,
            "version": self.version,
            "flux": self.flux,
            "color_temperature": self.color_temperature,
            "cri": self.cri,
            "distribution": self.distribution.to_dict(),
            "mount": self.mount,
            "luminous_area": self.luminous_area,
        }
        if self.height_range is not None:
            d["height_range"] = list(self.height_range)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "LuminaireModel":
        hr = d.get("height_range")
        return cls(
            id=str(d["id"]),
            collection=str(d["collection"]),
            version=str(d["version"]),
            flux=float(d["flux"]),
            color_temperature=float(d["color_temperature"]),
            cri=float(d["cri"]),
            distribution=Distribution.from_dict(d["distribution"]),
            mount=str(d["mount"]),
            luminous_area=float(d.get("luminous_area", 0.05)),
            height_range=(float(hr[0]), float(hr[1])) if hr is not None else None,
        )


@dataclass(frozen=True)
class Catalog:
    """All luminaire models available to a scene, keyed by id."""

    models: tuple[LuminaireModel, ...]

    def __post_init__(self):
        ids = [m.id for m in self.models]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate model id in catalog")
        pairs = [(m.collection, m.version) for m in self.models]
        if len(set(pairs)) != len(pairs):
            raise ValueError("duplicate collection/version pair in catalog")

    def get(self, model_id: str) -> LuminaireModel:
        for m in self.models:
            if m.id == model_id:
                return m
        raise ValueError(f"unknown model {model_id!r}")

    def lookup(self, collection: str, version: str) -> LuminaireModel:
        for m in self.models:
            if m.collection == collection and m.version == version:
                return m
        raise ValueError(f"no model for collection {collection!r} version {version!r}")

    def collections(self) -> list[str]:
        seen: list[str] = []
        for m in self.models:
            if m.collection not in seen:
                seen.append(m.collection)
        return seen

    def versions(self, collection: str) -> list[str]:
        return [m.version for m in self.models if m.collection == collection]

    def to_dict(self) -> dict:
        return {"models": [m.to_dict() for m in self.models]}

    @classmethod
    def from_dict(cls, d: dict) -> "Catalog":
        return cls(models=tuple(LuminaireModel.from_dict(m) for m in d.get("models", [])))


# ---------------------------------------------------------------------------
# Scene elements
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GlobalTargets:
    """Scene-wide targets: a color temperature band and a CRI minimum."""

    color_temperature: tuple[float, float] | None = None
    cri: float | None = None

    def to_dict(self) -> dict:
        d: dict = {}
        if self.color_temperature is not None:
            d["color_temperature"] = list(self.color_temperature)
        if self.cri is not None:
            d["cri"] = self.cri
        return d


@dataclass(frozen=True)
class Room:
    width: float  # x extent, m
    depth: float  # y extent, m
    height: float  # z extent, m
    patch_resolution: float = 0.1  # target patch edge, m
    global_targets: GlobalTargets = field(default_factory=GlobalTargets)

    def contains(self, p, tol: float = _EPS) -> bool:
        x, y, z = float(p[0]), float(p[1]), float(p[2])
        return (
            -tol <= x <= self.width + tol
            and -tol <= y <= self.depth + tol
            and -tol <= z <= self.height + tol
        )


@dataclass(frozen=True)
class Surface:
    """A physical, light-reflecting rectangle."""

    id: str
    kind: str
    rect: Rect3
    reflectance: float

    @property
    def area(self) -> float:
        return self.rect.area


@dataclass(frozen=True)
class LuminaireInstance:
    id: str
    model_id: str
    position: tuple[float, float, float]
    aim: tuple[float, float, float] = (0.0, 0.0, -1.0)
    dim: float = 1.0


@dataclass(frozen=True)
class SurfaceTargets:
    """Per-measuring-surface targets; any of them may be unset."""

    average_lux: float | None = None  # minimum average illuminance
    uniformity_min_avg: float | None = None  # minimum of E_min / E_avg
    uniformity_min_max: float | None = None  # minimum of E_min / E_max

    def to_dict(self) -> dict:
        d: dict = {}
        if self.average_lux is not None:
            d["average_lux"] = self.average_lux
        if self.uniformity_min_avg is not None:
            d["uniformity_min_avg"] = self.uniformity_min_avg
        if self.uniformity_min_max is not None:
            d["uniformity_min_max"] = self.uniformity_min_max
        return d


@dataclass(frozen=True)
class MeasuringSurface:
    """A rectangle that samples the light map; it does not block or reflect."""

    id: str
    rect: Rect3
    targets: SurfaceTargets = field(default_factory=SurfaceTargets)


@dataclass(frozen=True)
class GlareProbe:
    """An observer position and view direction scanned for glare sources."""

    id: str
    eye: tuple[float, float, float]
    view: tuple[float, float, float]
    fov_deg: float = 120.0  # full cone angle of the scan
    target_ugr: float | None = None


@dataclass(frozen=True)
class MeasurementGroup:
    id: str
    name: str
    members: tuple[str, ...]


# ---------------------------------------------------------------------------
# Scene
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Scene:
    room: Room
    surfaces: tuple[Surface, ...]
    luminaires: tuple[LuminaireInstance, ...]
    measuring_surfaces: tuple[MeasuringSurface, ...]
    glare_probes: tuple[GlareProbe, ...]
    groups: tuple[MeasurementGroup, ...]
    catalog: Catalog

    def model_of(self, instance: LuminaireInstance) -> LuminaireModel:
        return self.catalog.get(instance.model_id)

    def luminaire(self, light_id: str) -> LuminaireInstance:
        for lum in self.luminaires:
            if lum.id == light_id:
                return lum
        raise ValueError(f"unknown luminaire {light_id!r}")

    def group_of(self, object_id: str) -> MeasurementGroup:
        for g in self.groups:
            if object_id in g.members:
                return g
        raise ValueError(f"measurement object {object_id!r} is in no group")


def _unit(v) -> tuple[float, float, float]:
    arr = np.asarray(v, dtype=float)
    n = float(np.linalg.norm(arr))
    if n < _EPS:
        raise ValueError("direction vector must be non-zero")
    arr = arr / n
    return (float(arr[0]), float(arr[1]), float(arr[2]))


def validate(scene: Scene) -> Scene:
    """Check all scene invariants, returning the scene for chaining.

    Raises ValueError with a message naming the offending element.
    """
    room = scene.room
    if min(room.width, room.depth, room.height) <= 0:
        raise ValueError("room dimensions must be positive")
    if room.patch_resolution <= 0:
        raise ValueError("patch resolution must be positive")
    band = room.global_targets.color_temperature
    if band is not None and not band[0] < band[1]:
        raise ValueError("color temperature band must satisfy lo < hi")

    dims = (room.width, room.depth, room.height)

    def check_rect(rect: Rect3, owner: str):
        if rect.u_range[0] >= rect.u_range[1] or rect.v_range[0] >= rect.v_range[1]:
            raise ValueError(f"{owner}: degenerate rectangle extents")
        if not (-_EPS <= rect.offset <= dims[rect.axis] + _EPS):
            raise ValueError(f"{owner}: rectangle lies outside the room")
        axes = [a for a in range(3) if a != rect.axis]
        for a, rng in zip(axes, (rect.u_range, rect.v_range)):
            if rng[0] < -_EPS or rng[1] > dims[a] + _EPS:
                raise ValueError(f"{owner}: rectangle lies outside the room")
        if rect.normal_sign not in (-1, 1):
            raise ValueError(f"{owner}: normal sign must be +1 or -1")

    seen_ids: set[str] = set()
    for s in scene.surfaces:
        if s.id in seen_ids:
            raise ValueError(f"duplicate surface id {s.id!r}")
        seen_ids.add(s.id)
        if s.kind not in VALID_SURFACE_KINDS:
            raise ValueError(f"surface {s.id}: unknown kind {s.kind!r}")
        if not 0.0 <= s.reflectance <= 1.0:
            raise ValueError(f"surface {s.id}: reflectance {s.reflectance} out of range [0, 1]")
        check_rect(s.rect, f"surface {s.id}")

    lum_ids: set[str] = set()
    for lum in scene.luminaires:
        if lum.id in lum_ids:
            raise ValueError(f"duplicate luminaire id {lum.id!r}")
        lum_ids.add(lum.id)
        model = scene.catalog.get(lum.model_id)  # raises unknown-model
        if not 0.0 <= lum.dim <= 1.0:
            raise ValueError(f"luminaire {lum.id}: dim {lum.dim} out of range [0, 1]")
        if not room.contains(lum.position):
            raise ValueError(f"luminaire {lum.id}: position outside the room")
        if model.mount == "pendant":
            z = lum.position[2]
            if z >= room.height - _EPS:
                raise ValueError(f"luminaire {lum.id}: pendant must hang below the ceiling")
            if model.height_range is not None:
                lo, hi = model.height_range
                if not lo - _EPS <= z <= hi + _EPS:
                    raise ValueError(
                        f"luminaire {lum.id}: height {z:.3f} outside legal range [{lo}, {hi}]"
                    )

    mo_ids: set[str] = set()
    for ms in scene.measuring_surfaces:
        if ms.id in mo_ids or ms.id in seen_ids:
            raise ValueError(f"duplicate measurement object id {ms.id!r}")
        if ms.id == RESERVED_OBJECT_ID:
            raise ValueError(f"object id {RESERVED_OBJECT_ID!r} is reserved")
        mo_ids.add(ms.id)
        check_rect(ms.rect, f"measuring surface {ms.id}")
        t = ms.targets
        for name, val in (
            ("average_lux", t.average_lux),
            ("uniformity_min_avg", t.uniformity_min_avg),
            ("uniformity_min_max", t.uniformity_min_max),
        ):
            if val is not None and val <= 0:
                raise ValueError(f"measuring surface {ms.id}: target {name} must be positive")

    for gp in scene.glare_probes:
        if gp.id in mo_ids:
            raise ValueError(f"duplicate measurement object id {gp.id!r}")
        if gp.id == RESERVED_OBJECT_ID:
            raise ValueError(f"object id {RESERVED_OBJECT_ID!r} is reserved")
        mo_ids.add(gp.id)
        if not room.contains(gp.eye):
            raise ValueError(f"glare probe {gp.id}: eye outside the room")
        if not 0.0 < gp.fov_deg <= 360.0:
            raise ValueError(f"glare probe {gp.id}: field of view out of range")

    grouped: set[str] = set()
    group_ids: set[str] = set()
    for g in scene.groups:
        if g.id in group_ids:
            raise ValueError(f"duplicate group id {g.id!r}")
        if g.id == RESERVED_GROUP_ID:
            raise ValueError(f"group id {RESERVED_GROUP_ID!r} is reserved")
        group_ids.add(g.id)
        for member in g.members:
            if member not in mo_ids:
                raise ValueError(f"group {g.id}: unknown measurement object {member!r}")
            if member in grouped:
                raise ValueError(f"measurement object {member!r} assigned to more than one group")
            grouped.add(member)
    ungrouped = mo_ids - grouped
    if ungrouped:
        raise ValueError(f"measurement objects not in any group: {sorted(ungrouped)}")

    return scene


# ---------------------------------------------------------------------------
# Document (de)serialization
# ---------------------------------------------------------------------------


def _rect_to_dict(rect: Rect3) -> dict:
    return {
        "axis": AXIS_NAME[rect.axis],
        "offset": rect.offset,
        "normal": rect.normal_sign,
        "u_range": list(rect.u_range),
        "v_range": list(rect.v_range),
    }


def _rect_from_dict(d: dict) -> Rect3:
    return Rect3(
        axis=AXIS_INDEX[d["axis"]],
        offset=float(d["offset"]),
        normal_sign=int(d["normal"]),
        u_range=(float(d["u_range"][0]), float(d["u_range"][1])),
        v_range=(float(d["v_range"][0]), float(d["v_range"][1])),
    )


def scene_to_document(scene: Scene) -> dict:
    """Serialize a scene to its canonical JSON-compatible document."""
    room: dict = {
        "width": scene.room.width,
        "depth": scene.room.depth,
        "height": scene.room.height,
        "patch_resolution": scene.room.patch_resolution,
    }
    gt = scene.room.global_targets.to_dict()
    if gt:
        room["global_targets"] = gt
    return {
        "room": room,
        "surfaces": [
            {"id": s.id, "kind": s.kind, **_rect_to_dict(s.rect), "reflectance": s.reflectance}
            for s in scene.surfaces
        ],
        "luminaires": [
            {
                "id": l.id,
                "model": l.model_id,
                "position": list(l.position),
                "aim": list(l.aim),
                "dim": l.dim,
            }
            for l in scene.luminaires
        ],
        "measuring_surfaces": [
            {"id": m.id, **_rect_to_dict(m.rect), "targets": m.targets.to_dict()}
            for m in scene.measuring_surfaces
        ],
        "glare_probes": [
            {
                "id": g.id,
                "eye": list(g.eye),
                "view": list(g.view),
                "fov_deg": g.fov_deg,
                **({"target_ugr": g.target_ugr} if g.target_ugr is not None else {}),
            }
            for g in scene.glare_probes
        ],
        "groups": [
            {"id": g.id, "name": g.name, "members": list(g.members)} for g in scene.groups
        ],
        "catalog_ref": scene.catalog.to_dict(),
    }


def scene_from_document(doc: dict) -> Scene:
    """Parse and validate a scene document."""
    rd = doc["room"]
    gt = rd.get("global_targets", {})
    band = gt.get("color_temperature")
    room = Room(
        width=float(rd["width"]),
        depth=float(rd["depth"]),
        height=float(rd["height"]),
        patch_resolution=float(rd.get("patch_resolution", 0.1)),
        global_targets=GlobalTargets(
            color_temperature=(float(band[0]), float(band[1])) if band else None,
            cri=float(gt["cri"]) if gt.get("cri") is not None else None,
        ),
    )
    surfaces = tuple(
        Surface(
            id=str(d["id"]),
            kind=str(d["kind"]),
            rect=_rect_from_dict(d),
            reflectance=float(d["reflectance"]),
        )
        for d in doc.get("surfaces", [])
    )
    luminaires = tuple(
        LuminaireInstance(
            id=str(d["id"]),
            model_id=str(d["model"]),
            position=tuple(float(c) for c in d["position"]),
            aim=_unit(d.get("aim", (0.0, 0.0, -1.0))),
            dim=float(d.get("dim", 1.0)),
        )
        for d in doc.get("luminaires", [])
    )
    measuring = tuple(
        MeasuringSurface(
            id=str(d["id"]),
            rect=_rect_from_dict(d),
            targets=SurfaceTargets(
                average_lux=_opt_float(d.get("targets", {}), "average_lux"),
                uniformity_min_avg=_opt_float(d.get("targets", {}), "uniformity_min_avg"),
                uniformity_min_max=_opt_float(d.get("targets", {}), "uniformity_min_max"),
            ),
        )
        for d in doc.get("measuring_surfaces", [])
    )
    probes = tuple(
        GlareProbe(
            id=str(d["id"]),
            eye=tuple(float(c) for c in d["eye"]),
            view=_unit(d["view"]),
            fov_deg=float(d.get("fov_deg", 120.0)),
            target_ugr=_opt_float(d, "target_ugr"),
        )
        for d in doc.get("glare_probes", [])
    )
    groups = tuple(
        MeasurementGroup(id=str(d["id"]), name=str(d.get("name", d["id"])), members=tuple(d["members"]))
        for d in doc.get("groups", [])
    )
    catalog = Catalog.from_dict(doc.get("catalog_ref", {"models": []}))
    return validate(
        Scene(
            room=room,
            surfaces=surfaces,
            luminaires=luminaires,
            measuring_surfaces=measuring,
            glare_probes=probes,
            groups=groups,
            catalog=catalog,
        )
    )


def _opt_float(d: dict, key: str) -> float | None:
    v = d.get(key)
    return None if v is None else float(v)


def dumps(scene: Scene) -> str:
    return json.dumps(scene_to_document(scene), indent=2) + "\n"


def save(scene: Scene, path: str | Path):
    Path(path).write_text(dumps(scene))


def load(path: str | Path) -> Scene:
    return scene_from_document(json.loads(Path(path).read_text()))


# ---------------------------------------------------------------------------
# Edits
# ---------------------------------------------------------------------------

EDIT_KINDS = (
    "move_light",
    "set_dim",
    "scale_dim",
    "add_light",
    "remove_light",
    "shift_height",
    "change_collection",
    "change_version",
)


@dataclass(frozen=True)
class Edit:
    """A single user or suggestion action applied to a scene snapshot.

    ``params`` by kind:

    * move_light: light_id, delta [dx, dy, dz]
    * set_dim: value, optional light_id (default: all lights)
    * scale_dim: factor, optional light_id (default: all lights)
    * add_light: model, position, optional id / aim / dim
    * remove_light: light_id
    * shift_height: dz, optional light_id (default: all pendants)
    * change_collection: collection
    * change_version: version, optional light_id
    """

    kind: str
    params: dict

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params)}

    @classmethod
    def from_dict(cls, d: dict) -> "Edit":
        kind = d.get("kind")
        if kind not in EDIT_KINDS:
            raise ValueError(f"unknown edit kind {kind!r}")
        return cls(kind=kind, params=dict(d.get("params", {})))


def _replace_luminaire(scene: Scene, new: LuminaireInstance) -> Scene:
    lums = tuple(new if l.id == new.id else l for l in scene.luminaires)
    return replace(scene, luminaires=lums)


def apply_edit(scene: Scene, edit: Edit) -> Scene:
    """Apply one edit, returning a new validated scene snapshot.

    Raises ValueError if the edit is malformed or the result violates a
    scene invariant (for example raising a pendant through the ceiling);
    the input scene is never modified.
    """
    p = edit.params
    if edit.kind == "move_light":
        lum = scene.luminaire(p["light_id"])
        d = p["delta"]
        pos = (lum.position[0] + d[0], lum.position[1] + d[1], lum.position[2] + d[2])
        out = _replace_luminaire(scene, replace(lum, position=pos))
    elif edit.kind == "set_dim":
        value = float(p["value"])
        targets = [scene.luminaire(p["light_id"])] if p.get("light_id") else list(scene.luminaires)
        out = scene
        for lum in targets:
            out = _replace_luminaire(out, replace(lum, dim=value))
    elif edit.kind == "scale_dim":
        factor = float(p["factor"])
        if factor < 0:
            raise ValueError("dim factor must be non-negative")
        targets = [scene.luminaire(p["light_id"])] if p.get("light_id") else list(scene.luminaires)
        out = scene
        for lum in targets:
            out = _replace_luminaire(out, replace(lum, dim=min(1.0, lum.dim * factor)))
    elif edit.kind == "add_light":
        model = scene.catalog.get(p["model"])
        new_id = p.get("id") or f"L-{uuid.uuid4().hex[:8]}"
        aim = _unit(p.get("aim", (0.0, 0.0, -1.0)))
        lum = LuminaireInstance(
            id=new_id,
            model_id=model.id,
            position=tuple(float(c) for c in p["position"]),
            aim=aim,
            dim=float(p.get("dim", 1.0)),
        )
        out = replace(scene, luminaires=scene.luminaires + (lum,))
    elif edit.kind == "remove_light":
        lum = scene.luminaire(p["light_id"])
        out = replace(scene, luminaires=tuple(l for l in scene.luminaires if l.id != lum.id))
    elif edit.kind == "shift_height":
        dz = float(p["dz"])
        if p.get("light_id"):
            targets = [scene.luminaire(p["light_id"])]
        else:
            targets = [l for l in scene.luminaires if scene.model_of(l).mount == "pendant"]
        if not targets:
            raise ValueError("no pendant lights to shift")
        out = scene
        for lum in targets:
            if scene.model_of(lum).mount != "pendant":
                raise ValueError(f"luminaire {lum.id} is not height-adjustable")
            pos = (lum.position[0], lum.position[1], lum.position[2] + dz)
            out = _replace_luminaire(out, replace(lum, position=pos))
    elif edit.kind == "change_collection":
        collection = p["collection"]
        versions = scene.catalog.versions(collection)
        if not versions:
            raise ValueError(f"unknown collection {collection!r}")
        out = scene
        for lum in scene.luminaires:
            current = scene.model_of(lum)
            version = current.version if current.version in versions else versions[0]
            model = scene.catalog.lookup(collection, version)
            out = _replace_luminaire(out, replace(lum, model_id=model.id))
    elif edit.kind == "change_version":
        version = p["version"]
        targets = [scene.luminaire(p["light_id"])] if p.get("light_id") else list(scene.luminaires)
        out = scene
        for lum in targets:
            current = scene.model_of(lum)
            model = scene.catalog.lookup(current.collection, version)
            out = _replace_luminaire(out, replace(lum, model_id=model.id))
    else:
        raise ValueError(f"unknown edit kind {edit.kind!r}")
    return validate(out)
