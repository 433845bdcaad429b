"""CPU radiosity preview: direct illuminance plus diffuse inter-reflection.

The solver discretizes every surface into an exact grid of equal patches,
shoots direct light from each luminaire to each patch center, then runs a
fixed number of gathering iterations in which every patch collects the
exitance of every other patch through an analytic point-to-patch form
factor. Visibility is binary and center-sampled in both passes.

All arithmetic is deterministic: the same scene and settings always produce
a bit-identical light map.
"""

from __future__ import annotations

import math
import threading
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from .geometry import Rect3, grid_centers, visible
from .scene import GlareProbe, Scene

_EPS = 1e-9

# Rows of the gather matrix are built in chunks of this many patches to
# bound temporary memory regardless of scene size.
_CHUNK_ROWS = 512

# The gather matrix depends only on surface geometry and resolution, not on
# luminaires, so consecutive candidate previews that merely move or re-dim
# lights can share it. A handful of geometries is plenty.
_MATRIX_CACHE_SIZE = 4
_matrix_cache: "OrderedDict[tuple, np.ndarray]" = OrderedDict()
_matrix_lock = threading.Lock()


class SimulationCancelled(Exception):
    """Raised inside simulate() when the caller's cancel flag is set."""


@dataclass(frozen=True)
class SimSettings:
    """Solver settings.

    ``resolution`` of None means "use the scene's own patch resolution";
    an explicit value overrides it, which is how candidate previews run
    coarser than the committed state.
    """

    bounces: int = 3
    resolution: float | None = None

    def effective_resolution(self, scene: Scene) -> float:
        return self.resolution if self.resolution is not None else scene.room.patch_resolution


# ---------------------------------------------------------------------------
# Light map
# ---------------------------------------------------------------------------


@dataclass
class SurfaceGrid:
    """Patch grid and per-bounce irradiance for one surface."""

    surface_id: str
    rect: Rect3
    reflectance: float
    nu: int
    nv: int
    patch_area: float
    centers: np.ndarray  # (n, 3), v-major
    direct: np.ndarray  # (n,) lux
    bounces: list[np.ndarray] = field(default_factory=list)  # one (n,) array per bounce

    @property
    def total(self) -> np.ndarray:
        e = self.direct.copy()
        for b in self.bounces:
            e += b
        return e

    def grid(self, which: str = "total") -> np.ndarray:
        """Irradiance as a (nv, nu) grid; ``which`` is 'total' or 'direct'."""
        flat = self.total if which == "total" else self.direct
        return flat.reshape(self.nv, self.nu)


@dataclass
class LightMap:
    """Result of one simulation run.

    Irradiance is stored per patch and per bounce (index 0 of ``bounces``
    is the first inter-reflection). Exitance follows the usual diffuse
    bookkeeping: M = reflectance * E in lm/m^2, and surface luminance is
    M / pi in cd/m^2.
    """

    resolution: float
    bounce_count: int
    grids: tuple[SurfaceGrid, ...]

    def grid_for(self, surface_id: str) -> SurfaceGrid:
        for g in self.grids:
            if g.surface_id == surface_id:
                return g
        raise ValueError(f"no grid for surface {surface_id!r}")

    def flat(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Concatenated (centers, normals, areas, exitance) over all patches."""
        if not self.grids:
            z = np.zeros((0, 3))
            return z, z, np.zeros(0), np.zeros(0)
        centers = np.concatenate([g.centers for g in self.grids])
        normals = np.concatenate(
            [np.tile(g.rect.normal, (len(g.centers), 1)) for g in self.grids]
        )
        areas = np.concatenate([np.full(len(g.centers), g.patch_area) for g in self.grids])
        exitance = np.concatenate([g.reflectance * g.total for g in self.grids])
        return centers, normals, areas, exitance

    def samples_in(self, rect: Rect3, tol: float = 1e-6) -> tuple[np.ndarray, np.ndarray]:
        """Illuminance and patch area of all patches centered in a coplanar rectangle.

        Used by measuring surfaces. Raises ValueError when the map has no
        patch under the rectangle.
        """
        from .geometry import uv_axes

        ua, va = uv_axes(rect.axis)
        values = []
        areas = []
        for g in self.grids:
            r = g.rect
            if r.axis != rect.axis or r.normal_sign != rect.normal_sign:
                continue
            if abs(r.offset - rect.offset) > tol:
                continue
            u = g.centers[:, ua]
            v = g.centers[:, va]
            inside = (
                (u >= rect.u_range[0] - tol)
                & (u <= rect.u_range[1] + tol)
                & (v >= rect.v_range[0] - tol)
                & (v <= rect.v_range[1] + tol)
            )
            if inside.any():
                values.append(g.total[inside])
                areas.append(np.full(int(inside.sum()), g.patch_area))
        if not values:
            raise ValueError("rectangle is not covered by the light map")
        return np.concatenate(values), np.concatenate(areas)

    # -- energy accounting (used by tests and diagnostics) ------------------

    def direct_flux(self) -> float:
        return float(sum(g.patch_area * g.direct.sum() for g in self.grids))

    def bounce_flux(self, index: int) -> float:
        return float(sum(g.patch_area * g.bounces[index].sum() for g in self.grids))

    def absorbed_flux(self) -> float:
        return float(
            sum(g.patch_area * ((1.0 - g.reflectance) * g.total).sum() for g in self.grids)
        )

    # -- export --------------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "resolution": self.resolution,
            "bounce_count": self.bounce_count,
            "surfaces": [
                {
                    "id": g.surface_id,
                    "nu": g.nu,
                    "nv": g.nv,
                    "patch_area": g.patch_area,
                    "direct": [round(v, 9) for v in g.direct.tolist()],
                    "bounces": [[round(v, 9) for v in b.tolist()] for b in g.bounces],
                }
                for g in self.grids
            ],
        }

    def save_binary(self, path) -> None:
        """Flat binary export: one array per surface and pass (numpy .npz)."""
        arrays: dict[str, np.ndarray] = {}
        for g in self.grids:
            arrays[f"{g.surface_id}/direct"] = g.direct.reshape(g.nv, g.nu)
            for i, b in enumerate(g.bounces):
                arrays[f"{g.surface_id}/bounce{i + 1}"] = b.reshape(g.nv, g.nu)
        np.savez(path, **arrays)


# ---------------------------------------------------------------------------
# Solver
# ---------------------------------------------------------------------------


def _on_room_hull(rect: Rect3, scene: Scene) -> bool:
    dims = (scene.room.width, scene.room.depth, scene.room.height)
    return abs(rect.offset) < _EPS or abs(rect.offset - dims[rect.axis]) < _EPS


def occluder_rects(scene: Scene) -> list[Rect3]:
    """Surfaces that can block light: everything not lying on the room hull.

    The room is a convex box, so a surface on one of its faces can never
    interrupt a segment between two points inside - only interior surfaces
    (desks, shelves, partial walls) are tested.
    """
    return [s.rect for s in scene.surfaces if not _on_room_hull(s.rect, scene)]


def form_factor(
    center_i: np.ndarray,
    normal_i: np.ndarray,
    center_j: np.ndarray,
    normal_j: np.ndarray,
    area_j: float,
) -> float:
    """Analytic point-to-patch form factor between two patch samples.

    F_ij = cos(theta_i) * cos(theta_j) * A_j / (pi * d^2), clamped to zero
    when either patch faces away. Symmetric under A_i F_ij = A_j F_ji by
    construction.
    """
    d = np.asarray(center_j, dtype=float) - np.asarray(center_i, dtype=float)
    d2 = float(d @ d)
    if d2 < _EPS:
        return 0.0
    dist = math.sqrt(d2)
    cos_i = float(np.dot(normal_i, d)) / dist
    cos_j = -float(np.dot(normal_j, d)) / dist
    if cos_i <= 0.0 or cos_j <= 0.0:
        return 0.0
    return cos_i * cos_j * area_j / (math.pi * d2)


def _direct_pass(scene: Scene, grids: list[SurfaceGrid], occluders: list[Rect3]) -> None:
    for g in grids:
        n = g.rect.normal
        e = np.zeros(len(g.centers))
        for lum in scene.luminaires:
            if lum.dim <= 0.0:
                continue
            model = scene.model_of(lum)
            pos = np.asarray(lum.position, dtype=float)
            vec = g.centers - pos  # light -> patch
            d2 = np.einsum("ij,ij->i", vec, vec)
            d2 = np.maximum(d2, _EPS)
            dist = np.sqrt(d2)
            dirs = vec / dist[:, None]
            cos_inc = -(dirs @ n)
            lit = cos_inc > 0.0
            if not lit.any():
                continue
            aim = np.asarray(lum.aim, dtype=float)
            cos_src = np.clip(dirs[lit] @ aim, -1.0, 1.0)
            theta = np.arccos(cos_src)
            intensity = model.distribution.intensity_cd(theta, model.flux) * lum.dim
            contrib = intensity * cos_inc[lit] / d2[lit]
            if occluders:
                vis = visible(pos, g.centers[lit], occluders)
                contrib = contrib * vis
            e[lit] += contrib
        g.direct = e


def _gather_matrix(
    centers: np.ndarray,
    normals: np.ndarray,
    areas: np.ndarray,
    occluders: list[Rect3],
    cancel=None,
) -> np.ndarray:
    """Form factor * visibility matrix K with K[i, j] = F(i <- j)."""
    n = len(centers)
    k = np.zeros((n, n), dtype=np.float32)
    for start in range(0, n, _CHUNK_ROWS):
        if cancel is not None and cancel.is_set():
            raise SimulationCancelled()
        stop = min(start + _CHUNK_ROWS, n)
        ci = centers[start:stop]  # (c, 3)
        vec = centers[None, :, :] - ci[:, None, :]  # (c, n, 3), i -> j
        d2 = np.einsum("cjk,cjk->cj", vec, vec)
        np.maximum(d2, _EPS, out=d2)
        dist = np.sqrt(d2)
        cos_i = np.einsum("cjk,ck->cj", vec, normals[start:stop]) / dist
        cos_j = -np.einsum("cjk,jk->cj", vec, normals) / dist
        block = cos_i * cos_j
        np.clip(block, 0.0, None, out=block)
        block *= areas[None, :]
        block /= math.pi * d2
        if occluders:
            facing = block > 0.0
            rows, cols = np.nonzero(facing)
            if len(rows):
                vis = visible(ci[rows], centers[cols], occluders)
                block[rows[~vis], cols[~vis]] = 0.0
        k[start:stop] = block.astype(np.float32)
    return k


def simulate(scene: Scene, settings: SimSettings = SimSettings(), cancel=None) -> LightMap:
    """Run the full preview: direct pass plus ``bounces`` gather iterations.

    ``cancel`` is an optional threading.Event; when it is set the run stops
    at the next stage boundary with SimulationCancelled and no partial map
    escapes.

    Scenes without luminaires produce an all-zero map; scenes without
    surfaces produce an empty one.
    """
    res = settings.effective_resolution(scene)
    grids: list[SurfaceGrid] = []
    for s in scene.surfaces:
        centers, area, (nu, nv) = grid_centers(s.rect, res)
        grids.append(
            SurfaceGrid(
                surface_id=s.id,
                rect=s.rect,
                reflectance=s.reflectance,
                nu=nu,
                nv=nv,
                patch_area=area,
                centers=centers,
                direct=np.zeros(nu * nv),
            )
        )
    if cancel is not None and cancel.is_set():
        raise SimulationCancelled()
    occluders = occluder_rects(scene)
    _direct_pass(scene, grids, occluders)

    if settings.bounces > 0 and grids and any(g.direct.any() for g in grids):
        rho = np.concatenate([np.full(len(g.centers), g.reflectance) for g in grids])
        cache_key = (tuple(s.rect for s in scene.surfaces), res)
        with _matrix_lock:
            k = _matrix_cache.get(cache_key)
            if k is not None:
                _matrix_cache.move_to_end(cache_key)
        if k is None:
            centers = np.concatenate([g.centers for g in grids])
            normals = np.concatenate(
                [np.tile(g.rect.normal, (len(g.centers), 1)) for g in grids]
            )
            areas = np.concatenate([np.full(len(g.centers), g.patch_area) for g in grids])
            k = _gather_matrix(centers, normals, areas, occluders, cancel)
            k.flags.writeable = False
            with _matrix_lock:
                _matrix_cache[cache_key] = k
                while len(_matrix_cache) > _MATRIX_CACHE_SIZE:
                    _matrix_cache.popitem(last=False)
        slices = []
        start = 0
        for g in grids:
            slices.append(slice(start, start + len(g.centers)))
            start += len(g.centers)
        incident = np.concatenate([g.direct for g in grids])
        for _ in range(settings.bounces):
            if cancel is not None and cancel.is_set():
                raise SimulationCancelled()
            exitance = rho * incident
            incident = k @ exitance
            for g, sl in zip(grids, slices):
                g.bounces.append(incident[sl].copy())
    else:
        for g in grids:
            g.bounces = [np.zeros_like(g.direct) for _ in range(settings.bounces)]

    if cancel is not None and cancel.is_set():
        raise SimulationCancelled()
    return LightMap(resolution=res, bounce_count=settings.bounces, grids=tuple(grids))


# ---------------------------------------------------------------------------
# Glare probe scans
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GlareSource:
    luminaire_id: str
    luminance: float  # cd/m^2 toward the eye
    solid_angle: float  # sr, projected
    position_index: float  # Guth index, 1 on axis


@dataclass(frozen=True)
class GlareScan:
    probe_id: str
    background_luminance: float  # cd/m^2
    sources: tuple[GlareSource, ...]

    def to_dict(self) -> dict:
        return {
            "probe_id": self.probe_id,
            "background_luminance": self.background_luminance,
            "sources": [
                {
                    "luminaire_id": s.luminaire_id,
                    "luminance": s.luminance,
                    "solid_angle": s.solid_angle,
                    "position_index": s.position_index,
                }
                for s in self.sources
            ],
        }


def guth_position_index(sigma_deg: float, tau_deg: float) -> float:
    """Guth position index from the standard polynomial fit.

    ``sigma_deg`` is the angle between the line of sight and the line to
    the source; ``tau_deg`` the angle of the source's displacement from
    vertical in the plane normal to the line of sight. Returns 1 on axis,
    clamped to [1, 16].
    """
    s = float(sigma_deg)
    t = float(tau_deg)
    ln_p = (35.2 - 0.31889 * t - 1.22 * math.exp(-2.0 * t / 9.0)) * 1e-3 * s
    ln_p += (21.0 + 0.26667 * t - 0.002963 * t * t) * 1e-5 * s * s
    return float(np.clip(math.exp(ln_p), 1.0, 16.0))


# Grazing views shrink the projected luminous area toward zero; flooring the
# cosine keeps the luminance model bounded.
_MIN_VIEW_COS = 0.05


def eye_indirect_irradiance(
    eye: np.ndarray, view: np.ndarray, light_map: LightMap, occluders: list[Rect3]
) -> float:
    """Irradiance at the eye gathered from surface exitance (reflected light only)."""
    centers, normals, areas, exitance = light_map.flat()
    if len(centers) == 0:
        return 0.0
    vec = centers - eye[None, :]
    d2 = np.einsum("ij,ij->i", vec, vec)
    d2 = np.maximum(d2, _EPS)
    dist = np.sqrt(d2)
    dirs = vec / dist[:, None]
    cos_eye = dirs @ view
    cos_patch = -np.einsum("ij,ij->i", dirs, normals)
    mask = (cos_eye > 0.0) & (cos_patch > 0.0) & (exitance > 0.0)
    if not mask.any():
        return 0.0
    contrib = exitance[mask] * cos_eye[mask] * cos_patch[mask] * areas[mask] / (math.pi * d2[mask])
    if occluders:
        vis = visible(eye, centers[mask], occluders)
        contrib = contrib * vis
    return float(contrib.sum())


def probe_scan(scene: Scene, light_map: LightMap, probe: GlareProbe) -> GlareScan:
    """Scan one probe: luminaires inside the view cone plus the background level.

    For each visible luminaire the scan records its luminance toward the
    eye, its projected solid angle and its Guth position index. The
    background luminance is the reflected irradiance at the eye over pi.
    """
    eye = np.asarray(probe.eye, dtype=float)
    view = np.asarray(probe.view, dtype=float)
    occluders = occluder_rects(scene)
    half_fov = math.radians(probe.fov_deg) / 2.0

    sources: list[GlareSource] = []
    for lum in scene.luminaires:
        if lum.dim <= 0.0:
            continue
        model = scene.model_of(lum)
        pos = np.asarray(lum.position, dtype=float)
        to_src = pos - eye
        d2 = float(to_src @ to_src)
        if d2 < _EPS:
            continue
        dist = math.sqrt(d2)
        dir_to_src = to_src / dist
        sigma = math.acos(float(np.clip(dir_to_src @ view, -1.0, 1.0)))
        if sigma > half_fov:
            continue
        if not visible(eye, pos[None, :], occluders)[0]:
            continue
        aim = np.asarray(lum.aim, dtype=float)
        cos_view = float(aim @ -dir_to_src)  # angle between aim and light->eye
        if cos_view <= 0.0:
            continue  # looking at the dark back side of the fixture
        theta = math.acos(np.clip(cos_view, -1.0, 1.0))
        intensity = float(model.distribution.intensity_cd(np.array([theta]), model.flux)[0])
        intensity *= lum.dim
        projected = model.luminous_area * max(cos_view, _MIN_VIEW_COS)
        luminance = intensity / projected
        omega = projected / d2
        sources.append(
            GlareSource(
                luminaire_id=lum.id,
                luminance=luminance,
                solid_angle=omega,
                position_index=guth_position_index(
                    math.degrees(sigma), _tau_degrees(view, dir_to_src)
                ),
            )
        )

    background = eye_indirect_irradiance(eye, view, light_map, occluders) / math.pi
    return GlareScan(probe_id=probe.id, background_luminance=background, sources=tuple(sources))


def _tau_degrees(view: np.ndarray, dir_to_src: np.ndarray) -> float:
    """Angle from vertical of the source displacement, in the plane normal to the view."""
    up = np.array([0.0, 0.0, 1.0])
    w = dir_to_src - (dir_to_src @ view) * view
    up_perp = up - (up @ view) * view
    nw = float(np.linalg.norm(w))
    nu = float(np.linalg.norm(up_perp))
    if nw < _EPS or nu < _EPS:
        return 0.0
    c = abs(float((w / nw) @ (up_perp / nu)))
    return math.degrees(math.acos(min(1.0, c)))


def total_emitted_flux(scene: Scene) -> float:
    """Sum of luminous flux actually emitted by all luminaires, dim applied."""
    total = 0.0
    for lum in scene.luminaires:
        model = scene.model_of(lum)
        total += model.distribution.emitted_flux(model.flux) * lum.dim
    return total
