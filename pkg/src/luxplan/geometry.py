"""Axis-aligned rectangle geometry shared by the scene and the simulator.

Every physical surface in a scene is an axis-aligned rectangle: constant
along one world axis, spanning an interval along each of the two others.
That restriction keeps patch grids, ray tests and form factors simple and
fast, which is what lets the preview loop stay interactive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

AXIS_INDEX = {"x": 0, "y": 1, "z": 2}
AXIS_NAME = {v: k for k, v in AXIS_INDEX.items()}

# In-plane axes for each constant axis, in ascending index order.
_UV_AXES = {0: (1, 2), 1: (0, 2), 2: (0, 1)}

_EPS = 1e-9


def uv_axes(axis: int) -> tuple[int, int]:
    """Return the two world-axis indices spanning a plane with the given constant axis."""
    return _UV_AXES[axis]


@dataclass(frozen=True)
class Rect3:
    """An axis-aligned rectangle in 3D with a facing direction.

    ``axis`` is the index of the constant world axis (0=x, 1=y, 2=z),
    ``offset`` the coordinate along it, and ``normal_sign`` which way the
    rectangle faces (+1 toward increasing coordinates). ``u_range`` and
    ``v_range`` are the extents along the two in-plane axes returned by
    :func:`uv_axes`.
    """

    axis: int
    offset: float
    normal_sign: int
    u_range: tuple[float, float]
    v_range: tuple[float, float]

    @property
    def area(self) -> float:
        du = self.u_range[1] - self.u_range[0]
        dv = self.v_range[1] - self.v_range[0]
        return du * dv

    @property
    def normal(self) -> np.ndarray:
        n = np.zeros(3)
        n[self.axis] = float(self.normal_sign)
        return n

    def point(self, u: float, v: float) -> np.ndarray:
        """World position of in-plane coordinates (u, v)."""
        ua, va = uv_axes(self.axis)
        p = np.zeros(3)
        p[self.axis] = self.offset
        p[ua] = u
        p[va] = v
        return p

    def center(self) -> np.ndarray:
        return self.point(
            0.5 * (self.u_range[0] + self.u_range[1]),
            0.5 * (self.v_range[0] + self.v_range[1]),
        )

    def contains_uv(self, u: float, v: float, tol: float = _EPS) -> bool:
        return (
            self.u_range[0] - tol <= u <= self.u_range[1] + tol
            and self.v_range[0] - tol <= v <= self.v_range[1] + tol
        )


def grid_centers(rect: Rect3, resolution: float) -> tuple[np.ndarray, float, tuple[int, int]]:
    """Subdivide a rectangle into an exact grid of equal patches.

    The patch count along each in-plane axis is chosen so the patches tile
    the rectangle exactly; the effective edge length is therefore at most
    ``resolution``.

    Returns (centers, patch_area, (nu, nv)) where centers has shape
    (nu * nv, 3) ordered v-major (u varies fastest).
    """
    u0, u1 = rect.u_range
    v0, v1 = rect.v_range
    nu = max(1, int(np.ceil((u1 - u0) / resolution - _EPS)))
    nv = max(1, int(np.ceil((v1 - v0) / resolution - _EPS)))
    du = (u1 - u0) / nu
    dv = (v1 - v0) / nv
    us = u0 + (np.arange(nu) + 0.5) * du
    vs = v0 + (np.arange(nv) + 0.5) * dv
    ua, va = uv_axes(rect.axis)
    centers = np.empty((nv * nu, 3))
    uu, vv = np.meshgrid(us, vs)  # vv-major: row per v
    centers[:, rect.axis] = rect.offset
    centers[:, ua] = uu.ravel()
    centers[:, va] = vv.ravel()
    return centers, du * dv, (nu, nv)


def segments_blocked(p0: np.ndarray, p1: np.ndarray, rect: Rect3) -> np.ndarray:
    """Test which of a batch of segments cross a rectangle.

    Parameters
    ----------
    p0 : (3,) or (N, 3) segment start points
    p1 : (N, 3) segment end points
    rect : the potential occluder

    Returns a boolean array of shape (N,). Endpoints lying on the
    rectangle's plane do not count as crossings (strict interior of the
    parameter range), so a surface never occludes rays leaving or arriving
    at itself.
    """
    p0 = np.atleast_2d(p0)
    p1 = np.atleast_2d(p1)
    if p0.shape[0] == 1 and p1.shape[0] > 1:
        p0 = np.broadcast_to(p0, p1.shape)
    k = rect.axis
    denom = p1[:, k] - p0[:, k]
    safe = np.abs(denom) > _EPS
    t = np.where(safe, (rect.offset - p0[:, k]) / np.where(safe, denom, 1.0), -1.0)
    crossing = safe & (t > 1e-6) & (t < 1.0 - 1e-6)
    if not crossing.any():
        return crossing
    ua, va = uv_axes(k)
    u = p0[:, ua] + t * (p1[:, ua] - p0[:, ua])
    v = p0[:, va] + t * (p1[:, va] - p0[:, va])
    inside = (
        (u >= rect.u_range[0] - _EPS)
        & (u <= rect.u_range[1] + _EPS)
        & (v >= rect.v_range[0] - _EPS)
        & (v <= rect.v_range[1] + _EPS)
    )
    return crossing & inside


def visible(p0: np.ndarray, p1: np.ndarray, occluders: list[Rect3]) -> np.ndarray:
    """Binary center-sampled visibility for a batch of segments."""
    p1 = np.atleast_2d(p1)
    vis = np.ones(p1.shape[0], dtype=bool)
    for rect in occluders:
        if not vis.any():
            break
        vis &= ~segments_blocked(p0, p1, rect)
    return vis
