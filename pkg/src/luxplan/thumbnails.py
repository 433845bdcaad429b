"""Software-rasterized preview thumbnails of simulated states.

An orthographic camera looks into the room from above; every surface is
drawn from its patch grid with a tone-mapped brightness, so a brighter
simulation result is a brighter image. No GPU, no external renderer: the
whole rasterizer is a few numpy passes and therefore bit-deterministic.
"""

from __future__ import annotations

import io
import math

import numpy as np
from PIL import Image

from .geometry import uv_axes
from .scene import Scene
from .simulation import LightMap

WIDTH = 320
HEIGHT = 180

DEFAULT_CAMERA = {"yaw_deg": 215.0, "pitch_deg": 55.0, "zoom": 1.0}

# Tone mapping half point: a patch at this illuminance renders mid-bright.
_TONE_LUX = 300.0
_BG = 24
_SURF_MIN = 28.0
_SURF_SPAN = 227.0

# Blue -> cyan -> green -> yellow -> red, for the false-color mode.
_RAMP_T = (0.0, 0.25, 0.5, 0.75, 1.0)
_RAMP_R = (24.0, 20.0, 46.0, 231.0, 216.0)
_RAMP_G = (36.0, 158.0, 182.0, 201.0, 46.0)
_RAMP_B = (150.0, 196.0, 83.0, 52.0, 34.0)


def _camera_basis(camera: dict) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    yaw = math.radians(float(camera.get("yaw_deg", DEFAULT_CAMERA["yaw_deg"])))
    pitch = math.radians(float(camera.get("pitch_deg", DEFAULT_CAMERA["pitch_deg"])))
    view = np.array(
        [math.cos(pitch) * math.cos(yaw), math.cos(pitch) * math.sin(yaw), -math.sin(pitch)]
    )
    up = np.array([0.0, 0.0, 1.0])
    right = np.cross(view, up)
    right /= np.linalg.norm(right)
    screen_up = np.cross(right, view)
    return view, right, screen_up


def _tone(e: np.ndarray) -> np.ndarray:
    return e / (e + _TONE_LUX)


def _shade_gray(e: np.ndarray) -> np.ndarray:
    v = _SURF_MIN + _SURF_SPAN * _tone(e)
    return np.stack([v, v, v], axis=-1)


def _shade_false_color(e: np.ndarray) -> np.ndarray:
    t = _tone(e)
    return np.stack(
        [np.interp(t, _RAMP_T, _RAMP_R), np.interp(t, _RAMP_T, _RAMP_G), np.interp(t, _RAMP_T, _RAMP_B)],
        axis=-1,
    )


def render_thumbnail(
    scene: Scene,
    light_map: LightMap,
    camera: dict | None = None,
    false_color: bool = False,
) -> np.ndarray:
    """Render a 320 x 180 RGB image of the simulated scene.

    ``camera`` carries yaw_deg / pitch_deg / zoom; suggestions are rendered
    with their parent's camera so strips stay visually comparable.
    """
    cam = dict(DEFAULT_CAMERA)
    if camera:
        cam.update(camera)
    view, right, screen_up = _camera_basis(cam)

    room = scene.room
    corners = np.array(
        [
            [x, y, z]
            for x in (0.0, room.width)
            for y in (0.0, room.depth)
            for z in (0.0, room.height)
        ]
    )
    sx = corners @ right
    sy = corners @ screen_up
    span_x = sx.max() - sx.min()
    span_y = sy.max() - sy.min()
    scale = 0.9 * min(WIDTH / span_x, HEIGHT / span_y) * float(cam.get("zoom", 1.0))
    cx = 0.5 * (sx.max() + sx.min())
    cy = 0.5 * (sy.max() + sy.min())

    def project(p: np.ndarray) -> tuple[float, float, float]:
        px = (float(p @ right) - cx) * scale + WIDTH / 2.0
        py = HEIGHT / 2.0 - (float(p @ screen_up) - cy) * scale
        return px, py, float(p @ view)

    img = np.full((HEIGHT, WIDTH, 3), float(_BG))
    zbuf = np.full((HEIGHT, WIDTH), np.inf)
    shade = _shade_false_color if false_color else _shade_gray

    ys, xs = np.mgrid[0:HEIGHT, 0:WIDTH]
    pix = np.stack([xs.astype(float) + 0.5, ys.astype(float) + 0.5], axis=-1)

    for g in light_map.grids:
        rect = g.rect
        ua, va = uv_axes(rect.axis)
        p00 = rect.point(rect.u_range[0], rect.v_range[0])
        x0, y0, d0 = project(p00)
        # screen step per meter along each in-plane axis
        du = np.array([right[ua] * scale, -screen_up[ua] * scale])
        dv = np.array([right[va] * scale, -screen_up[va] * scale])
        det = du[0] * dv[1] - du[1] * dv[0]
        if abs(det) < 1e-9:
            continue  # edge-on
        inv = np.array([[dv[1], -dv[0]], [-du[1], du[0]]]) / det
        rel = pix - np.array([x0, y0])
        u = rel[..., 0] * inv[0, 0] + rel[..., 1] * inv[0, 1]
        v = rel[..., 0] * inv[1, 0] + rel[..., 1] * inv[1, 1]
        uext = rect.u_range[1] - rect.u_range[0]
        vext = rect.v_range[1] - rect.v_range[0]
        inside = (u >= 0.0) & (u <= uext) & (v >= 0.0) & (v <= vext)
        if not inside.any():
            continue
        depth = d0 + u * view[ua] + v * view[va]
        visible_px = inside & (depth < zbuf)
        if not visible_px.any():
            continue
        grid = g.grid()
        iu = np.clip((u[visible_px] / uext * g.nu).astype(int), 0, g.nu - 1)
        iv = np.clip((v[visible_px] / vext * g.nv).astype(int), 0, g.nv - 1)
        img[visible_px] = shade(grid[iv, iu])
        zbuf[visible_px] = depth[visible_px]

    # luminaires as small discs, brightness following their dim factor
    radius = max(2.0, 0.12 * scale)
    for lum in scene.luminaires:
        px, py, d = project(np.asarray(lum.position, dtype=float))
        mask = (pix[..., 0] - px) ** 2 + (pix[..., 1] - py) ** 2 <= radius**2
        mask &= d - 0.05 < zbuf
        level = 120.0 + 135.0 * lum.dim
        img[mask] = np.array([level, level, level * 0.82])
        zbuf[mask] = d - 0.05

    return np.rint(np.clip(img, 0.0, 255.0)).astype(np.uint8)


def encode_png(pixels: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(pixels, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def mean_luminance(pixels: np.ndarray) -> float:
    """Mean pixel luminance (Rec. 601 weights) of a rendered thumbnail."""
    rgb = pixels.astype(float)
    return float((0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]).mean())
