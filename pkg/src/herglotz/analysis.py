"""Zero level sets, field comparison metrics, and raster rendering.

Level sets are extracted from the real part by marching squares with
linear edge interpolation; comparisons between contours use a symmetric
mean point-to-polyline distance.  Rendering writes deterministic PNGs
through a fixed blue-white-red colormap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridMismatchError
from .fieldeval import HerglotzDensity
from .grid import Field, Grid
from .spheremesh import mollweide_many


@dataclass(frozen=True)
class LevelSet:
    """Zero contours: a list of (n_i, 2) polylines plus closed flags."""

    polylines: list[np.ndarray]
    closed: list[bool]

    def __post_init__(self) -> None:
        if len(self.polylines) != len(self.closed):
            raise ValueError("one closed flag per polyline required")

    @property
    def is_empty(self) -> bool:
        return not self.polylines


@dataclass(frozen=True)
class Slice:
    """A 2D field extracted at constant height x3."""

    x3: float
    field: Field


# ---------------------------------------------------------------------------
# Marching squares
# ---------------------------------------------------------------------------

def _edge_point(ax, i0, j0, i1, j1, v0, v1):
    # Linear zero crossing between two grid nodes (i = x index, j = y index).
    t = v0 / (v0 - v1)
    return (ax[i0] + t * (ax[i1] - ax[i0]), ax[j0] + t * (ax[j1] - ax[j0]))


def zero_level_set(f: Field) -> LevelSet:
    """Marching-squares zero contours of Re f with linear interpolation.

    Saddle cells are disambiguated by the sign of the cell-center average.
    Contours are stitched into ordered polylines; a polyline is closed when
    it returns to its starting grid edge.  Constant-sign fields give an
    empty result.
    """
    if f.grid.d != 2:
        raise ValueError("level sets are extracted from 2D fields")
    v = f.values.real
    n = f.grid.samples_per_axis
    ax = f.grid.axis()
    pos = v > 0.0

    # Each contour vertex sits on a grid edge; identify edges by
    # (j, i, horizontal?) of their lower-left node so stitching is exact.
    segments: list[tuple[tuple, tuple]] = []
    points: dict[tuple, tuple] = {}

    def edge_key(j, i, horizontal):
        return (j, i, horizontal)

    for j in range(n - 1):
        for i in range(n - 1):
            p00, p10 = pos[j, i], pos[j, i + 1]
            p01, p11 = pos[j + 1, i], pos[j + 1, i + 1]
            case = (p00, p10, p11, p01)
            if case == (True, True, True, True) or case == (False, False, False, False):
                continue
            # Crossing points on the four cell edges.
            crossings = {}
            if p00 != p10:
                key = edge_key(j, i, True)
                crossings["b"] = key
                points[key] = _edge_point(ax, i, j, i + 1, j, v[j, i], v[j, i + 1])
            if p01 != p11:
                key = edge_key(j + 1, i, True)
                crossings["t"] = key
                points[key] = _edge_point(ax, i, j + 1, i + 1, j + 1, v[j + 1, i], v[j + 1, i + 1])
            if p00 != p01:
                key = edge_key(j, i, False)
                crossings["l"] = key
                points[key] = _edge_point(ax, i, j, i, j + 1, v[j, i], v[j + 1, i])
            if p10 != p11:
                key = edge_key(j, i + 1, False)
                crossings["r"] = key
                points[key] = _edge_point(ax, i + 1, j, i + 1, j + 1, v[j, i + 1], v[j + 1, i + 1])

            sides = sorted(crossings)
            if len(sides) == 2:
                a, b = sides
                segments.append((crossings[a], crossings[b]))
            elif len(sides) == 4:
                # Saddle: pair edges according to the center-average sign.
                center_pos = (v[j, i] + v[j, i + 1] + v[j + 1, i] + v[j + 1, i + 1]) / 4.0 > 0.0
                if center_pos == p00:
                    segments.append((crossings["l"], crossings["t"]))
                    segments.append((crossings["b"], crossings["r"]))
                else:
                    segments.append((crossings["l"], crossings["b"]))
                    segments.append((crossings["t"], crossings["r"]))

    # Stitch segments into chains via shared edge keys.
    adj: dict[tuple, list[tuple]] = {}
    for a, b in segments:
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)

    unused = {tuple(sorted(s)) for s in segments}
    polylines: list[np.ndarray] = []
    closed_flags: list[bool] = []

    def next_key(cur, prev):
        for nb in adj[cur]:
            key = tuple(sorted((cur, nb)))
            if key in unused:
                return nb
        return None

    # Open chains first (start at degree-1 keys), then remaining loops.
    starts = [kk for kk, nbs in adj.items() if len(nbs) == 1]
    for start in starts + list(adj):
        if not any(tuple(sorted((start, nb))) in unused for nb in adj[start]):
            continue
        chain = [start]
        cur, prev = start, None
        while True:
            nxt = next_key(cur, prev)
            if nxt is None:
                break
            unused.discard(tuple(sorted((cur, nxt))))
            chain.append(nxt)
            prev, cur = cur, nxt
            if cur == start:
                break
        closed = len(chain) > 2 and chain[0] == chain[-1]
        coords = np.array([points[kk] for kk in chain])
        if closed:
            coords = coords[:-1]
        if len(coords) >= 2:
            polylines.append(coords)
            closed_flags.append(closed)

    return LevelSet(polylines=polylines, closed=closed_flags)


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------

def rel_l2_error(a: Field, b: Field) -> float:
    """Relative l2 difference ||a - b|| / ||b|| over grid nodes (complex)."""
    if a.grid != b.grid:
        raise GridMismatchError("fields live on different grids")
    denom = np.linalg.norm(b.values)
    if denom == 0.0:
        raise ValueError("reference field is identically zero")
    return float(np.linalg.norm(a.values - b.values) / denom)


def _resample(poly: np.ndarray, closed: bool, step: float) -> np.ndarray:
    pts = np.vstack([poly, poly[:1]]) if closed else poly
    out = [pts[0]]
    for a, b in zip(pts[:-1], pts[1:]):
        seg = np.linalg.norm(b - a)
        pieces = max(1, int(np.ceil(seg / step)))
        for t in range(1, pieces + 1):
            out.append(a + (b - a) * t / pieces)
    return np.array(out)


def _segments(ls: LevelSet) -> tuple[np.ndarray, np.ndarray]:
    starts, ends = [], []
    for poly, closed in zip(ls.polylines, ls.closed):
        pts = np.vstack([poly, poly[:1]]) if closed else poly
        starts.append(pts[:-1])
        ends.append(pts[1:])
    return np.vstack(starts), np.vstack(ends)


def _points_to_segments(pts: np.ndarray, seg_a: np.ndarray, seg_b: np.ndarray) -> np.ndarray:
    # Distance from each point to the nearest segment, chunked over points.
    d = seg_b - seg_a
    len2 = np.maximum(np.einsum("ij,ij->i", d, d), 1e-300)
    out = np.empty(len(pts))
    chunk = max(1, int(2e6 / max(len(seg_a), 1)))
    for lo in range(0, len(pts), chunk):
        p = pts[lo:lo + chunk]
        ap = p[:, None, :] - seg_a[None, :, :]
        t = np.clip(np.einsum("psd,sd->ps", ap, d) / len2, 0.0, 1.0)
        closest = seg_a[None, :, :] + t[:, :, None] * d[None, :, :]
        dist = np.linalg.norm(p[:, None, :] - closest, axis=2)
        out[lo:lo + chunk] = dist.min(axis=1)
    return out


def nodal_distance(A: LevelSet, B: LevelSet, resample_step: float | None = None) -> float:
    """Symmetric mean distance between two contour sets.

    Each side is densely resampled and measured against the other side's
    segments; the two directed means are averaged.
    """
    if A.is_empty or B.is_empty:
        raise ValueError("nodal_distance needs nonempty level sets")
    if resample_step is None:
        all_pts = np.vstack([p for ls in (A, B) for p in ls.polylines])
        span = np.ptp(all_pts, axis=0).max()
        resample_step = max(span / 2000.0, 1e-12)

    a_pts = np.vstack([_resample(p, c, resample_step) for p, c in zip(A.polylines, A.closed)])
    b_pts = np.vstack([_resample(p, c, resample_step) for p, c in zip(B.polylines, B.closed)])
    b_seg = _segments(B)
    a_seg = _segments(A)
    d_ab = _points_to_segments(a_pts, *b_seg).mean()
    d_ba = _points_to_segments(b_pts, *a_seg).mean()
    return float((d_ab + d_ba) / 2.0)


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

def _diverging_rgb(t: np.ndarray) -> np.ndarray:
    """Blue (0) -> white (1/2) -> red (1) colormap; t clipped to [0, 1]."""
    t = np.clip(t, 0.0, 1.0)
    low = t <= 0.5
    s = np.where(low, 2.0 * t, 2.0 * (t - 0.5))
    r = np.where(low, 255.0 * s, 255.0)
    g = np.where(low, 255.0 * s, 255.0 * (1.0 - s))
    b = np.where(low, 255.0, 255.0 * (1.0 - s))
    return np.stack([r, g, b], axis=-1).astype(np.uint8)


def _write_png(path, rgb: np.ndarray) -> None:
    from PIL import Image

    Image.fromarray(rgb, mode="RGB").save(path, format="PNG")


def render_heatmap(f: Field, vmin: float, vmax: float, path=None) -> np.ndarray:
    """Diverging heatmap of Re f clipped to [vmin, vmax]; returns the RGB array.

    Row 0 of the raster is the top of the plot (largest x2).
    """
    if vmin >= vmax:
        raise ValueError("vmin must be below vmax")
    if f.grid.d != 2:
        raise ValueError("heatmaps render 2D fields")
    t = (f.values.real - vmin) / (vmax - vmin)
    rgb = _diverging_rgb(t[::-1, :])
    if path is not None:
        _write_png(path, rgb)
    return rgb


def render_mollweide(
    g: HerglotzDensity, vmin: float, vmax: float, part: str = "real",
    path=None, width: int = 720,
) -> np.ndarray:
    """Raster of a density in Mollweide coordinates (nearest-center fill).

    Pixels inside the ellipse take the value of the nearest triangle center
    in map coordinates; the outside stays white.
    """
    if vmin >= vmax:
        raise ValueError("vmin must be below vmax")
    if part not in ("real", "imag"):
        raise ValueError("part must be 'real' or 'imag'")
    from scipy.spatial import cKDTree

    k = g.mesh.k
    uv = mollweide_many(g.mesh.centers / k)
    vals = g.values.real if part == "real" else g.values.imag

    height = width // 2
    umax, vmax_map = 2.0 * np.sqrt(2.0), np.sqrt(2.0)
    us = (np.arange(width) + 0.5) / width * 2.0 * umax - umax
    vs = vmax_map - (np.arange(height) + 0.5) / height * 2.0 * vmax_map
    U, V = np.meshgrid(us, vs)
    inside = (U / umax) ** 2 + (V / vmax_map) ** 2 <= 1.0

    rgb = np.full((height, width, 3), 255, dtype=np.uint8)
    if np.any(inside):
        tree = cKDTree(uv)
        _, idx = tree.query(np.column_stack([U[inside], V[inside]]))
        t = (vals[idx] - vmin) / (vmax - vmin)
        rgb[inside] = _diverging_rgb(t)
    if path is not None:
        _write_png(path, rgb)
    return rgb


# ---------------------------------------------------------------------------
# Level-set text export
# ---------------------------------------------------------------------------

def write_level_set(path, ls: LevelSet) -> None:
    """One polyline per line: 'closed|open' flag then x,y pairs."""
    with open(path, "w") as fh:
        for poly, closed in zip(ls.polylines, ls.closed):
            flag = "closed" if closed else "open"
            coords = " ".join(f"{p[0]:.17g},{p[1]:.17g}" for p in poly)
            fh.write(f"{flag} {coords}\n")


def read_level_set(path) -> LevelSet:
    polylines, closed = [], []
    with open(path) as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            closed.append(parts[0] == "closed")
            pts = np.array([[float(x) for x in tok.split(",")] for tok in parts[1:]])
            polylines.append(pts)
    return LevelSet(polylines=polylines, closed=closed)
