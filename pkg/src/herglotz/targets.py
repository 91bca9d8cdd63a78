"""Target functions: tetrahedron indicator combination, bitmap patterns,
and analytic Gaussians for testing.

The tetrahedron target f = |T| chi_B - |B| chi_T has nodal set equal to the
tetrahedron boundary and integrates to zero, so its transform vanishes at
the origin like every wave field's.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .grid import Field, Grid


@dataclass(frozen=True)
class TetraSpec:
    """Regular tetrahedron: circumscribing sphere radius and center."""

    circumradius: float
    center: np.ndarray = dc_field(default_factory=lambda: np.zeros(3))

    def vertices(self) -> np.ndarray:
        """Vertices with one on the +x3 axis, center of mass at `center`."""
        r = self.circumradius
        base_z = -r / 3.0
        rho = r * 2.0 * np.sqrt(2.0) / 3.0
        angs = np.deg2rad([90.0, 210.0, 330.0])
        verts = np.array(
            [[0.0, 0.0, r]]
            + [[rho * np.cos(a), rho * np.sin(a), base_z] for a in angs]
        )
        return verts + np.asarray(self.center)

    def volume(self) -> float:
        return 8.0 * self.circumradius ** 3 / (9.0 * np.sqrt(3.0))


def _tetra_face_planes(verts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Outward normals and offsets of the four faces; inside means
    # n . x <= offset for every face.
    center = verts.mean(axis=0)
    faces = [(1, 2, 3), (0, 2, 3), (0, 1, 3), (0, 1, 2)]
    normals, offsets = [], []
    for fa in faces:
        a, b, c = verts[fa[0]], verts[fa[1]], verts[fa[2]]
        n = np.cross(b - a, c - a)
        if np.dot(n, center - a) > 0:
            n = -n
        n = n / np.linalg.norm(n)
        normals.append(n)
        offsets.append(np.dot(n, a))
    return np.array(normals), np.array(offsets)


def tetra_inside(spec: TetraSpec, points: np.ndarray) -> np.ndarray:
    """Boolean mask of points inside the (closed) tetrahedron."""
    normals, offsets = _tetra_face_planes(spec.vertices())
    d = points @ normals.T - offsets
    return np.all(d <= 0.0, axis=-1)


def tetra_target(spec: TetraSpec, grid: Grid) -> Field:
    """Sample f = |T| chi_{B(0,r)} - |B(0,r)| chi_T pointwise on a 3D grid."""
    if grid.d != 3:
        raise ValueError("tetra target needs a 3D grid")
    if grid.half_extent < spec.circumradius - 1e-12:
        raise ValueError("grid must span the circumscribing ball")
    r = spec.circumradius
    vol_t = spec.volume()
    vol_b = 4.0 / 3.0 * np.pi * r ** 3

    X1, X2, X3 = grid.coord_arrays()
    c = np.asarray(spec.center)
    rad2 = (X1 - c[0]) ** 2 + (X2 - c[1]) ** 2 + (X3 - c[2]) ** 2
    in_ball = rad2 <= r * r

    pts = np.stack([X1, X2, X3], axis=-1)
    in_tet = tetra_inside(spec, pts)

    vals = vol_t * in_ball.astype(float) - vol_b * in_tet.astype(float)
    return Field(grid=grid, values=vals.astype(complex))


def tetra_section(spec: TetraSpec, x3: float, samples: int = 400) -> Field:
    """2D indicator field (+1 inside T, -1 outside) of the slice at height x3.

    Marching squares of this field recovers the tetrahedron cross-section
    boundary; used as the section oracle in comparisons.
    """
    g = Grid(half_extent=spec.circumradius, samples_per_axis=samples, d=2)
    X1, X2 = g.coord_arrays()
    pts = np.stack([X1, X2, np.full_like(X1, x3)], axis=-1)
    inside = tetra_inside(spec, pts)
    return Field(grid=g, values=np.where(inside, 1.0, -1.0).astype(complex))


def bitmap_target(image: np.ndarray, physical_width: float, grid: Grid) -> Field:
    """Map a binary raster onto a centered square: +1 foreground, -1 elsewhere.

    Nearest-neighbor sampling; grid nodes outside the square get -1.
    Grayscale input is thresholded at 50% of its full scale.
    """
    img = np.asarray(image)
    if img.size == 0:
        raise ValueError("bitmap image is empty")
    if grid.d != 2:
        raise ValueError("bitmap target needs a 2D grid")
    if physical_width > 2.0 * grid.half_extent + 1e-12:
        raise ValueError("physical width exceeds the grid extent")
    if img.dtype != bool:
        scale = img.max() if img.max() > 1 else 1.0
        img = img.astype(float) > 0.5 * scale

    rows, cols = img.shape
    X1, X2 = grid.coord_arrays()
    half = physical_width / 2.0
    # Raster row 0 is the top of the image (decreasing x2).
    cx = np.floor((X1 + half) / physical_width * cols).astype(int)
    cy = np.floor((half - X2) / physical_width * rows).astype(int)
    in_square = (np.abs(X1) <= half) & (np.abs(X2) <= half)
    cx = np.clip(cx, 0, cols - 1)
    cy = np.clip(cy, 0, rows - 1)
    fg = img[cy, cx] & in_square
    return Field(grid=grid, values=np.where(fg, 1.0, -1.0).astype(complex))


def gaussian_target(sigma: float, center, grid: Grid) -> Field:
    """Sample exp(-|x - center|^2 / (2 sigma^2)); closed-form spectrum."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    c = np.asarray(center, dtype=float)
    coords = grid.coord_arrays()
    r2 = sum((X - c[a]) ** 2 for a, X in enumerate(coords))
    return Field(grid=grid, values=np.exp(-r2 / (2.0 * sigma * sigma)).astype(complex))


def field_integral(f: Field) -> complex:
    """Grid-sum integral of a field (zero-mean check utility)."""
    return complex(np.sum(f.values) * f.grid.spacing ** f.grid.d)


def u_logo_raster(size: int = 300) -> np.ndarray:
    """A block-letter 'U' raster (boolean, True = foreground).

    Two vertical bars joined by a rounded bottom, drawn in a unit square;
    topologically equivalent to any U-shaped logo.
    """
    if size < 16:
        raise ValueError("raster size too small")
    ax = (np.arange(size) + 0.5) / size
    X, Yimg = np.meshgrid(ax, ax)
    Y = 1.0 - Yimg  # row 0 is the top
    bar_w = 0.22
    left = (X >= 0.10) & (X <= 0.10 + bar_w) & (Y >= 0.38) & (Y <= 0.92)
    right = (X >= 0.90 - bar_w) & (X <= 0.90) & (Y >= 0.38) & (Y <= 0.92)
    # Rounded bottom: annulus between outer and inner radii, lower half only.
    cx, cy = 0.5, 0.38
    rr = np.sqrt((X - cx) ** 2 + (Y - cy) ** 2)
    outer, inner = 0.40, 0.40 - bar_w
    bowl = (rr <= outer) & (rr >= inner) & (Y <= cy)
    return left | right | bowl


def read_pgm(path) -> np.ndarray:
    """Read a P2 (ASCII) or P5 (binary) PGM raster as a 2D uint array."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:2] not in (b"P2", b"P5"):
        raise ValueError("not a PGM file")
    binary = data[:2] == b"P5"

    # Tokenize the header, skipping comments.
    tokens: list[bytes] = []
    pos = 2
    while len(tokens) < 3:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    width, height, maxval = (int(t) for t in tokens)
    pos += 1  # single whitespace after maxval
    if binary:
        dtype = np.uint8 if maxval < 256 else ">u2"
        img = np.frombuffer(data, dtype=dtype, offset=pos, count=width * height)
    else:
        img = np.array(data[pos:].split()[: width * height], dtype=int)
    return img.reshape(height, width)


def read_raster(path) -> np.ndarray:
    """Read a PGM or PNG raster into a 2D grayscale array."""
    path = str(path)
    if path.lower().endswith((".pgm", ".ppm")):
        return read_pgm(path)
    from PIL import Image

    with Image.open(path) as im:
        return np.asarray(im.convert("L"))
