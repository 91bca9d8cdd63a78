"""Triangulated sphere S(0,k) with a midpoint quadrature rule.

The mesh backs every surface integral over the sphere of radius k: a
density sampled at triangle centers integrates as sum(g_c * area_c).
Also provides the equal-area Mollweide map used to display densities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull


@dataclass(frozen=True)
class SphereMesh:
    """Triangulation of S(0,k) with per-triangle quadrature data.

    vertices : (V, 3) points on the sphere of radius k
    triangles : (T, 3) vertex index triples, outward oriented
    centers : (T, 3) triangle centroids projected back onto the sphere
    areas : (T,) positive weights; flat-triangle areas rescaled so they
        total exactly 4 pi k^2, making quadrature of constants exact
    """

    k: float
    vertices: np.ndarray
    triangles: np.ndarray
    centers: np.ndarray
    areas: np.ndarray

    @property
    def triangle_count(self) -> int:
        return len(self.areas)

    @classmethod
    def from_quadrature(cls, k: float, centers: np.ndarray, areas: np.ndarray) -> "SphereMesh":
        """Rebuild a quadrature-only mesh (no connectivity), e.g. from a CSV."""
        centers = np.asarray(centers, dtype=float)
        areas = np.asarray(areas, dtype=float)
        return cls(
            k=float(k),
            vertices=np.zeros((0, 3)),
            triangles=np.zeros((0, 3), dtype=int),
            centers=centers,
            areas=areas,
        )

    def validate(self) -> None:
        k = self.k
        if len(self.vertices):
            vr = np.linalg.norm(self.vertices, axis=1)
            if np.max(np.abs(vr - k)) > 1e-9 * k:
                raise ValueError("mesh vertices not on the sphere of radius k")
        cr = np.linalg.norm(self.centers, axis=1)
        if np.max(np.abs(cr - k)) > 1e-9 * k:
            raise ValueError("triangle centers not on the sphere of radius k")
        if np.any(self.areas <= 0):
            raise ValueError("non-positive triangle area")


def _fibonacci_hemisphere(count: int) -> np.ndarray:
    # Spiral points covering z in (0, 1); golden-angle azimuth increments.
    golden = np.pi * (3.0 - np.sqrt(5.0))
    i = np.arange(count)
    z = (i + 0.5) / count
    rho = np.sqrt(1.0 - z * z)
    phi = i * golden
    return np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])


def build_sphere_mesh(k: float, target_triangle_count: int) -> SphereMesh:
    """Triangulate S(0,k) with roughly the requested number of triangles.

    Points come from an antipodally symmetric Fibonacci lattice (upper
    hemisphere spiral plus its reflection through the origin), so triangle
    centers pair up as (c, -c) with equal weights; densities satisfying
    g(-z) = conj(g(z)) then integrate to exactly real fields.  The convex
    hull of the points provides the (Delaunay) triangulation.
    """
    if k <= 0:
        raise ValueError("wavenumber must be positive")
    if target_triangle_count < 8:
        raise ValueError("target_triangle_count must be at least 8")

    # Hull of n points in convex position has 2n - 4 facets.
    half = max(4, int(round((target_triangle_count + 4) / 4)))
    upper = _fibonacci_hemisphere(half)
    pts = np.vstack([upper, -upper])

    hull = ConvexHull(pts)
    tris = hull.simplices.copy()

    # Orient every triangle outward (normal pointing away from the origin).
    v0, v1, v2 = pts[tris[:, 0]], pts[tris[:, 1]], pts[tris[:, 2]]
    normals = np.cross(v1 - v0, v2 - v0)
    flip = np.einsum("ij,ij->i", normals, v0 + v1 + v2) < 0
    tris[flip] = tris[flip][:, [0, 2, 1]]

    vertices = pts * k
    a, b, c = vertices[tris[:, 0]], vertices[tris[:, 1]], vertices[tris[:, 2]]
    centroids = (a + b + c) / 3.0
    centers = centroids * (k / np.linalg.norm(centroids, axis=1))[:, None]
    flat = 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)
    areas = flat * (4.0 * np.pi * k * k / flat.sum())

    mesh = SphereMesh(k=float(k), vertices=vertices, triangles=tris, centers=centers, areas=areas)
    mesh.validate()
    return mesh


def mollweide(direction) -> tuple[float, float]:
    """Equal-area Mollweide coordinates of a unit vector.

    Returns (u, v) with u in [-2 sqrt 2, 2 sqrt 2] (longitude axis) and
    v in [-sqrt 2, sqrt 2].  The auxiliary angle is solved by Newton
    iteration to 1e-10; the poles use the closed form.
    """
    d = np.asarray(direction, dtype=float)
    if abs(np.linalg.norm(d) - 1.0) > 1e-9:
        raise ValueError("direction must be a unit vector")
    lon = np.arctan2(d[1], d[0])
    lat = np.arcsin(np.clip(d[2], -1.0, 1.0))

    if abs(abs(lat) - np.pi / 2) < 1e-12:
        theta = np.copysign(np.pi / 2, lat)
    else:
        theta = lat
        target = np.pi * np.sin(lat)
        for _ in range(50):
            f = 2.0 * theta + np.sin(2.0 * theta) - target
            df = 2.0 + 2.0 * np.cos(2.0 * theta)
            step = f / df
            theta -= step
            if abs(step) < 1e-10:
                break
    u = 2.0 * np.sqrt(2.0) / np.pi * lon * np.cos(theta)
    v = np.sqrt(2.0) * np.sin(theta)
    return float(u), float(v)


def mollweide_many(directions: np.ndarray) -> np.ndarray:
    """Vectorized `mollweide` for an (n, 3) array of unit vectors."""
    d = np.asarray(directions, dtype=float)
    lon = np.arctan2(d[:, 1], d[:, 0])
    lat = np.arcsin(np.clip(d[:, 2], -1.0, 1.0))
    theta = lat.copy()
    target = np.pi * np.sin(lat)
    polar = np.abs(np.abs(lat) - np.pi / 2) < 1e-12
    for _ in range(50):
        f = 2.0 * theta + np.sin(2.0 * theta) - target
        df = np.maximum(2.0 + 2.0 * np.cos(2.0 * theta), 1e-12)
        step = np.where(polar, 0.0, f / df)
        theta -= step
        if np.max(np.abs(step)) < 1e-10:
            break
    theta = np.where(polar, np.copysign(np.pi / 2, lat), theta)
    u = 2.0 * np.sqrt(2.0) / np.pi * lon * np.cos(theta)
    v = np.sqrt(2.0) * np.sin(theta)
    return np.column_stack([u, v])


def write_off(mesh: SphereMesh, path) -> None:
    """Dump the mesh as a plain-text OFF file (debugging aid)."""
    with open(path, "w") as fh:
        fh.write("OFF\n")
        fh.write(f"{len(mesh.vertices)} {len(mesh.triangles)} 0\n")
        for v in mesh.vertices:
            fh.write(f"{v[0]:.17g} {v[1]:.17g} {v[2]:.17g}\n")
        for t in mesh.triangles:
            fh.write(f"3 {t[0]} {t[1]} {t[2]}\n")


def read_off(path) -> tuple[np.ndarray, np.ndarray]:
    """Read back an OFF file written by `write_off`."""
    with open(path) as fh:
        tokens = fh.read().split()
    if tokens[0] != "OFF":
        raise ValueError("not an OFF file")
    nv, nt = int(tokens[1]), int(tokens[2])
    data = np.array(tokens[4:4 + 3 * nv], dtype=float).reshape(nv, 3)
    rest = tokens[4 + 3 * nv:]
    tris = np.array(rest, dtype=int).reshape(nt, 4)[:, 1:]
    return data, tris
