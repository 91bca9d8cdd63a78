"""Evaluation of plane-wave superpositions from a sphere-sampled density.

A density g on the mesh of S(0,k) generates the field

    u(x) = sum_c g_c * exp(i x . z_c) * area_c,

a finite plane-wave superposition solving Helmholtz to quadrature accuracy.
Direct summation throughout (no fast scheme); tensor-product grids get a
matrix-product fast path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Field, Grid
from .spheremesh import SphereMesh

_CHUNK = 2048
_WEIGHT_FLOOR_FACTOR = 1e-6  # floor on |z_3| in the weighted density norm


@dataclass(frozen=True)
class HerglotzDensity:
    """Complex density sampled at the triangle centers of a SphereMesh."""

    mesh: SphereMesh
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.values.shape != (self.mesh.triangle_count,):
            raise ValueError("density value count must equal the triangle count")

    def weighted_norm(self) -> float:
        """Discrete weighted L^2 norm sum |g|^2/|z_3| area (floored near z_3=0)."""
        z3 = np.abs(self.mesh.centers[:, 2])
        floor = _WEIGHT_FLOOR_FACTOR * self.mesh.k
        return float(np.sum(np.abs(self.values) ** 2 / np.maximum(z3, floor) * self.mesh.areas))


@dataclass(frozen=True)
class BoundarySample:
    """A transducer sample point: position, unit outward normal, impedance."""

    position: np.ndarray
    normal: np.ndarray
    impedance: complex

    def __post_init__(self) -> None:
        if abs(np.linalg.norm(self.normal) - 1.0) > 1e-9:
            raise ValueError("boundary normal must be a unit vector")


def eval_herglotz(g: HerglotzDensity, points) -> np.ndarray:
    """Field values u(x) at arbitrary 3D points (chunked direct sum)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    weights = g.values * g.mesh.areas
    centers = g.mesh.centers
    out = np.empty(pts.shape[0], dtype=complex)
    for lo in range(0, pts.shape[0], _CHUNK):
        chunk = pts[lo:lo + _CHUNK]
        out[lo:lo + _CHUNK] = np.exp(1j * (chunk @ centers.T)) @ weights
    return out


def eval_herglotz_grid(g: HerglotzDensity, grid: Grid, x3: float = 0.0) -> Field:
    """Field on a 2D tensor grid in the plane at height x3 (fast path).

    Equivalent to eval_herglotz at the grid nodes but computed as a single
    matrix product over the separable phase factors.
    """
    if grid.d != 2:
        raise ValueError("eval_herglotz_grid expects a 2D grid")
    ax = grid.axis()
    centers = g.mesh.centers
    w = g.values * g.mesh.areas * np.exp(1j * x3 * centers[:, 2])
    e1 = np.exp(1j * np.outer(ax, centers[:, 0]))
    e2 = np.exp(1j * np.outer(ax, centers[:, 1]))
    # values[i2, i1] = sum_c e2[i2,c] w[c] e1[i1,c]
    vals = (e2 * w) @ e1.T
    return Field(grid=grid, values=vals)


def eval_herglotz_volume(g: HerglotzDensity, grid: Grid) -> np.ndarray:
    """Field on a 3D tensor grid, shape (N, N, N) indexed [i3, i2, i1]."""
    if grid.d != 3:
        raise ValueError("eval_herglotz_volume expects a 3D grid")
    ax = grid.axis()
    centers = g.mesh.centers
    base = g.values * g.mesh.areas
    e1 = np.exp(1j * np.outer(ax, centers[:, 0]))
    e2 = np.exp(1j * np.outer(ax, centers[:, 1]))
    e3 = np.exp(1j * np.outer(ax, centers[:, 2]))
    n = grid.samples_per_axis
    out = np.empty((n, n, n), dtype=complex)
    for i3 in range(n):
        out[i3] = (e2 * (base * e3[i3])) @ e1.T
    return out


def grad_herglotz(g: HerglotzDensity, points) -> np.ndarray:
    """Gradients grad u(x) = sum_c g_c (i z_c) e^{i x.z_c} area_c, shape (P, 3)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    centers = g.mesh.centers
    weights = g.values * g.mesh.areas
    out = np.empty((pts.shape[0], 3), dtype=complex)
    for lo in range(0, pts.shape[0], _CHUNK):
        chunk = pts[lo:lo + _CHUNK]
        phases = np.exp(1j * (chunk @ centers.T)) * weights
        out[lo:lo + _CHUNK] = 1j * (phases @ centers)
    return out


def boundary_excitation(g: HerglotzDensity, samples: list[BoundarySample]) -> np.ndarray:
    """Transducer excitation phi = n . grad u + i k alpha u at each sample."""
    pts = np.array([s.position for s in samples], dtype=float)
    normals = np.array([s.normal for s in samples], dtype=float)
    alphas = np.array([s.impedance for s in samples], dtype=complex)
    u = eval_herglotz(g, pts)
    grad = grad_herglotz(g, pts)
    return np.einsum("ij,ij->i", normals.astype(complex), grad) + 1j * g.mesh.k * alphas * u


def helmholtz_residual(g: HerglotzDensity, grid: Grid) -> float:
    """Normalized 7-point finite-difference Helmholtz residual.

    Returns max over interior nodes of |L_h u + k^2 u| / (k^2 max|u|) where
    L_h is the standard 7-point Laplacian; O((k h)^2) for h well below the
    wavelength.  Requires grid spacing h <= lambda/8.
    """
    if grid.d != 3:
        raise ValueError("helmholtz_residual expects a 3D grid")
    k = g.mesh.k
    h = grid.spacing
    if h > (2.0 * np.pi / k) / 8.0 + 1e-12:
        raise ValueError("grid spacing must be at most lambda/8")
    u = eval_herglotz_volume(g, grid)
    umax = np.max(np.abs(u))
    if umax == 0.0:
        return 0.0
    c = u[1:-1, 1:-1, 1:-1]
    lap = (
        u[2:, 1:-1, 1:-1] + u[:-2, 1:-1, 1:-1]
        + u[1:-1, 2:, 1:-1] + u[1:-1, :-2, 1:-1]
        + u[1:-1, 1:-1, 2:] + u[1:-1, 1:-1, :-2]
        - 6.0 * c
    ) / (h * h)
    res = np.max(np.abs(lap + k * k * c))
    return float(res / (k * k * umax))


def write_density_csv(path, g: HerglotzDensity) -> None:
    """CSV rows (z1, z2, z3, Re g, Im g, area); enough to re-run quadrature."""
    with open(path, "w") as fh:
        fh.write("z1,z2,z3,re_g,im_g,area\n")
        for c, v, a in zip(g.mesh.centers, g.values, g.mesh.areas):
            fh.write(f"{c[0]:.17g},{c[1]:.17g},{c[2]:.17g},{v.real:.17g},{v.imag:.17g},{a:.17g}\n")


def read_density_csv(path) -> HerglotzDensity:
    """Rebuild a quadrature-only density from `write_density_csv` output."""
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    data = np.atleast_2d(data)
    centers = data[:, 0:3]
    values = data[:, 3] + 1j * data[:, 4]
    areas = data[:, 5]
    k = float(np.mean(np.linalg.norm(centers, axis=1)))
    mesh = SphereMesh.from_quadrature(k, centers, areas)
    return HerglotzDensity(mesh=mesh, values=values)
