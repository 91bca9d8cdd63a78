"""Uniform grids, the continuously-scaled DFT, and spectrum interpolation.

Conventions used everywhere in the package:

* A spatial grid with half extent L and N samples per axis (N even) has
  nodes x_j = (j - N/2) * (2L/N); zero is always a node.
* The dual frequency grid has spacing pi/L and half extent N*pi/(2L),
  with nodes arranged the same centered way.
* The forward transform approximates f_hat(xi) = integral f(x) e^{-i x.xi} dx
  (the DFT times spacing^d); the inverse carries the (2 pi)^{-d}.  With this
  scaling, Parseval reads sum|f|^2 dx^d = sum|F|^2 dxi^d / (2 pi)^d.
* Field/Spectrum values are stored as ndarrays of shape (N,)*d whose LAST
  axis is x_1, so the C-order flat layout runs x_1 fastest.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import OutOfDomainError

_MAGIC = b"HWF1"
_HEADER = struct.Struct("<4sIId")  # magic, d, samples, half_extent
_HEADER_SIZE = 32
_KIND_FIELD = 0
_KIND_SPECTRUM = 1


@dataclass(frozen=True)
class Grid:
    """Uniform centered grid on [-half_extent, half_extent]^d."""

    half_extent: float
    samples_per_axis: int
    d: int

    def __post_init__(self) -> None:
        if self.half_extent <= 0:
            raise ValueError("half_extent must be positive")
        if self.samples_per_axis < 8 or self.samples_per_axis % 2:
            raise ValueError("samples_per_axis must be even and >= 8")
        if self.d not in (2, 3):
            raise ValueError("only 2D and 3D grids are supported")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_extent / self.samples_per_axis

    def axis(self) -> np.ndarray:
        """Node coordinates along one axis."""
        n = self.samples_per_axis
        return (np.arange(n) - n // 2) * self.spacing

    def coord_arrays(self) -> tuple[np.ndarray, ...]:
        """Broadcastable (X1, X2[, X3]) arrays matching the value layout."""
        ax = self.axis()
        mesh = np.meshgrid(*([ax] * self.d), indexing="ij")
        return tuple(mesh[::-1])

    def dual(self) -> "Grid":
        """The frequency grid of this spatial grid (and vice versa)."""
        n = self.samples_per_axis
        return Grid(half_extent=n * np.pi / (2.0 * self.half_extent), samples_per_axis=n, d=self.d)

    def shape(self) -> tuple[int, ...]:
        return (self.samples_per_axis,) * self.d


@dataclass(frozen=True)
class Field:
    """Complex samples of a spatial function on a Grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.values.shape != self.grid.shape():
            raise ValueError(f"value shape {self.values.shape} != grid shape {self.grid.shape()}")


@dataclass(frozen=True)
class Spectrum:
    """Complex samples of a Fourier transform on the dual frequency grid."""

    grid: Grid  # the frequency-domain grid
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.values.shape != self.grid.shape():
            raise ValueError(f"value shape {self.values.shape} != grid shape {self.grid.shape()}")


def dft_forward(f: Field) -> Spectrum:
    """Approximate the continuous Fourier transform (kernel e^{-i x.xi})."""
    v = np.fft.fftshift(np.fft.fftn(np.fft.ifftshift(f.values)))
    v = v * f.grid.spacing ** f.grid.d
    return Spectrum(grid=f.grid.dual(), values=v)


def pad_field(f: Field, factor: int) -> Field:
    """Zero-extend a field onto a grid `factor` times wider (same spacing).

    The dual grid of the padded field has `factor` times finer frequency
    spacing, so its DFT samples the same underlying transform more densely;
    useful before interpolating a spectrum at off-grid points.
    """
    if factor < 1:
        raise ValueError("pad factor must be >= 1")
    if factor == 1:
        return f
    n = f.grid.samples_per_axis
    big = Grid(half_extent=f.grid.half_extent * factor, samples_per_axis=n * factor, d=f.grid.d)
    values = np.zeros(big.shape(), dtype=complex)
    lo = (n * factor - n) // 2
    sl = (slice(lo, lo + n),) * f.grid.d
    values[sl] = f.values
    return Field(grid=big, values=values)


def dft_inverse(F: Spectrum) -> Field:
    """Inverse of `dft_forward`; exact round trip on the same grid."""
    spatial = F.grid.dual()
    v = np.fft.fftshift(np.fft.ifftn(np.fft.ifftshift(F.values)))
    v = v / spatial.spacing ** spatial.d
    return Field(grid=spatial, values=v)


def interp_spectrum(F: Spectrum, points: np.ndarray) -> np.ndarray:
    """Multilinear interpolation of a spectrum at off-grid frequency points.

    `points` is (P, d) with columns (xi_1, ..., xi_d); a single point may be
    passed as a length-d sequence.  Points outside the node hull raise
    OutOfDomainError.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    g = F.grid
    if pts.shape[1] != g.d:
        raise ValueError(f"points must have {g.d} columns")
    ax = g.axis()
    lo, hi = ax[0], ax[-1]
    if np.any(pts < lo) or np.any(pts > hi):
        raise OutOfDomainError("interpolation point outside the frequency grid hull")

    n = g.samples_per_axis
    # Fractional index along each axis; clamp so points exactly on the last
    # node use the final cell.
    frac = (pts - lo) / g.spacing
    i0 = np.minimum(frac.astype(int), n - 2)
    w = frac - i0

    out = np.zeros(pts.shape[0], dtype=complex)
    flat = F.values.reshape(-1)
    # Axis a of a point maps to array axis d-1-a (x_1 is the last axis).
    strides = np.array([n ** a for a in range(g.d)])  # stride of point-axis a
    base = (i0 * strides).sum(axis=1)
    for corner in range(2 ** g.d):
        offs = np.array([(corner >> a) & 1 for a in range(g.d)])
        weight = np.ones(pts.shape[0])
        for a in range(g.d):
            weight = weight * (w[:, a] if offs[a] else (1.0 - w[:, a]))
        idx = base + (offs * strides).sum()
        out += weight * flat[idx]
    return out


# ---------------------------------------------------------------------------
# Binary field I/O ("HWF1" format) and CSV export
# ---------------------------------------------------------------------------

def _write_array(path, grid: Grid, values: np.ndarray, kind: int) -> None:
    header = bytearray(_HEADER_SIZE)
    _HEADER.pack_into(header, 0, _MAGIC, grid.d, grid.samples_per_axis, grid.half_extent)
    header[_HEADER.size] = kind
    with open(path, "wb") as fh:
        fh.write(bytes(header))
        fh.write(np.ascontiguousarray(values.astype(np.complex64)).tobytes())


def _read_array(path) -> tuple[Grid, np.ndarray, int]:
    with open(path, "rb") as fh:
        header = fh.read(_HEADER_SIZE)
        if len(header) != _HEADER_SIZE:
            raise ValueError("truncated field file header")
        magic, d, n, half_extent = _HEADER.unpack_from(header, 0)
        if magic != _MAGIC:
            raise ValueError("bad magic; not an HWF1 field file")
        kind = header[_HEADER.size]
        raw = fh.read()
    grid = Grid(half_extent=half_extent, samples_per_axis=n, d=d)
    values = np.frombuffer(raw, dtype="<c8").reshape(grid.shape()).astype(complex)
    return grid, values, kind


def write_field(path, f: Field) -> None:
    _write_array(path, f.grid, f.values, _KIND_FIELD)


def write_spectrum(path, F: Spectrum) -> None:
    _write_array(path, F.grid, F.values, _KIND_SPECTRUM)


def read_field(path) -> Field:
    grid, values, kind = _read_array(path)
    if kind != _KIND_FIELD:
        raise ValueError("file holds a spectrum, not a field")
    return Field(grid=grid, values=values)


def read_spectrum(path) -> Spectrum:
    grid, values, kind = _read_array(path)
    if kind != _KIND_SPECTRUM:
        raise ValueError("file holds a field, not a spectrum")
    return Spectrum(grid=grid, values=values)


def write_slice_csv(path, f: Field) -> None:
    """CSV rows (x, y, Re, Im) for a 2D field."""
    if f.grid.d != 2:
        raise ValueError("CSV slice export is for 2D fields")
    ax = f.grid.axis()
    with open(path, "w") as fh:
        fh.write("x,y,re,im\n")
        for iy, y in enumerate(ax):
            row = f.values[iy]
            for ix, x in enumerate(ax):
                v = row[ix]
                fh.write(f"{x:.17g},{y:.17g},{v.real:.17g},{v.imag:.17g}\n")
