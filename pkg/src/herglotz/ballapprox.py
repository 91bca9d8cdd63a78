"""Best approximation on a ball by spherical wave superpositions.

The modal route projects a target onto the span of u_nm = j_n(k|x|) Y_nm
over the ball B(0,R); the inner products reduce to spherical-harmonic
moments of the target's spectrum on the sphere |xi| = k, so one DFT plus
sphere quadrature replaces volume integrals.  The asymptotic route skips
the modal sum entirely and samples the spectrum on the sphere directly,
trading a known overall scale factor for simplicity; comparisons against
it should use zero level sets, which ignore scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import OutOfDomainError
from .fieldeval import HerglotzDensity
from .grid import Spectrum, interp_spectrum
from .specfun import radial_bessel_norm, sph_bessel_j, sph_harm_table
from .spheremesh import SphereMesh


@dataclass(frozen=True)
class ModalCoeffs:
    """Inner products and basis norms of the modal projection up to degree N.

    inner[i] = <u_nm, f>_{L2(B(0,R))} and norms[i] = ||u_nm||^2 for the
    (n, m) pair at flat index i = n^2 + n + m.  Norms depend on n only;
    every m of a degree shares the value by construction.
    """

    N: int
    inner: np.ndarray
    norms: np.ndarray
    R: float
    k: float

    def __post_init__(self) -> None:
        count = (self.N + 1) ** 2
        if self.inner.shape != (count,) or self.norms.shape != (count,):
            raise ValueError("coefficient arrays must have (N+1)^2 entries")
        if np.any(self.norms <= 0):
            raise ValueError("basis norms must be positive")


def _check_sphere_coverage(F: Spectrum, k: float) -> None:
    if F.grid.axis()[-1] < k:
        raise OutOfDomainError("sphere of radius k outside the spectrum grid hull")


def spherical_harmonic_moments(F: Spectrum, mesh: SphereMesh, N: int) -> np.ndarray:
    """Moments <Y_nm(./k), f_hat>_{L2(S(0,k))} for all n <= N, |m| <= n.

    Quadrature of conj(Y_nm) times the interpolated spectrum over the mesh;
    returns a flat array ordered by n then m.
    """
    if F.grid.d != 3:
        raise ValueError("moments need a 3D spectrum")
    _check_sphere_coverage(F, mesh.k)
    fhat = interp_spectrum(F, mesh.centers)
    ytab = sph_harm_table(N, mesh.centers / mesh.k)
    return np.conj(ytab) @ (fhat * mesh.areas)


def modal_inner_products(moments: np.ndarray, N: int, k: float, R: float) -> ModalCoeffs:
    """Convert spectral moments to modal inner products and basis norms.

    inner_nm = i^n moments_nm / (4 pi k^2); norms_nm is the radial integral
    of r^2 j_n(kr)^2 over [0, R], shared across m.  The i^n power follows
    from the plane-wave expansion identity
    integral e^{i x.z} Y_nm(z/k) dS(z) = 4 pi k^2 i^n j_n(k|x|) Y_nm(x/|x|),
    pinned here by the self-projection check (a target equal to a basis
    function must come back with ratio +1, not (-1)^n).
    """
    if moments.shape != ((N + 1) ** 2,):
        raise ValueError("moments must have (N+1)^2 entries")
    inner = np.empty_like(moments, dtype=complex)
    norms = np.empty((N + 1) ** 2)
    for n in range(N + 1):
        sl = slice(n * n, (n + 1) ** 2)
        inner[sl] = moments[sl] * (1j ** n) / (4.0 * np.pi * k * k)
        norms[sl] = radial_bessel_norm(n, k, R)
    return ModalCoeffs(N=N, inner=inner, norms=norms, R=R, k=k)


def project_ball(c: ModalCoeffs, points) -> np.ndarray:
    """Evaluate the modal projection sum  sum (inner/norm) j_n(k|x|) Y_nm(x/|x|)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    r = np.linalg.norm(pts, axis=1)
    dirs = np.where(r[:, None] > 1e-300, pts / np.maximum(r, 1e-300)[:, None], [0.0, 0.0, 1.0])
    ytab = sph_harm_table(c.N, dirs)
    ratios = c.inner / c.norms
    out = np.zeros(pts.shape[0], dtype=complex)
    for n in range(c.N + 1):
        sl = slice(n * n, (n + 1) ** 2)
        radial = sph_bessel_j(n, c.k * r)
        out += radial * (ratios[sl] @ ytab[sl])
    return out


def density_from_modal(c: ModalCoeffs, mesh: SphereMesh) -> HerglotzDensity:
    """Sphere density of the modal projection at the mesh triangle centers.

    g(z) = (4 pi k^2)^{-2} sum_nm [moment_nm / norm_nm] Y_nm(z/k), where
    moment_nm = 4 pi k^2 inner_nm / i^n inverts `modal_inner_products`.
    """
    k = c.k
    if abs(mesh.k - k) > 1e-9 * k:
        raise ValueError("mesh wavenumber does not match the coefficients")
    ytab = sph_harm_table(c.N, mesh.centers / k)
    weights = np.empty_like(c.inner)
    for n in range(c.N + 1):
        sl = slice(n * n, (n + 1) ** 2)
        moments = c.inner[sl] * (4.0 * np.pi * k * k) / (1j ** n)
        weights[sl] = moments / c.norms[sl]
    vals = (weights @ ytab) / (4.0 * np.pi * k * k) ** 2
    return HerglotzDensity(mesh=mesh, values=vals)


def asymptotic_density(F: Spectrum, mesh: SphereMesh) -> HerglotzDensity:
    """Large-R pipeline density: sample the spectrum on the sphere directly.

    g(center) = interpolated f_hat at the center.  The resulting field is
    the modal projection's limit up to an overall scale, so downstream
    comparisons use zero level sets.
    """
    if F.grid.d != 3:
        raise ValueError("asymptotic density needs a 3D spectrum")
    _check_sphere_coverage(F, mesh.k)
    vals = interp_spectrum(F, mesh.centers)
    return HerglotzDensity(mesh=mesh, values=vals)


def write_modal_csv(path, c: ModalCoeffs) -> None:
    """CSV rows (n, m, Re inner, Im inner, norm)."""
    with open(path, "w") as fh:
        fh.write("n,m,re_inner,im_inner,norm\n")
        i = 0
        for n in range(c.N + 1):
            for m in range(-n, n + 1):
                fh.write(f"{n},{m},{c.inner[i].real:.17g},{c.inner[i].imag:.17g},{c.norms[i]:.17g}\n")
                i += 1
