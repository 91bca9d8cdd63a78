"""Special functions used throughout the package.

Spherical Bessel functions j_n, the cylindrical Bessel ratio J_1(t)/t and
orthonormal complex spherical harmonics Y_nm.  The harmonics use the
Condon-Shortley phase and are normalized so that

    integral_{S(0,1)} Y_nm conj(Y_n'm') dS = delta_nn' delta_mm',

which implies the conjugation symmetry Y_{n,-m} = (-1)^m conj(Y_{n,m}).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UnsupportedDegreeError

# Degrees above this are outside what any pipeline here needs.
MAX_DEGREE = 64

_UNIT_TOL = 1e-12


@dataclass(frozen=True)
class ModalIndex:
    """Degree/order pair (n, m) of a spherical harmonic, |m| <= n."""

    n: int
    m: int

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError(f"degree must be nonnegative, got n={self.n}")
        if abs(self.m) > self.n:
            raise ValueError(f"order |m|={abs(self.m)} exceeds degree n={self.n}")


def modal_indices(max_degree: int) -> list[ModalIndex]:
    """All (n, m) with n <= max_degree, ordered by n then m (ascending)."""
    return [ModalIndex(n, m) for n in range(max_degree + 1) for m in range(-n, n + 1)]


# ---------------------------------------------------------------------------
# Spherical Bessel functions
# ---------------------------------------------------------------------------

def _sph_j_series(n: int, t: np.ndarray) -> np.ndarray:
    # Small-argument Taylor series: t^n/(2n+1)!! * sum_s (-t^2/2)^s / (s! prod),
    # accurate to machine precision for t <= 1.
    acc = np.ones_like(t)
    term = np.ones_like(t)
    t2 = t * t
    for s in range(1, 14):
        term = term * (-t2 / 2.0) / (s * (2 * n + 2 * s + 1))
        acc = acc + term
    # t^n / (2n+1)!!
    lead = np.ones_like(t)
    for i in range(1, n + 1):
        lead = lead * t / (2 * i + 1)
    return lead * acc


def _sph_j_upward(n: int, t: np.ndarray) -> np.ndarray:
    # Stable for t >= n.  j_{l+1} = (2l+1)/t j_l - j_{l-1}.
    j0 = np.sin(t) / t
    if n == 0:
        return j0
    j1 = np.sin(t) / (t * t) - np.cos(t) / t
    if n == 1:
        return j1
    jm, jc = j0, j1
    for l in range(1, n):
        jm, jc = jc, (2 * l + 1) / t * jc - jm
    return jc


def _sph_j_downward(n: int, t: np.ndarray) -> np.ndarray:
    # Miller's algorithm: recurse down from a degree comfortably above n,
    # then normalize against j_0 = sin(t)/t.  Stable for t < n.
    start = n + int(np.sqrt(40.0 * (n + 1))) + 12
    jp = np.zeros_like(t)
    jc = np.full_like(t, 1e-35)
    target = np.zeros_like(t)
    for l in range(start, 0, -1):
        jm = (2 * l + 1) / t * jc - jp
        jp, jc = jc, jm
        if l - 1 == n:
            target = jc.copy()
    scale = (np.sin(t) / t) / jc
    return target * scale


def sph_bessel_j(n: int, t) -> np.ndarray | float:
    """Spherical Bessel function j_n(t) for n <= 64 and t >= 0.

    Uses the small-argument series for t <= 1, upward recurrence from
    j_0 = sin(t)/t for t >= n and downward (Miller) recurrence otherwise,
    so the evaluation stays stable across the turning point t ~ n.
    Accepts scalars or arrays.
    """
    if n < 0:
        raise ValueError(f"degree must be nonnegative, got n={n}")
    if n > MAX_DEGREE:
        raise UnsupportedDegreeError(f"spherical Bessel degree {n} exceeds cap {MAX_DEGREE}")
    t_arr = np.asarray(t, dtype=float)
    scalar = t_arr.ndim == 0
    t_arr = np.atleast_1d(t_arr)
    if np.any(t_arr < 0) or not np.all(np.isfinite(t_arr)):
        raise ValueError("argument must be finite and >= 0")

    out = np.empty_like(t_arr)
    small = t_arr <= 1.0
    if np.any(small):
        out[small] = _sph_j_series(n, t_arr[small])
    rest = ~small
    if np.any(rest):
        tr = t_arr[rest]
        up = tr >= n
        res = np.empty_like(tr)
        if np.any(up):
            res[up] = _sph_j_upward(n, tr[up])
        if np.any(~up):
            res[~up] = _sph_j_downward(n, tr[~up])
        out[rest] = res
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# Cylindrical Bessel J_1(t)/t
# ---------------------------------------------------------------------------

_J1_ASYMPTOTIC_CUT = 12.0
_J1_ASYMPTOTIC_TERMS = 18


def _j1_coeffs() -> np.ndarray:
    # a_k = (4-1)(4-9)...(4-(2k-1)^2) / (k! 8^k) for nu = 1.
    a = np.empty(_J1_ASYMPTOTIC_TERMS + 1)
    a[0] = 1.0
    for k in range(1, _J1_ASYMPTOTIC_TERMS + 1):
        a[k] = a[k - 1] * (4.0 - (2 * k - 1) ** 2) / (8.0 * k)
    return a


_J1_A = _j1_coeffs()


def bessel_J1_over_t(t) -> np.ndarray | float:
    """J_1(t)/t with the removable singularity (value 1/2 at t = 0).

    Power series below t = 12, Hankel asymptotic expansion beyond; both
    branches agree to better than 1e-10 absolute.
    """
    t_arr = np.asarray(t, dtype=float)
    scalar = t_arr.ndim == 0
    t_arr = np.atleast_1d(t_arr)
    if np.any(t_arr < 0) or not np.all(np.isfinite(t_arr)):
        raise ValueError("argument must be finite and >= 0")

    out = np.empty_like(t_arr)
    small = t_arr < _J1_ASYMPTOTIC_CUT
    if np.any(small):
        ts = t_arr[small]
        # J_1(t)/t = (1/2) sum_s (-1)^s (t^2/4)^s / (s! (s+1)!)
        q = ts * ts / 4.0
        term = np.full_like(ts, 0.5)
        acc = term.copy()
        for s in range(1, 60):
            term = term * (-q) / (s * (s + 1))
            acc = acc + term
            if np.all(np.abs(term) < 1e-18):
                break
        out[small] = acc
    big = ~small
    if np.any(big):
        tb = t_arr[big]
        inv = 1.0 / tb
        p = np.zeros_like(tb)
        q = np.zeros_like(tb)
        for k in range(_J1_ASYMPTOTIC_TERMS // 2 + 1):
            if 2 * k <= _J1_ASYMPTOTIC_TERMS:
                p = p + (-1) ** k * _J1_A[2 * k] * inv ** (2 * k)
            if 2 * k + 1 <= _J1_ASYMPTOTIC_TERMS:
                q = q + (-1) ** k * _J1_A[2 * k + 1] * inv ** (2 * k + 1)
        chi = tb - 0.75 * np.pi
        j1 = np.sqrt(2.0 / (np.pi * tb)) * (p * np.cos(chi) - q * np.sin(chi))
        out[big] = j1 / tb
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# Spherical harmonics
# ---------------------------------------------------------------------------

def _legendre_table(max_degree: int, cos_theta: np.ndarray, sin_theta: np.ndarray) -> np.ndarray:
    """Fully normalized associated Legendre values, Condon-Shortley phase.

    Returns array of shape (max_degree+1, max_degree+1, npts) indexed
    [m, n, point]; entries with m > n are zero.  Normalization is such
    that Y_nm = table[m, n] * exp(i m phi) is orthonormal on S(0,1).
    """
    nmax = max_degree
    npts = cos_theta.shape[0]
    tab = np.zeros((nmax + 1, nmax + 1, npts))
    tab[0, 0] = np.sqrt(1.0 / (4.0 * np.pi))
    u = -sin_theta  # Condon-Shortley phase accumulates via this sign
    for m in range(1, nmax + 1):
        tab[m, m] = np.sqrt((2.0 * m + 1.0) / (2.0 * m)) * u * tab[m - 1, m - 1]
    for m in range(0, nmax):
        tab[m, m + 1] = np.sqrt(2.0 * m + 3.0) * cos_theta * tab[m, m]
    for m in range(0, nmax + 1):
        for n in range(m + 1, nmax):
            a = np.sqrt((2.0 * n + 1.0) * (2.0 * n + 3.0) / ((n + 1.0 + m) * (n + 1.0 - m)))
            b = np.sqrt(
                (2.0 * n + 3.0) * (n - m) * (n + m)
                / ((2.0 * n - 1.0) * (n + 1.0 + m) * (n + 1.0 - m))
            )
            tab[m, n + 1] = a * cos_theta * tab[m, n] - b * tab[m, n - 1]
    return tab


def sph_harm_table(max_degree: int, dirs: np.ndarray) -> np.ndarray:
    """Evaluate all Y_nm with n <= max_degree at unit vectors `dirs`.

    dirs has shape (npts, 3).  Returns complex array of shape
    ((max_degree+1)^2, npts), rows ordered as `modal_indices`.
    """
    if max_degree > MAX_DEGREE:
        raise UnsupportedDegreeError(f"degree {max_degree} exceeds cap {MAX_DEGREE}")
    dirs = np.atleast_2d(np.asarray(dirs, dtype=float))
    norms = np.linalg.norm(dirs, axis=1)
    if np.any(np.abs(norms - 1.0) > 1e-9):
        raise ValueError("directions must be unit vectors")
    cos_theta = np.clip(dirs[:, 2], -1.0, 1.0)
    sin_theta = np.sqrt(np.clip(1.0 - cos_theta * cos_theta, 0.0, None))
    phi = np.arctan2(dirs[:, 1], dirs[:, 0])

    tab = _legendre_table(max_degree, cos_theta, sin_theta)
    eimphi = np.exp(1j * np.outer(np.arange(max_degree + 1), phi))

    out = np.empty(((max_degree + 1) ** 2, dirs.shape[0]), dtype=complex)
    row = 0
    for n in range(max_degree + 1):
        for m in range(-n, n + 1):
            am = abs(m)
            ypos = tab[am, n] * eimphi[am]
            if m >= 0:
                out[row] = ypos
            else:
                out[row] = (-1) ** am * np.conj(ypos)
            row += 1
    return out


def sph_harm(idx: ModalIndex, direction) -> complex:
    """Orthonormal complex spherical harmonic Y_nm at a unit 3-vector.

    Condon-Shortley phase included, so Y_{n,-m} = (-1)^m conj(Y_{n,m}).
    Raises if the direction is not unit length (tolerance 1e-12 on the
    norm for scalar calls).
    """
    d = np.asarray(direction, dtype=float)
    if d.shape != (3,):
        raise ValueError("direction must be a 3-vector")
    if abs(np.linalg.norm(d) - 1.0) > _UNIT_TOL:
        raise ValueError("direction must be a unit vector")
    table = sph_harm_table(idx.n, d[None, :])
    row = idx.n * idx.n + (idx.m + idx.n)
    return complex(table[row, 0])


# ---------------------------------------------------------------------------
# Radial norm of spherical wave basis functions
# ---------------------------------------------------------------------------

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gl_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    if order not in _GL_CACHE:
        _GL_CACHE[order] = np.polynomial.legendre.leggauss(order)
    return _GL_CACHE[order]


def _radial_quad(n: int, k: float, R: float, order: int) -> float:
    # Composite Gauss-Legendre over half-period panels of the oscillation.
    panels = max(8, int(np.ceil(k * R / np.pi)) + 1)
    edges = np.linspace(0.0, R, panels + 1)
    x, w = _gl_rule(order)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    r = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wts = (half[:, None] * w[None, :]).ravel()
    jn = sph_bessel_j(n, k * r)
    return float(np.sum(wts * r * r * jn * jn))


def radial_bessel_norm(n: int, k: float, R: float) -> float:
    """integral_0^R r^2 j_n(k r)^2 dr by adaptive composite quadrature.

    Panels track the oscillation period; the Gauss order is doubled until
    two successive estimates agree to 1e-8 relative.
    """
    if n < 0 or n > MAX_DEGREE:
        raise UnsupportedDegreeError(f"degree {n} outside [0, {MAX_DEGREE}]")
    if k <= 0 or R <= 0:
        raise ValueError("k and R must be positive")
    prev = _radial_quad(n, k, R, 8)
    for order in (16, 32, 64):
        cur = _radial_quad(n, k, R, order)
        if abs(cur - prev) <= 1e-8 * max(abs(cur), 1e-300):
            return cur
        prev = cur
    return prev
