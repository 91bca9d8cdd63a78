"""Approximation of target fields by fixed-wavenumber plane-wave superpositions."""

from .specfun import ModalIndex, sph_bessel_j, bessel_J1_over_t, sph_harm, radial_bessel_norm

__all__ = [
    "ModalIndex",
    "sph_bessel_j",
    "bessel_J1_over_t",
    "sph_harm",
    "radial_bessel_norm",
]

__version__ = "0.1.0"
