"""Norms and inner products computed as lattice sums over Fourier coefficients.

No continuous volume factors are carried: ``l2_norm(u)**2`` is the spatial
mean of ``|u|**2``.  Homogeneous norms skip the k = 0 mode.  Every function
accepts scalar and vector fields; vector norms sum over components.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import (DEFAULT_EXPONENT_CAP, Field, SpectralScalar,
                       gevrey_multiplier, ifft3, pad_coeffs, transform_inverse)


class NormValue(float):
    """A nonnegative float tagged with the kind of norm that produced it."""

    kind: str

    def __new__(cls, value, kind):
        obj = super().__new__(cls, value)
        obj.kind = kind
        return obj

    def __repr__(self):
        return f"NormValue({float(self)!r}, kind={self.kind!r})"


@dataclass(frozen=True)
class GevreyParams:
    """Parameters (a, sigma, s) of the Gevrey-Sobolev space H^s_{a,sigma}."""

    a: float
    sigma: float
    s: float = 1.0

    def __post_init__(self):
        if self.a < 0:
            raise ValueError(f"Gevrey weight a must be >= 0, got {self.a}")
        if self.sigma <= 1:
            raise ValueError(f"Gevrey index sigma must be > 1, got {self.sigma}")


def _energy_density(f: Field) -> np.ndarray:
    """|f_hat(k)|^2 summed over components, shape (n, n, n)."""
    d = np.abs(f.coeffs) ** 2
    return d if d.ndim == 3 else d.sum(axis=0)


def sobolev_weight(kmag: np.ndarray, s: float, homogeneous: bool) -> np.ndarray:
    if homogeneous:
        with np.errstate(divide="ignore"):
            w = np.where(kmag > 0, kmag ** (2 * s), 0.0)
        return w
    return (1 + kmag**2) ** s


def l2_norm(v: Field) -> NormValue:
    return NormValue(np.sqrt(_energy_density(v).sum()), "L2")


def sobolev_norm(v: Field, s: float, homogeneous: bool = False) -> NormValue:
    w = sobolev_weight(v.grid.kmag, s, homogeneous)
    return NormValue(np.sqrt((w * _energy_density(v)).sum()), "Hs_dot" if homogeneous else "Hs")


def gevrey_sobolev_norm(v: Field, params: GevreyParams,
                        cap: float = DEFAULT_EXPONENT_CAP) -> NormValue:
    """||exp(a |D|^{1/sigma}) v||_{H^s}."""
    weighted = gevrey_multiplier(v, params.a, 1.0 / params.sigma, cap)
    return NormValue(sobolev_norm(weighted, params.s), "Gevrey")


def sobolev_inner(f: Field, g: Field, s: float, homogeneous: bool = False) -> complex:
    if f.grid != g.grid:
        raise ValueError("grid mismatch")
    w = sobolev_weight(f.grid.kmag, s, homogeneous)
    return complex(np.sum(w * f.coeffs * np.conj(g.coeffs)))


def gevrey_inner(f: Field, g: Field, params: GevreyParams,
                 cap: float = DEFAULT_EXPONENT_CAP) -> complex:
    rho = 1.0 / params.sigma
    return sobolev_inner(gevrey_multiplier(f, params.a, rho, cap),
                         gevrey_multiplier(g, params.a, rho, cap), params.s)


def fourier_l1(f: Field) -> NormValue:
    """Sum of |f_hat(k)| (over components for vectors)."""
    return NormValue(np.abs(f.coeffs).sum(), "FourierL1")


def linf_norm(f: Field) -> NormValue:
    """Collocation-grid maximum of |f| (Euclidean magnitude for vectors)."""
    phys = transform_inverse(f)
    if phys.ndim == 4:
        phys = np.sqrt((phys**2).sum(axis=0))
    return NormValue(np.abs(phys).max(), "Linf")


def oversampled_linf(f: SpectralScalar, factor: int = 4) -> float:
    """Maximum of |f| evaluated on a grid ``factor`` times finer per axis."""
    n = f.grid.n
    phys = ifft3(pad_coeffs(f.coeffs, n, factor * n)).real
    return float(np.abs(phys).max())
