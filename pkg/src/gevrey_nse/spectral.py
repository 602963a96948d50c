"""Fourier representation of real fields on the periodic box [0, L)^3.

Coefficients are stored as full complex ``(n, n, n)`` arrays in FFT index
order and normalised as Fourier-series coefficients, i.e. the forward
transform divides by ``n**3`` so that ``coeffs[0, 0, 0]`` is the spatial
mean and Parseval reads ``mean(|f|^2) == sum(|f_hat|^2)``.

The index ``-n/2`` along any axis has no partner under negation.  Field
generators, the Leray projector and the dealiasing filter drop those modes;
the raw transforms keep them so that a round trip is exact for arbitrary
real samples.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np
import scipy.fft

DEFAULT_EXPONENT_CAP = 60.0
THREADS_ENV = "GEVREY_NSE_THREADS"


class ExponentCapError(ValueError):
    """A Gevrey weight would exceed the configured exponent cap."""


def fft_workers() -> int:
    """Worker count for the FFT backend (``GEVREY_NSE_THREADS``, default 1)."""
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        workers = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    return max(1, workers)


@dataclass(frozen=True, eq=False)
class Grid:
    """Periodic box with ``n`` modes per axis and period ``box_length``."""

    n: int
    box_length: float = 2 * np.pi

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 4 or self.n % 2:
            raise ValueError(f"n must be an even integer >= 4, got {self.n!r}")
        if not np.isfinite(self.box_length) or self.box_length <= 0:
            raise ValueError(f"box_length must be positive, got {self.box_length!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "box_length", float(self.box_length))

    def __eq__(self, other):
        if not isinstance(other, Grid):
            return NotImplemented
        return self.n == other.n and self.box_length == other.box_length

    def __hash__(self):
        return hash((self.n, self.box_length))

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.n, self.n, self.n)

    @property
    def spacing(self) -> float:
        """Wavenumber spacing 2*pi/L."""
        return 2 * np.pi / self.box_length

    @cached_property
    def index_1d(self) -> np.ndarray:
        """Integer mode indices per axis in FFT order, in {-n/2, ..., n/2-1}."""
        return np.fft.fftfreq(self.n, d=1.0 / self.n).astype(int)

    @cached_property
    def wavenumbers_1d(self) -> np.ndarray:
        return self.index_1d * self.spacing

    @cached_property
    def k(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Broadcastable wavevector components (kx, ky, kz)."""
        k1 = self.wavenumbers_1d
        return (k1[:, None, None], k1[None, :, None], k1[None, None, :])

    @cached_property
    def k_vector(self) -> np.ndarray:
        """Dense ``(3, n, n, n)`` wavevector array."""
        return np.stack(np.broadcast_arrays(*self.k))

    @cached_property
    def k2(self) -> np.ndarray:
        kx, ky, kz = self.k
        return kx**2 + ky**2 + kz**2

    @cached_property
    def kmag(self) -> np.ndarray:
        return np.sqrt(self.k2)

    @cached_property
    def kmax(self) -> float:
        return float(self.kmag.max())

    @cached_property
    def nyquist_mask(self) -> np.ndarray:
        """True on modes with some axis index equal to -n/2."""
        i = self.index_1d == -(self.n // 2)
        return i[:, None, None] | i[None, :, None] | i[None, None, :]

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """True on modes kept by the two-thirds rule (3*|index| < n on every axis)."""
        keep = 3 * np.abs(self.index_1d) < self.n
        return keep[:, None, None] & keep[None, :, None] & keep[None, None, :]

    @cached_property
    def band_limit(self) -> int:
        """Largest axis index retained by the two-thirds rule."""
        return int(np.abs(self.index_1d)[3 * np.abs(self.index_1d) < self.n].max())

    @cached_property
    def coordinates(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        x = np.arange(self.n) * (self.box_length / self.n)
        return (x[:, None, None], x[None, :, None], x[None, None, :])

    def negate_index(self, coeffs: np.ndarray) -> np.ndarray:
        """Return ``c(-k)`` for every k (indices taken modulo n)."""
        return np.roll(np.flip(coeffs, axis=(-3, -2, -1)), 1, axis=(-3, -2, -1))


def make_grid(n: int, box_length: float = 2 * np.pi) -> Grid:
    return Grid(n, box_length)


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class SpectralScalar:
    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        c = _freeze(self.coeffs)
        if c.shape != self.grid.shape:
            raise ValueError(f"coefficient shape {c.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "coeffs", c)

    def __add__(self, other: SpectralScalar) -> SpectralScalar:
        _check_same_grid(self, other)
        return SpectralScalar(self.grid, self.coeffs + other.coeffs)

    def __mul__(self, factor: float) -> SpectralScalar:
        return SpectralScalar(self.grid, self.coeffs * factor)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class SpectralVector:
    """Three scalar components sharing one grid, stored as a ``(3, n, n, n)`` array."""

    grid: Grid
    coeffs: np.ndarray
    divergence_free: bool = False

    def __post_init__(self):
        c = _freeze(self.coeffs)
        if c.shape != (3,) + self.grid.shape:
            raise ValueError(f"vector coefficients must have shape (3, n, n, n), got {c.shape}")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_components(cls, components, divergence_free=False) -> SpectralVector:
        components = list(components)
        if len(components) != 3:
            raise ValueError("a vector field needs exactly three components")
        grid = components[0].grid
        for comp in components[1:]:
            _check_same_grid(components[0], comp)
        return cls(grid, np.stack([c.coeffs for c in components]), divergence_free)

    @property
    def components(self) -> tuple[SpectralScalar, SpectralScalar, SpectralScalar]:
        return tuple(SpectralScalar(self.grid, c) for c in self.coeffs)

    def __add__(self, other: SpectralVector) -> SpectralVector:
        _check_same_grid(self, other)
        return SpectralVector(self.grid, self.coeffs + other.coeffs,
                              self.divergence_free and other.divergence_free)

    def __mul__(self, factor: float) -> SpectralVector:
        return SpectralVector(self.grid, self.coeffs * factor, self.divergence_free)

    __rmul__ = __mul__


Field = SpectralScalar | SpectralVector


def _check_same_grid(a, b):
    if a.grid != b.grid:
        raise ValueError(f"grid mismatch: {a.grid} vs {b.grid}")


def _like(f: Field, coeffs: np.ndarray, divergence_free: bool | None = None) -> Field:
    if isinstance(f, SpectralVector):
        tag = f.divergence_free if divergence_free is None else divergence_free
        return SpectralVector(f.grid, coeffs, tag)
    return SpectralScalar(f.grid, coeffs)


def fft3(samples: np.ndarray) -> np.ndarray:
    """Normalised forward FFT over the last three axes."""
    n3 = np.prod(samples.shape[-3:])
    return scipy.fft.fftn(samples, axes=(-3, -2, -1), workers=fft_workers()) / n3


def ifft3(coeffs: np.ndarray) -> np.ndarray:
    n3 = np.prod(coeffs.shape[-3:])
    return scipy.fft.ifftn(coeffs, axes=(-3, -2, -1), workers=fft_workers()) * n3


def transform_forward(samples: np.ndarray, grid: Grid) -> Field:
    """Physical samples (scalar ``(n,n,n)`` or vector ``(3,n,n,n)``) to coefficients."""
    samples = np.asarray(samples)
    if samples.shape == grid.shape:
        return SpectralScalar(grid, fft3(samples))
    if samples.shape == (3,) + grid.shape:
        return SpectralVector(grid, fft3(samples))
    raise ValueError(f"samples of shape {samples.shape} do not match grid {grid.shape}")


def transform_inverse(f: Field) -> np.ndarray:
    """Coefficients back to real physical samples (imaginary residue discarded)."""
    return ifft3(f.coeffs).real


def imag_residue(f: Field) -> float:
    """Largest imaginary part of the inverse transform relative to the largest amplitude."""
    phys = ifft3(f.coeffs)
    scale = np.abs(phys).max()
    return 0.0 if scale == 0 else float(np.abs(phys.imag).max() / scale)


def hermitian_defect(f: Field) -> float:
    """max |c(k) - conj(c(-k))| over paired modes, relative to max |c|."""
    c = f.coeffs
    scale = np.abs(c).max()
    if scale == 0:
        return 0.0
    paired = ~f.grid.nyquist_mask
    diff = np.abs(c - np.conj(f.grid.negate_index(c)))[..., paired]
    return float(diff.max() / scale)


def strip_nyquist(f: Field) -> Field:
    return _like(f, np.where(f.grid.nyquist_mask, 0, f.coeffs))


def apply_multiplier(f: Field, m: Callable[[np.ndarray], np.ndarray]) -> Field:
    """Scale every coefficient by the real radial multiplier ``m(|k|)``."""
    weights = np.asarray(m(f.grid.kmag), dtype=float)
    weights = np.broadcast_to(weights, f.grid.shape)
    if not np.all(np.isfinite(weights)):
        raise ValueError("multiplier is not finite on every lattice point")
    return _like(f, f.coeffs * weights)


def gevrey_exponent(grid: Grid, tau: float, rho: float) -> np.ndarray:
    """Per-mode exponent ``tau * |k|**rho`` after domain and cap checks."""
    if tau < 0:
        raise ValueError(f"tau must be >= 0, got {tau}")
    if not 0 < rho <= 1:
        raise ValueError(f"rho must lie in (0, 1], got {rho}")
    return tau * grid.kmag**rho


def check_exponent_cap(grid: Grid, tau: float, rho: float, cap: float = DEFAULT_EXPONENT_CAP):
    peak = tau * grid.kmax**rho
    if peak > cap:
        raise ExponentCapError(
            f"Gevrey exponent tau*|k|max^rho = {peak:.3f} exceeds cap {cap} "
            f"(tau={tau}, rho={rho}, |k|max={grid.kmax:.3f})")


def gevrey_multiplier(v: Field, tau: float, rho: float = 1.0,
                      cap: float = DEFAULT_EXPONENT_CAP) -> Field:
    """Apply ``exp(tau * |D|**rho)`` mode by mode."""
    exponent = gevrey_exponent(v.grid, tau, rho)
    check_exponent_cap(v.grid, tau, rho, cap)
    return _like(v, v.coeffs * np.exp(exponent))


def leray_project(v: SpectralVector) -> SpectralVector:
    """Remove the gradient part: u(k) - (k.u(k)) k / |k|^2, mean mode untouched."""
    grid = v.grid
    kvec = grid.k_vector
    k2 = grid.k2
    inv_k2 = np.divide(1.0, k2, out=np.zeros_like(k2), where=k2 > 0)
    kdotu = np.einsum("i...,i...->...", kvec, v.coeffs)
    out = v.coeffs - kvec * (kdotu * inv_k2)
    out = np.where(grid.nyquist_mask, 0, out)
    return SpectralVector(grid, out, divergence_free=True)


def divergence(v: SpectralVector) -> SpectralScalar:
    return SpectralScalar(v.grid, 1j * np.einsum("i...,i...->...", v.grid.k_vector, v.coeffs))


def gradient(f: SpectralScalar) -> SpectralVector:
    g = 1j * f.grid.k_vector * f.coeffs
    return SpectralVector(f.grid, np.where(f.grid.nyquist_mask, 0, g))


def max_divergence(v: SpectralVector) -> float:
    """max_k |k . u(k)| relative to the coefficient l2 norm."""
    scale = np.sqrt(np.sum(np.abs(v.coeffs) ** 2))
    if scale == 0:
        return 0.0
    return float(np.abs(np.einsum("i...,i...->...", v.grid.k_vector, v.coeffs)).max() / scale)


def low_pass(f: Field, delta: float) -> Field:
    """Keep modes with |k| < delta."""
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    return _like(f, np.where(f.grid.kmag < delta, f.coeffs, 0))


def high_pass(f: Field, delta: float) -> Field:
    """Keep modes with |k| >= delta (the tie |k| == delta lands here)."""
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    return _like(f, np.where(f.grid.kmag < delta, 0, f.coeffs))


def dealias(f: Field) -> Field:
    return _like(f, np.where(f.grid.dealias_mask, f.coeffs, 0))


def pad_coeffs(coeffs: np.ndarray, n_from: int, n_to: int) -> np.ndarray:
    """Embed coefficients into a larger grid (Nyquist modes dropped)."""
    if n_to < n_from:
        raise ValueError(f"cannot pad from n={n_from} to n={n_to}; use truncate_coeffs")
    lead = coeffs.shape[:-3]
    out = np.zeros(lead + (n_to,) * 3, dtype=complex)
    idx = np.fft.fftfreq(n_from, d=1.0 / n_from).astype(int)
    keep = idx != -(n_from // 2)
    src = idx[keep]
    sel = np.ix_(np.flatnonzero(keep), np.flatnonzero(keep), np.flatnonzero(keep))
    dst = np.ix_(src % n_to, src % n_to, src % n_to)
    out[(...,) + dst] = coeffs[(...,) + sel]
    return out


def truncate_coeffs(coeffs: np.ndarray, n_from: int, n_to: int) -> np.ndarray:
    """Restrict coefficients to a smaller grid, keeping |index| < n_to/2 (Nyquist dropped)."""
    if n_to > n_from:
        raise ValueError(f"cannot truncate from n={n_from} to n={n_to}")
    idx = np.fft.fftfreq(n_to, d=1.0 / n_to).astype(int)
    keep = np.flatnonzero(idx != -(n_to // 2))
    src = idx[keep] % n_from
    out = np.zeros(coeffs.shape[:-3] + (n_to,) * 3, dtype=complex)
    out[(...,) + np.ix_(keep, keep, keep)] = coeffs[(...,) + np.ix_(src, src, src)]
    return out


def exact_product(u: SpectralScalar, v: SpectralScalar) -> SpectralScalar:
    """Alias-free product ``u*v`` on a grid with twice the resolution.

    Both factors live on ``|index| < n/2`` once Nyquist modes are dropped, so
    the product is supported on ``|index| <= n - 2`` and fits the doubled grid
    without wraparound.
    """
    _check_same_grid(u, v)
    n = u.grid.n
    big = Grid(2 * n, u.grid.box_length)
    pu = ifft3(pad_coeffs(u.coeffs, n, 2 * n))
    pv = ifft3(pad_coeffs(v.coeffs, n, 2 * n))
    return SpectralScalar(big, fft3(pu * pv))
