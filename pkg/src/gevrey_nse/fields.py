"""Initial conditions and seeded random field ensembles."""

from __future__ import annotations

import numpy as np

from .norms import sobolev_norm
from .spectral import Grid, SpectralScalar, SpectralVector, leray_project, transform_forward


def hermitian_symmetrize(coeffs: np.ndarray, grid: Grid) -> np.ndarray:
    """Average ``c(k)`` with ``conj(c(-k))`` so the field is real."""
    return 0.5 * (coeffs + np.conj(grid.negate_index(coeffs)))


def random_phase_coeffs(grid: Grid, envelope: np.ndarray, rng: np.random.Generator,
                        components: int | None = None) -> np.ndarray:
    """Coefficients ``envelope * exp(i*theta)`` with uniform phases, made real.

    The result is band limited by the two-thirds mask, mean free, and has no
    Nyquist content.
    """
    shape = grid.shape if components is None else (components,) + grid.shape
    theta = rng.uniform(0.0, 2 * np.pi, size=shape)
    c = envelope * np.exp(1j * theta)
    c = hermitian_symmetrize(c, grid)
    keep = grid.dealias_mask & ~grid.nyquist_mask & (grid.k2 > 0)
    return np.where(keep, c, 0)


def power_envelope(grid: Grid, slope: float, a: float = 0.0, sigma: float = 2.0) -> np.ndarray:
    """|k|^-slope * exp(-a |k|^{1/sigma}) with the k = 0 entry set to zero."""
    kmag = grid.kmag
    with np.errstate(divide="ignore"):
        env = np.where(kmag > 0, kmag ** (-float(slope)), 0.0)
    return env * np.exp(-a * kmag ** (1.0 / sigma))


def initial_taylor_green(grid: Grid, amplitude: float = 1.0) -> SpectralVector:
    """A * (sin x cos y, -cos x sin y, 0) sampled on the grid."""
    if not np.isclose(grid.box_length, 2 * np.pi, rtol=0, atol=1e-12):
        raise ValueError("the Taylor-Green initial condition requires box_length = 2*pi")
    x, y, _ = grid.coordinates
    ones = np.ones(grid.shape)
    u = amplitude * np.sin(x) * np.cos(y) * ones
    v = -amplitude * np.cos(x) * np.sin(y) * ones
    samples = np.stack([u, v, np.zeros(grid.shape)])
    coeffs = transform_forward(samples, grid).coeffs
    # roundoff from the FFT lands on modes that should be exactly zero
    coeffs = np.where(np.abs(coeffs) > 1e-14 * max(abs(amplitude), 1e-300), coeffs, 0)
    return leray_project(SpectralVector(grid, coeffs))


def initial_random_gevrey(grid: Grid, a: float, sigma: float, q: float,
                          amplitude: float, seed: int) -> SpectralVector:
    """Random divergence-free field with spectrum |k|^-q exp(-a|k|^{1/sigma}).

    Phases are uniform, the field is made real and Leray projected, and the
    result is rescaled so that its H^1 norm equals ``amplitude``.
    """
    rng = np.random.default_rng(seed)
    env = power_envelope(grid, q, a, sigma)
    c = random_phase_coeffs(grid, env, rng, components=3)
    u = leray_project(SpectralVector(grid, c))
    norm = sobolev_norm(u, 1.0)
    if norm == 0:
        return u
    return SpectralVector(grid, u.coeffs * (amplitude / norm), divergence_free=True)


def random_scalar(grid: Grid, rng: np.random.Generator, slope: float = 0.0) -> SpectralScalar:
    """Band-limited, mean-free, real scalar field with unit L2 norm."""
    c = random_phase_coeffs(grid, power_envelope(grid, slope), rng)
    f = SpectralScalar(grid, c)
    return f * (1.0 / float(np.sqrt(np.sum(np.abs(c) ** 2))))


def random_solenoidal(grid: Grid, rng: np.random.Generator, slope: float = 0.0) -> SpectralVector:
    """Band-limited, divergence-free, real vector field with unit L2 norm."""
    c = random_phase_coeffs(grid, power_envelope(grid, slope), rng, components=3)
    u = leray_project(SpectralVector(grid, c))
    return u * (1.0 / float(np.sqrt(np.sum(np.abs(u.coeffs) ** 2))))
