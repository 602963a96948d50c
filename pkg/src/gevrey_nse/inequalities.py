"""Numerical checks of the functional inequalities behind the decay argument.

Each check returns an :class:`InequalityReport` comparing a left-hand side
against ``constant_used * rhs``.  Where no explicit constant is available
the constant comes from a calibration ensemble frozen in ``constants.ini``;
the Fourier-L1 interpolation bound uses an exact lattice constant, and the
Gevrey sandwich needs no fitted constant at all.

Products are formed without aliasing on a grid with twice the resolution,
so every left-hand side is the exact lattice value for band-limited inputs.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.optimize import minimize_scalar

from .fields import random_scalar, random_solenoidal
from .norms import GevreyParams, fourier_l1, gevrey_sobolev_norm, l2_norm, sobolev_norm
from .spectral import (DEFAULT_EXPONENT_CAP, Grid, SpectralScalar, SpectralVector,
                       exact_product, fft3, gevrey_multiplier, ifft3, leray_project,
                       pad_coeffs, truncate_coeffs)

REL_SLACK = 1e-9


@dataclass(frozen=True)
class InequalityReport:
    lhs: float
    rhs: float
    constant_used: float

    @property
    def ratio(self) -> float:
        if self.rhs == 0:
            return 0.0 if self.lhs == 0 else math.inf
        return self.lhs / self.rhs

    @property
    def passed(self) -> bool:
        return self.lhs <= self.constant_used * self.rhs * (1 + REL_SLACK)


# -- Sobolev product estimate -------------------------------------------------

def product_estimate(u: SpectralScalar, v: SpectralScalar, s: float, t: float,
                     constant: float = 1.0, symmetric: bool = False) -> InequalityReport:
    """||uv||_{H-dot^{s+t-3/2}} against ||u||_{H-dot^s} ||v||_{H-dot^t}.

    With ``symmetric`` the right side gains ||u||_{H-dot^t} ||v||_{H-dot^s} and
    only s < 3/2 is required; otherwise both s and t must be below 3/2.
    """
    if not s < 1.5 or not s + t > 0:
        raise ValueError(f"need s < 3/2 and s + t > 0, got s={s}, t={t}")
    if not symmetric and not t < 1.5:
        raise ValueError(f"the single-term form needs t < 3/2, got t={t}")
    lhs = sobolev_norm(exact_product(u, v), s + t - 1.5, homogeneous=True)
    rhs = sobolev_norm(u, s, True) * sobolev_norm(v, t, True)
    if symmetric:
        rhs += sobolev_norm(u, t, True) * sobolev_norm(v, s, True)
    return InequalityReport(float(lhs), float(rhs), constant)


# -- Fourier-L1 interpolation -------------------------------------------------

def interpolation_exponent(s1: float, s2: float) -> float:
    """Exponent carried by the H-dot^{s1} factor, (s2 - 3/2) / (s2 - s1)."""
    return (s2 - 1.5) / (s2 - s1)


@lru_cache(maxsize=32)
def lattice_split_sums(grid: Grid, s1: float, s2: float):
    """Low/high lattice sums for every admissible cut radius.

    Entry j uses the cut lambda = r_j (the j-th distinct nonzero |k|) so the
    low sum runs over 0 < |k| < r_j and the high sum over |k| >= r_j; one
    extra entry puts every mode in the low part.  Returns
    ``(radii, sqrt(low), sqrt(high))``.
    """
    kmag = grid.kmag[(grid.kmag > 0) & ~grid.nyquist_mask]
    radii, inverse = np.unique(np.round(kmag, 12), return_inverse=True)
    low_terms = np.bincount(inverse, weights=kmag ** (-2 * s1))
    high_terms = np.bincount(inverse, weights=kmag ** (-2 * s2))
    low = np.concatenate([[0.0], np.cumsum(low_terms)])
    high = np.concatenate([np.cumsum(high_terms[::-1])[::-1], [0.0]])
    return radii, np.sqrt(low), np.sqrt(high)


def _split_bound(r: float, alpha, beta, theta) -> float:
    return float(np.min(alpha * r ** (theta - 1) + beta * r**theta))


@lru_cache(maxsize=32)
def lattice_interpolation_constant(grid: Grid, s1: float = 1.0, s2: float = 2.0) -> float:
    """Smallest c with sum|f_hat| <= c ||f||_{H-dot^s1}^theta ||f||_{H-dot^s2}^(1-theta)
    obtainable from the low/high Cauchy-Schwarz split on this lattice.

    For a mean-free field the split gives sum|f_hat| <= sqrt(S1) A + sqrt(S2) B
    for every cut; minimising over cuts and maximising over the attainable
    ratios B/A yields a field-independent constant.
    """
    if not s1 < 1.5 < s2:
        raise ValueError(f"need s1 < 3/2 < s2, got {s1}, {s2}")
    radii, alpha, beta = lattice_split_sums(grid, s1, s2)
    theta = interpolation_exponent(s1, s2)
    lo, hi = np.log(radii[0] ** (s2 - s1)), np.log(radii[-1] ** (s2 - s1))
    logs = np.linspace(lo, hi, 4001)
    vals = np.array([_split_bound(math.exp(x), alpha, beta, theta) for x in logs])
    best = int(np.argmax(vals))
    a, b = logs[max(best - 1, 0)], logs[min(best + 1, len(logs) - 1)]
    if b > a:
        res = minimize_scalar(lambda x: -_split_bound(math.exp(x), alpha, beta, theta),
                              bounds=(a, b), method="bounded", options={"xatol": 1e-12})
        return max(float(vals[best]), -float(res.fun))
    return float(vals[best])


def interpolation_bound(f: SpectralScalar, s1: float = 1.0, s2: float = 2.0,
                        constant: float | None = None) -> InequalityReport:
    """sum|f_hat| against ||f||_{H-dot^s1}^theta ||f||_{H-dot^s2}^(1-theta)."""
    if not s1 < 1.5 < s2:
        raise ValueError(f"need s1 < 3/2 < s2, got {s1}, {s2}")
    c = f.coeffs
    scale = np.abs(c).max()
    if abs(c[0, 0, 0]) > 1e-12 * scale:
        raise ValueError("interpolation_bound needs a mean-free field")
    a = sobolev_norm(f, s1, True)
    b = sobolev_norm(f, s2, True)
    if a == 0 or b == 0:
        raise ValueError("degenerate field: a homogeneous norm vanishes")
    theta = interpolation_exponent(s1, s2)
    if constant is None:
        constant = lattice_interpolation_constant(f.grid, s1, s2)
    return InequalityReport(float(fourier_l1(f)), float(a**theta * b ** (1 - theta)), constant)


# -- Gevrey-weighted advection estimates --------------------------------------

def advection_exact(u: SpectralVector, v: SpectralVector) -> SpectralVector:
    """(u . grad) v without aliasing, on the doubled grid."""
    if u.grid != v.grid:
        raise ValueError("grid mismatch")
    n = u.grid.n
    big = Grid(2 * n, u.grid.box_length)
    kvec = u.grid.k_vector
    up = ifft3(pad_coeffs(u.coeffs, n, 2 * n))
    out = np.zeros((3,) + big.shape, dtype=complex)
    for j in range(3):
        dv = ifft3(pad_coeffs(1j * kvec[j] * v.coeffs, n, 2 * n))
        out += up[j] * dv
    return SpectralVector(big, fft3(out))


def _upsample(v: SpectralVector) -> SpectralVector:
    n = v.grid.n
    return SpectralVector(Grid(2 * n, v.grid.box_length), pad_coeffs(v.coeffs, n, 2 * n),
                          v.divergence_free)


def _gevrey_u_factors(u: SpectralVector, v: SpectralVector, tau: float, cap: float):
    eu = gevrey_multiplier(u, tau, 1.0, cap)
    ev = gevrey_multiplier(v, tau, 1.0, cap)
    return (math.sqrt(sobolev_norm(eu, 1.0, True) * sobolev_norm(eu, 2.0, True)),
            float(sobolev_norm(ev, 1.0, True)))


def gevrey_product(u: SpectralVector, v: SpectralVector, tau: float,
                   constant: float = 1.0, cap: float = DEFAULT_EXPONENT_CAP) -> InequalityReport:
    """||e^{tau|D|}(u.grad v)||_{L2} against
    ||e^{tau|D|}u||_{H-dot^1}^{1/2} ||e^{tau|D|}u||_{H-dot^2}^{1/2} ||e^{tau|D|}|D|v||_{L2}."""
    lhs = l2_norm(gevrey_multiplier(advection_exact(u, v), tau, 1.0, cap))
    fu, fv = _gevrey_u_factors(u, v, tau, cap)
    return InequalityReport(float(lhs), fu * fv, constant)


def trilinear_h1(u: SpectralVector, v: SpectralVector, w: SpectralVector, tau: float,
                 constant: float = 1.0, cap: float = DEFAULT_EXPONENT_CAP) -> InequalityReport:
    """|<e^{tau|D|}(u.grad v), e^{tau|D|}w>_{H^1}| against the four-factor bound
    with ||e^{tau|D|} Delta w||_{L2} as the last factor."""
    a = gevrey_multiplier(advection_exact(u, v), tau, 1.0, cap)
    b = gevrey_multiplier(_upsample(w), tau, 1.0, cap)
    weight = 1 + a.grid.k2
    lhs = abs(np.sum(weight * a.coeffs * np.conj(b.coeffs)))
    fu, fv = _gevrey_u_factors(u, v, tau, cap)
    fw = float(sobolev_norm(gevrey_multiplier(w, tau, 1.0, cap), 2.0, True))
    return InequalityReport(float(lhs), fu * fv * fw, constant)


def trilinear_partner(u: SpectralVector, v: SpectralVector, tau: float,
                      cap: float = DEFAULT_EXPONENT_CAP) -> SpectralVector:
    """The divergence-free w on u's grid that maximises the trilinear ratio for fixed u, v.

    For fixed u, v the ratio is linear in w over a weighted L2 norm of w, so the
    supremum is attained at the Riesz representer, computed here mode by mode.
    """
    grid = u.grid
    n = grid.n
    a = gevrey_multiplier(advection_exact(u, v), tau, 1.0, cap)
    restricted = truncate_coeffs(a.coeffs, 2 * n, n)
    nonzero = grid.k2 > 0
    k4 = np.where(nonzero, grid.k2**2, 1.0)
    weight = np.where(nonzero, (1 + grid.k2) / k4 * np.exp(-tau * grid.kmag), 0.0)
    return leray_project(SpectralVector(grid, restricted * weight))


# -- Young split and Gevrey sandwich ------------------------------------------

def young_constant(a: float, sigma: float, beta: float) -> float:
    """c3 = (sigma-1)/sigma * a^{sigma/(sigma-1)} * beta^{1/(1-sigma)}."""
    if a == 0:
        return 0.0
    return (sigma - 1) / sigma * a ** (sigma / (sigma - 1)) * beta ** (1 / (1 - sigma))


@dataclass(frozen=True)
class YoungSplit:
    c3: float
    report: InequalityReport    # worst point of a x^{1/sigma} <= c3 + beta x on the grid
    violations: int
    grid_max: float             # max over the grid of a x^{1/sigma} - beta x
    exact_max: float            # same maximum in closed form
    x_star: float               # maximiser of a x^{1/sigma} - beta x
    young_gap: float            # c3 + (beta/sigma) x_y - a x_y^{1/sigma}, zero in exact arithmetic


def young_split(a: float, sigma: float, beta: float, x_max: float = 1e6,
                points: int = 20001) -> YoungSplit:
    """Constant c3 with a x^{1/sigma} <= c3 + beta x for all x >= 0, checked on a grid.

    Young's inequality is sharp for a x^{1/sigma} <= c3 + (beta/sigma) x at
    x_y = (a/beta)^{sigma/(sigma-1)}; the weaker form with beta x has its
    own maximiser x* = (a/(sigma beta))^{sigma/(sigma-1)}.  Both are inserted
    into the test grid.
    """
    if not a > 0 or not sigma > 1 or not beta > 0:
        raise ValueError(f"need a > 0, sigma > 1, beta > 0; got {a}, {sigma}, {beta}")
    c3 = young_constant(a, sigma, beta)
    p = sigma / (sigma - 1)
    x_star = (a / (sigma * beta)) ** p
    x_young = (a / beta) ** p
    xs = np.concatenate([[0.0], np.logspace(-12, math.log10(x_max), points), [x_star, x_young]])
    xs = np.sort(xs[xs <= x_max])
    lhs = a * xs ** (1 / sigma)
    rhs = c3 + beta * xs
    violations = int(np.count_nonzero(lhs > rhs * (1 + REL_SLACK)))
    worst = int(np.argmax(lhs - rhs))
    report = InequalityReport(float(lhs[worst]), float(rhs[worst]), 1.0)
    grid_max = float(np.max(lhs - beta * xs))
    exact_max = c3 * sigma ** (-1 / (sigma - 1))
    gap = c3 + beta / sigma * x_young - a * x_young ** (1 / sigma)
    return YoungSplit(c3, report, violations, grid_max, exact_max, x_star, float(gap))


def gevrey_sandwich(v: SpectralVector, a: float, sigma: float, alpha: float,
                    cap: float = DEFAULT_EXPONENT_CAP) -> InequalityReport:
    """||v||_{H^1_{a,sigma}}^2 <= e^{2 c3} ||v||_{H^1} ||e^{alpha|D|} v||_{H^1}, c3 from beta = alpha/2.

    This is a per-mode bound followed by Cauchy-Schwarz, so the constant is exactly one.
    """
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    c3 = 0.0 if a == 0 else young_constant(a, sigma, alpha / 2)
    lhs = float(gevrey_sobolev_norm(v, GevreyParams(a, sigma, 1.0), cap)) ** 2
    rhs = math.exp(2 * c3) * float(sobolev_norm(v, 1.0)) * float(
        sobolev_norm(gevrey_multiplier(v, alpha, 1.0, cap), 1.0))
    return InequalityReport(lhs, rhs, 1.0)


# -- calibration ensembles and the constants file ----------------------------

ENSEMBLE_N = 16
ENSEMBLE_TAU = 0.2
SLOPE_RANGES = {
    # spectral slope ranges per check; chosen so the ensemble maximum is stable
    "product_single": (0.0, 1.0),
    "product_symmetric": (1.0, 2.0),
    "gevrey_product": (1.0, 2.0),
    "trilinear_h1": (1.0, 2.0),
}
SLOPE_RANGE = (1.0, 2.0)  # unfitted checks
FIT_MARGIN = 1.25
CONSTANTS_VERSION = "2"

FITTED_CHECKS = {
    # name: description printed by the check suite
    "product_single": "Sobolev product, s=1/2, t=1",
    "product_symmetric": "Sobolev product (symmetrized), s=1/2, t=3/2",
    "gevrey_product": f"Gevrey advection L2 bound, tau={ENSEMBLE_TAU}",
    "trilinear_h1": f"Gevrey H1 trilinear bound (extremal w), tau={ENSEMBLE_TAU}",
}


class ConstantsError(ValueError):
    pass


def _slope(rng, name):
    return rng.uniform(*SLOPE_RANGES[name])


def ensemble_member(name: str, grid: Grid, rng: np.random.Generator,
                    constant: float = 1.0) -> InequalityReport:
    """One seeded draw for a fitted-constant check (unit-normalized, band-limited fields)."""
    if name in ("product_single", "product_symmetric"):
        u, v = (random_scalar(grid, rng, _slope(rng, name)) for _ in range(2))
        if name == "product_single":
            return product_estimate(u, v, 0.5, 1.0, constant)
        return product_estimate(u, v, 0.5, 1.5, constant, symmetric=True)
    if name == "gevrey_product":
        u, v = (random_solenoidal(grid, rng, _slope(rng, name)) for _ in range(2))
        return gevrey_product(u, v, ENSEMBLE_TAU, constant)
    if name == "trilinear_h1":
        # random u, v; w is the worst case for that pair
        u, v = (random_solenoidal(grid, rng, _slope(rng, name)) for _ in range(2))
        w = trilinear_partner(u, v, ENSEMBLE_TAU)
        return trilinear_h1(u, v, w, ENSEMBLE_TAU, constant)
    raise KeyError(f"unknown check {name!r}")


# stream tags keep calibration (A) and validation (B) draws disjoint
STREAM_A, STREAM_B = 0, 1


def run_ensemble(name: str, members: int, seed: int, stream: int = STREAM_B,
                 constant: float = 1.0, n: int = ENSEMBLE_N) -> list[InequalityReport]:
    if name not in FITTED_CHECKS:
        raise KeyError(f"unknown check {name!r}")
    grid = Grid(n)
    rng = np.random.default_rng([seed, stream, sorted(FITTED_CHECKS).index(name)])
    return [ensemble_member(name, grid, rng, constant) for _ in range(members)]


def fit_constants(seed: int = 2024, members: int = 200, margin: float = FIT_MARGIN) -> dict:
    """Fit each constant as ``margin * max ratio`` over calibration ensemble A."""
    fitted = {}
    for name in FITTED_CHECKS:
        reports = run_ensemble(name, members, seed, STREAM_A)
        worst = max(r.ratio for r in reports)
        fitted[name] = {"constant": margin * worst, "max_ratio": worst}
    return fitted


def default_constants_path() -> Path:
    return Path(str(resources.files("gevrey_nse").joinpath("data/constants.ini")))


def write_constants(path, fitted: dict, seed: int, members: int, margin: float):
    cp = configparser.ConfigParser()
    cp["meta"] = {
        "version": CONSTANTS_VERSION,
        "ensemble_n": str(ENSEMBLE_N),
        "ensemble_tau": repr(ENSEMBLE_TAU),
        "fit_seed": str(seed),
        "fit_members": str(members),
        "margin": repr(margin),
    }
    cp["constants"] = {k: repr(v["constant"]) for k, v in fitted.items()}
    cp["constants"]["lattice_interpolation_1_2"] = repr(
        lattice_interpolation_constant(Grid(ENSEMBLE_N), 1.0, 2.0))
    cp["max_ratio"] = {k: repr(v["max_ratio"]) for k, v in fitted.items()}
    with open(path, "w") as fh:
        fh.write("# fitted inequality constants; regenerate with `gevrey-nse calibrate`\n")
        cp.write(fh)


def load_constants(path=None) -> dict:
    """Read and validate the constants file; raises :class:`ConstantsError`."""
    path = default_constants_path() if path is None else Path(path)
    cp = configparser.ConfigParser()
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except FileNotFoundError:
        raise ConstantsError(f"constants file not found: {path}") from None
    except configparser.Error as exc:
        raise ConstantsError(f"cannot parse constants file {path}: {exc}") from None
    if cp.get("meta", "version", fallback=None) != CONSTANTS_VERSION:
        raise ConstantsError(f"{path}: missing or unsupported [meta] version")
    if not cp.has_section("constants"):
        raise ConstantsError(f"{path}: no [constants] section")
    out = {}
    for key in list(FITTED_CHECKS) + ["lattice_interpolation_1_2"]:
        raw = cp.get("constants", key, fallback=None)
        try:
            value = float(raw)
        except (TypeError, ValueError):
            raise ConstantsError(f"{path}: constant {key!r} missing or not a number") from None
        if not math.isfinite(value) or value <= 0:
            raise ConstantsError(f"{path}: constant {key!r} must be positive and finite")
        out[key] = value
    return out


def hhalf_threshold(constants: dict) -> float:
    """Smallness level for ||u||_{H-dot^{1/2}} below which H-dot^1 must decrease.

    The symmetrized product bound with (s, t) = (1/2, 3/2) gives
    ||u (x) u||_{H-dot^{1/2}} <= 2 C ||u||_{H-dot^{1/2}} ||u||_{H-dot^{3/2}}; the
    threshold is 1 / (2c) with c = 2C.
    """
    return 1.0 / (4.0 * constants["product_symmetric"])
