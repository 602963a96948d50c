"""Diagnostics that turn a simulated series into decay statements.

All limits are replaced by finite-horizon proxies: ratios at the final
output time, first threshold crossings, and monotonicity over the recorded
rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

from .norms import GevreyParams, gevrey_sobolev_norm, l2_norm, sobolev_norm
from .series import DiagnosticSeries
from .spectral import (DEFAULT_EXPONENT_CAP, ExponentCapError, SpectralVector,
                       gevrey_multiplier, high_pass, low_pass)

NORM_KEYS = ("l2", "h1", "h1_dot", "hhalf_dot", "gevrey_h1")
MONOTONE_SLACK = 1e-9


class TooFewShellsError(ValueError):
    pass


def analyticity_radius(v: SpectralVector, noise_floor: float = 1e-14,
                       min_shells: int = 4) -> float:
    """Exponential decay rate r of the spectrum, |u(k)| ~ exp(-r |k|).

    Modes are binned into unit-width shells (in lattice units); the RMS
    amplitude of the populated modes in each shell with index in [2, n/3]
    is fitted by least squares in log space against the mean |k| of those
    modes.  The radius is minus the slope, clamped at zero.
    """
    grid = v.grid
    amp2 = np.abs(v.coeffs) ** 2
    amp2 = amp2 if amp2.ndim == 3 else amp2.sum(axis=0)
    peak = np.sqrt(amp2.max())
    if peak == 0:
        raise TooFewShellsError("field is identically zero")
    shell = np.rint(grid.kmag / grid.spacing).astype(int)
    populated = (amp2 > (noise_floor * peak) ** 2) & ~grid.nyquist_mask
    lo, hi = 2, grid.n // 3
    sel = populated & (shell >= lo) & (shell <= hi)
    bins = shell[sel]
    if bins.size == 0:
        raise TooFewShellsError("no populated shells in the fitting range")
    count = np.bincount(bins, minlength=hi + 1)
    power = np.bincount(bins, weights=amp2[sel], minlength=hi + 1)
    ksum = np.bincount(bins, weights=grid.kmag[sel], minlength=hi + 1)
    used = np.flatnonzero(count > 0)
    if used.size < min_shells:
        raise TooFewShellsError(
            f"need at least {min_shells} populated shells, found {used.size}")
    rms = np.sqrt(power[used] / count[used])
    kbar = ksum[used] / count[used]
    slope = np.polyfit(kbar, np.log(rms), 1)[0]
    return max(0.0, float(-slope))


def gevrey_weight(t: float, t0_cap: float) -> float:
    """phi(t) = min(t, t0_cap)."""
    return min(t, t0_cap)


def y_gevrey(u: SpectralVector, t: float, t0_cap: float = 1.0,
             cap: float = DEFAULT_EXPONENT_CAP) -> float:
    """1 + ||exp(phi(t)|D|) u||_{H^1}^2."""
    weighted = gevrey_multiplier(u, gevrey_weight(t, t0_cap), 1.0, cap)
    return 1.0 + float(sobolev_norm(weighted, 1.0)) ** 2


def diagnostic_record(u: SpectralVector, t: float, gevrey: GevreyParams, deltas,
                      t0_cap: float = 1.0, cap: float = DEFAULT_EXPONENT_CAP) -> dict:
    row = {
        "t": t,
        "l2": l2_norm(u),
        "h1": sobolev_norm(u, 1.0),
        "h1_dot": sobolev_norm(u, 1.0, homogeneous=True),
        "hhalf_dot": sobolev_norm(u, 0.5, homogeneous=True),
        "gevrey_h1": gevrey_sobolev_norm(u, GevreyParams(gevrey.a, gevrey.sigma, 1.0), cap),
        "dissipation": float(sobolev_norm(u, 1.0, homogeneous=True)) ** 2,
    }
    try:
        row["radius"] = analyticity_radius(u)
    except TooFewShellsError:
        row["radius"] = math.nan
    for d in deltas:
        tag = f"{float(d):g}"
        row[f"omega_l2_{tag}"] = l2_norm(low_pass(u, d))
        row[f"v_l2_{tag}"] = l2_norm(high_pass(u, d))
    try:
        row["y_gevrey"] = y_gevrey(u, t, t0_cap, cap)
    except ExponentCapError:
        row["y_gevrey"] = math.nan
    return row


def _check_times(t: np.ndarray):
    if t.size > 1 and np.any(np.diff(t) <= 0):
        raise ValueError("time column is not strictly increasing")


@dataclass(frozen=True)
class EnergyBalance:
    residual: float
    relative_residual: float
    energy_violations: int

    @property
    def monotone(self) -> bool:
        return self.energy_violations == 0


def energy_balance(series: DiagnosticSeries, nu: float = 1.0) -> EnergyBalance:
    """max_t |E(t) + 2 nu int_0^t ||grad u||^2 - E(0)| with E = ||u||_{L2}^2.

    The dissipation integral uses the trapezoidal rule on the output rows.
    """
    t = series.t
    _check_times(t)
    energy = series["l2"] ** 2
    dissipated = cumulative_trapezoid(series["dissipation"], t, initial=0.0)
    residual = float(np.max(np.abs(energy + 2 * nu * dissipated - energy[0])))
    violations = int(np.count_nonzero(np.diff(energy) > 0))
    rel = residual / energy[0] if energy[0] > 0 else residual
    return EnergyBalance(residual, float(rel), violations)


@dataclass(frozen=True)
class MonotonicityResult:
    passed: bool
    first_violation: int | None = None
    violation_time: float | None = None

    def __bool__(self):
        return self.passed


def monotonicity_check(series: DiagnosticSeries, norm_key: str, from_t: float = 0.0,
                       slack: float = MONOTONE_SLACK) -> MonotonicityResult:
    """Rows at t >= from_t must satisfy x[i+1] <= x[i] * (1 + slack).

    ``first_violation`` is the row index of the first value that went up.
    """
    if norm_key not in series.columns:
        raise KeyError(f"unknown norm key {norm_key!r}")
    t = series.t
    if not t[0] <= from_t <= t[-1]:
        raise ValueError(f"from_t={from_t} outside series range [{t[0]}, {t[-1]}]")
    x = series[norm_key]
    start = int(np.searchsorted(t, from_t, side="left"))
    for i in range(start, len(x) - 1):
        if x[i + 1] > x[i] + slack * abs(x[i]):
            return MonotonicityResult(False, i + 1, float(t[i + 1]))
    return MonotonicityResult(True)


def monotone_after(t: np.ndarray, x: np.ndarray, slack: float = MONOTONE_SLACK) -> float:
    """Earliest time from which x is nonincreasing through the last row."""
    i = len(x) - 1
    while i > 0 and x[i] <= x[i - 1] + slack * abs(x[i - 1]):
        i -= 1
    return float(t[i])


@dataclass(frozen=True)
class SplitEntry:
    delta: float
    sup_omega: float
    v_time_integral: float


@dataclass(frozen=True)
class SplitReport:
    entries: tuple[SplitEntry, ...]  # sorted by decreasing delta

    @property
    def omega_nonincreasing(self) -> bool:
        s = [e.sup_omega for e in self.entries]
        return all(b <= a for a, b in zip(s, s[1:]))

    @property
    def omega_strictly_decreasing(self) -> bool:
        s = [e.sup_omega for e in self.entries]
        return all(b < a for a, b in zip(s, s[1:]))

    def by_delta(self, delta: float) -> SplitEntry:
        for e in self.entries:
            if e.delta == float(delta):
                return e
        raise KeyError(delta)


def split_diagnostics(series: DiagnosticSeries, deltas=None) -> SplitReport:
    """sup_t ||omega_delta||_{L2} and int ||v_delta||_{L2}^2 dt for each delta."""
    deltas = series.deltas if deltas is None else tuple(float(d) for d in deltas)
    if not deltas:
        raise ValueError("deltas must be nonempty")
    if any(d <= 0 for d in deltas):
        raise ValueError("deltas must be positive")
    t = series.t
    entries = []
    for d in sorted(deltas, reverse=True):
        omega = series[series.omega_key(d)]
        v = series[series.v_key(d)]
        integral = float(trapezoid(v**2, t)) if len(t) > 1 else 0.0
        entries.append(SplitEntry(d, float(omega.max()), integral))
    return SplitReport(tuple(entries))


@dataclass(frozen=True)
class OdeBound:
    t: np.ndarray
    y: np.ndarray
    K1_hat: float
    T1_hat: float
    doubling_ok: bool
    truncated: bool


def ode_bound_track(series: DiagnosticSeries) -> OdeBound:
    """Estimate K1 in y' <= K1 y^3 from the run and test y <= 2 y(0) on [0, T1].

    ``y_gevrey`` rows that could not be evaluated under the exponent cap are
    recorded as NaN; tracking stops at the first one and ``truncated`` is set.
    """
    t, y = series.t, series["y_gevrey"]
    bad = np.flatnonzero(~np.isfinite(y))
    truncated = bad.size > 0
    if truncated:
        t, y = t[:bad[0]], y[:bad[0]]
    if y.size == 0:
        raise ValueError("no finite y values to track")
    if y.size > 1:
        rate = np.diff(y) / np.diff(t) / y[:-1] ** 3
        k1 = float(max(0.0, rate.max()))
    else:
        k1 = 0.0
    t1 = math.inf if k1 == 0 else 2.0 / (k1 * y[0] ** 2)
    ok = bool(np.all(y[t <= t1] <= 2 * y[0]))
    return OdeBound(t, y, k1, t1, ok, truncated)


@dataclass
class NormDecay:
    initial: float
    final: float
    ratio: float
    crossings: dict = field(default_factory=dict)
    monotone_after: float = 0.0


@dataclass
class DecayReport:
    t_end: float
    norms: dict

    def to_text(self) -> str:
        lines = [
            "# finite-horizon decay proxies; no limit is claimed",
            f"t_end = {self.t_end!r}",
        ]
        for key, d in self.norms.items():
            lines += [
                f"{key}.initial = {d.initial!r}",
                f"{key}.final = {d.final!r}",
                f"{key}.ratio = {d.ratio!r}",
                f"{key}.monotone_after = {d.monotone_after!r}",
            ]
            for thr, tc in d.crossings.items():
                value = "none" if tc is None else repr(tc)
                lines.append(f"{key}.first_below.{thr:g} = {value}")
        return "\n".join(lines) + "\n"


DEFAULT_THRESHOLDS = (0.5, 0.05)


def decay_report(series: DiagnosticSeries, thresholds=None) -> DecayReport:
    """Ratio final/initial and first time each norm drops to a fraction of its start.

    ``thresholds`` maps a norm key to a fraction or list of fractions of the
    initial value.  Zero initial data gives ratio 0 and crossings at t[0].
    """
    if thresholds is None:
        thresholds = {k: DEFAULT_THRESHOLDS for k in NORM_KEYS}
    t = series.t
    keys = list(NORM_KEYS)
    for k in thresholds:
        if k not in series.columns:
            raise KeyError(f"unknown norm key {k!r}")
        if k not in keys:
            keys.append(k)
    out = {}
    for key in keys:
        x = series[key]
        x0, x1 = float(x[0]), float(x[-1])
        ratio = x1 / x0 if x0 > 0 else 0.0
        fracs = thresholds.get(key, ())
        fracs = (fracs,) if np.isscalar(fracs) else tuple(fracs)
        crossings = {}
        for frac in fracs:
            below = np.flatnonzero(x <= frac * x0)
            crossings[float(frac)] = float(t[below[0]]) if below.size else None
        out[key] = NormDecay(x0, x1, ratio, crossings, monotone_after(t, x))
    return DecayReport(float(t[-1]), out)
