"""Pseudo-spectral integration of incompressible Navier-Stokes on the periodic box.

The pressure never appears: the advective term is Leray projected, so the
velocity stays divergence free.  Time stepping is fourth-order Runge-Kutta
in the integrating-factor variable exp(nu |k|^2 t) u_hat, which makes the
viscous part exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
import scipy.fft

from .analysis import diagnostic_record
from .fields import initial_random_gevrey, initial_taylor_green
from .norms import GevreyParams, linf_norm
from .series import DiagnosticSeries
from .spectral import DEFAULT_EXPONENT_CAP, Grid, SpectralVector, fft_workers, leray_project

IC_KINDS = ("taylor_green", "random_gevrey", "from_file", "single_mode")
DEALIAS_RULES = ("two_thirds", "none")


class ConfigError(ValueError):
    pass


class NumericalInstabilityError(RuntimeError):
    """Raised when the state stops being finite; carries the last good state."""

    def __init__(self, message, last_state=None, series=None):
        super().__init__(message)
        self.last_state = last_state
        self.series = series


@dataclass(frozen=True)
class InitialCondition:
    kind: str = "random_gevrey"
    amplitude: float = 0.1
    q: float = 2.0
    a: float = 0.5
    sigma: float = 2.0
    seed: int | None = None
    path: str | None = None
    mode: tuple[int, int, int] = (1, 0, 0)


@dataclass(frozen=True)
class SolverConfig:
    nu: float = 1.0
    dt: float = 0.01
    t_end: float = 1.0
    n: int = 32
    box_length: float = 2 * math.pi
    dealias: str = "two_thirds"
    nonlinear: bool = True
    output_every: int = 1
    ic: InitialCondition = field(default_factory=InitialCondition)
    gevrey: GevreyParams = field(default_factory=lambda: GevreyParams(0.5, 2.0, 1.0))
    deltas: tuple[float, ...] = (4.0, 2.0, 1.0, 0.5)
    seed: int = 0
    cfl: float = 0.5
    t0_cap: float = 1.0
    exponent_cap: float = DEFAULT_EXPONENT_CAP

    @property
    def grid(self) -> Grid:
        return Grid(self.n, self.box_length)

    @property
    def n_steps(self) -> int:
        return int(math.floor(self.t_end / self.dt + 1e-9))

    def validate(self) -> SolverConfig:
        try:
            self.grid
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if not self.nu > 0:
            raise ConfigError(f"nu must be positive, got {self.nu}")
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if not self.t_end >= 0:
            raise ConfigError(f"t_end must be >= 0, got {self.t_end}")
        if self.dealias not in DEALIAS_RULES:
            raise ConfigError(f"dealias must be one of {DEALIAS_RULES}, got {self.dealias!r}")
        if int(self.output_every) != self.output_every or self.output_every < 1:
            raise ConfigError(f"output_every must be a positive integer, got {self.output_every}")
        if self.ic.kind not in IC_KINDS:
            raise ConfigError(f"initial condition kind must be one of {IC_KINDS}")
        if self.ic.kind == "from_file" and not self.ic.path:
            raise ConfigError("from_file initial condition needs a path")
        if any(d <= 0 for d in self.deltas):
            raise ConfigError("splitting thresholds must be positive")
        if not self.cfl > 0 or not self.t0_cap >= 0 or not self.exponent_cap > 0:
            raise ConfigError("cfl, t0_cap and exponent_cap must be positive")
        return self


@dataclass(frozen=True)
class SimState:
    t: float
    velocity: SpectralVector


def initial_single_mode(grid: Grid, mode, amplitude: float) -> SpectralVector:
    """amplitude * e_perp * cos(k.x) for the lattice vector ``mode``.

    The direction e_perp is the first coordinate axis orthogonal to the mode
    index vector, or its Gram-Schmidt remainder, so the field is divergence
    free.
    """
    m = np.asarray(mode, dtype=float)
    if not np.any(m):
        raise ConfigError("single_mode needs a nonzero mode index")
    for axis in np.eye(3):
        e = axis - (axis @ m) / (m @ m) * m
        if np.linalg.norm(e) > 1e-12:
            break
    e /= np.linalg.norm(e)
    coeffs = np.zeros((3,) + grid.shape, dtype=complex)
    i, j, k = (int(x) % grid.n for x in mode)
    ni, nj, nk = (int(-x) % grid.n for x in mode)
    for c in range(3):
        coeffs[c, i, j, k] += 0.5 * amplitude * e[c]
        coeffs[c, ni, nj, nk] += 0.5 * amplitude * e[c]
    return leray_project(SpectralVector(grid, coeffs))


def initial_velocity(cfg: SolverConfig) -> SpectralVector:
    grid, ic = cfg.grid, cfg.ic
    if ic.kind == "taylor_green":
        try:
            return initial_taylor_green(grid, ic.amplitude)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    if ic.kind == "random_gevrey":
        seed = cfg.seed if ic.seed is None else ic.seed
        return initial_random_gevrey(grid, ic.a, ic.sigma, ic.q, ic.amplitude, seed)
    if ic.kind == "single_mode":
        return initial_single_mode(grid, ic.mode, ic.amplitude)
    if ic.kind == "from_file":
        from .snapshot import SnapshotError, read_snapshot

        try:
            _, u = read_snapshot(ic.path)
        except (OSError, SnapshotError) as exc:
            raise ConfigError(f"cannot load initial snapshot: {exc}") from None
        if u.grid != grid:
            raise ConfigError(f"snapshot grid {u.grid} does not match config grid {grid}")
        return leray_project(u)
    raise ConfigError(f"unknown initial condition kind {ic.kind!r}")


def _mask(grid: Grid, rule: str) -> np.ndarray:
    return grid.dealias_mask if rule == "two_thirds" else ~grid.nyquist_mask


_PAIRS = ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2))
_PAIR_INDEX = {}
for _p, (_i, _j) in enumerate(_PAIRS):
    _PAIR_INDEX[_i, _j] = _PAIR_INDEX[_j, _i] = _p


def nonlinear_term(u: SpectralVector, dealias: str = "two_thirds") -> SpectralVector:
    """-P div(u (x) u), products formed in physical space and truncated."""
    ops = _half_ops(u.grid, dealias)
    return SpectralVector(u.grid, ops.to_full(ops.rhs(ops.to_half(u.coeffs))), True)


class _HalfSpectrumOps:
    """Operators on the non-redundant half spectrum (last axis 0..n/2) of a real field."""

    def __init__(self, grid: Grid, dealias: str):
        self.grid = grid
        n, h = grid.n, grid.n // 2
        self.n, self.h = n, h
        self.mask = np.ascontiguousarray(_mask(grid, dealias)[..., :h + 1])
        self.k = [np.ascontiguousarray(k[..., :h + 1]) for k in np.broadcast_arrays(*grid.k)]
        k2 = grid.k2[..., :h + 1]
        inv = np.divide(1.0, k2, out=np.zeros_like(k2), where=k2 > 0)
        self.k2 = k2
        # -P applied to i*k_j*(...): combined per-pair weights
        self.proj = {(i, j): (i == j) - self.k[i] * self.k[j] * inv
                     for i in range(3) for j in range(3)}

    def to_half(self, coeffs: np.ndarray) -> np.ndarray:
        return np.ascontiguousarray(coeffs[..., :self.h + 1])

    def to_full(self, half: np.ndarray) -> np.ndarray:
        n, h = self.n, self.h
        full = np.zeros(half.shape[:-1] + (n,), dtype=complex)
        full[..., :h + 1] = half
        mirrored = self.grid.negate_index(full)
        full[..., h + 1:] = np.conj(mirrored[..., h + 1:])
        return np.where(self.grid.nyquist_mask, 0, full)

    def rhs(self, half: np.ndarray) -> np.ndarray:
        n = self.n
        workers = fft_workers()
        u = np.where(self.mask, half, 0)
        with np.errstate(over="ignore", invalid="ignore"):
            phys = scipy.fft.irfftn(u, s=(n, n, n), axes=(-3, -2, -1), workers=workers) * n**3
            prods = np.stack([phys[i] * phys[j] for i, j in _PAIRS])
            ph = scipy.fft.rfftn(prods, axes=(-3, -2, -1), workers=workers) / n**3
        if not np.all(np.isfinite(ph)):
            raise NumericalInstabilityError("non-finite values in the advective products")
        ph *= self.mask
        # D_i = i sum_j k_j (u_i u_j)
        d = [1j * (self.k[0] * ph[_PAIR_INDEX[i, 0]] + self.k[1] * ph[_PAIR_INDEX[i, 1]]
                   + self.k[2] * ph[_PAIR_INDEX[i, 2]]) for i in range(3)]
        out = np.empty((3,) + ph.shape[1:], dtype=complex)
        for i in range(3):
            out[i] = -(self.proj[i, 0] * d[0] + self.proj[i, 1] * d[1] + self.proj[i, 2] * d[2])
        return out


@lru_cache(maxsize=16)
def _half_ops(grid: Grid, dealias: str) -> _HalfSpectrumOps:
    return _HalfSpectrumOps(grid, dealias)


@lru_cache(maxsize=16)
def _viscous_factors(grid: Grid, nu: float, dt: float):
    h = grid.n // 2
    k2 = grid.k2[..., :h + 1]
    return np.exp(-nu * k2 * dt), np.exp(-nu * k2 * dt / 2)


def _advance(half: np.ndarray, cfg: SolverConfig, ops: _HalfSpectrumOps) -> np.ndarray:
    full, half_f = _viscous_factors(ops.grid, cfg.nu, cfg.dt)
    dt = cfg.dt
    if not cfg.nonlinear:
        return full * half
    k1 = ops.rhs(half)
    k2 = ops.rhs(half_f * (half + 0.5 * dt * k1))
    k3 = ops.rhs(half_f * half + 0.5 * dt * k2)
    k4 = ops.rhs(full * half + dt * half_f * k3)
    return full * half + dt / 6 * (full * k1 + 2 * half_f * (k2 + k3) + k4)


def step(state: SimState, cfg: SolverConfig) -> SimState:
    """Advance one integrating-factor RK4 step of size ``cfg.dt``."""
    grid = state.velocity.grid
    ops = _half_ops(grid, cfg.dealias)
    if not cfg.nonlinear:
        full, _ = _viscous_factors_full(grid, cfg.nu, cfg.dt)
        new = full * state.velocity.coeffs
    else:
        new = ops.to_full(_advance(ops.to_half(state.velocity.coeffs), cfg, ops))
    if not np.all(np.isfinite(new)):
        raise NumericalInstabilityError(f"state became non-finite after t={state.t}",
                                        last_state=state)
    return SimState(state.t + cfg.dt, SpectralVector(grid, new, True))


@lru_cache(maxsize=16)
def _viscous_factors_full(grid: Grid, nu: float, dt: float):
    return np.exp(-nu * grid.k2 * dt), np.exp(-nu * grid.k2 * dt / 2)


def check_cfl(cfg: SolverConfig, u: SpectralVector):
    umax = float(linf_norm(u))
    if cfg.nonlinear and umax > 0:
        bound = cfg.cfl / (cfg.n * umax)
        if cfg.dt > bound:
            raise ConfigError(f"dt={cfg.dt} violates the CFL bound {bound:.4g} "
                              f"(cfl={cfg.cfl}, n={cfg.n}, max|u|={umax:.4g})")


def run(cfg: SolverConfig, u0: SpectralVector | None = None,
        on_output: Callable[[SimState], None] | None = None) -> DiagnosticSeries:
    """Integrate from t = 0 to t_end, recording diagnostics every ``output_every`` steps."""
    cfg.validate()
    u = initial_velocity(cfg) if u0 is None else u0
    if u.grid != cfg.grid:
        raise ConfigError(f"initial field grid {u.grid} does not match config grid {cfg.grid}")
    check_cfl(cfg, u)
    series = DiagnosticSeries(cfg.deltas)
    state = SimState(0.0, u)

    def record(s: SimState):
        series.append(diagnostic_record(s.velocity, s.t, cfg.gevrey, cfg.deltas,
                                        cfg.t0_cap, cfg.exponent_cap))
        if on_output is not None:
            on_output(s)

    record(state)
    grid = cfg.grid
    ops = _half_ops(grid, cfg.dealias)
    if cfg.nonlinear:
        current = ops.to_half(u.coeffs)
    else:
        factor, _ = _viscous_factors_full(grid, cfg.nu, cfg.dt)
        current = u.coeffs
    for m in range(1, cfg.n_steps + 1):
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                new = _advance(current, cfg, ops) if cfg.nonlinear else factor * current
            if not np.all(np.isfinite(new)):
                raise NumericalInstabilityError("non-finite state")
        except NumericalInstabilityError as exc:
            last = SimState((m - 1) * cfg.dt, _as_field(current, cfg, ops))
            raise NumericalInstabilityError(f"{exc} during the step from t={last.t}",
                                            last_state=last, series=series) from None
        current = new
        if m % cfg.output_every == 0:
            # time from the step count, not accumulated sums
            record(SimState(m * cfg.dt, _as_field(current, cfg, ops)))
    return series


def _as_field(current: np.ndarray, cfg: SolverConfig, ops: _HalfSpectrumOps) -> SpectralVector:
    coeffs = ops.to_full(current) if cfg.nonlinear else current
    return SpectralVector(cfg.grid, coeffs, True)
