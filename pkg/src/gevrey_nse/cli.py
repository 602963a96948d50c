"""Command line entry point: ``gevrey-nse {simulate,check,analyze,calibrate}``.

Exit codes: 0 success, 1 configuration or input error, 2 numerical abort
(simulate) or inequality violations (check).  Errors go to stderr as
``error[<kind>]: <message>``.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import decay_report, energy_balance, ode_bound_track, split_diagnostics
from .config import RunManifest, read_config
from .series import DiagnosticSeries, SeriesFormatError
from .snapshot import SnapshotError, write_snapshot
from .solver import (ConfigError, NumericalInstabilityError, SimState, check_cfl,
                     initial_velocity, run)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2


def _error(kind: str, message: str):
    print(f"error[{kind}]: {message}", file=sys.stderr)


# -- simulate -----------------------------------------------------------------

def cmd_simulate(args) -> int:
    try:
        cfg = read_config(args.config)
        if cfg.ic.path and not Path(cfg.ic.path).is_absolute():
            resolved = str((Path(args.config).parent / cfg.ic.path).resolve())
            cfg = replace(cfg, ic=replace(cfg.ic, path=resolved))
        u0 = initial_velocity(cfg)
        check_cfl(cfg, u0)
    except (ConfigError, SnapshotError) as exc:
        _error("config", str(exc))
        return EXIT_CONFIG
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        _error("io", f"cannot create output directory {out}: {exc}")
        return EXIT_CONFIG
    csv_path, manifest_path = out / "series.csv", out / "manifest.ini"
    last: list[SimState] = []
    checkpoints: list[str] = []

    def on_output(state: SimState):
        last[:] = [state]
        step_index = int(round(state.t / cfg.dt))
        if args.checkpoint_every and step_index % (args.checkpoint_every * cfg.output_every) == 0:
            path = out / f"checkpoint_{step_index:08d}.snap"
            write_snapshot(path, state.t, state.velocity)
            checkpoints.append(path.name)

    status = EXIT_OK
    try:
        series = run(cfg, u0, on_output=on_output)
    except NumericalInstabilityError as exc:
        _error("numerical", str(exc))
        series = exc.series
        status = EXIT_NUMERICAL
    if series is not None:
        series.to_csv(csv_path)
    outputs = [csv_path.name]
    if last:
        write_snapshot(out / "final.snap", last[0].t, last[0].velocity)
        outputs.append("final.snap")
    outputs += checkpoints
    RunManifest(str(args.config), cfg, "simulate", tuple(outputs), cfg.seed).write(manifest_path)
    if status == EXIT_OK:
        print(f"simulate: {len(series)} rows written to {csv_path}")
    return status


# -- check --------------------------------------------------------------------

class _Tally:
    def __init__(self):
        self.violations = 0

    def line(self, name: str, passed: int, total: int, worst: float, worst_label="worst"):
        self.violations += total - passed
        status = "PASS" if passed == total else "FAIL"
        print(f"{status} {name}: {passed}/{total} {worst_label}={worst:.6g}")


def _suite_transforms(seed: int, tally: _Tally):
    from .fields import random_scalar, random_solenoidal
    from .norms import l2_norm
    from .spectral import (Grid, SpectralVector, gevrey_multiplier, high_pass, imag_residue,
                           leray_project, low_pass, transform_forward, transform_inverse)

    rng = np.random.default_rng([seed, 11])
    grid = Grid(16)
    errs = []
    for _ in range(20):
        x = rng.standard_normal(grid.shape)
        back = transform_inverse(transform_forward(x, grid))
        errs.append(np.abs(back - x).max() / np.abs(x).max())
    tally.line("round trip (rel err <= 1e-12)", sum(e <= 1e-12 for e in errs), len(errs), max(errs))
    errs = []
    for _ in range(100):
        x = rng.standard_normal(grid.shape)
        f = transform_forward(x, grid)
        errs.append(abs(np.mean(x**2) - l2_norm(f) ** 2) / np.mean(x**2))
    tally.line("Plancherel (rel err <= 1e-10)", sum(e <= 1e-10 for e in errs), len(errs), max(errs))
    errs = []
    for _ in range(20):
        u = random_solenoidal(grid, rng)
        raw = SpectralVector(grid, u.coeffs + 1j * grid.k_vector * random_scalar(grid, rng).coeffs)
        p = leray_project(raw)
        errs.append(np.abs(leray_project(p).coeffs - p.coeffs).max() / np.abs(p.coeffs).max())
    tally.line("Leray idempotence (<= 1e-12)", sum(e <= 1e-12 for e in errs), len(errs), max(errs))
    exact = 0
    for delta in (0.5, 1.0, 1.5, 2.0, 3.7, 100.0):
        f = random_scalar(grid, rng)
        exact += int(np.array_equal((low_pass(f, delta) + high_pass(f, delta)).coeffs, f.coeffs))
    tally.line("low/high partition (bit exact)", exact, 6, 0.0)
    errs = []
    for tau1, tau2 in ((0.1, 0.2), (0.3, 0.05), (0.0, 0.4)):
        u = random_solenoidal(grid, rng)
        a = gevrey_multiplier(gevrey_multiplier(u, tau1, 0.5), tau2, 0.5).coeffs
        b = gevrey_multiplier(u, tau1 + tau2, 0.5).coeffs
        errs.append(np.abs(a - b).max() / np.abs(b).max())
    tally.line("Gevrey semigroup (<= 1e-10)", sum(e <= 1e-10 for e in errs), len(errs), max(errs))
    res = [imag_residue(gevrey_multiplier(random_scalar(grid, rng), 0.3, 1.0)) for _ in range(10)]
    tally.line("radial multiplier reality (<= 1e-12)", sum(r <= 1e-12 for r in res), len(res), max(res))


def _suite_oracles(seed: int, tally: _Tally):
    from .fields import initial_random_gevrey, initial_taylor_green, random_solenoidal
    from .oracles import brute_force_dft, direct_nonlinear_term
    from .solver import InitialCondition, SolverConfig, nonlinear_term
    from .spectral import Grid, fft3

    rng = np.random.default_rng([seed, 12])
    g4 = Grid(4)
    x = rng.standard_normal(g4.shape)
    err = float(np.abs(fft3(x) - brute_force_dft(x)).max())
    tally.line("FFT vs brute-force DFT on 4^3", int(err <= 1e-12), 1, err)

    g8 = Grid(8)
    errs = []
    for _ in range(5):
        u = random_solenoidal(g8, rng, 1.0)
        errs.append(float(np.abs(nonlinear_term(u).coeffs - direct_nonlinear_term(u.coeffs, g8)).max()))
    tally.line("nonlinear term vs triad sums on 8^3", sum(e <= 1e-10 for e in errs), len(errs), max(errs))

    cfg = SolverConfig(n=16, dt=0.01, t_end=1.0, nonlinear=False, output_every=100)
    u0 = initial_random_gevrey(cfg.grid, 0.5, 2.0, 2.0, 0.1, seed)
    last = []
    run(cfg, u0, on_output=lambda s: last.append(s))
    exact = u0.coeffs * np.exp(-cfg.nu * cfg.grid.k2 * last[-1].t)
    nz = np.abs(exact) > 0
    rel = float(np.max(np.abs(last[-1].velocity.coeffs[nz] - exact[nz]) / np.abs(exact[nz])))
    tally.line("heat-only exactness 16^3 (<= 1e-10)", int(rel <= 1e-10), 1, rel)

    cfg = SolverConfig(n=16, dt=0.01, t_end=0.5, output_every=5,
                       ic=InitialCondition(kind="taylor_green", amplitude=1.0))
    s = run(cfg)
    err = float(np.max(np.abs(s["l2"] / s["l2"][0] - np.exp(-2 * cfg.nu * s.t))))
    tally.line("Taylor-Green decay 16^3 (<= 1e-6)", int(err <= 1e-6), 1, err)
    n_tg = float(np.abs(nonlinear_term(initial_taylor_green(Grid(16))).coeffs).max())
    tally.line("Taylor-Green nonlinearity projected away", int(n_tg <= 1e-12), 1, n_tg)


def _suite_inequalities(seed: int, tally: _Tally, constants: dict):
    from . import inequalities as ineq
    from .fields import random_scalar, random_solenoidal
    from .norms import fourier_l1, linf_norm
    from .spectral import Grid

    grid = Grid(ineq.ENSEMBLE_N)
    rng = np.random.default_rng([seed, 13])
    c_lat = constants["lattice_interpolation_1_2"]
    fresh = ineq.lattice_interpolation_constant(grid, 1.0, 2.0)
    tally.line("lattice constant matches file (rel 1e-9)",
               int(abs(fresh - c_lat) <= 1e-9 * fresh), 1, abs(fresh - c_lat))
    linf_ok, reports = 0, []
    for _ in range(100):
        f = random_scalar(grid, rng, rng.uniform(*ineq.SLOPE_RANGE))
        linf_ok += int(linf_norm(f) <= fourier_l1(f) * (1 + 1e-12))
        reports.append(ineq.interpolation_bound(f, 1.0, 2.0, c_lat))
    tally.line("Linf <= Fourier L1", linf_ok, 100, 0.0)
    tally.line("Fourier L1 <= c' H1^1/2 H2^1/2", sum(r.passed for r in reports), 100,
               max(r.ratio for r in reports) / c_lat, "worst ratio/c'")
    for name, label in ineq.FITTED_CHECKS.items():
        c = constants[name]
        reports = ineq.run_ensemble(name, 500, seed, ineq.STREAM_B, c)
        tally.line(f"{label} (C={c:.4g})", sum(r.passed for r in reports), len(reports),
                   max(r.ratio for r in reports), "worst ratio")
    ys = ineq.young_split(1.0, 2.0, 0.5)
    tally.line(f"Young split c3={ys.c3:g}", int(ys.violations == 0 and ys.c3 == 1.0), 1,
               ys.report.ratio, "worst lhs/rhs")
    reports = []
    for _ in range(100):
        v = random_solenoidal(grid, rng, rng.uniform(*ineq.SLOPE_RANGE))
        reports.append(ineq.gevrey_sandwich(v, 0.5, 2.0, 0.4))
    tally.line("Gevrey sandwich (constant e^{2 c3})", sum(r.passed for r in reports), 100,
               max(r.ratio for r in reports), "worst ratio")


def cmd_check(args) -> int:
    from .inequalities import ConstantsError, load_constants

    tally = _Tally()
    start = time.perf_counter()
    if args.suite == "inequalities":
        try:
            constants = load_constants(args.constants)
        except ConstantsError as exc:
            _error("constants", f"{exc}; regenerate with `gevrey-nse calibrate --out <path>`")
            return EXIT_CONFIG
        _suite_inequalities(args.seed, tally, constants)
    elif args.suite == "transforms":
        _suite_transforms(args.seed, tally)
    else:
        _suite_oracles(args.seed, tally)
    print(f"check {args.suite}: {tally.violations} violation(s) "
          f"in {time.perf_counter() - start:.1f}s")
    return EXIT_OK if tally.violations == 0 else EXIT_NUMERICAL


# -- analyze ------------------------------------------------------------------

def _parse_thresholds(items) -> dict:
    out = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise ValueError(f"threshold {item!r} is not of the form key=value")
        out.setdefault(key.strip(), []).append(float(value))
    return out


def cmd_analyze(args) -> int:
    try:
        series = DiagnosticSeries.from_csv(args.input)
    except SeriesFormatError as exc:
        _error("csv", f"{args.input}: {exc}")
        return EXIT_CONFIG
    except OSError as exc:
        _error("io", f"cannot read {args.input}: {exc}")
        return EXIT_CONFIG
    try:
        thresholds = _parse_thresholds(args.threshold) or None
        report = decay_report(series, thresholds)
    except (KeyError, ValueError) as exc:
        _error("threshold", str(exc))
        return EXIT_CONFIG
    lines = [report.to_text().rstrip("\n")]
    eb = energy_balance(series, args.nu)
    lines += [f"energy.residual = {eb.residual!r}",
              f"energy.relative_residual = {eb.relative_residual!r}",
              f"energy.violations = {eb.energy_violations}"]
    if series.deltas:
        split = split_diagnostics(series)
        for e in split.entries:
            lines += [f"split.{e.delta:g}.sup_omega = {e.sup_omega!r}",
                      f"split.{e.delta:g}.v_time_integral = {e.v_time_integral!r}"]
        lines.append(f"split.omega_strictly_decreasing = {str(split.omega_strictly_decreasing).lower()}")
    try:
        ob = ode_bound_track(series)
        t1 = "inf" if math.isinf(ob.T1_hat) else repr(ob.T1_hat)
        lines += [f"ode.K1_hat = {ob.K1_hat!r}", f"ode.T1_hat = {t1}",
                  f"ode.doubling_ok = {str(ob.doubling_ok).lower()}",
                  f"ode.truncated = {str(ob.truncated).lower()}"]
    except ValueError:
        lines.append("ode.tracked = false")
    text = "\n".join(lines) + "\n"
    if args.report:
        Path(args.report).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- calibrate ----------------------------------------------------------------

def cmd_calibrate(args) -> int:
    from .inequalities import fit_constants, write_constants

    fitted = fit_constants(args.seed, args.members, args.margin)
    write_constants(args.out, fitted, args.seed, args.members, args.margin)
    for name, v in fitted.items():
        print(f"{name}: max_ratio={v['max_ratio']:.6g} constant={v['constant']:.6g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gevrey-nse", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run the solver from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--checkpoint-every", type=int, default=0,
                   help="write a snapshot every N output rows (0: final state only)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("check", help="run a verification suite")
    p.add_argument("--suite", required=True, choices=("inequalities", "transforms", "oracles"))
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--constants", default=None, help="constants file (default: packaged)")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("analyze", help="decay, energy, splitting and ODE reports from a CSV")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--report", default=None, help="output path (default: stdout)")
    p.add_argument("--threshold", action="append", metavar="KEY=FRACTION",
                   help="report first time KEY <= FRACTION * initial; repeatable")
    p.add_argument("--nu", type=float, default=1.0)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("calibrate", help="fit inequality constants on ensemble A")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--members", type=int, default=200)
    p.add_argument("--margin", type=float, default=1.25)
    p.set_defaults(func=cmd_calibrate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
