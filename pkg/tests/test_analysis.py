import math

import numpy as np
import pytest

from gevrey_nse.analysis import (TooFewShellsError, analyticity_radius, decay_report,
                                 diagnostic_record, energy_balance, gevrey_weight,
                                 monotone_after, monotonicity_check, ode_bound_track,
                                 split_diagnostics, y_gevrey)
from gevrey_nse.norms import GevreyParams
from gevrey_nse.series import DiagnosticSeries
from gevrey_nse.solver import InitialCondition, SolverConfig, run
from gevrey_nse.spectral import Grid, SpectralVector


def _axis_field(grid, rate):
    """Divergence-free field with |u(k)| = exp(-rate |k|) on the x-axis modes."""
    c = np.zeros((3,) + grid.shape, complex)
    for i in range(1, grid.n // 2):
        c[1, i, 0, 0] = c[1, -i, 0, 0] = math.exp(-rate * i * grid.spacing)
    return SpectralVector(grid, c, True)


def _series(t, **cols):
    deltas = cols.pop("deltas", ())
    s = DiagnosticSeries(deltas)
    n = len(t)
    base = {k: np.zeros(n) for k in s.columns}
    base["t"] = np.asarray(t, float)
    base.update({k: np.asarray(v, float) for k, v in cols.items()})
    for i in range(n):
        s.append({k: base[k][i] for k in s.columns})
    return s


@pytest.mark.parametrize("rate", [0.3, 0.7, 1.5])
def test_radius_of_exponential_spectrum(rate):
    assert analyticity_radius(_axis_field(Grid(32), rate)) == pytest.approx(rate, rel=1e-10)


def test_radius_scales_with_box():
    g = Grid(32, 4 * math.pi)
    assert analyticity_radius(_axis_field(g, 0.7)) == pytest.approx(0.7, rel=1e-10)


def test_radius_needs_shells():
    c = np.zeros((3,) + Grid(16).shape, complex)
    c[1, 1, 0, 0] = c[1, -1, 0, 0] = 1.0
    with pytest.raises(TooFewShellsError):
        analyticity_radius(SpectralVector(Grid(16), c, True))
    with pytest.raises(TooFewShellsError):
        analyticity_radius(SpectralVector(Grid(16), np.zeros_like(c), True))


def test_gevrey_weight_and_y():
    assert gevrey_weight(0.3, 1.0) == 0.3
    assert gevrey_weight(3.0, 1.0) == 1.0
    g = Grid(8)
    c = np.zeros((3,) + g.shape, complex)
    c[1, 1, 0, 0] = c[1, -1, 0, 0] = 0.5
    u = SpectralVector(g, c, True)
    # ||u||_{H^1}^2 = 2 * 0.25 * 2, times e^{2 t}
    assert y_gevrey(u, 0.5) == pytest.approx(1 + math.e)
    assert y_gevrey(u, 5.0, t0_cap=1.0) == pytest.approx(1 + math.e**2)


def test_diagnostic_record_fields():
    g = Grid(16)
    u = _axis_field(g, 0.7)
    row = diagnostic_record(u, 0.0, GevreyParams(0.5, 2.0), (4.0, 1.0))
    assert row["dissipation"] == pytest.approx(float(row["h1_dot"]) ** 2)
    assert row["omega_l2_4"] ** 2 + row["v_l2_4"] ** 2 == pytest.approx(float(row["l2"]) ** 2)
    assert row["omega_l2_1"] == 0.0
    assert row["y_gevrey"] == pytest.approx(1 + float(row["h1"]) ** 2)


def test_energy_balance_heat_mode():
    # single Fourier mode under heat flow: E(t) = E0 e^{-2|k|^2 t}, dissipation exact
    cfg = SolverConfig(n=8, dt=1e-4, t_end=0.1, nonlinear=False,
                       ic=InitialCondition(kind="single_mode", mode=(1, 0, 0), amplitude=1.0))
    eb = energy_balance(run(cfg))
    assert eb.relative_residual <= 1e-8
    assert eb.energy_violations == 0


def test_energy_balance_trapezoid_refines():
    def residual(dt):
        cfg = SolverConfig(n=8, dt=dt, t_end=0.2, nonlinear=False,
                           ic=InitialCondition(kind="single_mode", mode=(1, 1, 0)))
        return energy_balance(run(cfg)).residual

    assert residual(0.01) / residual(0.005) >= 3


def test_energy_balance_flags_growth():
    s = _series([0, 1, 2], l2=[1.0, 1.1, 0.9])
    assert energy_balance(s).energy_violations == 1


def test_monotonicity_check():
    s = _series([0, 1, 2, 3], h1=[1.0, 2.0, 1.5, 1.4])
    res = monotonicity_check(s, "h1")
    assert not res and res.first_violation == 1 and res.violation_time == 1.0
    assert monotonicity_check(s, "h1", from_t=1.0)
    # slack is relative
    s2 = _series([0, 1], h1=[1.0, 1.0 + 1e-12])
    assert monotonicity_check(s2, "h1")
    with pytest.raises(KeyError):
        monotonicity_check(s, "bogus")
    with pytest.raises(ValueError):
        monotonicity_check(s, "h1", from_t=10.0)


def test_monotone_after():
    t = np.arange(5.0)
    assert monotone_after(t, np.array([1, 3, 2, 1, 0.5])) == 1.0
    assert monotone_after(t, np.array([5, 4, 3, 2, 1])) == 0.0
    assert monotone_after(t, np.array([1, 2, 3, 4, 5])) == 4.0


def test_split_diagnostics():
    s = _series([0, 1, 2], deltas=(1.0, 2.0),
                omega_l2_1=[0.1, 0.2, 0.1], omega_l2_2=[0.5, 0.3, 0.2],
                v_l2_1=[1.0, 1.0, 1.0], v_l2_2=[0.5, 0.5, 0.5])
    rep = split_diagnostics(s)
    assert [e.delta for e in rep.entries] == [2.0, 1.0]
    assert rep.by_delta(1.0).sup_omega == pytest.approx(0.2)
    assert rep.by_delta(1.0).v_time_integral == pytest.approx(2.0)
    assert rep.by_delta(2.0).v_time_integral == pytest.approx(0.5)
    assert rep.omega_strictly_decreasing
    with pytest.raises(ValueError):
        split_diagnostics(s, deltas=())
    with pytest.raises(KeyError):
        rep.by_delta(3.0)


def test_split_omega_ordering_holds_pointwise(small_data_run):
    # at every row the low-pass energy is monotone in delta
    _, s = small_data_run
    d = sorted(s.deltas, reverse=True)
    om = np.array([s[s.omega_key(x)] for x in d])
    assert np.all(np.diff(om, axis=0) <= 1e-15)


def test_ode_bound_on_saturating_solution():
    # y' = K y^3 exactly: y doubles at 3 / (8 K y0^2), well before 2 / (K y0^2)
    y0, k1 = 1.5, 0.1
    t_blow = 1 / (2 * k1 * y0**2)
    t = np.linspace(0, 0.8 * t_blow, 2000)
    y = y0 / np.sqrt(1 - 2 * k1 * y0**2 * t)
    ob = ode_bound_track(_series(t, y_gevrey=y))
    assert ob.K1_hat == pytest.approx(k1, rel=0.05)
    assert ob.T1_hat == pytest.approx(2 / (ob.K1_hat * y0**2))
    assert not ob.doubling_ok and not ob.truncated
    t_double = 3 / (8 * k1 * y0**2)
    ob2 = ode_bound_track(_series(t[t < t_double], y_gevrey=y[t < t_double]))
    assert ob2.doubling_ok


def test_ode_bound_heat_single_mode():
    # |k| = 1, nu = 1: the weight e^{2t} cancels the viscous decay while phi(t) = t
    cfg = SolverConfig(n=8, dt=0.01, t_end=1.0, nonlinear=False, output_every=5,
                       ic=InitialCondition(kind="single_mode", mode=(0, 0, 1), amplitude=0.3))
    ob = ode_bound_track(run(cfg))
    np.testing.assert_allclose(ob.y, 1 + 0.3**2, rtol=1e-12)
    assert ob.doubling_ok


def test_ode_bound_zero_data():
    cfg = SolverConfig(n=8, dt=0.01, t_end=0.1, ic=InitialCondition(amplitude=0.0, seed=1))
    ob = ode_bound_track(run(cfg))
    assert np.all(ob.y == 1.0) and ob.K1_hat == 0 and math.isinf(ob.T1_hat) and ob.doubling_ok


def test_ode_bound_truncates_at_nan():
    ob = ode_bound_track(_series([0, 1, 2, 3], y_gevrey=[1.0, 1.1, math.nan, 5.0]))
    assert ob.truncated and len(ob.t) == 2
    assert ob.K1_hat == pytest.approx(0.1)


def test_ode_bound_decreasing_y():
    ob = ode_bound_track(_series([0, 1, 2], y_gevrey=[2.0, 1.5, 1.2]))
    assert ob.K1_hat == 0 and math.isinf(ob.T1_hat) and ob.doubling_ok


def test_decay_report_closed_form_crossing():
    # single mode heat flow: ||u||_{L2} ratio e^{-nu |k|^2 t} reaches 1/2 at ln2 / (nu |k|^2)
    dt, every = 0.001, 5
    cfg = SolverConfig(n=8, dt=dt, t_end=0.5, nonlinear=False, output_every=every,
                       ic=InitialCondition(kind="single_mode", mode=(1, 1, 0)))
    rep = decay_report(run(cfg), {"l2": 0.5})
    tc = rep.norms["l2"].crossings[0.5]
    exact = math.log(2) / 2.0
    assert exact <= tc <= exact + dt * every
    assert rep.norms["l2"].ratio == pytest.approx(math.exp(-2 * 0.5), rel=1e-12)


def test_decay_report_edge_cases():
    s = _series([0, 1], l2=[0.0, 0.0], h1=[1.0, 2.0])
    rep = decay_report(s, {"h1": [0.5]})
    assert rep.norms["l2"].ratio == 0.0
    assert rep.norms["h1"].crossings[0.5] is None
    assert "h1.first_below.0.5 = none" in rep.to_text()
    with pytest.raises(KeyError):
        decay_report(s, {"bogus": 0.5})
