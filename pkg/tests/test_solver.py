import numpy as np
import pytest

from hs2.analysis import ScenarioMonitor
from hs2.grid import MeanNotZero, PeriodicGrid
from hs2.solver import SolverConfig, Status, Tracers, fixed_grid, rhs, run, step
from hs2.state import InitialData, integral_abs, realize

from conftest import SIN_OVER_2PI, TWO_PI, series


def state_of(u0, rho0, k, n=64, h=0.0):
    return realize(InitialData(u0, rho0, k), PeriodicGrid(n), h)


@pytest.mark.parametrize("kw", [dict(cfl=0.0), dict(cfl=1.5), dict(dt_min=1e-2, dt_init=1e-3),
                                dict(t_end=0.0), dict(blowup_slope_threshold=1.0),
                                dict(max_n=17)])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        SolverConfig(**kw)


def test_rhs_constant_states():
    du, drho = rhs(state_of(series(0.7), series(), 1))
    assert np.max(np.abs(du)) < 1e-15 and np.max(np.abs(drho)) < 1e-15
    du, drho = rhs(state_of(series(), series(1.3), 1))
    assert np.max(np.abs(du)) < 1e-15 and np.max(np.abs(drho)) < 1e-15


def test_rhs_closed_form():
    s = state_of(SIN_OVER_2PI, series(), 1, n=128)
    x = s.grid.nodes
    u, ux = np.sin(TWO_PI * x) / TWO_PI, np.cos(TWO_PI * x)
    du, drho = rhs(s)
    np.testing.assert_allclose(du, -u * ux + np.sin(2 * TWO_PI * x) / (8 * TWO_PI), atol=1e-14)
    assert np.max(np.abs(drho)) == 0.0


def test_rhs_adds_gauge_constant():
    s = state_of(SIN_OVER_2PI, series(), 1, n=128, h=0.25)
    du, _ = rhs(s)
    du0, _ = rhs(s.replace(h=0.0))
    np.testing.assert_allclose(du - du0, 0.25, atol=1e-15)


def test_rhs_rejects_inconsistent_a():
    s = state_of(SIN_OVER_2PI, series(), 1)
    with pytest.raises(MeanNotZero):
        rhs(s.replace(a=s.a + 1e-6))


def test_step_zero_state():
    s = state_of(series(), series(), 1)
    out = step(s, SolverConfig())
    assert out.status is Status.SMOOTH and out.dt_used == 1e-3
    assert not out.state.u.any() and not out.state.rho.any()


def test_fixed_point_stays_put():
    s = state_of(series(), series(1.0), 1)
    cfg = SolverConfig()
    for _ in range(1000):
        s = step(s, cfg).state
    assert np.max(np.abs(s.u)) <= 1e-12 and np.max(np.abs(s.rho - 1.0)) <= 1e-12


def test_step_size_follows_cfl():
    s = state_of(series(0.0, (1, 0.0, 2.0)), series(), 1, n=64)
    out = step(s, SolverConfig(cfl=0.5, dt_init=1.0))
    assert abs(out.dt_used - 0.5 / (64 * np.max(np.abs(s.u)))) < 1e-15
    out = step(s, SolverConfig(cfl=0.5, dt_init=1.0), dt_max=1e-4)
    assert out.dt_used == 1e-4


def test_dt_min_trigger():
    s = state_of(series(1e8), series(), 1)
    out = step(s, SolverConfig())
    assert out.status is Status.BLOWUP_SUSPECTED and out.trigger == "dt_min"


def test_nonfinite_without_signature_fails():
    s = state_of(SIN_OVER_2PI, series(), 1)
    u = s.u.copy()
    u[3] = np.nan
    out = step(s.replace(u=u), SolverConfig())
    assert out.status is Status.FAILED


def test_slope_trigger():
    # min u_x = -60 already below the default -50 threshold
    s = state_of(series(0.0, (1, 0.0, 60 / TWO_PI)), series(), 1, n=256)
    out = step(s, SolverConfig(dt_init=1e-6))
    assert out.status is Status.BLOWUP_SUSPECTED and out.trigger == "slope"


def test_rho_x_trigger_only_for_negative_k():
    rho0 = series(0.0, (1, 0.0, 600 / TWO_PI))
    for k, expected in ((-1, Status.BLOWUP_SUSPECTED), (1, Status.SMOOTH)):
        s = state_of(series(), rho0, k, n=256)
        out = step(s, SolverConfig(dt_init=1e-7))
        assert out.status is expected


def test_tail_trigger_at_resolution_cap():
    s = state_of(series(0.0, (20, 0.0, 1e-3)), series(), 1, n=64)
    out = step(s, fixed_grid(SolverConfig()))
    assert out.status is Status.BLOWUP_SUSPECTED and out.trigger == "tail"


def test_grid_refines_before_tail_trigger():
    s = state_of(series(0.0, (20, 0.0, 1e-3)), series(), 1, n=64)
    out = step(s, SolverConfig(max_n=512))
    # at n = 128 mode 20 is no longer in the top third of the kept band
    assert out.status is Status.SMOOTH and out.state.grid.n == 128


def test_run_zero_state():
    s = state_of(series(), series(), 1)
    res = run(s, SolverConfig(t_end=1.0), [ScenarioMonitor()], sample_dt=0.25)
    assert res.status is Status.SMOOTH and res.t_final == 1.0
    assert [r.t for r in res.records] == [0.0, 0.25, 0.5, 0.75, 1.0]
    for r in res.records:
        assert r.min_ux == 0.0 and r.max_ux == 0.0 and r.a_drift == 0.0


def test_run_requires_future_end():
    s = state_of(series(), series(), 1)
    with pytest.raises(ValueError):
        run(s.replace(t=2.0), SolverConfig(t_end=1.0))


def test_half_step_reference_agrees():
    init = InitialData(SIN_OVER_2PI, series(), 1)
    cfg = SolverConfig(t_end=1.0, max_n=None)
    a = run(realize(init, PeriodicGrid(256)), cfg).state
    b = run(realize(init, PeriodicGrid(256)), SolverConfig(t_end=1.0, max_n=None,
                                                           dt_init=5e-4)).state
    assert np.max(np.abs(a.u - b.u)) < 1e-6


def test_smooth_run_conserves():
    init = InitialData(series(0.0, (1, 0.05, 0.1), (2, 0.0, 0.02)),
                       series(0.2, (1, 0.0, 0.6)), 1)
    s = realize(init, PeriodicGrid(128))
    res = run(s, SolverConfig(t_end=0.5), [ScenarioMonitor()], sample_dt=0.1)
    assert res.status is Status.SMOOTH
    I0 = res.records[0].int_abs_rho
    for r in res.records:
        assert abs(r.a_drift) <= 1e-7
        assert abs(r.int_abs_rho - I0) <= 1e-6 * I0
    assert abs(integral_abs(res.state.grid, res.state.rho) - I0) <= 1e-6 * I0


def test_tracers_follow_fixed_point():
    s = state_of(series(), series(1.0), 1)
    tr = Tracers(np.linspace(0, 1, 5, endpoint=False))
    res = run(s, SolverConfig(t_end=0.1), tracers=tr)
    np.testing.assert_allclose(res.tracers.q, tr.x0, atol=1e-15)
    np.testing.assert_allclose(res.tracers.log_qx, 0.0, atol=1e-15)


def test_constant_velocity_translates_tracers():
    s = state_of(series(0.3), series(), 1)
    tr = Tracers([0.1, 0.9])
    res = run(s, SolverConfig(t_end=1.0), tracers=tr)
    np.testing.assert_allclose(res.tracers.q, [0.4, 1.2], atol=1e-12)
