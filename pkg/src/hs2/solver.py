"""Pseudospectral RK4 integration of the nonlocal evolution form.

The unknowns obey::

    u_t + u u_x = d^-1( k/2 rho^2 + 1/2 u_x^2 + a ) + h
    rho_t + (rho u)_x = 0

where ``d^-1 g(x) = int_0^x g``. Blow-up is detected, not resolved: a run
stops with :attr:`Status.BLOWUP_SUSPECTED` once the slope, density-gradient,
step-size or spectral-tail thresholds trip. Before the tail threshold is
allowed to stop a run the grid is doubled (exact zero-padding) while the
resolution cap ``max_n`` permits.
"""

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from . import kernels
from .diagnostics import DiagnosticsRecord
from .grid import MeanNotZero, PeriodicGrid

__all__ = ["SolverConfig", "Status", "StepOutcome", "RunResult", "Tracers",
           "rhs", "step", "run", "MeanNotZero"]


class Status(str, enum.Enum):
    SMOOTH = "Smooth"
    BLOWUP_SUSPECTED = "BlowUpSuspected"
    FAILED = "Failed"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class SolverConfig:
    cfl: float = 0.3
    dt_init: float = 1e-3
    dt_min: float = 1e-9
    t_end: float = 1.0
    dealias: bool = True
    a_drift_tol: float = 1e-7
    blowup_slope_threshold: float = -50.0
    tail_energy_frac: float = 1e-4
    mean_tol: float = 1e-8
    # resolution cap for tail-driven grid doubling; None keeps the grid fixed
    max_n: int = 32768
    refine_tail_frac: float = 1e-10

    def __post_init__(self):
        if not 0.0 < self.cfl <= 1.0:
            raise ValueError(f"cfl must lie in (0, 1], got {self.cfl}")
        if not 0.0 < self.dt_min < self.dt_init:
            raise ValueError("need 0 < dt_min < dt_init")
        if not self.t_end > 0.0:
            raise ValueError("t_end must be positive")
        if self.blowup_slope_threshold >= 0.0:
            raise ValueError("blowup_slope_threshold must be negative")
        if self.max_n is not None and (self.max_n < 16 or self.max_n % 2):
            raise ValueError("max_n must be an even integer >= 16")

    @property
    def rho_x_threshold(self):
        return 10.0 * abs(self.blowup_slope_threshold)


@dataclass
class Tracers:
    """Lagrangian markers advected by the interpolated Eulerian velocity.

    ``q`` is unwrapped (not reduced mod 1) and ``log_qx`` accumulates the
    integral of ``u_x`` along each marker, so ``q_x = exp(log_qx) > 0``.
    """

    x0: np.ndarray
    q: np.ndarray = None
    log_qx: np.ndarray = None

    def __post_init__(self):
        self.x0 = np.asarray(self.x0, dtype=float)
        if self.q is None:
            self.q = self.x0.copy()
        if self.log_qx is None:
            self.log_qx = np.zeros_like(self.x0)

    def copy(self):
        return Tracers(self.x0.copy(), self.q.copy(), self.log_qx.copy())


@dataclass
class StepOutcome:
    state: object
    dt_used: float
    status: Status
    trigger: str = None
    tracers: Tracers = None


@dataclass
class RunResult:
    state: object
    status: Status
    trigger: str = None
    records: list = field(default_factory=list)
    tracers: Tracers = None
    steps: int = 0

    @property
    def t_final(self):
        return self.state.t


# ----------------------------------------------------------------------------
# right-hand side

def rhs(state, mean_tol=1e-8):
    """Time derivatives ``(u_t, rho_t)`` of ``state`` on its grid.

    Raises
    ------
    MeanNotZero
        If the nonlocal integrand has drifted away from zero mean, i.e. the
        state no longer matches its constant ``a``.
    """
    grid = state.grid
    u, rho = state.u, state.rho
    ux = grid.derivative(u)
    integrand = grid.filter(0.5 * state.k * rho * rho + 0.5 * ux * ux) + state.a
    du = -grid.filter(u * ux) + grid.antiderivative_from_zero(integrand, mean_tol) + state.h
    drho = -grid.derivative(grid.filter(rho * u))
    return du, drho


class _Spectral:
    """Spectral-space RHS for one grid; the hot path of :func:`step`."""

    def __init__(self, grid, k, a, h, mean_tol):
        self.grid = grid
        self.n = grid.n
        self.k, self.a, self.h = k, a, h
        self.mean_tol = mean_tol
        self.ik = grid.ik
        self.drop = ~grid.keep if grid.dealias else None
        inv = np.zeros(grid.modes.size, dtype=complex)
        inv[1:-1] = 1.0 / (2j * np.pi * grid.modes[1:-1])
        self.inv_ik = inv
        w = np.full(grid.modes.size, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        self.w = w

    def __call__(self, U, R, q=None, check=False):
        n = self.n
        u = sfft.irfft(U, n)
        ux = sfft.irfft(self.ik * U, n)
        Q = sfft.rfft(u * ux)
        if R.any():
            rho = sfft.irfft(R, n)
            P = sfft.rfft(0.5 * self.k * rho * rho + 0.5 * ux * ux)
            S = sfft.rfft(rho * u)
        else:
            # rho stays identically zero; skip its transforms
            P = sfft.rfft(0.5 * ux * ux)
            S = np.zeros_like(R)
        if self.drop is not None:
            P[self.drop] = 0.0
            Q[self.drop] = 0.0
            S[self.drop] = 0.0
        if check:
            mean = P[0].real / n + self.a
            if not abs(mean) <= self.mean_tol:
                raise MeanNotZero(f"mean of nonlocal integrand is {mean:.3e}")
        # inv_ik drops mode 0, so RK stages (which conserve a only to O(dt^2))
        # still get a periodic antiderivative
        A = P * self.inv_ik
        # pin the antiderivative to zero at x = 0
        A[0] = -np.dot(self.w[1:], A[1:].real)
        dU = A - Q
        dU[0] += self.h * n
        dR = -self.ik * S
        if q is None:
            return dU, dR, None, None
        dq = kernels.trig_eval(U, n, q)
        dl = kernels.trig_eval(self.ik * U, n, q)
        return dU, dR, dq, dl


def _tail(grid, U, R):
    return max(grid.tail_fraction(U, weight_derivative=True), grid.tail_fraction(R))


def _refine(state):
    grid = state.grid
    fine = grid.refined()
    return state.replace(u=grid.resample(state.u, fine), rho=grid.resample(state.rho, fine),
                         grid=fine)


def _min_ux(grid, U):
    return float(sfft.irfft(grid.ik * U, grid.n).min())


def step(state, cfg, dt_max=None, tracers=None):
    """Advance ``state`` by one classical RK4 step.

    The step is ``min(cfl / (n max|u|), dt_init, dt_max)``. Status is
    ``BlowUpSuspected`` when min u_x falls below the slope threshold, the step
    falls below ``dt_min``, the spectral tail exceeds ``tail_energy_frac`` at
    the resolution cap, or (k = -1) sup|rho_x| exceeds ten times the slope
    threshold; ``Failed`` when non-finite values appear without such a
    signature.
    """
    max_n = cfg.max_n if cfg.max_n is not None else state.grid.n
    grid = state.grid
    U = sfft.rfft(state.u)
    R = sfft.rfft(state.rho)
    tail = _tail(grid, U, R)
    while tail > cfg.refine_tail_frac and grid.n < max_n:
        state = _refine(state)
        grid = state.grid
        U = sfft.rfft(state.u)
        R = sfft.rfft(state.rho)
        tail = _tail(grid, U, R)
    pre_min_ux = _min_ux(grid, U)
    signature = pre_min_ux < cfg.blowup_slope_threshold / 5.0 or tail > 1e-2 * cfg.tail_energy_frac

    umax = float(np.abs(state.u).max())
    dt = cfg.dt_init if umax == 0.0 else min(cfg.cfl / (grid.n * umax), cfg.dt_init)
    if dt < cfg.dt_min:
        return StepOutcome(state, 0.0, Status.BLOWUP_SUSPECTED, "dt_min", tracers)
    if dt_max is not None:
        dt = min(dt, dt_max)

    f = _Spectral(grid, state.k, state.a, state.h, cfg.mean_tol)
    q0 = None if tracers is None else tracers.q
    try:
        with np.errstate(over="ignore", invalid="ignore"):
            k1 = f(U, R, q0, check=True)
            k2 = f(U + 0.5 * dt * k1[0], R + 0.5 * dt * k1[1],
                   None if q0 is None else q0 + 0.5 * dt * k1[2])
            k3 = f(U + 0.5 * dt * k2[0], R + 0.5 * dt * k2[1],
                   None if q0 is None else q0 + 0.5 * dt * k2[2])
            k4 = f(U + dt * k3[0], R + dt * k3[1],
                   None if q0 is None else q0 + dt * k3[2])
    except MeanNotZero:
        status = Status.BLOWUP_SUSPECTED if signature else Status.FAILED
        return StepOutcome(state, 0.0, status, "mean", tracers)

    c = dt / 6.0
    U1 = U + c * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
    R1 = R + c * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
    new_tracers = None
    if tracers is not None:
        new_tracers = Tracers(
            tracers.x0,
            tracers.q + c * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
            tracers.log_qx + c * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3]))
    new = state.replace(t=state.t + dt, u=sfft.irfft(U1, grid.n), rho=sfft.irfft(R1, grid.n))

    if not new.is_finite():
        status = Status.BLOWUP_SUSPECTED if signature else Status.FAILED
        return StepOutcome(new, dt, status, "nonfinite", new_tracers)
    status, trigger = Status.SMOOTH, None
    if _min_ux(grid, U1) < cfg.blowup_slope_threshold:
        status, trigger = Status.BLOWUP_SUSPECTED, "slope"
    elif state.k == -1 and np.abs(sfft.irfft(grid.ik * R1, grid.n)).max() > cfg.rho_x_threshold:
        status, trigger = Status.BLOWUP_SUSPECTED, "rho_x"
    elif grid.n >= max_n and _tail(grid, U1, R1) > cfg.tail_energy_frac:
        status, trigger = Status.BLOWUP_SUSPECTED, "tail"
    return StepOutcome(new, dt, status, trigger, new_tracers)


def _sample_schedule(t0, t_end, sample_dt, extra):
    times = []
    i = 1
    while t0 + i * sample_dt < t_end:
        times.append(t0 + i * sample_dt)
        i += 1
    times.extend(float(t) for t in extra if t0 < t < t_end)
    times.append(t_end)
    return sorted(set(times))


def run(state, cfg, monitors=(), sample_dt=None, tracers=None, sample_times=()):
    """Integrate from ``state.t`` to ``cfg.t_end`` or until a non-Smooth step.

    Every ``sample_dt`` of simulated time, at each of the optional extra
    ``sample_times`` and at the final state, a fresh
    :class:`DiagnosticsRecord` is passed through each monitor in order as
    ``monitor(state, record, tracers)``; steps are shortened to land exactly
    on sample times.
    """
    if not cfg.t_end > state.t:
        raise ValueError(f"t_end = {cfg.t_end} is not after the current time {state.t}")
    if sample_dt is None:
        sample_dt = cfg.t_end - state.t
    if not sample_dt > 0.0:
        raise ValueError("sample_dt must be positive")
    schedule = _sample_schedule(state.t, cfg.t_end, sample_dt, sample_times)
    records = []

    def sample(s, dt, trig=None):
        rec = DiagnosticsRecord(t=s.t, dt=dt, n=s.grid.n, tripped=trig)
        for mon in monitors:
            mon(s, rec, tracers)
        records.append(rec)

    for mon in monitors:
        start = getattr(mon, "start", None)
        if start is not None:
            start(state)
    sample(state, 0.0)
    i_sample = 0
    next_t = schedule[0]
    status, trigger, steps = Status.SMOOTH, None, 0
    while True:
        out = step(state, cfg, dt_max=next_t - state.t, tracers=tracers)
        steps += 1
        if out.status is not Status.SMOOTH:
            status, trigger = out.status, out.trigger
            if out.state.is_finite():
                state, tracers = out.state, out.tracers
                if out.dt_used > 0.0:
                    sample(state, out.dt_used, trigger)
                elif records:
                    records[-1].tripped = trigger
            break
        state, tracers = out.state, out.tracers
        if next_t - state.t <= 1e-12 * max(1.0, abs(next_t)):
            state = state.replace(t=next_t)
            sample(state, out.dt_used)
            if next_t >= cfg.t_end:
                break
            i_sample += 1
            next_t = schedule[i_sample]
    return RunResult(state=state, status=status, trigger=trigger, records=records,
                     tracers=tracers, steps=steps)


def fixed_grid(cfg):
    """Copy of ``cfg`` with grid doubling disabled."""
    from dataclasses import replace
    return replace(cfg, max_n=None)


def make_grid(n, cfg):
    return PeriodicGrid(n, dealias=cfg.dealias)
