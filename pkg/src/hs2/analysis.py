"""Static blow-up/global predictors, runtime monitors and blow-up time estimates."""

import enum
import math
from dataclasses import dataclass

import numpy as np

from .characteristics import (DegenerateMax, NotApplicable, integrate_seeds,
                              gradient_energy_transport_check, seed_initial_values)
from .diagnostics import DiagnosticsRecord
from .solver import Status
from .state import a_of, integral_abs

__all__ = ["Classification", "Verdict", "LyapunovRecord", "AMismatch", "InsufficientSamples",
           "NotApplicable", "DegenerateMax", "predict", "scenario_monitor", "ScenarioMonitor",
           "LyapunovMonitor", "TransportMonitor", "estimate_blowup_time", "lyapunov_constants",
           "lyapunov_certificate", "runtime_verdict", "gradient_energy_transport_check"]


class AMismatch(ValueError):
    """Supplied ``a`` disagrees with the value implied by the initial data."""


class InsufficientSamples(ValueError):
    """Too few deep samples to extrapolate a blow-up time."""


class Classification(str, enum.Enum):
    BLOWUP = "BlowUp"
    GLOBAL = "Global"
    STEADY = "SteadyState"
    INCONCLUSIVE = "Inconclusive"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class Verdict:
    classification: Classification
    justification: str
    time_bound: float = None
    witness: float = None
    notes: tuple = ()

    def record(self):
        """Single-line ``key=value`` text form (notes are not included)."""
        parts = [f"classification={self.classification}", f"justification={self.justification}"]
        if self.witness is not None:
            parts.append(f"witness={round(float(self.witness), 12)!r}")
        if self.time_bound is not None:
            parts.append(f"time_bound={float(self.time_bound)!r}")
        return " ".join(parts)


# ----------------------------------------------------------------------------
# static prediction

def _riccati_bound(m0):
    """``t0 - 2/m(t0)`` at ``t0 = 0``; only meaningful for a negative slope."""
    return -2.0 / m0 if m0 < 0.0 else None


def predict(init, a=None, n_fine=4096, zero_tol=1e-10, a_tol=1e-10, a_zero_tol=1e-12):
    """Classify initial data by the sufficient conditions for blow-up or global existence.

    Parameters
    ----------
    init : InitialData
    a : float, optional
        The constant of the run; checked against the value recomputed from
        the Fourier coefficients.
    n_fine : int
        Sample count used to bracket zeros and extrema before bisection.
    zero_tol : float
        ``|rho0|`` at or below this counts as a zero.
    a_zero_tol : float
        ``|a|`` at or below this counts as ``a = 0`` (k = -1 condition 3).

    Raises
    ------
    AMismatch
        If ``a`` differs from the recomputed value by more than ``a_tol``.
    """
    a_exact = init.a_exact()
    if a is not None and abs(a - a_exact) > a_tol:
        raise AMismatch(f"a = {a!r} but the initial data give {a_exact!r}")
    a = a_exact
    u0, rho0 = init.u0, init.rho0

    if u0.is_constant() and rho0.is_constant():
        # constant pairs solve the system: k/2 rho0^2 + a vanishes by definition of a
        return Verdict(Classification.STEADY, "steady-state")

    if init.k == 1:
        # nontrivial data; a < 0 is the equivalent formulation
        if not a < 0.0:  # pragma: no cover
            raise AssertionError(f"nontrivial k=1 data must have a < 0, got {a}")
        notes = ()
        if rho0.is_odd() and (not rho0.is_zero() or not u0.is_constant()):
            notes = ("Cor4.1",)
        if rho0.is_zero():
            x0, m0 = u0.argmin(deriv=1, n_fine=n_fine)
            return Verdict(Classification.BLOWUP, "Thm4.1", _riccati_bound(m0), x0, notes)
        zeros = rho0.zeros(n_fine, zero_tol)
        if zeros:
            slopes = u0(np.asarray(zeros), deriv=1)
            i = min(range(len(zeros)), key=lambda j: (round(float(slopes[j]), 12), zeros[j]))
            return Verdict(Classification.BLOWUP, "Thm4.1", _riccati_bound(float(slopes[i])),
                           zeros[i], notes)
        return Verdict(Classification.GLOBAL, "Thm5.1")

    # k = -1
    x_min, m0 = u0.argmin(deriv=1, n_fine=n_fine)
    slope_at_0 = float(u0(0.0, deriv=1))
    if a < -a_zero_tol:
        return Verdict(Classification.BLOWUP, "Thm4.2(1)", _riccati_bound(m0), x_min)
    if a > a_zero_tol:
        b = math.sqrt(2.0 * a)
        if m0 < -b:
            bound = math.log((m0 - b) / (m0 + b)) / b
            notes = ("Cor4.2(1)",) if slope_at_0 < -b else ()
            return Verdict(Classification.BLOWUP, "Thm4.2(2)", bound, x_min, notes)
        return Verdict(Classification.INCONCLUSIVE, "none")
    # a = 0: need u0'(x0) <= 0 with rho0(x0) != 0
    notes = ("Cor4.2(2)",) if slope_at_0 <= 0.0 and abs(float(rho0(0.0))) > zero_tol else ()
    if abs(float(rho0(x_min))) > zero_tol:
        return Verdict(Classification.BLOWUP, "Thm4.2(3)", _riccati_bound(m0), x_min, notes)
    x = np.arange(n_fine) / n_fine
    d = u0(x, deriv=1)
    ok = (d <= 0.0) & (np.abs(rho0(x)) > zero_tol)
    if ok.any():
        j = int(np.flatnonzero(ok)[np.argmin(d[ok])])
        return Verdict(Classification.BLOWUP, "Thm4.2(3)", _riccati_bound(float(d[j])),
                       float(x[j]), notes)
    return Verdict(Classification.INCONCLUSIVE, "none")


# ----------------------------------------------------------------------------
# runtime monitors

def fill_scenario(state, rec, slope_threshold=-50.0, rho_x_factor=10.0):
    """Populate the extrema / conservation fields of ``rec`` from ``state``."""
    grid = state.grid
    U = grid.forward(state.u)
    ux = grid.backward(U * grid.ik)
    ux_coef = U * grid.ik
    rec.n = grid.n
    rec.a_now = a_of(state)
    rec.a_drift = (rec.a_now - state.a) / max(1.0, abs(state.a))
    rec.int_abs_rho = integral_abs(grid, state.rho)
    rec.argmin_ux, rec.min_ux = grid.extremum(ux, "min", coef=ux_coef)
    rec.max_ux = grid.extremum(ux, "max", coef=ux_coef)[1]
    rho_x = grid.derivative(state.rho)
    rec.sup_abs_rhox = float(np.abs(rho_x).max())
    if state.k == 1:
        uxx = grid.backward(U * grid.ik ** 2)
        P = uxx * uxx + rho_x * rho_x
        rec.argmax_M, rec.M_sup = grid.extremum(P, "max")
        rec.ux_at_argmax_M = float(grid.interpolate_coef(ux_coef, rec.argmax_M)[0])
    tripped = None
    if rec.min_ux < slope_threshold:
        tripped = "slope"
    elif state.k == -1 and rec.sup_abs_rhox > rho_x_factor * abs(slope_threshold):
        tripped = "rho_x"
    if tripped and not rec.tripped:
        rec.tripped = tripped
    return rec


def scenario_monitor(state, dt=None, slope_threshold=-50.0):
    """One :class:`DiagnosticsRecord` of extrema and conserved quantities."""
    return fill_scenario(state, DiagnosticsRecord(t=state.t, dt=dt), slope_threshold)


class ScenarioMonitor:
    def __init__(self, slope_threshold=-50.0):
        self.slope_threshold = slope_threshold

    def __call__(self, state, rec, tracers=None):
        fill_scenario(state, rec, self.slope_threshold)


@dataclass(frozen=True)
class LyapunovRecord:
    t: float
    w_max: float
    bound: float
    ux_lower_bound: float
    beta: float
    C1: float


def lyapunov_constants(init, n_fine=4096):
    """``(beta, C1)``: ``min |rho0|`` and ``1 + max(rho0^2 + u0'^2)``.

    Raises
    ------
    NotApplicable
        If ``k != 1`` or ``rho0`` vanishes somewhere.
    """
    if init.k != 1:
        raise NotApplicable("the Lyapunov certificate needs k = 1")
    rho0, u0 = init.rho0, init.u0
    lo = rho0.extreme_of(rho0, "min", n_fine)
    hi = rho0.extreme_of(rho0, "max", n_fine)
    if lo > 0.0:
        beta = lo
    elif hi < 0.0:
        beta = -hi
    else:
        raise NotApplicable("rho0 vanishes somewhere; no positive beta")
    C1 = 1.0 + rho0.extreme_of(lambda x: rho0(x) ** 2 + u0(x, deriv=1) ** 2, "max", n_fine)
    return beta, C1


def lyapunov_certificate(state, init, chars, constants=None):
    """Evaluate ``w = gamma gamma0 + (gamma0/gamma)(1 + m^2)`` over characteristics.

    ``chars`` is a sequence of :class:`CharacteristicState` advanced (in the
    decoupled mode) to ``state.t``.
    """
    beta, C1 = constants if constants is not None else lyapunov_constants(init)
    x0 = np.array([c.x0 for c in chars], dtype=float)
    m = np.array([c.m for c in chars], dtype=float)
    g = np.array([c.gamma for c in chars], dtype=float)
    g0 = init.rho0(x0)
    w = g * g0 + (g0 / g) * (1.0 + m * m)
    growth = math.exp(abs(1.0 + 2.0 * state.a) * state.t)
    bound = C1 * growth
    return LyapunovRecord(t=state.t, w_max=float(np.max(w)), bound=bound,
                          ux_lower_bound=-bound / (2.0 * beta), beta=beta, C1=C1)


class LyapunovMonitor:
    """Tracks ``w`` along decoupled characteristics at every sample.

    Disabled (leaves the record fields blank) when the certificate's
    hypotheses fail.
    """

    def __init__(self, init, seeds, tol=1e-10):
        self.init = init
        self.seeds = np.asarray(seeds, dtype=float)
        self.tol = tol
        self.enabled = False

    def start(self, state):
        from .characteristics import CharacteristicState  # noqa: F401

        try:
            self.constants = lyapunov_constants(self.init)
        except NotApplicable:
            self.enabled = False
            return
        self.enabled = True
        m0, g0 = seed_initial_values(self.init, self.seeds)
        self.y = np.stack((m0, g0, np.zeros_like(m0)), axis=1)
        self.t = state.t

    def __call__(self, state, rec, tracers=None):
        if not self.enabled:
            return
        if state.t > self.t:
            out, _, status = integrate_seeds(self.y[:, 0], self.y[:, 1], self.init.k, state.a,
                                             [self.t, state.t], tol=self.tol,
                                             log_qx0=self.y[:, 2])
            self.y = out[-1]
            self.t = state.t
        beta, C1 = self.constants
        g0 = self.init.rho0(self.seeds)
        m, g = self.y[:, 0], self.y[:, 1]
        w = g * g0 + (g0 / g) * (1.0 + m * m)
        bound = C1 * math.exp(abs(1.0 + 2.0 * state.a) * state.t)
        rec.w_max = float(np.max(w))
        rec.w_bound = bound
        rec.ux_lower_bound = -bound / (2.0 * beta)

    def characteristic_states(self):
        from .characteristics import CharacteristicState

        return [CharacteristicState(float(x), float("nan"), float(y[0]), float(y[1]), float(y[2]))
                for x, y in zip(self.seeds, self.y)]


class TransportMonitor:
    """Records ``max |rho(t, q) q_x - rho0(x0)|`` over the run's tracers."""

    def __init__(self, rho0):
        self.rho0 = rho0

    def __call__(self, state, rec, tracers=None):
        if tracers is None:
            return
        from .characteristics import verify_transport_identity

        rec.transport_residual = verify_transport_identity(state, tracers, self.rho0)


# ----------------------------------------------------------------------------
# blow-up time extrapolation

def estimate_blowup_time(series, threshold=-10.0, min_samples=5):
    """Extrapolate the zero crossing of ``1/min u_x`` by a least-squares line.

    ``series`` holds records with ``t`` and ``min_ux`` (or ``(t, min_ux)``
    pairs). Only samples with ``min_ux < threshold`` are used. Returns
    ``(T_star, ci)`` where ``ci`` is a two-sigma half-width from the fit
    residuals.

    Raises
    ------
    InsufficientSamples
        With fewer than ``min_samples`` qualifying samples, or when the fit
        shows no approach to the singularity.
    """
    pts = []
    for r in series:
        t, m = (r.t, r.min_ux) if hasattr(r, "min_ux") else r
        if m is not None and np.isfinite(m) and m < threshold:
            pts.append((t, m))
    if len(pts) < min_samples:
        raise InsufficientSamples(f"{len(pts)} samples below {threshold}, need {min_samples}")
    t = np.array([p[0] for p in pts])
    y = 1.0 / np.array([p[1] for p in pts])
    X = np.stack((np.ones_like(t), t), axis=1)
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    alpha, slope = coef
    if not slope > 0.0:
        raise InsufficientSamples("1/min u_x is not increasing toward zero")
    T = -alpha / slope
    resid = y - X @ coef
    dof = max(1, t.size - 2)
    sigma2 = float(resid @ resid) / dof
    cov = sigma2 * np.linalg.inv(X.T @ X)
    grad = np.array([-1.0 / slope, alpha / slope ** 2])
    ci = 2.0 * math.sqrt(max(0.0, float(grad @ cov @ grad)))
    return float(T), ci


def runtime_verdict(result, threshold=-10.0):
    """Classify a finished run.

    Blow-up is declared when the run stopped on the slope (or, k = -1, the
    density-gradient) criterion, or when it stopped on lost resolution while
    ``1/min u_x`` extrapolates to a singular time. Failed runs are never
    called blow-up.
    """
    if result.status is Status.SMOOTH:
        return Verdict(Classification.INCONCLUSIVE, "smooth-to-t_end")
    if result.status is Status.FAILED:
        return Verdict(Classification.INCONCLUSIVE, "failed")
    last = result.records[-1] if result.records else None
    witness = None if last is None else last.argmin_ux
    try:
        T, ci = estimate_blowup_time(result.records, threshold)
    except InsufficientSamples:
        T = None
    if result.trigger in ("slope", "rho_x"):
        return Verdict(Classification.BLOWUP, "runtime-detection", None, witness,
                       (result.trigger,))
    if T is not None and T >= result.t_final - 1e-9:
        return Verdict(Classification.BLOWUP, "runtime-detection", None, witness,
                       (result.trigger, "extrapolated"))
    return Verdict(Classification.INCONCLUSIVE, "runtime-detection", None, witness,
                   (result.trigger,))
