"""Lagrangian dynamics along characteristics ``q_t = u(t, q)``.

Along a characteristic, ``m = u_x(t, q)``, ``gamma = rho(t, q)`` and
``log q_x`` obey the closed system::

    m'       = k/2 gamma^2 - m^2/2 + a
    gamma'   = -gamma m
    (log q_x)' = m

which needs nothing from the Eulerian solution once ``a`` is known (the
*decoupled* mode). Positions ``q`` themselves need ``u`` and are advanced by
:class:`hs2.solver.Tracers` inside the Eulerian stepper (the *coupled* mode).
"""

from dataclasses import dataclass

import numpy as np

from . import kernels


class ToleranceNotMet(RuntimeError):
    """The embedded error estimate could not be brought under tolerance."""


class DegenerateMax(ValueError):
    """The transported maximum is (numerically) zero; the check is skipped."""


class NotApplicable(ValueError):
    """A monitor or certificate was requested outside its hypotheses."""


@dataclass(frozen=True)
class CharacteristicState:
    x0: float
    q: float
    m: float
    gamma: float
    log_qx: float

    @property
    def qx(self):
        return float(np.exp(self.log_qx))


@dataclass
class Trajectory:
    """Decoupled solution sampled at ``t``.

    Rows after a detected blow-up hold NaN; ``blowup_time`` is then the
    extrapolated singular time.
    """

    x0: float
    t: np.ndarray
    m: np.ndarray
    gamma: np.ndarray
    log_qx: np.ndarray
    blowup_time: float = None

    def state(self, i):
        return CharacteristicState(self.x0, float("nan"), float(self.m[i]),
                                   float(self.gamma[i]), float(self.log_qx[i]))

    @property
    def valid(self):
        return np.isfinite(self.m)


def riccati_rhs(m, gamma, k, a):
    return 0.5 * k * gamma * gamma - 0.5 * m * m + a, -gamma * m


def riccati_invariant(m, gamma, k, a):
    """First integral ``(m^2 - 2a)/gamma + k gamma`` (NaN where gamma = 0)."""
    m = np.asarray(m, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(gamma != 0.0, (m * m - 2.0 * a) / gamma + k * gamma, np.nan)
    return out if out.ndim else float(out)


def blowup_time_gamma0(m0, a):
    """Exact blow-up time of ``m' = -m^2/2 + a`` from ``m(0) = m0``; inf if none."""
    if a < 0.0:
        s = np.sqrt(-2.0 * a)
        return float(2.0 / s * (0.5 * np.pi + np.arctan(m0 / s)))
    if a == 0.0:
        return float(-2.0 / m0) if m0 < 0.0 else float("inf")
    b = np.sqrt(2.0 * a)
    if m0 < -b:
        return float(np.log((m0 - b) / (m0 + b)) / b)
    return float("inf")


def m_gamma0(t, m0, a):
    """Exact ``m(t)`` for ``gamma = 0`` and ``a < 0`` (before blow-up)."""
    if a >= 0.0:
        raise ValueError("closed form implemented for a < 0 only")
    s = np.sqrt(-2.0 * a)
    return -s * np.tan(np.arctan(-m0 / s) + 0.5 * s * np.asarray(t))


def integrate_seeds(m0, gamma0, k, a, t_eval, tol=1e-10, m_blow=-1e6, log_qx0=None):
    """Batch decoupled integration.

    Returns ``(out, t_blow, status)`` with ``out`` shaped
    ``(len(t_eval), n_seeds, 3)`` holding ``(m, gamma, log_qx)``.

    Raises
    ------
    ToleranceNotMet
        If any seed's step size collapsed before ``t_eval[-1]``.
    """
    m0 = np.atleast_1d(np.asarray(m0, dtype=float))
    gamma0 = np.broadcast_to(np.asarray(gamma0, dtype=float), m0.shape)
    lq = np.zeros_like(m0) if log_qx0 is None else np.broadcast_to(log_qx0, m0.shape)
    y0 = np.stack((m0, gamma0, lq), axis=1)
    out, t_blow, status = kernels.dopri_seeds(y0, k, a, t_eval, rtol=tol, atol=tol,
                                              m_blow=m_blow)
    if np.any(status == kernels.TOL_FAIL):
        bad = np.flatnonzero(status == kernels.TOL_FAIL)
        raise ToleranceNotMet(f"step size collapsed for seeds {bad.tolist()}")
    return out, t_blow, status


def integrate_characteristic(x0, init, k, a, t_end, tol=1e-10, t_eval=None, m_blow=-1e6):
    """Integrate ``(m, gamma, log q_x)`` from ``init = (m0, gamma0)`` up to ``t_end``.

    Integration stops early once ``m < m_blow``; the blow-up time is then
    refined by extrapolating ``1/m`` linearly to zero.
    """
    if not tol > 0.0:
        raise ValueError("tol must be positive")
    if t_eval is None:
        t_eval = np.linspace(0.0, t_end, 1001)
    t_eval = np.asarray(t_eval, dtype=float)
    m0, g0 = init
    out, t_blow, status = integrate_seeds([m0], [g0], k, a, t_eval, tol=tol, m_blow=m_blow)
    bt = float(t_blow[0]) if status[0] == kernels.BLOWUP else None
    return Trajectory(float(x0), t_eval, out[:, 0, 0], out[:, 0, 1], out[:, 0, 2], bt)


def default_seeds(init, count=64, n_fine=4096, zero_tol=1e-10):
    """Equispaced seeds plus argmin u0' and all zeros of rho0, sorted and deduplicated."""
    seeds = list(np.arange(count) / count)
    if not init.u0.is_constant():
        seeds.append(init.u0.argmin(deriv=1, n_fine=n_fine)[0])
    if not init.rho0.is_zero():
        seeds.extend(init.rho0.zeros(n_fine, zero_tol))
    seeds = np.unique(np.round(np.asarray(seeds) % 1.0, 15))
    return seeds


def seed_initial_values(init, seeds):
    """``(m0, gamma0) = (u0'(x0), rho0(x0))`` at each seed."""
    seeds = np.asarray(seeds, dtype=float)
    return init.u0(seeds, deriv=1), init.rho0(seeds)


def verify_transport_identity(state, tracers, rho0):
    """Max over seeds of ``|rho(t, q) q_x - rho0(x0)|``.

    ``rho0`` is a callable (e.g. a :class:`hs2.state.FourierSeries`).
    """
    rho_q = state.grid.interpolate(state.rho, tracers.q)
    residual = rho_q * np.exp(tracers.log_qx) - rho0(tracers.x0)
    return float(np.max(np.abs(residual)))


def gradient_energy_transport_check(records, k=1, m_floor=1e-14):
    """Compare ``log M(t) - log M(0)`` with ``-4 int_0^t u_x(s, xi(s)) ds``.

    ``records`` carry ``t``, ``M_sup`` (max of ``u_xx^2 + rho_x^2``) and
    ``ux_at_argmax_M``; the time integral uses the trapezoid rule on the
    samples. Returns the largest absolute mismatch over the samples.
    """
    if k != 1:
        raise NotApplicable("the transport of u_xx^2 + rho_x^2 holds for k = 1 only")
    t = np.array([r.t for r in records], dtype=float)
    M = np.array([r.M_sup for r in records], dtype=float)
    ux = np.array([r.ux_at_argmax_M for r in records], dtype=float)
    if M.size == 0 or not M[0] >= m_floor:
        raise DegenerateMax(f"M(0) = {M[0] if M.size else float('nan'):.3e} is degenerate")
    lhs = np.log(M) - np.log(M[0])
    integral = np.concatenate(([0.0], np.cumsum(0.5 * np.diff(t) * (ux[1:] + ux[:-1]))))
    return float(np.max(np.abs(lhs + 4.0 * integral)))
