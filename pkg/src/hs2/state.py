"""Initial data, evolving state and the conserved quantities of the system."""

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .grid import PeriodicGrid

TWO_PI = 2.0 * np.pi


class ModeTooHigh(ValueError):
    """A Fourier mode of the initial data is not representable after dealiasing."""


@dataclass(frozen=True)
class FourierSeries:
    """``const + sum(c cos(2 pi m x) + s sin(2 pi m x))`` over ``(m, c, s)`` triples.

    Repeated modes are summed.
    """

    const: float = 0.0
    modes: tuple = ()

    def __post_init__(self):
        merged = {}
        for entry in self.modes:
            m, c, s = entry
            if int(m) != m or m < 1:
                raise ValueError(f"mode index must be an integer >= 1, got {m!r}")
            pc, ps = merged.get(int(m), (0.0, 0.0))
            merged[int(m)] = (pc + float(c), ps + float(s))
        if not np.isfinite(self.const) or not all(
                np.isfinite(c) and np.isfinite(s) for c, s in merged.values()):
            raise ValueError("Fourier coefficients must be finite")
        object.__setattr__(self, "const", float(self.const))
        object.__setattr__(self, "modes",
                           tuple((m, c, s) for m, (c, s) in sorted(merged.items())))

    @property
    def max_mode(self):
        return max((m for m, _, _ in self.modes), default=0)

    def is_constant(self):
        return all(c == 0.0 and s == 0.0 for _, c, s in self.modes)

    def is_zero(self):
        return self.const == 0.0 and self.is_constant()

    def is_odd(self):
        """True when only sine terms are present (odd about x = 0)."""
        return self.const == 0.0 and all(c == 0.0 for _, c, _ in self.modes)

    def __call__(self, x, deriv=0):
        x = np.asarray(x, dtype=float)
        out = np.full(x.shape, self.const if deriv == 0 else 0.0)
        for m, c, s in self.modes:
            w = TWO_PI * m
            ph = w * x
            # d^j/dx^j of (c cos + s sin) cycles through four phases
            cj, sj = c, s
            for _ in range(deriv):
                cj, sj = w * sj, -w * cj
            out = out + cj * np.cos(ph) + sj * np.sin(ph)
        return out

    def _fine(self, n_fine):
        return np.arange(n_fine) / n_fine

    def zeros(self, n_fine=4096, zero_tol=1e-10, xtol=1e-12):
        """Zeros on [0, 1), ascending.

        Sign changes between ``n_fine`` samples are bisected to ``xtol``;
        tangential zeros are found at the critical points of the series and
        accepted when ``|f| <= zero_tol`` there.
        """
        if self.is_zero():
            raise ValueError("identically zero series: every point is a zero")
        x = self._fine(n_fine)
        h = 1.0 / n_fine
        v = self(x)
        found = [float(xj) for xj in x[v == 0.0]]
        nxt = np.roll(v, -1)
        for j in np.flatnonzero(v * nxt < 0.0):
            found.append(brentq(self, x[j], x[j] + h, xtol=xtol) % 1.0)
        for c in self.critical_points(n_fine, xtol):
            if abs(float(self(c))) <= zero_tol:
                found.append(c)
        found.sort()
        out = []
        for z in found:
            if not out or min(z - out[-1], out[0] + 1.0 - z) > 1e3 * xtol:
                out.append(z)
        return out

    def critical_points(self, n_fine=4096, xtol=1e-12):
        """Zeros of the derivative on [0, 1), ascending."""
        if self.is_constant():
            return []
        x = self._fine(n_fine)
        h = 1.0 / n_fine
        d = self(x, deriv=1)
        out = [float(xj) for xj in x[d == 0.0]]
        nxt = np.roll(d, -1)
        fd = lambda y: float(self(y, deriv=1))  # noqa: E731
        for j in np.flatnonzero(d * nxt < 0.0):
            out.append(brentq(fd, x[j], x[j] + h, xtol=xtol) % 1.0)
        return sorted(out)

    def argmin(self, deriv=0, n_fine=4096, xtol=1e-12):
        """``(x, value)`` of the global minimum of the ``deriv``-th derivative."""
        x = self._fine(n_fine)
        v = self(x, deriv=deriv)
        j = int(np.argmin(v))
        best_x, best = float(x[j]), float(v[j])
        h = 1.0 / n_fine
        lo, hi = x[j] - h, x[j] + h
        g = lambda y: float(self(y, deriv=deriv + 1))  # noqa: E731
        glo, ghi = g(lo), g(hi)
        if glo < 0.0 < ghi:
            xc = brentq(g, lo, hi, xtol=xtol)
            vc = float(self(xc, deriv=deriv))
            if vc <= best:
                best_x, best = xc % 1.0, vc
        return best_x, best

    def extreme_of(self, func, kind="max", n_fine=4096):
        """Global max (or min) of ``func(x)`` over [0, 1) for a smooth periodic ``func``."""
        x = self._fine(n_fine)
        sign = -1.0 if kind == "max" else 1.0
        v = sign * func(x)
        j = int(np.argmin(v))
        h = 1.0 / n_fine
        res = minimize_scalar(lambda y: sign * float(func(np.asarray(y))),
                              bounds=(x[j] - h, x[j] + h), method="bounded",
                              options={"xatol": 1e-13})
        best = min(float(v[j]), float(res.fun))
        return sign * best

    def mean_square(self, deriv=0):
        """Exact ``integral of (d^deriv f)^2`` over one period."""
        total = self.const ** 2 if deriv == 0 else 0.0
        for m, c, s in self.modes:
            total += 0.5 * (TWO_PI * m) ** (2 * deriv) * (c * c + s * s)
        return total


@dataclass(frozen=True)
class InitialData:
    """Band-limited initial data ``(u0, rho0)`` and the sign ``k``."""

    u0: FourierSeries
    rho0: FourierSeries
    k: int = 1

    def __post_init__(self):
        if self.k not in (1, -1):
            raise ValueError(f"k must be +1 or -1, got {self.k!r}")

    @property
    def max_mode(self):
        return max(self.u0.max_mode, self.rho0.max_mode)

    def a_exact(self):
        """``a = -1/2 integral(k rho0^2 + u0_x^2)`` from the coefficients."""
        return -0.5 * (self.k * self.rho0.mean_square() + self.u0.mean_square(deriv=1))

    def check_grid(self, grid):
        if self.max_mode * 3 >= grid.n:
            raise ModeTooHigh(
                f"mode {self.max_mode} is not below n/3 = {grid.n / 3:.6g} for n = {grid.n}")


@dataclass(frozen=True, eq=False)
class SystemState:
    """Fields ``u``, ``rho`` at time ``t`` with the run constants ``k``, ``a``, ``h``."""

    t: float
    u: np.ndarray = field(repr=False)
    rho: np.ndarray = field(repr=False)
    k: int
    a: float
    h: float
    grid: PeriodicGrid

    def replace(self, **changes):
        return replace(self, **changes)

    def is_finite(self):
        return bool(np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.rho)))


@dataclass(frozen=True)
class ConservedSet:
    a_now: float
    int_abs_rho: float
    energy: float


def realize(init, grid, h=0.0):
    """Sample ``init`` on ``grid`` and fix the constant ``a`` at t = 0.

    Raises
    ------
    ModeTooHigh
        If a mode of the initial data is ``>= n/3``.
    """
    init.check_grid(grid)
    x = grid.nodes
    u = init.u0(x)
    rho = init.rho0(x)
    ux = grid.derivative(u)
    a = -0.5 * grid.integrate(init.k * rho * rho + ux * ux)
    return SystemState(t=0.0, u=u, rho=rho, k=init.k, a=a, h=float(h), grid=grid)


def a_of(state):
    grid = state.grid
    ux = grid.derivative(state.u)
    return -0.5 * grid.integrate(state.k * state.rho ** 2 + ux * ux)


def integral_abs(grid, f, noise_floor=1e-13):
    """``integral |f|`` over one period, exact up to zero location.

    The interpolant is split at its sign changes and each piece integrated
    through the spectral antiderivative, which avoids the first-order error a
    kink in ``|f|`` costs plain quadrature.
    """
    f = np.asarray(f, dtype=float)
    if np.max(np.abs(f)) <= noise_floor:
        # roundoff-level field: sign changes are noise, no kinks worth resolving
        return float(np.mean(np.abs(f)))
    zeros = grid.sign_change_zeros(f)
    mean = grid.integrate(f)
    if len(zeros) < 2:
        return abs(mean)
    periodic = grid.antiderivative_from_zero(f - mean, mean_tol=np.inf)
    z = np.asarray(zeros)
    prim = grid.interpolate(periodic, z) + mean * z
    prim_ends = np.append(prim[1:], prim[0] + mean)
    return float(np.sum(np.abs(prim_ends - prim)))


def conserved(state):
    a_now = a_of(state)
    return ConservedSet(a_now=a_now, int_abs_rho=integral_abs(state.grid, state.rho),
                        energy=-2.0 * a_now)
