"""Fourier collocation on the unit circle R/Z.

Fields are plain float arrays of length ``n`` holding samples at the nodes
``x_j = j/n``; a :class:`PeriodicGrid` carries the transform metadata and the
spectral operators acting on them.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft
from scipy.optimize import brentq

from . import kernels


class MeanNotZero(ValueError):
    """An antiderivative was requested for a field with nonzero mean."""


@dataclass(frozen=True)
class PeriodicGrid:
    """Uniform grid of ``n`` samples on [0, 1).

    Parameters
    ----------
    n : int
        Number of samples; even and at least 16.
    dealias : bool
        When true, quadratic products are filtered with the 2/3 rule
        (modes above ``n // 3`` zeroed).
    """

    n: int
    dealias: bool = True

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 16 or self.n % 2:
            raise ValueError(f"grid size must be an even integer >= 16, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def spacing(self):
        return 1.0 / self.n

    @cached_property
    def nodes(self):
        return np.arange(self.n) / self.n

    @property
    def dealias_cutoff(self):
        return self.n // 3 if self.dealias else self.n // 2

    @cached_property
    def modes(self):
        return np.arange(self.n // 2 + 1)

    @cached_property
    def ik(self):
        """``2 pi i m`` for the rfft modes, Nyquist zeroed (odd derivative)."""
        ik = 2j * np.pi * self.modes
        ik[-1] = 0.0
        return ik

    @cached_property
    def keep(self):
        """Boolean mask of modes kept by the dealiasing filter."""
        return self.modes <= self.dealias_cutoff

    @cached_property
    def _inv_ik(self):
        inv = np.zeros(self.modes.size, dtype=complex)
        inv[1:-1] = 1.0 / (2j * np.pi * self.modes[1:-1])
        return inv

    @cached_property
    def _tail_band(self):
        c = self.dealias_cutoff
        return (self.modes > 2 * c / 3) & (self.modes <= c)

    # -- transforms ---------------------------------------------------------

    def forward(self, f):
        return sfft.rfft(f)

    def backward(self, coef):
        return sfft.irfft(coef, self.n)

    def filter(self, f):
        """Apply the dealiasing filter to a sampled field."""
        if not self.dealias:
            return np.asarray(f, dtype=float)
        coef = self.forward(f)
        coef[~self.keep] = 0.0
        return self.backward(coef)

    # -- operators ----------------------------------------------------------

    def derivative(self, f, order=1):
        """Spectral derivative of the trigonometric interpolant of ``f``."""
        coef = self.forward(f)
        return self.backward(coef * self.ik ** order)

    def antiderivative_from_zero(self, g, mean_tol=1e-8):
        """Periodic ``G`` with ``G' = g`` and ``G(0) = 0``.

        Raises
        ------
        MeanNotZero
            If ``|mean(g)| > mean_tol``; a periodic antiderivative exists only
            for mean-zero integrands.
        """
        coef = self.forward(g)
        mean = coef[0].real / self.n
        if not abs(mean) <= mean_tol:
            raise MeanNotZero(f"mean of integrand is {mean:.3e} (tolerance {mean_tol:.1e})")
        G = self.backward(coef * self._inv_ik)
        return G - G[0]

    def integrate(self, f):
        """Integral over one period by the mean rule."""
        return float(np.mean(f))

    def interpolate(self, f, points):
        """Values of the trigonometric interpolant of ``f`` at ``points`` (mod 1)."""
        pts = np.atleast_1d(np.asarray(points, dtype=float))
        return kernels.trig_eval(self.forward(f), self.n, pts)

    def interpolate_coef(self, coef, points):
        pts = np.atleast_1d(np.asarray(points, dtype=float))
        return kernels.trig_eval(coef, self.n, pts)

    # -- diagnostics helpers ---------------------------------------------------

    def tail_fraction(self, coef, weight_derivative=False):
        """Fraction of non-mean spectral energy in the top third of kept modes.

        Values near roundoff are reported as zero so that constant or
        identically vanishing fields never look under-resolved.
        """
        power = np.abs(coef) ** 2
        if weight_derivative:
            power = power * self.modes.astype(float) ** 2
        total = power[1:].sum()
        floor = 1e-26 * (power[0] + 1.0) * self.n ** 2
        if total <= floor:
            return 0.0
        return float(power[self._tail_band].sum() / total)

    def refined(self):
        """A grid with twice the resolution and the same dealiasing policy."""
        return PeriodicGrid(2 * self.n, self.dealias)

    def resample(self, f, grid):
        """Exact spectral resampling of ``f`` onto a finer ``grid``."""
        if grid.n < self.n:
            raise ValueError("resampling to a coarser grid would discard modes")
        coef = self.forward(f)
        coef[-1] = 0.0
        out = np.zeros(grid.n // 2 + 1, dtype=complex)
        out[:coef.size] = coef * (grid.n / self.n)
        return grid.backward(out)

    def extremum(self, f, kind="min", coef=None):
        """Location and value of the min or max of the interpolant of ``f``.

        Starts from the best node and polishes with Newton steps on the
        derivative of the interpolant; the node value is kept if polishing
        fails to improve it.
        """
        values = np.asarray(f)
        j = int(np.argmin(values) if kind == "min" else np.argmax(values))
        x, best = self.nodes[j], float(values[j])
        if coef is None:
            coef = self.forward(values)
        d1 = coef * self.ik
        d2 = coef * self.ik ** 2
        xn = x
        for _ in range(8):
            fp = self.interpolate_coef(d1, xn)[0]
            fpp = self.interpolate_coef(d2, xn)[0]
            if fpp == 0.0:
                break
            step = fp / fpp
            xn -= step
            if abs(xn - x) > self.spacing or abs(step) < 1e-14:
                break
        if abs(xn - x) <= self.spacing:
            val = float(self.interpolate_coef(coef, xn)[0])
            if (kind == "min" and val < best) or (kind == "max" and val > best):
                return float(xn % 1.0), val
        return float(x), best

    def sign_change_zeros(self, f, xtol=1e-12):
        """Zeros of the interpolant of ``f`` where it changes sign, ascending."""
        values = np.asarray(f)
        coef = self.forward(values)
        zeros = [float(self.nodes[j]) for j in np.flatnonzero(values == 0.0)]
        s = np.sign(values)
        nxt = np.roll(s, -1)
        for j in np.flatnonzero(s * nxt < 0):
            lo = self.nodes[j]
            hi = lo + self.spacing
            fn = lambda y: self.interpolate_coef(coef, y)[0]  # noqa: E731
            try:
                z = brentq(fn, lo, hi, xtol=xtol)
            except ValueError:
                # interpolant and samples disagree on the sign at roundoff level
                z = lo if abs(values[j]) <= abs(values[(j + 1) % self.n]) else hi
            zeros.append(z % 1.0)
        return sorted(zeros)
