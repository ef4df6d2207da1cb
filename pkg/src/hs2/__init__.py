"""Simulator and analysis toolkit for the periodic two-component Hunter-Saxton system.

The evolution is integrated in nonlocal form on the unit circle, checked
against the exact Riccati dynamics along characteristics, monitored for its
conserved quantities and blow-up scenarios, and initial data are classified
by sufficient conditions for blow-up or global existence.
"""

from .analysis import (Classification, Verdict, estimate_blowup_time, lyapunov_certificate,
                       predict, runtime_verdict, scenario_monitor)
from .characteristics import (blowup_time_gamma0, integrate_characteristic, riccati_invariant,
                              riccati_rhs)
from .config import RunConfig, parse_config
from .grid import PeriodicGrid
from .solver import SolverConfig, Status, run, step
from .state import FourierSeries, InitialData, SystemState, conserved, realize

__version__ = "0.1.0"
