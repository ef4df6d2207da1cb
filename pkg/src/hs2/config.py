"""Plain-text run configuration: flat dotted keys, one per line.

Example::

    # single sine wave, no density
    k = 1
    t_end = 2
    grid.n = 256
    u0.mode = 1, 0, 0.15915494309189535
    rho0.const = 0
    sample_dt = 0.01

Mode triples ``m, cos, sin`` are given with repeated ``u0.mode`` /
``rho0.mode`` lines. Solver options live under ``solver.``.
"""

import dataclasses
from dataclasses import dataclass, field

from .grid import PeriodicGrid
from .solver import SolverConfig
from .state import FourierSeries, InitialData

KNOWN_MONITORS = ("scenario", "lyapunov", "transport")
# tracer advection costs an off-grid interpolation per seed and stage; opt in
DEFAULT_MONITORS = ("scenario", "lyapunov")

_SOLVER_FIELDS = {f.name: f.type for f in dataclasses.fields(SolverConfig)}
_UNSET = object()


class ParseError(ValueError):
    def __init__(self, lineno, message):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class ValidationError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    k: int = 1
    n: int = 256
    h: float = 0.0
    t_end: float = 1.0
    sample_dt: float = 0.01
    u0: FourierSeries = field(default_factory=FourierSeries)
    rho0: FourierSeries = field(default_factory=FourierSeries)
    solver: SolverConfig = field(default_factory=SolverConfig)
    monitors: tuple = DEFAULT_MONITORS
    seed_count: int = 64
    output_path: str = None
    a: float = None

    @property
    def init(self):
        return InitialData(self.u0, self.rho0, self.k)

    @property
    def grid(self):
        return PeriodicGrid(self.n, dealias=self.solver.dealias)

    def with_value(self, key, value):
        """Copy with one scalar knob replaced (used by parameter sweeps).

        ``key`` is a scalar config key (``h``, ``t_end``, ``solver.cfl``...),
        ``<field>.const`` or ``<field>.cos<m>`` / ``<field>.sin<m>`` for the
        mode-``m`` coefficient of ``u0`` or ``rho0``.
        """
        raw = _to_raw(self)
        head, _, tail = key.partition(".")
        if head in ("u0", "rho0") and tail[:3] in ("cos", "sin") and tail[3:].isdigit():
            m = int(tail[3:])
            modes = [list(t) for t in raw[head + ".mode"] if t[0] != m]
            old = next((t for t in raw[head + ".mode"] if t[0] == m), (m, 0.0, 0.0))
            new = [m, old[1], old[2]]
            new[1 if tail[:3] == "cos" else 2] = value
            raw[head + ".mode"] = [tuple(t) for t in modes] + [tuple(new)]
        elif key in ("k", "grid.n", "seeds.count", "solver.max_n"):
            if float(value) != int(value):
                raise ValidationError(f"{key} needs integer values, got {value!r}")
            raw[key] = int(value)
        elif key in raw and key not in ("u0.mode", "rho0.mode", "monitors", "output.path"):
            raw[key] = value
        else:
            raise ValidationError(f"{key!r} is not a scalar knob")
        return _build(raw)


def _defaults():
    return {"k": 1, "grid.n": 256, "h": 0.0, "t_end": 1.0, "sample_dt": 0.01,
            "u0.const": 0.0, "u0.mode": [], "rho0.const": 0.0, "rho0.mode": [],
            "monitors": DEFAULT_MONITORS, "seeds.count": 64, "output.path": None, "a": None,
            **{f"solver.{name}": _UNSET for name in _SOLVER_FIELDS if name != "t_end"}}


def _to_raw(cfg):
    raw = _defaults()
    raw.update({"k": cfg.k, "grid.n": cfg.n, "h": cfg.h, "t_end": cfg.t_end,
                "sample_dt": cfg.sample_dt, "u0.const": cfg.u0.const,
                "u0.mode": list(cfg.u0.modes), "rho0.const": cfg.rho0.const,
                "rho0.mode": list(cfg.rho0.modes), "monitors": cfg.monitors,
                "seeds.count": cfg.seed_count, "output.path": cfg.output_path, "a": cfg.a})
    for name in _SOLVER_FIELDS:
        if name != "t_end":
            raw[f"solver.{name}"] = getattr(cfg.solver, name)
    return raw


def _parse_bool(text):
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _parse_int(text):
    v = float(text)
    if v != int(v):
        raise ValueError(f"expected an integer, got {text!r}")
    return int(v)


def _convert(key, text):
    if key in ("k", "grid.n", "seeds.count"):
        return _parse_int(text)
    if key in ("h", "t_end", "sample_dt", "u0.const", "rho0.const", "a"):
        return float(text)
    if key == "output.path":
        return text
    if key == "monitors":
        names = tuple(s.strip() for s in text.split(",") if s.strip())
        return names
    if key in ("u0.mode", "rho0.mode"):
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 3:
            raise ValueError("a mode needs three values: m, cos, sin")
        return (_parse_int(parts[0]), float(parts[1]), float(parts[2]))
    name = key[len("solver."):]
    if name == "dealias":
        return _parse_bool(text)
    if name == "max_n":
        return None if text.lower() in ("none", "0") else _parse_int(text)
    return float(text)


def parse_config(text):
    """Parse config text into a validated :class:`RunConfig`.

    Raises
    ------
    ParseError
        Malformed line, unknown key or unconvertible value (with line number).
    ValidationError
        Values that parse but violate an invariant (``k``, grid size,
        representable modes, monitor names, ...).
    """
    raw = _defaults()
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ParseError(lineno, f"expected 'key = value', got {line!r}")
        if key not in raw or key == "solver.t_end":
            raise ParseError(lineno, f"unknown key {key!r}")
        try:
            converted = _convert(key, value)
        except ValueError as exc:
            raise ParseError(lineno, f"{key}: {exc}") from None
        if key.endswith(".mode"):
            raw[key].append(converted)
        else:
            raw[key] = converted
    return _build(raw)


def _build(raw):
    k = raw["k"]
    if k not in (1, -1):
        raise ValidationError(f"k must be +1 or -1, got {k}")
    n = raw["grid.n"]
    if n < 16 or n % 2:
        raise ValidationError(f"grid.n must be an even integer >= 16, got {n}")
    if not raw["sample_dt"] > 0.0:
        raise ValidationError("sample_dt must be positive")
    if raw["seeds.count"] < 1:
        raise ValidationError("seeds.count must be at least 1")
    unknown = [m for m in raw["monitors"] if m not in KNOWN_MONITORS]
    if unknown:
        raise ValidationError(f"unknown monitors {unknown}; known: {list(KNOWN_MONITORS)}")
    try:
        u0 = FourierSeries(raw["u0.const"], tuple(raw["u0.mode"]))
        rho0 = FourierSeries(raw["rho0.const"], tuple(raw["rho0.mode"]))
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    top = max(u0.max_mode, rho0.max_mode)
    if 3 * top >= n:
        raise ValidationError(f"mode {top} is not below n/3 = {n / 3:.6g}")
    opts = {name: raw[f"solver.{name}"] for name in _SOLVER_FIELDS
            if name != "t_end" and raw[f"solver.{name}"] is not _UNSET}
    try:
        solver = SolverConfig(t_end=raw["t_end"], **opts)
    except (ValueError, TypeError) as exc:
        raise ValidationError(str(exc)) from None
    return RunConfig(k=k, n=n, h=raw["h"], t_end=raw["t_end"], sample_dt=raw["sample_dt"],
                     u0=u0, rho0=rho0, solver=solver, monitors=tuple(raw["monitors"]),
                     seed_count=raw["seeds.count"], output_path=raw["output.path"], a=raw["a"])
