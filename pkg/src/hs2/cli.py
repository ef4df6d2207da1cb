"""Command line entry point: ``hs2 predict|run|sweep``.

Exit codes: 0 ran to ``t_end`` (or prediction printed), 2 blow-up suspected,
3 configuration error, 4 numerical failure.
"""

import argparse
import csv
import io
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import analysis
from .characteristics import default_seeds
from .config import ParseError, ValidationError, parse_config
from .diagnostics import csv_text, format_float
from .solver import Status, Tracers, run
from .state import realize

EXIT_OK, EXIT_BLOWUP, EXIT_CONFIG, EXIT_FAILED = 0, 2, 3, 4

SWEEP_COLUMNS = ("value", "a", "predicted", "justification", "time_bound", "status",
                 "runtime", "t_final", "T_star", "ci")


class AxisError(ValueError):
    pass


def load_config(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text)


def parse_axis(spec):
    """``key=start:stop:count`` -> ``(key, values)``; ``count`` may not be zero."""
    key, sep, rng = spec.partition("=")
    parts = rng.split(":")
    if not sep or not key.strip() or len(parts) != 3:
        raise AxisError(f"axis must look like key=start:stop:count, got {spec!r}")
    try:
        start, stop = float(parts[0]), float(parts[1])
        count = int(parts[2])
    except ValueError:
        raise AxisError(f"bad numbers in axis {spec!r}") from None
    if count < 1:
        raise AxisError(f"axis {spec!r} has an empty range")
    return key.strip(), np.linspace(start, stop, count).tolist()


# ----------------------------------------------------------------------------
# runs

def execute(cfg):
    """Run ``cfg`` with its enabled monitors; returns ``(RunResult, verdict, (T, ci))``."""
    init = cfg.init
    state = realize(init, cfg.grid, cfg.h)
    seeds = default_seeds(init, cfg.seed_count)
    monitors = []
    if "scenario" in cfg.monitors:
        monitors.append(analysis.ScenarioMonitor(cfg.solver.blowup_slope_threshold))
    if "lyapunov" in cfg.monitors:
        monitors.append(analysis.LyapunovMonitor(init, seeds))
    tracers = None
    if "transport" in cfg.monitors:
        tracers = Tracers(seeds)
        monitors.append(analysis.TransportMonitor(init.rho0))
    result = run(state, cfg.solver, monitors, sample_dt=cfg.sample_dt, tracers=tracers)
    estimate = (None, None)
    if result.status is Status.BLOWUP_SUSPECTED and "scenario" in cfg.monitors:
        try:
            estimate = analysis.estimate_blowup_time(result.records)
        except analysis.InsufficientSamples:
            pass
    verdict = analysis.runtime_verdict(result) if "scenario" in cfg.monitors else None
    return result, verdict, estimate


def _exit_for(status):
    return {Status.SMOOTH: EXIT_OK, Status.BLOWUP_SUSPECTED: EXIT_BLOWUP,
            Status.FAILED: EXIT_FAILED}[status]


def summary_text(result, verdict, estimate):
    fields = [f"status={result.status}", f"t_final={format_float(result.t_final)}",
              f"steps={result.steps}", f"n_final={result.state.grid.n}"]
    if result.trigger:
        fields.append(f"trigger={result.trigger}")
    recs = [r for r in result.records if r.a_drift is not None]
    if recs:
        fields.append(f"max_a_drift={format_float(max(abs(r.a_drift) for r in recs))}")
        I0 = recs[0].int_abs_rho
        drift = max(abs(r.int_abs_rho - I0) for r in recs) / max(I0, 1e-300) if I0 else 0.0
        fields.append(f"int_abs_rho_drift={format_float(drift)}")
    res = [r.transport_residual for r in result.records if r.transport_residual is not None]
    if res:
        fields.append(f"max_transport_residual={format_float(max(res))}")
    T, ci = estimate
    if T is not None:
        fields.append(f"T_star={format_float(T)} ci={format_float(ci)}")
    if verdict is not None:
        fields.append(f"classification={verdict.classification}")
    return " ".join(fields)


def cmd_predict(cfg, out=None):
    out = out or sys.stdout
    verdict = analysis.predict(cfg.init, a=cfg.a)
    print(verdict.record(), file=out)
    if verdict.notes:
        print("notes=" + ",".join(verdict.notes), file=out)
    return EXIT_OK


def cmd_run(cfg, output=None, out=None):
    out = out or sys.stdout
    result, verdict, estimate = execute(cfg)
    path = output or cfg.output_path
    text = csv_text(result.records)
    if path is None or path == "-":
        out.write(text)
    else:
        Path(path).write_text(text)
    print(summary_text(result, verdict, estimate), file=out)
    return _exit_for(result.status)


def _sweep_row(cfg):
    init = cfg.init
    pred = analysis.predict(init)
    result, verdict, (T, ci) = execute(cfg)
    runtime = str(verdict.classification) if verdict is not None else str(result.status)
    if result.status is Status.SMOOTH:
        runtime = "Smooth"
    elif result.status is Status.FAILED:
        runtime = "Failed"
    return {"a": init.a_exact(), "predicted": str(pred.classification),
            "justification": pred.justification, "time_bound": pred.time_bound,
            "status": str(result.status), "runtime": runtime, "t_final": result.t_final,
            "T_star": T, "ci": ci}


def _threads():
    try:
        return max(1, int(os.environ.get("HS2_THREADS", "")))
    except ValueError:
        return os.cpu_count() or 1


def cmd_sweep(cfg, axis, out=None):
    out = out or sys.stdout
    key, values = parse_axis(axis)
    cfgs = [cfg.with_value(key, v) for v in values]
    workers = min(_threads(), len(cfgs))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_row, cfgs))
    else:
        rows = [_sweep_row(c) for c in cfgs]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for v, row in zip(values, rows):
        row["value"] = v
        writer.writerow([row[c] if isinstance(row[c], str) else format_float(row[c])
                         for c in SWEEP_COLUMNS])
    out.write(buf.getvalue())
    return EXIT_OK


# ----------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="hs2", description="Two-component Hunter-Saxton simulator")
    sub = p.add_subparsers(dest="command", required=True)
    sp = sub.add_parser("predict", help="classify the initial data")
    sp.add_argument("config")
    sr = sub.add_parser("run", help="integrate and write diagnostics CSV")
    sr.add_argument("config")
    sr.add_argument("-o", "--output", help="CSV path ('-' for stdout); overrides output.path")
    sw = sub.add_parser("sweep", help="predict and run along one parameter axis")
    sw.add_argument("config")
    sw.add_argument("--axis", required=True, help="key=start:stop:count, e.g. rho0.const=0.5:1.5:3")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.command == "predict":
            return cmd_predict(cfg)
        if args.command == "run":
            return cmd_run(cfg, args.output)
        return cmd_sweep(cfg, args.axis)
    except (ParseError, ValidationError, AxisError, analysis.AMismatch) as exc:
        print(f"hs2: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
