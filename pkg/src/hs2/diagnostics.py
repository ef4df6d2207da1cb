"""Per-sample diagnostics record and its CSV serialisation."""

import csv
import io
from dataclasses import dataclass, fields

CSV_COLUMNS = ("t", "dt", "a_drift", "int_abs_rho", "min_ux", "max_ux", "sup_abs_rhox",
               "M_sup", "w_max", "w_bound", "ux_lower_bound")


@dataclass
class DiagnosticsRecord:
    """Monitored quantities at one sample time.

    ``None`` marks a quantity whose monitor is not applicable (or not enabled)
    for the run.
    """

    t: float
    dt: float = None
    n: int = None
    a_now: float = None
    a_drift: float = None
    int_abs_rho: float = None
    min_ux: float = None
    argmin_ux: float = None
    max_ux: float = None
    sup_abs_rhox: float = None
    M_sup: float = None
    argmax_M: float = None
    ux_at_argmax_M: float = None
    w_max: float = None
    w_bound: float = None
    ux_lower_bound: float = None
    transport_residual: float = None
    tripped: str = None

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


def format_float(value):
    """Shortest round-trip text for a float (at most 17 significant digits)."""
    if value is None:
        return ""
    return repr(float(value))


def csv_text(records, columns=CSV_COLUMNS):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for rec in records:
        writer.writerow([format_float(getattr(rec, c)) for c in columns])
    return buf.getvalue()


def write_csv(records, path, columns=CSV_COLUMNS):
    with open(path, "w", newline="") as fh:
        fh.write(csv_text(records, columns))


def read_csv(path):
    """Read a diagnostics CSV back into dicts of floats (``None`` for blanks)."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [{k: (float(v) if v != "" else None) for k, v in row.items()} for row in rows]
