"""Deterministic CSV/JSON writers and optional PNG figures.

Floats are written with ``repr`` (shortest round-trip form), JSON keys are
sorted, files are UTF-8 with '\\n' line endings, so equal inputs give
byte-identical files.
"""

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

__all__ = ["fmt", "to_plain", "csv_text", "json_text", "write_text", "rates_rows",
           "RATES_COLUMNS", "plot_rates"]

RATES_COLUMNS = ["d", "p", "q", "k", "lower", "upper", "envelope", "slope_fit"]


def fmt(value):
    """CSV cell text: repr for floats, 'inf'/'nan' spelled out, '' for None."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def to_plain(obj):
    """JSON-safe copy: numpy scalars and arrays unpacked, non-finite floats as strings."""
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return obj


def csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def json_text(obj):
    return json.dumps(to_plain(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_text(path, text):
    path = Path(path)
    if path.parent != Path(""):
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def rates_rows(estimates, p_label, slope):
    for est in estimates:
        yield [est.d, p_label, est.q, est.k, est.lower, est.upper, est.envelope, slope]


def plot_rates(path, estimates, fit=None, title=None):
    """Log2-scale plot of the certified bounds and the envelope against k.

    Needs matplotlib (an optional dependency); imported only here.
    """
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    k = [e.k for e in estimates]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(k, [e.upper for e in estimates], "o-", base=2, label="certified upper")
    low = [(e.k, e.lower) for e in estimates if e.lower > 0]
    if low:
        ax.semilogy(*zip(*low), "s-", base=2, label="certified lower")
    env = [(e.k, e.envelope) for e in estimates if math.isfinite(e.envelope)]
    if env:
        ax.semilogy(*zip(*env), "--", base=2, label="envelope (constants 1)")
    if fit is not None:
        kk = np.array(k, dtype=float)
        ax.semilogy(kk, 2.0 ** (fit.slope * kk + fit.intercept), ":", base=2,
                    label=f"fit slope {fit.slope:.3f}")
    ax.set_xlabel("k")
    ax.set_ylabel("e_k")
    if title:
        ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
