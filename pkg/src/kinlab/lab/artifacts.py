"""CSV, manifest and plot output. Every file is written to a temporary name and renamed."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass

from ..kinetic.extreal import ExtReal

CRITERIA_FILE = "criteria.csv"
MANIFEST_FILE = "manifest.json"
CRITERIA_COLUMNS = ("id", "description", "observed", "threshold", "verdict")


@dataclass(frozen=True)
class Criterion:
    id: str
    description: str
    observed: object
    threshold: str
    passed: bool

    def row(self):
        return [self.id, self.description, format_value(self.observed), self.threshold,
                "PASS" if self.passed else "FAIL"]


def format_value(x) -> str:
    """Deterministic text for a CSV cell; PosInfinity is the token "inf"."""
    if isinstance(x, ExtReal):
        return "inf" if x.is_infinite else repr(x.value)
    if isinstance(x, bool) or type(x).__name__ == "bool_":
        return "true" if x else "false"
    if isinstance(x, (int,)) and not isinstance(x, bool):
        return str(x)
    if isinstance(x, float) or type(x).__name__.startswith("float"):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return repr(x)
    if type(x).__name__.startswith("int"):
        return str(int(x))
    if isinstance(x, (list, tuple)):
        return " ".join(format_value(v) for v in x)
    return str(x)


def atomic_write_bytes(path: str, data: bytes) -> None:
    folder = os.path.dirname(os.path.abspath(path))
    os.makedirs(folder, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_bytes(columns, rows) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(columns))
    for r in rows:
        writer.writerow([format_value(v) for v in r])
    return buf.getvalue().encode("utf-8")


def write_csv(path: str, columns, rows) -> str:
    data = csv_bytes(columns, rows)
    atomic_write_bytes(path, data)
    return hashlib.sha256(data).hexdigest()


def dict_table(dict_rows, first=()):
    """(columns, rows) from a list of dicts; missing cells become empty strings."""
    cols = list(first)
    for r in dict_rows:
        for k in r:
            if k not in cols:
                cols.append(k)
    return cols, [[r.get(c, "") for c in cols] for r in dict_rows]


def write_json(path: str, payload) -> None:
    atomic_write_bytes(path, (json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n").encode())


def read_csv(path: str):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def _to_float(cell: str) -> float:
    try:
        return float(cell)
    except ValueError:
        return math.nan


def plot_csv(csv_path: str, x: str, ys, svg_path: str, logx=False, logy=False, title=""):
    """Line plot of columns of an existing CSV to an SVG file."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "kinlab"
    cols, rows = read_csv(csv_path)
    xs = [_to_float(r[cols.index(x)]) for r in rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    for y in ys:
        vals = [_to_float(r[cols.index(y)]) for r in rows]
        pts = [(a, b) for a, b in zip(xs, vals) if math.isfinite(a) and math.isfinite(b)]
        if pts:
            ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", ms=3, label=y)
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(x)
    ax.set_title(title)
    if ax.lines:
        ax.legend(fontsize=8)
    else:
        ax.text(0.5, 0.5, "no finite values", ha="center", va="center", transform=ax.transAxes)
    fig.tight_layout()
    buf = io.BytesIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    atomic_write_bytes(svg_path, buf.getvalue())
