"""Human-readable summary of an artifact directory."""
from __future__ import annotations

import json
import os

from ..errors import MissingArtifact
from .artifacts import CRITERIA_FILE, MANIFEST_FILE, read_csv


def load_criteria(folder: str):
    path = os.path.join(folder, CRITERIA_FILE)
    if not os.path.isdir(folder) or not os.path.exists(path):
        raise MissingArtifact(f"no {CRITERIA_FILE} in {folder}")
    cols, rows = read_csv(path)
    return [dict(zip(cols, r)) for r in rows]


def emit_report(folder: str) -> tuple[str, bool]:
    """One line per criterion (id, observed, threshold, verdict) and the overall verdict."""
    crit = load_criteria(folder)
    lines = []
    man = os.path.join(folder, MANIFEST_FILE)
    if os.path.exists(man):
        with open(man, encoding="utf-8") as fh:
            meta = json.load(fh)
        lines.append(f"experiment {meta.get('experiment')} seed {meta.get('seed')} "
                     f"wall time {meta.get('wall_time_s', 0):.2f} s")
    for c in crit:
        lines.append(f"[{c['verdict']}] {c['id']}: {c['description']}: observed {c['observed']} "
                     f"(threshold {c['threshold']})")
    ok = all(c["verdict"] == "PASS" for c in crit)
    lines.append(f"overall: {'PASS' if ok else 'FAIL'} ({sum(c['verdict'] == 'PASS' for c in crit)}/{len(crit)})")
    return "\n".join(lines), ok
