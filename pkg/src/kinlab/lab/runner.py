"""run_experiment: resolve, execute, write criteria and manifest."""
from __future__ import annotations

import os
import platform
import time

import matplotlib
import numpy as np
import scipy

from .. import __version__
from .artifacts import CRITERIA_COLUMNS, CRITERIA_FILE, MANIFEST_FILE, write_csv, write_json
from .config import ExperimentConfig
from .experiments import EXPERIMENTS, Outputs
from .parallel import thread_count


def run_experiment(cfg: ExperimentConfig, out_dir: str | None = None):
    folder = out_dir or cfg.output_dir or os.path.join("lab-out", cfg.experiment)
    os.makedirs(folder, exist_ok=True)
    out = Outputs(folder)
    start = time.perf_counter()
    criteria = EXPERIMENTS[cfg.experiment].run(cfg, out)
    wall = time.perf_counter() - start
    out.files[CRITERIA_FILE] = write_csv(os.path.join(folder, CRITERIA_FILE), CRITERIA_COLUMNS,
                                         [c.row() for c in criteria])
    manifest = {
        "experiment": cfg.experiment, "seed": cfg.seed, "params": cfg.params, "quadrature": cfg.quadrature,
        "resolved_quadrature": cfg.spec().__dict__, "wall_time_s": wall, "threads": thread_count(),
        "versions": {"kinlab": __version__, "python": platform.python_version(), "numpy": np.__version__,
                     "scipy": scipy.__version__, "matplotlib": matplotlib.__version__},
        "files": out.files,
    }
    write_json(os.path.join(folder, MANIFEST_FILE), manifest)
    return folder, criteria
