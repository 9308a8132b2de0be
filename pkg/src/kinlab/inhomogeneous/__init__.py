"""Mild solutions of the spatially inhomogeneous BGK model."""
from .fields import TransportRule, first_iterate_fields, transported_moments
from .picard import (FieldCache, HomogeneousMild, MildState, PicardConfig, PicardResult,
                     PicardSolver, apply_T, default_sample_set, picard_iterate)
from .reports import (DEFAULT_GRID, FIELD_COLUMNS, SCAN_COLUMNS, ExponentScan, FieldBoundReport,
                      MomentBoundReport, blowup_exponent_scan, field_bound_report, fit_power_pair,
                      log_log_slope, probe_speed, transported_moment_bound_check)
