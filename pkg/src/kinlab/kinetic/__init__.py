"""Log-space substrate: weights, Maxwellians, moments and weighted norms."""
from .densities import (Component, Density, ball_indicator, gaussian_density, maxwellian_density,
                        pointwise_density, radial_density)
from .extreal import ExtReal, ext_max, ext_sum
from .fields import (MacroFields, Maxwellian, Tail, Weight, log_weight_fn, maxwellian_eval,
                     maxwellian_from_moments, weight_log_eval)
from .moments import moment_integrals, moments, raw_moments
from .norms import divergence_witness, weighted_lp_norm
from .quadrature import DEFAULT_SPEC, QuadratureSpec, log_integrate
from .special import ball_volume, log_ball_volume, log_sphere_area, logsumexp, sphere_area

__all__ = [name for name in dir() if not name.startswith("_")]
