"""Cutoff Boltzmann contrast: collision map, weighted gain bound, DSMC and weighted norms."""
from .dsmc import (DsmcRun, ParticleEnsemble, energy_drift, evolve_dsmc, flatness, h_check,
                   relaxation_rate, sample_ensemble, sample_maxwellian)
from .gain import (GainEstimate, fitted_slope, gain_constant, gain_profile, predicted_slope,
                   qgain_weight_bound_estimate)
from .kernel import CollisionKernel, admissibility, angular_mass, collide
from .norms import (EnvelopeCheck, NormTrajectory, apriori_envelope_check, envelope, envelope_horizon,
                    maxwellian_truncated_norm, weighted_norm_trajectory)

__all__ = [
    "CollisionKernel", "DsmcRun", "EnvelopeCheck", "GainEstimate", "NormTrajectory", "ParticleEnsemble",
    "admissibility", "angular_mass", "apriori_envelope_check", "collide", "energy_drift", "envelope",
    "envelope_horizon", "evolve_dsmc", "fitted_slope", "flatness", "gain_constant", "gain_profile",
    "h_check", "maxwellian_truncated_norm", "predicted_slope", "qgain_weight_bound_estimate",
    "relaxation_rate", "sample_ensemble", "sample_maxwellian", "weighted_norm_trajectory",
]
