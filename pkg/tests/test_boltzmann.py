import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from kinlab import boltzmann as bz
from kinlab.boltzmann.norms import histogram_lp
from kinlab.errors import AdmissibilityViolation, BadSigma, MajorantOverflow, ReconstructionFailure, RegimeViolation
from kinlab.families import make_shell
from kinlab.homogeneous import weighted_lp_norm_maxwellian
from kinlab.kinetic import MacroFields, Maxwellian, Weight

KERNEL = bz.CollisionKernel(1.0, 1.0, 3)
W = Weight(1.0, 2.0, 3.0)
# I(0) by scipy dblquad over (|u|, cos) after the sigma integration in closed form
DBLQUAD_I0 = 3.5099291556363963


# ---------------------------------------------------------------- collision map

def test_collide_examples():
    v, u = np.array([1.0, 0, 0]), np.array([-1.0, 0, 0])
    vp, up = bz.collide(v, u, np.array([1.0, 0, 0]))
    assert np.allclose(vp, u) and np.allclose(up, v)
    vp, up = bz.collide(v, u, np.array([0, 1.0, 0]))   # grazing: sigma orthogonal to u - v
    assert np.array_equal(vp, v) and np.array_equal(up, u)
    with pytest.raises(BadSigma):
        bz.collide(v, u, np.array([1.0, 1.0, 0]))


def test_collide_conserves_on_many_triples():
    rng = np.random.default_rng(11)
    v = rng.normal(size=(10_000, 3)) * 10.0 ** rng.uniform(-3, 3, (10_000, 1))
    u = rng.normal(size=(10_000, 3)) * 10.0 ** rng.uniform(-3, 3, (10_000, 1))
    s = rng.normal(size=(10_000, 3))
    s /= np.linalg.norm(s, axis=1, keepdims=True)
    vp, up = bz.collide(v, u, s)
    scale = np.abs(v).max(axis=1) + np.abs(u).max(axis=1)
    assert np.all(np.abs(vp + up - v - u).max(axis=1) <= 1e-12 * scale)
    e0 = (v * v).sum(1) + (u * u).sum(1)
    e1 = (vp * vp).sum(1) + (up * up).sum(1)
    assert np.all(np.abs(e1 - e0) <= 1e-10 * e0)


@given(st.integers(0, 2 ** 31))
def test_sampled_sigma_is_unit(seed):
    rng = np.random.default_rng(seed)
    rel = rng.normal(size=(64, 3))
    sig = KERNEL.sample_sigma(rel, rng)
    assert np.allclose(np.linalg.norm(sig, axis=1), 1.0)


def test_kernel_validation_and_angular_mass():
    assert bz.angular_mass(3) == pytest.approx(2 * math.pi)
    assert bz.angular_mass(2) == pytest.approx(4.0)
    with pytest.raises(ValueError):
        bz.CollisionKernel(1.5)
    with pytest.raises(ValueError):
        bz.CollisionKernel(-3.0, dim=3)
    assert KERNEL.rate(2.0) == pytest.approx(2 * math.pi * 2.0)


def test_admissibility():
    assert bz.admissibility(3, 1.0, 2.0, 3.0, 1.0)["admissible"]
    bad = bz.admissibility(3, 1.0, 2.0, 0.0, 1.0)
    assert not bad["admissible"] and bad["failed"]
    with pytest.raises(AdmissibilityViolation):
        bz.qgain_weight_bound_estimate(0.0, KERNEL, Weight(1.0, 2.0, 0.0), 1000, strict=True)


# ---------------------------------------------------------------- gain integral

def test_gain_at_zero_against_quadrature():
    est = bz.qgain_weight_bound_estimate(0.0, KERNEL, W, 200_000, seed=5)
    assert abs(est.value - DBLQUAD_I0) <= 4 * est.std_error
    assert est.rel_error < 0.05


def test_gain_seeded_reproducible():
    a = bz.qgain_weight_bound_estimate(3.0, KERNEL, W, 20_000, seed=2)
    b = bz.qgain_weight_bound_estimate(np.array([3.0, 0, 0]), KERNEL, W, 20_000, seed=2)
    assert a.value == b.value


def test_gain_slope():
    assert bz.predicted_slope(3, 2.0, 1.0) == -1.0
    prof = bz.gain_profile([4.0, 8.0, 16.0, 32.0], KERNEL, W, 100_000, seed=9)
    assert bz.fitted_slope(prof) <= -1.0 + 0.3
    assert bz.gain_constant(prof) >= max(e.value for e in prof)


# ---------------------------------------------------------------- DSMC

@pytest.fixture(scope="module")
def shell_run():
    shell = make_shell(1, 2, 1, 6)
    return bz.evolve_dsmc(shell, KERNEL, 0.002, 300, 10_000, seed=1, alpha_prime=0.25, truncation_radii=(5.0,))


def test_dsmc_conservation(shell_run):
    assert shell_run.momentum_error <= 1e-12
    assert shell_run.energy_error <= 1e-10
    assert shell_run.events >= 10_000
    assert bz.energy_drift(shell_run) < 5e-3
    assert np.allclose(shell_run.series("mass"), shell_run.series("mass")[0], rtol=1e-14)


def test_dsmc_h_and_relaxation(shell_run):
    h = bz.h_check(shell_run)
    # a per-increment 3 sigma test fires on ~0.13% of equilibrated increments under pure noise
    assert h["violations"] <= 0.01 * (len(shell_run.rows) - 1) and h["decrease"] > 0
    assert all(i >= len(shell_run.rows) / 3 for i in h["indices"])
    l1 = shell_run.series("L1_to_maxwellian")
    assert l1[-1] < 0.2 * l1[0]
    assert bz.relaxation_rate(shell_run)["rate"] > 0


def test_dsmc_equilibrium_start_is_flat():
    m = Maxwellian(MacroFields.make(1.0, [0.3, 0, 0], 2.0))
    run = bz.evolve_dsmc(m, KERNEL, 0.002, 200, 10_000, seed=4)
    assert all(v["flat"] for v in bz.flatness(run).values())


def test_dsmc_reproducible():
    m = Maxwellian(MacroFields.make(1.0, [0, 0, 0], 1.0))
    a = bz.evolve_dsmc(m, KERNEL, 0.01, 20, 2000, seed=8)
    b = bz.evolve_dsmc(m, KERNEL, 0.01, 20, 2000, seed=8)
    assert np.array_equal(a.final.velocities, b.final.velocities)


def test_dsmc_majorant_retry_and_regime():
    m = Maxwellian(MacroFields.make(1.0, [0, 0, 0], 1.0))
    run = bz.evolve_dsmc(m, KERNEL, 0.01, 5, 2000, seed=3, majorant=0.05)
    assert run.retries > 0 and run.majorant_history[-1][1] > 0.05
    with pytest.raises(RegimeViolation):
        bz.evolve_dsmc(m, KERNEL, 5.0, 2, 2000, seed=3)
    with pytest.raises(MajorantOverflow):
        bz.evolve_dsmc(m, KERNEL, 0.01, 2, 2000, seed=3, majorant=0.05, max_retries=0)
    with pytest.raises(ValueError):
        bz.evolve_dsmc(m, bz.CollisionKernel(-1.0), 0.01, 2, 2000)


def test_sampled_ensemble_matches_fields():
    shell = make_shell(1, 2, 1, 6)
    ens = bz.sample_ensemble(shell, 50_000, seed=0)
    from kinlab.families import family_macro_fields
    exact = family_macro_fields(shell).fields
    assert ens.mass == pytest.approx(exact.rho, rel=1e-12)
    assert ens.temperature == pytest.approx(exact.temp, rel=0.02)
    speeds = np.linalg.norm(ens.velocities, axis=1)
    assert speeds.min() >= 6 - 1e-9 and speeds.max() <= 36 + 1e-9


# ---------------------------------------------------------------- norms

def test_maxwellian_truncated_norm_limits():
    m = Maxwellian(MacroFields.make(2.0, [1.0, 0, 0], 1.5))
    assert bz.maxwellian_truncated_norm(m, 0.0, 1, 30.0).value == pytest.approx(2.0, rel=1e-10)
    full = weighted_lp_norm_maxwellian(m, 0.1, 2)
    assert bz.maxwellian_truncated_norm(m, 0.1, 2, 40.0).value == pytest.approx(full.value, rel=1e-9)


def test_histogram_reconstruction():
    m = Maxwellian(MacroFields.make(1.0, [0, 0, 0], 1.0))
    ens = bz.sample_maxwellian(m, 200_000, seed=2)
    est = histogram_lp(ens, lambda r: 0.1 * r * r, 2, 4.0)
    exact = bz.maxwellian_truncated_norm(m, 0.1, 2, 4.0).value
    assert est == pytest.approx(exact, rel=0.03)
    few = bz.ParticleEnsemble(np.vstack([np.zeros((5, 3)), np.full((50, 3), 10.0)]), 0.01, 0.0, 0)
    with pytest.raises(ReconstructionFailure):
        histogram_lp(few, lambda r: 0 * r, 2, 1.0)
    empty = bz.ParticleEnsemble(np.full((50, 3), 10.0), 0.02, 0.0, 0)
    assert histogram_lp(empty, lambda r: 0 * r, 2, 1.0) == 0.0


def test_norm_trajectory_approaches_equilibrium(shell_run):
    traj = bz.weighted_norm_trajectory(shell_run, 0.25, 1, (5.0,))
    assert traj.equilibrium.is_infinite
    ap = traj.approach(5.0)
    assert ap["end"] > ap["start"]
    assert abs(ap["tail_mean"] - ap["target"]) <= 3 * ap["noise"] + 0.05 * ap["target"]


def test_envelope_algebra():
    a, c = 2.0, 0.5
    t_star = bz.envelope_horizon(a, c)
    assert float(bz.envelope(a, c, t_star)) == pytest.approx(3 * a, rel=1e-14)
    assert float(bz.envelope(a, c, 0.0)) == pytest.approx(a, rel=1e-15)
    assert np.isinf(bz.envelope(a, c, 1.0 / (a * c)))
    assert np.isinf(bz.envelope(a, c, 5.0))


def test_envelope_check_on_run(shell_run):
    chk = bz.apriori_envelope_check(shell_run, W, mc_samples=20_000)
    assert chk.checked[0] and chk.holds
    assert chk.horizon == pytest.approx((2 / 3) / (chk.constant * chk.initial_norm))
