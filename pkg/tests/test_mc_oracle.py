"""Monte Carlo cross-check: sampler correctness, determinism, estimator agreement."""

import math

import numpy as np
import pytest

import oracles
from boundcert.errors import ConfigError
from boundcert.mc_oracle import mc_energy, run_chain_validation, sample_radii


def test_reproducible_bit_for_bit(well4, pipeline_well4):
    _, sol, _, profile = pipeline_well4
    e1 = mc_energy(well4, sol, profile, 3, 10.0 * sol.R, 20_000, seed=7)
    e2 = mc_energy(well4, sol, profile, 3, 10.0 * sol.R, 20_000, seed=7)
    assert e1.value == e2.value
    assert e1.stderr == e2.stderr
    assert e1.metadata["batch_means"] == e2.metadata["batch_means"]


def test_seed_changes_draws(well4, pipeline_well4):
    _, sol, _, profile = pipeline_well4
    e1 = mc_energy(well4, sol, profile, 3, 10.0 * sol.R, 20_000, seed=7)
    e2 = mc_energy(well4, sol, profile, 3, 10.0 * sol.R, 20_000, seed=8)
    assert e1.value != e2.value


def test_gradient_and_laplacian_agree(well4, pipeline_well4):
    # same expectation, different variance; both estimate <Psi|H Psi>
    _, sol, _, profile = pipeline_well4
    L = 10.0 * sol.R
    g = mc_energy(well4, sol, profile, 4, L, 200_000, seed=11, estimator="gradient")
    l = mc_energy(well4, sol, profile, 4, L, 200_000, seed=12, estimator="laplacian")
    sigma = math.hypot(g.stderr, l.stderr)
    assert abs(g.value - l.value) < 4.0 * sigma


def test_nearest_pair_gradient_identity(well4, pipeline_well4):
    # sum over particles of |grad_i t|^2 is exactly 2 for the minimal pair
    _, sol, _, profile = pipeline_well4
    est = mc_energy(well4, sol, profile, 5, 8.0 * sol.R, 5_000, seed=3)
    assert est.metadata["mean_grad_t_sq"] == pytest.approx(2.0, abs=1e-12)


def test_radial_sampler_moments(pipeline_well4):
    _, _, _, profile = pipeline_well4
    rng = np.random.Generator(np.random.Philox(key=[123, 0]))
    s = sample_radii(profile, rng, 400_000)
    assert np.all(s >= 0) and np.all(s <= 1)
    for k in (1, 2):
        target = oracles.gl_panels(
            lambda q: 4.0 * math.pi * q ** (2 + k) * profile.g0(q) ** 2, 0.0, 1.0, 64
        )
        mom = float(np.mean(s**k))
        se = float(np.std(s**k)) / math.sqrt(s.size)
        assert abs(mom - target) < 5.0 * se


def test_norm_estimate_tracks_phi(well4, pipeline_well4):
    # phi -> 1 on almost all of the box, so E[phi^2] -> 1 as L grows
    _, sol, _, profile = pipeline_well4
    est = mc_energy(well4, sol, profile, 2, 50.0 * sol.R, 50_000, seed=5)
    assert est.norm == pytest.approx(1.0, abs=0.01)
    assert est.norm_stderr < 0.01


def test_bad_arguments(well4, pipeline_well4):
    _, sol, _, profile = pipeline_well4
    L = 5.0 * sol.R
    with pytest.raises(ConfigError):
        mc_energy(well4, sol, profile, 1, L, 1000, seed=0)
    with pytest.raises(ConfigError):
        mc_energy(well4, sol, profile, 9, L, 1000, seed=0)
    with pytest.raises(ConfigError):
        mc_energy(well4, sol, profile, 3.0, L, 1000, seed=0)
    with pytest.raises(ConfigError):
        mc_energy(well4, sol, profile, 3, 0.0, 1000, seed=0)
    with pytest.raises(ConfigError):
        mc_energy(well4, sol, profile, 3, L, 16, seed=0, batches=32)
    with pytest.raises(ConfigError):
        mc_energy(well4, sol, profile, 3, L, 1000, seed=0, batches=1)
    with pytest.raises(ConfigError):
        mc_energy(well4, sol, profile, 3, L, 1000, seed=-1)
    with pytest.raises(ConfigError):
        mc_energy(well4, sol, profile, 3, L, 1000, seed=0, estimator="hessian")


def test_estimate_fields(well4, pipeline_well4):
    _, sol, _, profile = pipeline_well4
    est = mc_energy(well4, sol, profile, 2, 6.0 * sol.R, 1000, seed=1, batches=4)
    assert est.N == 2
    assert est.samples == 1000
    assert est.batches == 4
    assert est.estimator == "gradient"
    assert len(est.metadata["batch_means"]) == 4
    assert est.stderr > 0


def test_chain_validation_small(well4, pipeline_well4):
    _, sol, hprof, profile = pipeline_well4
    report = run_chain_validation(
        well4, Ns=(2, 3), L_factors=(5.0, 10.0), samples=40_000, seed=2,
        pipeline=(sol, hprof, profile),
    )
    assert len(report["rows"]) == 4
    assert report["passed"]
    for row in report["rows"]:
        assert set(row) == {"N", "L", "bound", "estimate", "stderr", "norm", "ok"}
        assert row["estimate"] <= row["bound"] + 3.0 * row["stderr"]


def test_chain_validation_flags_violations(well4, pipeline_well4):
    # an impossible bound must be flagged, not silently absorbed
    _, sol, hprof, profile = pipeline_well4
    report = run_chain_validation(
        well4, Ns=(2,), L_factors=(5.0,), samples=4_000, seed=2,
        pipeline=(sol, hprof, profile), bound_fn=lambda N, L: -10.0,
    )
    assert not report["passed"]
    assert len(report["violations"]) == 1
    assert report["violations"][0]["bound"] == -10.0
