from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import ks_2samp

from moranrr.csvio import read_csv
from moranrr.disorder import environment_from_counts
from moranrr.fw_reference import (
    DiffusionSpec, fair_environment, heterozygosity_slope, ks_two_sample, mean_var_ci, moments_fw,
    paths_to_csv, short_time_variance_probe, simulate_fw, simulate_fw_ensemble,
)
from moranrr.rate_law import make_finite_law
from moranrr.seeding import generator, stream_seeds

GRID = np.round(np.arange(0, 1.0001, 0.05), 12)


def test_spec_validation():
    with pytest.raises(ValueError):
        DiffusionSpec(1.0, 0.5, dt=0.0)
    with pytest.raises(ValueError):
        DiffusionSpec(1.0, 1.5)
    with pytest.raises(ValueError):
        DiffusionSpec(-1.0, 0.5)
    with pytest.raises(ValueError):
        DiffusionSpec(1.0, 0.5, convention="sde")
    with pytest.raises(ValueError):
        simulate_fw(DiffusionSpec(1.0, 0.5), [0.2, 0.1], generator(0))


def test_trivial_paths():
    assert np.all(simulate_fw(DiffusionSpec(0.0, 0.3), GRID, generator(0)) == 0.3)
    for s0 in (0.0, 1.0):
        assert np.all(simulate_fw(DiffusionSpec(2.0, s0), GRID, generator(0)) == s0)


def test_heterozygosity_at_half():
    paths = simulate_fw_ensemble(DiffusionSpec(1.0, 0.5), [0.5], stream_seeds(1, 2000))
    het = paths[:, 0] * (1 - paths[:, 0])
    se = het.std(ddof=1) / math.sqrt(het.size)
    assert abs(het.mean() - 0.25 * math.exp(-1)) <= 3 * se


def test_moments_fw():
    spec = DiffusionSpec(1.6, 0.5)
    assert moments_fw(spec, 0.0) == (0.5, 0.0, 0.25)
    mean, var, het = moments_fw(spec, 0.5)
    assert het == pytest.approx(0.25 * math.exp(-1.6), rel=1e-15)
    assert abs(het - 0.050474) < 1e-6
    assert var + het == pytest.approx(0.25)
    assert moments_fw(spec, 1e4)[1] == pytest.approx(0.25)
    with pytest.raises(ValueError):
        moments_fw(spec, -1.0)


@pytest.mark.parametrize("D", [1.0, 1.6])
def test_martingale_and_heterozygosity_decay(D):
    paths = simulate_fw_ensemble(DiffusionSpec(D, 0.5), GRID, stream_seeds(40 + int(10 * D), 2000))
    se = paths.std(axis=0, ddof=1) / math.sqrt(paths.shape[0])
    assert np.all(np.abs(paths.mean(axis=0) - 0.5) <= 4 * se + 1e-15)
    slope = heterozygosity_slope(GRID, paths, 0.1, 1.0)
    assert abs(slope + 2 * D) <= 0.1 * 2 * D


def test_absorption_is_permanent():
    fine = np.round(np.arange(0, 3.0001, 0.01), 12)
    paths = simulate_fw_ensemble(DiffusionSpec(3.0, 0.2), fine, stream_seeds(5, 300))
    for p in paths:
        hit = np.flatnonzero((p == 0) | (p == 1))
        if hit.size:
            assert np.all(p[hit[0]:] == p[hit[0]])
    assert np.all((paths >= 0) & (paths <= 1))


def test_step_refinement_is_below_noise():
    diffs, ses = [], []
    for pair in range(10):
        coarse = simulate_fw_ensemble(DiffusionSpec(1.6, 0.5, 1e-3), [0.5], stream_seeds(100 + pair, 2000))
        fine = simulate_fw_ensemble(DiffusionSpec(1.6, 0.5, 5e-4), [0.5], stream_seeds(200 + pair, 2000))
        hc, hf = coarse * (1 - coarse), fine * (1 - fine)
        diffs.append(hc.mean() - hf.mean())
        ses.append(hc.std(ddof=1) / math.sqrt(hc.size))
    assert abs(np.mean(diffs)) < np.mean(ses)


def test_grid_off_mesh_times():
    spec = DiffusionSpec(1.0, 0.5, dt=0.1)
    a = simulate_fw(spec, [0.05, 0.33, 0.5], generator(3))
    assert a.shape == (3,) and np.all((a >= 0) & (a <= 1))


def test_ks_examples():
    assert ks_two_sample([1, 2, 3], [1, 2, 3]) == 0.0
    assert ks_two_sample([0, 0], [1, 1]) == 1.0
    assert ks_two_sample([0, 1], [0, 2]) == 0.5
    with pytest.raises(ValueError):
        ks_two_sample([], [1.0])


@pytest.mark.filterwarnings("ignore::RuntimeWarning")  # scipy's p-value for tiny samples
@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(-5, 5), min_size=1, max_size=30),
       st.lists(st.integers(-5, 5), min_size=1, max_size=30))
def test_ks_matches_scipy_with_ties(a, b):
    assert ks_two_sample(a, b) == pytest.approx(ks_2samp(a, b, method="asymp").statistic, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(-80, 80).map(lambda i: i / 8), min_size=1, max_size=40),
       st.lists(st.integers(-80, 80).map(lambda i: i / 8), min_size=1, max_size=40))
def test_ks_symmetric_and_monotone_invariant(a, b):
    d = ks_two_sample(a, b)
    assert ks_two_sample(b, a) == d
    assert ks_two_sample(np.exp(np.asarray(a) / 3), np.exp(np.asarray(b) / 3)) == pytest.approx(d, abs=1e-12)


def test_mean_var_ci():
    r = mean_var_ci([3.0, 3.0, 3.0])
    assert r.variance == 0 and r.se_mean == 0
    r = mean_var_ci([0.0, 1.0])
    assert r.mean == 0.5 and r.variance == 0.5
    x = generator(4).normal(1.0, 2.0, 50)
    base, scaled = mean_var_ci(x), mean_var_ci(3 * x)
    assert scaled.mean == pytest.approx(3 * base.mean)
    assert scaled.variance == pytest.approx(9 * base.variance)
    with pytest.raises(ValueError):
        mean_var_ci([1.0])


def test_variance_standard_error_for_normal_samples():
    # for normal data the variance has standard error sigma^2 sqrt(2 / (n - 1))
    x = generator(12).normal(0.0, 1.5, 200_000)
    r = mean_var_ci(x)
    assert r.se_var == pytest.approx(1.5**2 * math.sqrt(2 / (x.size - 1)), rel=0.02)
    assert r.se_mean == pytest.approx(1.5 / math.sqrt(x.size), rel=0.01)


def test_paths_csv(tmp_path):
    paths = simulate_fw_ensemble(DiffusionSpec(1.0, 0.5), [0.0, 0.5], stream_seeds(1, 3))
    paths_to_csv(tmp_path / "fw.csv", [0.0, 0.5], paths)
    header, data = read_csv(tmp_path / "fw.csv")
    assert header == ["path_id", "t", "s"] and data.shape == (6, 3)
    assert data[:, 0].tolist() == [0, 0, 1, 1, 2, 2]


def test_fair_environment():
    env = fair_environment(make_finite_law([(1, 1 / 3), (2, 1 / 3), (3, 1 / 3)]), 100)
    assert env.N == 100 and sorted(env.counts.tolist()) == [33, 33, 34]


def test_probe_standard_moran():
    env = environment_from_counts([(1.0, 1000)])
    slope = short_time_variance_probe(env, 0.5, 0.02, 2000, generator(31))
    assert abs(slope - 0.5) <= 0.2 * 0.5


def test_probe_two_class_law():
    law = make_finite_law([(1, .5), (4, .5)])
    slope = short_time_variance_probe(law, 0.5, 0.02, 2000, generator(32))
    assert abs(slope - 0.8) <= 0.2 * 0.8
    # the SDE-display convention would predict half of this
    assert abs(slope - 0.4) > 0.2 * 0.4


def test_probe_preconditions():
    env = environment_from_counts([(1.0, 100)])
    with pytest.raises(ValueError):
        short_time_variance_probe(env, 0.5, 0.1, 500, generator(0))
    with pytest.raises(ValueError):
        short_time_variance_probe(env, 0.5, 0.02, 100, generator(0))
