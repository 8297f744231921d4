from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

from moranrr.disorder import (
    Environment, draw_environment, empirical_D, environment_from_counts, expected_distinct,
    key_ratio, load_environment, save_environment,
)
from moranrr.rate_law import make_finite_law, make_geometric_law


def test_scalars():
    env = environment_from_counts([(1.0, 3), (2.0, 1), (0.5, 4)])
    assert env.N == 8
    assert env.sigma == 3.5
    assert env.m_minus == 0.5 and env.m_plus == 2.0
    assert env.m_inv2 == pytest.approx(1 + 0.25 + 4)
    # 1/D_N = (3/8)/1 + (1/8)/2 + (4/8)/0.5
    inv = Fraction(3, 8) + Fraction(1, 16) + Fraction(1, 1)
    assert env.D_N == pytest.approx(float(1 / inv), rel=1e-15)
    assert empirical_D(env) == env.D_N
    assert np.allclose(env.fractions, [3 / 8, 1 / 8, 4 / 8])


def test_validation():
    with pytest.raises(ValueError):
        environment_from_counts([])
    with pytest.raises(ValueError):
        environment_from_counts([(1.0, 0)])
    with pytest.raises(ValueError):
        environment_from_counts([(1.0, 2), (1.0, 3)])
    with pytest.raises(ValueError):
        environment_from_counts([(1.0, 2.5)])
    with pytest.raises(ValueError):
        environment_from_counts([(0.0, 2)])


def test_key_ratio_scales_as_inverse_N():
    base = key_ratio(environment_from_counts([(1.0, 1), (3.0, 2)]))
    for m in (2, 5, 17, 1000):
        env = environment_from_counts([(1.0, m), (3.0, 2 * m)])
        assert key_ratio(env) * env.N == pytest.approx(base * 3, rel=1e-14)


def test_expected_distinct():
    assert expected_distinct(make_finite_law([(1, .5), (2, .5)]), 2) == (1.5, False)
    value, truncated = expected_distinct(make_geometric_law(0.5), 1)
    assert value == pytest.approx(1.0, abs=1e-11) and truncated
    # sum_k [1 - (1 - mu_k)^N] for three atoms
    law = make_finite_law([(1, .2), (2, .3), (3, .5)])
    exact = sum(1 - (1 - p) ** 7 for p in (.2, .3, .5))
    assert expected_distinct(law, 7)[0] == pytest.approx(exact, rel=1e-14)


def test_draw_environment():
    law = make_finite_law([(1, .25), (2, .25), (3, .5)])
    env = draw_environment(law, 1000, np.random.default_rng(3))
    assert env.N == 1000
    assert list(env.rates) == [1.0, 2.0, 3.0]
    env2 = draw_environment(law, 1000, np.random.default_rng(3))
    assert env == env2
    tiny = draw_environment(make_geometric_law(0.5), 3, np.random.default_rng(0))
    assert tiny.N == 3 and np.all(tiny.counts >= 1)
    assert np.all(np.diff(tiny.rates) > 0)


def test_environment_document(tmp_path):
    env = environment_from_counts([(0.1 + 0.2, 3), (math.pi, 4)])
    save_environment(env, tmp_path / "env.txt")
    again = load_environment(tmp_path / "env.txt")
    assert again == env and hash(again) == hash(env)
    (tmp_path / "bad.txt").write_text("N = 5\nclasses = [[1.0, 3]]\n")
    with pytest.raises(ValueError):
        load_environment(tmp_path / "bad.txt")


def test_environment_is_read_only():
    env = environment_from_counts([(1.0, 3)])
    with pytest.raises(ValueError):
        env.counts[0] = 5
    assert isinstance(env, Environment)
