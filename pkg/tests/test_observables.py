from __future__ import annotations

import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from moranrr.disorder import environment_from_counts
from moranrr.observables import (
    TriangleReport, delta, distance2_P, law_mismatch_norm, lyapunov_bound, lyapunov_h, masses,
    mz_integral, project_P, project_Pcheck, triangle_report, triangle_terms,
)
from moranrr.csvio import read_csv
from moranrr.rate_law import make_finite_law

# two classes with n = (0.37, 0.63), r = (0.8, 3.5) and the state y = (0.17, 0.61)
REF_ENV = environment_from_counts([(0.8, 37), (3.5, 63)])
REF_Y = np.array([0.17, 0.61])


def _reference_oracle():
    n = (F(37, 100), F(63, 100))
    r = (F(8, 10), F(35, 10))
    y = (F(17, 100), F(61, 100))
    S = sum(y)
    D = 1 / (n[0] / r[0] + n[1] / r[1])
    Sc = D * (y[0] / r[0] + y[1] / r[1])
    d = tuple(yk - nk * S for yk, nk in zip(y, n))
    h = sum(dk * dk / nk for dk, nk in zip(d, n))
    return dict(S=S, D=D, Sc=Sc, Py=tuple(S * nk for nk in n), Pcy=tuple(Sc * nk for nk in n),
                delta=d, h=h)


ORACLE = _reference_oracle()


def test_reference_state_against_exact_fractions():
    S, Sc = masses(REF_Y, REF_ENV)
    assert S == pytest.approx(float(ORACLE["S"]), abs=1e-12)
    assert Sc == pytest.approx(float(ORACLE["Sc"]), abs=1e-12)
    assert REF_ENV.D_N == pytest.approx(float(ORACLE["D"]), abs=1e-12)
    assert np.allclose(project_P(REF_Y, REF_ENV), [float(v) for v in ORACLE["Py"]], atol=1e-12)
    assert np.allclose(project_Pcheck(REF_Y, REF_ENV), [float(v) for v in ORACLE["Pcy"]], atol=1e-12)
    assert np.allclose(delta(REF_Y, REF_ENV), [float(v) for v in ORACLE["delta"]], atol=1e-12)
    assert lyapunov_h(REF_Y, REF_ENV) == pytest.approx(float(ORACLE["h"]), abs=1e-12)


def test_reference_state_rounded():
    S, Sc = masses(REF_Y, REF_ENV)
    assert abs(S - 0.78) < 1e-6
    assert abs(Sc - 0.602002) < 1e-6
    assert np.allclose(project_P(REF_Y, REF_ENV), [0.2886, 0.4914], atol=1e-6)
    assert np.allclose(project_Pcheck(REF_Y, REF_ENV), [0.222741, 0.379261], atol=1e-6)
    assert np.allclose(delta(REF_Y, REF_ENV), [-0.1186, 0.1186], atol=1e-6)
    assert abs(lyapunov_h(REF_Y, REF_ENV) - 0.060343) < 1e-6
    assert abs(REF_ENV.D_N - 1 / 0.6425) < 1e-12


def test_reference_state_term2():
    law = make_finite_law([(0.8, 0.37), (3.5, 0.63)])
    terms = triangle_terms(REF_Y, REF_ENV, law)
    S, Sc = masses(REF_Y, REF_ENV)
    assert terms.term2 == pytest.approx(abs(S - Sc) * math.hypot(0.37, 0.63), abs=1e-15)
    assert abs(terms.term2 - 0.130048) < 1e-6
    assert terms.term3 == pytest.approx(0.0, abs=1e-15)


def test_trivial_states():
    env = REF_ENV
    assert masses(np.zeros(2), env) == (0.0, 0.0)
    S, Sc = masses(env.fractions, env)
    assert S == pytest.approx(1.0, abs=1e-15) and Sc == pytest.approx(1.0, abs=1e-15)
    y = 0.3 * env.fractions
    assert np.allclose(project_P(y, env), y, atol=1e-15)
    assert np.allclose(project_Pcheck(y, env), y, atol=1e-15)
    assert np.allclose(delta(y, env), 0, atol=1e-15)
    assert lyapunov_h(y, env) == pytest.approx(0, abs=1e-15)


def test_rejects_out_of_range():
    with pytest.raises(ValueError):
        masses(np.array([0.5, 0.1]), REF_ENV)
    with pytest.raises(ValueError):
        masses(np.array([-0.01, 0.1]), REF_ENV)
    with pytest.raises(ValueError):
        masses(np.array([0.1, 0.1, 0.1]), REF_ENV)


def _random_env_and_states(seed, count=1000):
    rng = np.random.default_rng(seed)
    K = int(rng.integers(1, 9))
    rates = rng.choice(np.arange(1, 200) / 7.0, K, replace=False)
    counts = rng.integers(1, 50, K)
    env = environment_from_counts(list(zip(rates.tolist(), counts.tolist())))
    y = rng.random((count, K)) * env.fractions
    return env, y


@pytest.mark.parametrize("seed", range(5))
def test_projection_properties(seed):
    env, y = _random_env_and_states(seed)
    Py = project_P(y, env)
    Pcy = project_Pcheck(y, env)
    assert np.max(np.linalg.norm(project_P(Py, env) - Py, axis=-1)) <= 1e-12
    assert np.max(np.linalg.norm(project_Pcheck(Pcy, env) - Pcy, axis=-1)) <= 1e-12
    assert np.max(np.abs(delta(y, env).sum(axis=-1))) <= 1e-12
    _, Sc = masses(y, env)
    _, Sc_proj = masses(Pcy, env)
    assert np.max(np.abs(Sc - Sc_proj)) <= 1e-12
    h = lyapunov_h(y, env)
    assert np.all(distance2_P(y, env) <= h + 1e-15)
    assert np.all(h >= 0) and np.all(h <= 1 + 1e-12)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(1, 30), min_size=1, max_size=6), st.floats(0, 1), st.data())
def test_h_vanishes_exactly_on_line(counts, s, data):
    rates = [1.0 + 0.5 * k for k in range(len(counts))]
    env = environment_from_counts(list(zip(rates, counts)))
    assert lyapunov_h(s * env.fractions, env) <= 1e-12
    k = data.draw(st.integers(0, len(counts) - 1))
    if len(counts) > 1:
        y = s * env.fractions
        bump = 0.5 * env.fractions[k] * (1 - s) + 1e-3 * env.fractions[k]
        y[k] = min(y[k] + bump, env.fractions[k])
        if y[k] - s * env.fractions[k] > 1e-6:
            assert lyapunov_h(y, env) > 1e-12


def test_lyapunov_bound():
    env = environment_from_counts([(1.0, 50), (2.0, 50)])
    assert lyapunov_bound(env, 0.4, 0.0) == pytest.approx(0.4, abs=1e-15)
    assert lyapunov_bound(env, 0.4, 1e3) == pytest.approx(0.03, abs=1e-15)
    t = np.array([0.0, 0.01])
    expect = 0.03 + (0.4 - 0.03) * np.exp(-2 * 100 * t)
    assert np.allclose(lyapunov_bound(env, 0.4, t), expect, rtol=1e-14)
    with pytest.raises(ValueError):
        lyapunov_bound(env, 1.5, 0.1)
    with pytest.raises(ValueError):
        lyapunov_bound(env, 0.5, -1.0)


def test_triangle_terms_on_line_with_matching_law():
    env = environment_from_counts([(1.0, 50), (4.0, 50)])
    law = make_finite_law([(1.0, 0.5), (4.0, 0.5)])
    t = triangle_terms(0.4 * env.fractions, env, law, s_ref=0.4)
    for v in (t.term1, t.term2, t.term3, t.term4):
        assert v == pytest.approx(0.0, abs=1e-15)
    y = np.array([0.1, 0.3])
    t = triangle_terms(y, env, law)
    assert t.term4 is None
    S, Sc = masses(y, env)
    t = triangle_terms(y, env, law, s_ref=Sc)
    assert t.term4 == 0.0
    assert t.term1 == pytest.approx(math.sqrt(distance2_P(y, env)))


def test_law_mismatch_on_union_support():
    env = environment_from_counts([(1.0, 1), (2.0, 3)])
    law = make_finite_law([(1.0, 0.5), (3.0, 0.5)])
    # n = (1/4, 3/4, 0) against mu = (1/2, 0, 1/2)
    assert law_mismatch_norm(env, law) == pytest.approx(math.sqrt(1 / 16 + 9 / 16 + 1 / 4))


def test_triangle_report_csv(tmp_path):
    env = environment_from_counts([(1.0, 50), (4.0, 50)])
    law = make_finite_law([(1.0, 0.5), (4.0, 0.5)])
    y = np.array([[0.1, 0.3], [0.2, 0.2]])
    rep = triangle_report([0.0, 0.5], y, env, law)
    assert isinstance(rep, TriangleReport)
    rep.to_csv(tmp_path / "tri.csv")
    header, data = read_csv(tmp_path / "tri.csv")
    assert header == ["t", "term1", "term2", "term3"] and data.shape == (2, 4)
    triangle_report([0.0, 0.5], y, env, law, s_ref=[0.3, 0.3]).to_csv(tmp_path / "tri4.csv")
    assert read_csv(tmp_path / "tri4.csv")[0][-1] == "term4"


def test_mz_integral():
    t = np.linspace(0, 2, 201)
    assert mz_integral(np.zeros((3, t.size)), t, 0.1, 1.0) == 0.0
    c = 0.7
    exact = c * (math.exp(-0.1) - math.exp(-1.0))
    assert mz_integral(np.full((4, t.size), c), t, 0.1, 1.0) == pytest.approx(exact, rel=1e-4)
    # off-grid endpoints are interpolated
    assert mz_integral(np.full(t.size, c), t, 0.105, 0.995) == pytest.approx(
        c * (math.exp(-0.105) - math.exp(-0.995)), rel=1e-4)
    with pytest.raises(ValueError):
        mz_integral(np.zeros(t.size), t, 0.5, 3.0)
    with pytest.raises(ValueError):
        mz_integral(np.zeros(t.size), t, 1.0, 0.5)


def test_mz_integral_second_order():
    d = np.sin
    errs = []
    for step in (0.1, 0.05, 0.025):
        t = np.arange(0, 2 + step / 2, step)
        # int_0^1 sin(t) e^-t dt = (1 - e^-1 (sin 1 + cos 1)) / 2
        exact_val = 0.5 * (1 - math.exp(-1) * (math.sin(1) + math.cos(1)))
        errs.append(abs(mz_integral(d(t), t, 0.0, 1.0) - exact_val))
    assert 3.5 < errs[0] / errs[1] < 4.5 and 3.5 < errs[1] / errs[2] < 4.5
