from __future__ import annotations

import numpy as np
from hypothesis import given, settings, strategies as st

from moranrr import _fenwick as fw


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 20), min_size=1, max_size=40), st.data())
def test_prefix_and_find_match_cumsum(weights, data):
    w = np.array(weights, dtype=float)
    tree = fw.new_tree(w)
    c = np.concatenate([[0.0], np.cumsum(w)])
    for k in range(w.size + 1):
        assert fw.prefix(tree, k) == c[k]
    assert fw.total(tree) == c[-1]
    u = data.draw(st.floats(0, max(c[-1] - 1e-9, 0)))
    k = fw.find(tree, u)
    if c[-1] > 0:
        # smallest k with prefix(k+1) > u
        assert k == int(np.searchsorted(c[1:], u, side="right"))
        assert w[k] > 0


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 9), min_size=1, max_size=25), st.lists(
    st.tuples(st.integers(0, 24), st.integers(-3, 3)), max_size=30))
def test_updates(weights, updates):
    w = np.array(weights, dtype=float)
    tree = fw.new_tree(w)
    for k, d in updates:
        k %= w.size
        if w[k] + d < 0:
            continue
        w[k] += d
        fw.add(tree, k, float(d))
    assert np.array_equal(tree, fw.new_tree(w))


def test_find_past_total_returns_K():
    tree = fw.new_tree([1.0, 2.0])
    assert fw.find(tree, 3.0) == 2
    assert fw.find(tree, 1.0) == 1
    assert fw.find(tree, 0.0) == 0
