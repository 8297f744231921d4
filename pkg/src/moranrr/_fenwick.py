"""Fenwick (binary indexed) trees over float weights, as numba kernels.

A tree for ``K`` leaves is a float array of length ``K + 1``; slot 0 is unused.
Leaf indices in the public functions are 0-based.
"""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def build(weights, tree):
    K = weights.size
    for i in range(K + 1):
        tree[i] = 0.0
    for i in range(1, K + 1):
        tree[i] += weights[i - 1]
        j = i + (i & -i)
        if j <= K:
            tree[j] += tree[i]


@njit(cache=True, nogil=True)
def add(tree, k, delta):
    i = k + 1
    n = tree.size
    while i < n:
        tree[i] += delta
        i += i & -i


@njit(cache=True, nogil=True)
def prefix(tree, k):
    """Sum of the first ``k`` leaves."""
    s = 0.0
    i = k
    while i > 0:
        s += tree[i]
        i -= i & -i
    return s


@njit(cache=True, nogil=True)
def total(tree):
    return prefix(tree, tree.size - 1)


@njit(cache=True, nogil=True)
def find(tree, u):
    """Smallest 0-based leaf ``k`` with ``prefix(k + 1) > u``.

    Leaves own half-open intervals, so zero-weight leaves are never returned
    and a boundary value goes to the following leaf. Returns ``K`` when
    ``u`` is not below the total.
    """
    K = tree.size - 1
    step = 1
    while step * 2 <= K:
        step *= 2
    pos = 0
    while step > 0:
        nxt = pos + step
        if nxt <= K and tree[nxt] <= u:
            pos = nxt
            u -= tree[nxt]
        step //= 2
    return pos


def new_tree(weights) -> np.ndarray:
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    tree = np.zeros(weights.size + 1)
    build(weights, tree)
    return tree
