"""Quenched environments: ``N`` individual rates aggregated into rate classes."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from . import kvdoc
from .rate_law import RateLaw, sample_indices


@dataclass(frozen=True)
class Environment:
    """Class rates and counts of one population, plus the scalars read in hot loops.

    Only classes that are present are stored, so every count is at least one.
    """

    rates: np.ndarray
    counts: np.ndarray
    N: int = field(init=False)
    sigma: float = field(init=False)      # sum of class rates
    m_minus: float = field(init=False)    # smallest class rate
    m_plus: float = field(init=False)     # largest class rate
    m_inv2: float = field(init=False)     # sum of class rates^-2
    n_classes: int = field(init=False)
    D_N: float = field(init=False)

    def __post_init__(self):
        rates = np.array(self.rates, dtype=float)
        counts = np.array(self.counts, dtype=np.int64)
        if rates.ndim != 1 or rates.shape != counts.shape or rates.size == 0:
            raise ValueError("rates and counts must be nonempty 1-d arrays of equal length")
        if np.any(~np.isfinite(rates)) or np.any(rates <= 0):
            raise ValueError("class rates must be positive")
        if np.unique(rates).size != rates.size:
            raise ValueError("duplicate class rate")
        if np.any(counts < 1):
            raise ValueError("class counts must be at least 1")
        rates.setflags(write=False)
        counts.setflags(write=False)
        N = int(counts.sum())
        set_ = object.__setattr__
        set_(self, "rates", rates)
        set_(self, "counts", counts)
        set_(self, "N", N)
        set_(self, "sigma", math.fsum(rates))
        set_(self, "m_minus", float(rates.min()))
        set_(self, "m_plus", float(rates.max()))
        set_(self, "m_inv2", math.fsum(rates**-2.0))
        set_(self, "n_classes", int(rates.size))
        set_(self, "D_N", 1.0 / math.fsum(counts / N / rates))

    @property
    def fractions(self) -> np.ndarray:
        """``n_k = counts_k / N``."""
        return self.counts / self.N

    def __eq__(self, other):
        if not isinstance(other, Environment):
            return NotImplemented
        return (np.array_equal(self.rates, other.rates)
                and np.array_equal(self.counts, other.counts))

    def __hash__(self):
        return hash((self.rates.tobytes(), self.counts.tobytes()))

    def __repr__(self):
        return f"Environment(N={self.N}, classes={self.n_classes}, D_N={self.D_N:.6g})"


def environment_from_counts(pairs: Sequence[tuple[float, int]]) -> Environment:
    pairs = list(pairs)
    if not pairs:
        raise ValueError("need at least one class")
    rates = [float(r) for r, _ in pairs]
    counts = []
    for _, c in pairs:
        if int(c) != c:
            raise ValueError("class counts must be integers")
        counts.append(int(c))
    return Environment(np.array(rates), np.array(counts, dtype=np.int64))


def draw_environment(law: RateLaw, N: int, rng: np.random.Generator) -> Environment:
    """Draw ``N`` i.i.d. rates from ``law`` and aggregate them; classes keep the law's atom order."""
    if N < 1:
        raise ValueError("N must be at least 1")
    idx = sample_indices(law, N, rng)
    counts = np.bincount(idx, minlength=len(law))
    present = counts > 0
    return Environment(law.rates[present], counts[present])


def empirical_D(env: Environment) -> float:
    return env.D_N


def key_ratio(env: Environment) -> float:
    """``(sum r_k)(sum r_k^-2) / (N min r_k)`` over the present classes."""
    return env.sigma * env.m_inv2 / (env.N * env.m_minus)


def expected_distinct(law: RateLaw, N: int) -> tuple[float, bool]:
    """Expected number of distinct classes among ``N`` draws, ``sum_k [1 - (1 - mu_k)^N]``.

    The second element is True when the law is truncated, in which case the
    value is a lower bound on the untruncated expectation.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    mu = law.probs
    # direct power where it is exact enough; log1p/expm1 for tiny atoms
    miss = np.where(mu > 1e-3, 1.0 - (1.0 - mu) ** N, -np.expm1(N * np.log1p(-mu)))
    value = math.fsum(miss)
    return value, law.truncated_mass > 0


# -- text documents ----------------------------------------------------------

def environment_to_document(env: Environment) -> dict[str, Any]:
    return {"N": env.N,
            "classes": [[float(r), int(c)] for r, c in zip(env.rates, env.counts)]}


def environment_from_document(doc: Mapping[str, Any]) -> Environment:
    rows = doc.get("classes")
    if not isinstance(rows, list):
        raise ValueError("environment document needs classes = [[rate, count], ...]")
    env = environment_from_counts([(r, c) for r, c in rows])
    if "N" in doc and int(doc["N"]) != env.N:
        raise ValueError(f"N = {doc['N']} does not match the class counts (sum {env.N})")
    return env


def save_environment(env: Environment, path: str | Path) -> None:
    kvdoc.dump(environment_to_document(env), path)


def load_environment(path: str | Path) -> Environment:
    return environment_from_document(kvdoc.load(path))
