"""Reference Fisher-Wright diffusion and the statistics used to compare against it.

The diffusion has generator ``G f(s) = D s(1-s) f''(s)``, i.e. infinitesimal
variance ``2 D s(1-s)``. Heterozygosity ``E[S(1-S)]`` then decays like
``exp(-2 D t)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np
from numba import njit

from .csvio import write_csv
from .disorder import Environment, environment_from_counts
from .rate_law import RateLaw
from .seeding import generator

CONVENTION = "generator"


@dataclass(frozen=True)
class DiffusionSpec:
    D: float
    s0: float
    dt: float = 1e-3
    convention: str = CONVENTION

    def __post_init__(self):
        if not (math.isfinite(self.D) and self.D >= 0):
            raise ValueError("D must be a finite nonnegative number")
        if not 0.0 <= self.s0 <= 1.0:
            raise ValueError("s0 must lie in [0, 1]")
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ValueError("dt must be positive")
        if self.convention != CONVENTION:
            raise ValueError(f"only the {CONVENTION!r} convention is supported")


@njit(cache=True, nogil=True)
def _fw_path(D, s0, dt, grid, rng, out):
    s = s0
    t = 0.0
    for g in range(grid.size):
        target = grid[g]
        while t < target and 0.0 < s < 1.0:
            h = min(dt, target - t)
            s += math.sqrt(2.0 * D * s * (1.0 - s) * h) * rng.standard_normal()
            if s <= 0.0:
                s = 0.0
            elif s >= 1.0:
                s = 1.0
            t += h
        if not 0.0 < s < 1.0:
            t = target
        out[g] = s


def _check_grid(grid) -> np.ndarray:
    grid = np.ascontiguousarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("grid must be a nonempty 1-d sequence")
    if grid[0] < 0 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing and start at or after 0")
    return grid


def simulate_fw(spec: DiffusionSpec, grid, rng: np.random.Generator) -> np.ndarray:
    """Euler-Maruyama path read off at ``grid``; steps are shortened to land on grid times.

    After every step the value is clamped to [0, 1], and a path that reaches
    either end stays there.
    """
    grid = _check_grid(grid)
    out = np.empty(grid.size)
    _fw_path(float(spec.D), float(spec.s0), float(spec.dt), grid, rng, out)
    return out


def simulate_fw_ensemble(spec: DiffusionSpec, grid, seeds: Iterable[int]) -> np.ndarray:
    """One path per seed, shape ``(len(seeds), len(grid))``."""
    grid = _check_grid(grid)
    seeds = [int(s) for s in seeds]
    out = np.empty((len(seeds), grid.size))
    for i, seed in enumerate(seeds):
        _fw_path(float(spec.D), float(spec.s0), float(spec.dt), grid, generator(seed), out[i])
    return out


def paths_to_csv(path: str | Path, grid, paths) -> None:
    grid = np.asarray(grid, dtype=float)
    paths = np.atleast_2d(np.asarray(paths, dtype=float))
    R, G = paths.shape
    write_csv(path, ["path_id", "t", "s"],
              [np.repeat(np.arange(R), G), np.tile(grid, R), paths.ravel()])


def moments_fw(spec: DiffusionSpec, t: float) -> tuple[float, float, float]:
    """Exact ``(mean, variance, heterozygosity)`` of ``S(t)``."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    h0 = spec.s0 * (1.0 - spec.s0)
    decay = math.exp(-2.0 * spec.D * t)
    return spec.s0, h0 * (1.0 - decay), h0 * decay


def ks_two_sample(a, b) -> float:
    """Largest gap between the two empirical CDFs."""
    a = np.sort(np.asarray(a, dtype=float).ravel())
    b = np.sort(np.asarray(b, dtype=float).ravel())
    n, m = a.size, b.size
    if n == 0 or m == 0:
        raise ValueError("both samples must be nonempty")
    i = j = 0
    best = 0.0
    while i < n and j < m:
        v = min(a[i], b[j])
        while i < n and a[i] == v:
            i += 1
        while j < m and b[j] == v:
            j += 1
        best = max(best, abs(i / n - j / m))
    return float(best)


@dataclass(frozen=True)
class MeanVar:
    mean: float
    variance: float
    se_mean: float
    se_var: float


def mean_var_ci(samples) -> MeanVar:
    """Mean, unbiased variance and their standard errors."""
    x = np.asarray(samples, dtype=float).ravel()
    n = x.size
    if n < 2:
        raise ValueError("need at least two samples")
    mean = float(x.mean())
    var = float(x.var(ddof=1))
    m4 = float(np.mean((x - mean) ** 4))
    var_of_var = max((m4 - (n - 3) / (n - 1) * var * var) / n, 0.0)
    return MeanVar(mean, var, math.sqrt(var / n), math.sqrt(var_of_var))


def heterozygosity_slope(t, s, t_min: float, t_max: float) -> float:
    """Least-squares slope of ``log mean s(1-s)`` against ``t`` over ``[t_min, t_max]``.

    ``s`` has one row per path and one column per entry of ``t``.
    """
    t = np.asarray(t, dtype=float)
    s = np.atleast_2d(np.asarray(s, dtype=float))
    sel = (t >= t_min - 1e-12) & (t <= t_max + 1e-12)
    if sel.sum() < 2:
        raise ValueError("need at least two grid times in the fitting window")
    het = (s[:, sel] * (1.0 - s[:, sel])).mean(axis=0)
    if np.any(het <= 0):
        raise ValueError("mean heterozygosity vanished inside the fitting window")
    return float(np.polyfit(t[sel], np.log(het), 1)[0])


def fair_environment(law: RateLaw, N: int) -> Environment:
    """Counts ``N mu_k`` rounded by largest remainder; atoms that get no individual are dropped."""
    probs = law.probs / law.probs.sum()
    raw = probs * N
    counts = np.floor(raw).astype(np.int64)
    short = N - int(counts.sum())
    order = np.argsort(-(raw - counts), kind="stable")
    counts[order[:short]] += 1
    keep = counts > 0
    return environment_from_counts(list(zip(law.rates[keep].tolist(), counts[keep].tolist())))


def short_time_variance_probe(env_or_law: Environment | RateLaw, s0: float, t_small: float,
                              replicas: int, rng: np.random.Generator, N: int = 1000,
                              threads: int | None = None) -> float:
    """``Var[S(t_small)] / t_small`` over particle-system replicas started at fraction ``s0`` in every class.

    A law is turned into an environment with :func:`fair_environment` of size ``N``.
    Replica seeds are drawn from ``rng``.
    """
    from .engine import ClassFractions, simulate_ensemble

    if not 0 < t_small <= 0.05:
        raise ValueError("t_small must lie in (0, 0.05]")
    if replicas < 400:
        raise ValueError("need at least 400 replicas")
    env = env_or_law if isinstance(env_or_law, Environment) else fair_environment(env_or_law, N)
    seeds = rng.integers(0, 2**63, size=replicas, dtype=np.uint64)
    ens = simulate_ensemble(env, ClassFractions(float(s0)), [t_small], seeds, threads)
    S, _ = ens.masses()
    return float(S[:, 0].var(ddof=1) / t_small)
