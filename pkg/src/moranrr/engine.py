"""Exact event-driven simulation of the class-aggregated two-type Moran chain.

Time is the scaled clock ``t = (real time) / N``. With ``x_k`` type-1
individuals in class ``k`` and ``X = sum_k x_k``, the type-changing events
fire at integer-count rates

    class k loses a type-1 individual:  r_k * x_k * (N - X)
    class k gains a type-1 individual:  r_k * (n_k - x_k) * X

Self-choices and same-type choices change nothing and are left out.
Classes are picked from two Fenwick trees with leaf weights ``r_k x_k`` and
``r_k (n_k - x_k)``; cached sums are recomputed from the integer state every
``RECOMPUTE_EVERY`` events.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from numba import njit

from . import _fenwick as fw
from .csvio import write_csv
from .disorder import Environment
from .observables import distance2_P, lyapunov_h, masses
from .seeding import generator

RECOMPUTE_EVERY = 1 << 20

# ivars slots
_X, _N, _SINCE, _EVENTS = 0, 1, 2, 3
# fvars slots
_A, _B = 0, 1

OUTCOME_FIXED_0, OUTCOME_FIXED_1, OUTCOME_TIMEOUT = 0, 1, 2
OUTCOMES = {OUTCOME_FIXED_0: "fixed_0", OUTCOME_FIXED_1: "fixed_1", OUTCOME_TIMEOUT: "timeout"}


# -- kernels -------------------------------------------------------------------

@njit(cache=True, nogil=True)
def _recompute(x, counts, rates, t_one, t_zero, ivars, fvars):
    K = x.size
    w1 = np.empty(K)
    w0 = np.empty(K)
    X = 0
    for k in range(K):
        X += x[k]
        w1[k] = rates[k] * x[k]
        w0[k] = rates[k] * (counts[k] - x[k])
    fw.build(w1, t_one)
    fw.build(w0, t_zero)
    fvars[_A] = w1.sum()
    fvars[_B] = w0.sum()
    ivars[_X] = X
    ivars[_SINCE] = 0


@njit(cache=True, nogil=True)
def _uniform_pos(rng):
    u = rng.random()
    while u == 0.0:
        u = rng.random()
    return u


@njit(cache=True, nogil=True)
def _weight_count(x, counts, k, ones):
    return x[k] if ones else counts[k] - x[k]


@njit(cache=True, nogil=True)
def _pick(tree, u, rates, x, counts, ones):
    K = rates.size
    k = fw.find(tree, u)
    if k < K and _weight_count(x, counts, k, ones) > 0:
        return k
    # float drift put u past the tree total or onto an empty leaf; fall back
    # to a linear scan over exact weights
    tot = 0.0
    for j in range(K):
        tot += rates[j] * _weight_count(x, counts, j, ones)
    if u >= tot:
        u = tot * (1.0 - 1e-15)
    acc = 0.0
    last = -1
    for j in range(K):
        c = _weight_count(x, counts, j, ones)
        if c > 0:
            acc += rates[j] * c
            last = j
            if u < acc:
                return j
    return last


@njit(cache=True, nogil=True)
def _run(x, counts, rates, t_one, t_zero, ivars, fvars, rng, grid, out_x, t_max, n_max):
    """Core event loop; state lives in local scalars and is written back on exit.

    Stops at the first of: absorption, ``n_max`` events, the next event
    falling after ``t_max``, or every grid time recorded. Grid times get the
    state holding just before the first event after them. Returns
    ``(t, events_done, stop_code)`` with stop codes 0 absorbed, 1 event
    budget, 2 time limit, 3 grid done.
    """
    X = ivars[_X]
    N = ivars[_N]
    since = ivars[_SINCE]
    A = fvars[_A]
    B = fvars[_B]
    G = grid.size
    g = 0
    t = 0.0
    done = 0
    code = 1
    while done < n_max:
        if X == 0 or X == N:
            code = 0
            break
        total = A * (N - X) + B * X
        t_next = t - math.log(_uniform_pos(rng)) / total
        while g < G and grid[g] < t_next:
            out_x[g, :] = x
            g += 1
        if G > 0 and g == G:
            code = 3
            break
        if t_next > t_max:
            code = 2
            break
        down = A * (N - X)
        v = rng.random() * total
        if v < down:
            k = _pick(t_one, v / (N - X), rates, x, counts, True)
            r = rates[k]
            x[k] -= 1
            X -= 1
            A -= r
            B += r
            fw.add(t_one, k, -r)
            fw.add(t_zero, k, r)
        else:
            k = _pick(t_zero, (v - down) / X, rates, x, counts, False)
            r = rates[k]
            x[k] += 1
            X += 1
            A += r
            B -= r
            fw.add(t_one, k, r)
            fw.add(t_zero, k, -r)
        t = t_next
        done += 1
        since += 1
        if since >= RECOMPUTE_EVERY:
            ivars[_X] = X
            _recompute(x, counts, rates, t_one, t_zero, ivars, fvars)
            A = fvars[_A]
            B = fvars[_B]
            since = 0
    while g < G:
        out_x[g, :] = x
        g += 1
    ivars[_X] = X
    ivars[_SINCE] = since
    ivars[_EVENTS] += done
    fvars[_A] = A
    fvars[_B] = B
    return t, done, code


_STOP_ABSORBED = 0
_NO_LIMIT = np.iinfo(np.int64).max
_NO_GRID = np.empty(0)
_NO_OUT = np.empty((0, 0), dtype=np.int64)


# -- initial conditions ------------------------------------------------------------

@dataclass(frozen=True)
class ClassFractions:
    """``x_k = round-half-up(f_k n_k)``; a scalar fraction applies to every class."""

    fractions: float | tuple[float, ...]

    def counts(self, env: Environment, rng=None) -> np.ndarray:
        f = np.asarray(self.fractions, dtype=float)
        if f.ndim == 0:
            f = np.full(env.n_classes, float(f))
        if f.shape != (env.n_classes,):
            raise ValueError(f"need {env.n_classes} fractions, got {f.size}")
        if np.any(f < 0) or np.any(f > 1):
            raise ValueError("fractions must lie in [0, 1]")
        return np.floor(f * env.counts + 0.5).astype(np.int64)

    def __str__(self):
        return f"fractions:{_fmt_json(self.fractions)}"


@dataclass(frozen=True)
class WholeClasses:
    """The listed classes are entirely type 1, all others entirely type 0."""

    indices: tuple[int, ...] = ()

    def counts(self, env: Environment, rng=None) -> np.ndarray:
        x = np.zeros(env.n_classes, dtype=np.int64)
        for i in self.indices:
            if not 0 <= i < env.n_classes:
                raise ValueError(f"unknown class index {i}")
            x[i] = env.counts[i]
        return x

    def __str__(self):
        return f"classes:{_fmt_json(list(self.indices))}"


@dataclass(frozen=True)
class Uniform:
    """Each individual is independently type 1 with probability ``s0``."""

    s0: float

    def counts(self, env: Environment, rng=None) -> np.ndarray:
        if not 0.0 <= self.s0 <= 1.0:
            raise ValueError("s0 must lie in [0, 1]")
        if rng is None:
            raise ValueError("the uniform rule needs a random stream")
        return rng.binomial(env.counts, self.s0).astype(np.int64)

    def __str__(self):
        return f"uniform:{_fmt_json(self.s0)}"


InitRule = ClassFractions | WholeClasses | Uniform


def _fmt_json(v) -> str:
    from .kvdoc import format_value
    if isinstance(v, tuple):
        v = list(v)
    return format_value(v)


def parse_init_rule(text: str) -> InitRule:
    """Parse ``fractions:0.5``, ``fractions:[0.2, 0.8]``, ``classes:[0]`` or ``uniform:0.3``."""
    import json

    kind, sep, arg = text.partition(":")
    if not sep:
        raise ValueError(f"init rule {text!r} must look like kind:value")
    try:
        value = json.loads(arg)
    except json.JSONDecodeError as exc:
        raise ValueError(f"bad init rule argument {arg!r}") from exc
    kind = kind.strip()
    if kind == "fractions":
        return ClassFractions(tuple(float(v) for v in value) if isinstance(value, list) else float(value))
    if kind == "classes":
        if not isinstance(value, list):
            raise ValueError("classes: expects a list of class indices")
        return WholeClasses(tuple(int(v) for v in value))
    if kind == "uniform":
        return Uniform(float(value))
    raise ValueError(f"unknown init rule {kind!r}")


# -- state -------------------------------------------------------------------------

@dataclass(frozen=True)
class SimEvent:
    k: int
    direction: int
    wait: float


class PopulationState:
    """Per-class type-1 counts with cached weighted sums and the two selection trees."""

    def __init__(self, env: Environment, x):
        x = np.array(x, dtype=np.int64)
        if x.shape != (env.n_classes,):
            raise ValueError("x must have one entry per class")
        if np.any(x < 0) or np.any(x > env.counts):
            raise ValueError("need 0 <= x_k <= n_k")
        self.env = env
        self.x = x
        self._counts = np.ascontiguousarray(env.counts, dtype=np.int64)
        self._rates = np.ascontiguousarray(env.rates, dtype=np.float64)
        self.tree_one = np.zeros(env.n_classes + 1)
        self.tree_zero = np.zeros(env.n_classes + 1)
        self.ivars = np.array([0, env.N, 0, 0], dtype=np.int64)
        self.fvars = np.zeros(2)
        self.recompute()

    @property
    def X(self) -> int:
        return int(self.ivars[_X])

    @property
    def A(self) -> float:
        """Cached ``sum_k r_k x_k``."""
        return float(self.fvars[_A])

    @property
    def B(self) -> float:
        """Cached ``sum_k r_k (n_k - x_k)``."""
        return float(self.fvars[_B])

    @property
    def events(self) -> int:
        return int(self.ivars[_EVENTS])

    @property
    def events_since_recompute(self) -> int:
        return int(self.ivars[_SINCE])

    @property
    def absorbed(self) -> bool:
        return self.X == 0 or self.X == self.env.N

    def recompute(self) -> None:
        _recompute(self.x, self._counts, self._rates, self.tree_one, self.tree_zero,
                   self.ivars, self.fvars)

    def _args(self):
        return (self.x, self._counts, self._rates, self.tree_one, self.tree_zero,
                self.ivars, self.fvars)

    def copy(self) -> "PopulationState":
        other = PopulationState.__new__(PopulationState)
        other.env = self.env
        other._counts = self._counts
        other._rates = self._rates
        for name in ("x", "tree_one", "tree_zero", "ivars", "fvars"):
            setattr(other, name, getattr(self, name).copy())
        return other


def init_state(env: Environment, rule: InitRule | str, rng: np.random.Generator | None = None) -> PopulationState:
    if isinstance(rule, str):
        rule = parse_init_rule(rule)
    return PopulationState(env, rule.counts(env, rng))


def event_rates(state: PopulationState, env: Environment | None = None) -> tuple[float, np.ndarray, np.ndarray]:
    """Total rate and per-class ``(down, up)`` rates, from the exact integer state."""
    env = env or state.env
    X = int(state.x.sum())
    down = env.rates * state.x * (env.N - X)
    up = env.rates * (env.counts - state.x) * X
    return float(down.sum() + up.sum()), down, up


def step(state: PopulationState, env: Environment | None = None,
         rng: np.random.Generator | None = None) -> SimEvent:
    if rng is None:
        raise ValueError("step needs a random stream")
    if state.absorbed:
        raise RuntimeError("state is absorbed; no further events")
    before = state.x.copy()
    wait, _, _ = _run(*state._args(), rng, _NO_GRID, _NO_OUT, math.inf, 1)
    k = int(np.flatnonzero(state.x != before)[0])
    return SimEvent(k, int(state.x[k] - before[k]), float(wait))


def advance(state: PopulationState, rng: np.random.Generator, n_events: int) -> tuple[int, float]:
    """Run up to ``n_events`` events; returns the number done and the elapsed scaled time."""
    t, done, _ = _run(*state._args(), rng, _NO_GRID, _NO_OUT, math.inf, int(n_events))
    return int(done), float(t)


def _check_grid(grid) -> np.ndarray:
    grid = np.ascontiguousarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("grid must be a nonempty 1-d sequence")
    if grid[0] < 0 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing and start at or after 0")
    return grid


def make_grid(start: float, stop: float, step: float) -> np.ndarray:
    """``start, start + step, ...`` up to ``stop`` inclusive (to rounding)."""
    if step <= 0:
        raise ValueError("grid step must be positive")
    n = int(math.floor((stop - start) / step + 1e-9))
    return start + step * np.arange(n + 1)


# -- paths ---------------------------------------------------------------------------

@dataclass
class PathRecord:
    t: np.ndarray
    S: np.ndarray
    S_check: np.ndarray
    h: np.ndarray
    dist2_P: np.ndarray
    absorbed: np.ndarray
    absorption_time: float | None = None
    snapshots: np.ndarray | None = None

    def to_csv(self, path: str | Path) -> None:
        write_csv(path, ["t", "S", "S_check", "h", "dist2_P", "absorbed"],
                  [self.t, self.S, self.S_check, self.h, self.dist2_P, self.absorbed])

    def snapshots_to_csv(self, path: str | Path) -> None:
        if self.snapshots is None:
            raise ValueError("path was recorded without snapshots")
        G, K = self.snapshots.shape
        write_csv(path, ["t", "k", "x_k"],
                  [np.repeat(self.t, K), np.tile(np.arange(K), G), self.snapshots.ravel()])


def _path_record(env, grid, snaps, absorbed_at, keep_snapshots) -> PathRecord:
    y = snaps / env.N
    S, S_check = masses(y, env)
    absorbed_time = None if math.isnan(absorbed_at) else float(absorbed_at)
    absorbed = np.zeros(grid.size, dtype=bool) if absorbed_time is None else grid >= absorbed_time
    return PathRecord(grid.copy(), S, S_check, lyapunov_h(y, env), distance2_P(y, env), absorbed,
                      absorbed_time, snaps if keep_snapshots else None)


def _run_one(env, rule, grid, rng) -> tuple[np.ndarray, float]:
    state = init_state(env, rule, rng)
    snaps = np.empty((grid.size, env.n_classes), dtype=np.int64)
    t, _, code = _run(*state._args(), rng, grid, snaps, math.inf, _NO_LIMIT)
    return snaps, float(t) if code == _STOP_ABSORBED else math.nan


def simulate_path(env: Environment, init_rule: InitRule | str, grid, rng: np.random.Generator,
                  record_snapshots: bool = False) -> PathRecord:
    grid = _check_grid(grid)
    snaps, absorbed_at = _run_one(env, init_rule, grid, rng)
    return _path_record(env, grid, snaps, absorbed_at, record_snapshots)


def run_to_absorption(env: Environment, init_rule: InitRule | str, rng: np.random.Generator,
                      t_max: float) -> tuple[str, float]:
    if not t_max > 0:
        raise ValueError("t_max must be positive")
    state = init_state(env, init_rule, rng)
    t, _, code = _run(*state._args(), rng, _NO_GRID, _NO_OUT, float(t_max), _NO_LIMIT)
    if code != _STOP_ABSORBED:
        return OUTCOMES[OUTCOME_TIMEOUT], float(t_max)
    return OUTCOMES[OUTCOME_FIXED_1 if state.X == state.env.N else OUTCOME_FIXED_0], float(t)


# -- replica ensembles -------------------------------------------------------------

def resolve_threads(threads: int | None = None) -> int:
    if threads is None:
        threads = int(os.environ.get("MORAN_THREADS", "1") or 1)
    if threads < 1:
        raise ValueError("threads must be at least 1")
    return threads


def _map(fn, items: Sequence, threads: int | None) -> list:
    threads = resolve_threads(threads)
    if threads == 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


@dataclass
class Ensemble:
    """Replica snapshots ``x`` of shape ``(replicas, grid, classes)``."""

    env: Environment
    t: np.ndarray
    seeds: np.ndarray
    snapshots: np.ndarray
    absorption_times: np.ndarray

    @property
    def y(self) -> np.ndarray:
        return self.snapshots / self.env.N

    def masses(self) -> tuple[np.ndarray, np.ndarray]:
        return masses(self.y, self.env)

    def h(self) -> np.ndarray:
        return lyapunov_h(self.y, self.env)

    def record(self, i: int, record_snapshots: bool = False) -> PathRecord:
        return _path_record(self.env, self.t, self.snapshots[i], self.absorption_times[i],
                            record_snapshots)


def simulate_ensemble(env: Environment, init_rule: InitRule | str, grid, seeds: Iterable[int],
                      threads: int | None = None) -> Ensemble:
    """One path per seed; results are in seed order whatever the thread count."""
    grid = _check_grid(grid)
    rule = parse_init_rule(init_rule) if isinstance(init_rule, str) else init_rule
    seeds = np.array([int(s) for s in seeds], dtype=np.uint64)
    out = _map(lambda s: _run_one(env, rule, grid, generator(s)), list(seeds), threads)
    snaps = np.stack([o[0] for o in out]) if out else np.empty((0, grid.size, env.n_classes), np.int64)
    times = np.array([o[1] for o in out], dtype=float)
    return Ensemble(env, grid, seeds, snaps, times)


def absorption_ensemble(env: Environment, init_rule: InitRule | str, seeds: Iterable[int],
                        t_max: float, threads: int | None = None) -> list[tuple[str, float]]:
    rule = parse_init_rule(init_rule) if isinstance(init_rule, str) else init_rule
    return _map(lambda s: run_to_absorption(env, rule, generator(s), t_max),
                [int(s) for s in seeds], threads)
