"""Geometry of the class-coordinate state ``y_k = x_k / N`` and convergence diagnostics.

All functions broadcast over leading axes: ``y`` may be a single state of
shape ``(K,)`` or a stack such as ``(replicas, grid, K)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.integrate import trapezoid

from .csvio import write_csv
from .disorder import Environment
from .rate_law import RateLaw

Y_TOL = 1e-12


def as_y(y, env: Environment) -> np.ndarray:
    """Validate a state (array or ``PopulationState``) and return it as class fractions."""
    if hasattr(y, "x"):
        return np.asarray(y.x, dtype=float) / env.N
    y = np.asarray(y, dtype=float)
    if y.shape[-1:] != (env.n_classes,):
        raise ValueError(f"state has {y.shape[-1:]} coordinates, environment has {env.n_classes} classes")
    n = env.fractions
    if np.any(y < -Y_TOL) or np.any(y > n + Y_TOL):
        raise ValueError("state outside Q: need 0 <= y_k <= n_k")
    return y


def masses(y, env: Environment) -> tuple[np.ndarray, np.ndarray]:
    """Total type-1 mass ``S`` and the rate-weighted mass ``S_check = D_N sum y_k / r_k``."""
    y = as_y(y, env)
    return y.sum(axis=-1), env.D_N * (y / env.rates).sum(axis=-1)


def project_P(y, env: Environment) -> np.ndarray:
    y = as_y(y, env)
    return y.sum(axis=-1)[..., None] * env.fractions


def project_Pcheck(y, env: Environment) -> np.ndarray:
    y = as_y(y, env)
    return (env.D_N * (y / env.rates).sum(axis=-1))[..., None] * env.fractions


def delta(y, env: Environment) -> np.ndarray:
    """``Delta_k = y_k - n_k sum_l y_l``, the offset from the line through ``n``."""
    y = as_y(y, env)
    return y - y.sum(axis=-1)[..., None] * env.fractions


def lyapunov_h(y, env: Environment) -> np.ndarray:
    """``h(y) = sum_k Delta_k^2 / n_k``."""
    d = delta(y, env)
    return (d * d / env.fractions).sum(axis=-1)


def distance2_P(y, env: Environment) -> np.ndarray:
    """``||y - P y||_2^2``."""
    d = delta(y, env)
    return (d * d).sum(axis=-1)


def lyapunov_bound(env: Environment, g0: float, t) -> np.ndarray | float:
    """Upper bound on ``E h(Y(t))`` started from ``h(Y(0)) = g0``."""
    if not 0.0 <= g0 <= 1.0 + Y_TOL:
        raise ValueError("g0 must lie in [0, 1]")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be nonnegative")
    rate = env.N * env.m_minus
    floor = env.sigma / rate
    out = floor + (g0 - floor) * np.exp(-2.0 * rate * t)
    return float(out) if out.ndim == 0 else out


def law_mismatch_norm(env: Environment, law: RateLaw) -> float:
    """``||n - mu||_2`` on the union of the environment's classes and the law's atoms."""
    mu = dict(zip(law.rates.tolist(), law.probs.tolist()))
    sq = []
    for r, n in zip(env.rates.tolist(), env.fractions.tolist()):
        sq.append((n - mu.pop(r, 0.0)) ** 2)
    sq.extend(m * m for m in mu.values())
    return math.sqrt(math.fsum(sq))


@dataclass
class TriangleTerms:
    term1: np.ndarray
    term2: np.ndarray
    term3: np.ndarray
    term4: np.ndarray | None = None


def triangle_terms(y, env: Environment, law: RateLaw, s_ref=None) -> TriangleTerms:
    """The four distances bounding ``||Y - s P||_2``; ``term4`` needs a reference mass ``s_ref``."""
    y = as_y(y, env)
    S, S_check = masses(y, env)
    term1 = np.sqrt(distance2_P(y, env))
    term2 = np.abs(S - S_check) * float(np.linalg.norm(env.fractions))
    term3 = S_check * law_mismatch_norm(env, law)
    term4 = None
    if s_ref is not None:
        term4 = np.abs(S_check - np.asarray(s_ref, dtype=float)) * float(np.linalg.norm(law.probs))
    return TriangleTerms(term1, term2, term3, term4)


@dataclass
class TriangleReport:
    t: np.ndarray
    term1: np.ndarray
    term2: np.ndarray
    term3: np.ndarray
    term4: np.ndarray | None = None

    def to_csv(self, path: str | Path) -> None:
        header = ["t", "term1", "term2", "term3"] + (["term4"] if self.term4 is not None else [])
        cols = [self.t, self.term1, self.term2, self.term3] + (
            [self.term4] if self.term4 is not None else [])
        write_csv(path, header, cols)


def triangle_report(t, y, env: Environment, law: RateLaw, s_ref=None) -> TriangleReport:
    """Triangle terms along one path; ``y`` has shape ``(len(t), K)``."""
    terms = triangle_terms(y, env, law, s_ref)
    return TriangleReport(np.asarray(t, dtype=float), terms.term1, terms.term2, terms.term3, terms.term4)


def mz_integral(series, t, a: float, b: float) -> float:
    """Replica average of the trapezoid rule for ``int_a^b d(t) e^-t dt``.

    ``series`` holds one distance series per row on the common grid ``t``;
    endpoints off the grid are linearly interpolated.
    """
    t = np.asarray(t, dtype=float)
    d = np.atleast_2d(np.asarray(series, dtype=float))
    if d.shape[-1] != t.size:
        raise ValueError("series and grid lengths differ")
    if not 0.0 <= a < b:
        raise ValueError("need 0 <= a < b")
    if t.size < 2 or t[0] > a or t[-1] < b:
        raise ValueError(f"grid [{t[0] if t.size else 'empty'}, ...] does not cover [{a}, {b}]")
    inside = (t > a) & (t < b)
    tt = np.concatenate([[a], t[inside], [b]])
    rows = np.array([np.interp(tt, t, row) for row in d])
    return float(np.mean(trapezoid(rows * np.exp(-tt), tt, axis=-1)))
