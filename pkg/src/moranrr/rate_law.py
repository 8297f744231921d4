"""Countable-support resampling-rate laws ``P = sum_k mu_k delta_{r_k}``.

Countable families (geometric and power-law weights on the rates
``r_k = k``) are truncated once the dropped tail mass falls below
``eps_trunc``; the dropped mass is carried in ``RateLaw.truncated_mass``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Mapping, Sequence

import numpy as np

PROB_TOL = 1e-12
DEFAULT_EPS_TRUNC = 1e-12
DEFAULT_MAX_ATOMS = 1_000_000


@dataclass(frozen=True)
class FamilyTag:
    name: str  # "finite", "geometric" or "power"
    param: float | None = None

    def __str__(self) -> str:
        return self.name if self.param is None else f"{self.name}({self.param:g})"


@dataclass(frozen=True)
class RateLaw:
    """A discrete law on positive rates.

    ``atoms`` is an ordered tuple of ``(rate, prob)`` pairs. The atom order
    defines the class index ``k`` used throughout the package.
    """

    atoms: tuple[tuple[float, float], ...]
    truncated_mass: float = 0.0
    family: FamilyTag | None = None
    eps_trunc: float | None = None

    def __post_init__(self):
        if not self.atoms:
            raise ValueError("a rate law needs at least one atom")
        rates = [r for r, _ in self.atoms]
        probs = [p for _, p in self.atoms]
        if any(not (r > 0 and math.isfinite(r)) for r in rates):
            raise ValueError("rates must be positive and finite")
        if len(set(rates)) != len(rates):
            raise ValueError("duplicate rate in atom list")
        if any(not (p > 0 and math.isfinite(p)) for p in probs):
            raise ValueError("probabilities must be positive")
        if not 0.0 <= self.truncated_mass < 1.0:
            raise ValueError("truncated_mass must lie in [0, 1)")
        total = math.fsum(probs) + self.truncated_mass
        if abs(total - 1.0) > PROB_TOL:
            raise ValueError(f"probabilities sum to {total!r}, expected 1 within {PROB_TOL}")

    @cached_property
    def rates(self) -> np.ndarray:
        return np.array([r for r, _ in self.atoms], dtype=float)

    @cached_property
    def probs(self) -> np.ndarray:
        return np.array([p for _, p in self.atoms], dtype=float)

    def __len__(self) -> int:
        return len(self.atoms)


@dataclass
class ConditionReport:
    satisfied: bool
    quantities: dict[str, float] = field(default_factory=dict)
    caveat: str = ""


# -- construction -----------------------------------------------------------

def make_finite_law(pairs: Sequence[tuple[float, float]]) -> RateLaw:
    atoms = tuple((float(r), float(p)) for r, p in pairs)
    return RateLaw(atoms, 0.0, FamilyTag("finite"))


def make_geometric_law(p: float, eps_trunc: float = DEFAULT_EPS_TRUNC) -> RateLaw:
    """``r_k = k``, ``mu_k = p (1-p)^(k-1)``, truncated at tail mass ``eps_trunc``."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    if not 0.0 < eps_trunc < 1.0:
        raise ValueError("eps_trunc must lie in (0, 1)")
    q = 1.0 - p
    K = max(1, math.ceil(math.log(eps_trunc) / math.log(q)))
    # log-ratio rounding can be off by one either way
    while K > 1 and q ** (K - 1) <= eps_trunc:
        K -= 1
    while q**K > eps_trunc:
        K += 1
    atoms = tuple((float(k), p * q ** (k - 1)) for k in range(1, K + 1))
    return RateLaw(atoms, q**K, FamilyTag("geometric", float(p)), float(eps_trunc))


def _zeta_tail(chi: float, K: int) -> float:
    # Euler-Maclaurin estimate of sum_{k > K} k^-chi
    return (K ** (1.0 - chi) / (chi - 1.0) - 0.5 * K**-chi
            + chi * K ** (-chi - 1.0) / 12.0
            - chi * (chi + 1.0) * (chi + 2.0) * K ** (-chi - 3.0) / 720.0)


def make_power_law(chi: float, eps_trunc: float = DEFAULT_EPS_TRUNC,
                   max_atoms: int = DEFAULT_MAX_ATOMS) -> RateLaw:
    """``r_k = k``, ``mu_k = C k^-chi``.

    The cut-off ``K`` comes from the integral bound
    ``sum_{k>K} k^-chi <= K^(1-chi)/(chi-1)``, so the dropped mass is at most
    ``eps_trunc``. The normalizer combines the partial sum with an
    Euler-Maclaurin tail estimate.
    """
    if not chi > 1.0:
        raise ValueError("chi must exceed 1 (the normalizer diverges otherwise)")
    if not 0.0 < eps_trunc < 1.0:
        raise ValueError("eps_trunc must lie in (0, 1)")
    K = max(1, math.ceil(((chi - 1.0) * eps_trunc) ** (-1.0 / (chi - 1.0))))
    if K > max_atoms:
        raise ValueError(f"power law chi={chi} needs {K} atoms for eps_trunc={eps_trunc}; "
                         f"raise eps_trunc or max_atoms")
    k = np.arange(1, K + 1, dtype=float)
    w = k**-chi
    partial = math.fsum(w)
    norm = partial + _zeta_tail(chi, K)
    probs = w / norm
    atoms = tuple((float(r), float(mu)) for r, mu in zip(k, probs))
    truncated = max(1.0 - math.fsum(probs), 0.0)
    return RateLaw(atoms, truncated, FamilyTag("power", float(chi)), float(eps_trunc))


# -- scalar functionals ------------------------------------------------------

def diffusion_constant(law: RateLaw) -> float:
    """``D`` with ``1/D = sum_k mu_k / r_k`` over the stored atoms."""
    return 1.0 / math.fsum(law.probs / law.rates)


def moment(law: RateLaw, b: float) -> float:
    """``sum_k mu_k r_k^b`` over the stored atoms."""
    if b < 0:
        raise ValueError("b must be nonnegative")
    return math.fsum(law.probs * law.rates**b)


def inverse_moment(law: RateLaw, a: float) -> float:
    """``sum_k mu_k r_k^-a`` over the stored atoms."""
    if a < 0:
        raise ValueError("a must be nonnegative")
    return math.fsum(law.probs * law.rates ** (-a))


def moment_diverges(law: RateLaw, b: float) -> bool:
    """True when the family's closed form says the untruncated moment is infinite."""
    if law.family is not None and law.family.name == "power":
        return b >= law.family.param - 1.0
    return False


def inverse_moment_diverges(law: RateLaw, a: float) -> bool:
    # every tagged family has rates >= 1, so inverse moments are bounded by 1
    return False


def _is_tagged_countable(law: RateLaw) -> bool:
    return law.family is not None and law.family.name in ("geometric", "power")


def _is_exact(law: RateLaw) -> bool:
    return law.truncated_mass == 0.0 and (law.family is None or law.family.name == "finite")


# -- tail and moment conditions ----------------------------------------------

def check_condition_I(law: RateLaw, alpha: float, beta: float) -> ConditionReport:
    if alpha <= 0 or beta <= 0:
        raise ValueError("alpha and beta must be positive")
    inv = inverse_moment(law, alpha)
    mom = moment(law, beta)
    q = {"inverse_moment_alpha": inv, "moment_beta": mom}
    if _is_exact(law):
        return ConditionReport(True, q)
    if _is_tagged_countable(law):
        ok = not (moment_diverges(law, beta) or inverse_moment_diverges(law, alpha))
        return ConditionReport(ok, q)
    # untagged truncated law: look at how fast the last terms shrink
    K = len(law)
    tail = slice(max(K - max(K // 10, 1), 0), K)
    mom_tail = float(np.sum((law.probs * law.rates**beta)[tail]))
    inv_tail = float(np.sum((law.probs * law.rates ** (-alpha))[tail]))
    q.update(moment_beta_tail_share=mom_tail / mom, inverse_moment_alpha_tail_share=inv_tail / inv)
    ok = mom_tail / mom < 1e-6 and inv_tail / inv < 1e-6
    return ConditionReport(ok, q, "heuristic: tail share of the truncated sums, not a proof")


def default_eps_grid(law: RateLaw | None = None) -> np.ndarray:
    return np.logspace(-1, -10, 91)


def check_condition_II(law: RateLaw, gamma: float, delta: float,
                       eps_grid: Sequence[float] | None = None) -> ConditionReport:
    if not (0 < gamma <= 1 and 0 < delta <= 1):
        raise ValueError("gamma and delta must lie in (0, 1]")
    eps = np.asarray(default_eps_grid(law) if eps_grid is None else eps_grid, dtype=float)
    if eps.ndim != 1 or eps.size == 0:
        raise ValueError("eps_grid must be a nonempty 1-d sequence")
    if np.any(eps <= 0) or np.any(np.diff(eps) >= 0):
        raise ValueError("eps_grid must be positive and strictly decreasing")

    mu = np.sort(law.probs)
    csum = np.concatenate([[0.0], np.cumsum(mu)])
    n_le = np.searchsorted(mu, eps, side="right")
    A = eps ** (-(1.0 - gamma)) * csum[n_le]
    B = eps**delta * (mu.size - n_le)

    # trend on the smallest decade of the grid
    last = eps <= eps[-1] * 10.0
    start = int(np.argmax(last))
    slack = 1.0 + 1e-9
    trend_ok = bool(A[-1] <= A[start] * slack + 0.0 and B[-1] <= B[start] * slack)
    finite = bool(np.all(np.isfinite(A)) and np.all(np.isfinite(B)))
    q = {"A_sup": float(A.max()), "B_sup": float(B.max()),
         "A_smallest_eps": float(A[-1]), "B_smallest_eps": float(B[-1])}

    numeric_ok = finite and trend_ok
    if law.family is not None and law.family.name == "power":
        inv_chi = 1.0 / law.family.param
        ok = gamma >= inv_chi and delta >= inv_chi
        caveat = "limsup not certified by a finite grid; verdict from the power-family closed form"
    elif law.family is not None and law.family.name == "geometric":
        ok = True
        caveat = "limsup not certified by a finite grid; verdict from the geometric-family closed form"
    else:
        ok = numeric_ok
        caveat = "heuristic: limsup estimated on a finite grid of a finite atom list"
    return ConditionReport(ok, q, caveat)


def estimate_tail_exponent(law: RateLaw) -> tuple[float, float]:
    """Least-squares fit of ``log mu_k = c - chi log k`` over the upper half of indices.

    Returns ``(chi_hat, rms_residual)``.
    """
    K = len(law)
    k = np.arange(1, K + 1, dtype=float)
    lo = K // 2
    x = np.log(k[lo:])
    y = np.log(law.probs[lo:])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return float(-slope), float(np.sqrt(np.mean(resid**2)))


def check_condition_III(law: RateLaw, residual_threshold: float = 1e-3) -> ConditionReport:
    if len(law) < 10:
        return ConditionReport(False, {"n_atoms": float(len(law))}, "too few atoms")
    chi_hat, resid = estimate_tail_exponent(law)
    ok = resid < residual_threshold and chi_hat > 1.0
    caveat = "" if _is_tagged_countable(law) else "heuristic: tail exponent fitted on a finite atom list"
    return ConditionReport(ok, {"chi_hat": chi_hat, "rms_residual": resid}, caveat)


def check_corollary_a(alpha: float, beta: float, gamma: float, delta: float) -> bool:
    return 2.0 * max(gamma, delta) + 1.0 / beta < 1.0 - 3.0 / alpha


def check_corollary_b(alpha: float, beta: float, chi: float) -> bool:
    return 1.0 / (chi - 1.0) + 1.0 / beta < 1.0 - 3.0 / alpha


# -- sampling ----------------------------------------------------------------

def _cdf(law: RateLaw) -> np.ndarray:
    cdf = np.cumsum(law.probs) / (1.0 - law.truncated_mass)
    cdf[-1] = 1.0
    return cdf


def sample_indices(law: RateLaw, size: int, rng: np.random.Generator) -> np.ndarray:
    """Atom indices drawn by inverse CDF; probabilities renormalized over the stored atoms."""
    u = rng.random(size)
    idx = np.searchsorted(_cdf(law), u, side="right")
    return np.minimum(idx, len(law) - 1)


def sample_rate(law: RateLaw, rng: np.random.Generator) -> float:
    return float(law.rates[sample_indices(law, 1, rng)[0]])


# -- text documents ----------------------------------------------------------

def law_to_document(law: RateLaw) -> dict[str, Any]:
    fam = law.family
    if fam is None or fam.name == "finite":
        if law.truncated_mass != 0.0:
            raise ValueError("only finite, geometric and power laws have a document form")
        return {"family": "finite", "atoms": [[r, p] for r, p in law.atoms]}
    doc: dict[str, Any] = {"family": fam.name}
    doc["p" if fam.name == "geometric" else "chi"] = fam.param
    doc["eps_trunc"] = law.eps_trunc
    return doc


def law_from_document(doc: Mapping[str, Any]) -> RateLaw:
    family = doc.get("family")
    if family == "finite":
        atoms = doc.get("atoms")
        if not isinstance(atoms, list) or not all(isinstance(a, list) and len(a) == 2 for a in atoms):
            raise ValueError("finite law needs atoms = [[rate, prob], ...]")
        return make_finite_law([(float(r), float(p)) for r, p in atoms])
    eps = float(doc.get("eps_trunc", DEFAULT_EPS_TRUNC))
    if family == "geometric":
        return make_geometric_law(float(doc["p"]), eps)
    if family == "power":
        return make_power_law(float(doc["chi"]), eps)
    raise ValueError(f"unknown law family {family!r}")
