"""Experiment configs, replica orchestration and result files.

A config is a ``key = value`` document (see :mod:`moranrr.kvdoc`). Keys:

    kind        simulate | collapse | compare-fw | fixation | assumption-check
                | diagnose-law | probe-variance
    law.*       rate-law document (family, atoms, p, chi, eps_trunc)
    N           list of population sizes
    replicas    replicas per population size
    init        initial rule, e.g. fractions:0.5, classes:[0], uniform:0.3
    grid        [start, stop, step] in scaled time
    seed        master seed (64-bit unsigned)
    out         output directory
    tol.*       pass/fail tolerances
    param.*     kind-specific parameters

Replica ``i`` runs on ``PCG64(mix64(seed, i))``; every output is a function of
the config alone, so thread count and scheduling never change a byte.
"""
from __future__ import annotations

import copy
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import kvdoc
from .csvio import write_csv
from .disorder import (Environment, draw_environment, expected_distinct, key_ratio,
                       save_environment)
from .engine import (absorption_ensemble, init_state, make_grid, parse_init_rule,
                     simulate_ensemble)
from .fw_reference import (DiffusionSpec, fair_environment, heterozygosity_slope,
                           ks_two_sample, moments_fw, simulate_fw_ensemble)
from .observables import (lyapunov_bound, lyapunov_h, masses, mz_integral,
                          triangle_terms)
from .rate_law import (RateLaw, check_condition_I, check_condition_II, check_condition_III,
                       check_corollary_a, check_corollary_b, diffusion_constant,
                       estimate_tail_exponent, law_from_document)
from .seeding import MASK64, SALT_ENVIRONMENT, SALT_REFERENCE, generator, mix64, stream_seeds

log = logging.getLogger(__name__)

KINDS = ("simulate", "collapse", "compare-fw", "fixation", "assumption-check",
         "diagnose-law", "probe-variance")

TWO_CLASS = {"family": "finite", "atoms": [[1.0, 0.5], [4.0, 0.5]]}

DEFAULTS: dict[str, dict[str, Any]] = {
    "simulate": dict(law=TWO_CLASS, N=[500], replicas=400, init="fractions:0.5",
                     grid=[0.0, 1.0, 0.1],
                     tol={"martingale_z": 3.0, "slope_rel": 0.15},
                     param={"slope_t_min": 0.2, "slope_t_max": 1.0, "save_paths": 1}),
    "collapse": dict(law=TWO_CLASS, N=[250, 500, 1000, 2000], replicas=2000, init="classes:[0]",
                     grid=[0.0, 1.0, 0.01],
                     tol={"bound_factor": 1.5, "mz_ratio": 0.8},
                     param={"bound_t_min": 0.05, "bound_min_N": 500, "mz_a": 0.1, "mz_b": 1.0}),
    "compare-fw": dict(law=TWO_CLASS, N=[1000], replicas=800, init="fractions:0.5",
                       grid=[0.0, 0.5, 0.05],
                       tol={"ks": 0.10},
                       param={"t_compare": 0.5, "fw_samples": 2000, "dt": 1e-3}),
    "fixation": dict(law={"family": "finite", "atoms": [[1.0, 1.0]]}, N=[200], replicas=1000,
                     init="fractions:0.3", grid=[0.0, 1.0, 0.1],
                     tol={"fixation_abs": 0.045},
                     param={"t_max": 1e6}),
    "assumption-check": dict(law={"family": "geometric", "p": 0.5, "eps_trunc": 1e-12}, N=[2],
                             replicas=1, init="fractions:0.5", grid=[0.0, 1.0, 0.1],
                             tol={},
                             param={"alpha": 100.0, "beta": 100.0, "gamma": 0.1, "delta": 0.1}),
    "diagnose-law": dict(law={"family": "geometric", "p": 0.5, "eps_trunc": 1e-12}, N=[100000],
                         replicas=20, init="fractions:0.5", grid=[0.0, 1.0, 0.1],
                         tol={"D_abs": 0.05},
                         param={}),
    "probe-variance": dict(law=TWO_CLASS, N=[1000], replicas=2000, init="fractions:0.5",
                           grid=[0.0, 1.0, 0.1],
                           tol={"probe_rel": 0.2},
                           param={"t_small": 0.02}),
}


class ConfigError(ValueError):
    """Raised for configs that cannot be run."""


@dataclass
class ExperimentConfig:
    kind: str
    law: dict[str, Any]
    N: list[int]
    replicas: int
    init: str
    grid: list[float]
    seed: int = 0
    out: str = "results"
    tol: dict[str, float] = field(default_factory=dict)
    param: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise ConfigError(f"unknown kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        if not isinstance(self.N, list) or not self.N:
            raise ConfigError("N must be a nonempty list")
        if any(not isinstance(n, int) or isinstance(n, bool) or n < 2 for n in self.N):
            raise ConfigError("every N must be an integer >= 2")
        if not isinstance(self.replicas, int) or self.replicas < 1:
            raise ConfigError("replicas must be an integer >= 1")
        if not isinstance(self.seed, int) or not 0 <= self.seed <= MASK64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if len(self.grid) != 3 or not all(isinstance(v, (int, float)) for v in self.grid):
            raise ConfigError("grid must be [start, stop, step]")
        start, stop, step = (float(v) for v in self.grid)
        if not step > 0:
            raise ConfigError("grid step must be positive")
        if start < 0 or stop < start:
            raise ConfigError("grid needs 0 <= start <= stop")
        try:
            self.rate_law()
            parse_init_rule(self.init)
        except (ValueError, KeyError, TypeError) as exc:
            raise ConfigError(str(exc)) from exc

    def rate_law(self) -> RateLaw:
        return law_from_document(self.law)

    def grid_times(self) -> np.ndarray:
        return make_grid(*(float(v) for v in self.grid))

    def tolerance(self, name: str) -> float:
        return float(self.tol.get(name, DEFAULTS[self.kind]["tol"][name]))

    def parameter(self, name: str, default: Any = None) -> Any:
        if name in self.param:
            return self.param[name]
        return DEFAULTS[self.kind]["param"].get(name, default)

    def to_document(self) -> dict[str, Any]:
        doc: dict[str, Any] = {"kind": self.kind}
        for k, v in self.law.items():
            doc[f"law.{k}"] = v
        doc.update(N=self.N, replicas=self.replicas, init=self.init, grid=self.grid,
                   seed=self.seed, out=self.out)
        for k, v in self.tol.items():
            doc[f"tol.{k}"] = v
        for k, v in self.param.items():
            doc[f"param.{k}"] = v
        return doc

    def dumps(self) -> str:
        return kvdoc.dumps(self.to_document())


def default_config(kind: str, **overrides) -> ExperimentConfig:
    if kind not in DEFAULTS:
        raise ConfigError(f"unknown kind {kind!r}")
    base = copy.deepcopy(DEFAULTS[kind])
    base.update(overrides)
    return ExperimentConfig(kind=kind, **base)


def config_from_document(doc: dict[str, Any], kind: str | None = None) -> ExperimentConfig:
    """Build a config; keys absent from ``doc`` take the defaults of its kind."""
    doc = dict(doc)
    kind = doc.pop("kind", kind)
    if kind not in DEFAULTS:
        raise ConfigError(f"unknown kind {kind!r}")
    fields: dict[str, Any] = {"seed": 0, "out": "results", **copy.deepcopy(DEFAULTS[kind])}
    law: dict[str, Any] = {}
    tol: dict[str, Any] = {}
    param: dict[str, Any] = {}
    for key, value in doc.items():
        group, dot, name = key.partition(".")
        if dot and group in ("law", "tol", "param") and name:
            {"law": law, "tol": tol, "param": param}[group][name] = value
        elif key in ("N", "replicas", "init", "grid", "seed", "out"):
            fields[key] = value
        else:
            raise ConfigError(f"unknown config key {key!r}")
    if law:
        fields["law"] = law
    fields["tol"] = {**fields["tol"], **tol}
    fields["param"] = {**fields["param"], **param}
    if isinstance(fields["N"], int):
        fields["N"] = [fields["N"]]
    if not isinstance(fields["init"], str):
        raise ConfigError("init must be a rule string such as fractions:0.5")
    if not isinstance(fields["out"], str):
        fields["out"] = str(fields["out"])
    for name in ("law", "tol", "param"):
        if not isinstance(fields[name], dict):
            raise ConfigError(f"{name} must be given as {name}.<key> entries")
    try:
        return ExperimentConfig(kind=kind, **fields)
    except (TypeError, AttributeError) as exc:
        raise ConfigError(str(exc)) from exc


def config_loads(text: str, kind: str | None = None) -> ExperimentConfig:
    try:
        doc = kvdoc.loads(text)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return config_from_document(doc, kind)


def load_config(path: str | Path, kind: str | None = None) -> ExperimentConfig:
    return config_loads(Path(path).read_text(), kind)


# -- running -------------------------------------------------------------------------

@dataclass
class ExperimentResult:
    summary: dict[str, Any]
    passed: bool
    files: list[Path]


class _Run:
    def __init__(self, config: ExperimentConfig, threads: int | None):
        self.cfg = config
        self.threads = threads
        self.out = Path(config.out)
        self.summary: dict[str, Any] = {"kind": config.kind, "seed": config.seed}
        self.checks: dict[str, bool] = {}
        self.files: list[Path] = []

    def path(self, name: str) -> Path:
        p = self.out / name
        self.files.append(p)
        return p

    def check(self, name: str, ok: bool) -> None:
        self.checks[name] = bool(ok)
        self.summary[f"pass.{name}"] = bool(ok)

    def environment(self, law: RateLaw, N: int, index: int) -> Environment:
        mode = self.cfg.parameter("environment", "fair" if law.family.name == "finite" else "draw")
        if mode == "fair":
            env = fair_environment(law, N)
        elif mode == "draw":
            env = draw_environment(law, N, generator(mix64(self.cfg.seed ^ SALT_ENVIRONMENT, index)))
        else:
            raise ConfigError(f"param.environment must be fair or draw, got {mode!r}")
        save_environment(env, self.path(f"environment_N{N}.txt"))
        return env

    def replica_seeds(self) -> list[int]:
        return stream_seeds(self.cfg.seed, self.cfg.replicas)


def _initial_masses(env: Environment, init: str, seeds) -> tuple[np.ndarray, np.ndarray]:
    rule = parse_init_rule(init)
    x0 = np.stack([init_state(env, rule, generator(s)).x for s in seeds])
    return masses(x0 / env.N, env)


def _se(a: np.ndarray, axis: int = 0) -> np.ndarray:
    n = a.shape[axis]
    if n < 2:
        return np.full(np.delete(a.shape, axis), np.nan)
    return a.std(axis=axis, ddof=1) / math.sqrt(n)


def _run_simulate(run: _Run) -> None:
    cfg = run.cfg
    law = cfg.rate_law()
    grid = cfg.grid_times()
    z_max = cfg.tolerance("martingale_z")
    slope_rel = cfg.tolerance("slope_rel")
    t_lo, t_hi = float(cfg.parameter("slope_t_min")), float(cfg.parameter("slope_t_max"))
    for i, N in enumerate(cfg.N):
        env = run.environment(law, N, i)
        ens = simulate_ensemble(env, cfg.init, grid, run.replica_seeds(), run.threads)
        S, S_check = ens.masses()
        h = ens.h()
        S0, S_check0 = _initial_masses(env, cfg.init, ens.seeds)
        se_S, se_Sc = _se(S), _se(S_check)
        write_csv(run.path(f"means_N{N}.csv"),
                  ["t", "mean_S", "se_S", "mean_S_check", "se_S_check", "mean_h"],
                  [grid, S.mean(0), se_S, S_check.mean(0), se_Sc, h.mean(0)])
        for r in range(min(int(cfg.parameter("save_paths", 0)), cfg.replicas)):
            rec = ens.record(r)
            rec.to_csv(run.path(f"paths_N{N}_replica{r}.csv"))
            tri = triangle_terms(ens.y[r], env, law)
            write_csv(run.path(f"triangle_N{N}_replica{r}.csv"), ["t", "term1", "term2", "term3"],
                      [grid, tri.term1, tri.term2, tri.term3 * np.ones_like(grid)])

        def zscore(values, se, ref):
            dev = np.abs(values.mean(0) - ref)
            with np.errstate(divide="ignore", invalid="ignore"):
                z = np.where(se > 0, dev / np.where(se > 0, se, 1.0), np.where(dev > 1e-12, np.inf, 0.0))
            return float(z.max())

        z_S = zscore(S, se_S, S0.mean())
        z_Sc = zscore(S_check, se_Sc, S_check0.mean())
        key = f"N{N}"
        run.summary[f"{key}.D_N"] = env.D_N
        run.summary[f"{key}.max_z_S"] = z_S
        run.summary[f"{key}.max_z_S_check"] = z_Sc
        run.check(f"{key}.martingale_S_check", z_Sc <= z_max)
        if np.allclose(S0, S_check0, atol=1e-12):
            # the plain mass is also driftless in mean when started on the line s*n
            run.check(f"{key}.martingale_S", z_S <= z_max)
        try:
            slope = heterozygosity_slope(grid, S, t_lo, t_hi)
        except ValueError as exc:
            log.warning("N=%d: no heterozygosity slope: %s", N, exc)
            slope = math.nan
        target = -2.0 * env.D_N
        run.summary[f"{key}.het_slope"] = slope
        run.summary[f"{key}.het_slope_target"] = target
        run.check(f"{key}.het_slope", abs(slope - target) <= slope_rel * abs(target))


def _run_collapse(run: _Run) -> None:
    cfg = run.cfg
    law = cfg.rate_law()
    grid = cfg.grid_times()
    factor = cfg.tolerance("bound_factor")
    ratio_max = cfg.tolerance("mz_ratio")
    t_min = float(cfg.parameter("bound_t_min"))
    min_N = int(cfg.parameter("bound_min_N"))
    a, b = float(cfg.parameter("mz_a")), float(cfg.parameter("mz_b"))
    mz_values = []
    for i, N in enumerate(cfg.N):
        env = run.environment(law, N, i)
        ens = simulate_ensemble(env, cfg.init, grid, run.replica_seeds(), run.threads)
        y = ens.y
        h = lyapunov_h(y, env)
        rule = parse_init_rule(cfg.init)
        g0 = float(np.mean([lyapunov_h(init_state(env, rule, generator(seed)).x / N, env)
                            for seed in ens.seeds]))
        g0 = min(g0, 1.0)
        bound = lyapunov_bound(env, g0, grid)
        tri = triangle_terms(y, env, law)
        term3 = np.broadcast_to(tri.term3, tri.term1.shape)
        write_csv(run.path(f"collapse_N{N}.csv"),
                  ["t", "mean_h", "se_h", "bound", "term1", "term2", "term3"],
                  [grid, h.mean(0), _se(h), bound, tri.term1.mean(0), tri.term2.mean(0), term3.mean(0)])
        write_csv(run.path(f"triangle_N{N}.csv"), ["t", "term1", "term2", "term3"],
                  [grid, tri.term1.mean(0), tri.term2.mean(0), term3.mean(0)])
        key = f"N{N}"
        late = grid >= t_min - 1e-12
        worst = float(np.max(h.mean(0)[late] / bound[late])) if late.any() else math.nan
        run.summary[f"{key}.g0"] = g0
        run.summary[f"{key}.max_h_over_bound"] = worst
        if N >= min_N:
            run.check(f"{key}.lyapunov_bound", worst <= factor)
        mz = mz_integral(tri.term1, grid, a, b)
        run.summary[f"{key}.mz_term1"] = mz
        run.summary[f"{key}.mz_term2"] = mz_integral(tri.term2, grid, a, b)
        mz_values.append(mz)
    for (n0, m0), (n1, m1) in zip(zip(cfg.N, mz_values), zip(cfg.N[1:], mz_values[1:])):
        run.summary[f"mz_ratio.N{n1}_over_N{n0}"] = m1 / m0
        run.check(f"mz_ratio.N{n1}_over_N{n0}", m1 <= ratio_max * m0)


def _run_compare_fw(run: _Run) -> None:
    cfg = run.cfg
    law = cfg.rate_law()
    grid = cfg.grid_times()
    t_cmp = float(cfg.parameter("t_compare"))
    idx = np.flatnonzero(np.isclose(grid, t_cmp, rtol=0, atol=1e-9))
    if idx.size == 0:
        raise ConfigError(f"param.t_compare = {t_cmp} is not on the grid")
    g_cmp = int(idx[0])
    D = float(cfg.parameter("D", diffusion_constant(law)))
    n_fw = int(cfg.parameter("fw_samples"))
    dt = float(cfg.parameter("dt"))
    for i, N in enumerate(cfg.N):
        env = run.environment(law, N, i)
        ens = simulate_ensemble(env, cfg.init, grid, run.replica_seeds(), run.threads)
        S, _ = ens.masses()
        _, S_check0 = _initial_masses(env, cfg.init, ens.seeds)
        s0 = float(np.clip(S_check0.mean(), 0.0, 1.0))
        spec = DiffusionSpec(D, s0, dt)
        fw = simulate_fw_ensemble(spec, grid, stream_seeds(cfg.seed ^ SALT_REFERENCE, n_fw))
        exact = np.array([moments_fw(spec, t) for t in grid])
        ks = np.array([ks_two_sample(S[:, g], fw[:, g]) for g in range(grid.size)])
        write_csv(run.path(f"moments_N{N}.csv"),
                  ["t", "mean_S", "var_S", "het_S", "mean_fw", "var_fw", "het_fw",
                   "exact_mean", "exact_var", "exact_het", "ks"],
                  [grid, S.mean(0), S.var(0, ddof=1) if S.shape[0] > 1 else np.zeros(grid.size),
                   (S * (1 - S)).mean(0), fw.mean(0),
                   fw.var(0, ddof=1) if n_fw > 1 else np.zeros(grid.size), (fw * (1 - fw)).mean(0),
                   exact[:, 0], exact[:, 1], exact[:, 2], ks])
        key = f"N{N}"
        run.summary[f"{key}.D"] = D
        run.summary[f"{key}.D_N"] = env.D_N
        run.summary[f"{key}.s0"] = s0
        run.summary[f"{key}.ks"] = float(ks[g_cmp])
        run.check(f"{key}.ks", ks[g_cmp] <= cfg.tolerance("ks"))


def _run_fixation(run: _Run) -> None:
    cfg = run.cfg
    law = cfg.rate_law()
    t_max = float(cfg.parameter("t_max"))
    tol = cfg.tolerance("fixation_abs")
    rows_N, rows_r, rows_o, rows_t = [], [], [], []
    for i, N in enumerate(cfg.N):
        env = run.environment(law, N, i)
        seeds = run.replica_seeds()
        outcomes = absorption_ensemble(env, cfg.init, seeds, t_max, run.threads)
        _, S_check0 = _initial_masses(env, cfg.init, seeds)
        codes = {"fixed_0": 0, "fixed_1": 1, "timeout": 2}
        for r, (o, t) in enumerate(outcomes):
            rows_N.append(N)
            rows_r.append(r)
            rows_o.append(codes[o])
            rows_t.append(t)
        fixed1 = np.array([o == "fixed_1" for o, _ in outcomes], dtype=float)
        frac = float(fixed1.mean())
        expected = float(S_check0.mean())
        key = f"N{N}"
        run.summary[f"{key}.fixation_fraction"] = frac
        run.summary[f"{key}.fixation_se"] = math.sqrt(max(frac * (1 - frac), 0.0) / len(outcomes))
        run.summary[f"{key}.fixation_expected"] = expected
        run.summary[f"{key}.timeouts"] = sum(o == "timeout" for o, _ in outcomes)
        run.check(f"{key}.fixation", abs(frac - expected) <= tol)
    write_csv(run.path("fixation.csv"), ["N", "replica", "outcome", "time"],
              [np.array(rows_N, dtype=np.int64), np.array(rows_r, dtype=np.int64),
               np.array(rows_o, dtype=np.int64), np.array(rows_t, dtype=float)])


def _run_assumption_check(run: _Run) -> None:
    cfg = run.cfg
    law = cfg.rate_law()
    alpha, beta = float(cfg.parameter("alpha")), float(cfg.parameter("beta"))
    gamma, delta = float(cfg.parameter("gamma")), float(cfg.parameter("delta"))
    c1 = check_condition_I(law, alpha, beta)
    c2 = check_condition_II(law, gamma, delta)
    c3 = check_condition_III(law)
    s = run.summary
    s["law.family"] = law.family.name
    for name, rep in (("condition_I", c1), ("condition_II", c2), ("condition_III", c3)):
        s[f"{name}.satisfied"] = rep.satisfied
        for q, v in rep.quantities.items():
            s[f"{name}.{q}"] = v
        s[f"{name}.caveat"] = rep.caveat or "none"
    if law.family.name == "power":
        chi = float(law.family.param)
    elif len(law) >= 10:
        chi = estimate_tail_exponent(law)[0]
    else:
        chi = math.nan
    a_ineq = check_corollary_a(alpha, beta, gamma, delta)
    b_ineq = bool(chi > 1 and check_corollary_b(alpha, beta, chi))
    s["corollary_a.inequality"] = a_ineq
    s["corollary_a.satisfied"] = bool(a_ineq and c1.satisfied and c2.satisfied)
    s["corollary_b.chi"] = chi
    s["corollary_b.inequality"] = b_ineq
    s["corollary_b.satisfied"] = bool(b_ineq and c1.satisfied and c3.satisfied)
    run.check("assumption", s["corollary_a.satisfied"] or s["corollary_b.satisfied"])


def _run_diagnose_law(run: _Run) -> None:
    cfg = run.cfg
    law = cfg.rate_law()
    D = diffusion_constant(law)
    tol = cfg.tolerance("D_abs")
    write_csv(run.path("atoms.csv"), ["k", "rate", "prob"],
              [np.arange(len(law)), law.rates, law.probs])
    run.summary["D"] = D
    run.summary["truncated_mass"] = law.truncated_mass
    rows = {"N": [], "replica": [], "D_N": [], "key_ratio": [], "classes": []}
    for N in cfg.N:
        errs = []
        for r in range(cfg.replicas):
            env = draw_environment(law, N, generator(mix64(cfg.seed ^ SALT_ENVIRONMENT, r)))
            rows["N"].append(N)
            rows["replica"].append(r)
            rows["D_N"].append(env.D_N)
            rows["key_ratio"].append(key_ratio(env))
            rows["classes"].append(env.n_classes)
            errs.append(abs(env.D_N - D))
        distinct, _ = expected_distinct(law, N)
        key = f"N{N}"
        run.summary[f"{key}.max_abs_D_error"] = max(errs)
        run.summary[f"{key}.expected_distinct"] = distinct
        run.summary[f"{key}.mean_distinct"] = float(np.mean(rows["classes"][-cfg.replicas:]))
        run.check(f"{key}.D", max(errs) < tol)
    write_csv(run.path("environments.csv"), ["N", "replica", "D_N", "key_ratio", "classes"],
              [np.array(rows["N"], dtype=np.int64), np.array(rows["replica"], dtype=np.int64),
               np.array(rows["D_N"]), np.array(rows["key_ratio"]),
               np.array(rows["classes"], dtype=np.int64)])


def _run_probe_variance(run: _Run) -> None:
    cfg = run.cfg
    law = cfg.rate_law()
    t_small = float(cfg.parameter("t_small"))
    if not 0 < t_small <= 0.05:
        raise ConfigError("param.t_small must lie in (0, 0.05]")
    tol = cfg.tolerance("probe_rel")
    Ns, slopes, preds = [], [], []
    for i, N in enumerate(cfg.N):
        env = run.environment(law, N, i)
        ens = simulate_ensemble(env, cfg.init, [t_small], run.replica_seeds(), run.threads)
        S, _ = ens.masses()
        S0, _ = _initial_masses(env, cfg.init, ens.seeds)
        slope = float(S[:, 0].var(ddof=1) / t_small) if cfg.replicas > 1 else math.nan
        s0 = float(S0.mean())
        pred = 2.0 * env.D_N * s0 * (1.0 - s0)
        Ns.append(N)
        slopes.append(slope)
        preds.append(pred)
        key = f"N{N}"
        run.summary[f"{key}.slope"] = slope
        run.summary[f"{key}.predicted"] = pred
        run.check(f"{key}.probe", abs(slope - pred) <= tol * pred)
    write_csv(run.path("probe.csv"), ["N", "slope", "predicted"],
              [np.array(Ns, dtype=np.int64), np.array(slopes), np.array(preds)])


_RUNNERS = {
    "simulate": _run_simulate,
    "collapse": _run_collapse,
    "compare-fw": _run_compare_fw,
    "fixation": _run_fixation,
    "assumption-check": _run_assumption_check,
    "diagnose-law": _run_diagnose_law,
    "probe-variance": _run_probe_variance,
}


def run_experiment(config: ExperimentConfig, threads: int | None = None) -> ExperimentResult:
    """Run ``config`` and write ``config.txt``, the kind's CSVs and ``summary.txt`` into ``config.out``."""
    config.validate()
    run = _Run(config, threads)
    run.out.mkdir(parents=True, exist_ok=True)
    run.path("config.txt").write_text(config.dumps())
    log.info("running %s into %s", config.kind, run.out)
    _RUNNERS[config.kind](run)
    passed = all(run.checks.values())
    run.summary["pass"] = passed
    kvdoc.dump(run.summary, run.path("summary.txt"))
    return ExperimentResult(run.summary, passed, run.files)
