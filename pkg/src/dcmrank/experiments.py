"""Monte Carlo experiments: PageRank tables, coupling-break decay, CDF comparison.

Replication ``r`` at graph size ``n`` always draws from the stream
``derive(master_seed, "replication", n, r)``. Rows of one k- or c-sweep share
their graphs (common random numbers).
Within a replication a single exploration to the largest k of the sweep yields
the coupled tree for every smaller k by truncation.
"""
from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
from scipy.stats import binomtest

from .degree_model import Algorithm1Config, DegreeParams, calibrate_lambda2, run_algorithm1
from .errors import ConfigError, DimensionMismatch, ModelError
from .graph import build_dcm, explore_and_couple
from .pagerank import PageRankConfig, power_iterate_converged, power_iterate_k, power_iterates
from .rng import derive
from .tbt import tree_pagerank


@dataclass
class ExperimentConfig:
    alpha: float = 2.0
    beta: float = 2.5
    lambda1: float = 1.0
    lambda2: float | None = None
    delta0: float = 0.1
    max_resamples: int = 1000
    c: float = 0.5
    r0: float = 1.0
    eps0: float = 1e-6
    sizes: list = field(default_factory=lambda: [10, 100, 1000, 10000])
    k: int | None = None  # fixed iteration count; None -> floor(h * log n)
    h: float = 1.0
    k_values: list | None = None  # k sweep
    c_values: list | None = None  # damping-factor sweep
    replications: int = 100
    master_seed: int = 0
    tbt_root_samples: int = 1000
    min_out: int = 0
    threads: int = 1

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        if not self.sizes or any(int(n) < 1 for n in self.sizes):
            raise ConfigError("sizes must be a nonempty list of positive integers")
        for c in self.c_values or [self.c]:
            if not 0 < c < 1:
                raise ConfigError(f"c must lie in (0, 1), got {c}")
        if self.k is not None and self.k < 0:
            raise ConfigError("k must be nonnegative")
        if self.k_values is not None and (not self.k_values or min(self.k_values) < 0):
            raise ConfigError("k_values must be nonnegative")
        if self.tbt_root_samples < 1:
            raise ConfigError("tbt_root_samples must be >= 1")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")

    def degree_params(self) -> DegreeParams:
        p = DegreeParams(self.alpha, self.beta, self.lambda1, self.lambda2)
        if p.lambda2 is None:
            calibrate_lambda2(p, min_out=self.min_out)
            self.lambda2 = p.lambda2
        return p

    def algorithm1(self, params: DegreeParams) -> Algorithm1Config:
        return Algorithm1Config.for_params(params, self.delta0, self.max_resamples)

    def ks_for(self, n: int) -> list:
        if self.k_values is not None:
            return [int(k) for k in self.k_values]
        if self.k is not None:
            return [int(self.k)]
        return [int(math.floor(self.h * math.log(n)))]

    def cs(self) -> list:
        return [float(c) for c in (self.c_values or [self.c])]

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def field_names(cls) -> list:
        return [f.name for f in fields(cls)]


PRESETS = {
    "table1": dict(sizes=[10, 100, 1000, 10000], h=1.0, replications=100),
    "table2": dict(sizes=[10000], k_values=[2, 4, 6, 8, 10, 15], replications=100),
    "table3": dict(sizes=[10000], k=9, c_values=[0.1, 0.3, 0.5, 0.7, 0.9], replications=100),
    "coupling": dict(sizes=[1000, 10000, 100000], h=None, replications=500),
    "cdf": dict(sizes=[100], k=4, tbt_root_samples=1000, replications=1),
}


def preset(name: str, **overrides) -> ExperimentConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    kw = {**PRESETS[name], **overrides}
    if name == "coupling" and kw.get("h") is None:
        kw["h"] = 1.0  # replaced by 0.4 / log(mu_hat) in run_coupling_experiment
    return ExperimentConfig(**kw)


# ---------------------------------------------------------------------------


def mse(estimates, truths) -> float:
    a = np.asarray(estimates, dtype=float)
    b = np.asarray(truths, dtype=float)
    if a.shape != b.shape or a.ndim != 1 or len(a) < 1:
        raise DimensionMismatch(f"shapes {a.shape} and {b.shape}")
    return float(np.mean((a - b) ** 2))


@dataclass
class ExperimentRow:
    n: int
    k: int
    c: float
    mean_R_inf: float
    mean_R_k: float
    mean_Rhat_k: float
    mse_R_k: float
    mse_Rhat_k: float
    coupling_break_fraction: float
    se_R_inf: float = math.nan
    se_mse_R_k: float = math.nan
    se_mse_Rhat_k: float = math.nan
    replications: int = 0
    failures: int = 0
    coupling_audit_max: float = 0.0  # max |R_k - Rhat_k| over replications with tau >= k
    l1_bound_ratio_max: float = 0.0  # max ||R^(k) - R^(inf)||_1 / ((r0 + 1) n c^k)
    seed: int = 0


def _replicate(args):
    cfg, params, n, rep = args
    rng = derive(cfg.master_seed, "replication", n, rep)
    try:
        bideg = run_algorithm1(n, params, cfg.algorithm1(params), rng, min_out=cfg.min_out)
    except ModelError as exc:
        return {"error": type(exc).__name__}
    ks = cfg.ks_for(n)
    graph, tree, stats = explore_and_couple(bideg, max(ks), rng)
    root = stats.root
    out = []
    for c in cfg.cs():
        prc = PageRankConfig(c=c, r0=cfg.r0, eps0=cfg.eps0)
        truth = power_iterate_converged(graph, prc).values
        iters = power_iterates(graph, prc, ks)
        for k in ks:
            rk = iters[k]
            out.append(
                dict(
                    k=k,
                    c=c,
                    R_inf=float(truth[root]),
                    R_k=float(rk[root]),
                    Rhat_k=tree_pagerank(tree, c, k, cfg.r0),
                    coupled=stats.tau_at_least(k),
                    l1_ratio=float(np.abs(rk - truth).sum() / ((cfg.r0 + 1) * n * c**k)),
                )
            )
    return {"results": out, "tau": stats.tau}


def _map(fn, tasks, threads: int):
    if threads <= 1 or len(tasks) < 2:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * threads))))


def _se(x) -> float:
    return float(np.std(x, ddof=1) / math.sqrt(len(x))) if len(x) > 1 else math.nan


def run_table_experiment(cfg: ExperimentConfig) -> list[ExperimentRow]:
    """Mean PageRank and MSEs of R_k and Rhat_k against the converged R, per (n, k, c)."""
    params = cfg.degree_params()
    rows = []
    for n in cfg.sizes:
        n = int(n)
        reps = _map(_replicate, [(cfg, params, n, r) for r in range(cfg.replications)], cfg.threads)
        ok = [r for r in reps if "results" in r]
        failures = len(reps) - len(ok)
        if not ok:
            raise ModelError(f"all {len(reps)} replications failed at n={n}")
        for idx, (c, k) in enumerate((c, k) for c in cfg.cs() for k in cfg.ks_for(n)):
            res = [r["results"][idx] for r in ok]
            R_inf = np.array([x["R_inf"] for x in res])
            R_k = np.array([x["R_k"] for x in res])
            Rh = np.array([x["Rhat_k"] for x in res])
            se_k = (R_k - R_inf) ** 2
            se_h = (Rh - R_inf) ** 2
            coupled = np.array([x["coupled"] for x in res])
            audit = np.abs(R_k - Rh)[coupled]
            rows.append(
                ExperimentRow(
                    n=n,
                    k=k,
                    c=c,
                    mean_R_inf=float(R_inf.mean()),
                    mean_R_k=float(R_k.mean()),
                    mean_Rhat_k=float(Rh.mean()),
                    mse_R_k=mse(R_k, R_inf),
                    mse_Rhat_k=mse(Rh, R_inf),
                    coupling_break_fraction=float(1 - coupled.mean()),
                    se_R_inf=_se(R_inf),
                    se_mse_R_k=_se(se_k),
                    se_mse_Rhat_k=_se(se_h),
                    replications=len(ok),
                    failures=failures,
                    coupling_audit_max=float(audit.max()) if audit.size else 0.0,
                    l1_bound_ratio_max=float(max(x["l1_ratio"] for x in res)),
                    seed=cfg.master_seed,
                )
            )
    return rows


# ---------------------------------------------------------------------------


def estimate_mu(params: DegreeParams, cfg: ExperimentConfig, n: int = 100_000) -> float:
    """mu_hat = L_n / n from a pilot bi-degree sequence."""
    bideg = run_algorithm1(n, params, cfg.algorithm1(params), derive(cfg.master_seed, "pilot"))
    return bideg.total_stubs / n


@dataclass
class CouplingRow:
    n: int
    k: int
    runs: int
    breaks: int
    p_hat: float
    ci_low: float
    ci_high: float
    mu_hat: float
    h: float
    failures: int = 0
    seed: int = 0


def _coupling_rep(args):
    cfg, params, n, k, rep = args
    rng = derive(cfg.master_seed, "replication", n, rep)
    try:
        bideg = run_algorithm1(n, params, cfg.algorithm1(params), rng)
    except ModelError:
        return None
    # distances 0..k must be explored to see a break at distance k
    _, _, stats = explore_and_couple(bideg, k + 1, rng, complete=False)
    return stats.tau is not None and stats.tau <= k


def wilson_ci(successes: int, trials: int, level: float = 0.95):
    ci = binomtest(successes, trials).proportion_ci(confidence_level=level, method="wilson")
    return float(ci.low), float(ci.high)


def run_coupling_experiment(cfg: ExperimentConfig, h_factor: float = 0.4, mu_hat: float | None = None) -> list[CouplingRow]:
    """Empirical P(tau <= k_n), k_n = floor(h log n) with h = h_factor / log(mu_hat).

    ``h_factor < 1/2`` keeps k_n inside the regime where the break probability
    decays polynomially in n; larger values still run but carry no guarantee.
    ``cfg.k`` or ``cfg.k_values`` override the k_n rule.
    """
    params = cfg.degree_params()
    if mu_hat is None:
        mu_hat = estimate_mu(params, cfg)
    if mu_hat <= 1:
        raise ConfigError(f"mu_hat={mu_hat:.4f} <= 1; no supercritical regime")
    h = h_factor / math.log(mu_hat)
    rows = []
    for n in cfg.sizes:
        n = int(n)
        if cfg.k is not None or cfg.k_values is not None:
            k = cfg.ks_for(n)[0]
        else:
            k = int(math.floor(h * math.log(n)))
        out = _map(_coupling_rep, [(cfg, params, n, k, r) for r in range(cfg.replications)], cfg.threads)
        done = [x for x in out if x is not None]
        breaks = int(sum(done))
        lo, hi = wilson_ci(breaks, len(done)) if done else (math.nan, math.nan)
        rows.append(
            CouplingRow(
                n=n,
                k=k,
                runs=len(done),
                breaks=breaks,
                p_hat=breaks / len(done) if done else math.nan,
                ci_low=lo,
                ci_high=hi,
                mu_hat=mu_hat,
                h=h,
                failures=len(out) - len(done),
                seed=cfg.master_seed,
            )
        )
    return rows


# ---------------------------------------------------------------------------


class EmpiricalCdf:
    """Right-continuous step function F(x) = #{samples <= x} / size."""

    def __init__(self, samples):
        self.values = np.sort(np.asarray(samples, dtype=float))
        if self.values.size == 0:
            raise ValueError("empty sample")

    def __call__(self, x):
        return self.counts(x) / self.values.size

    def counts(self, x):
        return np.searchsorted(self.values, x, side="right")

    def __len__(self):
        return self.values.size


def ks_distance(a: EmpiricalCdf, b: EmpiricalCdf) -> float:
    """sup_x |F_a(x) - F_b(x)|; attained at a sample point of either CDF.

    Computed on integer counts so that ties such as 5/100 come out exact.
    """
    pts = np.concatenate([a.values, b.values])
    na, nb = len(a), len(b)
    gap = np.max(np.abs(a.counts(pts) * nb - b.counts(pts) * na))
    return float(gap) / (na * nb)


@dataclass
class CdfResult:
    cdf_true: EmpiricalCdf
    cdf_k: EmpiricalCdf
    cdf_tbt: EmpiricalCdf
    ks_k: float
    ks_tbt: float
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "true": self.cdf_true.values.tolist(),
            "k_iter": self.cdf_k.values.tolist(),
            "tbt": self.cdf_tbt.values.tolist(),
            "ks_true_vs_k": self.ks_k,
            "ks_true_vs_tbt": self.ks_tbt,
            **self.meta,
        }


def run_cdf_experiment(cfg: ExperimentConfig, repetition: int = 0) -> CdfResult:
    """Empirical PageRank CDFs of one graph: converged, k iterations, and TBT roots.

    The TBT sample re-runs the coupled exploration ``tbt_root_samples`` times
    on the same bi-degree sequence, each with a fresh uniform root.
    """
    params = cfg.degree_params()
    n = int(cfg.sizes[0])
    k = cfg.ks_for(n)[0]
    bideg = run_algorithm1(n, params, cfg.algorithm1(params), derive(cfg.master_seed, "degrees", repetition))
    graph = build_dcm(bideg, derive(cfg.master_seed, "graph", repetition))
    prc = PageRankConfig(c=cfg.c, r0=cfg.r0, eps0=cfg.eps0)
    truth = power_iterate_converged(graph, prc).values
    rk = power_iterate_k(graph, prc, k).values
    rng = derive(cfg.master_seed, "tree", repetition)
    tbt = np.empty(cfg.tbt_root_samples)
    for i in range(cfg.tbt_root_samples):
        _, tree, _ = explore_and_couple(bideg, k, rng, complete=False)
        tbt[i] = tree_pagerank(tree, cfg.c, k, cfg.r0)
    a, b, t = EmpiricalCdf(truth), EmpiricalCdf(rk), EmpiricalCdf(tbt)
    meta = {"n": n, "k": k, "c": cfg.c, "seed": cfg.master_seed, "repetition": repetition, "mu_hat": bideg.total_stubs / n}
    return CdfResult(a, b, t, ks_distance(a, b), ks_distance(a, t), meta)


# ---------------------------------------------------------------------------
# Serialisation


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_rows(rows, path, sidecar: dict | None = None):
    """CSV with one row per dataclass record plus a JSON sidecar."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if not rows:
        raise ValueError("no rows to write")
    names = [f.name for f in fields(rows[0])]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for r in rows:
            w.writerow([_fmt(getattr(r, k)) for k in names])
    if sidecar is not None:
        path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True, default=_json_default) + "\n")


def write_json(obj, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o).__name__)


def default_threads() -> int:
    return os.cpu_count() or 1
