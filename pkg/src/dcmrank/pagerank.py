"""Scale-free PageRank R = R M + (1 - c) 1 with M_ij = c s_ij / D_i.

Rows of dangling nodes (D_i = 0) are zero, so mass leaks there. All products
are computed by streaming over the sorted edge arrays; M is never formed
except in :func:`dense_matrix` / :func:`solve_exact`.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, DimensionMismatch, NotConverged, TooLarge
from .graph import MultiDigraph

DENSE_LIMIT = 2000


@dataclass(frozen=True)
class PageRankConfig:
    c: float = 0.5
    r0: float = 1.0
    eps0: float = 1e-6
    max_iters: int = 10_000

    def __post_init__(self):
        if not 0 < self.c < 1:
            raise ConfigError(f"c must lie in (0, 1), got {self.c}")
        if not self.r0 >= 0:
            raise ConfigError(f"r0 must be >= 0, got {self.r0}")
        if not self.eps0 > 0:
            raise ConfigError(f"eps0 must be > 0, got {self.eps0}")
        if self.max_iters < 1:
            raise ConfigError("max_iters must be positive")


@dataclass
class RankVector:
    values: np.ndarray
    iterations_used: int
    converged: bool = True
    last_step: float = 0.0

    def to_csv(self, path, sidecar: dict | None = None):
        path = Path(path)
        lines = ["node,value"] + [f"{i},{v!r}" for i, v in enumerate(self.values.tolist())]
        path.write_text("\n".join(lines) + "\n")
        meta = {"iterations_used": self.iterations_used, "converged": self.converged, **(sidecar or {})}
        path.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def _edge_weights(graph: MultiDigraph, c: float) -> np.ndarray:
    # every edge's source has D >= 1, so no division by zero
    return c * graph.mult / graph.out_degrees[graph.src]


def apply_M(graph: MultiDigraph, v, c: float, weights: np.ndarray | None = None) -> np.ndarray:
    """Row-vector product v M, accumulated per target in ascending edge order."""
    v = np.asarray(v, dtype=float)
    if v.shape != (graph.n,):
        raise DimensionMismatch(f"vector of shape {v.shape} for a graph with n={graph.n}")
    if weights is None:
        weights = _edge_weights(graph, c)
    return np.bincount(graph.dst, weights=v[graph.src] * weights, minlength=graph.n)


def power_iterate_k(graph: MultiDigraph, cfg: PageRankConfig, k: int) -> RankVector:
    if k < 0:
        raise ValueError("k must be nonnegative")
    w = _edge_weights(graph, cfg.c)
    r = np.full(graph.n, float(cfg.r0))
    for _ in range(k):
        r = apply_M(graph, r, cfg.c, w) + (1 - cfg.c)
    return RankVector(r, k)


def power_iterates(graph: MultiDigraph, cfg: PageRankConfig, ks) -> dict:
    """R^(n,k) for several k from a single pass."""
    ks = sorted(set(int(k) for k in ks))
    w = _edge_weights(graph, cfg.c)
    r = np.full(graph.n, float(cfg.r0))
    out = {}
    t = 0
    for k in ks:
        while t < k:
            r = apply_M(graph, r, cfg.c, w) + (1 - cfg.c)
            t += 1
        out[k] = r.copy()
    return out


def power_iterate_converged(graph: MultiDigraph, cfg: PageRankConfig) -> RankVector:
    """Iterate until the L2 distance between successive iterates is below eps0.

    Hitting ``max_iters`` first emits a :class:`NotConverged` warning and
    returns the last iterate with ``converged=False``.
    """
    w = _edge_weights(graph, cfg.c)
    r = np.full(graph.n, float(cfg.r0))
    dist = math.inf
    for it in range(1, cfg.max_iters + 1):
        nxt = apply_M(graph, r, cfg.c, w) + (1 - cfg.c)
        dist = float(np.linalg.norm(nxt - r))
        r = nxt
        if dist < cfg.eps0:
            return RankVector(r, it, True, dist)
    warnings.warn(f"NotConverged: L2 step {dist:.3g} >= eps0={cfg.eps0} after {cfg.max_iters} iterations", NotConverged)
    return RankVector(r, cfg.max_iters, False, dist)


def dense_matrix(graph: MultiDigraph, c: float, dense_limit: int = DENSE_LIMIT) -> np.ndarray:
    if graph.n > dense_limit:
        raise TooLarge(f"n={graph.n} exceeds the dense limit {dense_limit}")
    M = np.zeros((graph.n, graph.n))
    np.add.at(M, (graph.src, graph.dst), _edge_weights(graph, c))
    return M


def solve_exact(graph: MultiDigraph, cfg: PageRankConfig, dense_limit: int = DENSE_LIMIT) -> RankVector:
    """Direct solve of R (I - M) = (1 - c) 1."""
    M = dense_matrix(graph, cfg.c, dense_limit)
    A = np.eye(graph.n) - M
    r = np.linalg.solve(A.T, np.full(graph.n, 1 - cfg.c))
    return RankVector(r, 0)


def iterations_bound(n: int, cfg: PageRankConfig) -> int:
    """Iteration count after which successive L2 steps are guaranteed below eps0.

    From ||R^(k) - R^(k-1)||_2 <= ||R^(1) - R^(0)||_1 c^(k-1) <= (r0 + 1) n c^(k-1),
    the last step holding whenever r0 <= (2 - c) / c.
    """
    return math.ceil(math.log(cfg.eps0 / ((cfg.r0 + 1) * n)) / math.log(cfg.c)) + 1


def config_dict(cfg: PageRankConfig) -> dict:
    return asdict(cfg)
