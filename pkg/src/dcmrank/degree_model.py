"""Power-law bi-degree sequences.

Target degrees are ``floor(Pareto + Exponential)`` with unit-mean Pareto parts;
the raw in/out samples are then repaired into a valid bi-degree sequence (equal
in/out totals) by the resample-then-increment procedure in :func:`run_algorithm1`.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import quad

from .errors import ConfigError, NoRoot, ResampleLimitExceeded


@dataclass
class DegreeParams:
    """Shapes and exponential rates of the in/out degree laws.

    ``lambda2`` may be left as ``None`` and filled in by :func:`calibrate_lambda2`.
    """

    alpha: float = 2.0
    beta: float = 2.5
    lambda1: float = 1.0
    lambda2: float | None = None

    def __post_init__(self):
        self.validate()

    def validate(self):
        if not self.alpha > 1:
            raise ConfigError(f"alpha must be > 1, got {self.alpha}")
        if not self.beta > 2:
            raise ConfigError(f"beta must be > 2, got {self.beta}")
        if not self.lambda1 > 0:
            raise ConfigError(f"lambda1 must be > 0, got {self.lambda1}")
        if self.lambda2 is not None and not self.lambda2 > 0:
            raise ConfigError(f"lambda2 must be > 0, got {self.lambda2}")

    @property
    def x1(self) -> float:
        return (self.alpha - 1) / self.alpha

    @property
    def x2(self) -> float:
        return (self.beta - 1) / self.beta

    @property
    def mu(self) -> float:
        """E[in-degree] of the target law (equals E[out-degree] once calibrated)."""
        return floor_sum_mean(self.alpha, self.x1, self.lambda1)

    @property
    def lam(self) -> float:
        """Diagnostic E[D^2]/mu of the out-degree target law."""
        self._require_lambda2()
        return floor_sum_second_moment(self.beta, self.x2, self.lambda2) / self.mu

    def _require_lambda2(self):
        if self.lambda2 is None:
            raise ConfigError("lambda2 is not set; call calibrate_lambda2 first")

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(x1=self.x1, x2=self.x2)
        return d


def kappa0(alpha: float, beta: float) -> float:
    return min(1 - 1 / alpha, 1 - 1 / beta, 0.5)


@dataclass
class Algorithm1Config:
    delta0: float
    kappa0: float
    max_resamples: int = 1000

    def __post_init__(self):
        if not 0 < self.delta0 < self.kappa0:
            raise ConfigError(f"delta0 must lie in (0, kappa0={self.kappa0}), got {self.delta0}")
        if self.max_resamples < 1:
            raise ConfigError("max_resamples must be positive")

    @classmethod
    def for_params(cls, params: DegreeParams, delta0: float = 0.1, max_resamples: int = 1000):
        return cls(delta0=delta0, kappa0=kappa0(params.alpha, params.beta), max_resamples=max_resamples)

    def check(self, params: DegreeParams):
        if not math.isclose(self.kappa0, kappa0(params.alpha, params.beta), rel_tol=0, abs_tol=1e-15):
            raise ConfigError("kappa0 does not match the degree parameters")

    def threshold(self, n: int) -> float:
        return n ** (1 - self.kappa0 + self.delta0)


@dataclass
class BiDegreeSequence:
    in_degrees: np.ndarray
    out_degrees: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        self.in_degrees = np.asarray(self.in_degrees, dtype=np.int64)
        self.out_degrees = np.asarray(self.out_degrees, dtype=np.int64)
        if self.in_degrees.ndim != 1 or self.in_degrees.shape != self.out_degrees.shape:
            raise ConfigError("in/out degree vectors must be 1-d and of equal length")
        if len(self.in_degrees) < 1:
            raise ConfigError("n must be >= 1")
        if (self.in_degrees < 0).any() or (self.out_degrees < 0).any():
            raise ConfigError("degrees must be nonnegative")

    @property
    def n(self) -> int:
        return len(self.in_degrees)

    @property
    def total_stubs(self) -> int:
        return int(self.out_degrees.sum())

    @property
    def balanced(self) -> bool:
        return int(self.in_degrees.sum()) == int(self.out_degrees.sum())

    def __eq__(self, other):
        if not isinstance(other, BiDegreeSequence):
            return NotImplemented
        return np.array_equal(self.in_degrees, other.in_degrees) and np.array_equal(
            self.out_degrees, other.out_degrees
        )

    def to_csv(self, path):
        path = Path(path)
        lines = ["node,in_degree,out_degree"]
        lines += [f"{i},{a},{b}" for i, (a, b) in enumerate(zip(self.in_degrees.tolist(), self.out_degrees.tolist()))]
        path.write_text("\n".join(lines) + "\n")
        sidecar = {"n": self.n, "L_n": self.total_stubs, **self.meta}
        path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")

    @classmethod
    def from_csv(cls, path):
        data = np.loadtxt(path, delimiter=",", skiprows=1, dtype=np.int64, ndmin=2)
        if data.size == 0:
            raise ConfigError(f"{path}: no rows")
        order = np.argsort(data[:, 0], kind="stable")
        if not np.array_equal(data[order, 0], np.arange(len(data))):
            raise ConfigError(f"{path}: node ids must be 0..n-1")
        return cls(data[order, 1], data[order, 2])


# ---------------------------------------------------------------------------
# Sampling


def sample_pareto(shape: float, scale: float, size, rng: np.random.Generator) -> np.ndarray:
    # u on (0, 1]; u = 1 gives exactly the scale.
    u = 1.0 - rng.random(size)
    return scale * u ** (-1.0 / shape)


def sample_target_sequences(n: int, params: DegreeParams, rng: np.random.Generator, min_out: int = 0):
    """Draw i.i.d. raw in- and out-degrees.

    ``min_out > 0`` conditions each out-degree on being at least ``min_out``
    (per-entry rejection), which is how dangling-free graphs are produced.
    """
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    params._require_lambda2()
    x_in = sample_pareto(params.alpha, params.x1, n, rng)
    y_in = rng.exponential(1.0 / params.lambda1, n)
    inseq = np.floor(x_in + y_in).astype(np.int64)
    outseq = _sample_out(n, params, rng)
    if min_out > 0:
        bad = np.flatnonzero(outseq < min_out)
        while bad.size:
            outseq[bad] = _sample_out(bad.size, params, rng)
            bad = bad[outseq[bad] < min_out]
    return inseq, outseq


def _sample_out(size, params, rng):
    x = sample_pareto(params.beta, params.x2, size, rng)
    y = rng.exponential(1.0 / params.lambda2, size)
    return np.floor(x + y).astype(np.int64)


def balance(inseq, outseq, rng: np.random.Generator) -> BiDegreeSequence:
    """Step 5: add one stub at |Delta| distinct uniformly chosen nodes."""
    N = np.array(inseq, dtype=np.int64)
    D = np.array(outseq, dtype=np.int64)
    delta = int(N.sum() - D.sum())
    if delta == 0:
        return BiDegreeSequence(N, D)
    if abs(delta) > len(N):
        raise ConfigError(f"|Delta|={abs(delta)} exceeds n={len(N)}")
    picked = rng.choice(len(N), size=abs(delta), replace=False)
    if delta < 0:
        N[picked] += 1
    else:
        D[picked] += 1
    return BiDegreeSequence(N, D)


def run_algorithm1(
    n: int,
    params: DegreeParams,
    config: Algorithm1Config,
    rng: np.random.Generator,
    min_out: int = 0,
) -> BiDegreeSequence:
    """Sample raw degrees until |Delta_n| is within n^(1-kappa0+delta0), then balance."""
    config.check(params)
    limit = config.threshold(n)
    for attempt in range(1, config.max_resamples + 1):
        inseq, outseq = sample_target_sequences(n, params, rng, min_out=min_out)
        delta = int(inseq.sum() - outseq.sum())
        if abs(delta) <= limit:
            bideg = balance(inseq, outseq, rng)
            bideg.meta.update(attempts=attempt, delta=delta)
            return bideg
    raise ResampleLimitExceeded(
        f"|Delta_n| exceeded n^(1-kappa0+delta0)={limit:.3f} in {config.max_resamples} consecutive samples (n={n})"
    )


# ---------------------------------------------------------------------------
# Means of floor(Pareto + Exponential), used to calibrate lambda2

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)
_N_INTERVALS = 20000


def _frac_expectation(shape: float, scale: float, fn, tail_mean: float) -> float:
    """E[fn(frac(X))] for X ~ Pareto(shape, scale) with scale < 1.

    Integrates each unit interval [m, m+1) by Gauss-Legendre; beyond the last
    interval frac(X) is treated as uniform, contributing tail_mean * P(X >= M).
    """
    if not 0 < scale < 1:
        raise ValueError("scale must be in (0, 1)")
    lo = np.arange(_N_INTERVALS, dtype=float)
    lo[0] = scale
    hi = np.arange(1, _N_INTERVALS + 1, dtype=float)
    half = 0.5 * (hi - lo)[:, None]
    x = 0.5 * (hi + lo)[:, None] + half * _GL_NODES[None, :]
    dens = shape * scale**shape * x ** (-shape - 1)
    u = x - np.floor(lo)[:, None]
    body = float(np.sum(half * _GL_WEIGHTS[None, :] * fn(u) * dens))
    tail = tail_mean * (scale / _N_INTERVALS) ** shape
    return body + tail


def floor_sum_mean(shape: float, scale: float, rate: float) -> float:
    """E[floor(X + Y)], X ~ Pareto(shape, scale) with unit mean, Y ~ Exp(rate).

    Uses E[floor(x + Y)] = floor(x) + q(frac x), q(f) = exp(-rate (1 - f)) / (1 - exp(-rate)),
    so the expectation is 1 + E[q(F) - F] with F = frac(X).
    """
    z = -math.expm1(-rate)

    def phi(u):
        return np.exp(-rate * (1 - u)) / z - u

    # integral of phi over [0, 1]
    tail_mean = 1 / rate - 0.5
    return 1.0 + _frac_expectation(shape, scale, phi, tail_mean)


def floor_sum_second_moment(shape: float, scale: float, rate: float) -> float:
    """E[floor(X + Y)^2]; infinite when shape <= 2."""
    if shape <= 2:
        return math.inf
    # floor(x + Y) = floor(x) + K with P(K >= k) = exp(-rate (k - frac x)), k >= 1
    e = math.exp(-rate)
    z = 1 - e

    def moments(f):
        p1 = np.exp(-rate * (1 - f))
        ek = p1 / z
        ek2 = p1 * (1 + e) / z**2
        return ek, ek2

    lo = np.arange(_N_INTERVALS, dtype=float)
    lo[0] = scale
    hi = np.arange(1, _N_INTERVALS + 1, dtype=float)
    half = 0.5 * (hi - lo)[:, None]
    x = 0.5 * (hi + lo)[:, None] + half * _GL_NODES[None, :]
    dens = shape * scale**shape * x ** (-shape - 1)
    m = np.floor(lo)[:, None]
    ek, ek2 = moments(x - m)
    body = float(np.sum(half * _GL_WEIGHTS[None, :] * (m**2 + 2 * m * ek + ek2) * dens))
    # tail: E[X^2; X >= M] dominates
    M = float(_N_INTERVALS)
    tail = shape * scale**shape * M ** (2 - shape) / (shape - 2)
    return body + tail


def floor_sum_below(shape: float, scale: float, rate: float, t: int) -> float:
    """P(floor(X + Y) < t) = P(X + Y < t) for integer t."""
    if t <= scale:
        return 0.0

    def integrand(x):
        return shape * scale**shape * x ** (-shape - 1) * -math.expm1(-rate * (t - x))

    return float(quad(integrand, scale, t, limit=200)[0])


def conditional_floor_sum_mean(shape: float, scale: float, rate: float, m: int) -> float:
    """E[D | D >= m] for D = floor(X + Y)."""
    if m <= 0:
        return floor_sum_mean(shape, scale, rate)
    below = [floor_sum_below(shape, scale, rate, d) for d in range(1, m + 1)]
    low_part = sum(d * (below[d] - below[d - 1]) for d in range(1, m))
    return (floor_sum_mean(shape, scale, rate) - low_part) / (1 - below[m - 1])


def calibrate_lambda2(params: DegreeParams, tol: float = 1e-10, bracket=(1e-6, 1e6), min_out: int = 0) -> float:
    """Find the out-side rate that equalises the in/out target means.

    Bisection on ``g(l) = E[floor(X2 + Y2(l))] - E[floor(X1 + Y1)]``, which is
    decreasing in ``l``. With ``min_out > 0`` the out-side mean is the one
    conditioned on ``D >= min_out``, matching what the sampler produces in
    that mode. The result is stored in ``params.lambda2``.
    """
    if not tol > 0:
        raise NoRoot(f"an exact mean match (tol={tol}) is unattainable in floating point")
    if params.alpha == params.beta and min_out <= 0:
        params.lambda2 = params.lambda1
        return params.lambda2
    target = floor_sum_mean(params.alpha, params.x1, params.lambda1)

    def g(lam):
        return conditional_floor_sum_mean(params.beta, params.x2, lam, min_out) - target

    lo, hi = bracket
    g_lo, g_hi = g(lo), g(hi)
    if not (g_lo > 0 > g_hi):
        raise NoRoot(f"no lambda2 in {bracket} matches the in-degree mean {target:.6g}")
    while True:
        mid = math.sqrt(lo * hi) if hi / lo > 4 else 0.5 * (lo + hi)
        g_mid = g(mid)
        if abs(g_mid) <= tol:
            params.lambda2 = mid
            return mid
        if mid in (lo, hi):
            raise NoRoot(f"mean match within tol={tol} unattainable (closest lambda2={mid!r}, gap={g_mid:.3g})")
        if g_mid > 0:
            lo = mid
        else:
            hi = mid


def table1_params() -> DegreeParams:
    """alpha=2, beta=2.5, lambda1=1 with lambda2 calibrated to match means."""
    p = DegreeParams(alpha=2.0, beta=2.5, lambda1=1.0)
    calibrate_lambda2(p)
    return p
