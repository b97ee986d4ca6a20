import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from dcmrank import degree_model as dm
from dcmrank.degree_model import (
    Algorithm1Config,
    BiDegreeSequence,
    DegreeParams,
    balance,
    calibrate_lambda2,
    floor_sum_mean,
    kappa0,
    run_algorithm1,
    sample_pareto,
    sample_target_sequences,
)
from dcmrank.errors import ConfigError, NoRoot, ResampleLimitExceeded


class _OnesRng:
    """rng.random() always returns 0, i.e. u = 1 - 0 = 1."""

    def random(self, size=None):
        return np.zeros(size)


def test_pareto_inverse_cdf_boundary():
    x = sample_pareto(2.0, 0.5, 3, _OnesRng())
    assert np.array_equal(x, [0.5, 0.5, 0.5])


def test_pareto_part_has_unit_mean():
    rng = np.random.default_rng(1)
    x = sample_pareto(2.0, 0.5, 10**6, rng)
    se = x.std() / math.sqrt(x.size)
    assert abs(x.mean() - 1) <= 3 * se


def test_in_degree_tail_slope(params):
    inseq, _ = sample_target_sequences(10**6, params, np.random.default_rng(2))
    t = np.arange(10, 101)
    frac = np.array([(inseq > s).mean() for s in t])
    slope = np.polyfit(np.log(t), np.log(frac), 1)[0]
    assert abs(slope + 2) <= 0.3


def test_params_validation():
    with pytest.raises(ConfigError):
        DegreeParams(alpha=1.0)
    with pytest.raises(ConfigError):
        DegreeParams(beta=2.0)
    with pytest.raises(ConfigError):
        DegreeParams(lambda1=0)
    p = DegreeParams(alpha=2, beta=2.5)
    assert p.x1 == 0.5 and p.x2 == 0.6


def test_kappa0_values():
    assert kappa0(2, 2.5) == 0.5
    assert kappa0(1.5, 3) == pytest.approx(1 / 3, abs=1e-15)


def test_algorithm1_config_checks():
    p = DegreeParams(alpha=2, beta=2.5, lambda2=1.0)
    with pytest.raises(ConfigError):
        Algorithm1Config.for_params(p, delta0=0.5)
    cfg = Algorithm1Config(delta0=0.1, kappa0=0.4)
    with pytest.raises(ConfigError):
        cfg.check(p)


# -- mean of floor(Pareto + Exp) ---------------------------------------------


def _series_mean(shape, scale, rate, T=4000):
    """sum_{t>=1} P(X + Y >= t) by quadrature over Y, tail by the Pareto asymptote."""

    def surv(t):
        # P(X >= t - y) = 1 for y >= t - scale
        head = math.exp(-rate * (t - scale))
        body, _ = integrate.quad(lambda y: rate * math.exp(-rate * y) * (scale / (t - y)) ** shape, 0, t - scale, limit=200)
        return head + body

    s = sum(surv(t) for t in range(1, T + 1))
    # P(X + Y >= t) ~ scale^shape t^-shape (1 + shape / (rate t)) for large t
    tail = scale**shape * (T ** (1 - shape) / (shape - 1))
    return s + tail


@pytest.mark.parametrize("shape,rate", [(3.0, 1.0), (2.5, 0.7)])
def test_floor_sum_mean_matches_threshold_series(shape, rate):
    scale = (shape - 1) / shape
    assert floor_sum_mean(shape, scale, rate) == pytest.approx(_series_mean(shape, scale, rate), abs=2e-5)


def test_calibrate_symmetric_case():
    p = DegreeParams(alpha=3.0, beta=3.0, lambda1=0.8)
    assert calibrate_lambda2(p) == 0.8
    assert p.lambda2 == 0.8


def test_calibrate_lambda2_against_monte_carlo():
    p = DegreeParams(alpha=2.0, beta=2.5, lambda1=1.0)
    lam = calibrate_lambda2(p, tol=1e-10)
    assert p.lambda2 == lam
    target = floor_sum_mean(2.0, 0.5, 1.0)
    assert abs(floor_sum_mean(2.5, 0.6, lam) - target) <= 1e-10
    rng = np.random.default_rng(3)
    m = 10**7
    w = np.floor(sample_pareto(2.5, 0.6, m, rng) + rng.exponential(1 / lam, m))
    assert abs(w.mean() - target) <= 2 * w.std() / math.sqrt(m)


def test_calibrate_zero_tolerance_has_no_root():
    with pytest.raises(NoRoot):
        calibrate_lambda2(DegreeParams(alpha=2.0, beta=2.5, lambda1=1.0), tol=0)


def test_calibrate_unreachable_mean():
    # in-side mean ~0.34 is below E[floor X2] ~0.366, the out-side mean as lambda2 -> inf
    p = DegreeParams(alpha=5.0, beta=100.0, lambda1=1000.0)
    assert floor_sum_mean(5.0, 0.8, 1000.0) < floor_sum_mean(100.0, 0.99, 1e9)
    with pytest.raises(NoRoot):
        calibrate_lambda2(p)


# -- Algorithm 1 ---------------------------------------------------------------


def _fixed_sampler(monkeypatch, seqs):
    it = iter(seqs)

    def fake(n, params, rng, min_out=0):
        N, D = next(it)
        return np.array(N), np.array(D)

    monkeypatch.setattr(dm, "sample_target_sequences", fake)


def test_balanced_input_passes_through(monkeypatch, params, alg1):
    _fixed_sampler(monkeypatch, [((2, 1, 0), (1, 1, 1))])
    b = run_algorithm1(3, params, alg1, np.random.default_rng(0))
    assert b.in_degrees.tolist() == [2, 1, 0]
    assert b.out_degrees.tolist() == [1, 1, 1]
    assert b.total_stubs == 3


def test_positive_delta_increments_one_out_degree(monkeypatch, params):
    cfg = Algorithm1Config.for_params(params, delta0=0.1)
    assert cfg.threshold(3) == pytest.approx(3**0.6)
    _fixed_sampler(monkeypatch, [((2, 0, 1), (1, 1, 0))])
    b = run_algorithm1(3, params, cfg, np.random.default_rng(0))
    assert b.in_degrees.tolist() == [2, 0, 1]
    assert (b.out_degrees - np.array([1, 1, 0])).sum() == 1
    assert b.in_degrees.sum() == b.out_degrees.sum() == 3


def test_negative_delta_increments_distinct_in_degrees():
    # |Delta| = 2 exceeds any n=2 threshold, so this exercises the repair step alone
    b = balance((0, 1), (2, 1), np.random.default_rng(0))
    assert b.in_degrees.tolist() == [1, 2]
    assert b.out_degrees.tolist() == [2, 1]


def test_resamples_until_within_threshold(monkeypatch, params, alg1):
    # n=2: threshold 2^0.6 ~ 1.52; first sample has |Delta| = 4
    _fixed_sampler(monkeypatch, [((5, 0), (1, 0)), ((1, 1), (0, 1))])
    b = run_algorithm1(2, params, alg1, np.random.default_rng(0))
    assert b.meta["attempts"] == 2
    assert b.in_degrees.sum() == b.out_degrees.sum() == 2


def test_resample_limit(monkeypatch, params):
    cfg = Algorithm1Config.for_params(params, max_resamples=3)
    _fixed_sampler(monkeypatch, [((9, 9), (0, 0))] * 3)
    with pytest.raises(ResampleLimitExceeded):
        run_algorithm1(2, params, cfg, np.random.default_rng(0))


@given(
    st.lists(st.tuples(st.integers(0, 6), st.integers(0, 6)), min_size=1, max_size=40),
    st.integers(0, 2**32 - 1),
)
@settings(max_examples=200, deadline=None)
def test_balance_invariants(pairs, seed):
    N = np.array([p[0] for p in pairs])
    D = np.array([p[1] for p in pairs])
    delta = int(N.sum() - D.sum())
    if abs(delta) > len(N):
        with pytest.raises(ConfigError):
            balance(N, D, np.random.default_rng(seed))
        return
    b = balance(N, D, np.random.default_rng(seed))
    assert b.in_degrees.sum() == b.out_degrees.sum()
    dN = b.in_degrees - N
    dD = b.out_degrees - D
    # increments are 0/1, on one side only, at exactly |delta| distinct nodes
    assert set(np.unique(dN)) <= {0, 1} and set(np.unique(dD)) <= {0, 1}
    assert dN.sum() + dD.sum() == abs(delta)
    assert (dN.sum() == 0) or (dD.sum() == 0)
    if delta < 0:
        assert dD.sum() == 0
    if delta > 0:
        assert dN.sum() == 0


def test_algorithm1_deterministic(params, alg1):
    a = run_algorithm1(500, params, alg1, np.random.default_rng(9))
    b = run_algorithm1(500, params, alg1, np.random.default_rng(9))
    assert a == b


def test_single_node_becomes_self_loop_sequence(params, alg1):
    for seed in range(20):
        b = run_algorithm1(1, params, alg1, np.random.default_rng(seed))
        assert b.in_degrees[0] == b.out_degrees[0]


def test_min_out_conditioning(params):
    _, D = sample_target_sequences(5000, params, np.random.default_rng(0), min_out=1)
    assert D.min() >= 1


@pytest.mark.parametrize("m", [1, 2])
def test_conditional_mean_matches_monte_carlo(m):
    p = DegreeParams(2.0, 3.0, 1.0, lambda2=0.8)
    D = dm._sample_out(4 * 10**6, p, np.random.default_rng(m))
    want = dm.conditional_floor_sum_mean(3.0, p.x2, 0.8, m)
    kept = D[D >= m]
    assert abs(kept.mean() - want) <= 3 * kept.std() / math.sqrt(kept.size)
    assert abs((D < m).mean() - dm.floor_sum_below(3.0, p.x2, 0.8, m)) <= 3 * math.sqrt(0.25 / D.size)


def test_calibration_for_dangling_free_sampling():
    p = DegreeParams(2.0, 2.5, 1.0)
    calibrate_lambda2(p, min_out=1)
    _, D = sample_target_sequences(2 * 10**6, p, np.random.default_rng(6), min_out=1)
    assert abs(D.mean() - floor_sum_mean(2.0, 0.5, 1.0)) <= 3 * D.std() / math.sqrt(D.size)


@pytest.mark.slow
def test_acceptance_rate_increases_with_n(params, alg1):
    rng = np.random.default_rng(4)
    rates = []
    for n in (100, 1000, 10000):
        hits = 0
        for _ in range(200):
            N, D = sample_target_sequences(n, params, rng)
            hits += abs(int(N.sum() - D.sum())) <= alg1.threshold(n)
        rates.append(hits / 200)
    assert rates[0] < rates[1] < rates[2]


def test_csv_roundtrip(tmp_path, params, alg1):
    b = run_algorithm1(50, params, alg1, np.random.default_rng(0))
    b.meta = {"seed": 0, "params": params.to_dict()}
    b.to_csv(tmp_path / "b.csv")
    assert (tmp_path / "b.csv").read_text().splitlines()[0] == "node,in_degree,out_degree"
    assert BiDegreeSequence.from_csv(tmp_path / "b.csv") == b
    import json

    side = json.loads((tmp_path / "b.json").read_text())
    assert side["n"] == 50 and side["L_n"] == b.total_stubs and side["seed"] == 0
