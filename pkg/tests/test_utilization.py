import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from mmframe.channel import LinkBudget
from mmframe.frame import FrameParams, TtiMode
from mmframe.traffic import BurstyLogNormal, FullBufferTcp
from mmframe.utilization import (ModelBreakdown, eta_fixed_closed_form, mean_tti_duration,
                                 tcp_ack_time_min, tcp_segments_per_tti, util_bursty,
                                 util_bursty_fixed, util_bursty_flexible, util_from_times,
                                 util_tcp)

US = 1e-6
W = 1e9
T = 125 * US
FP = FrameParams.from_symbols(T, 30)
BUDGET = LinkBudget()
SMALL = BurstyLogNormal(5.0, 100.0, 2e6, 10710.0, 25032.0)


def test_segments_per_tti():
    assert tcp_segments_per_tti(T, 4.8, W, 12000) == pytest.approx(50)
    assert tcp_segments_per_tti(T, 2.4, W, 12000) == pytest.approx(25)
    assert tcp_segments_per_tti(0.0, 4.8, W, 12000) == 0


def test_ack_time_min():
    assert tcp_ack_time_min(50, 592, 4.8, W) == pytest.approx(29600 / 4.8e9)
    assert tcp_ack_time_min(0, 592, 4.8, W) == 0
    s_n = tcp_segments_per_tti(T, 4.8, W, 12000)
    assert tcp_ack_time_min(s_n, 12000, 4.8, W) == pytest.approx(T)


def test_util_tcp_fixed_plateau():
    r = util_tcp(FP, 4.8, 4.8, 12000, 592, W)
    assert r.eta == pytest.approx(0.525, abs=0.01)
    assert r.mode is TtiMode.FIXED


def test_util_tcp_flexible_substitution():
    fp = FP.with_mode(TtiMode.FLEXIBLE)
    t_ack = 29600 / 4.8e9
    q = np.ceil(t_ack / fp.t_sym) * fp.t_sym
    want = (T + t_ack) / (T + q)
    assert util_tcp(fp, 4.8, 4.8, 12000, 592, W).eta == pytest.approx(want, rel=1e-12)
    assert want == pytest.approx(0.984, abs=0.001)


def test_util_tcp_flexible_beats_fixed_at_four_symbols():
    fp = FP.with_tti_symbols(4)
    fix = util_tcp(fp, 4.8, 4.8, 12000, 592, W).eta
    flex = util_tcp(fp.with_mode(TtiMode.FLEXIBLE), 4.8, 4.8, 12000, 592, W).eta
    assert flex > fix + 0.1


@given(st.integers(4, 100))
def test_util_tcp_fixed_independent_of_tti(n):
    base = util_tcp(FP, 4.8, 4.8, 12000, 592, W).eta
    assert util_tcp(FP.with_tti_symbols(n), 4.8, 4.8, 12000, 592, W).eta == pytest.approx(base, rel=1e-12)


def test_util_tcp_breakdown():
    with pytest.raises(ModelBreakdown):
        util_tcp(FP, 4.8, 0.1, 12000, 592, W)


# ---------------------------------------------------------------- bursty

def _const(bytes_):
    return BurstyLogNormal(1.0, bytes_, bytes_, bytes_, 0.0)


def test_perfect_fill_fixed():
    rho = 4.8
    bits = rho * W * T
    r = util_bursty_fixed(_const(bits / 8), FP, None, BUDGET, 10_000, rho=[rho])
    assert r.eta == pytest.approx(1.0, rel=1e-9)


def test_tenth_fill_fixed():
    rho = 4.8
    bits = rho * W * T / 10
    r = util_bursty_fixed(_const(bits / 8), FP, None, BUDGET, 10_000, rho=[rho])
    assert r.eta == pytest.approx(0.1, rel=1e-9)


def test_symbol_filling_flexible():
    rho = 4.8
    bits = 7 * rho * W * FP.t_sym
    r = util_bursty_flexible(_const(bits / 8), FP, None, BUDGET, 10_000, rho=[rho])
    assert r.eta == pytest.approx(1.0, rel=1e-9)


RHO = np.array([0.05, 0.4, 1.5, 4.8])


@pytest.mark.parametrize("n_sym", [4, 30, 100])
def test_fixed_mc_matches_quadrature(n_sym):
    fp = FP.with_tti_symbols(n_sym)
    r = util_bursty_fixed(SMALL, fp, None, BUDGET, 100_000, seed=5, rho=RHO)
    # oracle: E[t] / E[ceil(t/T) T] with E[ceil(X)] = sum_k P(X > k)
    lo, hi = np.log(SMALL.size_min * 8), np.log(SMALL.size_max * 8)
    a, b = (lo - SMALL.mu - np.log(8)) / SMALL.sigma, (hi - SMALL.mu - np.log(8)) / SMALL.sigma
    logb = stats.truncnorm(a, b, loc=SMALL.mu + np.log(8), scale=SMALL.sigma)
    mean_bits = SMALL.mean_size * 8
    num = mean_bits * np.mean(1 / RHO) / W
    den = 0.0
    for rho in RHO:
        cap = rho * W * fp.t_tti_max
        k = np.arange(0, int(SMALL.size_max * 8 / cap) + 2)
        thresh = np.log(np.maximum(k * cap, 1e-300))
        surv = np.where(k == 0, 1.0, logb.sf(thresh))
        den += surv.sum() * fp.t_tti_max / len(RHO)
    assert r.eta == pytest.approx(num / den, abs=3 * r.ci95 + 1e-9)


def test_single_tti_closed_form():
    # all transmissions fit in one TTI, so the closed form is exact in expectation
    tr = BurstyLogNormal(1.0, 100.0, 2000.0, 800.0, 300.0)
    r = util_bursty_fixed(tr, FP, None, BUDGET, 200_000, seed=2, rho=RHO[1:])
    want = eta_fixed_closed_form(800 * 8, np.mean(1 / RHO[1:]), W, T)
    assert r.eta == pytest.approx(want, abs=3 * r.ci95)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 1000), st.integers(4, 100))
def test_flexible_at_least_fixed(seed, n_sym):
    fp = FP.with_tti_symbols(n_sym)
    fix = util_bursty_fixed(SMALL, fp, None, BUDGET, 2000, seed=seed, rho=RHO)
    flex = util_bursty_flexible(SMALL, fp, None, BUDGET, 2000, seed=seed, rho=RHO)
    assert flex.eta >= fix.eta
    assert 0 < fix.eta <= 1 and 0 < flex.eta <= 1


@given(st.lists(st.floats(1e-9, 1e-3), min_size=1, max_size=50))
def test_samplewise_flexible_at_least_fixed(t):
    assert util_from_times(t, FP.with_mode(TtiMode.FLEXIBLE)).eta >= util_from_times(t, FP).eta - 1e-12


def test_flexible_tends_to_one_as_symbol_shrinks():
    etas = []
    for n in (30, 300, 3000):
        fp = FrameParams.from_symbols(T, n, TtiMode.FLEXIBLE)
        etas.append(util_bursty_flexible(SMALL, fp, None, BUDGET, 20_000, seed=1, rho=RHO).eta)
    assert etas[0] < etas[1] < etas[2] <= 1
    assert etas[2] > 0.99


def test_sharded_deterministic():
    a = util_bursty(SMALL, FP, None, BUDGET, 10_000, seed=3, rho=RHO, shards=4)
    b = util_bursty(SMALL, FP, None, BUDGET, 10_000, seed=3, rho=RHO, shards=4)
    assert a.eta == b.eta and a.n_samples == 10_000


def test_convergence_flag():
    r = util_bursty_fixed(SMALL, FP, None, BUDGET, 20, seed=0, rho=RHO)
    big = util_bursty_fixed(SMALL, FP, None, BUDGET, 100_000, seed=0, rho=RHO)
    assert big.converged
    assert r.ci95 > big.ci95


def test_mean_tti_duration():
    tcp = FullBufferTcp()
    assert mean_tti_duration(FP) == T
    flex = FP.with_mode(TtiMode.FLEXIBLE)
    q_ack = np.ceil(29600 / 4.8e9 / flex.t_sym) * flex.t_sym
    assert mean_tti_duration(flex, tcp, w_tot=W) == pytest.approx((T + q_ack) / 2)
