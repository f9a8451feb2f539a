import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from mmframe.traffic import (BurstyLogNormal, FitError, fit_truncated_lognormal, generate_trace,
                             sample_arrivals, sample_pdu_size, tcp_ack_bits, truncated_moments,
                             write_trace_csv)

MB = 1e6
LARGE = dict(arrival_rate=1.0, size_min=0.5 * MB, size_max=5 * MB, mean_size=2 * MB, std_size=0.722 * MB)
SMALL = dict(arrival_rate=5.0, size_min=100.0, size_max=2 * MB, mean_size=10710.0, std_size=25032.0)


def _quad_moments(mu, sigma, lo, hi):
    # independent oracle: integrate the lognormal density over [lo, hi]
    f = stats.lognorm(s=sigma, scale=np.exp(mu)).pdf
    z = integrate.quad(f, lo, hi, limit=400)[0]
    m1 = integrate.quad(lambda x: x * f(x), lo, hi, limit=400)[0] / z
    m2 = integrate.quad(lambda x: x * x * f(x), lo, hi, limit=400)[0] / z
    return m1, np.sqrt(m2 - m1 ** 2)


@pytest.mark.parametrize("cfg", [LARGE, SMALL], ids=["large", "small"])
def test_fit_matches_quadrature_moments(cfg):
    mu, sigma = fit_truncated_lognormal(cfg["mean_size"], cfg["std_size"], cfg["size_min"], cfg["size_max"])
    m, s = _quad_moments(mu, sigma, cfg["size_min"], cfg["size_max"])
    assert m == pytest.approx(cfg["mean_size"], rel=1e-4)
    assert s == pytest.approx(cfg["std_size"], rel=1e-4)


def test_truncated_moments_agree_with_quadrature():
    m, s = truncated_moments(10.0, 1.2, 1e3, 1e6)
    qm, qs = _quad_moments(10.0, 1.2, 1e3, 1e6)
    assert m == pytest.approx(qm, rel=1e-6)
    assert s == pytest.approx(qs, rel=1e-5)


def test_large_packet_samples():
    tr = BurstyLogNormal(**LARGE)
    b = sample_pdu_size(tr, np.random.default_rng(0), 1_000_000) / 8
    assert b.mean() == pytest.approx(2 * MB, rel=0.01)
    assert b.std() == pytest.approx(0.722 * MB, rel=0.02)
    assert b.min() >= 0.5 * MB and b.max() <= 5 * MB


def test_small_packet_samples():
    tr = BurstyLogNormal(**SMALL)
    b = sample_pdu_size(tr, np.random.default_rng(1), 1_000_000) / 8
    assert b.mean() == pytest.approx(10710, rel=0.01)
    assert b.std() == pytest.approx(25032, rel=0.05)


def test_degenerate_model_constant():
    tr = BurstyLogNormal(1.0, 1500, 1500, 1500, 0.0)
    b = sample_pdu_size(tr, np.random.default_rng(2), 100)
    assert np.all(b == 1500 * 8)


def test_infeasible_moments_rejected():
    with pytest.raises(FitError):
        BurstyLogNormal(1.0, 100, 200, 150, 500)


def test_mean_outside_bounds_rejected():
    with pytest.raises(ValueError):
        BurstyLogNormal(1.0, 100, 200, 300, 10)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.1, 0.9), st.floats(0.05, 0.25))
def test_fit_recovers_moments(frac, rel_std):
    # moments of an actual truncated lognormal are always feasible
    lo, hi = 1e3, 1e6
    mean = lo + frac * (hi - lo) * 0.5
    mu0, s0 = np.log(mean), rel_std * 3
    m, s = truncated_moments(mu0, s0, lo, hi)
    mu, sigma = fit_truncated_lognormal(m, s, lo, hi)
    m2, s2 = truncated_moments(mu, sigma, lo, hi)
    assert m2 == pytest.approx(m, rel=0.01)
    assert s2 == pytest.approx(s, rel=0.05)


# ---------------------------------------------------------------- arrivals

def test_poisson_count():
    tr = BurstyLogNormal(**SMALL)
    t = sample_arrivals(tr, 1000.0, np.random.default_rng(3))
    assert abs(len(t) - 5000) <= 3 * np.sqrt(5000)


def test_short_horizon_mostly_empty():
    tr = BurstyLogNormal(**LARGE)
    counts = [len(sample_arrivals(tr, 1e-3, np.random.default_rng(s))) for s in range(200)]
    assert np.mean(np.array(counts) == 0) > 0.95


@given(st.integers(0, 10_000))
def test_arrivals_sorted_strictly(seed):
    t = sample_arrivals(BurstyLogNormal(**SMALL), 20.0, np.random.default_rng(seed))
    assert np.all(np.diff(t) > 0)
    assert np.all((t >= 0) & (t < 20.0))


def test_disjoint_interval_counts_uncorrelated():
    tr = BurstyLogNormal(**SMALL)
    a, b = [], []
    for s in range(400):
        t = sample_arrivals(tr, 2.0, np.random.default_rng(s))
        a.append(np.sum(t < 1.0))
        b.append(np.sum(t >= 1.0))
    r = np.corrcoef(a, b)[0, 1]
    assert abs(r) < 3 / np.sqrt(400)


# ---------------------------------------------------------------- TCP ACKs

@pytest.mark.parametrize("n, l, want", [(50, 592, 29600), (0, 592, 0), (1, 592, 74 * 8)])
def test_tcp_ack_bits(n, l, want):
    assert tcp_ack_bits(n, l) == want


def test_tcp_ack_coalescing():
    assert tcp_ack_bits(50, 592, coalescing=2) == pytest.approx(14800)


# ---------------------------------------------------------------- traces

def test_trace_csv(tmp_path):
    tr = BurstyLogNormal(**SMALL)
    times, sizes, ues = generate_trace(tr, 4, 2.0, np.random.default_rng(4))
    assert np.all(np.diff(times) >= 0)
    assert set(np.unique(ues)) <= set(range(4))
    p = tmp_path / "trace.csv"
    write_trace_csv(p, times, sizes, ues, comment="seed=4")
    lines = p.read_text().splitlines()
    assert lines[0].startswith("#")
    assert lines[1] == "arrival_time_s,size_bits,ue_id"
    assert len(lines) == 2 + len(times)
