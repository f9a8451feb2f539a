import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mmframe.channel import (AntennaConfig, BeamformingArch, LinkBudget, PathLossModel,
                             SnrDistribution, SnrSample, SpectralEfficiencyParams, bf_gain, db,
                             effective_snr, from_db, omni_gain, quantized_snr, sample_omni_snr,
                             sample_snr_distribution, snr_quantile_quadrature,
                             spectral_efficiency, OUTAGE)

SE = SpectralEfficiencyParams()


# ---------------------------------------------------------------- gains

@pytest.mark.parametrize("n, want_db", [(64, 18.06), (16, 12.04), (1, 0.0)])
def test_bf_gain_db(n, want_db):
    assert bf_gain(n) == n
    assert db(bf_gain(n)) == pytest.approx(want_db, abs=0.005)


def test_bf_gain_rejects_zero():
    with pytest.raises(ValueError):
        bf_gain(0)


@pytest.mark.parametrize("arch, k", [(BeamformingArch.analog(), 1), (BeamformingArch.hybrid(2), 2),
                                     (BeamformingArch.hybrid(64), 64)])
def test_omni_gain(arch, k):
    assert omni_gain(arch) == k


def test_omni_gain_digital_not_applicable():
    with pytest.raises(ValueError):
        omni_gain(BeamformingArch.digital())


def test_hybrid_needs_two_streams():
    with pytest.raises(ValueError):
        BeamformingArch.hybrid(1)


def test_antenna_config_validates():
    with pytest.raises(ValueError):
        AntennaConfig(0, 16)


@given(st.integers(1, 64))
def test_omni_gain_bounded_by_full_gain(k):
    arch = BeamformingArch.analog() if k == 1 else BeamformingArch.hybrid(k)
    assert omni_gain(arch) <= bf_gain(64)
    assert (omni_gain(arch) == bf_gain(64)) == (k == 64)


# ---------------------------------------------------------------- quantization

def test_quantized_snr_ideal_identity():
    g = np.array([1e-3, 1.0, 1e4])
    np.testing.assert_array_equal(quantized_snr(g, 0.0), g)


def test_quantized_snr_asymptote():
    assert quantized_snr(1e12, 0.1) == pytest.approx(10.0, rel=1e-9)


def test_quantized_snr_at_inverse_alpha():
    assert quantized_snr(1 / 0.05, 0.05) == pytest.approx(1 / (2 * 0.05))


@given(st.floats(1e-6, 1e6), st.floats(1e-4, 10.0))
def test_quantized_snr_bounds(g, a):
    q = quantized_snr(g, a)
    assert q <= min(g, 1 / a) * (1 + 1e-12)
    assert q < 1 / a


@given(st.floats(1e-6, 1e6), st.floats(1e-4, 10.0), st.floats(1.001, 10.0))
def test_quantized_snr_increasing(g, a, f):
    assert quantized_snr(g * f, a) > quantized_snr(g, a)


# ---------------------------------------------------------------- spectral efficiency

def test_spectral_efficiency_cap():
    assert spectral_efficiency(40.0, SE) == pytest.approx(4.8)


def test_spectral_efficiency_at_delta():
    assert spectral_efficiency(3.0, SE) == pytest.approx(0.83)


def test_spectral_efficiency_low_snr():
    # independent evaluation through log1p
    want = 0.83 * math.log1p(10 ** (-3.3)) / math.log(2)
    assert spectral_efficiency(-30.0, SE) == pytest.approx(want, rel=1e-9)
    assert want == pytest.approx(6.0e-4, rel=0.01)


@given(st.floats(-80, 80), st.floats(0.0, 20.0))
def test_spectral_efficiency_monotone_and_clamped(s, ds):
    a, b = spectral_efficiency(s, SE), spectral_efficiency(s + ds, SE)
    assert 0 <= a <= b <= SE.rho_max


def test_spectral_efficiency_saturates_above_crossover():
    x = SE.rho_max / SE.alpha_bw
    crossover = db(2 ** x - 1) + SE.delta_loss_db
    assert spectral_efficiency(crossover + 0.01, SE) == SE.rho_max
    assert spectral_efficiency(crossover - 0.5, SE) < SE.rho_max


# ---------------------------------------------------------------- effective SNR

def test_effective_snr_full_gain():
    g = effective_snr(from_db(-39.0), bf_gain(64), bf_gain(16), BeamformingArch.analog())
    assert db(g) == pytest.approx(-39 + 10 * math.log10(64 * 16), abs=1e-9)
    assert db(g) == pytest.approx(-9.0, abs=0.2)


def test_effective_snr_omni_bs():
    g = effective_snr(from_db(-39.0), 1.0, bf_gain(16))
    assert db(g) == pytest.approx(-27.0, abs=0.05)


def test_effective_snr_quantized_digital():
    g = effective_snr(10.0, 1.0, 1.0, BeamformingArch.digital(0.05))
    assert g == pytest.approx(10 / 1.5)


def test_effective_snr_from_sample():
    s = SnrSample(gamma_dl=0.01, gamma_ul=0.001)
    assert effective_snr((s, "ul"), 10.0, 2.0) == pytest.approx(0.02)


# ---------------------------------------------------------------- path loss and sampling

@given(st.floats(1.0, 300.0))
def test_state_probabilities_sum_to_one(d):
    p = PathLossModel().state_probabilities(d)
    assert sum(float(x) for x in p) == pytest.approx(1.0)
    assert all(float(x) >= -1e-12 for x in p)


def test_zero_path_loss_unit_snr():
    # transmit power equal to the noise power over the band gives 0 dB
    b = LinkBudget(p_tx_bs_dbm=-174 + 7 + 90, noise_figure_dl_db=7.0)
    assert b.snr_offset_db("dl") == pytest.approx(0.0)


def test_dl_ul_offset_exact():
    b = LinkBudget()
    d = sample_snr_distribution(b, PathLossModel(), 2000, np.random.default_rng(3)).connected
    diff = db(d.gamma_dl) - db(d.gamma_ul)
    want = (b.p_tx_bs_dbm - b.p_tx_ue_dbm) - (b.noise_figure_dl_db - b.noise_figure_ul_db)
    np.testing.assert_allclose(diff, want, atol=1e-9)


def test_no_outage_inside_default_cell():
    # outage probability is zero below ~156 m
    assert PathLossModel().state_probabilities(100.0)[2] == 0.0


def test_outage_draws_flagged():
    plm = PathLossModel(cell_radius_m=300.0)
    d = sample_snr_distribution(LinkBudget(), plm, 5000, np.random.default_rng(1))
    out = d.state == OUTAGE
    assert out.any()
    assert np.all(d.gamma_dl[out] == 0)
    assert len(d.connected) == int((~out).sum())


def test_sample_omni_snr_single():
    s = sample_omni_snr(LinkBudget(), PathLossModel(), np.random.default_rng(0))
    assert isinstance(s, SnrSample)
    assert s.in_outage or s.gamma_dl > 0


def test_distance_area_uniform():
    plm = PathLossModel()
    r = plm.sample_distance(np.random.default_rng(5), 200_000)
    # P(r <= R/2) for area-uniform over [1, 100]
    want = (50 ** 2 - 1) / (100 ** 2 - 1)
    assert np.mean(r <= 50) == pytest.approx(want, abs=0.005)


@pytest.mark.parametrize("direction, q", [("ul", 0.05), ("ul", 0.5), ("dl", 0.05), ("dl", 0.5)])
def test_percentiles_match_quadrature(direction, q):
    d = sample_snr_distribution(LinkBudget(), PathLossModel(), 100_000, np.random.default_rng(11))
    emp = d.percentile_db(direction, 100 * q)
    quad = snr_quantile_quadrature(LinkBudget(), PathLossModel(), direction, q)
    assert emp == pytest.approx(quad, abs=0.3)


def test_snr_distribution_csv(tmp_path):
    d = sample_snr_distribution(LinkBudget(), PathLossModel(), 50, np.random.default_rng(2))
    p = tmp_path / "snr.csv"
    d.to_csv(p)
    lines = p.read_text().splitlines()
    header = [l for l in lines if not l.startswith("#")][0]
    assert header == "distance_m,state,gamma_dl_db,gamma_ul_db"


def test_covered_filters_both_directions():
    d = SnrDistribution.from_gammas([1.0, 0.1, 0.01], [1.0, 0.001, 0.1])
    c = d.covered(0.05, 0.05)
    np.testing.assert_array_equal(c.gamma_dl, [1.0])
