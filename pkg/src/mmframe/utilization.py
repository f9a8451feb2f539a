"""Utilization factor (minimum airtime over allocated airtime) for fixed and
flexible TTI designs.

The full-buffer TCP model is closed form. Bursty traffic is estimated by
Monte Carlo over paired (PDU size, spectral efficiency) draws; the estimate
is a ratio of sums, so its confidence interval uses the delta method.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import (AntennaConfig, BeamformingArch, LinkBudget, SnrDistribution,
                      SpectralEfficiencyParams, db, effective_snr, spectral_efficiency)
from .frame import FrameParams, TtiMode, allocation_time, n_symbols, round_to_symbols
from .traffic import BurstyLogNormal, FullBufferTcp, sample_pdu_size

__all__ = [
    "UtilizationReport", "ModelBreakdown", "tcp_segments_per_tti", "tcp_ack_time_min",
    "util_tcp", "rho_atoms", "util_bursty_fixed", "util_bursty_flexible",
    "util_bursty", "util_from_times", "eta_fixed_closed_form", "mean_tti_duration",
    "sample_tx_times",
]


class ModelBreakdown(ValueError):
    """Raised when the TCP ACK stream no longer fits in one reverse TTI."""


@dataclass(frozen=True)
class UtilizationReport:
    eta: float
    mode: TtiMode
    traffic_kind: str
    n_samples: int = 0
    ci95: float = 0.0
    t_tti_max_symbols: int = 0

    @property
    def converged(self) -> bool:
        return self.ci95 <= 0.05 * self.eta

    def as_row(self) -> dict:
        return {"mode": self.mode.value, "traffic": self.traffic_kind,
                "t_tti_max_symbols": self.t_tti_max_symbols,
                "eta": self.eta, "ci95": self.ci95}


def tcp_segments_per_tti(t_tti_max: float, rho_dl: float, w_tot: float, l_data: float) -> float:
    """S_N, kept fractional."""
    if t_tti_max < 0 or rho_dl <= 0 or w_tot <= 0 or l_data <= 0:
        raise ValueError("invalid TCP segment inputs")
    return t_tti_max * rho_dl * w_tot / l_data


def tcp_ack_time_min(s_n: float, l_ack: float, rho_ul: float, w_tot: float) -> float:
    if s_n < 0 or l_ack < 0:
        raise ValueError("inputs must be >= 0")
    return s_n * l_ack / (rho_ul * w_tot)


def util_tcp(fp: FrameParams, rho_dl: float, rho_ul: float, l_data: float, l_ack: float,
             w_tot: float = 1e9, coalescing: float = 1.0) -> UtilizationReport:
    """Full-buffer TCP: one full DL data TTI, then the ACK batch on the UL."""
    t = fp.t_tti_max
    s_n = tcp_segments_per_tti(t, rho_dl, w_tot, l_data)
    t_ack = tcp_ack_time_min(s_n, l_ack / coalescing, rho_ul, w_tot)
    if t_ack > t:
        raise ModelBreakdown(f"ACK time {t_ack:.3e}s exceeds the TTI {t:.3e}s")
    if fp.tti_mode is TtiMode.FIXED:
        eta = (t + t_ack) / (2 * t)
    else:
        eta = (t + t_ack) / (t + round_to_symbols(t_ack, fp.t_sym))
    return UtilizationReport(float(eta), fp.tti_mode, FullBufferTcp.kind, 0, 0.0, fp.tti_symbols)


def rho_atoms(snr: SnrDistribution, antennas: AntennaConfig, arch: BeamformingArch | None = None,
              se: SpectralEfficiencyParams = SpectralEfficiencyParams(),
              direction: str = "dl") -> np.ndarray:
    """Spectral efficiency of each UE in ``snr`` with full directional gains."""
    g = effective_snr(snr.gammas(direction), antennas.g_bs, antennas.g_ue, arch)
    with np.errstate(divide="ignore"):
        rho = np.atleast_1d(spectral_efficiency(db(g), se))
    if np.any(rho <= 0):
        raise ValueError("SNR population contains zero-rate links (outage samples?)")
    return rho


def sample_tx_times(traffic: BurstyLogNormal, rho: np.ndarray, w_tot: float,
                    n: int, rng) -> np.ndarray:
    """Minimum airtimes b/(rho W) for ``n`` independent (size, UE) pairs."""
    bits = sample_pdu_size(traffic, rng, n)
    r = rho[rng.integers(0, len(rho), n)]
    return bits / (r * w_tot)


def _shard_sums(t_min, alloc):
    return np.array([len(t_min), t_min.sum(), alloc.sum(), (t_min ** 2).sum(),
                     (alloc ** 2).sum(), (t_min * alloc).sum()])


def _ratio_with_ci(s):
    n, sx, sy, sxx, syy, sxy = s
    eta = sx / sy
    # variance of x - eta*y, divided by mean(y)^2 (delta method for a ratio)
    var_z = (sxx - 2 * eta * sxy + eta ** 2 * syy) / n - ((sx - eta * sy) / n) ** 2
    se = np.sqrt(max(var_z, 0.0) / n) / (sy / n)
    return float(eta), float(1.96 * se)


def util_from_times(t_min, fp: FrameParams) -> UtilizationReport:
    """Utilization of a given set of minimum airtimes under ``fp``."""
    t_min = np.asarray(t_min, dtype=float)
    eta, ci = _ratio_with_ci(_shard_sums(t_min, allocation_time(t_min, fp)))
    return UtilizationReport(eta, fp.tti_mode, "trace", len(t_min), ci, fp.tti_symbols)


def util_bursty(traffic: BurstyLogNormal, fp: FrameParams, snr: SnrDistribution,
                budget: LinkBudget, n_samples: int = 100_000, seed=0, *,
                antennas: AntennaConfig = AntennaConfig(), arch: BeamformingArch | None = None,
                se: SpectralEfficiencyParams = SpectralEfficiencyParams(),
                direction: str = "dl", shards: int = 1, rho=None) -> UtilizationReport:
    """Monte Carlo utilization in the mode carried by ``fp``.

    Each shard draws ``n_samples // shards`` pairs from its own spawned seed;
    results are deterministic for a fixed (seed, shards) pair.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rho = rho_atoms(snr, antennas, arch, se, direction) if rho is None else np.asarray(rho, float)
    seeds = np.random.SeedSequence(seed).spawn(shards)
    per = [n_samples // shards + (i < n_samples % shards) for i in range(shards)]
    total = np.zeros(6)
    for ss, n in zip(seeds, per):
        t_min = sample_tx_times(traffic, rho, budget.bandwidth_hz, n, np.random.default_rng(ss))
        total += _shard_sums(t_min, allocation_time(t_min, fp))
    eta, ci = _ratio_with_ci(total)
    return UtilizationReport(eta, fp.tti_mode, traffic.kind, n_samples, ci, fp.tti_symbols)


def util_bursty_fixed(traffic, fp, snr, budget, n_samples=100_000, seed=0, **kw):
    return util_bursty(traffic, fp.with_mode(TtiMode.FIXED), snr, budget, n_samples, seed, **kw)


def util_bursty_flexible(traffic, fp, snr, budget, n_samples=100_000, seed=0, **kw):
    return util_bursty(traffic, fp.with_mode(TtiMode.FLEXIBLE), snr, budget, n_samples, seed, **kw)


def eta_fixed_closed_form(mean_bits: float, mean_inv_rho: float, w_tot: float,
                          t_tti_max: float) -> float:
    """Single-TTI fixed-mode utilization, E[1/rho] E[b] / (W T_TTI,max)."""
    return mean_inv_rho * mean_bits / (w_tot * t_tti_max)


def mean_tti_duration(fp: FrameParams, traffic=None, t_min=None, w_tot: float = 1e9) -> float:
    """Mean length of one scheduled TTI.

    Fixed mode is always the maximum TTI. In flexible mode a transmission of
    Q(t) is split into ceil(Q(t)/T_TTI,max) TTIs, so the mean is
    E[Q(t)] / E[number of TTIs]. For full-buffer TCP the TTIs alternate
    between a full data TTI and the ACK TTI.
    """
    if fp.tti_mode is TtiMode.FIXED:
        return fp.t_tti_max
    if isinstance(traffic, FullBufferTcp):
        s_n = tcp_segments_per_tti(fp.t_tti_max, traffic.rho_dl, w_tot, traffic.l_data_bits)
        t_ack = tcp_ack_time_min(s_n, traffic.l_ack_bits / traffic.coalescing, traffic.rho_ul, w_tot)
        return 0.5 * (fp.t_tti_max + round_to_symbols(t_ack, fp.t_sym))
    if t_min is None:
        raise ValueError("flexible bursty traffic needs sampled airtimes")
    nsym = np.asarray(n_symbols(t_min, fp.t_sym))
    n_tti = np.maximum(np.ceil(nsym / fp.tti_symbols), 1)
    return float(nsym.sum() * fp.t_sym / n_tti.sum())
