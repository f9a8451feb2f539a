"""Scenario-level analytic predictions: the closed forms evaluated with the
TTI statistics a traffic model induces, used as the oracle for simulator runs.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import SnrDistribution
from .frame import TtiMode, n_symbols
from .overhead import OverheadReport, sr_overhead, cqi_overhead, total_overhead
from .traffic import BurstyLogNormal, FullBufferTcp, NoTraffic, sample_pdu_size
from .utilization import UtilizationReport, _ratio_with_ci, _shard_sums, util_bursty, util_tcp

__all__ = ["TtiStats", "bursty_tti_statistics", "AnalyticPrediction", "analytic_prediction",
           "tti_weighted", "scenario_utilization"]


@dataclass(frozen=True)
class TtiStats:
    """What a bursty traffic mix does to the TTI stream.

    ``p_ul`` is the share of TTIs (not packets) in the UL; ``e_tti`` the
    mean allocated length of one TTI. ``tti_dl``/``tti_ul`` count TTIs per
    UE of the population, since weak UEs need more TTIs per packet.
    """

    eta: float
    ci95: float
    p_ul: float
    e_tti: float
    n_samples: int
    tti_dl: np.ndarray | None = None
    tti_ul: np.ndarray | None = None


def bursty_tti_statistics(scenario, snr: SnrDistribution | None = None,
                          n_samples: int | None = None, seed=None) -> TtiStats:
    """Monte Carlo over (size, UE, direction) for the scenario's bursty traffic.

    Each PDU picks a UE uniformly from ``snr`` and goes UL with probability
    ``scenario.p_ul``. Fixed mode charges whole TTIs; flexible mode charges
    whole symbols, split into TTIs of at most ``T_TTI,max``.
    """
    tr = scenario.traffic
    if not isinstance(tr, BurstyLogNormal):
        raise TypeError("TTI statistics need bursty traffic")
    fp = scenario.frame
    n = scenario.monte_carlo.n_samples if n_samples is None else n_samples
    rng = np.random.default_rng(scenario.monte_carlo.seed if seed is None else seed)
    rho_dl, rho_ul = scenario.rho_atoms(snr)
    w = scenario.budget.bandwidth_hz
    bits = sample_pdu_size(tr, rng, n)
    idx = rng.integers(0, len(rho_dl), n)
    up = rng.uniform(size=n) < scenario.p_ul
    rho = np.where(up, rho_ul[idx], rho_dl[idx])
    t = bits / (rho * w)
    if fp.tti_mode is TtiMode.FIXED:
        n_tti = np.asarray(n_symbols(t, fp.t_tti_max), dtype=float)
        alloc = n_tti * fp.t_tti_max
    else:
        nsym = np.asarray(n_symbols(t, fp.t_sym), dtype=float)
        n_tti = np.ceil(nsym / fp.tti_symbols)
        alloc = nsym * fp.t_sym
    eta, ci = _ratio_with_ci(_shard_sums(t, alloc))
    n_ue = len(rho_dl)
    return TtiStats(eta, ci, float(n_tti[up].sum() / n_tti.sum()),
                    float(alloc.sum() / n_tti.sum()), n,
                    np.bincount(idx[~up], n_tti[~up], n_ue), np.bincount(idx[up], n_tti[up], n_ue))


def tti_weighted(snr: SnrDistribution, counts, resolution: int = 100_000) -> SnrDistribution:
    """Population in which each UE appears in proportion to ``counts``."""
    counts = np.asarray(counts, dtype=float)
    if counts.sum() <= 0:
        return snr
    reps = np.rint(counts / counts.sum() * resolution).astype(int)
    return snr.subset(np.repeat(np.arange(len(counts)), reps))


@dataclass(frozen=True)
class AnalyticPrediction:
    utilization: float | None
    utilization_ci95: float
    overhead: OverheadReport
    p_ul: float | None
    e_tti: float | None


def analytic_prediction(scenario, snr: SnrDistribution | None = None,
                        n_samples: int | None = None, seed=None) -> AnalyticPrediction:
    """Utilization and overhead the closed forms predict for ``scenario``.

    ``snr`` fixes the UE population (e.g. the UEs of one simulated drop).
    """
    snr = scenario.covered_snr() if snr is None else snr
    tr = scenario.traffic
    if isinstance(tr, NoTraffic):
        fp, c, ant = scenario.frame, scenario.control, scenario.antennas
        g = scenario.gamma_min("ul")
        w = scenario.budget.bandwidth_hz
        sr = c.sr.for_mode(fp.tti_mode)
        rep = OverheadReport(
            sr=sr_overhead(sr, scenario.n_ue, scenario.arch, c.sr_mode, ant, g, fp, w),
            cqi=cqi_overhead(c.cqi.for_mode(fp.tti_mode), scenario.n_ue, scenario.arch,
                             c.sr_mode, ant, g, fp, w),
            arch=scenario.arch.label())
        return AnalyticPrediction(None, 0.0, rep, None, None)
    if isinstance(tr, FullBufferTcp):
        u: UtilizationReport = util_tcp(scenario.frame, tr.rho_dl, tr.rho_ul, tr.l_data_bits,
                                        tr.l_ack_bits, scenario.budget.bandwidth_hz, tr.coalescing)
        e_tti = scenario.mean_tti()
        rep = total_overhead(scenario, snr=snr, e_tti=e_tti, p_ul=0.5)
        return AnalyticPrediction(u.eta, 0.0, rep, 0.5, e_tti)
    st = bursty_tti_statistics(scenario, snr, n_samples, seed)
    rep = total_overhead(scenario, snr=snr, e_tti=st.e_tti, p_ul=st.p_ul,
                         snr_dl_tti=tti_weighted(snr, st.tti_dl),
                         snr_ul_tti=tti_weighted(snr, st.tti_ul))
    return AnalyticPrediction(st.eta, st.ci95, rep, st.p_ul, st.e_tti)


def scenario_utilization(scenario, n_samples: int | None = None, seed=None,
                         direction: str = "dl") -> UtilizationReport:
    """Utilization of the data direction under study in the scenario's TTI mode.

    Full-buffer TCP uses the closed form; bursty traffic samples PDU sizes
    against the covered UEs' spectral efficiencies.
    """
    tr = scenario.traffic
    w = scenario.budget.bandwidth_hz
    if isinstance(tr, FullBufferTcp):
        return util_tcp(scenario.frame, tr.rho_dl, tr.rho_ul, tr.l_data_bits, tr.l_ack_bits,
                        w, tr.coalescing)
    if not isinstance(tr, BurstyLogNormal):
        raise TypeError("scenario has no data traffic")
    mc = scenario.monte_carlo
    return util_bursty(tr, scenario.frame, scenario.covered_snr(), scenario.budget,
                       mc.n_samples if n_samples is None else n_samples,
                       mc.seed if seed is None else seed, antennas=scenario.antennas,
                       arch=scenario.arch, se=scenario.spectral, direction=direction)
