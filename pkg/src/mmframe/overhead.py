"""Closed-form control-channel overhead fractions and the Table II aggregator.

Every fraction is airtime (times occupied bandwidth share) spent on a
control channel divided by the airtime it is normalized against: the
report period for the semi-static SR/CQI slots, the mean TTI duration for
the per-TTI grant and ACK channels.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .channel import (AntennaConfig, BeamformingArch, SnrDistribution, effective_snr,
                      from_db, omni_gain)
from .frame import FrameParams, TtiMode, n_symbols, round_to_symbols

__all__ = [
    "ControlMsg", "SrMode", "SrLayout", "OverheadReport", "InfeasibleError",
    "control_airtime", "sr_slot_layout", "sr_overhead", "cqi_overhead",
    "ul_grant_overhead", "dl_grant_overhead", "dl_ack_overhead", "ul_ack_overhead",
    "total_overhead", "TableII", "table2", "format_table2", "CHANNELS",
]

CHANNELS = ("sr", "cqi", "ul_grant", "dl_grant", "dl_ack", "ul_ack")


class InfeasibleError(ValueError):
    """A control channel would need the whole airtime (or more)."""


class SrMode(str, Enum):
    TDMA = "tdma"
    FDMA = "fdma"
    AUTO = "auto"


@dataclass(frozen=True)
class ControlMsg:
    """A control message type.

    ``bits`` applies in fixed-TTI mode; ``bits_flexible`` (if set) replaces
    it in flexible mode, where messages carry extra sizing fields.
    ``period`` is the report period in seconds for periodic channels
    (None disables the channel).
    """

    bits: float
    eb_n0_db: float = 6.0
    period: float | None = None
    bits_flexible: float | None = None

    def __post_init__(self):
        if self.bits < 0 or (self.bits_flexible is not None and self.bits_flexible < 0):
            raise ValueError("bit count must be >= 0")
        if self.period is not None and self.period <= 0:
            raise ValueError("period must be > 0")

    @property
    def eb_n0(self) -> float:
        return float(from_db(self.eb_n0_db))

    def for_mode(self, mode: TtiMode) -> "ControlMsg":
        if TtiMode(mode) is TtiMode.FLEXIBLE and self.bits_flexible is not None:
            return replace(self, bits=self.bits_flexible, bits_flexible=None)
        return replace(self, bits_flexible=None)


def control_airtime(msg: ControlMsg, gamma_eff, w: float):
    """Unrounded time to deliver ``msg`` at effective SNR ``gamma_eff`` over bandwidth ``w``."""
    return msg.bits * msg.eb_n0 / (w * np.asarray(gamma_eff, dtype=float))


def _gammas(snr, direction):
    if isinstance(snr, SnrDistribution):
        return snr.gammas(direction)
    return np.atleast_1d(np.asarray(snr, dtype=float))


def _subsample(g, n_samples, seed):
    if n_samples is None or n_samples >= len(g):
        return g
    rng = np.random.default_rng(seed)
    return g[rng.integers(0, len(g), n_samples)]


@dataclass(frozen=True)
class SrLayout:
    """How the periodic report slots are laid out inside one period.

    ``groups`` is the analytic number of sequential slots (fractional for
    hybrid TDMA); ``sim_groups`` the integer count a real frame needs.
    """

    mode: SrMode
    slot_symbols: int
    groups: float
    sim_groups: int
    users_per_group: int
    period: float

    def fraction(self, t_sym: float) -> float:
        return self.groups * self.slot_symbols * t_sym / self.period

    @property
    def total_symbols(self) -> int:
        return self.sim_groups * self.slot_symbols


def sr_slot_layout(msg: ControlMsg, n_ue: int, arch: BeamformingArch, mode: SrMode,
                   antennas: AntennaConfig, gamma_min_ul: float, fp: FrameParams,
                   w_tot: float = 1e9) -> SrLayout:
    if n_ue < 1:
        raise ValueError("n_ue must be >= 1")
    if gamma_min_ul <= 0:
        raise ValueError("gamma_min_ul must be > 0")
    if msg.period is None:
        raise ValueError("periodic message needs a period")
    mode = SrMode(mode)
    g_ue = antennas.g_ue

    def slot(g_bs):
        t = control_airtime(msg, effective_snr(gamma_min_ul, g_bs, g_ue, arch), w_tot)
        return int(n_symbols(float(t), fp.t_sym))

    if arch.is_digital:
        return SrLayout(SrMode.FDMA, slot(antennas.g_bs), 1.0, 1, n_ue, msg.period)
    k = arch.streams
    tdma = SrLayout(SrMode.TDMA, slot(antennas.g_bs), n_ue / k, math.ceil(n_ue / k),
                    min(k, n_ue), msg.period)
    fdma = SrLayout(SrMode.FDMA, slot(omni_gain(arch)), 1.0, 1, n_ue, msg.period)
    if mode is SrMode.TDMA:
        return tdma
    if mode is SrMode.FDMA:
        return fdma
    return tdma if tdma.fraction(fp.t_sym) <= fdma.fraction(fp.t_sym) else fdma


def sr_overhead(msg: ControlMsg, n_ue: int, arch: BeamformingArch, mode: SrMode,
                antennas: AntennaConfig, gamma_min_ul: float, fp: FrameParams,
                w_tot: float = 1e9) -> float:
    """Share of airtime reserved for periodic scheduling requests."""
    if msg.period is None or msg.bits == 0:
        return 0.0
    frac = sr_slot_layout(msg, n_ue, arch, mode, antennas, gamma_min_ul, fp, w_tot).fraction(fp.t_sym)
    if frac >= 1:
        raise InfeasibleError(f"report slots need {frac:.3f} of the airtime")
    return frac


def cqi_overhead(msg: ControlMsg, n_ue: int, arch: BeamformingArch, mode: SrMode,
                 antennas: AntennaConfig, gamma_min_ul: float, fp: FrameParams,
                 w_tot: float = 1e9) -> float:
    """Periodic CQI reports, dimensioned like the SR."""
    return sr_overhead(msg, n_ue, arch, mode, antennas, gamma_min_ul, fp, w_tot)


def _check_common(p_ul, e_tti):
    if not 0 <= p_ul <= 1:
        raise ValueError("p_ul must lie in [0, 1]")
    if not e_tti > 0:
        raise ValueError("e_tti must be > 0")


def _finish(value):
    if value >= 1:
        raise InfeasibleError(f"control channel needs {value:.3f} of the airtime")
    return float(value)


def _dedicated_or_shared(msg, arch, antennas, gammas, weight, e_tti, fp, w_tot, w_sub=None):
    """Shared body of the UL-grant and DL-ACK formulas (both BS to UE)."""
    g = effective_snr(gammas, antennas.g_bs, antennas.g_ue, arch)
    if not arch.multiplexes_control:
        t = control_airtime(msg, g, w_tot)
        return weight / e_tti * float(np.mean(round_to_symbols(t, fp.t_sym)))
    if w_sub is not None:
        t = control_airtime(msg, g, w_sub)
        return w_sub * weight / (w_tot * e_tti) * float(np.mean(round_to_symbols(t, fp.t_sym)))
    return weight * float(np.mean(control_airtime(msg, g, w_tot))) / e_tti


def ul_grant_overhead(msg: ControlMsg, arch: BeamformingArch, antennas: AntennaConfig,
                      snr_dl, p_ul: float, e_tti: float, fp: FrameParams,
                      w_tot: float = 1e9, w_grant: float | None = None,
                      n_samples: int | None = None, seed=None) -> float:
    """UL grants: a dedicated full-band transmission under analog BF,
    a frequency slice beside other traffic otherwise.

    ``w_grant`` selects the rounded form with an explicit grant bandwidth;
    by default the slice is assumed sized to avoid any rounding.
    """
    _check_common(p_ul, e_tti)
    g = _subsample(_gammas(snr_dl, "dl"), n_samples, seed)
    return _finish(_dedicated_or_shared(msg, arch, antennas, g, p_ul, e_tti, fp, w_tot, w_grant))


def dl_grant_overhead(msg: ControlMsg, antennas: AntennaConfig, snr_dl, p_ul: float,
                      e_tti: float, w_tot: float = 1e9, arch: BeamformingArch | None = None,
                      n_samples: int | None = None, seed=None) -> float:
    """DL grants ride in-band with their own data for every architecture."""
    _check_common(p_ul, e_tti)
    g = effective_snr(_subsample(_gammas(snr_dl, "dl"), n_samples, seed),
                      antennas.g_bs, antennas.g_ue, arch)
    return _finish((1 - p_ul) * float(np.mean(control_airtime(msg, g, w_tot))) / e_tti)


def dl_ack_overhead(msg: ControlMsg, arch: BeamformingArch, antennas: AntennaConfig,
                    snr_dl, p_ul: float, e_tti: float, fp: FrameParams,
                    w_tot: float = 1e9, n_samples: int | None = None, seed=None) -> float:
    """ACKs from the BS for UL data; same constraints as the UL grant."""
    _check_common(p_ul, e_tti)
    g = _subsample(_gammas(snr_dl, "dl"), n_samples, seed)
    return _finish(_dedicated_or_shared(msg, arch, antennas, g, p_ul, e_tti, fp, w_tot))


def ul_ack_overhead(msg: ControlMsg, arch: BeamformingArch, antennas: AntennaConfig,
                    snr_ul, p_ul: float, e_tti: float, rho_ack: float, fp: FrameParams,
                    w_tot: float = 1e9, n_samples: int | None = None, seed=None) -> float:
    """ACKs from the UE for DL data.

    Analog BF sends each alone on the full band; otherwise the ACK is
    bandwidth limited at spectral efficiency ``rho_ack``.
    """
    _check_common(p_ul, e_tti)
    if not arch.multiplexes_control:
        g = effective_snr(_subsample(_gammas(snr_ul, "ul"), n_samples, seed),
                          antennas.g_bs, antennas.g_ue, arch)
        t = control_airtime(msg, g, w_tot)
        return _finish((1 - p_ul) / e_tti * float(np.mean(round_to_symbols(t, fp.t_sym))))
    if rho_ack <= 0:
        raise ValueError("rho_ack must be > 0")
    return _finish((1 - p_ul) * msg.bits / (rho_ack * e_tti * w_tot))


@dataclass(frozen=True)
class OverheadReport:
    sr: float = 0.0
    cqi: float = 0.0
    ul_grant: float = 0.0
    dl_grant: float = 0.0
    dl_ack: float = 0.0
    ul_ack: float = 0.0
    arch: str = ""
    sr_mode: str = ""
    e_tti: float = 0.0
    p_ul: float = 0.0

    @property
    def total(self) -> float:
        return sum(getattr(self, c) for c in CHANNELS)

    def as_dict(self) -> dict:
        d = {c: getattr(self, c) for c in CHANNELS}
        d.update(total=self.total, arch=self.arch, sr_mode=self.sr_mode,
                 e_tti=self.e_tti, p_ul=self.p_ul)
        return d


def total_overhead(scenario, snr=None, e_tti: float | None = None, p_ul: float | None = None,
                   arch: BeamformingArch | None = None, sr_mode: SrMode | None = None,
                   n_ue: int | None = None, sr_msg: ControlMsg | None = None,
                   snr_dl_tti=None, snr_ul_tti=None) -> OverheadReport:
    """All control channels for ``scenario``.

    Parameters
    ----------
    snr : SnrDistribution, optional
        Population for the per-UE expectations; defaults to the scenario's
        covered UEs.
    e_tti, p_ul : float, optional
        Override the mean TTI length and the UL share of TTIs.
    arch, sr_mode, n_ue, sr_msg :
        Override the scenario's architecture, SR mode, user count and SR message.
    snr_dl_tti, snr_ul_tti : SnrDistribution, optional
        Populations weighted by DL and UL TTIs. Channels triggered by a DL
        TTI (DL grant, UL ACK) or a UL TTI (UL grant, DL ACK) average over
        these instead of ``snr`` when given.
    """
    fp = scenario.frame
    arch = scenario.arch if arch is None else arch
    ctl = scenario.control
    mode = SrMode(ctl.sr_mode if sr_mode is None else sr_mode)
    n_ue = scenario.n_ue if n_ue is None else n_ue
    snr = scenario.covered_snr() if snr is None else snr
    e_tti = scenario.mean_tti() if e_tti is None else e_tti
    p_ul = scenario.p_ul if p_ul is None else p_ul
    s_dl = snr if snr_dl_tti is None else snr_dl_tti
    s_ul = snr if snr_ul_tti is None else snr_ul_tti
    w = scenario.budget.bandwidth_hz
    ant = scenario.antennas
    g_ul = scenario.gamma_min("ul")

    sr = (ctl.sr if sr_msg is None else sr_msg).for_mode(fp.tti_mode)
    grant = ctl.grant.for_mode(fp.tti_mode)
    ack = ctl.ack.for_mode(fp.tti_mode)
    cqi = ctl.cqi.for_mode(fp.tti_mode)
    layout = (sr_slot_layout(sr, n_ue, arch, mode, ant, g_ul, fp, w)
              if sr.period is not None else None)
    return OverheadReport(
        sr=sr_overhead(sr, n_ue, arch, mode, ant, g_ul, fp, w),
        cqi=cqi_overhead(cqi, n_ue, arch, mode, ant, g_ul, fp, w),
        ul_grant=ul_grant_overhead(grant, arch, ant, s_ul, p_ul, e_tti, fp, w),
        dl_grant=dl_grant_overhead(grant, ant, s_dl, p_ul, e_tti, w, arch),
        dl_ack=dl_ack_overhead(ack, arch, ant, s_ul, p_ul, e_tti, fp, w),
        ul_ack=ul_ack_overhead(ack, arch, ant, s_dl, p_ul, e_tti, ctl.rho_ack, fp, w),
        arch=arch.label(), sr_mode=layout.mode.value if layout else "",
        e_tti=e_tti, p_ul=p_ul)


@dataclass
class TableII:
    """Control overheads laid out as rows x architecture columns."""

    columns: list = field(default_factory=lambda: ["Analog TDMA", "Analog FDMA", "Hybrid (K=2)", "Digital"])
    rows: list = field(default_factory=list)      # (message, type, [values or None])
    totals: list = field(default_factory=list)    # one per architecture: analog, hybrid, digital
    reports: dict = field(default_factory=dict)

    def entry(self, message: str, kind: str = "") -> list:
        for m, k, vals in self.rows:
            if m == message and k == kind:
                return vals
        raise KeyError((message, kind))


def table2(scenario, snr=None, hybrid_k: int = 2, digital_alpha: float = 0.0) -> TableII:
    """Reproduce the per-message overhead table for the three architectures."""
    fp = scenario.frame
    ctl = scenario.control
    w = scenario.budget.bandwidth_hz
    ant = scenario.antennas
    g_ul = scenario.gamma_min("ul")
    analog = BeamformingArch.analog()
    hybrid = BeamformingArch.hybrid(hybrid_k)
    digital = BeamformingArch.digital(digital_alpha)
    snr = scenario.covered_snr() if snr is None else snr

    tab = TableII()
    for name, bits in ctl.sr_variants.items():
        msg = replace(ctl.sr, bits=bits, bits_flexible=None)
        vals = [sr_overhead(msg, scenario.n_ue, analog, SrMode.TDMA, ant, g_ul, fp, w),
                sr_overhead(msg, scenario.n_ue, analog, SrMode.FDMA, ant, g_ul, fp, w),
                sr_overhead(msg, scenario.n_ue, hybrid, SrMode.TDMA, ant, g_ul, fp, w),
                sr_overhead(msg, scenario.n_ue, digital, SrMode.AUTO, ant, g_ul, fp, w)]
        tab.rows.append(("Scheduling Request", name.capitalize(), vals))

    reports = {}
    for label, arch in (("analog", analog), ("hybrid", hybrid), ("digital", digital)):
        reports[label] = total_overhead(scenario, snr=snr, arch=arch, sr_mode=SrMode.AUTO)
    a, h, d = reports["analog"], reports["hybrid"], reports["digital"]
    tab.rows.append(("Uplink Grant", "", [a.ul_grant, None, h.ul_grant, d.ul_grant]))
    tab.rows.append(("Downlink Grant", "", [a.dl_grant, None, h.dl_grant, d.dl_grant]))
    tab.rows.append(("HARQ ACK", "DL", [a.dl_ack, None, h.dl_ack, d.dl_ack]))
    tab.rows.append(("HARQ ACK", "UL", [a.ul_ack, None, h.ul_ack, d.ul_ack]))
    tab.totals = [a.total, h.total, d.total]
    tab.reports = reports
    return tab


def _fmt(v):
    if v is None:
        return "N.A"
    return f"{v:.4f}" if v == 0 or v >= 1e-3 else f"{v:.6f}"


def format_table2(tab: TableII) -> str:
    head = ["Control Message", "Type"] + tab.columns
    lines = [[m, k] + [_fmt(v) for v in vals] for m, k, vals in tab.rows]
    a, h, d = tab.totals
    lines.append(["Total", "", f"{a:.4f}", "", f"{h:.4f}", f"{d:.4f}"])
    widths = [max(len(str(r[i])) for r in [head] + lines) for i in range(len(head))]
    fmt_row = lambda r: "  ".join(str(c).ljust(w) for c, w in zip(r, widths)).rstrip()
    rule = "-" * len(fmt_row(head))
    return "\n".join([fmt_row(head), rule] + [fmt_row(r) for r in lines[:-1]] + [rule, fmt_row(lines[-1])])
