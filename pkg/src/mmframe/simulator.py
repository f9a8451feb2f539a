"""Discrete-event execution of the fixed and flexible TDD frame timelines.

Time is an integer symbol index. Semi-static SR/CQI blocks are laid down
first at the start of every SR period; the scheduler then serves jobs
FIFO by arrival and places each TTI together with its grant and HARQ ACK
at the next usable symbols, skipping reserved symbols and leaving guard
symbols wherever the link direction switches.

Control placement depends on the architecture:

* analog BF: every UL grant, DL ACK and UL ACK takes its own full-band
  symbol(s), since the BS can point only one beam at a time;
* hybrid/digital BF: the UL grant rides as a frequency slice on the
  preceding DL symbol when there is one, the DL ACK takes a slice of a
  dedicated DL symbol, and UL ACKs of a whole period share collection
  symbols right after the next reserved block.

The DL grant always shares the first data symbol of its TTI.
"""
from __future__ import annotations

import csv
import heapq
import json
import math
from collections import defaultdict
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

import numpy as np

from .channel import (SnrDistribution, db, effective_snr, sample_snr_distribution,
                      spectral_efficiency)
from .frame import TtiMode, n_symbols
from .overhead import CHANNELS, SrMode, control_airtime, sr_slot_layout
from .traffic import BurstyLogNormal, FullBufferTcp, NoTraffic, generate_trace

__all__ = [
    "SchedulerError", "EventKind", "Event", "UeState", "TtiRecord", "SimReport",
    "Simulation", "draw_ues", "run", "scheduler_step", "rrc_experiment",
    "check_invariants", "FREE", "DL", "UL",
]

FREE, DL, UL = 0, 1, 2
DIR_NAMES = {DL: "DL", UL: "UL"}
ALL_UES = -1  # occupant id for a block shared by every UE (or omni reception)
_EPS = 1e-9


class SchedulerError(RuntimeError):
    """The frame cannot host the requested configuration."""


class EventKind(str, Enum):
    SR_SLOT = "SrSlot"
    CQI_SLOT = "CqiSlot"
    UL_GRANT_TX = "UlGrantTx"
    DL_GRANT_DATA_TX = "DlGrantDataTx"
    UL_DATA_TX = "UlDataTx"
    DL_ACK_TX = "DlAckTx"
    UL_ACK_TX = "UlAckTx"
    PACKET_ARRIVAL = "PacketArrival"
    GUARD_SYMBOL = "GuardSymbol"


_CHANNEL_EVENT = {"sr": EventKind.SR_SLOT, "cqi": EventKind.CQI_SLOT,
                  "ul_grant": EventKind.UL_GRANT_TX, "dl_data": EventKind.DL_GRANT_DATA_TX,
                  "ul_data": EventKind.UL_DATA_TX, "dl_ack": EventKind.DL_ACK_TX,
                  "ul_ack": EventKind.UL_ACK_TX}


@dataclass(frozen=True, order=True)
class Event:
    time: float
    symbol: int
    kind: EventKind
    ue_id: int
    bits: float = 0.0


@dataclass
class UeState:
    ue_id: int
    snr_dl: float
    snr_ul: float
    rho_dl: float
    rho_ul: float
    buffer_ul: float = 0.0
    buffer_dl: float = 0.0
    delivered_bits: float = 0.0
    background_bits: float = 0.0
    harq: dict = field(default_factory=dict)  # tti id -> signaled ack symbol


@dataclass
class TtiRecord:
    tti_id: int
    ue: int
    direction: int
    kind: str
    data: list           # [(start, length)]
    n_data: int
    grant_symbols: list
    ack_signaled: int
    ack_symbols: list
    t_min: float
    retx: bool = False
    failed: bool = False


@dataclass(order=True)
class _Job:
    key: tuple
    ue: int = field(compare=False)
    direction: int = field(compare=False)
    kind: str = field(compare=False)
    remaining: float = field(compare=False)       # seconds of airtime at the UE's rate
    rate_bps: float = field(compare=False)
    arrival_s: float = field(compare=False)
    ready: int = field(compare=False)
    needs_sr: bool = field(compare=False, default=False)
    retx_next: bool = field(compare=False, default=False)


@dataclass
class SimReport:
    scenario: str
    scenario_hash: str
    seed: int
    arch: str
    tti_mode: str
    duration_s: float
    n_symbols: int
    utilization: float | None
    overhead: dict
    control_symbol_share: float
    guard_fraction: float
    idle_fraction: float
    rtt_us: dict | None
    goodput_bps: list
    p_ul: float | None
    mean_tti_s: float | None
    n_tti: int
    sim: "Simulation | None" = field(default=None, repr=False, compare=False)

    @property
    def overhead_total(self) -> float:
        return self.overhead["total"]

    def to_dict(self) -> dict:
        d = {k: v for k, v in self.__dict__.items() if k != "sim"}
        if self.rtt_us:
            d.update({f"rtt_{k}_us": v for k, v in self.rtt_us.items()})
        return d

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def draw_ues(scenario, n_ue: int, rng) -> SnrDistribution:
    """Draw ``n_ue`` covered UEs (connected and above both SNR targets)."""
    g_dl, g_ul = scenario.gamma_min("dl"), scenario.gamma_min("ul")
    parts, have = [], 0
    while have < n_ue:
        d = sample_snr_distribution(scenario.budget, scenario.path_loss, 4 * n_ue + 16, rng)
        d = d.covered(g_dl, g_ul)
        parts.append(d)
        have += len(d)
    cat = lambda a: np.concatenate([getattr(p, a) for p in parts])[:n_ue]
    return SnrDistribution(cat("distance_m"), cat("state"), cat("gamma_dl"), cat("gamma_ul"))


class Simulation:
    """One simulated run.

    Parameters
    ----------
    scenario : Scenario
    duration : float, optional
        Seconds; rounded up to whole SR periods.
    seed : int, optional
    ue_snr : SnrDistribution, optional
        Explicit UE population; drawn from the scenario if omitted.
    background : bool
        Give every UE an infinite DL buffer (saturating background load).
    rrc_rate : float
        DL control messages per second per UE, at a fixed rate and random phase.
    """

    def __init__(self, scenario, duration=None, seed=None, ue_snr=None,
                 background=False, rrc_rate=0.0, keep_trace=True):
        self.sc = scenario
        self.seed = scenario.monte_carlo.seed if seed is None else seed
        self.rng = np.random.default_rng(self.seed)
        fp = scenario.frame
        self.fp = fp
        self.t_sym = fp.t_sym
        self.arch = scenario.arch
        self.mux = scenario.arch.multiplexes_control
        self.max_beams = scenario.arch.max_beams
        self.guard = scenario.sim.guard_symbols
        self.keep_trace = keep_trace
        self.background = background
        self.rrc_rate = rrc_rate
        ctl = scenario.control
        mode = fp.tti_mode
        self.grant = ctl.grant.for_mode(mode)
        self.ack = ctl.ack.for_mode(mode)
        w = scenario.budget.bandwidth_hz
        self.w = w

        duration = scenario.sim.duration_s if duration is None else duration
        self.period = int(round(ctl.sr.period / self.t_sym))
        n_periods = max(1, math.ceil(duration / ctl.sr.period - _EPS))
        self.horizon = n_periods * self.period
        self.duration = self.horizon * self.t_sym

        ues = draw_ues(scenario, scenario.n_ue, self.rng) if ue_snr is None else ue_snr
        if len(ues) < scenario.n_ue:
            raise ValueError("ue_snr has fewer UEs than n_ue")
        self.ue_snr = ues
        ant = scenario.antennas
        g_dl = np.atleast_1d(effective_snr(ues.gamma_dl[:scenario.n_ue], ant.g_bs, ant.g_ue, self.arch))
        g_ul = np.atleast_1d(effective_snr(ues.gamma_ul[:scenario.n_ue], ant.g_bs, ant.g_ue, self.arch))
        rho_dl = np.atleast_1d(spectral_efficiency(db(g_dl), scenario.spectral))
        rho_ul = np.atleast_1d(spectral_efficiency(db(g_ul), scenario.spectral))
        tr = scenario.traffic
        if isinstance(tr, FullBufferTcp):
            rho_dl = np.full_like(rho_dl, tr.rho_dl) if tr.rho_dl else rho_dl
            rho_ul = np.full_like(rho_ul, tr.rho_ul) if tr.rho_ul else rho_ul
        self.ues = [UeState(u, float(ues.gamma_dl[u]), float(ues.gamma_ul[u]),
                            float(rho_dl[u]), float(rho_ul[u])) for u in range(scenario.n_ue)]

        # per-UE control airtimes (unrounded seconds)
        self.t_ul_grant = control_airtime(self.grant, g_dl, w)
        self.t_dl_grant = self.t_ul_grant
        self.t_dl_ack = control_airtime(self.ack, g_dl, w)
        if self.mux:
            self.t_ul_ack = np.full(len(g_ul), self.ack.bits / (ctl.rho_ack * w))
        else:
            self.t_ul_ack = control_airtime(self.ack, g_ul, w)

        # timeline state
        margin = 6 * self.period + 8 * fp.tti_symbols + 64
        self.size = self.horizon + margin
        self.dir = bytearray(self.size)
        self.extra = defaultdict(list)      # symbol -> [(channel, ue, share)]
        self.segments = []                  # (start, length, dir, channel, ue, share, tti)
        self.collect = {}                   # UL ACK collection symbol -> count
        self.records: list[TtiRecord] = []
        self._journal = None
        self.cursor = 0
        self.last_dl = None                 # (symbol, ue) of the latest sequential DL symbol
        self._seq = 0
        self.ready: list = []
        self.pending: list = []

        self._lay_reserved_blocks()
        self._make_jobs()

        # measured accumulators
        self.t_min_sum = 0.0
        self.alloc_sum = 0.0
        self.res = dict.fromkeys(("ul_grant", "dl_grant", "dl_ack", "ul_ack"), 0.0)
        self.n_tti = {DL: 0, UL: 0}
        self.rtts = []
        self.stopped_at = self.horizon

    # ------------------------------------------------------------ setup

    def _lay_reserved_blocks(self):
        sc, ctl = self.sc, self.sc.control
        g_min = sc.gamma_min("ul")
        mode = SrMode(ctl.sr_mode)
        sr = ctl.sr.for_mode(self.fp.tti_mode)
        self.sr_layout = sr_slot_layout(sr, sc.n_ue, self.arch, mode, sc.antennas, g_min,
                                        self.fp, self.w)
        cqi = ctl.cqi.for_mode(self.fp.tti_mode)
        self.cqi_layout = None
        self.cqi_every = 0
        if cqi.period is not None and cqi.bits > 0:
            self.cqi_layout = sr_slot_layout(cqi, sc.n_ue, self.arch, mode, sc.antennas, g_min,
                                             self.fp, self.w)
            self.cqi_every = int(round(cqi.period / ctl.sr.period))
        used = self.sr_layout.total_symbols + (self.cqi_layout.total_symbols if self.cqi_layout else 0)
        if used + 2 * self.guard + 1 > self.period:
            raise SchedulerError(
                f"reserved SR/CQI region ({used} symbols) leaves no room in a "
                f"{self.period}-symbol period")
        self.reserved_symbols = 0
        self.block_end_offsets = {}
        for p in range(self.size // self.period + 1):
            base = p * self.period
            off = self._lay_block(base, self.sr_layout, "sr")
            if self.cqi_layout and p % self.cqi_every == 0:
                off += self._lay_block(base + off, self.cqi_layout, "cqi")
            self.block_end_offsets[p] = off
            if base < self.horizon:
                self.reserved_symbols += min(off, self.horizon - base)

    def _lay_block(self, start, layout, channel):
        n = layout.slot_symbols
        total = layout.total_symbols
        if start + total > self.size:
            return total
        self.dir[start:start + total] = bytes([UL]) * total
        if layout.mode is SrMode.TDMA:
            k = layout.users_per_group
            for g in range(layout.sim_groups):
                members = list(range(g * k, min((g + 1) * k, self.sc.n_ue)))
                for u in members:
                    self.segments.append((start + g * n, n, UL, channel, u, 1.0 / len(members), -1))
        else:
            self.segments.append((start, n, UL, channel, ALL_UES, 1.0, -1))
        return total

    def sr_ready_symbol(self, ue: int, at: int) -> int:
        """End of the first SR occasion of ``ue`` starting at or after symbol ``at``."""
        lay = self.sr_layout
        if lay.mode is SrMode.TDMA:
            off = (ue // lay.users_per_group) * lay.slot_symbols
        else:
            off = 0
        p = max(0, math.ceil((at - off) / self.period))
        return p * self.period + off + lay.slot_symbols + self.sc.sim.sr_to_grant_symbols

    def _push_pending(self, job):
        self._seq += 1
        heapq.heappush(self.pending, (job.ready, job.key, self._seq, job))

    def _push_ready(self, job):
        self._seq += 1
        heapq.heappush(self.ready, (job.key, self._seq, job))

    def _make_jobs(self):
        sc = self.sc
        tr = sc.traffic
        w = self.w
        if isinstance(tr, BurstyLogNormal):
            times, sizes, ue_ids = generate_trace(tr, sc.n_ue, self.duration, self.rng)
            is_ul = self.rng.uniform(size=len(times)) < sc.p_ul
            for t, b, u, up in zip(times, sizes, ue_ids, is_ul):
                self.add_packet(int(u), "ul" if up else "dl", float(b), float(t))
        elif isinstance(tr, FullBufferTcp):
            self.tcp_segments = max(1, math.floor(
                self.fp.t_tti_max * self.ues[0].rho_dl * w / tr.l_data_bits + _EPS))
            for st in self.ues:
                self._push_pending(self._tcp_data_job(st, 0))
        if self.background:
            for st in self.ues:
                rate = st.rho_dl * w
                self._push_pending(_Job((0, st.ue_id), st.ue_id, DL, "background", math.inf, rate, 0.0, 0))
        if self.rrc_rate > 0:
            period = 1.0 / self.rrc_rate
            for st in self.ues:
                phase = self.rng.uniform(0, period)
                rate = st.rho_dl * w
                for t in np.arange(phase, self.duration, period):
                    a = int(n_symbols(t, self.t_sym))
                    self._push_pending(_Job((a, st.ue_id), st.ue_id, DL, "rrc",
                                            sc.sim.rrc_bits / rate, rate, float(t), a))

    def add_packet(self, ue: int, direction: str, bits: float, arrival_s: float = 0.0):
        """Queue one PDU of ``bits`` for ``ue``.

        UL packets become schedulable after the UE's next SR occasion; DL
        packets at the first symbol boundary at or after the arrival.
        """
        if not 0 <= ue < len(self.ues):
            raise ValueError(f"no UE {ue}")
        if bits <= 0:
            raise ValueError("bits must be > 0")
        st = self.ues[ue]
        a = int(n_symbols(arrival_s, self.t_sym))
        if direction == "ul":
            rate = st.rho_ul * self.w
            job = _Job((a, ue), ue, UL, "packet", bits / rate, rate, arrival_s,
                       self.sr_ready_symbol(ue, a), needs_sr=True)
        elif direction == "dl":
            rate = st.rho_dl * self.w
            job = _Job((a, ue), ue, DL, "packet", bits / rate, rate, arrival_s, a)
        else:
            raise ValueError(f"direction must be 'ul' or 'dl', got {direction!r}")
        self._push_pending(job)

    def _tcp_data_job(self, st, at):
        tr = self.sc.traffic
        rate = st.rho_dl * self.w
        return _Job((at, st.ue_id), st.ue_id, DL, "tcp_data",
                    self.tcp_segments * tr.l_data_bits / rate, rate, at * self.t_sym, at)

    # ------------------------------------------------------------ placement primitives

    def _usable(self, x, d):
        dr = self.dir
        if dr[x]:
            return False
        opp = UL if d == DL else DL
        for k in range(1, self.guard + 1):
            if (x - k >= 0 and dr[x - k] == opp) or dr[x + k] == opp:
                return False
        return True

    def _find(self, start, n, d):
        out = []
        x = start
        limit = start + n + 4 * self.period + 8 * self.guard
        usable = self._usable
        while len(out) < n:
            if x >= self.size - self.guard - 1:
                raise _Overflow
            if x > limit:
                raise SchedulerError(
                    f"no usable {DIR_NAMES[d]} symbol between {start} and {limit} "
                    f"(cursor {self.cursor}, found {len(out)}/{n})")
            if usable(x, d):
                out.append(x)
            x += 1
        return out

    @staticmethod
    def _runs(symbols):
        runs = []
        for x in symbols:
            if runs and runs[-1][0] + runs[-1][1] == x:
                runs[-1][1] += 1
            else:
                runs.append([x, 1])
        return [tuple(r) for r in runs]

    def _write(self, symbols, d, channel, ue, share, tti):
        for s, n in self._runs(symbols):
            self.dir[s:s + n] = bytes([d]) * n
            self.segments.append((s, n, d, channel, ue, share, tti))
            self._journal.append(("seg", s, n))

    def _set_dir(self, x, d):
        self.dir[x] = d
        self._journal.append(("dironly", x))

    def _add_extra(self, x, channel, ue, share):
        self.extra[x].append((channel, ue, share))
        self._journal.append(("extra", x))

    def _beams_at(self, x, data_ue=None):
        ues = {u for _, u, _ in self.extra.get(x, ())}
        if data_ue is not None:
            ues.add(data_ue)
        return ues

    def _can_attach(self, x, ue, share, data_ue):
        used = sum(s for _, _, s in self.extra.get(x, ()))
        if used + share > 1.0 + 1e-12:
            return False
        if self.max_beams is not None and len(self._beams_at(x, data_ue) | {ue}) > self.max_beams:
            return False
        return True

    def _rollback(self):
        for entry in reversed(self._journal):
            if entry[0] == "seg":
                _, s, n = entry
                self.dir[s:s + n] = bytes(n)
                self.segments.pop()
            elif entry[0] == "dironly":
                self.dir[entry[1]] = FREE
            elif entry[0] == "extra":
                lst = self.extra[entry[1]]
                lst.pop()
                if not lst:
                    del self.extra[entry[1]]
            elif entry[0] == "collect":
                _, x, prev = entry
                if prev is None:
                    del self.collect[x]
                else:
                    self.collect[x] = prev
        self._journal = []

    # ------------------------------------------------------------ control placement

    def _dedicated(self, start, t_ctrl, d, channel, ue, tti):
        """Full-band (analog) or sliced (multiplexed) control symbols.

        Returns the symbols used and the resource time charged.
        """
        n = max(1, int(n_symbols(t_ctrl, self.t_sym)))
        syms = self._find(start, n, d)
        if not self.mux:
            self._write(syms, d, channel, ue, 1.0, tti)
            return syms, n * self.t_sym
        share = min(1.0, t_ctrl / (n * self.t_sym))
        for x in syms:
            self._set_dir(x, d)
            self._add_extra(x, channel, ue, share)
        return syms, share * n * self.t_sym

    def _ul_ack_slot(self, after, ue, share):
        """First UL ACK collection symbol after the next reserved block."""
        p = math.ceil(after / self.period)
        cap = int(math.floor(1.0 / share + 1e-9))
        if self.max_beams is not None:
            cap = min(cap, self.max_beams)
        x = p * self.period + self.block_end_offsets.get(p, 0)
        limit = x + 2 * self.period
        while x < limit:
            if x >= self.size - self.guard - 1:
                raise _Overflow
            if x in self.collect:
                if self.collect[x] < cap and self._can_attach(x, ue, share, None):
                    self._journal.append(("collect", x, self.collect[x]))
                    self.collect[x] += 1
                    self._add_extra(x, "ul_ack", ue, share)
                    return x
            elif self._usable(x, UL):
                self._set_dir(x, UL)
                self._journal.append(("collect", x, None))
                self.collect[x] = 1
                self._add_extra(x, "ul_ack", ue, share)
                return x
            x += 1
        raise SchedulerError(f"no UL ACK collection symbol found after symbol {after}")

    # ------------------------------------------------------------ serving

    def _n_data(self, job):
        if self.fp.tti_mode is TtiMode.FIXED or math.isinf(job.remaining):
            return self.fp.tti_symbols
        return max(1, min(int(n_symbols(job.remaining, self.t_sym)), self.fp.tti_symbols))

    def _serve(self, job):
        """Place one TTI of ``job`` with its grant and ACK. Returns the record or None at the horizon."""
        self._journal = []
        sim = self.sc.sim
        u = job.ue
        n = self._n_data(job)
        tid = len(self.records)
        start = max(self.cursor, job.ready)
        res = dict.fromkeys(self.res, 0.0)
        try:
            if job.direction == UL:
                grant_syms = None
                if self.mux and self.last_dl is not None:
                    x, data_ue = self.last_dl
                    share = self.t_ul_grant[u] / self.t_sym
                    if (x == self.cursor - 1 and x >= job.ready
                            and self._can_attach(x, u, share, data_ue)):
                        self._add_extra(x, "ul_grant", u, share)
                        grant_syms, res["ul_grant"] = [x], self.t_ul_grant[u]
                if grant_syms is None:
                    grant_syms, res["ul_grant"] = self._dedicated(start, self.t_ul_grant[u], DL,
                                                                  "ul_grant", u, tid)
                data = self._find(grant_syms[-1] + 1 + sim.grant_to_data_symbols, n, UL)
                self._write(data, UL, "ul_data", u, 1.0, tid)
                ack_syms, res["dl_ack"] = self._dedicated(data[-1] + 1 + sim.data_to_ack_symbols,
                                                          self.t_dl_ack[u], DL, "dl_ack", u, tid)
                end = ack_syms[-1] + 1
                new_cursor = end
                last_dl = (ack_syms[-1], None if self.mux else u)
            else:
                data = self._find(start, n, DL)
                self._write(data, DL, "dl_data", u, 1.0, tid)
                # in-band DL grant on the first data symbol(s)
                t_g = self.t_dl_grant[u]
                k = 0
                while t_g > _EPS * self.t_sym and k < len(data):
                    piece = min(t_g, self.t_sym)
                    self._add_extra(data[k], "dl_grant", u, piece / self.t_sym)
                    t_g -= piece
                    k += 1
                res["dl_grant"] = self.t_dl_grant[u]
                grant_syms = [data[0]]
                after = data[-1] + 1 + sim.data_to_ack_symbols
                if self.mux:
                    share = self.t_ul_ack[u] / self.t_sym
                    x = self._ul_ack_slot(after, u, share)
                    ack_syms, res["ul_ack"] = [x], self.t_ul_ack[u]
                    end = max(data[-1] + 1, x + 1)
                    new_cursor = data[-1] + 1
                    last_dl = (data[-1], u)
                else:
                    ack_syms, res["ul_ack"] = self._dedicated(after, self.t_ul_ack[u], UL,
                                                              "ul_ack", u, tid)
                    end = ack_syms[-1] + 1
                    new_cursor = end
                    last_dl = None
        except _Overflow:
            self._rollback()
            return None
        if end > self.horizon:
            self._rollback()
            return None

        # commit
        failed = (not job.retx_next and self.sc.sim.harq_bler > 0
                  and self.rng.uniform() < self.sc.sim.harq_bler)
        alloc = n * self.t_sym
        useful = 0.0 if failed else (alloc if math.isinf(job.remaining) else min(job.remaining, alloc))
        self.alloc_sum += alloc
        self.t_min_sum += useful
        for c, v in res.items():
            self.res[c] += float(v)
        self.n_tti[job.direction] += 1
        st = self.ues[u]
        if job.kind != "tcp_ack":
            st.delivered_bits += useful * job.rate_bps
        if job.kind == "background":
            st.background_bits += useful * job.rate_bps
        st.harq[tid] = ack_syms[-1]
        rec = TtiRecord(tid, u, job.direction, job.kind, self._runs(data), n,
                        list(grant_syms), ack_syms[-1], list(ack_syms), useful,
                        job.retx_next, failed)
        self.records.append(rec)
        self.cursor = new_cursor
        self.last_dl = last_dl
        self._journal = None

        # follow-up work
        if not failed:
            job.remaining = job.remaining - useful if not math.isinf(job.remaining) else job.remaining
        job.retx_next = failed
        job.needs_sr = False
        ack_done = ack_syms[-1] + 1
        if job.kind == "tcp_data":
            tr = self.sc.traffic
            if not failed:
                rate = st.rho_ul * self.w
                ack = _Job((data[-1] + 1, u), u, UL, "tcp_ack",
                           self.tcp_segments * tr.l_ack_bits / tr.coalescing / rate, rate,
                           (data[-1] + 1) * self.t_sym, data[-1] + 1)
                self._push_pending(ack)
            nxt = self._tcp_data_job(st, data[-1] + 1) if not failed else job
            nxt.key = (data[-1] + 1, u)
            nxt.ready = data[-1] + 1 if not failed else ack_done
            self._push_pending(nxt)
        elif job.kind == "background":
            job.key = (data[-1] + 1, u)
            job.ready = data[-1] + 1
            self._push_pending(job)
        elif job.remaining > _EPS * self.t_sym or failed:
            # continuing TTIs of the same PDU need no new SR; retransmissions wait for the NACK
            job.ready = ack_done if failed else data[-1] + 1
            self._push_pending(job)
        elif job.kind in ("packet", "rrc"):
            self.rtts.append(ack_done * self.t_sym - job.arrival_s)
        return rec

    # ------------------------------------------------------------ driver

    def _admit(self):
        while self.pending and self.pending[0][0] <= self.cursor:
            job = heapq.heappop(self.pending)[-1]
            self._push_ready(job)

    def step(self, now=None):
        """Serve the earliest-arrived ready job at or after symbol ``now``.

        Returns the placed TTI records (empty when nothing is ready).
        """
        if now is not None:
            self.cursor = max(self.cursor, int(now))
        self._admit()
        if not self.ready:
            return []
        job = heapq.heappop(self.ready)[-1]
        rec = self._serve(job)
        if rec is None:
            self._push_ready(job)
            raise _HorizonReached
        return [rec]

    def run(self) -> SimReport:
        while self.cursor < self.horizon:
            self._admit()
            if not self.ready:
                if not self.pending or self.pending[0][0] >= self.horizon:
                    break
                self.cursor = max(self.cursor, self.pending[0][0])
                continue
            job = heapq.heappop(self.ready)[-1]
            if self._serve(job) is None:
                self.stopped_at = self.cursor
                break
        return self.report()

    # ------------------------------------------------------------ results

    def symbol_classes(self) -> np.ndarray:
        """Per-symbol class over the horizon: 1 DL, 2 UL, 3 guard, 0 idle."""
        d = np.frombuffer(bytes(self.dir[:self.horizon]), dtype=np.uint8).copy()
        out = d.copy()
        occ = np.flatnonzero(d)
        g = self.guard
        if g and len(occ) > 1:
            prev, nxt = occ[:-1], occ[1:]
            switch = (d[prev] != d[nxt]) & (nxt - prev > 1)
            for a, b in zip(prev[switch], nxt[switch]):
                out[a + 1:min(b, a + 1 + g)] = 3
        return out

    def report(self) -> SimReport:
        sc = self.sc
        cls = self.symbol_classes()
        h = self.horizon
        guard = float(np.count_nonzero(cls == 3)) / h
        idle = float(np.count_nonzero(cls == 0)) / h
        sr_sym = self.sr_layout.total_symbols * math.ceil(h / self.period)
        reserved = self.reserved_symbols / h
        sr_frac = min(sr_sym, self.reserved_symbols) / h
        overhead = {"sr": sr_frac, "cqi": reserved - sr_frac}
        for c in ("ul_grant", "dl_grant", "dl_ack", "ul_ack"):
            overhead[c] = self.res[c] / self.alloc_sum if self.alloc_sum > 0 else 0.0
        overhead["total"] = sum(overhead[c] for c in CHANNELS)
        ctrl_syms = self._control_only_symbols()
        n_tti = self.n_tti[DL] + self.n_tti[UL]
        rtt = None
        if self.rtts:
            r = np.array(self.rtts) * 1e6
            rtt = {"p50": float(np.percentile(r, 50)), "p95": float(np.percentile(r, 95)),
                   "p99": float(np.percentile(r, 99)), "n": int(len(r))}
        elapsed = self.duration
        return SimReport(
            scenario=sc.name, scenario_hash=sc.hash, seed=int(self.seed), arch=self.arch.label(),
            tti_mode=self.fp.tti_mode.value, duration_s=elapsed, n_symbols=h,
            utilization=self.t_min_sum / self.alloc_sum if self.alloc_sum > 0 else None,
            overhead=overhead, control_symbol_share=ctrl_syms / h,
            guard_fraction=guard, idle_fraction=idle, rtt_us=rtt,
            goodput_bps=[st.delivered_bits / elapsed for st in self.ues],
            p_ul=self.n_tti[UL] / n_tti if n_tti else None,
            mean_tti_s=self.alloc_sum / n_tti if n_tti else None,
            n_tti=n_tti, sim=self if self.keep_trace else None)

    def _control_only_symbols(self) -> int:
        data = np.zeros(self.horizon, dtype=bool)
        for s, n, d, ch, *_ in self.segments:
            if ch in ("ul_data", "dl_data") and s < self.horizon:
                data[s:min(s + n, self.horizon)] = True
        cls = self.symbol_classes()
        return int(np.count_nonzero((cls == 1) | (cls == 2)) - np.count_nonzero(data))

    def occupants(self):
        """Map symbol -> list of (channel, ue, share) over the horizon."""
        occ = defaultdict(list)
        for s, n, d, ch, ue, share, _ in self.segments:
            for x in range(s, min(s + n, self.horizon)):
                occ[x].append((ch, ue, share))
        for x, items in self.extra.items():
            if x < self.horizon:
                ctrl = sum(sh for _, _, sh in items)
                lst = occ[x]
                # data yields the slice taken by control sharing its symbol
                for i, (ch, ue, sh) in enumerate(lst):
                    if ch in ("ul_data", "dl_data"):
                        lst[i] = (ch, ue, max(0.0, sh - ctrl))
                lst.extend(items)
        return occ

    def write_trace_csv(self, path, comment=None):
        occ = self.occupants()
        cls = self.symbol_classes()
        names = {0: "Idle", 1: "DL", 2: "UL", 3: "Guard"}
        with open(path, "w", newline="") as fh:
            if comment:
                fh.write(f"# {comment}\n")
            w = csv.writer(fh)
            w.writerow(["t_symbol_index", "direction", "channel", "ue_id", "freq_share"])
            for x in range(self.horizon):
                items = occ.get(x)
                if not items:
                    w.writerow([x, names[int(cls[x])], "", "", 0])
                    continue
                for ch, ue, sh in items:
                    w.writerow([x, names[int(cls[x])], ch, ue, f"{sh:.6g}"])
        return Path(path)

    def events(self):
        """Chronological events reconstructed from the placed symbols."""
        out = []
        for s, n, d, ch, ue, share, _ in self.segments:
            if ch in _CHANNEL_EVENT and s < self.horizon:
                out.append(Event(s * self.t_sym, s, _CHANNEL_EVENT[ch], ue))
        for x, items in self.extra.items():
            for ch, ue, _ in items:
                if ch in _CHANNEL_EVENT and x < self.horizon:
                    out.append(Event(x * self.t_sym, x, _CHANNEL_EVENT[ch], ue))
        cls = self.symbol_classes()
        for x in np.flatnonzero(cls == 3):
            out.append(Event(x * self.t_sym, int(x), EventKind.GUARD_SYMBOL, -1))
        return sorted(out, key=lambda e: (e.symbol, e.kind.value, e.ue_id))


class _Overflow(Exception):
    pass


class _HorizonReached(Exception):
    pass


def run(scenario, duration=None, seed=None, **kw) -> SimReport:
    """Simulate ``scenario`` for ``duration`` seconds (default: the scenario's)."""
    return Simulation(scenario, duration, seed, **kw).run()


def scheduler_step(state: Simulation, now: int):
    """Serve one ready job at or after symbol ``now``; returns the TTI records placed."""
    try:
        return state.step(now)
    except _HorizonReached:
        return []


def rrc_experiment(scenario, rates=None, rrc_bits=None, duration=None, seed=None):
    """Per-user background throughput versus the DL RRC message rate.

    Every UE has a saturated DL buffer; RRC messages of ``rrc_bits`` arrive
    for each UE at a fixed rate. Both TTI modes are run on the same UE drop.

    Returns
    -------
    list of dict
        One row per (mode, rate): mean per-user rate and relative drop
        versus the zero-rate point of the same mode.
    """
    rates = list(scenario.sim.rrc_rates if rates is None else rates)
    if 0.0 not in rates:
        rates = [0.0] + rates
    seed = scenario.monte_carlo.seed if seed is None else seed
    if rrc_bits is not None:
        scenario = scenario.replace(sim=replace(scenario.sim, rrc_bits=float(rrc_bits)))
    base = scenario.replace(traffic=NoTraffic())
    ues = draw_ues(base, base.n_ue, np.random.default_rng(seed))
    rows = []
    for mode in (TtiMode.FIXED, TtiMode.FLEXIBLE):
        sc = base.replace(frame=base.frame.with_mode(mode))
        baseline = None
        for rate in sorted(rates):
            sim = Simulation(sc, duration, seed, ue_snr=ues, background=True,
                             rrc_rate=rate, keep_trace=False)
            sim.run()
            per_user = float(np.mean([st.background_bits for st in sim.ues])) / sim.duration
            if baseline is None:
                baseline = per_user
            rows.append({"mode": mode.value, "rrc_rate_per_s": rate, "user_rate_bps": per_user,
                         "drop": 1.0 - per_user / baseline if baseline else 0.0})
    return rows


def check_invariants(sim: Simulation) -> list[str]:
    """Return a list of violated frame invariants (empty when the trace is sound)."""
    bad = []
    occ = sim.occupants()
    d = sim.dir
    for x, items in occ.items():
        total = sum(sh for _, _, sh in items)
        if total > 1 + 1e-9:
            bad.append(f"symbol {x}: shares sum to {total:.4f}")
        if sim.max_beams is not None:
            targets = {ue for ch, ue, _ in items}
            if len(targets) > sim.max_beams:
                bad.append(f"symbol {x}: {len(targets)} beams > {sim.max_beams}")
        dirs = {DL if ch in ("dl_data", "dl_grant", "ul_grant", "dl_ack") else UL for ch, _, _ in items}
        if len(dirs) > 1 or (dirs and d[x] not in dirs):
            bad.append(f"symbol {x}: mixed link directions")
    g = sim.guard
    h = sim.horizon
    for x in range(h):
        if d[x]:
            for k in range(1, g + 1):
                if x + k < h and d[x + k] and d[x + k] != d[x]:
                    bad.append(f"symbols {x},{x + k}: direction switch without guard")
    for r in sim.records:
        data_start = r.data[0][0]
        data_end = r.data[-1][0] + r.data[-1][1]
        if len(r.grant_symbols) < 1:
            bad.append(f"TTI {r.tti_id}: no grant")
        elif r.direction == UL and max(r.grant_symbols) >= data_start:
            bad.append(f"TTI {r.tti_id}: UL grant not before data")
        elif r.direction == DL and r.grant_symbols[0] != data_start:
            bad.append(f"TTI {r.tti_id}: DL grant not with data")
        if r.ack_signaled < data_end:
            bad.append(f"TTI {r.tti_id}: ACK not after data")
        ch = "dl_ack" if r.direction == UL else "ul_ack"
        if not any(c == ch and ue == r.ue for c, ue, _ in occ.get(r.ack_signaled, ())):
            bad.append(f"TTI {r.tti_id}: no {ch} at signaled symbol {r.ack_signaled}")
        if sim.ues[r.ue].harq.get(r.tti_id) != r.ack_signaled:
            bad.append(f"TTI {r.tti_id}: HARQ record disagrees with grant")
    return bad
