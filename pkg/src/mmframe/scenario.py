"""Scenario files: a YAML parameter bundle driving every computation.

Keys carry their unit as a suffix (``_s``/``_ms``/``_us`` for time,
``_hz``/``_mhz``/``_ghz`` for bandwidth, ``_bytes``/``_mb`` for packet
sizes). :func:`dump_scenario` always writes SI keys, so a dump reloads to an
identical value.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path

import numpy as np
import yaml

from .channel import (AntennaConfig, BeamformingArch, LinkBudget, PathLossModel,
                      PathLossState, SnrDistribution, SpectralEfficiencyParams, db, from_db,
                      sample_snr_distribution)
from .frame import FrameParams, TtiMode
from .overhead import ControlMsg, SrMode
from .traffic import BurstyLogNormal, FitError, FullBufferTcp, NoTraffic

__all__ = [
    "ScenarioError", "ControlConfig", "MonteCarlo", "SimConfig", "Scenario",
    "load_scenario", "loads_scenario", "dump_scenario", "scenario_to_dict",
    "scenario_from_dict", "template_path", "list_templates", "load_template",
]

TEMPLATE_DIR = Path(__file__).parent / "scenarios"
REQUIRED_SECTIONS = ("frame", "arch", "traffic", "control", "n_ue")

_TIME = {"_s": 1.0, "_ms": 1e-3, "_us": 1e-6}
_FREQ = {"_hz": 1.0, "_mhz": 1e6, "_ghz": 1e9}
_SIZE = {"_bytes": 1.0, "_kb": 1e3, "_mb": 1e6}


class ScenarioError(ValueError):
    """Parse or validation failure. ``errors`` holds (path, reason) pairs."""

    def __init__(self, errors, source=None):
        self.errors = list(errors)
        self.source = source
        where = f"{source}: " if source else ""
        super().__init__(where + "; ".join(f"{p}: {r}" if p else r for p, r in self.errors))


@dataclass(frozen=True)
class ControlConfig:
    sr: ControlMsg = ControlMsg(18, 6.0, 500e-6, 26)
    cqi: ControlMsg = ControlMsg(18, 6.0, None)
    grant: ControlMsg = ControlMsg(80, 6.0, None, 100)
    ack: ControlMsg = ControlMsg(5, 6.0)
    rho_ack: float = 0.125
    sr_mode: SrMode = SrMode.AUTO
    sr_variants: dict = field(default_factory=lambda: {"trigger": 18, "short": 26, "long": 42})

    def __post_init__(self):
        object.__setattr__(self, "sr_mode", SrMode(self.sr_mode))
        if self.sr.period is None:
            raise ValueError("SR period is required")
        if self.rho_ack <= 0:
            raise ValueError("rho_ack must be > 0")
        if self.cqi.period is not None:
            ratio = self.cqi.period / self.sr.period
            if abs(ratio - round(ratio)) > 1e-6 or round(ratio) < 1:
                raise ValueError("CQI period must be an integer multiple of the SR period")


@dataclass(frozen=True)
class MonteCarlo:
    n_samples: int = 100_000
    seed: int = 1

    def __post_init__(self):
        if self.n_samples < 100:
            raise ValueError("n_samples must be >= 100")


@dataclass(frozen=True)
class SimConfig:
    """Simulator knobs. Delays are in whole symbols."""

    duration_s: float = 1.0
    guard_symbols: int = 1
    sr_to_grant_symbols: int = 0
    grant_to_data_symbols: int = 0
    data_to_ack_symbols: int = 0
    harq_bler: float = 0.0
    rrc_bits: float = 2000.0
    rrc_rates: tuple = (0.0, 250.0, 500.0, 750.0, 1000.0, 1250.0)

    def __post_init__(self):
        object.__setattr__(self, "rrc_rates", tuple(float(r) for r in self.rrc_rates))
        if self.duration_s <= 0:
            raise ValueError("duration must be > 0")
        for name in ("guard_symbols", "sr_to_grant_symbols", "grant_to_data_symbols",
                     "data_to_ack_symbols"):
            if getattr(self, name) < 0 or int(getattr(self, name)) != getattr(self, name):
                raise ValueError(f"{name} must be a nonnegative integer")
        if not 0 <= self.harq_bler < 1:
            raise ValueError("harq_bler must lie in [0, 1)")
        if any(r < 0 for r in self.rrc_rates):
            raise ValueError("RRC rates must be >= 0")


@dataclass(frozen=True, eq=False)
class Scenario:
    name: str
    frame: FrameParams
    arch: BeamformingArch
    traffic: object
    control: ControlConfig
    n_ue: int
    antennas: AntennaConfig = AntennaConfig()
    budget: LinkBudget = LinkBudget()
    path_loss: PathLossModel = PathLossModel()
    spectral: SpectralEfficiencyParams = SpectralEfficiencyParams()
    p_ul: float = 0.5
    gamma_min_ul_db: float | None = None
    gamma_min_dl_db: float | None = None
    monte_carlo: MonteCarlo = MonteCarlo()
    sim: SimConfig = SimConfig()

    def __post_init__(self):
        if self.n_ue < 1:
            raise ValueError("n_ue must be >= 1")
        if not 0 <= self.p_ul <= 1:
            raise ValueError("p_ul must lie in [0, 1]")
        if self.arch.streams > self.antennas.n_ant_bs:
            raise ValueError("hybrid streams cannot exceed n_ant_bs")
        ratio = self.control.sr.period / self.frame.t_sym
        if abs(ratio - round(ratio)) > 1e-6:
            raise ValueError("SR period must be an integer number of symbols")

    def __eq__(self, other):
        return isinstance(other, Scenario) and scenario_to_dict(self) == scenario_to_dict(other)

    def replace(self, **changes) -> "Scenario":
        return replace(self, **changes)

    @cached_property
    def hash(self) -> str:
        text = yaml.safe_dump(scenario_to_dict(self, informational=False), sort_keys=True)
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    @cached_property
    def _snr(self) -> SnrDistribution:
        return sample_snr_distribution(self.budget, self.path_loss, self.monte_carlo.n_samples,
                                       np.random.default_rng(self.monte_carlo.seed))

    def snr_distribution(self) -> SnrDistribution:
        return self._snr

    def gamma_min(self, direction: str) -> float:
        """Dimensioning SNR: pinned value or the 5th percentile of connected UEs."""
        pinned = self.gamma_min_dl_db if direction == "dl" else self.gamma_min_ul_db
        if pinned is not None:
            return float(from_db(pinned))
        return float(from_db(self._snr.percentile_db(direction, 5)))

    def covered_snr(self) -> SnrDistribution:
        return self._snr.covered(self.gamma_min("dl"), self.gamma_min("ul"))

    def rho_atoms(self, snr: SnrDistribution | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Per-UE (DL, UL) data spectral efficiencies with full beamforming gain."""
        from .utilization import rho_atoms
        snr = self.covered_snr() if snr is None else snr
        return (rho_atoms(snr, self.antennas, self.arch, self.spectral, "dl"),
                rho_atoms(snr, self.antennas, self.arch, self.spectral, "ul"))

    def mean_tti(self, snr: SnrDistribution | None = None) -> float:
        from .utilization import mean_tti_duration
        if self.frame.tti_mode is TtiMode.FIXED or isinstance(self.traffic, NoTraffic):
            return self.frame.t_tti_max
        if isinstance(self.traffic, FullBufferTcp):
            return mean_tti_duration(self.frame, self.traffic, w_tot=self.budget.bandwidth_hz)
        from .analysis import bursty_tti_statistics
        return bursty_tti_statistics(self, snr).e_tti


# ---------------------------------------------------------------- parsing


class _Reader:
    def __init__(self):
        self.errors = []

    def fail(self, path, reason):
        self.errors.append((path, reason))

    def section(self, d, key, path, required=False):
        v = d.get(key) if isinstance(d, dict) else None
        if v is None:
            if required:
                self.fail(f"{path}{key}", "missing required section")
            return {}
        if not isinstance(v, dict):
            self.fail(f"{path}{key}", "expected a mapping")
            return {}
        return v

    def number(self, d, key, path, default=None, required=False):
        if key not in d or d[key] is None:
            if required:
                self.fail(f"{path}{key}", "missing required value")
            return default
        v = d[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            try:
                return float(v)
            except (TypeError, ValueError):
                self.fail(f"{path}{key}", f"expected a number, got {v!r}")
                return default
        return v

    def unit(self, d, base, path, table, default=None, required=False, allow_none=False):
        hits = [(s, f) for s, f in table.items() if base + s in d]
        if len(hits) > 1:
            self.fail(f"{path}{base}", "given with more than one unit")
            return default
        if not hits:
            if required:
                units = "/".join(base + s for s in table)
                self.fail(f"{path}{base}", f"missing (expected one of {units})")
            return default
        suffix, factor = hits[0]
        if d[base + suffix] is None:
            if allow_none:
                return None
            self.fail(f"{path}{base}{suffix}", "value required")
            return default
        v = self.number(d, base + suffix, path)
        return None if v is None else v * factor

    def build(self, path, ctor, *args, **kw):
        try:
            return ctor(*args, **kw)
        except FitError as e:
            self.fail(path, f"traffic fit failed: {e}")
        except (ValueError, TypeError) as e:
            self.fail(path, str(e))
        return None


def _bits(r, d, path, default_fixed, default_flex=None):
    v = d.get("bits")
    if v is None:
        return default_fixed, default_flex
    if isinstance(v, dict):
        fixed = r.number(v, "fixed", path + "bits.", required=True)
        flex = r.number(v, "flexible", path + "bits.", default=None)
        return fixed, flex
    return r.number(d, "bits", path), None


def _msg(r, d, path, eb_default, bits_fixed, bits_flex=None, period_default=None, periodic=False):
    bits, flex = _bits(r, d, path, bits_fixed, bits_flex)
    eb = r.number(d, "eb_n0_db", path, default=eb_default)
    period = period_default
    if periodic:
        period = r.unit(d, "period", path, _TIME, default=period_default, allow_none=True)
    return r.build(path.rstrip("."), ControlMsg, bits, eb, period, flex)


def _path_state(r, d, path, default: PathLossState):
    return r.build(path.rstrip("."), PathLossState,
                   r.number(d, "intercept_db", path, default.intercept_db),
                   r.number(d, "exponent", path, default.exponent),
                   r.number(d, "shadow_std_db", path, default.shadow_std_db))


def scenario_from_dict(d, source=None) -> Scenario:
    """Validate a parsed mapping; every problem is reported with its key path."""
    r = _Reader()
    if not isinstance(d, dict) or not d:
        raise ScenarioError([("", "empty scenario; required sections: " + ", ".join(REQUIRED_SECTIONS))], source)
    missing = [k for k in REQUIRED_SECTIONS if k not in d]
    if missing:
        raise ScenarioError([(k, "missing required section") for k in missing], source)

    # frame
    f = r.section(d, "frame", "", required=True)
    t_tti = r.unit(f, "t_tti_max", "frame.", _TIME, required=True)
    t_sym = r.unit(f, "t_sym", "frame.", _TIME)
    n_sym = r.number(f, "tti_symbols", "frame.")
    mode = f.get("tti_mode", "fixed")
    if mode not in ("fixed", "flexible"):
        r.fail("frame.tti_mode", f"must be 'fixed' or 'flexible', got {mode!r}")
        mode = "fixed"
    frame = None
    if t_tti is not None:
        if t_sym is None and n_sym is None:
            r.fail("frame", "give t_sym or tti_symbols")
        elif t_sym is None:
            if n_sym != int(n_sym) or n_sym < 1:
                r.fail("frame.tti_symbols", "must be a positive integer")
            else:
                frame = r.build("frame", FrameParams.from_symbols, t_tti, int(n_sym), mode)
        else:
            frame = r.build("frame", FrameParams, t_sym, t_tti, mode)
            if frame is not None and n_sym is not None and frame.tti_symbols != n_sym:
                r.fail("frame.tti_symbols", f"inconsistent with t_tti_max/t_sym = {frame.tti_symbols}")

    a = r.section(d, "antennas", "")
    antennas = r.build("antennas", AntennaConfig, int(a.get("n_ant_bs", 64)), int(a.get("n_ant_ue", 16)))

    ar = r.section(d, "arch", "", required=True)
    kind = ar.get("kind")
    arch = None
    if kind == "analog":
        arch = BeamformingArch.analog()
    elif kind == "hybrid":
        arch = r.build("arch", BeamformingArch.hybrid, int(r.number(ar, "streams", "arch.", required=True) or 0))
    elif kind == "digital":
        arch = r.build("arch", BeamformingArch.digital, r.number(ar, "quantizer_alpha", "arch.", 0.0))
    else:
        r.fail("arch.kind", f"must be analog, hybrid or digital, got {kind!r}")

    b = r.section(d, "budget", "")
    dflt = LinkBudget()
    budget = r.build("budget", LinkBudget,
                     r.number(b, "p_tx_bs_dbm", "budget.", dflt.p_tx_bs_dbm),
                     r.number(b, "p_tx_ue_dbm", "budget.", dflt.p_tx_ue_dbm),
                     r.number(b, "noise_figure_dl_db", "budget.", dflt.noise_figure_dl_db),
                     r.number(b, "noise_figure_ul_db", "budget.", dflt.noise_figure_ul_db),
                     r.number(b, "noise_density_dbm_hz", "budget.", dflt.noise_density_dbm_hz),
                     r.unit(b, "bandwidth", "budget.", _FREQ, dflt.bandwidth_hz),
                     r.number(b, "loss_dl_db", "budget.", 0.0),
                     r.number(b, "loss_ul_db", "budget.", 0.0))

    p = r.section(d, "path_loss", "")
    pd = PathLossModel()
    los = _path_state(r, r.section(p, "los", "path_loss."), "path_loss.los.", pd.los)
    nlos = _path_state(r, r.section(p, "nlos", "path_loss."), "path_loss.nlos.", pd.nlos)
    plm = r.build("path_loss", PathLossModel, los, nlos,
                  r.number(p, "los_decay_m", "path_loss.", pd.los_decay_m),
                  r.number(p, "outage_slope_per_m", "path_loss.", pd.outage_slope_per_m),
                  r.number(p, "outage_offset", "path_loss.", pd.outage_offset),
                  r.number(p, "cell_radius_m", "path_loss.", pd.cell_radius_m),
                  r.number(p, "min_distance_m", "path_loss.", pd.min_distance_m))

    s = r.section(d, "spectral_efficiency", "")
    sd = SpectralEfficiencyParams()
    spectral = r.build("spectral_efficiency", SpectralEfficiencyParams,
                       r.number(s, "alpha_bw", "spectral_efficiency.", sd.alpha_bw),
                       r.number(s, "delta_loss_db", "spectral_efficiency.", sd.delta_loss_db),
                       r.number(s, "rho_max", "spectral_efficiency.", sd.rho_max))

    t = r.section(d, "traffic", "", required=True)
    tk = t.get("kind")
    traffic = None
    if tk == "full_buffer_tcp":
        td = FullBufferTcp()
        traffic = r.build("traffic", FullBufferTcp,
                          r.number(t, "l_data_bits", "traffic.", td.l_data_bits),
                          r.number(t, "l_ack_bits", "traffic.", td.l_ack_bits),
                          r.number(t, "coalescing", "traffic.", 1.0),
                          r.number(t, "rho_dl", "traffic.", td.rho_dl),
                          r.number(t, "rho_ul", "traffic.", td.rho_ul))
    elif tk == "bursty_lognormal":
        traffic = r.build("traffic", BurstyLogNormal,
                          r.number(t, "arrival_rate_per_s", "traffic.", required=True),
                          r.unit(t, "size_min", "traffic.", _SIZE, required=True),
                          r.unit(t, "size_max", "traffic.", _SIZE, required=True),
                          r.unit(t, "mean_size", "traffic.", _SIZE, required=True),
                          r.unit(t, "std_size", "traffic.", _SIZE, required=True),
                          bool(t.get("per_user", True)))
    elif tk == "none":
        traffic = NoTraffic()
    else:
        r.fail("traffic.kind", f"must be full_buffer_tcp, bursty_lognormal or none, got {tk!r}")

    c = r.section(d, "control", "", required=True)
    eb = r.number(c, "eb_n0_db", "control.", 6.0)
    cd = ControlConfig()
    sr_d = r.section(c, "sr", "control.")
    sr = _msg(r, sr_d, "control.sr.", eb, cd.sr.bits, cd.sr.bits_flexible, cd.sr.period, periodic=True)
    cqi = _msg(r, r.section(c, "cqi", "control."), "control.cqi.", eb, cd.cqi.bits, None, None, periodic=True)
    grant = _msg(r, r.section(c, "grant", "control."), "control.grant.", eb, cd.grant.bits, cd.grant.bits_flexible)
    ack = _msg(r, r.section(c, "ack", "control."), "control.ack.", eb, cd.ack.bits)
    sr_mode = sr_d.get("mode", "auto")
    if sr_mode not in ("tdma", "fdma", "auto"):
        r.fail("control.sr.mode", f"must be tdma, fdma or auto, got {sr_mode!r}")
        sr_mode = "auto"
    variants = sr_d.get("variants", cd.sr_variants)
    control = None
    if None not in (sr, cqi, grant, ack):
        control = r.build("control", ControlConfig, sr, cqi, grant, ack,
                          r.number(c, "rho_ack", "control.", cd.rho_ack), sr_mode, dict(variants))

    mc = r.section(d, "monte_carlo", "")
    monte = r.build("monte_carlo", MonteCarlo, int(mc.get("n_samples", 100_000)), int(mc.get("seed", 1)))

    sm = r.section(d, "simulation", "")
    sdf = SimConfig()
    sim = r.build("simulation", SimConfig,
                  r.unit(sm, "duration", "simulation.", _TIME, sdf.duration_s),
                  *(sm.get(k, getattr(sdf, k)) for k in ("guard_symbols", "sr_to_grant_symbols",
                                                       "grant_to_data_symbols", "data_to_ack_symbols")),
                  r.number(sm, "harq_bler", "simulation.", 0.0),
                  r.number(sm, "rrc_bits", "simulation.", sdf.rrc_bits),
                  tuple(sm.get("rrc_rates_per_s", sdf.rrc_rates)))

    n_ue = d.get("n_ue")
    if not isinstance(n_ue, int) or isinstance(n_ue, bool) or n_ue < 1:
        r.fail("n_ue", f"must be a positive integer, got {n_ue!r}")
    p_ul = r.number(d, "p_ul", "", 0.5)
    g_ul = r.number(d, "gamma_min_ul_db", "", None)
    g_dl = r.number(d, "gamma_min_dl_db", "", None)

    if r.errors:
        raise ScenarioError(r.errors, source)
    try:
        return Scenario(str(d.get("name", "unnamed")), frame, arch, traffic, control, n_ue,
                        antennas, budget, plm, spectral, p_ul, g_ul, g_dl, monte, sim)
    except ValueError as e:
        raise ScenarioError([("", str(e))], source) from None


def loads_scenario(text: str, source=None) -> Scenario:
    try:
        d = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ScenarioError([("", f"parse error: {e}")], source) from None
    if d is None:
        raise ScenarioError([("", "empty scenario; required sections: " + ", ".join(REQUIRED_SECTIONS))], source)
    return scenario_from_dict(d, source)


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ScenarioError([("", f"cannot read: {e}")], str(path)) from None
    return loads_scenario(text, str(path))


# ---------------------------------------------------------------- dumping


def _msg_dict(m: ControlMsg, periodic=False):
    out = {"bits": m.bits if m.bits_flexible is None else {"fixed": m.bits, "flexible": m.bits_flexible},
           "eb_n0_db": m.eb_n0_db}
    if periodic:
        out["period_s"] = m.period
    return out


def scenario_to_dict(sc: Scenario, informational: bool = True) -> dict:
    t = sc.traffic
    if isinstance(t, FullBufferTcp):
        traffic = {"kind": t.kind, "l_data_bits": t.l_data_bits, "l_ack_bits": t.l_ack_bits,
                   "coalescing": t.coalescing, "rho_dl": t.rho_dl, "rho_ul": t.rho_ul}
    elif isinstance(t, BurstyLogNormal):
        traffic = {"kind": t.kind, "arrival_rate_per_s": t.arrival_rate,
                   "size_min_bytes": t.size_min, "size_max_bytes": t.size_max,
                   "mean_size_bytes": t.mean_size, "std_size_bytes": t.std_size,
                   "per_user": t.per_user}
        if informational and not t.is_degenerate:
            traffic["fitted_log_bytes"] = {"mu": round(t.mu, 6), "sigma": round(t.sigma, 6)}
    else:
        traffic = {"kind": "none"}
    arch = {"kind": sc.arch.kind.value}
    if sc.arch.kind.value == "hybrid":
        arch["streams"] = sc.arch.streams
    if sc.arch.is_digital:
        arch["quantizer_alpha"] = sc.arch.quantizer_alpha
    c = sc.control
    sr = _msg_dict(c.sr, periodic=True)
    sr.update(mode=c.sr_mode.value, variants=dict(c.sr_variants))
    b, p, s, m = sc.budget, sc.path_loss, sc.spectral, sc.sim
    state = lambda x: {"intercept_db": x.intercept_db, "exponent": x.exponent, "shadow_std_db": x.shadow_std_db}
    return {
        "name": sc.name,
        "frame": {"t_sym_s": sc.frame.t_sym, "t_tti_max_s": sc.frame.t_tti_max,
                  "tti_mode": sc.frame.tti_mode.value},
        "antennas": {"n_ant_bs": sc.antennas.n_ant_bs, "n_ant_ue": sc.antennas.n_ant_ue},
        "arch": arch,
        "budget": {"p_tx_bs_dbm": b.p_tx_bs_dbm, "p_tx_ue_dbm": b.p_tx_ue_dbm,
                   "noise_figure_dl_db": b.noise_figure_dl_db, "noise_figure_ul_db": b.noise_figure_ul_db,
                   "noise_density_dbm_hz": b.noise_density_dbm_hz, "bandwidth_hz": b.bandwidth_hz,
                   "loss_dl_db": b.loss_dl_db, "loss_ul_db": b.loss_ul_db},
        "path_loss": {"los": state(p.los), "nlos": state(p.nlos), "los_decay_m": p.los_decay_m,
                      "outage_slope_per_m": p.outage_slope_per_m, "outage_offset": p.outage_offset,
                      "cell_radius_m": p.cell_radius_m, "min_distance_m": p.min_distance_m},
        "spectral_efficiency": {"alpha_bw": s.alpha_bw, "delta_loss_db": s.delta_loss_db, "rho_max": s.rho_max},
        "traffic": traffic,
        "control": {"sr": sr, "cqi": _msg_dict(c.cqi, periodic=True), "grant": _msg_dict(c.grant),
                    "ack": _msg_dict(c.ack), "rho_ack": c.rho_ack},
        "n_ue": sc.n_ue,
        "p_ul": sc.p_ul,
        "gamma_min_ul_db": sc.gamma_min_ul_db,
        "gamma_min_dl_db": sc.gamma_min_dl_db,
        "monte_carlo": {"n_samples": sc.monte_carlo.n_samples, "seed": sc.monte_carlo.seed},
        "simulation": {"duration_s": m.duration_s, "guard_symbols": m.guard_symbols,
                       "sr_to_grant_symbols": m.sr_to_grant_symbols,
                       "grant_to_data_symbols": m.grant_to_data_symbols,
                       "data_to_ack_symbols": m.data_to_ack_symbols, "harq_bler": m.harq_bler,
                       "rrc_bits": m.rrc_bits, "rrc_rates_per_s": list(m.rrc_rates)},
    }


def dump_scenario(sc: Scenario, path=None) -> str:
    text = yaml.safe_dump(scenario_to_dict(sc), sort_keys=False, default_flow_style=False)
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def with_parameter(sc: Scenario, name: str, value) -> Scenario:
    """Copy of ``sc`` with one parameter changed, addressed by dotted key path.

    ``t_tti_max_symbols`` is accepted as shorthand for the TTI length in
    symbols of the current symbol period.
    """
    d = scenario_to_dict(sc, informational=False)
    if name in ("t_tti_max_symbols", "frame.tti_symbols"):
        d["frame"]["t_tti_max_s"] = int(value) * sc.frame.t_sym
    elif name in ("tti_mode", "frame.tti_mode"):
        d["frame"]["tti_mode"] = value
    else:
        node = d
        keys = name.split(".")
        for k in keys[:-1]:
            if not isinstance(node.get(k), dict):
                raise ScenarioError([(name, "parameter path does not resolve")])
            node = node[k]
        if keys[-1] not in node:
            raise ScenarioError([(name, "parameter path does not resolve")])
        node[keys[-1]] = value
    return scenario_from_dict(d)


def template_path(name: str) -> Path:
    p = TEMPLATE_DIR / f"{name}.scenario"
    if not p.exists():
        raise ScenarioError([("", f"no bundled template {name!r}; have {', '.join(list_templates())}")])
    return p


def list_templates() -> list[str]:
    return sorted(p.stem for p in TEMPLATE_DIR.glob("*.scenario"))


def load_template(name: str) -> Scenario:
    return load_scenario(template_path(name))
