"""Experiment orchestration: sweeps over scenario parameters and the CSV/JSON/text
files that hold each figure's and table's data.

Every CSV starts with a ``#`` comment line carrying the scenario hash and
seed, then a header row.
"""
from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .analysis import scenario_utilization
from .channel import BeamformingArch, db
from .frame import TtiMode
from .overhead import CHANNELS, format_table2, table2, total_overhead
from .scenario import Scenario, ScenarioError, with_parameter
from .simulator import Simulation, rrc_experiment
from .traffic import BurstyLogNormal, FullBufferTcp

__all__ = ["SweepSpec", "SweepError", "KINDS", "parse_values", "run_experiment", "write_csv",
           "overhead_sweep", "utilization_sweep", "snr_cdf_rows", "FIG3_FILES"]

KINDS = ("overhead", "utilization", "simulate", "rrc", "snr", "table2")

# Figure-3 panel per bundled traffic template
FIG3_FILES = {"tcp-fullbuffer": "fig3a", "large-packets": "fig3b", "small-packets": "fig3c"}

# Utilization defaults to the figure's TTI sweep; overhead without a sweep
# reports the single scenario (plus the per-architecture table).
DEFAULT_SWEEPS = {
    "utilization": ("t_tti_max_symbols", (4, 6, 8, 10, 12, 16, 20, 25, 30, 40, 50, 60, 70, 80, 90, 100)),
}


class SweepError(ValueError):
    """Malformed experiment request (kind, parameter or values)."""


def parse_values(text: str) -> tuple:
    """``"1:64"`` (inclusive), ``"4:100:8"`` (with step) or ``"4,30,100"``."""
    text = text.strip()
    if ":" in text:
        try:
            parts = [float(p) for p in text.split(":")]
        except ValueError:
            raise SweepError(f"bad range {text!r}") from None
        if len(parts) not in (2, 3):
            raise SweepError(f"bad range {text!r}")
        lo, hi = parts[0], parts[1]
        step = parts[2] if len(parts) == 3 else 1.0
        if step <= 0 or hi < lo:
            raise SweepError(f"bad range {text!r}")
        vals = np.arange(lo, hi + step / 2, step)
    else:
        try:
            vals = [float(p) for p in text.split(",") if p.strip()]
        except ValueError:
            raise SweepError(f"bad value list {text!r}") from None
    return tuple(int(v) if float(v).is_integer() else float(v) for v in vals)


@dataclass(frozen=True)
class SweepSpec:
    """One experiment: a kind and an optional parameter swept over values.

    ``parameter`` is a dotted scenario path (``n_ue``, ``t_tti_max_symbols``,
    ``control.sr.bits``...) or ``rrc_rate`` for the RRC experiment.
    """

    kind: str
    parameter: str | None = None
    values: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SweepError(f"unknown experiment kind {self.kind!r}; choose from {', '.join(KINDS)}")
        if self.parameter is not None and not self.values:
            raise SweepError("sweep needs at least one value")
        object.__setattr__(self, "values", tuple(self.values))

    @classmethod
    def parse(cls, kind: str, text: str | None) -> "SweepSpec":
        """From ``"name=values"`` as given on the command line."""
        if not text:
            return cls(kind)
        if "=" not in text:
            raise SweepError(f"sweep must look like name=values, got {text!r}")
        name, vals = text.split("=", 1)
        return cls(kind, name.strip(), parse_values(vals))

    def resolved(self) -> "SweepSpec":
        """Fill in the default sweep for the kind when none was given."""
        if self.parameter is None and self.kind in DEFAULT_SWEEPS:
            p, v = DEFAULT_SWEEPS[self.kind]
            return SweepSpec(self.kind, p, v)
        return self

    def check(self, scenario: Scenario):
        """Raise ScenarioError if the parameter path does not resolve."""
        if self.parameter is None or self.parameter == "rrc_rate":
            return
        with_parameter(scenario, self.parameter, self.values[0])


def write_csv(path, rows: list[dict], scenario: Scenario, seed, columns=None) -> Path:
    path = Path(path)
    columns = list(columns or (rows[0].keys() if rows else []))
    with path.open("w", newline="", encoding="utf-8") as f:
        f.write(f"# scenario={scenario.name} hash={scenario.hash} seed={seed}\n")
        w = csv.DictWriter(f, fieldnames=columns, extrasaction="ignore")
        w.writeheader()
        w.writerows(rows)
    return path


def _write_json(path, payload) -> Path:
    path = Path(path)
    path.write_text(json.dumps(payload, indent=2, default=_jsonable), encoding="utf-8")
    return path


def _jsonable(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    return str(o)


def _meta(scenario, seed, sweep=None):
    return {"scenario": scenario.name, "scenario_hash": scenario.hash, "seed": seed,
            "sweep": None if sweep is None or sweep.parameter is None
            else {"parameter": sweep.parameter, "values": list(sweep.values)}}


# ---------------------------------------------------------------- overhead

ARCHS = (("analog", BeamformingArch.analog()), ("hybrid", BeamformingArch.hybrid(2)),
         ("digital", BeamformingArch.digital(0.0)))


def overhead_sweep(scenario: Scenario, parameter: str, values) -> list[dict]:
    """Total overhead per architecture along a parameter sweep.

    The UE population and the SNR targets stay those of the base scenario,
    so only the swept parameter moves.
    """
    snr = scenario.covered_snr()
    rows = []
    for v in values:
        if parameter == "n_ue":
            sc, n_ue = scenario, int(v)
        else:
            sc, n_ue = with_parameter(scenario, parameter, v), None
        for label, arch in ARCHS:
            rep = total_overhead(sc, snr=snr, arch=arch, n_ue=n_ue)
            row = {parameter: v, "arch": label, "sr_mode": rep.sr_mode, "total": rep.total}
            row.update({c: getattr(rep, c) for c in CHANNELS})
            rows.append(row)
    return rows


def _overhead(scenario, sweep, out, seed):
    files = []
    if sweep.parameter is None:
        rep = total_overhead(scenario)
        files.append(write_csv(out / "overhead.csv", [rep.as_dict()], scenario, seed,
                               [*CHANNELS, "total", "arch", "sr_mode", "e_tti", "p_ul"]))
        files.append(_write_json(out / "overhead.json", {**_meta(scenario, seed), **rep.as_dict()}))
        return files + _table2(scenario, out, seed)[0]
    rows = overhead_sweep(scenario, sweep.parameter, sweep.values)
    name = "fig4" if sweep.parameter == "n_ue" else f"overhead-{sweep.parameter}"
    files.append(write_csv(out / f"{name}.csv", rows, scenario, seed,
                           [sweep.parameter, "arch", "sr_mode", "total", *CHANNELS]))
    files.append(_write_json(out / f"{name}.json", {**_meta(scenario, seed, sweep), "rows": rows}))
    return files


def _table2(scenario, out, seed):
    tab = table2(scenario)
    text = format_table2(tab)
    (out / "table2.txt").write_text(text + "\n", encoding="utf-8")
    rows = []
    for msg, kind, vals in tab.rows:
        rows.append({"message": msg, "type": kind,
                     **{c: ("" if v is None else v) for c, v in zip(tab.columns, vals)}})
    a, h, d = tab.totals
    rows.append({"message": "Total", "type": "", tab.columns[0]: a, tab.columns[1]: "",
                 tab.columns[2]: h, tab.columns[3]: d})
    files = [out / "table2.txt",
             write_csv(out / "table2.csv", rows, scenario, seed, ["message", "type", *tab.columns]),
             _write_json(out / "table2.json", {**_meta(scenario, seed),
                                               "rows": rows,
                                               "reports": {k: r.as_dict() for k, r in tab.reports.items()}})]
    return files, text


# ---------------------------------------------------------------- utilization

def _traffic_label(scenario):
    tr = scenario.traffic
    if isinstance(tr, FullBufferTcp):
        return "tcp"
    if isinstance(tr, BurstyLogNormal):
        return scenario.name
    return "none"


def _util_point(args):
    scenario, parameter, v, mode, n_samples, seed = args
    sc = with_parameter(scenario, parameter, v) if parameter else scenario
    sc = sc.replace(frame=sc.frame.with_mode(mode))
    r = scenario_utilization(sc, n_samples, seed)
    return {"mode": mode.value, "traffic": _traffic_label(scenario),
            "t_tti_max_symbols": sc.frame.tti_symbols, parameter or "point": v,
            "eta": r.eta, "ci95": r.ci95}


def utilization_sweep(scenario: Scenario, parameter: str, values, n_samples=None, seed=None,
                      workers: int = 1) -> list[dict]:
    """Utilization in both TTI modes along a parameter sweep."""
    jobs = [(scenario, parameter, v, mode, n_samples, seed)
            for v in values for mode in (TtiMode.FIXED, TtiMode.FLEXIBLE)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            return list(ex.map(_util_point, jobs))
    return [_util_point(j) for j in jobs]


def _utilization(scenario, sweep, out, seed, workers):
    rows = utilization_sweep(scenario, sweep.parameter, sweep.values, seed=seed, workers=workers)
    if sweep.parameter == "t_tti_max_symbols":
        name = FIG3_FILES.get(scenario.name, f"utilization-{scenario.name}")
        cols = ["mode", "traffic", "t_tti_max_symbols", "eta", "ci95"]
    else:
        name = f"utilization-{sweep.parameter}"
        cols = ["mode", "traffic", sweep.parameter, "t_tti_max_symbols", "eta", "ci95"]
    return [write_csv(out / f"{name}.csv", rows, scenario, seed, cols),
            _write_json(out / f"{name}.json", {**_meta(scenario, seed, sweep), "rows": rows})]


# ---------------------------------------------------------------- snr

def snr_cdf_rows(scenario: Scenario, n_samples: int | None = None, seed=None,
                 points: int = 201) -> tuple[list[dict], dict]:
    """Empirical CDFs of omni DL and UL SNR of connected UEs, plus markers."""
    from .channel import sample_snr_distribution
    n = scenario.monte_carlo.n_samples if n_samples is None else n_samples
    seed = scenario.monte_carlo.seed if seed is None else seed
    dist = sample_snr_distribution(scenario.budget, scenario.path_loss, n,
                                   np.random.default_rng(seed)).connected
    rows, markers = [], {}
    for d in ("dl", "ul"):
        g = np.sort(db(dist.gammas(d)))
        q = np.linspace(0, 1, points)
        xs = np.quantile(g, q)
        rows += [{"direction": d, "snr_db": float(x), "cdf": float(p), "marker": ""}
                 for x, p in zip(xs, q)]
        p5, p50 = np.percentile(g, [5, 50])
        markers[d] = {"p5_db": float(p5), "median_db": float(p50)}
        rows += [{"direction": d, "snr_db": float(p5), "cdf": 0.05, "marker": "p5"},
                 {"direction": d, "snr_db": float(p50), "cdf": 0.5, "marker": "median"}]
    return rows, {"n_samples": n, "n_connected": len(dist), **markers}


def _snr(scenario, out, seed, n_samples):
    rows, summary = snr_cdf_rows(scenario, n_samples, seed)
    return [write_csv(out / "fig2.csv", rows, scenario, seed),
            _write_json(out / "fig2.json", {**_meta(scenario, seed), **summary})], summary


# ---------------------------------------------------------------- simulate / rrc

def _simulate(scenario, sweep, out, seed, duration, trace):
    files, summaries = [], []
    points = [(None, scenario)] if sweep.parameter is None else \
        [(v, with_parameter(scenario, sweep.parameter, v)) for v in sweep.values]
    for v, sc in points:
        sim = Simulation(sc, duration, seed, keep_trace=trace)
        rep = sim.run()
        d = rep.to_dict()
        if v is not None:
            d[sweep.parameter] = v
        summaries.append(d)
        if trace:
            suffix = "" if v is None else f"-{v}"
            files.append(sim.write_trace_csv(
                out / f"trace{suffix}.csv",
                f"scenario={sc.name} hash={sc.hash} seed={seed}"))
    files.append(_write_json(out / "simulate.json",
                             summaries[0] if sweep.parameter is None
                             else {**_meta(scenario, seed, sweep), "runs": summaries}))
    rows = [{k: v for k, v in s.items() if not isinstance(v, (dict, list))} for s in summaries]
    for r, s in zip(rows, summaries):
        r.update({f"overhead_{k}": x for k, x in s["overhead"].items()})
    files.append(write_csv(out / "simulate.csv", rows, scenario, seed))
    return files, summaries


def _rrc(scenario, sweep, out, seed, duration):
    rates = sweep.values if sweep.parameter == "rrc_rate" else None
    rows = rrc_experiment(scenario, rates=rates, duration=duration, seed=seed)
    return [write_csv(out / "fig5.csv", rows, scenario, seed,
                      ["mode", "rrc_rate_per_s", "user_rate_bps", "drop"]),
            _write_json(out / "fig5.json", {**_meta(scenario, seed), "rows": rows})], rows


# ---------------------------------------------------------------- entry point

def run_experiment(scenario: Scenario, sweep: SweepSpec, out_dir, *, seed=None,
                   duration: float | None = None, trace: bool = False,
                   n_samples: int | None = None, workers: int = 1) -> list[Path]:
    """Run one experiment and write its data files into ``out_dir``.

    Returns the written paths. Errors from the models are re-raised with
    the experiment named in the message.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    seed = scenario.monte_carlo.seed if seed is None else seed
    sweep = sweep.resolved()
    sweep.check(scenario)
    try:
        if sweep.kind == "overhead":
            return _overhead(scenario, sweep, out, seed)
        if sweep.kind == "table2":
            return _table2(scenario, out, seed)[0]
        if sweep.kind == "utilization":
            return _utilization(scenario, sweep, out, seed, workers)
        if sweep.kind == "snr":
            return _snr(scenario, out, seed, n_samples)[0]
        if sweep.kind == "simulate":
            return _simulate(scenario, sweep, out, seed, duration, trace)[0]
        return _rrc(scenario, sweep, out, seed, duration)[0]
    except (ScenarioError, SweepError):
        raise
    except Exception as e:
        msg = f"{sweep.kind} experiment on {scenario.name!r}: {e}"
        try:
            wrapped = type(e)(msg)
        except Exception:
            wrapped = RuntimeError(msg)
        raise wrapped from e
