"""Link-level channel model: antenna gains, quantization, omni SNR sampling
and the SNR to spectral-efficiency map.

All quantities are linear unless the name carries a ``_db``/``_dbm`` suffix.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np
from scipy import integrate, optimize, stats

__all__ = [
    "ArchKind", "AntennaConfig", "BeamformingArch", "PathLossState",
    "PathLossModel", "LinkBudget", "SnrSample", "SnrDistribution",
    "SpectralEfficiencyParams", "bf_gain", "omni_gain", "quantized_snr",
    "sample_omni_snr", "sample_snr_distribution", "spectral_efficiency",
    "effective_snr", "path_loss_cdf", "snr_quantile_quadrature",
    "db", "from_db",
]

LOS, NLOS, OUTAGE = 0, 1, 2
STATE_NAMES = {LOS: "los", NLOS: "nlos", OUTAGE: "outage"}


def db(x):
    return 10.0 * np.log10(x)


def from_db(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


class ArchKind(str, Enum):
    ANALOG = "analog"
    HYBRID = "hybrid"
    DIGITAL = "digital"


@dataclass(frozen=True)
class AntennaConfig:
    n_ant_bs: int = 64
    n_ant_ue: int = 16

    def __post_init__(self):
        if self.n_ant_bs < 1 or self.n_ant_ue < 1:
            raise ValueError("antenna counts must be >= 1")

    @property
    def g_bs(self) -> float:
        return bf_gain(self.n_ant_bs)

    @property
    def g_ue(self) -> float:
        return bf_gain(self.n_ant_ue)


@dataclass(frozen=True)
class BeamformingArch:
    """BS front-end architecture.

    ``streams`` is the number of digital chains K (1 for analog). For the
    digital architecture it is unused; ``quantizer_alpha`` is the inverse of
    the SNR ceiling imposed by low-resolution converters (0 means ideal).
    """

    kind: ArchKind = ArchKind.ANALOG
    streams: int = 1
    quantizer_alpha: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ArchKind(self.kind))
        if self.kind is ArchKind.ANALOG and self.streams != 1:
            raise ValueError("analog beamforming has exactly one stream")
        if self.kind is ArchKind.HYBRID and self.streams < 2:
            raise ValueError("hybrid beamforming needs K >= 2 streams")
        if self.quantizer_alpha < 0:
            raise ValueError("quantizer_alpha must be >= 0")
        if self.kind is not ArchKind.DIGITAL and self.quantizer_alpha != 0:
            raise ValueError("quantizer_alpha only applies to digital beamforming")

    @classmethod
    def analog(cls) -> "BeamformingArch":
        return cls(ArchKind.ANALOG, 1)

    @classmethod
    def hybrid(cls, k: int) -> "BeamformingArch":
        return cls(ArchKind.HYBRID, k)

    @classmethod
    def digital(cls, quantizer_alpha: float = 0.0) -> "BeamformingArch":
        return cls(ArchKind.DIGITAL, 1, quantizer_alpha)

    @property
    def is_digital(self) -> bool:
        return self.kind is ArchKind.DIGITAL

    @property
    def multiplexes_control(self) -> bool:
        """True when control can share a symbol with other UEs in frequency."""
        return self.kind is ArchKind.DIGITAL or self.streams > 1

    @property
    def max_beams(self) -> int | None:
        """Simultaneous full-gain beams at the BS; None means unbounded."""
        return None if self.is_digital else self.streams

    def label(self) -> str:
        if self.kind is ArchKind.HYBRID:
            return f"hybrid(K={self.streams})"
        return self.kind.value


def bf_gain(n_ant: int) -> float:
    """Maximum array gain (linear) of an ``n_ant`` element array."""
    if n_ant < 1:
        raise ValueError("n_ant must be >= 1")
    return float(n_ant)


def omni_gain(arch: BeamformingArch) -> float:
    """BS gain when it must listen to more UEs than it has streams."""
    if arch.is_digital:
        raise ValueError("omni reception is not applicable to digital beamforming")
    return float(arch.streams)


def quantized_snr(gamma, alpha_q):
    """SNR after an additive quantization-noise penalty, gamma / (1 + alpha*gamma)."""
    gamma = np.asarray(gamma, dtype=float)
    out = gamma / (1.0 + alpha_q * gamma)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class PathLossState:
    """Log-distance path loss with lognormal shadowing, PL = a + 10 b log10(d) + N(0, s^2)."""

    intercept_db: float
    exponent: float
    shadow_std_db: float

    def __post_init__(self):
        if self.shadow_std_db < 0:
            raise ValueError("shadowing std must be >= 0")

    def median_db(self, d):
        return self.intercept_db + 10.0 * self.exponent * np.log10(d)


@dataclass(frozen=True)
class PathLossModel:
    """Three-state (LOS / NLOS / outage) distance-dependent path-loss mixture.

    State probabilities follow
        p_out(d)  = max(0, 1 - exp(-outage_slope * d + outage_offset))
        p_los(d)  = (1 - p_out(d)) * exp(-d / los_decay_m)
        p_nlos(d) = 1 - p_out(d) - p_los(d)
    Defaults are the 28 GHz New York City fits, which reproduce the target SNR
    percentiles without retuning.
    """

    los: PathLossState = field(default_factory=lambda: PathLossState(61.4, 2.0, 5.8))
    nlos: PathLossState = field(default_factory=lambda: PathLossState(72.0, 2.92, 8.7))
    los_decay_m: float = 67.1
    outage_slope_per_m: float = 1.0 / 30.0
    outage_offset: float = 5.2
    cell_radius_m: float = 100.0
    min_distance_m: float = 1.0

    def __post_init__(self):
        if self.cell_radius_m <= 0:
            raise ValueError("cell_radius_m must be > 0")
        if not 0 < self.min_distance_m < self.cell_radius_m:
            raise ValueError("min_distance_m must lie in (0, cell_radius_m)")
        if self.los_decay_m <= 0:
            raise ValueError("los_decay_m must be > 0")
        if self.outage_slope_per_m < 0:
            raise ValueError("outage_slope_per_m must be >= 0")

    def state_probabilities(self, d):
        d = np.asarray(d, dtype=float)
        p_out = np.maximum(0.0, 1.0 - np.exp(-self.outage_slope_per_m * d + self.outage_offset))
        p_los = (1.0 - p_out) * np.exp(-d / self.los_decay_m)
        return p_los, 1.0 - p_out - p_los, p_out

    def sample_distance(self, rng, n):
        # area-uniform on the annulus [min_distance, radius]
        lo = (self.min_distance_m / self.cell_radius_m) ** 2
        return self.cell_radius_m * np.sqrt(rng.uniform(lo, 1.0, n))

    def distance_pdf(self, d):
        r0, r1 = self.min_distance_m, self.cell_radius_m
        return np.where((d >= r0) & (d <= r1), 2.0 * d / (r1 ** 2 - r0 ** 2), 0.0)


@dataclass(frozen=True)
class LinkBudget:
    p_tx_bs_dbm: float = 30.0
    p_tx_ue_dbm: float = 20.0
    noise_figure_dl_db: float = 7.0
    noise_figure_ul_db: float = 4.0
    noise_density_dbm_hz: float = -174.0
    bandwidth_hz: float = 1e9
    loss_dl_db: float = 0.0
    loss_ul_db: float = 0.0

    def __post_init__(self):
        if self.bandwidth_hz <= 0:
            raise ValueError("bandwidth must be > 0")

    def noise_dbm(self, direction: str) -> float:
        nf = self.noise_figure_dl_db if direction == "dl" else self.noise_figure_ul_db
        return self.noise_density_dbm_hz + nf + db(self.bandwidth_hz)

    def snr_offset_db(self, direction: str) -> float:
        """SNR in dB at zero path loss; subtract the path loss to get the omni SNR."""
        if direction == "dl":
            return self.p_tx_bs_dbm - self.loss_dl_db - self.noise_dbm("dl")
        if direction == "ul":
            return self.p_tx_ue_dbm - self.loss_ul_db - self.noise_dbm("ul")
        raise ValueError(f"direction must be 'dl' or 'ul', got {direction!r}")


@dataclass(frozen=True)
class SnrSample:
    gamma_dl: float
    gamma_ul: float
    distance_m: float = float("nan")
    state: int = NLOS

    @property
    def in_outage(self) -> bool:
        return self.state == OUTAGE


@dataclass(frozen=True, eq=False)
class SnrDistribution:
    """Empirical set of per-UE omni SNRs (linear).

    Outage draws keep ``gamma = 0`` and ``state == OUTAGE``; statistics use
    :attr:`connected` only.
    """

    distance_m: np.ndarray
    state: np.ndarray
    gamma_dl: np.ndarray
    gamma_ul: np.ndarray

    def __len__(self):
        return len(self.gamma_dl)

    @classmethod
    def from_gammas(cls, gamma_dl, gamma_ul=None) -> "SnrDistribution":
        gamma_dl = np.atleast_1d(np.asarray(gamma_dl, dtype=float))
        gamma_ul = gamma_dl if gamma_ul is None else np.atleast_1d(np.asarray(gamma_ul, dtype=float))
        n = len(gamma_dl)
        return cls(np.full(n, np.nan), np.full(n, NLOS), gamma_dl, gamma_ul)

    def subset(self, mask) -> "SnrDistribution":
        return SnrDistribution(self.distance_m[mask], self.state[mask],
                               self.gamma_dl[mask], self.gamma_ul[mask])

    @property
    def connected(self) -> "SnrDistribution":
        return self.subset(self.state != OUTAGE)

    def gammas(self, direction: str) -> np.ndarray:
        return self.gamma_dl if direction == "dl" else self.gamma_ul

    def percentile_db(self, direction: str, q) -> np.ndarray | float:
        g = self.connected.gammas(direction)
        return np.percentile(db(g), q)

    def covered(self, gamma_min_dl: float, gamma_min_ul: float) -> "SnrDistribution":
        """Connected UEs meeting both dimensioning targets."""
        c = self.connected
        return c.subset((c.gamma_dl >= gamma_min_dl) & (c.gamma_ul >= gamma_min_ul))

    def sample(self, i: int) -> SnrSample:
        return SnrSample(float(self.gamma_dl[i]), float(self.gamma_ul[i]),
                         float(self.distance_m[i]), int(self.state[i]))

    def to_csv(self, path, comment: str | None = None) -> None:
        with open(path, "w", newline="") as fh:
            if comment:
                fh.write(f"# {comment}\n")
            w = csv.writer(fh)
            w.writerow(["distance_m", "state", "gamma_dl_db", "gamma_ul_db"])
            with np.errstate(divide="ignore"):
                dl, ul = db(self.gamma_dl), db(self.gamma_ul)
            for d, s, a, b in zip(self.distance_m, self.state, dl, ul):
                w.writerow([f"{d:.3f}", STATE_NAMES[int(s)], f"{a:.4f}", f"{b:.4f}"])


def _draw_path_loss(plm: PathLossModel, rng, n):
    d = plm.sample_distance(rng, n)
    p_los, p_nlos, _ = plm.state_probabilities(d)
    u = rng.uniform(size=n)
    state = np.where(u < p_los, LOS, np.where(u < p_los + p_nlos, NLOS, OUTAGE))
    z = rng.standard_normal(n)
    pl = np.where(state == LOS,
                  plm.los.median_db(d) + plm.los.shadow_std_db * z,
                  plm.nlos.median_db(d) + plm.nlos.shadow_std_db * z)
    return d, state, pl


def sample_snr_distribution(budget: LinkBudget, plm: PathLossModel, n: int,
                            rng=None) -> SnrDistribution:
    """Draw ``n`` UE drops; both directions share one path-loss draw per UE."""
    rng = np.random.default_rng(rng)
    d, state, pl = _draw_path_loss(plm, rng, n)
    out = state == OUTAGE
    g_dl = np.where(out, 0.0, from_db(budget.snr_offset_db("dl") - pl))
    g_ul = np.where(out, 0.0, from_db(budget.snr_offset_db("ul") - pl))
    return SnrDistribution(d, state, g_dl, g_ul)


def sample_omni_snr(budget: LinkBudget, plm: PathLossModel, rng=None) -> SnrSample:
    """Single UE drop. Outage draws come back with ``in_outage`` set and zero SNR."""
    return sample_snr_distribution(budget, plm, 1, rng).sample(0)


def path_loss_cdf(pl_db: float, plm: PathLossModel) -> float:
    """P(PL <= pl_db | not in outage), integrated over the cell-area distance density."""
    def mass(d, conditional_on):
        p_los, p_nlos, _ = plm.state_probabilities(d)
        f = plm.distance_pdf(d)
        if conditional_on:
            return f * (p_los + p_nlos)
        los = stats.norm.cdf((pl_db - plm.los.median_db(d)) / max(plm.los.shadow_std_db, 1e-12))
        nlos = stats.norm.cdf((pl_db - plm.nlos.median_db(d)) / max(plm.nlos.shadow_std_db, 1e-12))
        return f * (p_los * los + p_nlos * nlos)

    a, b = plm.min_distance_m, plm.cell_radius_m
    num = integrate.quad(mass, a, b, args=(False,), limit=200)[0]
    den = integrate.quad(mass, a, b, args=(True,), limit=200)[0]
    return num / den


def snr_quantile_quadrature(budget: LinkBudget, plm: PathLossModel,
                            direction: str, q: float) -> float:
    """Omni SNR (dB) quantile of connected UEs, by numerical integration.

    A low SNR quantile ``q`` corresponds to the ``1 - q`` path-loss quantile.
    """
    target = 1.0 - q
    pl = optimize.brentq(lambda x: path_loss_cdf(x, plm) - target, 20.0, 250.0, xtol=1e-6)
    return budget.snr_offset_db(direction) - pl


@dataclass(frozen=True)
class SpectralEfficiencyParams:
    alpha_bw: float = 0.83
    delta_loss_db: float = 3.0
    rho_max: float = 4.8

    def __post_init__(self):
        if not 0 < self.alpha_bw <= 1:
            raise ValueError("alpha_bw must lie in (0, 1]")
        if self.rho_max <= 0:
            raise ValueError("rho_max must be > 0")


def spectral_efficiency(snr_db, params: SpectralEfficiencyParams = SpectralEfficiencyParams()):
    """Capped, loss-adjusted Shannon map in bps/Hz."""
    snr_db = np.asarray(snr_db, dtype=float)
    rho = params.alpha_bw * np.log2(1.0 + 10.0 ** (0.1 * (snr_db - params.delta_loss_db)))
    out = np.minimum(rho, params.rho_max)
    return out if out.ndim else float(out)


def effective_snr(gamma, tx_gain: float, rx_gain: float,
                  arch: BeamformingArch | None = None):
    """Omni SNR times both array gains, then the quantizer penalty for digital BS.

    ``gamma`` may be a scalar, an array or an :class:`SnrSample` paired with a
    direction via ``(sample, "dl")``.
    """
    if isinstance(gamma, tuple):
        sample, direction = gamma
        gamma = sample.gamma_dl if direction == "dl" else sample.gamma_ul
    if tx_gain < 1 or rx_gain < 1:
        raise ValueError("array gains must be >= 1")
    g = np.asarray(gamma, dtype=float) * tx_gain * rx_gain
    if arch is not None and arch.is_digital and arch.quantizer_alpha > 0:
        g = quantized_snr(g, arch.quantizer_alpha)
    g = np.asarray(g)
    return g if g.ndim else float(g)
