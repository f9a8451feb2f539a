"""Packet-size and arrival models.

Sizes are configured in bytes (as the traffic literature quotes them) and
sampled in bits.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, stats

__all__ = [
    "FitError", "FullBufferTcp", "BurstyLogNormal", "NoTraffic", "TrafficModel",
    "truncated_moments", "fit_truncated_lognormal", "sample_pdu_size",
    "sample_arrivals", "tcp_ack_bits", "generate_trace", "write_trace_csv",
]


class FitError(ValueError):
    """No underlying lognormal reproduces the requested truncated moments."""


@dataclass(frozen=True)
class FullBufferTcp:
    """Saturated TCP flow: a full TTI of segments, answered by ACKs.

    ``rho_dl``/``rho_ul`` pin the link spectral efficiency; None means the
    caller supplies it.
    """

    l_data_bits: float = 12000.0
    l_ack_bits: float = 592.0
    coalescing: float = 1.0
    rho_dl: float | None = 4.8
    rho_ul: float | None = 4.8

    kind = "full_buffer_tcp"

    def __post_init__(self):
        if self.l_data_bits <= 0 or self.l_ack_bits <= 0:
            raise ValueError("TCP segment and ACK sizes must be > 0")
        if self.coalescing < 1:
            raise ValueError("coalescing factor must be >= 1")


def truncated_moments(mu: float, sigma: float, lo: float, hi: float) -> tuple[float, float]:
    """Mean and std of exp(N(mu, sigma^2)) conditioned on [lo, hi]."""
    a, b = np.log(lo), np.log(hi)
    z = stats.norm.cdf((b - mu) / sigma) - stats.norm.cdf((a - mu) / sigma)

    def raw(k):
        shift = k * sigma ** 2
        mass = stats.norm.cdf((b - mu - shift) / sigma) - stats.norm.cdf((a - mu - shift) / sigma)
        return np.exp(k * mu + 0.5 * k * k * sigma ** 2) * mass / z

    m1, m2 = raw(1), raw(2)
    return float(m1), float(np.sqrt(max(m2 - m1 * m1, 0.0)))


def fit_truncated_lognormal(mean: float, std: float, lo: float, hi: float,
                            rtol: float = 1e-6) -> tuple[float, float]:
    """Solve for the untruncated (mu, sigma) whose truncation matches ``mean``/``std``.

    Root-finding runs in (mu, log sigma) on log-ratios of the moments.
    """
    if not lo < mean < hi:
        raise FitError(f"mean {mean} must lie strictly inside ({lo}, {hi})")
    if std <= 0:
        raise FitError("std must be > 0")
    # a distribution on [lo, hi] with this mean cannot exceed the two-point variance
    if std ** 2 >= (mean - lo) * (hi - mean):
        raise FitError(f"std {std} too large for mean {mean} on [{lo}, {hi}]")

    def resid(p):
        m, s = truncated_moments(p[0], np.exp(p[1]), lo, hi)
        if not (np.isfinite(m) and np.isfinite(s)) or m <= 0 or s <= 0:
            return [1e3, 1e3]
        return [np.log(m / mean), np.log(s / std)]

    v = np.log1p((std / mean) ** 2)
    starts = [(np.log(mean) - v / 2, 0.5 * np.log(v))]
    starts += [(np.log(mean) + dm, ls) for dm in (-2.0, 0.0, 2.0) for ls in (-1.0, 0.0, 0.7)]
    for x0 in starts:
        sol = optimize.root(resid, x0, method="hybr")
        if sol.success and np.max(np.abs(resid(sol.x))) < rtol:
            return float(sol.x[0]), float(np.exp(sol.x[1]))
    raise FitError(f"no truncated lognormal on [{lo}, {hi}] has mean {mean} and std {std}")


@dataclass(frozen=True)
class BurstyLogNormal:
    """Poisson arrivals of truncated-lognormal PDUs.

    Sizes are in bytes. The underlying (mu, sigma) of log-bytes are fitted at
    construction; a degenerate ``size_min == size_max`` model is a fixed size.
    """

    arrival_rate: float
    size_min: float
    size_max: float
    mean_size: float
    std_size: float
    per_user: bool = True
    mu: float = field(init=False, default=float("nan"))
    sigma: float = field(init=False, default=float("nan"))

    kind = "bursty_lognormal"

    def __post_init__(self):
        if self.arrival_rate <= 0:
            raise ValueError("arrival_rate must be > 0")
        if self.size_min <= 0:
            raise ValueError("sizes must be > 0")
        if not self.size_min <= self.mean_size <= self.size_max:
            raise ValueError("need size_min <= mean_size <= size_max")
        if self.std_size < 0:
            raise ValueError("std_size must be >= 0")
        if self.is_degenerate:
            return
        mu, sigma = fit_truncated_lognormal(self.mean_size, self.std_size,
                                            self.size_min, self.size_max)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)

    @property
    def is_degenerate(self) -> bool:
        return self.size_min == self.size_max or self.std_size == 0

    @classmethod
    def fixed_size(cls, arrival_rate: float, size_bytes: float, per_user: bool = True):
        return cls(arrival_rate, size_bytes, size_bytes, size_bytes, 0.0, per_user)

    def size_quantile_bytes(self, u):
        """Inverse CDF of the truncated size distribution."""
        u = np.asarray(u, dtype=float)
        if self.is_degenerate:
            return np.full_like(u, self.mean_size)
        a = (np.log(self.size_min) - self.mu) / self.sigma
        b = (np.log(self.size_max) - self.mu) / self.sigma
        z = stats.truncnorm.ppf(u, a, b)
        return np.clip(np.exp(self.mu + self.sigma * z), self.size_min, self.size_max)

    def size_pdf_bytes(self, x):
        x = np.asarray(x, dtype=float)
        a = (np.log(self.size_min) - self.mu) / self.sigma
        b = (np.log(self.size_max) - self.mu) / self.sigma
        return stats.truncnorm.pdf((np.log(x) - self.mu) / self.sigma, a, b) / (self.sigma * x)


@dataclass(frozen=True)
class NoTraffic:
    """No user data; only the semi-static control slots run."""

    kind = "none"


TrafficModel = FullBufferTcp | BurstyLogNormal | NoTraffic


def sample_pdu_size(model: BurstyLogNormal, rng=None, n: int | None = None):
    """PDU sizes in bits. Returns a float if ``n`` is None."""
    if not isinstance(model, BurstyLogNormal):
        raise TypeError("PDU sizes are defined for bursty traffic only")
    rng = np.random.default_rng(rng)
    u = rng.uniform(size=1 if n is None else n)
    bits = 8.0 * model.size_quantile_bytes(u)
    return float(bits[0]) if n is None else bits


def sample_arrivals(model: BurstyLogNormal, horizon: float, rng=None, rate: float | None = None):
    """Sorted Poisson arrival times on [0, horizon)."""
    if horizon <= 0:
        raise ValueError("horizon must be > 0")
    rng = np.random.default_rng(rng)
    lam = model.arrival_rate if rate is None else rate
    n = rng.poisson(lam * horizon)
    return np.sort(rng.uniform(0.0, horizon, n))


def tcp_ack_bits(n_segments, l_ack: float, coalescing: float = 1.0):
    """UL bits needed to acknowledge ``n_segments`` TCP segments."""
    if np.any(np.asarray(n_segments) < 0):
        raise ValueError("n_segments must be >= 0")
    return np.asarray(n_segments, dtype=float) * l_ack / coalescing if np.ndim(n_segments) \
        else float(n_segments) * l_ack / coalescing


def generate_trace(model: BurstyLogNormal, n_ue: int, horizon: float, rng=None):
    """Superposed per-UE arrivals, time ordered.

    Returns
    -------
    times, sizes_bits, ue_ids : ndarray
    """
    rng = np.random.default_rng(rng)
    rate = model.arrival_rate if model.per_user else model.arrival_rate / n_ue
    times, ues = [], []
    for ue in range(n_ue):
        t = sample_arrivals(model, horizon, rng, rate=rate)
        times.append(t)
        ues.append(np.full(len(t), ue))
    times = np.concatenate(times) if times else np.empty(0)
    ues = np.concatenate(ues).astype(int) if ues else np.empty(0, int)
    order = np.lexsort((ues, times))
    times, ues = times[order], ues[order]
    sizes = sample_pdu_size(model, rng, len(times))
    return times, sizes, ues


def write_trace_csv(path, times, sizes_bits, ue_ids, comment: str | None = None) -> None:
    with open(path, "w", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        w = csv.writer(fh)
        w.writerow(["arrival_time_s", "size_bits", "ue_id"])
        for t, b, u in zip(times, sizes_bits, ue_ids):
            w.writerow([repr(float(t)), repr(float(b)), int(u)])
