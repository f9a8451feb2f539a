"""Symbol-level time arithmetic shared by the analytics and the simulator."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = ["TtiMode", "FrameParams", "round_to_symbols", "n_symbols", "allocation_time"]

# Relative slack when snapping times onto the symbol grid, so that float
# products of an exact multiple do not spill into the next symbol.
_REL = 1e-10


class TtiMode(str, Enum):
    FIXED = "fixed"
    FLEXIBLE = "flexible"


@dataclass(frozen=True)
class FrameParams:
    """OFDM symbol period, maximum TTI length and TTI sizing mode.

    Parameters
    ----------
    t_sym : float
        Symbol period in seconds, cyclic prefix included.
    t_tti_max : float
        Maximum (fixed-mode) TTI length in seconds; must be an integer
        number of symbols.
    tti_mode : TtiMode
    """

    t_sym: float
    t_tti_max: float
    tti_mode: TtiMode = TtiMode.FIXED

    def __post_init__(self):
        object.__setattr__(self, "tti_mode", TtiMode(self.tti_mode))
        if not self.t_sym > 0:
            raise ValueError("t_sym must be > 0")
        if not self.t_tti_max > 0:
            raise ValueError("t_tti_max must be > 0")
        ratio = self.t_tti_max / self.t_sym
        if abs(ratio - round(ratio)) > 1e-6 or round(ratio) < 1:
            raise ValueError(
                f"t_tti_max ({self.t_tti_max * 1e6:g} us) is not an integer multiple "
                f"of t_sym ({self.t_sym * 1e6:g} us)")

    @classmethod
    def from_symbols(cls, t_tti_max: float, tti_symbols: int,
                     tti_mode: TtiMode = TtiMode.FIXED) -> "FrameParams":
        return cls(t_tti_max / tti_symbols, t_tti_max, tti_mode)

    @property
    def tti_symbols(self) -> int:
        return int(round(self.t_tti_max / self.t_sym))

    def with_tti_symbols(self, n: int) -> "FrameParams":
        """Same symbol period, different maximum TTI."""
        return FrameParams(self.t_sym, n * self.t_sym, self.tti_mode)

    def with_mode(self, mode) -> "FrameParams":
        return FrameParams(self.t_sym, self.t_tti_max, TtiMode(mode))


def _check_nonneg(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(np.isnan(t)):
        raise ValueError("time must be >= 0")
    return t


def n_symbols(t, t_sym: float):
    """Number of whole symbols needed to cover ``t`` seconds."""
    t = _check_nonneg(t)
    n = np.ceil(t / t_sym * (1.0 - _REL)).astype(np.int64)
    return n if n.ndim else int(n)


def round_to_symbols(t, t_sym: float):
    """Q(t): smallest symbol multiple that is >= t."""
    out = np.asarray(n_symbols(t, t_sym), dtype=float) * t_sym
    return out if out.ndim else float(out)


def allocation_time(t_min, fp: FrameParams):
    """Airtime charged for a transmission needing ``t_min`` seconds.

    Fixed mode charges whole TTIs (one or more); flexible mode charges Q(t_min).
    """
    if fp.tti_mode is TtiMode.FLEXIBLE:
        return round_to_symbols(t_min, fp.t_sym)
    out = np.asarray(n_symbols(t_min, fp.t_tti_max), dtype=float) * fp.t_tti_max
    return out if out.ndim else float(out)
