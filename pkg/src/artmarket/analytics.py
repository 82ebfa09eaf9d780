"""Measured quantities: strategy P&L and volume, interval-return volatility,
fat tails and volatility clustering.

Moments are population moments throughout.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class Ledger:
    """Fills of one strategy agent as (tick, side, price) with side +1 buy / -1 sell."""

    fills: list = field(default_factory=list)

    @classmethod
    def from_arrays(cls, ticks, sides, prices) -> "Ledger":
        return cls([(int(t), int(s), float(p)) for t, s, p in zip(ticks, sides, prices)])

    @property
    def cash(self) -> float:
        return float(-sum(s * p for _, s, p in self.fills))

    @property
    def position(self) -> int:
        return int(sum(s for _, s, _ in self.fills))


def final_return(ledger: Ledger, final_mid: float, p_f: float = 10000.0) -> float:
    """Final earnings over the fundamental price, in percent; open positions marked to ``final_mid``."""
    return 100.0 * (ledger.cash + ledger.position * final_mid) / p_f


def trading_volume(ledger: Ledger) -> int:
    return len(ledger.fills)


def interval_returns(mids: np.ndarray, interval: int, start: int) -> np.ndarray:
    """Non-overlapping log returns ln(P[t]/P[t-interval]) for t = start+interval, start+2*interval, ..."""
    mids = np.asarray(mids, dtype=float)
    t_end = len(mids) - 1
    k = (t_end - start) // interval
    pts = mids[start: start + k * interval + 1: interval]
    return np.diff(np.log(pts))


def stdev_returns(series) -> float:
    """Population standard deviation in percent."""
    x = np.asarray(series, dtype=float)
    if x.size < 2:
        raise ValueError("need at least two returns")
    return 100.0 * float(np.std(x))


def excess_kurtosis(series) -> float:
    """m4 / m2**2 - 3, so a normal sample gives ~0."""
    x = np.asarray(series, dtype=float)
    if x.size < 4:
        raise ValueError("need at least four returns")
    d = x - x.mean()
    m2 = np.mean(d * d)
    if m2 == 0:
        raise ValueError("zero variance")
    return float(np.mean(d ** 4) / m2 ** 2 - 3.0)


def squared_return_autocorr(series, lags=(1, 2, 3, 4, 5)) -> np.ndarray:
    """Sample autocorrelation of squared returns at each lag.

    Uses the usual estimator sum_t d_t d_{t+k} / sum_t d_t^2 with d the
    demeaned squared series.
    """
    sq = np.asarray(series, dtype=float) ** 2
    d = sq - sq.mean()
    denom = np.dot(d, d)
    if denom == 0:
        raise ValueError("squared returns have zero variance")
    n = d.size
    out = []
    for k in lags:
        if not 0 < k < n:
            raise ValueError(f"lag {k} out of range for {n} returns")
        out.append(np.dot(d[:-k], d[k:]) / denom)
    return np.array(out)
