"""Agent behaviour: normal agents, the trend follower and the reversal trader.

Scalar kernels are numba-compiled so the simulator and the Python-level
functions below run the very same arithmetic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from numba import float64, int64, njit
from numba.experimental import jitclass

from .orderbook import BUY, SELL, Order, round_order_price

TREND_FOLLOWER = "trend_follower"
REVERSAL = "reversal"


@dataclass(frozen=True)
class NAParams:
    """Per-agent weights (fundamental, chartist, noise) and chartist lookback."""

    w1: float
    w2: float
    w3: float
    tau: int


@dataclass(frozen=True)
class ExpectationInputs:
    """Market observations feeding one expectation.

    ``mid_lagged`` is None while the agent's lookback reaches before the
    start of the run; the chartist term is then dropped.
    """

    fundamental: float
    mid_now: float
    mid_lagged: Optional[float]
    noise_draw: float


@njit(cache=True)
def expected_return_kernel(w1, w2, w3, fundamental, mid_now, mid_lagged, eps):
    """mid_lagged <= 0 disables the chartist term."""
    wsum = w1 + w2 + w3
    if not wsum > 0.0:
        raise ValueError("weights sum to zero")
    chart = 0.0
    if mid_lagged > 0.0:
        chart = math.log(mid_now / mid_lagged)
    return (w1 * math.log(fundamental / mid_now) + w2 * chart + w3 * eps) / wsum


@njit(cache=True)
def order_kernel(expected_price, uniform_draw, p_d, reference):
    """Scatter an order price around ``expected_price``.

    Returns (raw order price, side).  The order buys when ``reference``
    exceeds the order price and sells otherwise.
    """
    p_o = expected_price - p_d + 2.0 * p_d * uniform_draw
    side = BUY if reference > p_o else SELL
    return p_o, side


def na_expected_return(params: NAParams, inputs: ExpectationInputs) -> float:
    """Weighted mix of fundamental pull, past trend and noise, normalised by the weight sum."""
    if inputs.mid_now <= 0 or (inputs.mid_lagged is not None and inputs.mid_lagged <= 0):
        raise ValueError("mid prices must be positive")
    lagged = -1.0 if inputs.mid_lagged is None else float(inputs.mid_lagged)
    return expected_return_kernel(params.w1, params.w2, params.w3, float(inputs.fundamental),
                                  float(inputs.mid_now), lagged, float(inputs.noise_draw))


def na_expected_price(mid_now: float, expected_return: float) -> float:
    if mid_now <= 0:
        raise ValueError("mid price must be positive")
    return mid_now * math.exp(expected_return)


def na_generate_order(expected_price: float, uniform_draw: float, tick: int, warmup: bool,
                      agent_id: int = 0, p_d: float = 1000.0, fundamental: float = 10000.0,
                      delta_p: float = 0.01) -> Optional[Order]:
    """Build the agent's one-share limit order, or None if the price is not positive.

    During warm-up the side is decided against the fundamental price rather
    than the agent's own expectation.
    """
    if expected_price <= 0:
        raise ValueError("expected price must be positive")
    reference = fundamental if warmup else expected_price
    p_o, side = order_kernel(expected_price, uniform_draw, p_d, reference)
    if p_o <= 0:
        return None
    return Order(side=side, price=round_order_price(p_o, side, delta_p), agent_id=agent_id,
                 placed_tick=tick)


# ---------------------------------------------------------------------------
# rolling extremes


def rolling_is_extreme(window: Sequence[float], current_mid: float, lookback: int, mode: str) -> bool:
    """Whether ``current_mid`` is at the max/min of the last ``lookback`` mids.

    ``window`` ends with the current tick.  Ties count as reaching the
    extreme.  A window shorter than ``lookback`` gives False.
    """
    if lookback < 1:
        raise ValueError("lookback must be >= 1")
    if len(window) < lookback:
        return False
    recent = np.asarray(window[len(window) - lookback:], dtype=float)
    if mode == "max":
        return bool(current_mid >= recent.max())
    if mode == "min":
        return bool(current_mid <= recent.min())
    raise ValueError(f"mode must be 'max' or 'min', got {mode!r}")


@jitclass([
    ("lookback", int64),
    ("sign", float64),
    ("vals", float64[:]),
    ("idx", int64[:]),
    ("head", int64),
    ("tail", int64),
    ("count", int64),
])
class RollingExtremum:
    """Running max (sign=+1) or min (sign=-1) of the last ``lookback`` pushed values.

    Monotonic deque over a ring buffer; amortised O(1) per push.
    """

    def __init__(self, lookback, sign):
        self.lookback = lookback
        self.sign = sign
        cap = lookback + 1
        self.vals = np.zeros(cap)
        self.idx = np.zeros(cap, dtype=np.int64)
        self.head = 0
        self.tail = 0
        self.count = 0

    def push(self, value):
        if self.lookback == 0:
            self.count += 1
            return
        cap = self.vals.shape[0]
        key = self.sign * value
        while self.tail > self.head and self.vals[(self.tail - 1) % cap] <= key:
            self.tail -= 1
        self.vals[self.tail % cap] = key
        self.idx[self.tail % cap] = self.count
        self.tail += 1
        self.count += 1
        while self.idx[self.head % cap] <= self.count - 1 - self.lookback:
            self.head += 1

    def full(self):
        return self.count >= self.lookback

    def extreme(self):
        if self.lookback == 0:
            return -math.inf * self.sign
        return self.sign * self.vals[self.head % self.vals.shape[0]]

    def reached_by(self, value, strict):
        """Whether ``value`` is an extreme of itself plus the tracked values.

        Ties count unless ``strict``, in which case ``value`` must beat
        every tracked value.
        """
        if not self.full():
            return False
        if strict:
            return self.sign * value > self.sign * self.extreme()
        return self.sign * value >= self.sign * self.extreme()


# ---------------------------------------------------------------------------
# strategy agents


@dataclass(frozen=True)
class StrategyWindows:
    """Lookbacks of the two strategy agents and their shared order cycle.

    dt1: trend entry, dt2: trend exit and reversal entry, dt3: reversal
    exit, dt: order-cycle period (must be even; the reversal trader acts
    half a cycle after the trend follower).
    """

    dt1: int = 2000
    dt2: int = 500
    dt3: int = 100
    dt: int = 200

    def validate(self) -> None:
        for name in ("dt1", "dt2", "dt3", "dt"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")
        if self.dt % 2:
            raise ValueError(f"dt must be even so the half-cycle offset is a whole tick, got {self.dt}")


@dataclass
class StrategyAgentState:
    """Position-limited strategy agent with a cash/fill ledger."""

    kind: str
    position: int = 0
    cash: float = 0.0
    shadow: bool = False
    fills: list = field(default_factory=list)  # (tick, side, price)

    def record_fill(self, tick: int, side: int, price: float) -> None:
        new_pos = self.position + side
        if abs(new_pos) > 1:
            raise ValueError("fill would breach the one-share position limit")
        self.position = new_pos
        self.cash -= side * price
        self.fills.append((tick, side, price))


@njit(cache=True)
def trend_signal(position, max_entry, min_entry, max_exit, min_exit):
    """Trend follower: enter with a breakout of the entry window, leave on the opposite extreme of the exit window."""
    if position == 0:
        # a flat window is both max and min: no breakout
        if max_entry and not min_entry:
            return BUY
        if min_entry and not max_entry:
            return SELL
        return 0
    if position > 0:
        return SELL if min_exit else 0
    return BUY if max_exit else 0


@njit(cache=True)
def reversal_signal(position, max_entry, min_entry, max_exit, min_exit):
    """Reversal trader: fade an extreme of the entry window, unwind at the opposite extreme of the exit window."""
    if position == 0:
        if min_entry and not max_entry:
            return BUY
        if max_entry and not min_entry:
            return SELL
        return 0
    if position > 0:
        return SELL if max_exit else 0
    return BUY if min_exit else 0


def _decide(signal, state, window, entry, exit_):
    window = np.asarray(window, dtype=float)
    if len(window) == 0:
        return None
    cur = float(window[-1])
    flags = (rolling_is_extreme(window, cur, entry, "max"), rolling_is_extreme(window, cur, entry, "min"),
             rolling_is_extreme(window, cur, exit_, "max"), rolling_is_extreme(window, cur, exit_, "min"))
    side = signal(state.position, *flags)
    return None if side == 0 else int(side)


def ctaa_decide(state: StrategyAgentState, window: Sequence[float], windows: StrategyWindows) -> Optional[int]:
    """Trend follower's order side (BUY/SELL) for a mid history ending at the current tick, or None."""
    return _decide(trend_signal, state, window, windows.dt1, windows.dt2)


def strta_decide(state: StrategyAgentState, window: Sequence[float], windows: StrategyWindows) -> Optional[int]:
    """Reversal trader's order side for a mid history ending at the current tick, or None."""
    return _decide(reversal_signal, state, window, windows.dt2, windows.dt3)
