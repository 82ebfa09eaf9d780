"""Tick-time scheduler for the artificial market.

One tick = one normal-agent order.  Within a tick the order is: expire
stale orders, the scheduled normal agent submits, the mid is recorded, then
(after warm-up) the trend follower acts on ticks ``t % dt == 0`` and the
reversal trader on ticks ``t % dt == dt // 2``.  Strategy orders do not
advance the clock.  A strategy agent in shadow mode books a virtual fill at
the best opposite quote and leaves the book untouched.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np
from numba import njit

from .agents import (StrategyAgentState, StrategyWindows, RollingExtremum, expected_return_kernel,
                     order_kernel, reversal_signal, trend_signal)
from .analytics import Ledger
from .orderbook import BUY, SELL, BookCore, OrderBook, Trade, _GRID_EPS, write_trade_log
from .rng import draw_all

CTAA_ID = -1
STRTA_ID = -2

MODES = ("real", "shadow", "absent")
_MODE_CODE = {"absent": 0, "real": 1, "shadow": 2}
EXTREME_RULES = ("touch", "strict", "since_check")

# diagnostic counter slots
_D_SKIP_NONPOS, _D_SKIP_GRID, _D_EMPTY_MARKET, _D_EMPTY_SHADOW, _D_ONE_SIDED, _D_EXPIRED = range(6)
_DIAG_NAMES = ("skipped_nonpositive", "skipped_off_grid", "empty_side_market_orders",
               "empty_side_shadow_orders", "one_sided_ticks", "expired_orders")


@dataclass(frozen=True)
class SimConfig:
    n: int = 1000
    w_max: tuple = (1.0, 10.0, 1.0)
    tau_max: int = 10000
    sigma_eps: float = 0.03
    p_d: float = 1000.0
    t_c: int = 10000
    delta_p: float = 0.01
    p_f: float = 10000.0
    t_end: int = 1_000_000
    windows: StrategyWindows = field(default_factory=StrategyWindows)
    ctaa_mode: str = "real"
    strta_mode: str = "real"
    seed: int = 0
    # prices at or above this are off the grid; such orders are skipped
    max_price: float = 40000.0
    # when the current mid counts as "reaching" a window extreme:
    #   touch  - ties with the window max/min count
    #   strict - the mid must strictly beat every earlier mid in the window
    #   since_check - a strict new extreme was set at some tick since the
    #                 agent's previous decision tick
    extreme_rule: str = "touch"

    def validate(self) -> "SimConfig":
        for name in ("n", "tau_max", "t_c", "t_end"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool) or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")
        for name in ("sigma_eps", "p_d", "delta_p", "p_f", "max_price"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be a positive number, got {v!r}")
        if len(self.w_max) != 3 or any(not w > 0 for w in self.w_max):
            raise ValueError(f"w_max must be three positive weights, got {self.w_max!r}")
        if self.t_end <= self.t_c:
            raise ValueError(f"t_end ({self.t_end}) must exceed t_c ({self.t_c})")
        if self.max_price <= self.p_f:
            raise ValueError("max_price must exceed p_f")
        if self.t_end >= 2**31 - 1:
            raise ValueError("t_end too large")
        self.windows.validate()
        for name in ("ctaa_mode", "strta_mode"):
            if getattr(self, name) not in MODES:
                raise ValueError(f"{name} must be one of {MODES}, got {getattr(self, name)!r}")
        if self.extreme_rule not in EXTREME_RULES:
            raise ValueError(f"extreme_rule must be one of {EXTREME_RULES}, got {self.extreme_rule!r}")
        if not isinstance(self.seed, (int, np.integer)) or isinstance(self.seed, bool) or self.seed < 0:
            raise ValueError(f"seed must be a non-negative integer, got {self.seed!r}")
        return self

    def to_dict(self) -> dict:
        d = asdict(self)
        d["w_max"] = list(self.w_max)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        d = dict(d)
        if "windows" in d and isinstance(d["windows"], dict):
            d["windows"] = StrategyWindows(**d["windows"])
        if "w_max" in d:
            d["w_max"] = tuple(float(w) for w in d["w_max"])
        return cls(**d)


@dataclass
class RunResult:
    config: SimConfig
    mids: np.ndarray  # mids[t] is the mid after tick t; mids[0] = p_f
    trades: np.ndarray  # structured: tick, price (grid units), buy_agent, sell_agent, aggressor
    ctaa: Ledger
    strta: Ledger
    diagnostics: dict
    noise_checksum: str

    @property
    def final_mid(self) -> float:
        return float(self.mids[-1])

    def trade_rows(self):
        t = self.trades
        return zip(t["tick"], t["price"], t["buy_agent"], t["sell_agent"], t["aggressor"])

    def write_trades(self, path) -> Path:
        return write_trade_log(path, self.trade_rows(), self.config.delta_p)

    def summary(self) -> dict:
        from .analytics import final_return, trading_volume
        c = self.config
        return {
            "final_mid": self.final_mid,
            "n_trades": int(len(self.trades)),
            "ctaa_return_pct": final_return(self.ctaa, self.final_mid, c.p_f),
            "ctaa_volume": trading_volume(self.ctaa),
            "strta_return_pct": final_return(self.strta, self.final_mid, c.p_f),
            "strta_volume": trading_volume(self.strta),
            "diagnostics": dict(self.diagnostics),
        }

    def to_json(self, trade_log_path: Optional[str] = None) -> str:
        doc = {"config": self.config.to_dict(), "summary": self.summary(),
               "trade_log": None if trade_log_path is None else str(trade_log_path)}
        return json.dumps(doc, indent=2, sort_keys=True)


TRADE_DTYPE = np.dtype([("tick", np.int32), ("price", np.int32), ("buy_agent", np.int32),
                        ("sell_agent", np.int32), ("aggressor", np.int8)])


def shadow_execute(book: OrderBook, side: int, state: StrategyAgentState, tick: int,
                   agent_id: int = CTAA_ID) -> Optional[Trade]:
    """Book a virtual fill at the best opposite quote without touching the book."""
    best = book.best_ask if side == BUY else book.best_bid
    if best is None:
        return None
    resting_agent = int(book.core.o_agent[book.core.lvl_head[best]])
    state.record_fill(tick, side, best * book.delta_p)
    if side == BUY:
        return Trade(tick, best, agent_id, resting_agent, BUY)
    return Trade(tick, best, resting_agent, agent_id, SELL)


@njit(cache=False)
def _strategy_act(book, mode, side, agent_id, t, f_tick, f_side, f_price, n_fill,
                  tr_tick, tr_price, tr_buy, tr_sell, tr_aggr, n_tr, diag):
    """Execute (real) or virtually execute (shadow) a one-share market order.

    Returns (position change, fills count, trades count).
    """
    if mode == 1:
        if not book.submit_market(side):
            diag[_D_EMPTY_MARKET] += 1
            return 0, n_fill, n_tr
        price = book.m_price
        tr_tick[n_tr] = t
        tr_price[n_tr] = price
        if side > 0:
            tr_buy[n_tr] = agent_id
            tr_sell[n_tr] = book.m_agent
        else:
            tr_buy[n_tr] = book.m_agent
            tr_sell[n_tr] = agent_id
        tr_aggr[n_tr] = side
        n_tr += 1
    else:
        price = book.best_ask if side > 0 else book.best_bid
        if price < 0:
            diag[_D_EMPTY_SHADOW] += 1
            return 0, n_fill, n_tr
    f_tick[n_fill] = t
    f_side[n_fill] = side
    f_price[n_fill] = price
    return side, n_fill + 1, n_tr


@njit
def _flag(tr, cur, rule, ev, since):
    if rule == 0:
        return tr.reached_by(cur, False)
    if rule == 1:
        return tr.reached_by(cur, True)
    return tr.reached_by(cur, True) or ev > since


@njit(cache=False)
def _simulate(book, w1, w2, w3, tau, eps, uni, n, t_end, t_c, p_f, p_d, delta_p,
              dt, dt1, dt2, dt3, rule, ctaa_mode, strta_mode, mids,
              tr_tick, tr_price, tr_buy, tr_sell, tr_aggr,
              c_tick, c_side, c_price, s_tick, s_side, s_price, diag):
    n_levels = book.n_levels
    mids[0] = p_f
    n_tr = 0
    n_c = 0
    n_s = 0
    c_pos = 0
    s_pos = 0
    half = dt // 2
    # trackers hold the finalised mids of the previous (lookback - 1) ticks;
    # the current tick's mid is compared against them at decision time
    hi1 = RollingExtremum(dt1 - 1, 1.0)
    lo1 = RollingExtremum(dt1 - 1, -1.0)
    hi2 = RollingExtremum(dt2 - 1, 1.0)
    lo2 = RollingExtremum(dt2 - 1, -1.0)
    hi3 = RollingExtremum(dt3 - 1, 1.0)
    lo3 = RollingExtremum(dt3 - 1, -1.0)
    track_c = ctaa_mode != 0
    track_s = strta_mode != 0
    ev = np.full(6, -10**9, dtype=np.int64)

    for t in range(1, t_end + 1):
        diag[_D_EXPIRED] += book.expire(t, t_c)
        prev = mids[t - 1]
        if t >= 2 and rule == 2:
            if track_c:
                if hi1.reached_by(prev, True): ev[0] = t - 1
                if lo1.reached_by(prev, True): ev[1] = t - 1
            if hi2.reached_by(prev, True): ev[2] = t - 1
            if lo2.reached_by(prev, True): ev[3] = t - 1
            if track_s:
                if hi3.reached_by(prev, True): ev[4] = t - 1
                if lo3.reached_by(prev, True): ev[5] = t - 1
        if track_c:
            hi1.push(prev)
            lo1.push(prev)
        if track_c or track_s:
            hi2.push(prev)
            lo2.push(prev)
        if track_s:
            hi3.push(prev)
            lo3.push(prev)

        j = (t - 1) % n
        lag_idx = t - tau[j] - 1
        lagged = mids[lag_idx] if lag_idx >= 0 else -1.0
        r = expected_return_kernel(w1[j], w2[j], w3[j], p_f, prev, lagged, eps[t - 1])
        p_e = prev * math.exp(r)
        ref = p_f if t < t_c else p_e
        p_o, side = order_kernel(p_e, uni[t - 1], p_d, ref)
        if p_o <= 0.0:
            diag[_D_SKIP_NONPOS] += 1
        else:
            if side > 0:
                level = int(math.floor(p_o / delta_p + _GRID_EPS))
            else:
                level = int(math.ceil(p_o / delta_p - _GRID_EPS))
            if level <= 0 or level >= n_levels:
                diag[_D_SKIP_GRID] += 1
            else:
                book.submit_limit(side, level, j + 1, t)
                if book.m_price >= 0:
                    tr_tick[n_tr] = t
                    tr_price[n_tr] = book.m_price
                    if side > 0:
                        tr_buy[n_tr] = j + 1
                        tr_sell[n_tr] = book.m_agent
                    else:
                        tr_buy[n_tr] = book.m_agent
                        tr_sell[n_tr] = j + 1
                    tr_aggr[n_tr] = side
                    n_tr += 1

        m = book.mid_ticks()
        if m < 0.0:
            diag[_D_ONE_SIDED] += 1
            mids[t] = prev
        else:
            mids[t] = m * delta_p

        if t < t_c:
            continue
        cur = mids[t]
        phase = t % dt
        if track_c and phase == 0:
            sig = trend_signal(c_pos, _flag(hi1, cur, rule, ev[0], t - dt), _flag(lo1, cur, rule, ev[1], t - dt),
                               _flag(hi2, cur, rule, ev[2], t - dt), _flag(lo2, cur, rule, ev[3], t - dt))
            if sig != 0:
                d, n_c, n_tr = _strategy_act(book, ctaa_mode, sig, -1, t, c_tick, c_side, c_price, n_c,
                                             tr_tick, tr_price, tr_buy, tr_sell, tr_aggr, n_tr, diag)
                c_pos += d
        elif track_s and phase == half:
            sig = reversal_signal(s_pos, _flag(hi2, cur, rule, ev[2], t - dt), _flag(lo2, cur, rule, ev[3], t - dt),
                                  _flag(hi3, cur, rule, ev[4], t - dt), _flag(lo3, cur, rule, ev[5], t - dt))
            if sig != 0:
                d, n_s, n_tr = _strategy_act(book, strta_mode, sig, -2, t, s_tick, s_side, s_price, n_s,
                                             tr_tick, tr_price, tr_buy, tr_sell, tr_aggr, n_tr, diag)
                s_pos += d
        else:
            continue
        # a real market order moves the book; the tick's mid is the post-trade mid
        m = book.mid_ticks()
        if m >= 0.0:
            mids[t] = m * delta_p
    return n_tr, n_c, n_s


def _digest(a: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(a).tobytes()).hexdigest()


def run_simulation(config: SimConfig) -> RunResult:
    """Run one simulation; identical configs give bit-identical results."""
    c = config.validate()
    w = c.windows
    d = draw_all(c.seed, c.n, c.w_max, c.tau_max, c.sigma_eps, c.t_end)
    n_levels = int(round(c.max_price / c.delta_p)) + 1
    book = BookCore(n_levels, c.t_end + 1)

    mids = np.empty(c.t_end + 1)
    max_fills = c.t_end // w.dt + 2
    max_trades = c.t_end + 2 * max_fills
    tr_tick = np.empty(max_trades, np.int32)
    tr_price = np.empty(max_trades, np.int32)
    tr_buy = np.empty(max_trades, np.int32)
    tr_sell = np.empty(max_trades, np.int32)
    tr_aggr = np.empty(max_trades, np.int8)
    fills = [(np.empty(max_fills, np.int64), np.empty(max_fills, np.int64), np.empty(max_fills, np.int64))
             for _ in range(2)]
    diag = np.zeros(len(_DIAG_NAMES), np.int64)

    n_tr, n_c, n_s = _simulate(
        book, d.w1, d.w2, d.w3, d.tau, d.eps, d.uniform, c.n, c.t_end, c.t_c, float(c.p_f), float(c.p_d),
        float(c.delta_p), w.dt, w.dt1, w.dt2, w.dt3, EXTREME_RULES.index(c.extreme_rule), _MODE_CODE[c.ctaa_mode], _MODE_CODE[c.strta_mode],
        mids, tr_tick, tr_price, tr_buy, tr_sell, tr_aggr, *fills[0], *fills[1], diag)

    trades = np.empty(n_tr, TRADE_DTYPE)
    trades["tick"] = tr_tick[:n_tr]
    trades["price"] = tr_price[:n_tr]
    trades["buy_agent"] = tr_buy[:n_tr]
    trades["sell_agent"] = tr_sell[:n_tr]
    trades["aggressor"] = tr_aggr[:n_tr]

    def ledger(f, k):
        return Ledger.from_arrays(f[0][:k], f[1][:k], f[2][:k] * c.delta_p)

    return RunResult(
        config=c,
        mids=mids,
        trades=trades,
        ctaa=ledger(fills[0], n_c),
        strta=ledger(fills[1], n_s),
        diagnostics={k: int(v) for k, v in zip(_DIAG_NAMES, diag)},
        noise_checksum=_digest(d.eps),
    )


def with_modes(config: SimConfig, ctaa: str, strta: str) -> SimConfig:
    return replace(config, ctaa_mode=ctaa, strta_mode=strta)
