"""Continuous double auction with price-time priority on an integer price grid.

Every order is for a single share, so an incoming order either matches the
head of the best opposite level or rests at the tail of its own level.
Prices are stored as integer multiples of the minimum increment; only the
mid-price is real valued.

The hot path lives in :class:`BookCore`, a numba jitclass shared by the
simulator.  :class:`OrderBook` wraps it with a friendlier Python surface.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

import numpy as np
from numba import boolean, int8, int32, int64, njit
from numba.experimental import jitclass

BUY = 1
SELL = -1

# levels are grouped in blocks so that finding the next nonempty level
# skips empty stretches 64 at a time
_BLOCK_SHIFT = 6

# tolerance (in grid units) absorbing binary representation error of the
# increment, e.g. 10000.00 / 0.01 == 999999.9999999999
_GRID_EPS = 1e-7


def round_order_price(raw_price: float, side: int, delta_p: float = 0.01) -> int:
    """Snap a raw order price onto the grid.

    Buy prices round down, sell prices round up.  Returns the price as an
    integer number of increments.

    >>> round_order_price(10000.006, BUY)
    1000000
    >>> round_order_price(10000.001, SELL)
    1000001
    """
    if not raw_price > 0:
        raise ValueError(f"order price must be positive, got {raw_price!r}")
    if side == BUY:
        return int(math.floor(raw_price / delta_p + _GRID_EPS))
    if side == SELL:
        return int(math.ceil(raw_price / delta_p - _GRID_EPS))
    raise ValueError(f"side must be BUY (1) or SELL (-1), got {side!r}")


_core_spec = [
    ("n_levels", int64),
    ("lvl_head", int32[:]),
    ("lvl_tail", int32[:]),
    ("blk_count", int32[:]),
    ("o_price", int32[:]),
    ("o_side", int8[:]),
    ("o_agent", int32[:]),
    ("o_tick", int32[:]),
    ("o_next", int32[:]),
    ("o_prev", int32[:]),
    ("o_alive", boolean[:]),
    ("n_orders", int64),
    ("expiry_ptr", int64),
    ("last_tick", int64),
    ("best_bid", int64),
    ("best_ask", int64),
    ("n_bids", int64),
    ("n_asks", int64),
    # last match, read by the caller right after a submit
    ("m_price", int64),
    ("m_agent", int64),
    ("m_order", int64),
]


@jitclass(_core_spec)
class BookCore:
    """Array-backed order book.

    Price levels are doubly linked FIFO lists of order ids.  A single level
    array serves both sides: bids are always strictly below asks, so a level
    never holds orders of both sides.  Order ids are assigned in placement
    order and placement ticks never decrease, which makes the expiry index a
    plain pointer over ids.
    """

    def __init__(self, n_levels, capacity):
        self.n_levels = n_levels
        self.lvl_head = np.full(n_levels, -1, dtype=np.int32)
        self.lvl_tail = np.full(n_levels, -1, dtype=np.int32)
        self.blk_count = np.zeros((n_levels >> _BLOCK_SHIFT) + 1, dtype=np.int32)
        capacity = max(capacity, 16)
        self.o_price = np.zeros(capacity, dtype=np.int32)
        self.o_side = np.zeros(capacity, dtype=np.int8)
        self.o_agent = np.zeros(capacity, dtype=np.int32)
        self.o_tick = np.zeros(capacity, dtype=np.int32)
        self.o_next = np.full(capacity, -1, dtype=np.int32)
        self.o_prev = np.full(capacity, -1, dtype=np.int32)
        self.o_alive = np.zeros(capacity, dtype=np.bool_)
        self.n_orders = 0
        self.expiry_ptr = 0
        self.last_tick = -1
        self.best_bid = -1
        self.best_ask = -1
        self.n_bids = 0
        self.n_asks = 0
        self.m_price = -1
        self.m_agent = -1
        self.m_order = -1

    def _grow(self):
        cap = self.o_price.shape[0] * 2
        self.o_price = _resized32(self.o_price, cap, 0)
        self.o_agent = _resized32(self.o_agent, cap, 0)
        self.o_tick = _resized32(self.o_tick, cap, 0)
        self.o_next = _resized32(self.o_next, cap, -1)
        self.o_prev = _resized32(self.o_prev, cap, -1)
        side = np.zeros(cap, dtype=np.int8)
        side[: self.o_side.shape[0]] = self.o_side
        self.o_side = side
        alive = np.zeros(cap, dtype=np.bool_)
        alive[: self.o_alive.shape[0]] = self.o_alive
        self.o_alive = alive

    # -- level scanning -------------------------------------------------

    def _scan_down(self, start):
        p = start
        while p >= 0:
            if (p & ((1 << _BLOCK_SHIFT) - 1)) == (1 << _BLOCK_SHIFT) - 1:
                while p >= 0 and self.blk_count[p >> _BLOCK_SHIFT] == 0:
                    p -= 1 << _BLOCK_SHIFT
                if p < 0:
                    break
            if self.lvl_head[p] >= 0:
                return p
            p -= 1
        return -1

    def _scan_up(self, start):
        p = start
        while p < self.n_levels:
            if (p & ((1 << _BLOCK_SHIFT) - 1)) == 0:
                while p < self.n_levels and self.blk_count[p >> _BLOCK_SHIFT] == 0:
                    p += 1 << _BLOCK_SHIFT
                if p >= self.n_levels:
                    break
            if self.lvl_head[p] >= 0:
                return p
            p += 1
        return -1

    # -- resting orders -------------------------------------------------

    def _append(self, oid):
        p = self.o_price[oid]
        tail = self.lvl_tail[p]
        self.o_prev[oid] = tail
        self.o_next[oid] = -1
        if tail >= 0:
            self.o_next[tail] = oid
        else:
            self.lvl_head[p] = oid
        self.lvl_tail[p] = oid
        self.blk_count[p >> _BLOCK_SHIFT] += 1
        self.o_alive[oid] = True
        if self.o_side[oid] > 0:
            self.n_bids += 1
            if p > self.best_bid:
                self.best_bid = p
        else:
            self.n_asks += 1
            if self.best_ask < 0 or p < self.best_ask:
                self.best_ask = p

    def _unlink(self, oid):
        p = self.o_price[oid]
        prv = self.o_prev[oid]
        nxt = self.o_next[oid]
        if prv >= 0:
            self.o_next[prv] = nxt
        else:
            self.lvl_head[p] = nxt
        if nxt >= 0:
            self.o_prev[nxt] = prv
        else:
            self.lvl_tail[p] = prv
        self.blk_count[p >> _BLOCK_SHIFT] -= 1
        self.o_alive[oid] = False
        if self.o_side[oid] > 0:
            self.n_bids -= 1
            if p == self.best_bid and self.lvl_head[p] < 0:
                self.best_bid = self._scan_down(p - 1) if self.n_bids > 0 else -1
        else:
            self.n_asks -= 1
            if p == self.best_ask and self.lvl_head[p] < 0:
                self.best_ask = self._scan_up(p + 1) if self.n_asks > 0 else -1

    def _register(self, side, price, agent, tick):
        if tick < self.last_tick:
            raise ValueError("placement ticks must be non-decreasing")
        self.last_tick = tick
        if self.n_orders == self.o_price.shape[0]:
            self._grow()
        oid = self.n_orders
        self.n_orders += 1
        self.o_price[oid] = price
        self.o_side[oid] = side
        self.o_agent[oid] = agent
        self.o_tick[oid] = tick
        return oid

    # -- public operations ----------------------------------------------

    def submit_limit(self, side, price, agent, tick):
        """Match or rest a one-share limit order.

        Returns the new order id.  If the order crossed, ``m_price``,
        ``m_agent`` and ``m_order`` describe the resting order it hit and
        the order itself never rests; otherwise ``m_price`` is -1.
        """
        if price <= 0 or price >= self.n_levels:
            raise ValueError("price outside the book grid")
        oid = self._register(side, price, agent, tick)
        self.m_price = -1
        if side > 0:
            if self.best_ask >= 0 and price >= self.best_ask:
                self._take(self.best_ask)
                return oid
        else:
            if self.best_bid >= 0 and price <= self.best_bid:
                self._take(self.best_bid)
                return oid
        self._append(oid)
        return oid

    def submit_market(self, side):
        """Hit the best opposite quote; False when that side is empty."""
        self.m_price = -1
        best = self.best_ask if side > 0 else self.best_bid
        if best < 0:
            return False
        self._take(best)
        return True

    def _take(self, level):
        oid = self.lvl_head[level]
        self.m_price = level
        self.m_agent = self.o_agent[oid]
        self.m_order = oid
        self._unlink(oid)

    def cancel(self, oid):
        if oid < 0 or oid >= self.n_orders or not self.o_alive[oid]:
            return False
        self._unlink(oid)
        return True

    def expire(self, current_tick, t_c):
        """Cancel every resting order placed at or before current_tick - t_c."""
        cutoff = current_tick - t_c
        removed = 0
        while self.expiry_ptr < self.n_orders and self.o_tick[self.expiry_ptr] <= cutoff:
            if self.o_alive[self.expiry_ptr]:
                self._unlink(self.expiry_ptr)
                removed += 1
            self.expiry_ptr += 1
        return removed

    def mid_ticks(self):
        """(best_bid + best_ask) / 2 in grid units, or -1.0 if a side is empty."""
        if self.best_bid < 0 or self.best_ask < 0:
            return -1.0
        return 0.5 * (self.best_bid + self.best_ask)

    def level_orders(self, level):
        out = []
        oid = self.lvl_head[level]
        while oid >= 0:
            out.append(oid)
            oid = self.o_next[oid]
        return out


@njit(cache=True)
def _resized32(a, cap, fill):
    out = np.full(cap, fill, dtype=np.int32)
    out[: a.shape[0]] = a
    return out


# ---------------------------------------------------------------------------
# Python-facing types


@dataclass(frozen=True)
class Order:
    """A one-share limit order.  ``price`` is in grid units."""

    side: int
    price: int
    agent_id: int
    placed_tick: int
    id: int = -1
    quantity: int = 1


@dataclass(frozen=True)
class Trade:
    """An executed one-share fill.  ``price`` is the resting order's price in grid units."""

    tick: int
    price: int
    buy_agent: int
    sell_agent: int
    aggressor_side: int


class OrderBook:
    """Price-time priority book for one-share orders.

    Parameters
    ----------
    delta_p : float
        Minimum price increment.
    max_price : float
        Upper bound of the price grid; orders at or above it are rejected.
    capacity : int
        Initial order-pool size (grows on demand).
    """

    def __init__(self, delta_p: float = 0.01, max_price: float = 40000.0, capacity: int = 1024):
        self.delta_p = delta_p
        n_levels = int(round(max_price / delta_p)) + 1
        self.core = BookCore(n_levels, capacity)
        self.empty_side_market_orders = 0

    def submit_limit(self, order: Order) -> list[Trade]:
        if order.quantity != 1:
            raise ValueError("only one-share orders are supported")
        core = self.core
        core.submit_limit(order.side, order.price, order.agent_id, order.placed_tick)
        if core.m_price < 0:
            return []
        return [_make_trade(order.side, order.agent_id, core.m_agent, core.m_price, order.placed_tick)]

    def submit_market(self, side: int, agent_id: int, tick: int) -> Optional[Trade]:
        core = self.core
        if not core.submit_market(side):
            self.empty_side_market_orders += 1
            return None
        return _make_trade(side, agent_id, core.m_agent, core.m_price, tick)

    def expire_orders(self, current_tick: int, t_c: int) -> int:
        return self.core.expire(current_tick, t_c)

    def cancel(self, order_id: int) -> bool:
        return self.core.cancel(order_id)

    @property
    def best_bid(self) -> Optional[int]:
        b = self.core.best_bid
        return None if b < 0 else int(b)

    @property
    def best_ask(self) -> Optional[int]:
        a = self.core.best_ask
        return None if a < 0 else int(a)

    def mid_price(self, fallback: Optional[float] = None) -> Optional[float]:
        """Mid in currency units, not grid rounded; ``fallback`` if a side is empty."""
        m = self.core.mid_ticks()
        if m < 0:
            return fallback
        return m * self.delta_p

    def resting(self, side: int) -> list[tuple[int, list[int]]]:
        """Resting order ids by level, best level first, FIFO within level."""
        core = self.core
        ids = [i for i in range(core.n_orders) if core.o_alive[i] and core.o_side[i] == side]
        levels = sorted({int(core.o_price[i]) for i in ids}, reverse=(side == BUY))
        return [(p, list(core.level_orders(p))) for p in levels]

    def __len__(self) -> int:
        return int(self.core.n_bids + self.core.n_asks)


def _make_trade(side, agent, resting_agent, price, tick) -> Trade:
    if side == BUY:
        return Trade(int(tick), int(price), int(agent), int(resting_agent), BUY)
    return Trade(int(tick), int(price), int(resting_agent), int(agent), SELL)


TRADE_LOG_HEADER = ("tick", "price", "buy_agent", "sell_agent", "aggressor")


def write_trade_log(path, trades: Iterable, delta_p: float = 0.01) -> Path:
    """Write ``tick,price,buy_agent,sell_agent,aggressor`` rows.

    ``trades`` yields :class:`Trade` objects or 5-tuples in that column
    order with the price in grid units.
    """
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRADE_LOG_HEADER)
        for tr in trades:
            if isinstance(tr, Trade):
                tr = (tr.tick, tr.price, tr.buy_agent, tr.sell_agent, tr.aggressor_side)
            tick, price, b, s, aggr = tr
            w.writerow((int(tick), f"{int(price) * delta_p:.2f}", int(b), int(s),
                        "buy" if aggr > 0 else "sell"))
    return path
