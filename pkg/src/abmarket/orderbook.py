"""Continuous double auction order book with price-time priority.

Prices are held internally as integer counts of the minimum tick so
matching and equality are exact; conversion to monetary units happens
only at the edges.  Buy prices round down to the grid and sell prices
round up, so an agent never gets a better queue position from rounding.

Matching is the standard CDA rule: an incoming order trades at each
resting order's price while it crosses (buy price >= best ask, or sell
price <= best bid), consuming levels best-first and FIFO within a
level.  A crossing limit's unfilled remainder rests; a market order's
unfilled remainder is discarded.  Resting orders expire a fixed number
of ticks after placement and an expired order never participates in a
fill at or after its expiry tick.
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass, field

from numba import njit

BUY = "buy"
SELL = "sell"


@njit(cache=True)
def _round_core(quotient: float, round_up: bool) -> int:
    nearest = math.floor(quotient + 0.5)
    # snap tolerance absorbs float division noise (a few ulps), far below one tick
    if abs(quotient - nearest) <= 1e-15 * abs(quotient) + 1e-13:
        return nearest
    if round_up and quotient > math.floor(quotient):
        return math.floor(quotient) + 1
    return math.floor(quotient)


def round_to_tick(raw: float, side: str, delta_p: float) -> int:
    """Round a monetary price onto the tick grid: buys down, sells up.

    Returns the price in tick units.  Raises ValueError for a
    non-finite or non-positive price (the rejected-order signal).
    """
    if not math.isfinite(raw) or raw <= 0.0:
        raise ValueError(f"invalid order price {raw!r}")
    if side == BUY:
        return int(_round_core(raw / delta_p, False))
    if side == SELL:
        return int(_round_core(raw / delta_p, True))
    raise ValueError(f"unknown side {side!r}")


@dataclass
class Order:
    """A limit order; qty is decremented in place as it fills."""

    id: int
    agent: int
    side: str
    price: int  # tick units
    qty: int
    placed_tick: int


@dataclass(frozen=True)
class Trade:
    buy_agent: int
    sell_agent: int
    price: int  # tick units (the resting order's price)
    qty: int
    tick: int


@dataclass
class _Side:
    """One side of the book: FIFO queues per price plus a lazy best-price heap."""

    levels: dict[int, deque] = field(default_factory=dict)
    size: dict[int, int] = field(default_factory=dict)  # live qty per price
    heap: list = field(default_factory=list)  # candidate best prices, stale entries allowed


class Book:
    """Price-time priority book for one instrument, mutated by one thread."""

    def __init__(self):
        self._bids = _Side()
        self._asks = _Side()
        self._by_age: deque[Order] = deque()  # resting orders in placement order
        self._next_id = 0

    def next_id(self) -> int:
        self._next_id += 1
        return self._next_id

    def _side(self, side: str) -> _Side:
        return self._bids if side == BUY else self._asks

    def _best(self, side: str) -> int | None:
        s = self._side(side)
        while s.heap:
            price = -s.heap[0] if side == BUY else s.heap[0]
            if s.size.get(price, 0) > 0:
                return price
            heapq.heappop(s.heap)
        return None

    @property
    def best_bid(self) -> int | None:
        return self._best(BUY)

    @property
    def best_ask(self) -> int | None:
        return self._best(SELL)

    def mid_price(self) -> int | None:
        """(best bid + best ask) / 2 in ticks, halves rounded down; None if one-sided."""
        bid = self._best(BUY)
        ask = self._best(SELL)
        if bid is None or ask is None:
            return None
        return (bid + ask) // 2

    def depth(self, side: str) -> int:
        return sum(self._side(side).size.values())

    def live_orders(self, side: str) -> list[Order]:
        s = self._side(side)
        out = []
        for price in sorted(s.levels):
            out.extend(o for o in s.levels[price] if o.qty > 0)
        return out

    def _rest(self, order: Order) -> None:
        s = self._side(order.side)
        level = s.levels.get(order.price)
        if level is None:
            s.levels[order.price] = deque((order,))
            s.size[order.price] = order.qty
            heapq.heappush(s.heap, -order.price if order.side == BUY else order.price)
        else:
            level.append(order)
            s.size[order.price] += order.qty
        self._by_age.append(order)

    def _pop_head(self, side: str, price: int) -> Order:
        s = self._side(side)
        level = s.levels[price]
        while level[0].qty == 0:  # tombstones from expiry
            level.popleft()
        return level[0]

    def _consume(self, side: str, price: int, taken: int, exhausted: bool) -> None:
        s = self._side(side)
        s.size[price] -= taken
        if exhausted:
            s.levels[price].popleft()
        if s.size[price] == 0:
            del s.levels[price]
            del s.size[price]

    def _match(self, agent: int, side: str, qty: int, limit: int | None,
               now: int) -> tuple[list[Trade], int]:
        """Fill up to qty against the opposing side; returns (fills, qty left)."""
        opp = SELL if side == BUY else BUY
        fills: list[Trade] = []
        while qty > 0:
            best = self._best(opp)
            if best is None:
                break
            if limit is not None:
                if side == BUY and best > limit:
                    break
                if side == SELL and best < limit:
                    break
            resting = self._pop_head(opp, best)
            take = min(qty, resting.qty)
            resting.qty -= take
            qty -= take
            self._consume(opp, best, take, resting.qty == 0)
            if side == BUY:
                fills.append(Trade(agent, resting.agent, best, take, now))
            else:
                fills.append(Trade(resting.agent, agent, best, take, now))
        return fills, qty

    def submit_limit(self, order: Order, now: int) -> tuple[list[Trade], bool]:
        """Match a limit order while it crosses; rest any remainder.

        Trades execute at the resting orders' prices.  Returns the fills
        and whether a remainder was left resting.
        """
        if order.qty < 1 or order.price < 1:
            raise ValueError(f"malformed order {order!r}")
        fills, left = self._match(order.agent, order.side, order.qty, order.price, now)
        order.qty = left
        rested = left > 0
        if rested:
            order.placed_tick = now
            self._rest(order)
        return fills, rested

    def submit_market(self, agent: int, side: str, qty: int, now: int) -> list[Trade]:
        """Consume opposing levels best-first; any unfilled remainder is discarded."""
        if qty < 1:
            raise ValueError(f"market order qty must be >= 1, got {qty}")
        fills, _ = self._match(agent, side, qty, None, now)
        return fills

    def cancel_expired(self, now: int, t_c: int) -> int:
        """Remove every resting order aged t_c or more; returns orders removed."""
        removed = 0
        while self._by_age and now - self._by_age[0].placed_tick >= t_c:
            order = self._by_age.popleft()
            if order.qty > 0:
                s = self._side(order.side)
                s.size[order.price] -= order.qty
                order.qty = 0
                removed += 1
                if s.size[order.price] == 0:
                    del s.levels[order.price]
                    del s.size[order.price]
        return removed
