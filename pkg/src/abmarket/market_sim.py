"""The full market simulation loop.

Tick time advances by one per NA order: at tick t, NA ((t-1) mod n)+1
forms and submits one limit order after expired orders are purged, and
the mid price is recorded.  After every n-th NA order the technical
agents act in fixed order (momentum first), reading their signals from
the recorded mid series and trading with market orders against the
live book; TA actions do not consume ticks.  A run is a pure function
of (params, lookbacks, master_seed).

Two engines produce bit-identical results: "fast" (numba ring-buffer
book, the default) and "reference" (the plain orderbook module, kept
as the readable statement of the loop and used to cross-check the
kernel).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernel
from .agents import (MOMENTUM, REVERSAL, SimParams, TAState, _form_order_core,
                     init_agent_params, ta_target)
from .orderbook import BUY, SELL, Book, Order, Trade
from .rng import SALT_NA_EPSILON, SALT_NA_RHO, U64, normal_from, uniform_from

TA_M_AGENT = -1
TA_R_AGENT = -2

_MASK64 = 2**64 - 1


@dataclass
class PriceSeries:
    """Mid prices in tick units, one per tick 1..t_e.

    ticks[0] is the pre-open anchor (the fundamental price), used by
    price formation at tick 1; the recorded series proper is 1..t_e.
    """

    ticks: np.ndarray
    delta_p: float

    def __len__(self) -> int:
        return len(self.ticks) - 1

    def __getitem__(self, t: int) -> int:
        if not 1 <= t <= len(self):
            raise IndexError(f"tick {t} outside 1..{len(self)}")
        return int(self.ticks[t])

    def monetary(self) -> np.ndarray:
        """Mid prices in monetary units for ticks 1..t_e."""
        return self.ticks[1:] * self.delta_p


@dataclass
class SimResult:
    series: PriceSeries
    ta_m: TAState | None
    ta_r: TAState | None
    profit_m: float | None
    profit_r: float | None
    trade_count: int
    na_orders: int
    # per-fill logs, populated by the reference engine only
    fills_m: list[Trade] | None = field(default=None, repr=False)
    fills_r: list[Trade] | None = field(default=None, repr=False)


def _profit(cash_ticks: int, position: int, sp: SimParams) -> float:
    """Final cash per unit fundamental, with shares valued at the fundamental."""
    return (cash_ticks * sp.delta_p + position * sp.p_f) / sp.p_f


def ta_rebalance(book: Book, ta: TAState, target: int, now: int,
                 fill_log: list[Trade] | None = None) -> TAState:
    """Market-order toward target; position and cash track actual fills.

    A shortfall (thin opposing book) leaves the position between old
    and target; the next decision retries naturally.
    """
    if target == ta.position:
        raise ValueError("ta_rebalance requires target != position")
    diff = target - ta.position
    agent = TA_M_AGENT if ta.kind == MOMENTUM else TA_R_AGENT
    fills = book.submit_market(agent, BUY if diff > 0 else SELL, abs(diff), now)
    filled = sum(f.qty for f in fills)
    cost_ticks = sum(f.price * f.qty for f in fills)
    if diff > 0:
        ta.position += filled
        ta.cash_ticks -= cost_ticks
    else:
        ta.position -= filled
        ta.cash_ticks += cost_ticks
    if fill_log is not None:
        fill_log.extend(fills)
    return ta


def _run_reference(sp: SimParams, tm: int | None, tr: int | None,
                   master_seed: int) -> SimResult:
    seed = U64(master_seed & _MASK64)
    n, t_e, t_c = sp.n, sp.t_e, sp.t_c
    pf_ticks = sp.p_f_ticks
    w1, w2, w3, tau = init_agent_params(seed, n, sp.w1_max, sp.w2_max,
                                        sp.w3_max, sp.tau_max)
    book = Book()
    mids = np.empty(t_e + 1, np.int64)
    mids[0] = pf_ticks

    noise_scale = sp.noise_scale
    ta_m = TAState(MOMENTUM, tm) if tm is not None else None
    ta_r = TAState(REVERSAL, tr) if tr is not None else None
    fills_m: list[Trade] = []
    fills_r: list[Trade] = []
    thresh = max(tm or 0, tr or 0)
    trade_count = 0
    na_orders = 0

    for t in range(1, t_e + 1):
        book.cancel_expired(t, t_c)
        j = (t - 1) % n
        lag_t = t - int(tau[j]) - 1
        has_lag = lag_t >= 0
        p_lag = int(mids[lag_t]) if has_lag else 1
        eps = normal_from(seed, SALT_NA_EPSILON, U64(j), U64(t), U64(0), noise_scale)
        rho = uniform_from(seed, SALT_NA_RHO, U64(j), U64(t), U64(0), 0.0, 1.0)
        side_code, price = _form_order_core(
            w1[j], w2[j], w3[j], pf_ticks, int(mids[t - 1]), p_lag, has_lag,
            eps, rho, t < t_c, sp.p_f, sp.p_d, sp.delta_p)
        if side_code != 0:
            na_orders += 1
            order = Order(id=t, agent=j, side=BUY if side_code == 1 else SELL,
                          price=int(price), qty=1, placed_tick=t)
            fills, _ = book.submit_limit(order, t)
            trade_count += len(fills)
        mid = book.mid_price()
        mids[t] = pf_ticks if mid is None else mid

        if t % n == 0 and thresh > 0 and t >= thresh:
            book.cancel_expired(t, t_c)  # no-op after the purge above; keeps the contract explicit
            for ta, log in ((ta_m, fills_m), (ta_r, fills_r)):
                if ta is None or t - ta.lookback < 1:
                    continue
                target = ta_target(ta.kind, int(mids[t]), int(mids[t - ta.lookback]),
                                   sp.s_shares)
                if target is not None and target != ta.position:
                    before = len(log)
                    ta_rebalance(book, ta, target, t, log)
                    trade_count += sum(f.qty for f in log[before:])

    series = PriceSeries(mids, sp.delta_p)
    for ta in (ta_m, ta_r):
        if ta is not None:
            ta.cash = ta.cash_ticks * sp.delta_p
    return SimResult(
        series=series, ta_m=ta_m, ta_r=ta_r,
        profit_m=_profit(ta_m.cash_ticks, ta_m.position, sp) if ta_m else None,
        profit_r=_profit(ta_r.cash_ticks, ta_r.position, sp) if ta_r else None,
        trade_count=trade_count, na_orders=na_orders,
        fills_m=fills_m if ta_m else None,
        fills_r=fills_r if ta_r else None)


def _run_fast(sp: SimParams, tm: int | None, tr: int | None,
              master_seed: int) -> SimResult:
    mids = np.empty(sp.t_e + 1, np.int64)
    out = _kernel.run_market(
        U64(master_seed & _MASK64), sp.n, sp.t_e, sp.t_c, sp.delta_p, sp.p_f,
        sp.p_f_ticks, sp.p_d, sp.noise_scale, sp.w1_max, sp.w2_max, sp.w3_max,
        sp.tau_max, tm if tm is not None else 0, tr if tr is not None else 0,
        sp.s_shares, mids)
    trade_count, na_orders, cash_m, pos_m, cash_r, pos_r, err = out
    if err != 0:
        raise RuntimeError(
            "price drifted past the fast engine's book window; "
            "rerun with engine='reference'")
    ta_m = ta_r = None
    profit_m = profit_r = None
    if tm is not None:
        ta_m = TAState(MOMENTUM, tm, position=int(pos_m),
                       cash=cash_m * sp.delta_p, cash_ticks=int(cash_m))
        profit_m = _profit(int(cash_m), int(pos_m), sp)
    if tr is not None:
        ta_r = TAState(REVERSAL, tr, position=int(pos_r),
                       cash=cash_r * sp.delta_p, cash_ticks=int(cash_r))
        profit_r = _profit(int(cash_r), int(pos_r), sp)
    return SimResult(series=PriceSeries(mids, sp.delta_p), ta_m=ta_m, ta_r=ta_r,
                     profit_m=profit_m, profit_r=profit_r,
                     trade_count=int(trade_count), na_orders=int(na_orders))


def run(sp: SimParams, ta_m_lookback: int | None = None,
        ta_r_lookback: int | None = None, master_seed: int = 0,
        engine: str = "fast") -> SimResult:
    """Simulate one full run; deterministic in (sp, lookbacks, master_seed)."""
    for name, lb in (("ta_m_lookback", ta_m_lookback), ("ta_r_lookback", ta_r_lookback)):
        if lb is not None and (int(lb) != lb or lb < 1):
            raise ValueError(f"{name} must be a positive integer, got {lb!r}")
    tm = int(ta_m_lookback) if ta_m_lookback is not None else None
    tr = int(ta_r_lookback) if ta_r_lookback is not None else None
    if engine == "fast":
        return _run_fast(sp, tm, tr, master_seed)
    if engine == "reference":
        return _run_reference(sp, tm, tr, master_seed)
    raise ValueError(f"unknown engine {engine!r}")
