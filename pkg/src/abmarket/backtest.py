"""Zero-impact strategy evaluation against a recorded price series.

The backtest replays a TA's decision rule over a fixed series: at every
n-th tick past its lookback it compares the mid with the lagged mid,
moves its position to the implied target at the decision tick's mid
(full fill, no market impact), and is finally scored as cash per unit
fundamental with open shares valued at the fundamental.  Cash is
accumulated in integer (tick x share) units, so equal-magnitude long
and short strategies produce exactly opposite profits.
"""

from __future__ import annotations

from numba import njit

from .agents import MOMENTUM, REVERSAL, SimParams
from .market_sim import PriceSeries


@njit(cache=True, nogil=True)
def _backtest_core(mids, n, t_e, lookback, kind_sign, s_shares):
    pos = 0
    cash = 0  # tick x share units
    for t in range(n, t_e + 1, n):
        if t - lookback < 1:
            continue
        p_now = mids[t]
        p_lag = mids[t - lookback]
        if p_now > p_lag:
            tgt = kind_sign * s_shares
        elif p_now < p_lag:
            tgt = -kind_sign * s_shares
        else:
            continue
        if tgt != pos:
            cash -= (tgt - pos) * p_now
            pos = tgt
    return cash, pos


def backtest_profit(series: PriceSeries, kind: str, lookback: float,
                    sp: SimParams) -> float:
    """Profit (in units of the fundamental) of running the strategy alone
    over the recorded series.  Non-integer lookbacks are rounded first."""
    if kind == MOMENTUM:
        sign = 1
    elif kind == REVERSAL:
        sign = -1
    else:
        raise ValueError(f"unknown TA kind {kind!r}")
    lb = int(round(lookback))
    if lb < 1 or lb > len(series):
        raise ValueError(f"lookback {lookback!r} outside 1..{len(series)}")
    cash, pos = _backtest_core(series.ticks, sp.n, len(series), lb, sign,
                               sp.s_shares)
    return (cash * sp.delta_p + pos * sp.p_f) / sp.p_f
