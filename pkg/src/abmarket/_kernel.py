"""Numba-compiled fast simulation engine.

Exploits two structural facts of the market: every resting order is a
one-share NA limit order (TA market orders never rest), and orders
expire exactly t_c ticks after placement.  Resting orders therefore
live in a ring buffer indexed by placed_tick mod t_c — the slot an
incoming order needs is exactly the slot whose occupant just expired.

Price levels are doubly-linked FIFO lists threaded through the ring
slots, with per-side head/tail arrays over a price window recentered
on demand, plus per-block occupancy counts so best-price rescans skip
empty price ranges wholesale.

All agent decisions go through the same numba cores as the reference
engine (agents._form_order_core, rng draws), so the two engines agree
bit for bit.
"""

import numpy as np
from numba import njit

from .agents import _form_order_core, init_agent_params
from .rng import SALT_NA_EPSILON, SALT_NA_RHO, U64, normal_from, uniform_from

# Price window: resting orders must fit in [base, base + width) ticks.
# The initial width is ~10x the default order scatter half-width; the
# window recenters when price drifts and doubles when the live span
# outgrows it, up to a hard cap that only a divergent price process hits.
W_INIT = 1 << 21
W_CAP = 1 << 24
BLK_BITS = 12
BLK = 1 << BLK_BITS


@njit(cache=True, inline="always")
def _rescan(head, blk, count, best, base, s, idx):
    # Find the new best level for side s after level idx emptied.
    # Only called with count[s] > 0, so the walk always terminates.
    i = idx
    if s == 0:  # bids: best is the highest, walk down
        while True:
            if head[0, i] != -1:
                best[0] = i + base
                return
            if (i & (BLK - 1)) == 0:
                b = (i >> BLK_BITS) - 1
                while blk[0, b] == 0:
                    b -= 1
                i = ((b + 1) << BLK_BITS) - 1
            else:
                i -= 1
    else:  # asks: best is the lowest, walk up
        while True:
            if head[1, i] != -1:
                best[1] = i + base
                return
            if (i & (BLK - 1)) == BLK - 1:
                b = (i >> BLK_BITS) + 1
                while blk[1, b] == 0:
                    b += 1
                i = b << BLK_BITS
            else:
                i += 1


@njit(cache=True, inline="always")
def _insert(rb_price, rb_side, rb_next, rb_prev, head, tail, blk, count, best,
            base, slot, price, s):
    idx = price - base
    rb_price[slot] = price
    rb_side[slot] = s + 1
    rb_next[slot] = -1
    tl = tail[s, idx]
    rb_prev[slot] = tl
    if tl == -1:
        head[s, idx] = slot
    else:
        rb_next[tl] = slot
    tail[s, idx] = slot
    blk[s, idx >> BLK_BITS] += 1
    if count[s] == 0:
        best[s] = price
    elif s == 0:
        if price > best[0]:
            best[0] = price
    else:
        if price < best[1]:
            best[1] = price
    count[s] += 1


@njit(cache=True, inline="always")
def _remove(rb_price, rb_side, rb_next, rb_prev, head, tail, blk, count, best,
            base, slot):
    s = rb_side[slot] - 1
    price = rb_price[slot]
    idx = price - base
    p = rb_prev[slot]
    nx = rb_next[slot]
    if p == -1:
        head[s, idx] = nx
    else:
        rb_next[p] = nx
    if nx == -1:
        tail[s, idx] = p
    else:
        rb_prev[nx] = p
    rb_side[slot] = 0
    blk[s, idx >> BLK_BITS] -= 1
    count[s] -= 1
    if price == best[s] and head[s, idx] == -1 and count[s] > 0:
        _rescan(head, blk, count, best, base, s, idx)


@njit(cache=True, inline="always")
def _take_best(rb_price, rb_side, rb_next, rb_prev, head, tail, blk, count, best,
               base, s):
    # Pop the oldest order at side s's best price; returns its price.
    price = best[s]
    slot = head[s, price - base]
    _remove(rb_price, rb_side, rb_next, rb_prev, head, tail, blk, count, best,
            base, slot)
    return price


@njit(cache=True, inline="always")
def _sweep(rb_price, rb_side, rb_next, rb_prev, head, tail, blk, count, best,
           base, s_opp, qty):
    # Market order: consume up to qty one-share orders from side s_opp.
    filled = 0
    cost = 0
    while filled < qty and count[s_opp] > 0:
        cost += _take_best(rb_price, rb_side, rb_next, rb_prev, head, tail,
                           blk, count, best, base, s_opp)
        filled += 1
    return filled, cost


@njit(cache=True)
def _rebuild(rb_price, rb_side, rb_next, rb_prev, head, tail, blk, count, best,
             new_base, t, ring):
    # Relink every live order into a freshly based window.  Callers size
    # the window to cover all live prices first, so this cannot fail.
    head[:, :] = -1
    tail[:, :] = -1
    blk[:, :] = 0
    count[0] = 0
    count[1] = 0
    start = t - ring + 1
    if start < 1:
        start = 1
    # reinsert in placement order so FIFO priority survives the move
    for tick in range(start, t + 1):
        slot = tick % ring
        if rb_side[slot] != 0:
            price = rb_price[slot]
            s = rb_side[slot] - 1
            rb_side[slot] = 0
            _insert(rb_price, rb_side, rb_next, rb_prev, head, tail, blk,
                    count, best, new_base, slot, price, s)


@njit(cache=True, nogil=True)
def run_market(seed, n, t_e, t_c, delta_p, p_f, pf_ticks, p_d, sigma_eps,
               w1_max, w2_max, w3_max, tau_max, tm, tr, s_shares, mids):
    """One full simulation; fills mids[0..t_e] (tick units) in place.

    tm/tr <= 0 disable the respective TA.  Returns
    (trade_count, na_orders, cash_m, pos_m, cash_r, pos_r, err).
    """
    ring = t_c
    rb_price = np.zeros(ring, np.int64)
    rb_side = np.zeros(ring, np.int8)
    rb_next = np.full(ring, -1, np.int32)
    rb_prev = np.full(ring, -1, np.int32)
    width = W_INIT
    head = np.full((2, width), -1, np.int32)
    tail = np.full((2, width), -1, np.int32)
    blk = np.zeros((2, width >> BLK_BITS), np.int32)
    count = np.zeros(2, np.int64)
    best = np.zeros(2, np.int64)
    base = pf_ticks - (width >> 1)
    pd_ticks = np.int64(p_d / delta_p) + 1

    w1, w2, w3, tau = init_agent_params(seed, n, w1_max, w2_max, w3_max, tau_max)

    mids[0] = pf_ticks
    m_on = tm > 0
    r_on = tr > 0
    thresh = tm if tm > tr else tr
    pos_m = 0
    cash_m = 0
    pos_r = 0
    cash_r = 0
    trade_count = 0
    na_orders = 0

    for t in range(1, t_e + 1):
        slot = t % ring
        if rb_side[slot] != 0:  # order placed at t - t_c expires now
            _remove(rb_price, rb_side, rb_next, rb_prev, head, tail, blk,
                    count, best, base, slot)
        j = (t - 1) % n
        p_prev = mids[t - 1]
        lag_t = t - tau[j] - 1
        has_lag = lag_t >= 0
        p_lag = mids[lag_t] if has_lag else 1
        eps = normal_from(seed, SALT_NA_EPSILON, U64(j), U64(t), U64(0), sigma_eps)
        rho = uniform_from(seed, SALT_NA_RHO, U64(j), U64(t), U64(0), 0.0, 1.0)
        side_code, price = _form_order_core(
            w1[j], w2[j], w3[j], pf_ticks, p_prev, p_lag, has_lag,
            eps, rho, t < t_c, p_f, p_d, delta_p)
        if side_code != 0:
            na_orders += 1
            s = 0 if side_code == 1 else 1
            opp = 1 - s
            crossed = False
            if count[opp] > 0:
                if s == 0:
                    crossed = best[1] <= price
                else:
                    crossed = best[0] >= price
            if crossed:
                _take_best(rb_price, rb_side, rb_next, rb_prev, head, tail,
                           blk, count, best, base, opp)
                trade_count += 1
            else:
                idx = price - base
                if idx < 0 or idx >= width:
                    # refit the window around all live prices plus this one
                    lo = price
                    hi = price
                    for s2 in range(ring):
                        if rb_side[s2] != 0:
                            p2 = rb_price[s2]
                            if p2 < lo:
                                lo = p2
                            if p2 > hi:
                                hi = p2
                    span = hi - lo
                    margin = span + 2 * pd_ticks + 4096
                    while span + 2 * margin > width:
                        if width >= W_CAP:
                            return (trade_count, na_orders, cash_m, pos_m,
                                    cash_r, pos_r, 1)
                        width *= 2
                        head = np.full((2, width), -1, np.int32)
                        tail = np.full((2, width), -1, np.int32)
                        blk = np.zeros((2, width >> BLK_BITS), np.int32)
                    base = lo - margin
                    _rebuild(rb_price, rb_side, rb_next, rb_prev, head, tail,
                             blk, count, best, base, t, ring)
                _insert(rb_price, rb_side, rb_next, rb_prev, head, tail, blk,
                        count, best, base, slot, price, s)
        if count[0] > 0 and count[1] > 0:
            mids[t] = (best[0] + best[1]) >> 1
        else:
            mids[t] = pf_ticks

        if (m_on or r_on) and t % n == 0 and t >= thresh:
            if m_on and t - tm >= 1:
                pn = mids[t]
                pl = mids[t - tm]
                tgt = pos_m
                if pn > pl:
                    tgt = s_shares
                elif pn < pl:
                    tgt = -s_shares
                if tgt != pos_m:
                    d = tgt - pos_m
                    if d > 0:
                        filled, cost = _sweep(rb_price, rb_side, rb_next, rb_prev,
                                              head, tail, blk, count, best, base,
                                              1, d)
                        pos_m += filled
                        cash_m -= cost
                    else:
                        filled, cost = _sweep(rb_price, rb_side, rb_next, rb_prev,
                                              head, tail, blk, count, best, base,
                                              0, -d)
                        pos_m -= filled
                        cash_m += cost
                    trade_count += filled
            if r_on and t - tr >= 1:
                pn = mids[t]
                pl = mids[t - tr]
                tgt = pos_r
                if pn < pl:
                    tgt = s_shares
                elif pn > pl:
                    tgt = -s_shares
                if tgt != pos_r:
                    d = tgt - pos_r
                    if d > 0:
                        filled, cost = _sweep(rb_price, rb_side, rb_next, rb_prev,
                                              head, tail, blk, count, best, base,
                                              1, d)
                        pos_r += filled
                        cash_r -= cost
                    else:
                        filled, cost = _sweep(rb_price, rb_side, rb_next, rb_prev,
                                              head, tail, blk, count, best, base,
                                              0, -d)
                        pos_r -= filled
                        cash_r += cost
                    trade_count += filled

    return trade_count, na_orders, cash_m, pos_m, cash_r, pos_r, 0
