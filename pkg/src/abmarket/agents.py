"""Agent decision rules.

Normal agents (NAs) blend three expectation terms — reversion to a
fundamental value, a lagged historical return, and noise — into an
expected return, scatter an order price around the implied expected
price and order one share, buying when the expected price exceeds the
order price.  During warm-up, while resting orders are still being
accumulated, the side comparison uses the fundamental value instead.

Technical agents (TAs) target a fixed long or short position from the
sign of a lagged price comparison: momentum follows the move, reversal
opposes it.  Equality leaves the position unchanged.

The hot numeric cores are numba-compiled and shared by the reference
and fast simulation engines so both produce bit-identical decisions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .orderbook import BUY, SELL, _round_core
from .rng import SALT_AGENT_INIT, U64, uniform_from

MOMENTUM = "momentum"
REVERSAL = "reversal"

# component indices within the agent-init stream
_W1, _W2, _W3, _TAU = 0, 1, 2, 3

# Orders beyond this many ticks are rejected: a millionfold rise over the
# default fundamental, far past any meaningful run, and it keeps every
# downstream integer (mids, cash totals) comfortably inside int64.
PRICE_TICK_CAP = 10**12


@dataclass(frozen=True)
class SimParams:
    """Market-level constants for one simulation run."""

    n: int = 1000              # number of normal agents
    delta_p: float = 0.01      # minimum price increment (monetary)
    p_f: float = 10000.0       # fundamental value (monetary)
    w1_max: float = 1.0        # fundamental weight upper bound
    w2_max: float = 100.0      # historical-return weight upper bound
    w3_max: float = 1.0        # noise weight upper bound
    tau_max: int = 10000       # max NA lookback (ticks)
    sigma_eps: float = 0.03    # noise scale
    p_d: float = 1000.0        # order-price scatter half-width (monetary)
    t_c: int = 10000           # resting order lifetime (ticks)
    s_shares: int = 100        # TA target position size
    t_e: int = 20_000_000      # run length (ticks)
    # sigma_eps is read as the noise standard deviation by default; set
    # this to treat it as the variance instead (scale = sqrt(sigma_eps))
    sigma_eps_is_variance: bool = False

    def __post_init__(self):
        positive = {
            "n": self.n, "delta_p": self.delta_p, "p_f": self.p_f,
            "w1_max": self.w1_max, "w2_max": self.w2_max, "w3_max": self.w3_max,
            "tau_max": self.tau_max, "sigma_eps": self.sigma_eps, "p_d": self.p_d,
            "t_c": self.t_c, "s_shares": self.s_shares, "t_e": self.t_e,
        }
        for name, value in positive.items():
            if not value > 0:
                raise ValueError(f"SimParams.{name} must be positive, got {value}")
        if self.t_c > self.t_e:
            raise ValueError(f"t_c ({self.t_c}) must not exceed t_e ({self.t_e})")

    @property
    def p_f_ticks(self) -> int:
        return int(round(self.p_f / self.delta_p))

    @property
    def noise_scale(self) -> float:
        if self.sigma_eps_is_variance:
            return math.sqrt(self.sigma_eps)
        return self.sigma_eps


@dataclass(frozen=True)
class NAParams:
    """Per-agent weights and lookback, drawn once at simulation start."""

    w1: float
    w2: float
    w3: float
    tau: int


@dataclass(frozen=True)
class NAOrderIntent:
    side: str
    price: int  # tick units
    qty: int = 1


@dataclass
class TAState:
    """A technical agent's strategy and holdings.

    cash_ticks accumulates fills exactly in (tick x share) units;
    cash is its monetary value.  Cash may go negative (no funding
    constraint) and |position| never exceeds the target size.
    """

    kind: str
    lookback: int
    position: int = 0
    cash: float = 0.0
    cash_ticks: int = 0


@njit(cache=True)
def init_agent_params(seed, n, w1_max, w2_max, w3_max, tau_max):
    """Draw all NA weights and lookbacks from the agent-init stream."""
    w1 = np.empty(n, np.float64)
    w2 = np.empty(n, np.float64)
    w3 = np.empty(n, np.float64)
    tau = np.empty(n, np.int64)
    for j in range(n):
        w1[j] = uniform_from(seed, SALT_AGENT_INIT, U64(j), U64(_W1), U64(0), 0.0, w1_max)
        w2[j] = uniform_from(seed, SALT_AGENT_INIT, U64(j), U64(_W2), U64(0), 0.0, w2_max)
        w3[j] = uniform_from(seed, SALT_AGENT_INIT, U64(j), U64(_W3), U64(0), 0.0, w3_max)
        u = uniform_from(seed, SALT_AGENT_INIT, U64(j), U64(_TAU), U64(0), 1.0, float(tau_max))
        tau[j] = int(u + 0.5)
    return w1, w2, w3, tau


def draw_na_params(master_seed: int, agent: int, sp: SimParams) -> NAParams:
    """The parameters agent `agent` (0-based) receives under this seed."""
    w1, w2, w3, tau = init_agent_params(
        U64(master_seed & (2**64 - 1)), agent + 1,
        sp.w1_max, sp.w2_max, sp.w3_max, sp.tau_max)
    return NAParams(w1=float(w1[agent]), w2=float(w2[agent]), w3=float(w3[agent]),
                    tau=int(tau[agent]))


@njit(cache=True, inline="always")
def _form_order_core(w1, w2, w3, pf_ticks, p_prev_ticks, p_lag_ticks, has_lag,
                     eps, rho, warmup, p_f_mon, p_d, delta_p):
    """Full NA price formation; returns (side_code, price_ticks).

    side_code: +1 buy, -1 sell, 0 no order (tie or rejected price).
    """
    log_fund = math.log(pf_ticks / p_prev_ticks)
    if has_lag:
        log_mom = math.log(p_prev_ticks / p_lag_ticks)
    else:
        log_mom = 0.0
    r_e = (w1 * log_fund + w2 * log_mom + w3 * eps) / (w1 + w2 + w3)
    p_e = p_prev_ticks * delta_p * math.exp(r_e)
    p_o = p_e + p_d * (2.0 * rho - 1.0)
    if not math.isfinite(p_o) or p_o <= 0.0 or p_o > PRICE_TICK_CAP * delta_p:
        return 0, 0
    ref = p_f_mon if warmup else p_e
    if ref > p_o:
        side = 1
        price = _round_core(p_o / delta_p, False)
    elif ref < p_o:
        side = -1
        price = _round_core(p_o / delta_p, True)
    else:
        return 0, 0
    if price < 1 or price > PRICE_TICK_CAP:
        return 0, 0
    return side, price


def na_expected_return(p: NAParams, p_f: float, p_prev: float,
                       p_lag: float | None, eps: float) -> float:
    """Weighted expected return; the historical term is zero when the
    lagged price is unavailable (early ticks)."""
    if p_prev <= 0.0 or (p_lag is not None and p_lag <= 0.0):
        raise ValueError("prices must be positive")
    mom = 0.0 if p_lag is None else math.log(p_prev / p_lag)
    return (p.w1 * math.log(p_f / p_prev) + p.w2 * mom + p.w3 * eps) / (p.w1 + p.w2 + p.w3)


def na_form_order(p: NAParams, p_prev_ticks: int, p_lag_ticks: int | None,
                  eps: float, rho: float, t: int, sp: SimParams) -> NAOrderIntent | None:
    """Form one NA order from prices in tick units.

    Returns None when the expected and order price tie exactly or the
    order price falls off the positive grid.
    """
    if not 0.0 < rho < 1.0:
        raise ValueError(f"rho must lie in (0, 1), got {rho}")
    if p_prev_ticks < 1 or (p_lag_ticks is not None and p_lag_ticks < 1):
        raise ValueError("prices must be positive")
    side_code, price = _form_order_core(
        p.w1, p.w2, p.w3, sp.p_f_ticks, p_prev_ticks,
        p_lag_ticks if p_lag_ticks is not None else 1, p_lag_ticks is not None,
        eps, rho, t < sp.t_c, sp.p_f, sp.p_d, sp.delta_p)
    if side_code == 0:
        return None
    return NAOrderIntent(side=BUY if side_code > 0 else SELL, price=int(price))


def ta_target(kind: str, p_now: int, p_lag: int, s_shares: int) -> int | None:
    """Target position from a lagged price comparison; None = unchanged."""
    if p_now == p_lag:
        return None
    trending_up = p_now > p_lag
    if kind == MOMENTUM:
        return s_shares if trending_up else -s_shares
    if kind == REVERSAL:
        return -s_shares if trending_up else s_shares
    raise ValueError(f"unknown TA kind {kind!r}")
