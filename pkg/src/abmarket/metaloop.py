"""The repeated simulate -> optimize learning loop.

Iteration 0 simulates the market without technical agents.  Each
enabled TA then optimizes its lookback by backtesting against the
recorded series, and the next iteration re-simulates with the new
lookbacks under the SAME master seed, so every NA draw repeats exactly
and the only change between iterations is the TA parameters.  Because
the whole map (lookbacks -> next lookbacks) is deterministic, an exact
repeat of (tm, tr) implies the entire subsequent trajectory repeats —
convergence and cycles are exact-equality questions.

Each TA optimizes against the jointly produced series (both TAs
trading when enabled), and the PSO is cold-started every iteration
with draws keyed on (master_seed, TA, iteration).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .agents import MOMENTUM, REVERSAL, SimParams
from .backtest import backtest_profit
from .market_sim import SimResult, run
from .pso import SwarmConfig, keyed_draws, optimize_with_fitness

TA_M_ONLY = "ta_m_only"
BOTH = "both"
MODES = (TA_M_ONLY, BOTH)

_BRANCH_M = 0
_BRANCH_R = 1


@dataclass(frozen=True)
class MetaRecord:
    """One simulate->optimize iteration.

    tm/tr are the lookbacks this iteration's run used (None in
    iteration 0, which runs without TAs); profit_m/profit_r are the
    realized in-simulation profits of that run; next_tm/next_tr were
    optimized on this run's series and become the next iteration's
    lookbacks; fit_m/fit_r are the backtested profits the optimizer
    attributed to them.
    """

    iteration: int
    tm: int | None
    tr: int | None
    profit_m: float | None
    profit_r: float | None
    next_tm: int | None
    next_tr: int | None
    fit_m: float | None
    fit_r: float | None


def run_meta(sp: SimParams, pso_cfg: SwarmConfig, mode: str, n_meta: int,
             master_seed: int, engine: str = "fast",
             on_iteration: Callable[[MetaRecord, SimResult], None] | None = None,
             ) -> list[MetaRecord]:
    """Run n_meta simulate->optimize iterations; returns all records."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if n_meta < 1:
        raise ValueError(f"n_meta must be >= 1, got {n_meta}")
    if pso_cfg.t_max > sp.t_e:
        raise ValueError(
            f"optimizer upper bound t_max={pso_cfg.t_max} exceeds the run "
            f"length t_e={sp.t_e}; no such lookback can be backtested")
    r_on = mode == BOTH

    records: list[MetaRecord] = []
    tm: int | None = None
    tr: int | None = None
    for i in range(n_meta):
        result = run(sp, tm, tr if r_on else None, master_seed, engine=engine)
        series = result.series
        next_tm, fit_m = optimize_with_fitness(
            lambda lb: backtest_profit(series, MOMENTUM, lb, sp),
            pso_cfg, keyed_draws(master_seed, _BRANCH_M, i))
        next_tr = fit_r = None
        if r_on:
            next_tr, fit_r = optimize_with_fitness(
                lambda lb: backtest_profit(series, REVERSAL, lb, sp),
                pso_cfg, keyed_draws(master_seed, _BRANCH_R, i))
        record = MetaRecord(
            iteration=i, tm=tm, tr=tr if r_on else None,
            profit_m=result.profit_m, profit_r=result.profit_r,
            next_tm=next_tm, next_tr=next_tr, fit_m=fit_m, fit_r=fit_r)
        records.append(record)
        if on_iteration is not None:
            on_iteration(record, result)
        tm, tr = next_tm, next_tr
    return records
