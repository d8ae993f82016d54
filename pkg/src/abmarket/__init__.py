"""Agent-based continuous double auction market simulator.

A population of normal agents trades one stock through a price-time
priority order book; optional momentum/reversal technical agents trade
market orders toward fixed position targets; a learning harness
repeatedly re-optimizes the technical lookbacks by backtesting against
each run's recorded prices under identical random draws, to study
whether the optimized parameters ever settle.
"""

__version__ = "0.1.0"

from .agents import (MOMENTUM, REVERSAL, NAOrderIntent, NAParams, SimParams,
                     TAState, draw_na_params, na_expected_return,
                     na_form_order, ta_target)
from .backtest import backtest_profit
from .config import RunConfig, apply_preset, load_config
from .market_sim import PriceSeries, SimResult, run, ta_rebalance
from .metaloop import BOTH, TA_M_ONLY, MetaRecord, run_meta
from .orderbook import BUY, SELL, Book, Order, Trade, round_to_tick
from .pso import Swarm, SwarmConfig, init_swarm, keyed_draws, optimize, step
from .rng import Stream, StreamKey, normal, uniform
from .stats import (autocorr, excess_kurtosis, log_returns,
                    return_stdev, sq_return_autocorrs)

__all__ = [
    "BOTH", "BUY", "Book", "MOMENTUM", "MetaRecord", "NAOrderIntent",
    "NAParams", "Order", "PriceSeries", "REVERSAL", "RunConfig", "SELL",
    "SimParams", "SimResult", "Stream", "StreamKey", "Swarm", "SwarmConfig",
    "TAState", "TA_M_ONLY", "Trade", "apply_preset", "autocorr",
    "backtest_profit", "draw_na_params", "excess_kurtosis", "init_swarm",
    "keyed_draws", "load_config", "log_returns", "na_expected_return",
    "na_form_order", "normal", "optimize", "return_stdev", "round_to_tick",
    "run", "run_meta", "sq_return_autocorrs", "step", "ta_rebalance",
    "ta_target", "uniform",
]
