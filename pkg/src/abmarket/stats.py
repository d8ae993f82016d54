"""Stylized-fact statistics over recorded price series.

Validation statistics for the market core: excess kurtosis of windowed
log returns (fat tails) and the autocorrelation of squared returns at
short lags (volatility clustering).  Returns are non-overlapping —
overlapping windows inflate autocorrelation mechanically — and a
burn-in prefix is excluded because warm-up order flow uses a different
side rule and is unrepresentative.
"""

from __future__ import annotations

import numpy as np

from .market_sim import PriceSeries


def _prices(series) -> np.ndarray:
    if isinstance(series, PriceSeries):
        return series.ticks[1:].astype(np.float64)
    arr = np.asarray(series, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError("series must be one-dimensional")
    return arr


def log_returns(series, window: int, burn_in: int = 0) -> np.ndarray:
    """Non-overlapping log returns ln(P[t]/P[t-window]) for
    t = burn_in+window, burn_in+2*window, ... (ticks are 1-based; a
    burn_in of 0 starts from the first recorded price)."""
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    if burn_in < 0:
        raise ValueError(f"burn_in must be >= 0, got {burn_in}")
    prices = _prices(series)
    anchor = max(burn_in, 1) - 1  # 0-based index of the first compared price
    n_ret = (len(prices) - 1 - anchor) // window
    if n_ret < 1:
        raise ValueError(
            f"series length {len(prices)} too short for burn_in {burn_in} "
            f"+ window {window}")
    ends = anchor + window * np.arange(1, n_ret + 1)
    return np.log(prices[ends] / prices[ends - window])


def excess_kurtosis(xs) -> float:
    """m4/m2^2 - 3; positive indicates a fat tail."""
    xs = np.asarray(xs, dtype=np.float64)
    if xs.size < 4:
        raise ValueError(f"need >= 4 samples, got {xs.size}")
    centered = xs - xs.mean()
    m2 = np.mean(centered**2)
    if m2 == 0.0:
        raise ValueError("zero variance")
    m4 = np.mean(centered**4)
    return float(m4 / m2**2 - 3.0)


def autocorr(xs, lag: int) -> float:
    """Pearson correlation of the sequence with itself at the given lag."""
    xs = np.asarray(xs, dtype=np.float64)
    if lag < 0:
        raise ValueError(f"lag must be >= 0, got {lag}")
    if lag == 0:
        if np.var(xs) == 0.0:
            raise ValueError("zero variance")
        return 1.0
    if xs.size < lag + 2:
        raise ValueError(f"need >= {lag + 2} samples for lag {lag}, got {xs.size}")
    a = xs[:-lag]
    b = xs[lag:]
    if np.var(a) == 0.0 or np.var(b) == 0.0:
        raise ValueError("degenerate variance")
    return float(np.corrcoef(a, b)[0, 1])


def sq_return_autocorrs(series, window: int, burn_in: int = 0,
                        max_lag: int = 5) -> np.ndarray:
    """Autocorrelation of squared returns at lags 1..max_lag (the
    volatility-clustering panel)."""
    sq = log_returns(series, window, burn_in) ** 2
    return np.array([autocorr(sq, lag) for lag in range(1, max_lag + 1)])


def return_stdev(series, window: int, burn_in: int = 0) -> float:
    """Standard deviation of the windowed log returns."""
    return float(np.std(log_returns(series, window, burn_in)))
