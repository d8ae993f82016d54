"""Command-line entry point.

Subcommands: simulate, backtest, optimize, metaloop, stats.  Flags
mirror the RunConfig fields; a config file (key=value lines) can set
the same values with flags taking precedence.  Every output file
embeds the fully resolved config and master seed as '# key=value'
comment lines, so any file can be regenerated exactly.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .agents import MOMENTUM, REVERSAL
from .backtest import backtest_profit
from .config import PRESETS, RunConfig, load_config, parse_bool
from .market_sim import PriceSeries, SimResult, run
from .metaloop import MODES, run_meta
from .pso import keyed_draws, optimize_with_fitness
from .stats import (excess_kurtosis, log_returns, return_stdev,
                    sq_return_autocorrs)

_KINDS = (MOMENTUM, REVERSAL)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def _header_lines(cfg: RunConfig, kind: str, extra: dict | None = None) -> list[str]:
    lines = [f"# abmarket {kind} v{__version__}"]
    lines += [f"# {k}={_fmt(v)}" for k, v in cfg.items()]
    if extra:
        lines += [f"# {k}={_fmt(v)}" for k, v in extra.items()]
    return lines


def write_series_csv(path: Path, cfg: RunConfig, result: SimResult,
                     extra: dict | None = None) -> None:
    series = result.series
    mids = series.ticks[1:] * series.delta_p
    with open(path, "w") as f:
        for line in _header_lines(cfg, "series", extra):
            f.write(line + "\n")
        f.write("tick,mid\n")
        chunk: list[str] = []
        for t in range(len(mids)):
            chunk.append(f"{t + 1},{float(mids[t])!r}\n")
            if len(chunk) >= 65536:
                f.write("".join(chunk))
                chunk.clear()
        f.write("".join(chunk))


def read_series_csv(path: Path) -> tuple[PriceSeries, dict]:
    meta: dict = {}
    mids: list[float] = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line.lstrip("# ")
                if "=" in body:
                    key, _, val = body.partition("=")
                    meta[key.strip()] = val.strip()
                continue
            if line.startswith("tick,"):
                continue
            _, _, mid = line.partition(",")
            mids.append(float(mid))
    if not mids:
        raise ValueError(f"{path}: no price rows")
    delta_p = float(meta.get("delta_p", "0.01"))
    p_f = float(meta.get("p_f", mids[0]))
    ticks = np.empty(len(mids) + 1, np.int64)
    ticks[0] = int(round(p_f / delta_p))
    ticks[1:] = np.round(np.asarray(mids) / delta_p).astype(np.int64)
    return PriceSeries(ticks, delta_p), meta


def _write_summary(path: Path, cfg: RunConfig, result: SimResult,
                   extra: dict) -> None:
    with open(path, "w") as f:
        for line in _header_lines(cfg, "summary", extra):
            f.write(line + "\n")
        f.write(f"trade_count={result.trade_count}\n")
        f.write(f"na_orders={result.na_orders}\n")
        f.write(f"final_mid={_fmt(result.series[len(result.series)] * cfg.delta_p)}\n")
        if result.profit_m is not None:
            f.write(f"profit_m={_fmt(result.profit_m)}\n")
            f.write(f"position_m={result.ta_m.position}\n")
        if result.profit_r is not None:
            f.write(f"profit_r={_fmt(result.profit_r)}\n")
            f.write(f"position_r={result.ta_r.position}\n")


def _seed_path(path: Path, seed: int, many: bool) -> Path:
    if not many:
        return path
    return path.with_name(f"{path.stem}_seed{seed}{path.suffix}")


def cmd_simulate(args, cfg: RunConfig) -> int:
    sp = cfg.sim_params()
    seeds = [cfg.master_seed + i for i in range(args.seeds)]
    many = len(seeds) > 1

    def one(seed: int) -> None:
        result = run(sp, args.ta_m, args.ta_r, seed, engine=args.engine)
        extra = {"ta_m": args.ta_m, "ta_r": args.ta_r, "master_seed_used": seed}
        if args.out is not None:
            write_series_csv(_seed_path(Path(args.out), seed, many), cfg, result, extra)
        if args.summary is not None:
            _write_summary(_seed_path(Path(args.summary), seed, many), cfg, result, extra)
        if args.out is None and args.summary is None:
            print(f"seed={seed} trades={result.trade_count} "
                  f"profit_m={_fmt(result.profit_m)} profit_r={_fmt(result.profit_r)}")

    if args.workers > 1 and many:
        with ThreadPoolExecutor(max_workers=args.workers) as pool:
            list(pool.map(one, seeds))
    else:
        for seed in seeds:
            one(seed)
    return 0


def cmd_backtest(args, cfg: RunConfig) -> int:
    series, _ = read_series_csv(Path(args.series))
    profit = backtest_profit(series, args.kind, args.lookback, cfg.sim_params())
    print(f"profit={profit!r}")
    return 0


def cmd_optimize(args, cfg: RunConfig) -> int:
    series, _ = read_series_csv(Path(args.series))
    sp = cfg.sim_params()
    branch = 0 if args.kind == MOMENTUM else 1
    best, fit = optimize_with_fitness(
        lambda lb: backtest_profit(series, args.kind, lb, sp),
        cfg.swarm_config(), keyed_draws(cfg.master_seed, branch, args.meta_iter))
    print(f"best_lookback={best}")
    print(f"best_fitness={fit!r}")
    return 0


def cmd_metaloop(args, cfg: RunConfig) -> int:
    sp = cfg.sim_params()
    summaries: list[str] = []

    def summarize(record, result) -> None:
        try:
            stdev = _fmt(return_stdev(result.series, 100, cfg.t_c))
        except ValueError:
            stdev = ""
        final_mid = result.series[len(result.series)] * cfg.delta_p
        summaries.append(",".join(_fmt(v) for v in (
            record.iteration, result.trade_count, result.na_orders,
            final_mid, stdev)))

    records = run_meta(sp, cfg.swarm_config(), cfg.mode, cfg.n_meta,
                       cfg.master_seed, engine=args.engine,
                       on_iteration=summarize)
    out = Path(args.out)
    with open(out, "w") as f:
        for line in _header_lines(cfg, "metaloop"):
            f.write(line + "\n")
        f.write("iter,tm,tr,profit_m,profit_r,next_tm,next_tr,fit_m,fit_r\n")
        for r in records:
            f.write(",".join(_fmt(v) for v in (
                r.iteration, r.tm, r.tr, r.profit_m, r.profit_r,
                r.next_tm, r.next_tr, r.fit_m, r.fit_r)) + "\n")
    summary_path = Path(args.summaries) if args.summaries else \
        out.with_name(f"{out.stem}_summaries{out.suffix}")
    with open(summary_path, "w") as f:
        for line in _header_lines(cfg, "metaloop-summaries"):
            f.write(line + "\n")
        f.write("iter,trade_count,na_orders,final_mid,return_stdev\n")
        f.write("\n".join(summaries) + "\n")
    print(f"wrote {len(records)} records to {out}")
    return 0


def cmd_stats(args, cfg: RunConfig) -> int:
    series, meta = read_series_csv(Path(args.series))
    burn_in = args.burn_in if args.burn_in is not None else int(meta.get("t_c", cfg.t_c))
    returns = log_returns(series, args.window, burn_in)
    print(f"window={args.window}")
    print(f"burn_in={burn_in}")
    print(f"returns={len(returns)}")
    print(f"kurtosis={excess_kurtosis(returns)!r}")
    for lag, ac in enumerate(sq_return_autocorrs(series, args.window, burn_in), start=1):
        print(f"acf_sq_lag{lag}={ac!r}")
    return 0


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="FILE", help="key=value config file")
    parser.add_argument("--preset", choices=PRESETS, default="full",
                        help="scale preset (desk shrinks runs for quick experiments)")
    for f in dataclasses.fields(RunConfig):
        flag = "--" + f.name.replace("_", "-")
        if f.name == "mode":
            parser.add_argument(flag, choices=MODES, default=None)
        else:
            kind = {"int": int, "float": float, "bool": parse_bool}.get(f.type, str)
            parser.add_argument(flag, type=kind, default=None, metavar=f.name.upper())


def _resolve_config(args) -> RunConfig:
    overrides = {}
    for f in dataclasses.fields(RunConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            overrides[f.name] = value
    return load_config(args.config, preset=args.preset, overrides=overrides)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="abmarket", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run the market once (or over several seeds)")
    _add_config_flags(p)
    p.add_argument("--ta-m", type=int, default=None, metavar="TM",
                   help="enable the momentum TA with this lookback")
    p.add_argument("--ta-r", type=int, default=None, metavar="TR",
                   help="enable the reversal TA with this lookback")
    p.add_argument("--out", metavar="CSV", help="write the per-tick series here")
    p.add_argument("--summary", metavar="FILE", help="write run summary here")
    p.add_argument("--seeds", type=int, default=1,
                   help="run this many consecutive seeds starting at master_seed")
    p.add_argument("--workers", type=int, default=1, help="parallel runs")
    p.add_argument("--engine", choices=("fast", "reference"), default="fast")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("backtest", help="profit of one strategy against a stored series")
    _add_config_flags(p)
    p.add_argument("--series", required=True, metavar="CSV")
    p.add_argument("--kind", choices=_KINDS, required=True)
    p.add_argument("--lookback", type=float, required=True)
    p.set_defaults(fn=cmd_backtest)

    p = sub.add_parser("optimize", help="PSO-optimize a lookback against a stored series")
    _add_config_flags(p)
    p.add_argument("--series", required=True, metavar="CSV")
    p.add_argument("--kind", choices=_KINDS, required=True)
    p.add_argument("--meta-iter", type=int, default=0,
                   help="learning iteration index keying the PSO draws")
    p.set_defaults(fn=cmd_optimize)

    p = sub.add_parser("metaloop", help="repeated simulate->optimize learning loop")
    _add_config_flags(p)
    p.add_argument("--out", required=True, metavar="CSV")
    p.add_argument("--summaries", metavar="CSV", default=None,
                   help="per-iteration run summaries (default: <out>_summaries.csv)")
    p.add_argument("--engine", choices=("fast", "reference"), default="fast")
    p.set_defaults(fn=cmd_metaloop)

    p = sub.add_parser("stats", help="stylized-fact panel for a stored series")
    _add_config_flags(p)
    p.add_argument("series", metavar="CSV")
    p.add_argument("--window", type=int, default=100)
    p.add_argument("--burn-in", type=int, default=None,
                   help="ticks to skip (default: the order lifetime t_c)")
    p.set_defaults(fn=cmd_stats)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve_config(args)
        return args.fn(args, cfg)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
