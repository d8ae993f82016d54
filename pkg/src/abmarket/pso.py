"""Particle swarm optimization of one scalar strategy parameter.

Particles start evenly spaced across [t_min, t_max] with zero velocity
and are pulled toward their personal best and the global best:

    vel <- w*vel + c1*r1*(gbest - pos) + c2*r2*(pbest - pos)
    pos <- pos + vel

Fitness is always evaluated at the rounded (integer) position and best
records store that integer, so the reported optimum is a valid
lookback.  Updates are synchronous: one iteration moves every particle
with the previous iteration's bests, then merges improvements in
particle order with ties keeping the incumbent — which makes the
search deterministic given the draw source and lets fitness
evaluations run in parallel.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import rng

DrawPair = Callable[[int, int], tuple[float, float]]


@dataclass(frozen=True)
class SwarmConfig:
    n_p: int = 200        # particles
    l_p: int = 50         # velocity-update iterations
    w: float = 0.99       # inertia
    c1: float = 0.3       # pull toward global best
    c2: float = 0.3       # pull toward personal best
    t_min: int = 100
    t_max: int = 300000

    def __post_init__(self):
        if self.n_p < 1 or self.l_p < 1:
            raise ValueError("n_p and l_p must be >= 1")
        if not self.t_min < self.t_max:
            raise ValueError(f"bounds must be ordered, got [{self.t_min}, {self.t_max}]")


@dataclass
class Swarm:
    cfg: SwarmConfig
    pos: np.ndarray
    vel: np.ndarray
    best_pos: np.ndarray   # integer positions, valid once evaluated
    best_fit: np.ndarray
    gbest_pos: int = 0
    gbest_fit: float = -np.inf
    evaluated: bool = False
    _cache: dict = field(default_factory=dict, repr=False)


def init_swarm(cfg: SwarmConfig) -> Swarm:
    """Particles k = 1..n_p at t_min + (t_max - t_min)*(k/n_p), velocity 0."""
    k = np.arange(1, cfg.n_p + 1, dtype=np.float64)
    pos = cfg.t_min + (cfg.t_max - cfg.t_min) * (k / cfg.n_p)
    return Swarm(cfg=cfg, pos=pos, vel=np.zeros(cfg.n_p),
                 best_pos=np.zeros(cfg.n_p), best_fit=np.full(cfg.n_p, -np.inf))


def _eval(swarm: Swarm, fitness, pos: float) -> tuple[int, float]:
    x = int(round(pos))
    cached = swarm._cache.get(x)
    if cached is None:
        cached = float(fitness(x))
        swarm._cache[x] = cached
    return x, cached


def _merge_bests(swarm: Swarm, xs: list[int], fits: list[float]) -> None:
    # strict improvement only: ties keep the incumbent
    for i in range(swarm.cfg.n_p):
        if fits[i] > swarm.best_fit[i]:
            swarm.best_fit[i] = fits[i]
            swarm.best_pos[i] = xs[i]
        if fits[i] > swarm.gbest_fit:
            swarm.gbest_fit = fits[i]
            swarm.gbest_pos = xs[i]


def evaluate_initial(swarm: Swarm, fitness) -> Swarm:
    """The first fitness pass; must precede any step."""
    xs, fits = [], []
    for i in range(swarm.cfg.n_p):
        x, f = _eval(swarm, fitness, swarm.pos[i])
        xs.append(x)
        fits.append(f)
    _merge_bests(swarm, xs, fits)
    swarm.evaluated = True
    return swarm


def step(swarm: Swarm, fitness, draw_pair: DrawPair, iteration: int) -> Swarm:
    """One synchronous velocity/position update plus re-evaluation."""
    if not swarm.evaluated:
        raise ValueError("step requires an initial evaluation pass")
    cfg = swarm.cfg
    for i in range(cfg.n_p):
        r1, r2 = draw_pair(iteration, i)
        swarm.vel[i] = (cfg.w * swarm.vel[i]
                        + cfg.c1 * r1 * (swarm.gbest_pos - swarm.pos[i])
                        + cfg.c2 * r2 * (swarm.best_pos[i] - swarm.pos[i]))
        swarm.pos[i] += swarm.vel[i]
        if swarm.pos[i] < cfg.t_min:
            swarm.pos[i] = cfg.t_min
            swarm.vel[i] = 0.0
        elif swarm.pos[i] > cfg.t_max:
            swarm.pos[i] = cfg.t_max
            swarm.vel[i] = 0.0
    xs, fits = [], []
    for i in range(cfg.n_p):
        x, f = _eval(swarm, fitness, swarm.pos[i])
        xs.append(x)
        fits.append(f)
    _merge_bests(swarm, xs, fits)
    return swarm


def keyed_draws(master_seed: int, branch: int = 0, meta_iter: int = 0) -> DrawPair:
    """Deterministic (r1, r2) source from the PSO random stream."""
    def draw_pair(iteration: int, particle: int) -> tuple[float, float]:
        return rng.pso_pair(master_seed, branch, meta_iter, iteration, particle)
    return draw_pair


def optimize(fitness, cfg: SwarmConfig, draw_pair: DrawPair) -> int:
    """Full search: init, first evaluation, l_p steps; returns the best
    integer parameter found."""
    swarm = init_swarm(cfg)
    evaluate_initial(swarm, fitness)
    for it in range(1, cfg.l_p + 1):
        step(swarm, fitness, draw_pair, it)
    return int(swarm.gbest_pos)


def optimize_with_fitness(fitness, cfg: SwarmConfig,
                          draw_pair: DrawPair) -> tuple[int, float]:
    """optimize() plus the best fitness it attained (for audit trails)."""
    swarm = init_swarm(cfg)
    evaluate_initial(swarm, fitness)
    for it in range(1, cfg.l_p + 1):
        step(swarm, fitness, draw_pair, it)
    return int(swarm.gbest_pos), float(swarm.gbest_fit)
