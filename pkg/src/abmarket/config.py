"""Run configuration: defaults, config files, presets.

The config is a flat key=value namespace covering the market, the
optimizer and the experiment harness.  Files use one `key=value` per
line ('#' comments allowed); unknown keys are errors so a typo cannot
silently corrupt an experiment.  CLI flags override file values.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .agents import SimParams
from .pso import SwarmConfig

PRESETS = ("full", "desk")


@dataclass
class RunConfig:
    # market
    n: int = 1000
    delta_p: float = 0.01
    p_f: float = 10000.0
    w1_max: float = 1.0
    w2_max: float = 100.0
    w3_max: float = 1.0
    tau_max: int = 10000
    sigma_eps: float = 0.03
    sigma_eps_is_variance: bool = False
    p_d: float = 1000.0
    t_c: int = 10000
    s_shares: int = 100
    t_e: int = 20_000_000
    # optimizer
    n_p: int = 200
    l_p: int = 50
    pso_w: float = 0.99
    c1: float = 0.3
    c2: float = 0.3
    t_min: int = 100
    t_max: int = 300000
    # experiment
    mode: str = "ta_m_only"
    n_meta: int = 50
    master_seed: int = 1

    def sim_params(self) -> SimParams:
        return SimParams(
            n=self.n, delta_p=self.delta_p, p_f=self.p_f, w1_max=self.w1_max,
            w2_max=self.w2_max, w3_max=self.w3_max, tau_max=self.tau_max,
            sigma_eps=self.sigma_eps, p_d=self.p_d, t_c=self.t_c,
            s_shares=self.s_shares, t_e=self.t_e,
            sigma_eps_is_variance=self.sigma_eps_is_variance)

    def swarm_config(self) -> SwarmConfig:
        return SwarmConfig(n_p=self.n_p, l_p=self.l_p, w=self.pso_w,
                           c1=self.c1, c2=self.c2, t_min=self.t_min,
                           t_max=self.t_max)

    def items(self) -> list[tuple[str, object]]:
        return [(f.name, getattr(self, f.name)) for f in dataclasses.fields(self)]


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def apply_preset(cfg: RunConfig, preset: str) -> RunConfig:
    """Named scale presets; 'desk' shrinks the run for CI-speed experiments."""
    if preset == "full":
        return cfg
    if preset == "desk":
        return dataclasses.replace(cfg, t_e=2_000_000, n_p=50, n_meta=20)
    raise ValueError(f"unknown preset {preset!r}; expected one of {PRESETS}")


def parse_bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {raw!r}")


def _coerce(name: str, raw: str):
    kind = _FIELDS[name].type
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "bool":
            return parse_bool(raw)
        return raw
    except ValueError as exc:
        raise ValueError(f"bad value for {name}: {raw!r}") from exc


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse flat key=value lines into override values; unknown keys error."""
    values: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValueError(f"{source}:{lineno}: expected key=value, got {line!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if key not in _FIELDS:
            raise ValueError(f"{source}:{lineno}: unknown config key {key!r}")
        values[key] = _coerce(key, raw.strip())
    return values


def load_config(path: str | Path | None = None, preset: str = "full",
                overrides: dict | None = None) -> RunConfig:
    """Defaults -> preset -> config file -> explicit overrides."""
    cfg = apply_preset(RunConfig(), preset)
    if path is not None:
        values = parse_config_text(Path(path).read_text(), source=str(path))
        cfg = dataclasses.replace(cfg, **values)
    if overrides:
        for key in overrides:
            if key not in _FIELDS:
                raise ValueError(f"unknown config key {key!r}")
        cfg = dataclasses.replace(cfg, **overrides)
    return cfg
