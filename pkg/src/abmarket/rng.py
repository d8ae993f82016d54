"""Deterministic keyed random streams.

Every random draw in a simulation run is a pure function of
(master_seed, stream, subkeys) rather than a position in a shared
sequential stream.  This makes replay invariance structural: the noise
draw for agent j at tick t is the same whether or not technical agents
trade, because it is keyed on (j, t) and never on a consumption
counter.

The integer generator is a splitmix64-style finalizer chain over the
key components, which is bit-exact on any platform.  Floats come from
one fixed mapping: the top 53 bits of the 64-bit hash scaled into
[0, 1).  Normals use the AS241 inverse normal CDF applied to a single
uniform, so one key yields one normal.
"""

from __future__ import annotations

import math
from enum import IntEnum
from typing import NamedTuple

import numpy as np
from numba import njit

U64 = np.uint64

# Per-stream salts: arbitrary fixed 64-bit constants, one per stream so
# that identical subkeys in different streams never collide.
SALT_AGENT_INIT = U64(0x243F6A8885A308D3)
SALT_NA_EPSILON = U64(0x13198A2E03707344)
SALT_NA_RHO = U64(0xA4093822299F31D0)
SALT_PSO = U64(0x082EFA98EC4E6C89)

_INV_2_53 = 1.0 / 9007199254740992.0  # 2**-53


class Stream(IntEnum):
    AGENT_INIT = 0
    NA_EPSILON = 1
    NA_RHO = 2
    PSO = 3


_SALTS = (SALT_AGENT_INIT, SALT_NA_EPSILON, SALT_NA_RHO, SALT_PSO)


class StreamKey(NamedTuple):
    """Addresses one draw: (master_seed, stream, up to three subkeys).

    Subkey conventions: agent streams use (agent index, tick); the
    agent-init stream uses (agent index, component); the PSO stream
    packs (branch, meta iteration) into k1, the PSO iteration into k2
    and (particle, which) into k3.
    """

    master_seed: int
    stream: Stream
    k1: int = 0
    k2: int = 0
    k3: int = 0


@njit(cache=True, inline="always")
def _mix64(z):
    z ^= z >> U64(30)
    z *= U64(0xBF58476D1CE4E5B9)
    z ^= z >> U64(27)
    z *= U64(0x94D049BB133111EB)
    z ^= z >> U64(31)
    return z


@njit(cache=True, inline="always")
def _derive(seed, salt, k1, k2, k3):
    h = _mix64(U64(seed) ^ U64(salt))
    h = _mix64(h ^ U64(k1))
    h = _mix64(h ^ U64(k2))
    h = _mix64(h ^ U64(k3))
    return h


@njit(cache=True, inline="always")
def _unit(h):
    # top 53 bits -> [0, 1)
    return (h >> U64(11)) * _INV_2_53


@njit(cache=True, inline="always")
def _unit_open(h):
    # strictly inside (0, 1); safe input for the inverse CDF
    return ((h >> U64(11)) + 0.5) * _INV_2_53


@njit(cache=True)
def _inv_norm_cdf(p):
    """AS241 (Wichura) inverse of the standard normal CDF, double precision."""
    q = p - 0.5
    if abs(q) <= 0.425:
        r = 0.180625 - q * q
        num = (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r
                    + 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r
                  + 1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r
                + 1.3314166789178437745e2) * r + 3.3871328727963666080e0)
        den = (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r
                    + 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r
                  + 5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r
                + 4.2313330701600911252e1) * r + 1.0)
        return q * num / den
    if q < 0.0:
        r = p
    else:
        r = 1.0 - p
    r = math.sqrt(-math.log(r))
    if r <= 5.0:
        r = r - 1.6
        num = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r
                    + 2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r
                  + 3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r
                + 4.63033784615654529590e0) * r + 1.42343711074968357734e0)
        den = (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r
                    + 1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r
                  + 6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r
                + 2.05319162663775882187e0) * r + 1.0)
    else:
        r = r - 5.0
        num = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r
                    + 1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r
                  + 2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r
                + 5.46378491116411436990e0) * r + 6.65790464350110377720e0)
        den = ((((((1.42151175831644588870e-7 * r + 1.84631831751005468180e-5) * r
                   + 7.86869131145613259100e-4) * r + 1.48753612908506148525e-2) * r
                 + 1.36929880922735805310e-1) * r + 5.99832206555887937690e-1) * r + 1.0)
    val = num / den
    if q < 0.0:
        return -val
    return val


@njit(cache=True, inline="always")
def uniform_from(seed, salt, k1, k2, k3, lo, hi):
    return lo + _unit(_derive(seed, salt, k1, k2, k3)) * (hi - lo)


@njit(cache=True, inline="always")
def normal_from(seed, salt, k1, k2, k3, sigma):
    return sigma * _inv_norm_cdf(_unit_open(_derive(seed, salt, k1, k2, k3)))


def _salt_of(stream: Stream) -> U64:
    return _SALTS[int(stream)]


def raw64(key: StreamKey) -> int:
    """The 64-bit hash behind a key, for tests and diagnostics."""
    return int(_derive(U64(key.master_seed & (2**64 - 1)), _salt_of(key.stream),
                       U64(key.k1), U64(key.k2), U64(key.k3)))


def uniform(key: StreamKey, lo: float, hi: float) -> float:
    """Deterministic uniform draw in [lo, hi) for this key."""
    if not (lo < hi):
        raise ValueError(f"uniform requires lo < hi, got [{lo}, {hi})")
    return float(uniform_from(U64(key.master_seed & (2**64 - 1)), _salt_of(key.stream),
                              U64(key.k1), U64(key.k2), U64(key.k3), lo, hi))


def normal(key: StreamKey, sigma: float) -> float:
    """Deterministic zero-mean normal draw with scale sigma for this key."""
    if not sigma > 0.0:
        raise ValueError(f"normal requires sigma > 0, got {sigma}")
    return float(normal_from(U64(key.master_seed & (2**64 - 1)), _salt_of(key.stream),
                             U64(key.k1), U64(key.k2), U64(key.k3), sigma))


def pso_pair(master_seed: int, branch: int, meta_iter: int, pso_iter: int,
             particle: int) -> tuple[float, float]:
    """The (r1, r2) uniform pair for one particle update.

    branch separates the two independently optimized strategies so their
    searches are decorrelated; meta_iter restarts the stream each
    learning iteration.
    """
    k1 = ((branch & 0xFFFF) << 32) | (meta_iter & 0xFFFFFFFF)
    seed = U64(master_seed & (2**64 - 1))
    r1 = uniform_from(seed, SALT_PSO, U64(k1), U64(pso_iter), U64(particle << 1), 0.0, 1.0)
    r2 = uniform_from(seed, SALT_PSO, U64(k1), U64(pso_iter), U64((particle << 1) | 1), 0.0, 1.0)
    return float(r1), float(r2)
