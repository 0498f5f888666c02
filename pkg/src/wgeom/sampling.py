"""Random variate generation for WG(alpha, q).

Five constructions are available, each producing the same law:

* ``convolution``: Geo(q) + Geo(q**(alpha+1)).
* ``conditional``: Y1 given ``Y2 + 1 <= alpha (Y1 + 1)`` for iid Geo(q) pair
  (integer alpha only).
* ``hidden_truncation``: Z - 1 observed only when X < alpha, where
  Z ~ Geo(q) on {0, 1, ...} and X | Z ~ Geo(q**Z); Z = 0 makes X infinite and
  is always rejected (integer alpha only).
* ``min_convolution``: min of n_min iid Geo(q**(1/n_min)) plus min of n_min
  iid Geo(q**((alpha+1)/n_min)).
* ``inverse_cdf``: quantile of a uniform.

Randomness comes from numpy's PCG64 bit generator seeded with the state's
64-bit seed; a given (seed, method, params, n) always yields the same
sequence.  Geometric draws use the inverse transform
``floor(ln(1-U)/ln q)`` and consume one double per draw.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .core import WGParams, one_minus_pow, quantile
from .errors import DomainError

DEFAULT_SEED = 20170815
PRNG_ALGORITHM = "numpy PCG64"


class Method(str, enum.Enum):
    CONVOLUTION = "convolution"
    CONDITIONAL = "conditional"
    HIDDEN_TRUNCATION = "hidden_truncation"
    MIN_CONVOLUTION = "min_convolution"
    INVERSE_CDF = "inverse_cdf"


@dataclass
class SamplerState:
    """Seeded generator plus method selector.

    Single-owner mutable state: do not share one instance between threads.
    ``proposals`` and ``accepted`` accumulate the rejection counts of the
    two conditioning methods.
    """

    seed: int = DEFAULT_SEED
    method: Method = Method.CONVOLUTION
    n_min: int = 4
    proposals: int = 0
    accepted: int = 0
    rng: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        if not (0 <= int(self.seed) < 2 ** 64):
            raise DomainError("seed must be a 64-bit unsigned integer")
        self.method = Method(self.method)
        if int(self.n_min) != self.n_min or self.n_min < 1:
            raise DomainError("n_min must be a positive integer")
        self.rng = np.random.Generator(np.random.PCG64(int(self.seed)))

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.proposals if self.proposals else math.nan


def _geometric(rng, q, size):
    u = rng.random(size)
    return np.floor(np.log1p(-u) / np.log(q)).astype(np.int64)


def sample_geometric(state: SamplerState, q: float) -> int:
    """One Geo(q) draw: ``floor(ln(1-U)/ln q)``."""
    if not (0.0 < q < 1.0):
        raise DomainError("q must lie strictly in (0, 1)")
    u = state.rng.random()
    return int(math.floor(math.log1p(-u) / math.log(q)))


def _integer_alpha(p):
    k = round(p.alpha)
    if k < 1 or abs(p.alpha - k) > 1e-12:
        raise DomainError(f"this sampler needs a positive integer alpha, got {p.alpha}")
    return k


def _rejection(state, n, rate, propose):
    out = []
    have = 0
    while have < n:
        need = n - have
        batch = int(need / rate * 1.1) + 64
        values, keep = propose(batch)
        idx = np.flatnonzero(keep)
        if idx.size > need:
            used = idx[need - 1] + 1
            idx = idx[:need]
        else:
            used = batch
        state.proposals += int(used)
        state.accepted += int(idx.size)
        out.append(values[idx])
        have += idx.size
    return np.concatenate(out)


def expected_acceptance(p: WGParams, method) -> float:
    """Theoretical acceptance probability of a conditioning sampler."""
    method = Method(method)
    ratio = float(one_minus_pow(p.q, p.alpha) / one_minus_pow(p.q, p.alpha + 1.0))
    if method is Method.CONDITIONAL:
        return ratio
    if method is Method.HIDDEN_TRUNCATION:
        return p.q * ratio
    raise DomainError(f"{method.value} is not a rejection sampler")


def sample(state: SamplerState, p: WGParams, n: int) -> np.ndarray:
    """Draw ``n`` WG(alpha, q) variates with ``state.method``."""
    if not isinstance(p, WGParams):
        raise DomainError("expected WGParams")
    if int(n) != n or n < 1:
        raise DomainError("n must be a positive integer")
    n = int(n)
    rng = state.rng
    q, alpha = p.q, p.alpha
    method = state.method

    if method is Method.CONVOLUTION:
        return _geometric(rng, q, n) + _geometric(rng, q ** (alpha + 1.0), n)

    if method is Method.MIN_CONVOLUTION:
        m = int(state.n_min)
        u = _geometric(rng, q ** (1.0 / m), (n, m)).min(axis=1)
        v = _geometric(rng, q ** ((alpha + 1.0) / m), (n, m)).min(axis=1)
        return u + v

    if method is Method.INVERSE_CDF:
        return quantile(p, rng.random(n))

    k = _integer_alpha(p)
    rate = expected_acceptance(p, method)

    if method is Method.CONDITIONAL:
        def propose(size):
            y1 = _geometric(rng, q, size)
            y2 = _geometric(rng, q, size)
            return y1, y2 + 1 <= k * (y1 + 1)
    else:
        def propose(size):
            z = _geometric(rng, q, size)
            u = rng.random(size)
            safe = np.maximum(z, 1)
            x = np.floor(np.log1p(-u) / (safe * math.log(q)))
            return z - 1, (z >= 1) & (x < k)

    return _rejection(state, n, rate, propose)
