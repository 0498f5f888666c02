"""Constructions built around WG(alpha, q).

Reference laws (negative binomial), the weighted negative binomial obtained
by convolving NB(r, q) with NB(r, q**(alpha+1)), the Levy-Khintchine series
for the log characteristic function, the map from the continuous weighted
exponential law, and the alpha = 1 recursion that recovers a geometric base
law from the weighted one.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .core import WGParams, one_minus_pow, pgf, tail_cutoff
from .errors import DomainError


@dataclass(frozen=True)
class WNBParams:
    r: float
    base: WGParams

    def __post_init__(self):
        if not (float(self.r) > 0.0 and math.isfinite(self.r)):
            raise DomainError(f"r must be a finite positive number, got {self.r!r}")
        if not isinstance(self.base, WGParams):
            raise DomainError("base must be a WGParams instance")
        object.__setattr__(self, "r", float(self.r))


@dataclass(frozen=True)
class LevyTerms:
    """Canonical Levy-Khintchine data: drift plus jumps ``(k, magnitude)``."""

    gamma: float
    jumps: tuple


def nb_pmf(r: float, p: float, y):
    """Negative binomial ``C(r+y-1, y) (1-p)**r p**y`` (``p`` is the failure probability)."""
    if not (r > 0.0) or not (0.0 < p < 1.0):
        raise DomainError("nb_pmf needs r > 0 and 0 < p < 1")
    yf = np.asarray(y, dtype=np.float64)
    if np.any(yf < 0) or np.any(yf != np.floor(yf)):
        raise DomainError("support points must be non-negative integers")
    logc = gammaln(r + yf) - gammaln(r) - gammaln(yf + 1.0)
    val = np.exp(logc + r * math.log1p(-p) + yf * math.log(p))
    return float(val) if yf.ndim == 0 else val


def nb2_pmf(q: float, y):
    """NB(2, q), the alpha -> 0 limit of WG(alpha, q)."""
    return nb_pmf(2.0, q, y)


def weighted_nb_pmf(p: WNBParams, y, *, swap: bool = False):
    """Weighted negative binomial pmf by finite convolution.

    ``sum_{x<=y} NB(r, q)(y-x) * NB(r, q**(alpha+1))(x)``.  ``swap`` exchanges
    the two factors (the result is the same law; kept for testing).
    """
    if not isinstance(p, WNBParams):
        raise DomainError("expected WNBParams")
    yi = int(y)
    if yi != y or yi < 0:
        raise DomainError("support points must be non-negative integers")
    q = p.base.q
    big_q = q ** (p.base.alpha + 1.0)
    xs = np.arange(yi + 1)
    first, second = (big_q, q) if swap else (q, big_q)
    terms = nb_pmf(p.r, first, yi - xs) * nb_pmf(p.r, second, xs)
    return math.fsum(np.atleast_1d(terms))


def levy_cutoff(p: WGParams, epsilon: float) -> int:
    return max(1, math.ceil(math.log(epsilon * (1.0 - p.q)) / p.log_q))


def levy_terms(p: WGParams, epsilon: float = 1e-10) -> LevyTerms:
    """Drift and jump sizes of the canonical representation, truncated at K(epsilon)."""
    _check_eps(epsilon)
    K = levy_cutoff(p, epsilon)
    k = np.arange(1, K + 1, dtype=np.float64)
    w = np.power(p.q, k) + np.power(p.q, (p.alpha + 1.0) * k)
    gamma = math.fsum(w / (1.0 + k * k))
    mags = w * k / (k * k + 1.0)
    return LevyTerms(gamma=gamma, jumps=tuple(zip(range(1, K + 1), mags.tolist())))


def _check_eps(epsilon):
    if not (0.0 < epsilon <= 1e-6):
        raise DomainError("epsilon must satisfy 0 < epsilon <= 1e-6")


def levy_log_cf(p: WGParams, t: float, epsilon: float = 1e-10) -> complex:
    """``sum_{k=1}^{K} (e^{itk} - 1)(q**k + q**((alpha+1)k))/k`` with ``K = ceil(ln(eps(1-q))/ln q)``."""
    if not isinstance(p, WGParams):
        raise DomainError("expected WGParams")
    _check_eps(epsilon)
    K = levy_cutoff(p, epsilon)
    k = np.arange(1, K + 1, dtype=np.float64)
    w = (np.power(p.q, k) + np.power(p.q, (p.alpha + 1.0) * k)) / k
    # Re(e^{ix} - 1) = -2 sin^2(x/2) keeps small-t accuracy
    kt = k * t
    real = (-2.0 * np.sin(kt / 2.0) ** 2) * w
    imag = np.sin(kt) * w
    return complex(math.fsum(real), math.fsum(imag))


def characteristic_function(p: WGParams, t: float) -> complex:
    """``E[exp(itY)]`` from the closed-form generating function."""
    return complex(pgf(p, cmath.exp(1j * t)))


def log_characteristic_function(p: WGParams, t: float) -> complex:
    """Principal log of the characteristic function, factor by factor.

    Each factor ``1 - e^{it} x`` with ``0 < x < 1`` has positive real part,
    so summing principal logs stays on the continuous branch.
    """
    if not isinstance(p, WGParams):
        raise DomainError("expected WGParams")
    z = cmath.exp(1j * t)
    big_q = p.q ** (p.alpha + 1.0)
    return (
        math.log(one_minus_pow(p.q, 1.0))
        + math.log(one_minus_pow(p.q, p.alpha + 1.0))
        - cmath.log(1.0 - z * p.q)
        - cmath.log(1.0 - z * big_q)
    )


def from_weighted_exponential(alpha: float, lam: float) -> WGParams:
    """Discrete analogue of the weighted exponential law WE(alpha, lambda): WG(alpha, e**-lambda)."""
    if not (alpha > 0.0) or not (lam > 0.0 and math.isfinite(lam)):
        raise DomainError("alpha and lambda must be positive")
    return WGParams(q=math.exp(-lam), alpha=alpha)


def to_weighted_exponential(p: WGParams) -> tuple:
    """Inverse map: ``(alpha, -ln q)``."""
    return p.alpha, -p.log_q


def reweighted_geometric_pmf(q: float, alpha: float, y):
    """Geo(q) reweighted by ``1 - q**(alpha(y+1))`` and renormalized numerically.

    The renormalizing constant is the series ``E[w(X)]`` summed to machine
    precision, not the closed form, so this is an independent route to the
    WG pmf.
    """
    if not (0.0 < q < 1.0) or not alpha > 0.0:
        raise DomainError("need 0 < q < 1 and alpha > 0")
    top = tail_cutoff(q, 1e-18) + 1
    xs = np.arange(top, dtype=np.float64)
    base = (1.0 - q) * np.power(q, xs)
    weighted = base * one_minus_pow(q, alpha * (xs + 1.0))
    total = math.fsum(weighted)
    yi = np.asarray(y)
    ys = np.atleast_1d(yi).astype(np.float64)
    out = (1.0 - q) * np.power(q, ys) * one_minus_pow(q, alpha * (ys + 1.0)) / total
    return float(out[0]) if yi.ndim == 0 else out


class NegativeDiscriminantError(DomainError):
    """The recovery quadratic has no real root (inconsistent input)."""


def recover_base_pmf(q: float, n_max: int) -> np.ndarray:
    """Recover ``theta_y = f(y)/f(0)`` from the alpha = 1 identity ``f(y)F(y) = C q**y (1 - q**(y+1))``.

    Step n+1 solves ``theta (S_n + theta) = q**(n+1) sum_{y<=n+1} q**y`` with
    ``S_n = theta_0 + ... + theta_n`` and keeps the positive root.  For a
    geometric base law the result is ``theta_y = q**y``.
    """
    if not (0.0 < q < 1.0):
        raise DomainError("q must lie strictly in (0, 1)")
    if int(n_max) != n_max or not (1 <= n_max <= 500):
        raise DomainError("n_max must be an integer in [1, 500]")
    theta = np.empty(int(n_max) + 1)
    theta[0] = 1.0
    partial = 1.0
    for n in range(int(n_max)):
        rhs = q ** (n + 1) * float(one_minus_pow(q, n + 2.0)) / (1.0 - q)
        disc = partial * partial + 4.0 * rhs
        if disc < 0.0:
            raise NegativeDiscriminantError(f"negative discriminant at step {n + 1}")
        # positive root 2c/(b + sqrt(b^2+4c)); avoids cancellation when rhs << partial^2
        root = 2.0 * rhs / (partial + math.sqrt(disc))
        theta[n + 1] = root
        partial += root
    return theta
