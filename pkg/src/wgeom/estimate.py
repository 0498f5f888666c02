"""Parameter estimation for WG(alpha, q).

Three estimators:

* method of moments (MM), closed form in the sample mean and variance;
* method of proportions (MP), closed form in the proportions of 0s and 1s;
* maximum likelihood (MLE), damped Newton on the frequency-weighted
  log-likelihood in the unconstrained coordinates ``(logit q, ln alpha)``,
  with asymptotic covariance from the observed information.

Open tail cells ("k or more") are treated as the exact value k.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .core import WGParams, moments, pmf
from .errors import (
    DataFormatError,
    DomainError,
    InfeasibleEstimateError,
    SingularInformationError,
)

MAX_ITER = 200
SCORE_TOL = 1e-8
STEP_TOL = 1e-10


@dataclass(frozen=True)
class FreqTable:
    """Observed counts as ``(value, count)`` rows.

    With ``tail_open`` the last row stands for "value or more".
    """

    rows: tuple
    tail_open: bool = False

    def __post_init__(self):
        rows = tuple((int(v), int(c)) for v, c in self.rows)
        for (v, c), orig in zip(rows, self.rows):
            if v != orig[0] or c != orig[1]:
                raise DataFormatError(f"values and counts must be integers, got {orig!r}")
            if v < 0 or c < 0:
                raise DataFormatError(f"values and counts must be non-negative, got {orig!r}")
        values = [v for v, _ in rows]
        if any(b <= a for a, b in zip(values, values[1:])):
            raise DataFormatError("values must be strictly increasing")
        if sum(c for _, c in rows) < 2:
            raise DataFormatError("need a total count of at least 2")
        if sum(1 for _, c in rows if c > 0) < 2:
            raise DataFormatError("need at least two distinct observed values")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def from_observations(cls, observations: Iterable[int]) -> "FreqTable":
        counts = Counter(int(x) for x in observations)
        return cls(tuple(sorted(counts.items())))

    @classmethod
    def from_mapping(cls, mapping: dict, tail_open: bool = False) -> "FreqTable":
        return cls(tuple(sorted(mapping.items())), tail_open=tail_open)

    @property
    def values(self) -> np.ndarray:
        return np.array([v for v, _ in self.rows], dtype=np.int64)

    @property
    def counts(self) -> np.ndarray:
        return np.array([c for _, c in self.rows], dtype=np.int64)

    @property
    def n(self) -> int:
        return int(sum(c for _, c in self.rows))

    def count_of(self, value: int) -> int:
        return dict(self.rows).get(value, 0)

    def expand(self) -> np.ndarray:
        """Flat observation vector (tail cell at its boundary value)."""
        return np.repeat(self.values, self.counts)


@dataclass(frozen=True)
class SampleSummary:
    n: int
    M1: float
    M2: float
    p0: float
    p1: float


@dataclass
class FitResult:
    params: WGParams
    method: str
    loglik: Optional[float] = None
    observed_info: Optional[np.ndarray] = None
    covariance: Optional[np.ndarray] = None
    se: Optional[tuple] = None
    iterations: int = 0
    converged: bool = True
    score: Optional[np.ndarray] = field(default=None, repr=False)

    def to_dict(self) -> dict:
        def mat(m):
            return None if m is None else [[float(x) for x in row] for row in m]

        return {
            "method": self.method,
            "q": self.params.q,
            "alpha": self.params.alpha,
            "loglik": self.loglik,
            "se_q": None if self.se is None else float(self.se[0]),
            "se_alpha": None if self.se is None else float(self.se[1]),
            "observed_info": mat(self.observed_info),
            "covariance": mat(self.covariance),
            "iterations": self.iterations,
            "converged": self.converged,
        }


def summarize(data: FreqTable) -> SampleSummary:
    """Sample mean, variance (denominator n), and proportions of 0s and 1s."""
    x = data.values.astype(np.float64)
    w = data.counts.astype(np.float64)
    n = float(w.sum())
    if np.count_nonzero(w) < 2:
        raise InfeasibleEstimateError("degenerate data: a single support point")
    m1 = math.fsum(w * x) / n
    m2 = math.fsum(w * (x - m1) ** 2) / n
    return SampleSummary(
        n=int(n),
        M1=m1,
        M2=m2,
        p0=data.count_of(0) / n,
        p1=data.count_of(1) / n,
    )


def fit_mm(s: SampleSummary) -> FitResult:
    """Closed-form method-of-moments estimates from ``(M1, M2)``."""
    m1, m2 = s.M1, s.M2
    disc = 2.0 * m2 - m1 * m1 - 2.0 * m1
    if disc < 0.0:
        raise InfeasibleEstimateError(
            f"moments infeasible: 2*M2 - M1^2 - 2*M1 = {disc:.6g} < 0 (under-dispersed data)"
        )
    den = 2.0 + 3.0 * m1 + m1 * m1 - m2
    if den == 0.0:
        raise InfeasibleEstimateError("moments infeasible: zero denominator")
    q = (2.0 * m1 + m1 * m1 - m2 + math.sqrt(disc)) / den
    if not (0.0 < q < 1.0):
        raise InfeasibleEstimateError(f"moment estimate q={q:.6g} outside (0, 1)")
    ratio = ((1.0 - q) * m1 - q) / ((1.0 - q) * (m1 + 1.0) - q)
    if not (0.0 < ratio < 1.0):
        raise InfeasibleEstimateError("moment estimate of alpha is undefined")
    alpha = math.log(ratio) / math.log(q) - 1.0
    if not alpha > 0.0:
        raise InfeasibleEstimateError(f"moment estimate alpha={alpha:.6g} is not positive")
    return FitResult(params=WGParams(q, alpha), method="MM")


def fit_mp(s: SampleSummary) -> FitResult:
    """Closed-form estimates matching the observed proportions of 0s and 1s."""
    p0, p1 = s.p0, s.p1
    if not (p0 > 0.0 and p1 > 0.0):
        raise InfeasibleEstimateError("proportions infeasible: need p0 > 0 and p1 > 0")
    rad = 4.0 * p0 * p0 - 4.0 * p0 ** 3 - 4.0 * p0 * p1 + p1 * p1
    if rad < 0.0:
        raise InfeasibleEstimateError(f"proportions infeasible: negative radicand {rad:.6g}")
    q = (p1 + math.sqrt(rad)) / (2.0 * p0)
    if not (0.0 < q < 1.0):
        raise InfeasibleEstimateError(f"proportion estimate q={q:.6g} outside (0, 1)")
    t = p1 / (q * p0) - 1.0
    if not (0.0 < t < 1.0):
        raise InfeasibleEstimateError("proportion estimate of alpha is undefined")
    return FitResult(params=WGParams(q, math.log(t) / math.log(q)), method="MP")


def _log_one_minus_pow_derivs(q, a):
    """Value and partials of ``g(q, a) = ln(1 - q**a)``.

    Returns (g, g_q, g_a, g_qq, g_aa, g_qa).
    """
    lq = math.log(q)
    om = -np.expm1(a * lq)  # 1 - q**a
    r = np.exp(a * lq) / om  # q**a / (1 - q**a)
    s = r * (1.0 + r)  # q**a / (1 - q**a)**2
    g = np.log(om)
    g_q = -(a / q) * r
    g_a = -lq * r
    g_qq = (a / (q * q)) * (r - a * s)
    g_aa = -lq * lq * s
    g_qa = -(r + a * lq * s) / q
    return g, g_q, g_a, g_qq, g_aa, g_qa


def loglik_score_hessian(p: WGParams, data: FreqTable):
    """Frequency-weighted log-likelihood with its analytic gradient and Hessian in ``(q, alpha)``.

    Per observation ``x``:
    ``ln(1-q) + ln(1-q**(alpha+1)) - ln(1-q**alpha) + x ln q + ln(1-q**(alpha(x+1)))``.
    """
    if not isinstance(p, WGParams):
        raise DomainError("expected WGParams")
    q, al = p.q, p.alpha
    x = data.values.astype(np.float64)
    w = data.counts.astype(np.float64)
    n = float(w.sum())
    sx = float(np.dot(w, x))

    g1 = _log_one_minus_pow_derivs(q, al + 1.0)
    g0 = _log_one_minus_pow_derivs(q, al)
    c = x + 1.0
    gx = _log_one_minus_pow_derivs(q, al * c)

    ll = n * (math.log1p(-q) + g1[0] - g0[0]) + sx * math.log(q) + float(np.dot(w, gx[0]))

    d_q = n * (-1.0 / (1.0 - q) + g1[1] - g0[1]) + sx / q + float(np.dot(w, gx[1]))
    d_a = n * (g1[2] - g0[2]) + float(np.dot(w, c * gx[2]))

    d_qq = n * (-1.0 / (1.0 - q) ** 2 + g1[3] - g0[3]) - sx / (q * q) + float(np.dot(w, gx[3]))
    d_aa = n * (g1[4] - g0[4]) + float(np.dot(w, c * c * gx[4]))
    d_qa = n * (g1[5] - g0[5]) + float(np.dot(w, c * gx[5]))

    score = np.array([d_q, d_a])
    hess = np.array([[d_qq, d_qa], [d_qa, d_aa]])
    return float(ll), score, hess


def loglik(p: WGParams, data: FreqTable) -> float:
    return loglik_score_hessian(p, data)[0]


def invert_2x2(m: np.ndarray) -> np.ndarray:
    """Inverse by adjugate over determinant."""
    a, b = m[0, 0], m[0, 1]
    c, d = m[1, 0], m[1, 1]
    det = a * d - b * c
    if det == 0.0 or not math.isfinite(det):
        raise SingularInformationError("information matrix is singular")
    return np.array([[d, -b], [-c, a]]) / det


def _to_params(theta):
    u, v = theta
    q = 1.0 / (1.0 + math.exp(-u)) if u > -700 else 0.0
    return WGParams(q, math.exp(v))


def _safe_eval(theta, data):
    try:
        p = _to_params(theta)
        return p, loglik_score_hessian(p, data)
    except (ValueError, OverflowError, FloatingPointError):
        return None, (-math.inf, None, None)


def _default_init(data):
    s = summarize(data)
    for fitter in (fit_mm, fit_mp):
        try:
            return fitter(s).params
        except InfeasibleEstimateError:
            continue
    return WGParams(s.M1 / (1.0 + s.M1), 1.0)


def fit_mle(data: FreqTable, init: Optional[WGParams] = None) -> FitResult:
    """Maximum likelihood by damped Newton in ``(logit q, ln alpha)``.

    Steps are halved until the log-likelihood does not decrease.  Converged
    when ``max|score| <= 1e-8 n`` and the Newton step is at most 1e-10.
    Without convergence after 200 iterations the best point is returned with
    ``converged=False``.
    """
    if init is None:
        init = _default_init(data)
    n = data.n
    theta = np.array([math.log(init.q) - math.log1p(-init.q), math.log(init.alpha)])
    with np.errstate(over="raise", invalid="raise", divide="raise"):
        p, (ll, score, hess) = _safe_eval(theta, data)
    if score is None:
        raise DomainError("log-likelihood is not finite at the initial point")

    converged = False
    it = 0
    for it in range(1, MAX_ITER + 1):
        q, al = p.q, p.alpha
        jac = np.array([q * (1.0 - q), al])
        grad = score * jac
        h = hess * np.outer(jac, jac)
        h[0, 0] += score[0] * q * (1.0 - q) * (1.0 - 2.0 * q)
        h[1, 1] += score[1] * al
        eig_max = float(np.linalg.eigvalsh(h).max())
        if eig_max >= 0.0:
            h = h - (eig_max + 1e-6 * (1.0 + abs(h).max())) * np.eye(2)
        step = -np.linalg.solve(h, grad)

        if np.max(np.abs(score)) <= SCORE_TOL * n and np.max(np.abs(step)) <= STEP_TOL:
            converged = True
            break

        tol = 1e-13 * (1.0 + abs(ll))
        t = 1.0
        for _ in range(60):
            cand = theta + t * step
            with np.errstate(over="raise", invalid="raise", divide="raise"):
                cp, (cll, cscore, chess) = _safe_eval(cand, data)
            if cscore is not None and cll >= ll - tol:
                break
            t *= 0.5
        else:
            break
        theta, p, ll, score, hess = cand, cp, cll, cscore, chess

    info = -hess
    cov = None
    se = None
    pos_def = info[0, 0] > 0 and info[0, 0] * info[1, 1] - info[0, 1] * info[1, 0] > 0
    if pos_def:
        cov = invert_2x2(info)
        se = (math.sqrt(cov[0, 0]), math.sqrt(cov[1, 1]))
    elif converged:
        raise SingularInformationError("observed information is not positive definite at the optimum")
    return FitResult(
        params=p,
        method="MLE",
        loglik=ll,
        observed_info=info if pos_def else None,
        covariance=cov,
        se=se,
        iterations=it,
        converged=converged,
        score=score,
    )


def fit(data: FreqTable, method: str = "mle", init: Optional[WGParams] = None) -> FitResult:
    """Dispatch on ``method`` (mm, mp, mle); closed-form fits get their log-likelihood filled in."""
    method = method.lower()
    if method == "mle":
        return fit_mle(data, init)
    s = summarize(data)
    if method == "mm":
        res = fit_mm(s)
    elif method == "mp":
        res = fit_mp(s)
    else:
        raise DomainError(f"unknown estimation method {method!r}")
    res.loglik = loglik(res.params, data)
    return res


def population_summary(p: WGParams) -> SampleSummary:
    """Summary with population moments and proportions, for round-trip checks."""
    m = moments(p)
    return SampleSummary(n=0, M1=m.mean, M2=m.variance, p0=pmf(p, 0), p1=pmf(p, 1))
