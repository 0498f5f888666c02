"""Exact evaluation of the weighted geometric law WG(alpha, q).

The law reweights the geometric pmf ``(1-q) q**y`` by ``1 - q**(alpha*(y+1))``:

    pmf(y) = C * q**y * (1 - q**(alpha*(y+1))),
    C = (1-q)(1-q**(alpha+1)) / (1-q**alpha).

Every factor of the form ``1 - q**a`` goes through :func:`one_minus_pow`,
which stays accurate when ``a*ln(q)`` is close to zero (small alpha or q
near one).  Functions taking ``y`` accept an integer or an integer array
and return a float or an ndarray accordingly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import CapExceededError, DomainError

STIRLING_CAP = 25
RAW_MOMENT_CAP = 20
JOINT_MODE_TOL = 1e-9


def one_minus_pow(q, a):
    """``1 - q**a`` computed as ``-expm1(a * ln q)``."""
    return -np.expm1(np.multiply(a, np.log(q)))


def _ratio_pow(q, a):
    # q**a / (1 - q**a) without forming the difference
    return 1.0 / np.expm1(-np.multiply(a, np.log(q)))


@dataclass(frozen=True)
class WGParams:
    """Parameter pair of WG(alpha, q).

    Attributes:
        q: geometric failure probability, strictly inside (0, 1).
        alpha: shape of the weight function, strictly positive.
    """

    q: float
    alpha: float

    def __post_init__(self):
        q, alpha = float(self.q), float(self.alpha)
        if not (0.0 < q < 1.0):
            raise DomainError(f"q must lie strictly in (0, 1), got {self.q!r}")
        if not (alpha > 0.0 and math.isfinite(alpha)):
            raise DomainError(f"alpha must be a finite positive number, got {self.alpha!r}")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "alpha", alpha)

    @property
    def log_q(self) -> float:
        return math.log(self.q)


@dataclass(frozen=True)
class MomentSummary:
    mean: float
    variance: float


def _check_params(p):
    if not isinstance(p, WGParams):
        raise DomainError(f"expected WGParams, got {type(p).__name__}")


def _as_support(y):
    arr = np.asarray(y)
    if arr.dtype.kind not in "iu":
        if arr.dtype.kind != "f" or not np.all(np.isfinite(arr)) or np.any(arr != np.floor(arr)):
            raise DomainError("support points must be non-negative integers")
    if np.any(arr < 0):
        raise DomainError("support points must be non-negative integers")
    return arr.astype(np.float64), arr.ndim == 0


def _out(value, scalar):
    return float(value) if scalar else value


def tail_cutoff(q: float, eps: float) -> int:
    """Truncation point ``ceil(ln(eps*(1-q)/2) / ln q)`` beyond which WG mass is below ``eps``."""
    if not (0.0 < q < 1.0) or not (0.0 < eps < 1.0):
        raise DomainError("tail_cutoff needs 0 < q < 1 and 0 < eps < 1")
    return max(0, math.ceil(math.log(eps * (1.0 - q) / 2.0) / math.log(q)))


def norm_const(p: WGParams) -> float:
    """Normalizing constant ``(1-q)(1-q**(alpha+1)) / (1-q**alpha)``."""
    _check_params(p)
    q, a = p.q, p.alpha
    return float(one_minus_pow(q, 1.0) * one_minus_pow(q, a + 1.0) / one_minus_pow(q, a))


def log_norm_const(p: WGParams) -> float:
    _check_params(p)
    q, a = p.q, p.alpha
    return float(
        math.log(one_minus_pow(q, 1.0)) + math.log(one_minus_pow(q, a + 1.0)) - math.log(one_minus_pow(q, a))
    )


def pmf(p: WGParams, y):
    """Probability mass at ``y``."""
    _check_params(p)
    yf, scalar = _as_support(y)
    val = norm_const(p) * np.power(p.q, yf) * one_minus_pow(p.q, p.alpha * (yf + 1.0))
    return _out(val, scalar)


def log_pmf(p: WGParams, y):
    _check_params(p)
    yf, scalar = _as_support(y)
    val = log_norm_const(p) + yf * p.log_q + np.log(one_minus_pow(p.q, p.alpha * (yf + 1.0)))
    return _out(val, scalar)


def pmf_ratio(p: WGParams, y):
    """``pmf(y+1) / pmf(y) = q (1 - q**(alpha(y+2))) / (1 - q**(alpha(y+1)))``.

    Strictly decreasing in ``y`` towards ``q``, which is what makes the law
    unimodal.
    """
    _check_params(p)
    yf, scalar = _as_support(y)
    val = p.q * one_minus_pow(p.q, p.alpha * (yf + 2.0)) / one_minus_pow(p.q, p.alpha * (yf + 1.0))
    return _out(val, scalar)


def log_survival(p: WGParams, y):
    """``ln P(Y >= y)``.

    Uses the cancellation-free rearrangement of the survival numerator
    ``(1-q**(a+1)) - (1-q) q**(a(y+1)) = (1-q)(1-q**(a(y+1))) + q(1-q**a)``.
    """
    _check_params(p)
    yf, scalar = _as_support(y)
    q, a = p.q, p.alpha
    inner = (1.0 - q) * one_minus_pow(q, a * (yf + 1.0)) / one_minus_pow(q, a) + q
    val = np.where(yf == 0, 0.0, yf * p.log_q + np.log(inner))
    return _out(val, scalar)


def cdf_survival(p: WGParams, y):
    """Return ``(P(Y <= y), P(Y >= y))``.

    The survival convention is inclusive (it equals 1 at ``y = 0``); the cdf
    is ``1 - survival(y + 1)``.
    """
    yf, scalar = _as_support(y)
    surv = np.exp(log_survival(p, yf))
    cdf = -np.expm1(log_survival(p, yf + 1.0))
    return _out(cdf, scalar), _out(surv, scalar)


def reliability(p: WGParams, y):
    """Return ``(hazard, reversed_hazard, second_failure_rate)`` at ``y``.

    hazard = pmf/P(Y>=y), reversed hazard = pmf/P(Y<=y), and the second
    failure rate is ``ln(S(y)/S(y+1))``.
    """
    yf, scalar = _as_support(y)
    lp = log_pmf(p, yf)
    ls = log_survival(p, yf)
    ls_next = log_survival(p, yf + 1.0)
    hazard = np.exp(lp - ls)
    cdf = -np.expm1(ls_next)
    rh = np.exp(lp) / cdf
    srf = ls - ls_next
    return _out(hazard, scalar), _out(rh, scalar), _out(srf, scalar)


def log_concavity_excess(p: WGParams, y):
    """``ln(pmf(y)**2 / (pmf(y-1) pmf(y+1)) - 1)`` for ``y >= 1``.

    Closed form ``alpha*y*ln q + 2 ln(1-q**alpha) - ln(1-q**(alpha y))
    - ln(1-q**(alpha(y+2)))``, finite for every valid input, so the strict
    log-concavity inequality can be certified even where the pmf itself
    underflows.
    """
    _check_params(p)
    yf, scalar = _as_support(y)
    if np.any(yf < 1):
        raise DomainError("log-concavity excess is defined for y >= 1")
    q, a = p.q, p.alpha
    val = (
        a * yf * p.log_q
        + 2.0 * np.log(one_minus_pow(q, a))
        - np.log(one_minus_pow(q, a * yf))
        - np.log(one_minus_pow(q, a * (yf + 2.0)))
    )
    return _out(val, scalar)


def moments(p: WGParams) -> MomentSummary:
    """Closed-form mean and variance.

    With ``a = q/(1-q)`` and ``b = q**(alpha+1)/(1-q**(alpha+1))`` the law is
    Geo(q) + Geo(q**(alpha+1)), so ``mean = a + b`` and
    ``variance = a(1+a) + b(1+b)``.
    """
    _check_params(p)
    a = float(_ratio_pow(p.q, 1.0))
    b = float(_ratio_pow(p.q, p.alpha + 1.0))
    return MomentSummary(mean=a + b, variance=a * (1.0 + a) + b * (1.0 + b))


@lru_cache(maxsize=None)
def _stirling_row(n: int) -> tuple:
    if n == 0:
        return (1,)
    prev = _stirling_row(n - 1) + (0,)
    row = [0] * (n + 1)
    for k in range(1, n + 1):
        row[k] = k * prev[k] + prev[k - 1]
    return tuple(row)


def stirling2(n: int, k: int) -> int:
    """Stirling number of the second kind S(n, k), exact, for ``0 <= k <= n <= 25``."""
    if not (isinstance(n, (int, np.integer)) and isinstance(k, (int, np.integer))):
        raise DomainError("stirling2 takes integer arguments")
    if n < 0 or k < 0 or k > n:
        raise DomainError(f"stirling2 needs 0 <= k <= n, got n={n}, k={k}")
    if n > STIRLING_CAP:
        raise CapExceededError(f"stirling2 is capped at n <= {STIRLING_CAP}, got {n}")
    return _stirling_row(int(n))[int(k)]


def raw_moment(p: WGParams, n: int) -> float:
    """``E[Y**n]`` via the geometric Stirling series.

    Uses ``sum_y y**n x**y = sum_k S(n,k) k! x**k / (1-x)**(k+1)`` applied to
    both geometric pieces of the pmf.
    """
    _check_params(p)
    if not isinstance(n, (int, np.integer)) or n < 0:
        raise DomainError("moment order must be a non-negative integer")
    if n > RAW_MOMENT_CAP:
        raise CapExceededError(f"raw_moment is capped at n <= {RAW_MOMENT_CAP}, got {n}")
    if n == 0:
        return 1.0
    q, al = p.q, p.alpha
    a = float(_ratio_pow(q, 1.0))
    b = float(_ratio_pow(q, al + 1.0))
    om1 = float(one_minus_pow(q, 1.0))
    om_big = float(one_minus_pow(q, al + 1.0))
    qa = q ** al
    total = 0.0
    for k in range(1, n + 1):
        s = stirling2(n, k) * math.factorial(k)
        total += s * (a ** k / om1 - qa * b ** k / om_big)
    return norm_const(p) * total


def pgf(p: WGParams, z):
    """Probability generating function ``E[z**Y]``; ``z`` may be complex with ``|z| < 1/q``."""
    _check_params(p)
    big_q = p.q ** (p.alpha + 1.0)
    num = one_minus_pow(p.q, 1.0) * one_minus_pow(p.q, p.alpha + 1.0)
    return num / ((1.0 - z * p.q) * (1.0 - z * big_q))


def generating_functions(p: WGParams, t: float):
    """Return ``(mgf(t), pgf(e**t))``; both finite only for ``t < -ln q``."""
    _check_params(p)
    if not t < -p.log_q:
        raise DomainError(f"mgf diverges for t >= -ln q = {-p.log_q:.6g}, got t={t}")
    num = one_minus_pow(p.q, 1.0) * one_minus_pow(p.q, p.alpha + 1.0)
    den = -math.expm1(t + p.log_q) * -math.expm1(t + (p.alpha + 1.0) * p.log_q)
    mgf = float(num / den)
    return mgf, float(pgf(p, math.exp(t)))


def mode_location(p: WGParams) -> float:
    """Real-valued mode locator ``m* = (1/alpha) log_q((1-q)/(1-q**(alpha+1)))``.

    ``pmf(y+1) >= pmf(y)`` exactly when ``y + 1 <= m*``.
    """
    _check_params(p)
    num = math.log(one_minus_pow(p.q, 1.0)) - math.log(one_minus_pow(p.q, p.alpha + 1.0))
    return num / (p.alpha * p.log_q)


def mode(p: WGParams) -> frozenset:
    """Set of modes (one point, or two adjacent points on a tie).

    The pmf rises while ``y + 1 <= m*`` and falls afterwards, so the mode is
    ``floor(m*)``; an interior mode exists iff ``q (1 + q**alpha) >= 1``.  When
    ``m*`` is a positive integer k (within 1e-9) ``pmf(k-1) == pmf(k)``.
    """
    m = mode_location(p)
    k = round(m)
    if k >= 1 and abs(m - k) <= JOINT_MODE_TOL:
        return frozenset({k - 1, k})
    return frozenset({math.floor(m)})


def _cdf_table(p, u_max):
    n = 64
    while True:
        cdf, _ = cdf_survival(p, np.arange(n))
        if cdf[-1] >= u_max:
            return cdf
        if n > 1 << 26:
            raise DomainError("quantile search did not reach the requested level")
        n *= 4


def quantile(p: WGParams, u):
    """Smallest ``y`` with ``cdf(y) >= u``; ``u`` in [0, 1), scalar or array."""
    _check_params(p)
    arr = np.asarray(u, dtype=np.float64)
    if np.any(~(arr >= 0.0)) or np.any(arr >= 1.0):
        raise DomainError("quantile level must lie in [0, 1)")
    if arr.size == 0:
        return arr.astype(np.int64)
    cdf = _cdf_table(p, float(arr.max()))
    idx = np.searchsorted(cdf, arr, side="left")
    if arr.ndim == 0:
        return int(idx)
    return idx.astype(np.int64)
