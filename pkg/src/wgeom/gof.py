"""Chi-square goodness of fit against WG(alpha, q).

The upper-tail probability uses :func:`regularized_gamma_q`, since
``P(chi2_df > s) = Q(df/2, s/2)``.  Two degrees-of-freedom conventions are
reported side by side: ``cells - params`` and the textbook
``cells - 1 - params``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import WGParams, cdf_survival, pmf
from .errors import DomainError
from .estimate import FreqTable

_EPS = 1e-16
_TINY = 1e-300
_MAX_TERMS = 10_000


def _gamma_series(a, x):
    # lower regularized P(a, x) by its power series; good for x < a + 1
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_MAX_TERMS):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_cf(a, x):
    # upper regularized Q(a, x) by modified Lentz continued fraction; good for x >= a + 1
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_TERMS):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def regularized_gamma_q(a: float, x: float) -> float:
    """Upper regularized incomplete gamma ``Q(a, x) = Gamma(a, x) / Gamma(a)``."""
    if not (a > 0.0 and math.isfinite(a)) or not (x >= 0.0):
        raise DomainError(f"regularized_gamma_q needs a > 0 and x >= 0, got a={a}, x={x}")
    if x == 0.0:
        return 1.0
    if math.isinf(x):
        return 0.0
    if x < a + 1.0:
        return min(1.0, max(0.0, 1.0 - _gamma_series(a, x)))
    return min(1.0, max(0.0, _gamma_cf(a, x)))


def regularized_gamma_p(a: float, x: float) -> float:
    """Lower counterpart ``P(a, x) = 1 - Q(a, x)``."""
    if not (a > 0.0 and math.isfinite(a)) or not (x >= 0.0):
        raise DomainError(f"regularized_gamma_p needs a > 0 and x >= 0, got a={a}, x={x}")
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return 1.0
    if x < a + 1.0:
        return min(1.0, max(0.0, _gamma_series(a, x)))
    return min(1.0, max(0.0, 1.0 - _gamma_cf(a, x)))


def chi2_sf(statistic: float, df: int) -> float:
    if df <= 0:
        return math.nan
    return regularized_gamma_q(df / 2.0, statistic / 2.0)


@dataclass
class GofReport:
    cells: list
    statistic: float
    df_paper: int
    df_standard: int
    p_paper: float
    p_standard: float

    def p_value(self, df: int) -> float:
        """Upper-tail p-value of the statistic under an arbitrary df."""
        return chi2_sf(self.statistic, df)

    def to_dict(self) -> dict:
        return {
            "cells": [
                {"label": lab, "observed": int(o), "expected": float(e)} for lab, o, e in self.cells
            ],
            "statistic": self.statistic,
            "df_paper": self.df_paper,
            "df_standard": self.df_standard,
            "p_paper": self.p_paper,
            "p_standard": self.p_standard,
        }


def cell_labels(data: FreqTable) -> list:
    labels = [str(v) for v, _ in data.rows]
    if data.tail_open:
        labels[-1] = f">={data.rows[-1][0]}"
    return labels


def expected_frequencies(p: WGParams, data: FreqTable) -> np.ndarray:
    """``n * pmf(y)`` per exact cell and ``n * P(Y >= k)`` for an open tail cell."""
    if not isinstance(p, WGParams):
        raise DomainError("expected WGParams")
    n = data.n
    values = data.values
    exp = n * pmf(p, values)
    if data.tail_open:
        _, surv = cdf_survival(p, int(values[-1]))
        exp[-1] = n * surv
    return exp


def _pool(labels, observed, expected, min_expected):
    groups = []
    cur = None
    for lab, o, e in zip(labels, observed, expected):
        if cur is None:
            cur = [lab, lab, o, e]
        else:
            cur[1], cur[2], cur[3] = lab, cur[2] + o, cur[3] + e
        if cur[3] >= min_expected:
            groups.append(cur)
            cur = None
    if cur is not None:
        if groups:
            last = groups[-1]
            last[1], last[2], last[3] = cur[1], last[2] + cur[2], last[3] + cur[3]
        else:
            groups.append(cur)
    cells = []
    for first, last, o, e in groups:
        if first == last:
            lab = first
        elif last.startswith(">="):
            lab = ">=" + first
        else:
            lab = f"{first}-{last}"
        cells.append((lab, o, e))
    return cells


def chi_square_test(
    observed: FreqTable,
    expected: Sequence[float],
    n_params: int = 2,
    min_expected: float = 0.0,
) -> GofReport:
    """Pearson chi-square of ``observed`` against ``expected``.

    Cells whose expectation is below ``min_expected`` are pooled with their
    right neighbours (a short remainder joins the last group).  The default
    of 0 keeps every cell as given.
    """
    expected = np.asarray(expected, dtype=np.float64)
    counts = observed.counts
    if expected.shape != counts.shape:
        raise DomainError("observed and expected lengths differ")
    if min_expected < 0.0:
        raise DomainError("min_expected must be non-negative")
    if np.any(expected < 0.0) or not np.all(np.isfinite(expected)):
        raise DomainError("expected frequencies must be finite and non-negative")
    cells = _pool(cell_labels(observed), counts.tolist(), expected.tolist(), min_expected)
    if any(e <= 0.0 for _, _, e in cells):
        raise DomainError("a cell has zero expected frequency; enable pooling with min_expected")
    stat = math.fsum((o - e) ** 2 / e for _, o, e in cells)
    k = len(cells)
    df_paper = k - n_params
    df_standard = k - 1 - n_params
    return GofReport(
        cells=cells,
        statistic=stat,
        df_paper=df_paper,
        df_standard=df_standard,
        p_paper=chi2_sf(stat, df_paper),
        p_standard=chi2_sf(stat, df_standard),
    )


def binned_table(observations) -> FreqTable:
    """Contiguous table 0..max(obs) whose last cell is an open tail."""
    obs = np.asarray(observations, dtype=np.int64)
    if obs.size == 0 or obs.min() < 0:
        raise DomainError("observations must be a non-empty set of non-negative integers")
    counts = np.bincount(obs)
    return FreqTable(tuple(enumerate(counts.tolist())), tail_open=True)


def goodness_of_fit(p: WGParams, data: FreqTable, n_params: int = 2, min_expected: float = 0.0) -> GofReport:
    return chi_square_test(data, expected_frequencies(p, data), n_params, min_expected)


def builtin_datasets() -> dict:
    """Automobile-claims and hospitalization count tables (both with an open last cell)."""
    return {
        "auto_claims": FreqTable(((0, 1563), (1, 271), (2, 32), (3, 7), (4, 2)), tail_open=True),
        "hospitalizations": FreqTable(((0, 2659), (1, 244), (2, 19), (3, 2)), tail_open=True),
    }
