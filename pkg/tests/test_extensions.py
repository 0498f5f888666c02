import math

import numpy as np
import pytest

from oracles import FULL_GRID, Q_GRID, convolution_pmf, geometric_pmf
from wgeom.core import WGParams, pmf, tail_cutoff
from wgeom.errors import DomainError
from wgeom.extensions import (
    LevyTerms,
    NegativeDiscriminantError,
    WNBParams,
    characteristic_function,
    from_weighted_exponential,
    levy_log_cf,
    levy_terms,
    log_characteristic_function,
    nb2_pmf,
    nb_pmf,
    recover_base_pmf,
    reweighted_geometric_pmf,
    to_weighted_exponential,
    weighted_nb_pmf,
)

P = WGParams(0.5, 1.0)


class TestNegativeBinomial:
    def test_values(self):
        assert nb_pmf(2, 0.5, 0) == pytest.approx(0.25, rel=1e-14)
        assert nb_pmf(2, 0.5, 1) == pytest.approx(0.25, rel=1e-14)
        assert nb_pmf(1, 0.5, 3) == pytest.approx(0.0625, rel=1e-14)

    def test_binomial_coefficient_form(self):
        for y in range(12):
            ref = math.comb(3 + y - 1, y) * 0.6 ** 3 * 0.4 ** y
            assert nb_pmf(3, 0.4, y) == pytest.approx(ref, rel=1e-12)

    def test_normalized(self):
        ys = np.arange(0, 400)
        assert math.fsum(nb_pmf(2.5, 0.9, ys)) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("r,p", [(0, 0.5), (-1, 0.5), (1, 0), (1, 1)])
    def test_domain(self, r, p):
        with pytest.raises(DomainError):
            nb_pmf(r, p, 0)


class TestAlphaToZero:
    @pytest.mark.parametrize("q", Q_GRID)
    def test_nb2_limit(self, q):
        ys = np.arange(0, tail_cutoff(q, 1e-12) + 50)
        assert np.max(np.abs(pmf(WGParams(q, 1e-6), ys) - nb2_pmf(q, ys))) <= 1e-4

    def test_large_alpha_geometric_limit(self):
        for q in Q_GRID:
            ys = np.arange(0, 300)
            assert np.max(np.abs(pmf(WGParams(q, 500.0), ys) - geometric_pmf(q, ys))) <= 1e-12


class TestConvolutionIdentity:
    @pytest.mark.parametrize("q,alpha", FULL_GRID)
    def test_geo_plus_geo(self, q, alpha):
        p = WGParams(q, alpha)
        for y in (0, 1, 2, 5, 17, 50, 100):
            assert abs(pmf(p, y) - convolution_pmf(q, alpha, y)) <= 1e-12


class TestWeightedNB:
    def test_reduces_to_wg(self):
        assert weighted_nb_pmf(WNBParams(1, P), 1) == pytest.approx(0.28125, rel=1e-14)

    def test_hand_value(self):
        assert weighted_nb_pmf(WNBParams(2, P), 0) == pytest.approx(0.140625, rel=1e-14)

    def test_normalization(self):
        par = WNBParams(2, P)
        top = tail_cutoff(0.5, 1e-10) + 40
        total = math.fsum(weighted_nb_pmf(par, y) for y in range(top + 1))
        assert 1 - 1e-8 <= total <= 1 + 1e-12

    @pytest.mark.parametrize("q,alpha", FULL_GRID[::3])
    def test_r_one_equals_wg(self, q, alpha):
        base = WGParams(q, alpha)
        par = WNBParams(1.0, base)
        for y in range(0, 101, 5):
            assert abs(weighted_nb_pmf(par, y) - pmf(base, y)) <= 1e-12

    def test_factor_order_irrelevant(self):
        par = WNBParams(2.7, WGParams(0.6, 1.3))
        for y in range(40):
            assert weighted_nb_pmf(par, y) == pytest.approx(weighted_nb_pmf(par, y, swap=True), rel=1e-15, abs=1e-15)

    def test_hypergeometric_series_form(self):
        # (1-q)^r (1-q^{a+1})^r q^y sum_x C(r+x-1,x) C(r+y-x-1,y-x) q^{a x}, integer r
        r, q, a = 3, 0.55, 0.8
        par = WNBParams(r, WGParams(q, a))
        for y in range(15):
            s = sum(math.comb(r + x - 1, x) * math.comb(r + y - x - 1, y - x) * q ** (a * x) for x in range(y + 1))
            ref = (1 - q) ** r * (1 - q ** (a + 1)) ** r * q ** y * s
            assert weighted_nb_pmf(par, y) == pytest.approx(ref, rel=1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            WNBParams(0, P)
        with pytest.raises(DomainError):
            weighted_nb_pmf(WNBParams(1, P), -1)


class TestLevy:
    def test_zero(self):
        assert levy_log_cf(WGParams(0.37, 4.2), 0.0) == 0

    def test_against_direct_cf(self):
        assert abs(levy_log_cf(P, 1.0) - log_characteristic_function(P, 1.0)) <= 1e-8

    def test_conjugate_symmetry(self):
        for t in (0.3, 1.0, 2.5):
            assert abs(levy_log_cf(P, -t) - levy_log_cf(P, t).conjugate()) <= 1e-12

    @pytest.mark.parametrize("q,alpha", FULL_GRID)
    def test_infinite_divisibility_grid(self, q, alpha):
        p = WGParams(q, alpha)
        for t in (-3, -1, -0.1, 0.1, 1, 3):
            assert abs(levy_log_cf(p, t, 1e-10) - log_characteristic_function(p, t)) <= 1e-8

    def test_direct_cf_matches_series(self):
        p = WGParams(0.6, 2.0)
        ys = np.arange(0, 300)
        for t in (0.4, 2.0):
            ref = complex(np.sum(pmf(p, ys) * np.exp(1j * t * ys)))
            assert abs(characteristic_function(p, t) - ref) <= 1e-12

    def test_terms(self):
        terms = levy_terms(P, 1e-8)
        assert isinstance(terms, LevyTerms)
        k, mag = terms.jumps[2]
        assert k == 3
        assert mag == pytest.approx((0.5 ** 3 + 0.25 ** 3) * 3 / 10, rel=1e-14)
        assert terms.gamma == pytest.approx(sum((0.5 ** k + 0.25 ** k) / (1 + k * k) for k in range(1, 200)), abs=1e-8)

    def test_epsilon_bounds(self):
        with pytest.raises(DomainError):
            levy_log_cf(P, 1.0, 1e-3)


class TestWeightedExponential:
    def test_mapping(self):
        p = from_weighted_exponential(1.0, math.log(2))
        assert p.q == pytest.approx(0.5, rel=1e-15)
        assert p.alpha == 1.0
        assert from_weighted_exponential(2.0, 0.1).q == pytest.approx(0.904837, abs=1e-6)

    def test_round_trip(self):
        for lam in (0.01, 0.7, 3.0):
            _, back = to_weighted_exponential(from_weighted_exponential(1.5, lam))
            assert abs(back - lam) <= 1e-15 * max(1.0, lam) * 4

    def test_discretized_density(self):
        # normalizing e^{-lam y}(1 - e^{-alpha lam (y+1)}) over y = 0, 1, ... gives WG(alpha, e^{-lam})
        a, lam = 1.7, 0.45
        ys = np.arange(0, 200)
        dens = np.exp(-lam * ys) * -np.expm1(-a * lam * (ys + 1))
        np.testing.assert_allclose(dens / dens.sum(), pmf(from_weighted_exponential(a, lam), ys), rtol=1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            from_weighted_exponential(1.0, 0.0)


class TestCharacterization:
    def test_first_terms(self):
        theta = recover_base_pmf(0.5, 3)
        assert theta[0] == 1.0
        assert theta[1] == pytest.approx(0.5, rel=1e-15)
        # theta(1 + theta) = 0.75 has positive root 0.5
        assert theta[1] * (1 + theta[1]) == pytest.approx(0.75, rel=1e-15)

    def test_q03(self):
        theta = recover_base_pmf(0.3, 50)
        assert np.max(np.abs(theta - 0.3 ** np.arange(51))) <= 1e-9

    @pytest.mark.parametrize("q", Q_GRID)
    def test_grid(self, q):
        theta = recover_base_pmf(q, 500)
        assert np.max(np.abs(theta - q ** np.arange(501))) <= 1e-9

    def test_domain(self):
        with pytest.raises(DomainError):
            recover_base_pmf(1.0, 10)
        with pytest.raises(DomainError):
            recover_base_pmf(0.5, 501)
        assert issubclass(NegativeDiscriminantError, DomainError)

    @pytest.mark.parametrize("q,alpha", FULL_GRID[::4])
    def test_reweighted_geometric(self, q, alpha):
        ys = np.arange(0, 101)
        np.testing.assert_allclose(reweighted_geometric_pmf(q, alpha, ys), pmf(WGParams(q, alpha), ys), rtol=0, atol=1e-12)
