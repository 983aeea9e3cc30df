import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from stochsir import gdd
from stochsir.gdd import Branch, gd_from_moments, log_pmf, log_pmf_moments


def pmf_table(g, xmax):
    return np.exp(log_pmf(np.arange(xmax + 1), g))


class TestBranches:
    def test_binomial(self):
        g = gd_from_moments(3.0, 1.5)
        assert g.branch is Branch.BINOMIAL
        assert g.m == pytest.approx(6.0) and g.m_int == 6 and g.p == pytest.approx(0.5)

    def test_poisson(self):
        assert gd_from_moments(2.0, 2.0).branch is Branch.POISSON

    def test_negative_binomial(self):
        g = gd_from_moments(2.0, 4.0)
        assert g.branch is Branch.NEGATIVE_BINOMIAL
        assert g.m == pytest.approx(2.0) and g.p == pytest.approx(0.5)
        assert gdd.mean(g) == pytest.approx(2.0)

    def test_tolerance_band(self):
        assert gd_from_moments(5.0, 5.0 * (1 + 5e-7)).branch is Branch.POISSON
        assert gd_from_moments(5.0, 5.0 * (1 + 2e-6)).branch is Branch.NEGATIVE_BINOMIAL
        assert gd_from_moments(5.0, 5.0 * (1 - 2e-6)).branch is Branch.BINOMIAL

    @pytest.mark.parametrize("mu,v", [(0.0, 1.0), (1.0, 0.0), (-1.0, 2.0), (float("nan"), 1.0)])
    def test_invalid(self, mu, v):
        with pytest.raises(ValueError):
            gd_from_moments(mu, v)

    def test_integer_trial_count_covers_mean(self):
        g = gd_from_moments(7.3, 7.0)
        assert g.m_int >= 7.3 and g.m_int == math.ceil(g.m)


class TestLogPmf:
    def test_poisson_zero(self):
        assert log_pmf(0, gd_from_moments(2.0, 2.0)) == pytest.approx(-2.0)

    def test_binomial_value(self):
        assert log_pmf(3, gd_from_moments(3.0, 1.5)) == pytest.approx(math.log(0.3125))

    def test_negative_binomial_zero(self):
        assert log_pmf(0, gd_from_moments(2.0, 4.0)) == pytest.approx(math.log(0.25))

    def test_binomial_support(self):
        g = gd_from_moments(3.0, 1.5)
        assert log_pmf(7, g) == -math.inf
        assert log_pmf(-1, g) == -math.inf

    def test_against_scipy(self):
        x = np.arange(30)
        g = gd_from_moments(4.0, 9.0)
        nb = stats.nbinom(g.m, 1 - g.p)
        np.testing.assert_allclose(log_pmf(x, g), nb.logpmf(x), rtol=1e-12)
        g = gd_from_moments(4.0, 1.0)
        np.testing.assert_allclose(log_pmf(x, g), stats.binom(g.m_int, g.p).logpmf(x), rtol=1e-12)

    @settings(max_examples=80, deadline=None)
    @given(mu=st.floats(0.5, 500), ratio=st.floats(0.05, 20).filter(lambda r: abs(r - 1) > 1e-5),
           frac=st.floats(0, 3))
    def test_against_high_precision(self, mu, ratio, frac):
        g = gd_from_moments(mu, mu * ratio)
        x = int(frac * mu)
        mp.mp.dps = 40
        mu_, v_ = mp.mpf(mu), mp.mpf(mu * ratio)
        if g.branch is Branch.BINOMIAL:
            if x > g.m_int or g.p >= 1:
                return
            p = mu_ / g.m_int
            ref = mp.log(mp.binomial(g.m_int, x)) + x * mp.log(p) + (g.m_int - x) * mp.log(1 - p)
        else:
            m, p = mu_**2 / (v_ - mu_), 1 - mu_ / v_
            ref = mp.loggamma(x + m) - mp.loggamma(m) - mp.loggamma(x + 1) + x * mp.log(p) + m * mp.log(1 - p)
        assert log_pmf(x, g) == pytest.approx(float(ref), rel=1e-12, abs=1e-12)

    def test_point_mass(self):
        g = gd_from_moments(5.0, 1e-10)
        assert g.p == 1.0 and g.m_int == 5
        assert log_pmf(5, g) == 0.0 and log_pmf(4, g) == -math.inf

    @settings(max_examples=60)
    @given(mu=st.floats(0.1, 50), ratio=st.floats(0.05, 20))
    def test_normalization(self, mu, ratio):
        g = gd_from_moments(mu, mu * ratio)
        total = math.fsum(pmf_table(g, int(mu + 60 * math.sqrt(mu * ratio) + 200)))
        assert total == pytest.approx(1.0, abs=1e-10)

    @settings(max_examples=60)
    @given(mu=st.floats(0.1, 500), ratio=st.floats(0.05, 20))
    def test_vectorised_agrees(self, mu, ratio):
        g = gd_from_moments(mu, mu * ratio)
        x = np.arange(0, int(3 * mu) + 5)
        np.testing.assert_allclose(log_pmf_moments(x, mu, mu * ratio), log_pmf(x, g), rtol=1e-13, atol=1e-13)

    @pytest.mark.parametrize("side", [1.0, -1.0])
    def test_poisson_continuity(self, side):
        mu = 5.0
        g = gd_from_moments(mu, mu * (1 + side * 1e-4))
        assert g.branch is not Branch.POISSON
        x = np.arange(200)
        assert np.max(np.abs(pmf_table(g, 199) - stats.poisson(mu).pmf(x))) <= 1e-3


class TestMoments:
    @settings(max_examples=200)
    @given(mu=st.floats(0.5, 500), ratio=st.floats(1.0, 20))
    def test_exact_mean_variance_overdispersed(self, mu, ratio):
        g = gd_from_moments(mu, mu * ratio)
        assert gdd.mean(g) == pytest.approx(mu, rel=1e-12)
        assert gdd.variance(g) == pytest.approx(mu * ratio, rel=1e-12)

    @settings(max_examples=200)
    @given(mu=st.floats(0.5, 500), ratio=st.floats(0.05, 1.0))
    def test_binomial_mean_exact_variance_bounded_by_mean(self, mu, ratio):
        # rounding the trial count up leaves the mean exact; the variance error relative to mu is <= 1/m_int
        g = gd_from_moments(mu, mu * ratio)
        assert gdd.mean(g) == pytest.approx(mu, rel=1e-12)
        if g.branch is Branch.BINOMIAL:
            assert abs(gdd.variance(g) - mu * ratio) <= mu / g.m_int * (1 + 1e-12)


class TestSample:
    def test_tiny_poisson(self, rng):
        assert np.all(gdd.sample(gd_from_moments(1e-12, 1e-12), rng, 10000) == 0)

    def test_overdispersed_moments(self, rng):
        x = gdd.sample(gd_from_moments(5.0, 10.0), rng, 10**6)
        n = x.size
        assert abs(x.mean() - 5.0) <= 3 * math.sqrt(10.0 / n)
        # SE of the sample variance from the fourth central moment of the NB law
        g = gd_from_moments(5.0, 10.0)
        d = stats.nbinom(g.m, 1 - g.p)
        m1, m2, m3, m4 = (d.moment(k) for k in range(1, 5))
        c4 = m4 - 4 * m1 * m3 + 6 * m1**2 * m2 - 3 * m1**4
        se = math.sqrt((c4 - 10.0**2) / n)
        assert abs(x.var() - 10.0) <= 3 * se

    def test_binomial_goodness_of_fit(self, rng):
        g = gd_from_moments(3.0, 1.5)
        x = gdd.sample(g, rng, 10**6)
        obs = np.bincount(x, minlength=g.m_int + 1)
        exp = pmf_table(g, g.m_int) * x.size
        assert stats.chisquare(obs, exp).pvalue > 0.01

    def test_draws_are_integers(self, rng):
        for mu, v in [(3.0, 1.5), (2.0, 2.0), (2.0, 4.0)]:
            x = gdd.sample(gd_from_moments(mu, v), rng, 100)
            assert np.issubdtype(x.dtype, np.integer) and np.all(x >= 0)
