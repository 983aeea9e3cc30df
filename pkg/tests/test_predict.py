import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stochsir.inference import Chain, InitialCondition
from stochsir.predict import (
    PredictiveDraws,
    band_coverage,
    boxplot_stats,
    posterior_draws,
    predictive_samples,
    quantile_bands,
)
from stochsir.reaction_network import ObservationSeries

DATA = ObservationSeries(np.arange(11) / 52, [2, 5, 9, 16, 25, 37, 50, 62, 75, 83, 86])


def chain_of(rows):
    s = np.asarray(rows, dtype=float)
    return Chain(("b0", "b1", "omega"), s, np.zeros(len(s)), np.arange(1, len(s) + 1),
                 iterations=len(s), burn_in=0, thin=1)


def draws_of(col):
    col = np.asarray(col)
    return PredictiveDraws(np.array([1.0]), col.reshape(-1, 1), np.arange(col.size))


class TestQuantiles:
    def test_constant_column(self):
        band = quantile_bands(draws_of(np.full(50, 7)))
        assert np.all(band.values == 7)

    def test_nearest_rank(self):
        band = quantile_bands(draws_of(np.arange(1, 101)), (0.05, 0.5, 0.95))
        assert band.median[0] == 50
        assert band.lower[0] == 5 and band.upper[0] == 95

    def test_poisson_quantiles(self):
        x = np.random.default_rng(0).poisson(10, 10**5)
        band = quantile_bands(draws_of(x), (0.05, 0.95))
        assert abs(band.lower[0] - 5) <= 1 and abs(band.upper[0] - 16) <= 1

    @settings(max_examples=50)
    @given(cols=st.lists(st.lists(st.integers(0, 500), min_size=5, max_size=5), min_size=3, max_size=80))
    def test_monotone_in_probability(self, cols):
        d = PredictiveDraws(np.arange(5.0), np.array(cols), np.arange(len(cols)))
        band = quantile_bands(d)
        assert np.all(np.diff(band.values, axis=0) >= 0)

    def test_bad_probs(self):
        with pytest.raises(ValueError):
            quantile_bands(draws_of(np.arange(10)), (0.5, 0.05))

    def test_coverage(self):
        d = PredictiveDraws(np.arange(3.0), np.tile(np.arange(100)[:, None], (1, 3)), np.arange(100))
        band = quantile_bands(d)
        assert band.lower[0] == 4 and band.upper[0] == 94
        assert band_coverage(band, [50, 2, 99]) == pytest.approx(1 / 3)


class TestDraws:
    chain = chain_of([[40.0, 7.0, 200.0], [38.0, 6.5, 200.0], [45.0, 8.0, 200.0]] * 20)

    def test_integers_non_negative(self):
        d = predictive_samples(self.chain, DATA, [0.3, 0.4, 0.5], np.random.default_rng(1))
        assert np.issubdtype(d.draws.dtype, np.integer) and np.all(d.draws >= 0)
        assert d.draws.shape == (60, 3) and d.dropped == 0

    def test_reproducible(self):
        a = predictive_samples(self.chain, DATA, [0.3, 0.5], np.random.default_rng(7))
        b = predictive_samples(self.chain, DATA, [0.3, 0.5], np.random.default_rng(7))
        np.testing.assert_array_equal(a.draws, b.draws)

    def test_rows_independent_of_thinning_rng_use(self):
        # each row owns a substream, so the first row's draws do not depend on how many rows follow
        a = predictive_samples(self.chain, DATA, [0.3], np.random.default_rng(7), max_draws=60)
        one = chain_of(self.chain.samples[:1])
        b = predictive_samples(one, DATA, [0.3], np.random.default_rng(7))
        assert a.draws[0, 0] == b.draws[0, 0]

    def test_future_must_follow_data(self):
        with pytest.raises(ValueError):
            predictive_samples(self.chain, DATA, [DATA.times[-1]], np.random.default_rng(0))
        with pytest.raises(ValueError):
            predictive_samples(self.chain, DATA, [0.5, 0.4], np.random.default_rng(0))

    def test_degenerate_band(self):
        # negligible rates over a negligible horizon: m = 5 and v -> 0
        init = InitialCondition(5.0, 0.0)
        ch = chain_of([[1e-9, 1e-9, 200.0]])
        d = posterior_draws(ch, init, [1e-6], np.random.default_rng(0))
        assert d.draws[0, 0] == 5
        band = quantile_bands(d)
        assert np.all(band.values == 5)

    def test_max_draws_thins(self):
        d = predictive_samples(self.chain, DATA, [0.3], np.random.default_rng(0), max_draws=10)
        assert len(d.rows) == 10 and d.rows[0] == 0 and d.rows[-1] == 59

    def test_failed_rows_dropped(self):
        ch = chain_of([[40.0, 7.0, 200.0], [1e12, 1.0, 200.0]])
        d = predictive_samples(ch, DATA, [0.3], np.random.default_rng(0))
        assert d.dropped == 1 and d.rows.tolist() == [0]


def test_boxplot_stats():
    col = np.concatenate([np.arange(1, 100), [1000]])
    (box,) = boxplot_stats(draws_of(col))
    assert box["min"] == 1 and box["max"] == 1000
    assert box["q1"] <= box["median"] <= box["q3"]
    assert box["whisker_hi"] == 99 and box["whisker_lo"] == 1
