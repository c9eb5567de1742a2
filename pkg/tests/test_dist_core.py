import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from subweibull_lab import dist_core as dc

from _laws import CONTINUOUS, law_id

TWO_SIDED = [
    dc.Gaussian(0.0, 1.0),
    dc.Gaussian(0.5, 2.0),
    dc.Laplace(0.0, 1.0),
    dc.Laplace(-0.3, 2.0),
    dc.Uniform(-1.0, 3.0),
    dc.TwoSidedMixture(dc.Exponential(2.0), dc.Exponential(1.0), 0.3),
    dc.TwoSidedMixture(dc.Weibull(0.7, 1.0), dc.HalfNormal(2.0), 0.6),
]


class TestExamples:
    def test_standard_normal_density_at_zero(self):
        assert dc.density(dc.Gaussian(0, 1), 0.0) == pytest.approx(0.3989422804014327, rel=1e-15)

    def test_poisson_mass_at_zero(self):
        assert dc.density(dc.Poisson(1), 0.0) == pytest.approx(math.exp(-1), rel=1e-15)

    def test_density_off_support(self):
        assert dc.density(dc.Uniform(0, 1), 2.0) == 0.0
        assert dc.density(dc.Poisson(1), 1.5) == 0.0

    def test_exponential_survival(self):
        assert dc.survival(dc.Exponential(1), 1.0) == pytest.approx(math.exp(-1), rel=1e-15)

    def test_point_mass_cdf(self):
        assert dc.cdf(dc.PointMass(3), 2.0) == 0.0
        assert dc.cdf(dc.PointMass(3), 3.0) == 1.0

    def test_poisson_survival(self):
        # oracle: 1 - P(0) - P(1) - P(2) summed independently
        assert dc.survival(dc.Poisson(1), 2.0) == pytest.approx(0.08030139707139419, rel=1e-13)

    @pytest.mark.parametrize(
        "d, t, expected",
        [(dc.Gaussian(0, 1), 0.0, 1.0), (dc.Laplace(0, 1), 1.0, math.exp(-1)), (dc.Uniform(0, 1), 1.0, 0.0)],
    )
    def test_abs_survival(self, d, t, expected):
        assert dc.abs_survival(d, t) == pytest.approx(expected, rel=1e-14, abs=0)

    def test_point_mass_sample(self):
        assert list(dc.sample(dc.PointMass(3), 5, seed=11)) == [3.0] * 5

    @pytest.mark.parametrize("d, seed", [(dc.Uniform(0, 1), 42), (dc.Exponential(2), 7)])
    def test_sample_mean(self, d, seed):
        assert abs(dc.sample(d, 100_000, seed).mean() - 0.5) < 0.01

    def test_split_standard_normal(self):
        s = dc.split(dc.Gaussian(0, 1))
        assert s.A == dc.HalfNormal(1.0) and s.B == dc.HalfNormal(1.0)
        assert s.p == 0.5

    def test_split_laplace(self):
        s = dc.split(dc.Laplace(0, 1))
        assert s.A == dc.Exponential(1.0) and s.B == dc.Exponential(1.0)
        assert s.p == 0.5

    @pytest.mark.parametrize("d", [dc.Exponential(1), dc.Poisson(2), dc.PointMass(0.0), dc.Pareto(1, 2)])
    def test_split_degenerate(self, d):
        with pytest.raises(dc.DegenerateSplit):
            dc.split(d)


class TestAgainstScipy:
    """Closed forms checked against scipy.stats as an independent implementation."""

    CASES = [
        (dc.Gaussian(1, 2), stats.norm(1, 2)),
        (dc.Exponential(2), stats.expon(scale=0.5)),
        (dc.Laplace(0.5, 1.5), stats.laplace(0.5, 1.5)),
        (dc.Weibull(0.7, 2), stats.weibull_min(0.7, scale=2)),
        (dc.HalfNormal(1.3), stats.halfnorm(scale=1.3)),
        (dc.Uniform(-1, 3), stats.uniform(-1, 4)),
        (dc.Pareto(1, 2.5), stats.pareto(2.5)),
        (dc.LogNormal(0.2, 0.8), stats.lognorm(0.8, scale=math.exp(0.2))),
    ]

    @pytest.mark.parametrize("d, ref", CASES, ids=[law_id(c[0]) for c in CASES])
    def test_functions(self, d, ref):
        x = np.linspace(-3, 6, 37) + 0.013
        u = np.linspace(0.01, 0.99, 25)
        np.testing.assert_allclose(d.cdf(x), ref.cdf(x), atol=1e-14)
        np.testing.assert_allclose(d.sf(x), ref.sf(x), atol=1e-14)
        np.testing.assert_allclose(d.pdf(x), ref.pdf(x), atol=1e-14)
        np.testing.assert_allclose(d.ppf(u), ref.ppf(u), rtol=1e-13)
        np.testing.assert_allclose(d.isf(u), ref.isf(u), rtol=1e-13)
        assert d.mean() == pytest.approx(ref.mean(), rel=1e-13)
        assert d.var() == pytest.approx(ref.var(), rel=1e-12)

    def test_poisson(self):
        k = np.arange(40.0)
        np.testing.assert_allclose(dc.Poisson(3.5).cdf(k), stats.poisson.cdf(k, 3.5), atol=1e-15)
        np.testing.assert_allclose(dc.Poisson(3.5).pdf(k), stats.poisson.pmf(k, 3.5), rtol=1e-12)


class TestDeepTails:
    def test_gaussian_log_survival(self):
        assert dc.Gaussian().logsf(40.0) == pytest.approx(float(mpmath.log(mpmath.ncdf(-40))), rel=1e-12)

    def test_poisson_log_survival(self):
        mu = mpmath.mpf(3.5)
        exact = mpmath.log(mpmath.nsum(lambda k: mpmath.exp(-mu) * mu**k / mpmath.factorial(k), [201, mpmath.inf]))
        assert dc.Poisson(3.5).logsf(200.0) == pytest.approx(float(exact), rel=1e-12)

    @pytest.mark.parametrize("d, t, expected", [
        (dc.Laplace(0, 1), 1000.0, -1000.0),
        (dc.Pareto(1, 2), 1e200, -400 * math.log(10)),
        (dc.Weibull(0.5, 1), 1e6, -1000.0),
    ])
    def test_log_abs_survival_far_out(self, d, t, expected):
        assert dc.log_abs_survival(d, t) == pytest.approx(expected, rel=1e-12)


class TestInvariants:
    def test_total_mass(self, continuous_law):
        d = continuous_law
        lo, hi = d.support
        pts = sorted({p for p in (*d.breakpoints, d.center) if lo < p < hi})
        edges = [lo, *pts, hi]
        total = sum(
            integrate.quad(d.pdf, a, b, epsabs=0, epsrel=1e-12, limit=500)[0] for a, b in zip(edges, edges[1:])
        )
        assert abs(total - 1.0) <= 1e-9

    @pytest.mark.parametrize("d", [dc.Poisson(1.0), dc.Poisson(7.5)], ids=law_id)
    def test_total_mass_discrete(self, d):
        assert math.fsum(d.pdf(np.arange(400.0))) == pytest.approx(1.0, abs=1e-12)

    def test_cdf_monotone_with_limits(self, any_law):
        x = np.linspace(-50, 50, 2001)
        F = np.asarray(any_law.cdf(x))
        assert np.all(np.diff(F) >= 0)
        assert any_law.cdf(-1e300) == pytest.approx(0.0, abs=1e-12)
        assert any_law.cdf(1e300) == pytest.approx(1.0, abs=1e-12)

    def test_cdf_plus_survival(self, continuous_law):
        x = np.linspace(-10, 10, 401)
        np.testing.assert_allclose(continuous_law.cdf(x) + continuous_law.sf(x), 1.0, atol=1e-12)

    def test_abs_survival_nonincreasing(self, any_law):
        t = np.linspace(0, 30, 601)
        s = np.asarray(dc.abs_survival(any_law, t))
        assert np.all(np.diff(s) <= 1e-15) and np.all(s <= 1.0)

    def test_abs_survival_at_zero(self, continuous_law):
        assert dc.abs_survival(continuous_law, 0.0) == pytest.approx(1.0, abs=1e-15)

    @pytest.mark.parametrize("d", TWO_SIDED, ids=law_id)
    def test_split_reconstruction(self, d):
        s = dc.split(d)
        assert s.p == pytest.approx(float(d.cdf(0.0)), abs=1e-15)
        lo, hi = s.A.support[0], s.B.support[0]
        assert lo >= 0 and hi >= 0
        x = np.linspace(-6, 6, 100)
        np.testing.assert_allclose(s.reconstruct_cdf(x), d.cdf(x), atol=1e-9)

    @pytest.mark.parametrize("d", [dc.Gaussian(0.5, 2.0), dc.Laplace(-0.3, 2.0), dc.Gaussian(-1.0, 0.5)], ids=law_id)
    def test_generic_split_halves(self, d):
        s = dc.split(d)
        assert isinstance(s.A, dc.Truncated)
        x = np.linspace(0.01, 5, 50)
        # A = -X | X < 0
        np.testing.assert_allclose(s.A.sf(x), d.cdf(-x) / s.p, rtol=1e-12)
        np.testing.assert_allclose(s.B.sf(x), d.sf(x) / (1 - s.p), rtol=1e-12)
        u = np.linspace(0.05, 0.95, 19)
        np.testing.assert_allclose(s.A.cdf(s.A.ppf(u)), u, atol=1e-12)
        np.testing.assert_allclose(s.B.cdf(s.B.ppf(u)), u, atol=1e-12)

    @pytest.mark.parametrize("d", CONTINUOUS, ids=law_id)
    def test_sample_ks(self, d):
        draws = dc.sample(d, 100_000, seed=2024)
        crit = 1.628 / math.sqrt(draws.size)  # 1% level
        assert stats.kstest(draws, d.cdf).statistic < crit

    def test_poisson_sample_chi_square(self):
        d = dc.Poisson(4.0)
        draws = dc.sample(d, 100_000, seed=5)
        k = np.arange(12)
        observed = np.array([(draws == i).sum() for i in k] + [(draws >= 12).sum()])
        expected = 1e5 * np.append(d.pdf(k.astype(float)), d.sf(11.0))
        assert stats.chisquare(observed, expected).pvalue > 0.01

    def test_sampling_deterministic(self, any_law):
        np.testing.assert_array_equal(dc.sample(any_law, 50, 9), dc.sample(any_law, 50, 9))

    @settings(max_examples=60, deadline=None)
    @given(st.sampled_from(CONTINUOUS), st.floats(1e-6, 1 - 1e-6))
    def test_quantile_roundtrip(self, d, u):
        assert float(d.cdf(d.ppf(u))) == pytest.approx(u, abs=1e-12)


class TestConstruction:
    @pytest.mark.parametrize(
        "factory, message",
        [
            (lambda: dc.Gaussian(0, -1), "gaussian.sigma must be > 0"),
            (lambda: dc.Exponential(0), "exponential.rate must be > 0"),
            (lambda: dc.Uniform(2, 1), "uniform.a must be < uniform.b"),
            (lambda: dc.Weibull(-1, 1), "weibull.shape must be > 0"),
            (lambda: dc.TwoSidedMixture(dc.Exponential(1), dc.Exponential(1), 1.0), "p must be in (0, 1)"),
            (lambda: dc.TwoSidedMixture(dc.Gaussian(), dc.Exponential(1), 0.5), "left must be supported"),
            (lambda: dc.TwoSidedMixture(dc.Poisson(1), dc.Exponential(1), 0.5), "continuous"),
        ],
    )
    def test_invalid_parameters(self, factory, message):
        with pytest.raises(dc.SpecError, match=message.replace("(", r"\(").replace(")", r"\)")):
            factory()

    def test_roundtrip_through_dict(self, any_law):
        assert dc.from_dict(any_law.to_dict()) == any_law

    def test_all_violations_reported(self):
        with pytest.raises(dc.SpecError) as err:
            dc.from_dict({"family": "gaussian", "params": {"mu": "a", "sigma": -1, "extra": 1}})
        assert len(err.value.violations) == 3

    def test_unknown_family(self):
        with pytest.raises(dc.SpecError, match="family must be one of"):
            dc.from_dict({"family": "cauchy", "params": {}})

    def test_immutable(self):
        with pytest.raises(AttributeError):
            dc.Gaussian().mu = 3.0  # type: ignore[misc]
