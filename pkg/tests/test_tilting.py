import math

import numpy as np
import pytest
from scipy import integrate as sp_integrate
from scipy import stats

from subweibull_lab import dist_core as dc
from subweibull_lab import tilting as tl
from subweibull_lab import transform_engine as te

from _laws import CATALOG, CONTINUOUS, DISCRETE, law_id


def tilt_grid(d):
    """Tilts at 45% and 90% of each side of the interval, each side capped at 5."""
    ci = te.convergence_interval(d)
    out = []
    for side, sign in ((ci.S, -1.0), (ci.T, 1.0)):
        m = min(side, 5.0)
        if m > 0:
            out += [sign * 0.45 * m, sign * 0.9 * m]
    return out


def scipy_mass(td):
    """Total mass of the tilted density by scipy quad, split around the bulk."""
    if td.discrete:
        start, count = td.lattice
        n = np.arange(start, start + min(count, 5000))
        return float(np.sum(td.pdf(n)))
    lo, hi = td.support
    c, s = td.center, td.scale
    cuts = sorted({lo, hi, *[x for x in (c - 8 * s, c, c + 8 * s, *td.breakpoints) if lo < x < hi]})
    total = 0.0
    for a, b in zip(cuts, cuts[1:]):
        total += sp_integrate.quad(td.pdf, a, b, epsabs=0, epsrel=1e-12, limit=500)[0]
    return total


class TestTiltConstruction:
    def test_gaussian_conjugate(self):
        td = tl.tilt(dc.Gaussian(0, 1), 2.0)
        assert td.conjugate == dc.Gaussian(2.0, 1.0)
        assert td.log_normalizer == pytest.approx(2.0, rel=1e-15)

    def test_poisson_conjugate(self):
        td = tl.tilt(dc.Poisson(1), math.log(2))
        assert td.conjugate.mu == pytest.approx(2.0, rel=1e-15)
        assert td.log_normalizer == pytest.approx(1.0, rel=1e-15)

    def test_exponential_conjugate(self):
        td = tl.tilt(dc.Exponential(3.0), 1.0)
        assert td.conjugate == dc.Exponential(2.0)
        assert td.log_normalizer == pytest.approx(math.log(1.5), rel=1e-14)

    def test_identity(self, any_law):
        td = tl.tilt(any_law, 0.0)
        assert td.log_normalizer == 0.0
        x = np.linspace(-10, 10, 401)
        np.testing.assert_array_equal(tl.tilted_density(td, x), any_law.pdf(x))

    @pytest.mark.parametrize(
        "d, theta",
        [(dc.Pareto(1, 2), 0.1), (dc.Exponential(1), 1.0), (dc.Exponential(1), 1.5), (dc.Laplace(0, 1), -1.0)],
        ids=["pareto", "exp-endpoint", "exp-beyond", "laplace-endpoint"],
    )
    def test_outside_interval(self, d, theta):
        with pytest.raises(tl.TiltOutsideInterval):
            tl.tilt(d, theta)

    def test_two_heavy_tails_refuse_every_nonzero_tilt(self):
        d = dc.TwoSidedMixture(dc.Pareto(1, 3), dc.Pareto(1, 3), 0.5)
        assert te.convergence_interval(d) == te.ConvergenceInterval(0.0, 0.0)
        for theta in (-0.01, 0.01):
            with pytest.raises(tl.TiltOutsideInterval):
                tl.tilt(d, theta)
        assert tl.tilt(d, 0.0).log_normalizer == 0.0

    def test_negative_tilt_of_heavy_nonnegative_law(self):
        # oracle: mpmath quadrature at 40 digits
        td = tl.tilt(dc.Pareto(1, 2), -0.5)
        assert td.conjugate is None
        assert td.log_normalizer == pytest.approx(-0.813714449360420538, rel=1e-12)
        assert td.mean() == pytest.approx(1.473995620045375897, rel=1e-9)
        assert tl.tilted_cdf(td, 2.0) == pytest.approx(0.87625247413725399, abs=1e-10)

    def test_tilted_laplace_mean(self):
        # density ∝ exp(θx - |x|) gives mean 2θ / (1 - θ²)
        assert tl.tilt(dc.Laplace(0, 1), 0.5).mean() == pytest.approx(4 / 3, rel=1e-9)


class TestDensityAndCdf:
    def test_gaussian_density_example(self):
        td = tl.tilt(dc.Gaussian(0, 1), 2.0)
        assert tl.tilted_density(td, 2.0) == pytest.approx(0.3989422804014327, rel=1e-14)

    def test_poisson_mass_example(self):
        td = tl.tilt(dc.Poisson(1), math.log(2))
        assert tl.tilted_density(td, 0) == pytest.approx(math.exp(-2), rel=1e-14)

    @pytest.mark.parametrize("d", CATALOG, ids=law_id)
    def test_normalization(self, d):
        for theta in tilt_grid(d):
            assert scipy_mass(tl.tilt(d, theta)) == pytest.approx(1.0, abs=1e-8), theta

    @pytest.mark.parametrize(
        "d, theta",
        [
            (dc.Gaussian(0, 1), 2.0),
            (dc.Gaussian(1.5, 0.4), -3.0),
            (dc.Exponential(1.0), 0.5),
            (dc.Exponential(2.0), -4.0),
            (dc.Poisson(1.0), math.log(2)),
            (dc.Poisson(7.5), -1.0),
        ],
        ids=["gauss", "gauss-neg", "exp", "exp-neg", "poisson", "poisson-neg"],
    )
    def test_conjugate_agreement(self, d, theta):
        td = tl.tilt(d, theta)
        c = td.conjugate
        x = np.linspace(float(c.ppf(1e-6)) - 1, float(c.ppf(1 - 1e-6)) + 1, 100)
        numeric = tl.tilted_cdf(td, x, use_conjugate=False)
        np.testing.assert_allclose(numeric, c.cdf(x), rtol=0, atol=1e-8)

    def test_conjugate_agreement_in_far_tail(self):
        td = tl.tilt(dc.Gaussian(0, 1), 2.0)
        x = np.array([-8.0, -6.0, 9.0, 11.0])
        np.testing.assert_allclose(td.numeric_logcdf(x[:2]), td.conjugate.logcdf(x[:2]), rtol=1e-8)
        np.testing.assert_allclose(td.numeric_logsf(x[2:]), td.conjugate.logsf(x[2:]), rtol=1e-8)

    @pytest.mark.parametrize(
        "d, theta, inside, outside",
        [
            (dc.Pareto(1, 2), -0.5, np.linspace(1.0, 50, 40), np.linspace(-5, 0.999, 40)),
            (dc.Uniform(-1, 3), 2.0, np.linspace(-1, 3, 40), np.r_[np.linspace(-9, -1.001, 20), np.linspace(3.001, 9, 20)]),
            (dc.HalfNormal(1.3), -1.0, np.linspace(0, 20, 40), np.linspace(-20, -1e-9, 40)),
            (dc.Poisson(1.0), 0.7, np.arange(0, 60.0), np.r_[np.arange(-5, 0.0), np.arange(0.5, 20)]),
        ],
        ids=["pareto", "uniform", "halfnormal", "poisson"],
    )
    def test_support_preserved(self, d, theta, inside, outside):
        td = tl.tilt(d, theta)
        assert np.all((tl.tilted_density(td, inside) > 0) == (d.pdf(inside) > 0))
        assert np.all(tl.tilted_density(td, inside) > 0)
        assert np.all(tl.tilted_density(td, outside) == 0)
        assert td.support == d.support

    @pytest.mark.parametrize(
        "d, th1, th2",
        [
            (dc.Laplace(0, 1), 0.3, 0.2),
            (dc.Laplace(0, 1), -0.6, 0.9),
            (dc.Gaussian(0, 1), 1.0, -2.5),
            (dc.Pareto(1, 2), -0.5, -1.0),
            (dc.Poisson(2.0), 0.5, -1.5),
        ],
        ids=["laplace", "laplace-cross", "gauss", "pareto", "poisson"],
    )
    def test_composition(self, d, th1, th2):
        twice = tl.tilt(tl.tilt(d, th1), th2)
        once = tl.tilt(d, th1 + th2)
        assert twice.log_normalizer == pytest.approx(
            te.laplace_transform(d, -(th1 + th2)).log_value - te.laplace_transform(d, -th1).log_value, abs=1e-9
        )
        lo, hi = float(once.ppf(1e-9)), float(once.ppf(1 - 1e-9))
        x = np.linspace(lo, hi, 200)
        for use_conjugate in (True, False):
            a = tl.tilted_cdf(twice, x, use_conjugate)
            b = tl.tilted_cdf(once, x, use_conjugate)
            assert np.max(np.abs(a - b)) <= 1e-8


class TestTiltedMgf:
    def test_exponential_example(self):
        td = tl.tilt(dc.Exponential(1), 0.5)
        assert tl.tilted_mgf(td, 0.25).value == pytest.approx(2.0, rel=1e-14)
        assert not tl.tilted_mgf(td, 0.6).is_finite

    @pytest.mark.parametrize("d", CATALOG, ids=law_id)
    def test_zero_is_one(self, d):
        for theta in tilt_grid(d)[:2]:
            assert tl.tilted_mgf(tl.tilt(d, theta), 0.0).log_value == pytest.approx(0.0, abs=1e-12)

    def test_matches_conjugate_mgf(self):
        td = tl.tilt(dc.Gaussian(0.5, 2.0), -0.7)
        for t in np.linspace(-3, 3, 13):
            assert tl.tilted_mgf(td, t).log_value == pytest.approx(te.mgf(td.conjugate, t).log_value, abs=1e-12)


class TestIntervalShift:
    def test_laplace_example(self):
        td = tl.tilt(dc.Laplace(0, 1), 0.5)
        ci = tl.shifted_interval(td)
        assert ci.S == pytest.approx(1.5, abs=1e-5)
        assert ci.T == pytest.approx(0.5, abs=1e-5)

    @pytest.mark.parametrize(
        "d, theta",
        [
            (dc.Laplace(0, 1), 0.5),
            (dc.Laplace(-0.3, 2.0), -0.2),
            (dc.Exponential(1.0), 0.5),
            (dc.TwoSidedMixture(dc.Exponential(2.0), dc.Exponential(1.0), 0.3), -1.2),
            (dc.Pareto(1, 2), -0.5),
            (dc.Gaussian(0, 1), 2.0),
        ],
        ids=law_id,
    )
    def test_both_routes(self, d, theta):
        base = te.convergence_interval(d)
        expected = base.shifted(theta)
        td = tl.tilt(d, theta)
        law = td.conjugate if td.conjugate is not None else td
        for ci in (tl.shifted_interval(td), te.convergence_interval(law)):
            for got, want in ((ci.S, expected.S), (ci.T, expected.T)):
                if math.isinf(want):
                    assert math.isinf(got)
                else:
                    assert got == pytest.approx(want, abs=1e-5)


class TestSampling:
    def test_gaussian_example(self):
        xs = tl.tilted_sample(tl.tilt(dc.Gaussian(0, 1), 2.0), 100_000, 1)
        assert abs(xs.mean() - 2.0) <= 0.01

    def test_identity_uniform(self):
        xs = tl.tilted_sample(tl.tilt(dc.Uniform(0, 1), 0.0), 100_000, 7)
        assert abs(xs.mean() - 0.5) <= 0.005

    def test_poisson_example(self):
        xs = tl.tilted_sample(tl.tilt(dc.Poisson(1), math.log(2)), 100_000, 3)
        assert abs(xs.mean() - 2.0) <= 0.02

    def test_deterministic(self):
        td = tl.tilt(dc.Laplace(0, 1), 0.5)
        np.testing.assert_array_equal(tl.tilted_sample(td, 500, 11), tl.tilted_sample(td, 500, 11))

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            tl.tilted_sample(tl.tilt(dc.Gaussian(), 1.0), 0, 1)

    @pytest.mark.parametrize(
        "d, theta",
        [
            (dc.Laplace(0, 1), 0.5),
            (dc.Pareto(1, 2), -0.5),
            (dc.Weibull(0.7, 2.0), -1.0),
            (dc.TwoSidedMixture(dc.Exponential(2.0), dc.HalfNormal(1.0), 0.3), 1.0),
            (dc.Uniform(-1, 3), -2.0),
            (dc.LogNormal(0.2, 0.8), -0.3),
        ],
        ids=law_id,
    )
    def test_numeric_sampler_ks(self, d, theta):
        td = tl.tilt(d, theta)
        assert td.conjugate is None
        xs = tl.tilted_sample(td, 20_000, 5)
        assert stats.kstest(xs, lambda x: tl.tilted_cdf(td, x)).pvalue > 1e-3

    def test_numeric_ppf_inverts_cdf(self):
        td = tl.tilt(dc.Weibull(0.7, 2.0), -1.0)
        u = np.linspace(1e-9, 1 - 1e-9, 101)
        np.testing.assert_allclose(td.cdf(td.ppf(u)), u, atol=1e-12)

    @pytest.mark.parametrize("d", DISCRETE, ids=law_id)
    def test_discrete_sample_on_lattice(self, d):
        xs = tl.tilted_sample(tl.tilt(d, 0.4), 1000, 2)
        start, _ = d.lattice
        assert np.all(np.mod(xs - start, 1.0) == 0)


@pytest.mark.parametrize("d", CONTINUOUS[:4], ids=law_id)
def test_tilted_law_is_a_distribution_spec(d):
    td = tl.tilt(d, tilt_grid(d)[0])
    assert isinstance(td, dc.DistributionSpec)
    assert td.to_dict()["family"] == "tilted"
