import math

import numpy as np
import pytest
from scipy import integrate

import spreadmix as sm
from spreadmix.errors import SeriesDivergenceError

EXP = sm.Exponential(1.0)
GAMMA = sm.Gamma(2.0, 1.0)
IG = sm.InverseGaussian(1.0 / math.sqrt(2.0), 1.0)
IG_DG = sm.InverseGaussian(1.0 / math.sqrt(2.0), 1.0, sm.IGParameterization.DELTA_GAMMA)
ALL_LAWS = [EXP, GAMMA, IG, IG_DG]


class TestMgf:
    def test_at_zero_is_one(self):
        for law in ALL_LAWS:
            assert law.mgf(0.0) == pytest.approx(1.0, abs=1e-14)

    def test_exponential_closed_form(self):
        assert EXP.mgf(0.5) == pytest.approx(2.0, abs=1e-14)

    def test_gamma_closed_form(self):
        assert GAMMA.mgf(0.5) == pytest.approx(4.0, abs=1e-13)

    def test_infinite_at_boundary(self):
        assert EXP.mgf(1.0) == math.inf
        assert EXP.mgf(2.0) == math.inf

    def test_domain_bounds(self):
        assert EXP.mgf_domain_bound == 1.0
        assert GAMMA.mgf_domain_bound == 1.0
        assert IG.mgf_domain_bound == pytest.approx(1.0, abs=1e-14)
        # delta-gamma reads the same numerals as a different distribution
        assert IG_DG.mgf_domain_bound == pytest.approx(0.5, abs=1e-14)

    def test_monotone_on_domain(self):
        for law in ALL_LAWS:
            bound = law.mgf_domain_bound
            grid = np.linspace(-2.0, bound * 0.95, 40)
            values = [law.mgf(s) for s in grid]
            assert all(a < b for a, b in zip(values, values[1:]))

    def test_quadrature_oracle(self):
        # integral of e^{sy} f(y) dy against the closed form at s = D/2
        # (the exponent cap only bites where the density has underflowed)
        for law in ALL_LAWS:
            s = law.mgf_domain_bound / 2.0
            val, _ = integrate.quad(
                lambda y: math.exp(min(s * y, 700.0)) * law.density(y), 0, np.inf
            )
            assert val == pytest.approx(law.mgf(s), rel=1e-9)

    def test_derivative_matches_finite_difference(self):
        for law in ALL_LAWS:
            s = 0.3 * law.mgf_domain_bound
            h = 1e-6
            fd = (law.mgf(s + h) - law.mgf(s - h)) / (2 * h)
            assert law.mgf_derivative(s) == pytest.approx(fd, rel=1e-8)


class TestTruncatedMgf:
    def test_at_zero(self):
        for law in ALL_LAWS:
            assert law.truncated_mgf(0.0) == 1.0

    def test_exponential_value(self):
        # moments of Exp(1) are k!, so the polynomial is 1 + s + s^2 + s^3 + s^4
        assert EXP.truncated_mgf(0.1) == pytest.approx(1.1111, abs=1e-12)

    def test_taylor_remainder_bound(self):
        # |poly - mgf| <= 2 |s|^5 E[Y^5] / 120 on |s| <= 0.1
        for law in ALL_LAWS:
            m5 = law.raw_moment(5)
            for s in np.linspace(-0.1, 0.1, 21):
                bound = 2.0 * abs(s) ** 5 * m5 / 120.0
                assert abs(law.truncated_mgf(s) - law.mgf(s)) <= bound + 1e-15

    def test_defined_beyond_domain(self):
        assert math.isfinite(EXP.truncated_mgf(5.0))

    def test_custom_law_missing_moments(self):
        law = sm.CustomLaw(
            mgf_fn=lambda s: 1.0 / (1.0 - s),
            domain_bound=1.0,
            moments=sm.MomentTable((1.0, 1.0, 2.0, 6.0, 24.0)),
            density_fn=lambda y: math.exp(-y),
            sampler=lambda n, rng: -np.log1p(-rng.random(n)),
        )
        assert law.truncated_mgf(0.1) == pytest.approx(EXP.truncated_mgf(0.1), abs=1e-12)
        with pytest.raises(ValueError, match="moments unavailable"):
            law.raw_moment(5)


class TestRawMoments:
    def test_exponential_factorials(self):
        assert EXP.raw_moment(3) == pytest.approx(6.0, rel=1e-12)

    def test_gamma(self):
        assert GAMMA.raw_moment(2) == pytest.approx(6.0, rel=1e-12)

    def test_ig_mean(self):
        assert IG.raw_moment(1) == pytest.approx(1.0 / math.sqrt(2.0), rel=1e-14)

    def test_ig_recurrence_against_explicit_sum(self):
        # E[Y^n] = mu^n sum_{i<n} (n-1+i)!/(i! (n-1-i)!) (mu/(2 lam))^i
        mu, lam = 1.0 / math.sqrt(2.0), 1.0
        for n in range(1, 7):
            explicit = mu**n * sum(
                math.factorial(n - 1 + i)
                / (math.factorial(i) * math.factorial(n - 1 - i))
                * (mu / (2 * lam)) ** i
                for i in range(n)
            )
            assert IG.raw_moment(n) == pytest.approx(explicit, rel=1e-12)

    def test_quadrature_oracle(self):
        for law in ALL_LAWS:
            for k in (1, 2, 3, 4):
                val, _ = integrate.quad(lambda y: y**k * law.density(y), 0, np.inf)
                assert val == pytest.approx(law.raw_moment(k), rel=1e-8)

    def test_lyapunov_log_convexity(self):
        for law in ALL_LAWS:
            m = [law.raw_moment(k) for k in range(9)]
            for j in range(1, 8):
                assert m[j] ** 2 <= m[j - 1] * m[j + 1] * (1 + 1e-12)

    def test_ratio_consistency(self):
        for law in ALL_LAWS:
            for k in range(6):
                direct = law.raw_moment(k + 1) / law.raw_moment(k)
                assert law.raw_moment_ratio(k) == pytest.approx(direct, rel=1e-10)


class TestDensity:
    def test_exponential_value(self):
        assert EXP.density(0.5) == pytest.approx(math.exp(-0.5), rel=1e-14)

    def test_gamma_value(self):
        assert GAMMA.density(1.0) == pytest.approx(math.exp(-1.0), rel=1e-14)

    def test_nonpositive_is_zero(self):
        for law in ALL_LAWS:
            assert law.density(0.0) == 0.0
            assert law.density(-1.0) == 0.0

    def test_normalization(self):
        for law in ALL_LAWS:
            val, _ = integrate.quad(law.density, 0, np.inf)
            assert val == pytest.approx(1.0, abs=1e-10)


class TestSampling:
    def test_exponential_clt(self):
        draws = EXP.sample(10**6, 12345)
        assert abs(draws.mean() - 1.0) <= 3.0 / math.sqrt(10**6)

    def test_gamma_clt(self):
        draws = GAMMA.sample(10**6, 999)
        assert abs(draws.mean() - 2.0) <= 3.0 * math.sqrt(2.0) / math.sqrt(10**6)

    def test_ig_clt(self):
        draws = IG.sample(10**6, 7)
        sd = math.sqrt(IG.raw_moment(2) - IG.raw_moment(1) ** 2)
        assert abs(draws.mean() - IG.raw_moment(1)) <= 3.0 * sd / math.sqrt(10**6)

    def test_same_seed_same_stream(self):
        for law in ALL_LAWS:
            a = law.sample(1000, 42)
            b = law.sample(1000, 42)
            np.testing.assert_array_equal(a, b)

    def test_positive(self):
        for law in ALL_LAWS:
            assert (law.sample(10**4, 3) > 0).all()

    def test_sample_mgf_estimate(self):
        # mean of e^{sY} at s = D/2 within 4 sample standard errors of the mgf
        for law, seed in [(EXP, 11), (GAMMA, 12), (IG, 13)]:
            s = law.mgf_domain_bound / 2.0
            vals = np.exp(s * law.sample(10**6, seed))
            se = vals.std(ddof=1) / 1000.0
            assert abs(vals.mean() - law.mgf(s)) <= 4.0 * se


class TestDegenerate:
    def test_basics(self):
        one = sm.Degenerate(1.0)
        assert one.mgf(0.7) == pytest.approx(math.exp(0.7))
        assert one.raw_moment(5) == 1.0
        assert one.mgf_domain_bound == math.inf
        np.testing.assert_array_equal(one.sample(5, 0), np.ones(5))

    def test_no_density(self):
        with pytest.raises(ValueError):
            sm.Degenerate(2.0).density(1.0)


class TestCustomLaw:
    def test_rejects_partial(self):
        with pytest.raises(ValueError, match="missing capabilities"):
            sm.CustomLaw(
                mgf_fn=lambda s: 1.0 / (1.0 - s),
                domain_bound=1.0,
                moments=sm.MomentTable((1.0, 1.0, 2.0, 6.0, 24.0)),
                density_fn=None,
                sampler=lambda n, rng: -np.log1p(-rng.random(n)),
            )

    def test_rejects_bad_mgf_at_zero(self):
        with pytest.raises(ValueError, match="mgf\\(0\\)"):
            sm.CustomLaw(
                mgf_fn=lambda s: 2.0,
                domain_bound=1.0,
                moments=sm.MomentTable((1.0, 1.0, 2.0, 6.0, 24.0)),
                density_fn=lambda y: math.exp(-y),
                sampler=lambda n, rng: rng.random(n),
            )

    def test_wrapping_exponential_works(self):
        law = sm.CustomLaw(
            mgf_fn=lambda s: 1.0 / (1.0 - s),
            domain_bound=1.0,
            moments=sm.MomentTable.from_law(EXP, k_max=8),
            density_fn=lambda y: math.exp(-y),
            sampler=lambda n, rng: -np.log1p(-rng.random(n)),
            name="wrapped-exp",
        )
        assert law.mgf(0.5) == pytest.approx(2.0)
        assert law.raw_moment(4) == pytest.approx(24.0)
        assert law.density(0.5) == pytest.approx(math.exp(-0.5))


class TestMomentTable:
    def test_requires_unit_zeroth(self):
        with pytest.raises(ValueError, match="values\\[0\\]"):
            sm.MomentTable((2.0, 1.0, 2.0, 6.0, 24.0))

    def test_requires_k_max_4(self):
        with pytest.raises(ValueError, match="k_max"):
            sm.MomentTable((1.0, 1.0, 2.0))

    def test_rejects_non_log_convex(self):
        with pytest.raises(ValueError, match="log-convex"):
            sm.MomentTable((1.0, 1.0, 10.0, 11.0, 12.0))


class TestLawFromName:
    def test_round_trips(self):
        assert sm.law_from_name("exponential", {"rate": "2"}) == sm.Exponential(2.0)
        assert sm.law_from_name("gamma", {"shape": "2", "scale": "1"}) == GAMMA
        ig = sm.law_from_name(
            "inverse_gaussian",
            {"p1": str(1.0 / math.sqrt(2.0)), "p2": "1", "parameterization": "delta_gamma"},
        )
        assert ig.parameterization is sm.IGParameterization.DELTA_GAMMA

    def test_unknown_family(self):
        with pytest.raises(ValueError, match="unknown mixing law"):
            sm.law_from_name("cauchy", {})


class TestCircleMgf:
    def test_zero_scale(self):
        assert sm.circle_mgf(EXP, 0.0) == 1.0

    def test_bessel_identity(self):
        from scipy import special

        for a in (0.15, 0.5, 1.0):
            assert sm.circle_mgf(sm.Degenerate(1.0), a * a) == pytest.approx(
                special.i0(a), rel=1e-12
            )

    def test_gaussian_reduction(self):
        chi2 = sm.Gamma(1.0, 2.0)
        for a in (0.1, 0.4, 0.8):
            assert sm.circle_mgf(chi2, a * a) == pytest.approx(math.exp(a * a / 2), rel=1e-12)

    def test_brute_force_circle_integral(self):
        # (1/2pi) integral of exp(a cos t) dt over one full turn
        a = 0.37
        val, _ = integrate.quad(lambda t: math.exp(a * math.cos(t)), 0, 2 * math.pi)
        assert sm.circle_mgf(sm.Degenerate(1.0), a * a) == pytest.approx(
            val / (2 * math.pi), rel=1e-10
        )

    def test_divergence_detected(self):
        class Pathological:
            def raw_moment_ratio(self, k):
                return 1e4 * (k + 1) ** 2

            def raw_moment(self, k):
                return 1.0

        with pytest.raises(SeriesDivergenceError):
            sm.circle_mgf(Pathological(), 1.0)
