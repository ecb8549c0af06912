import math

import numpy as np
import pytest

import spreadmix as sm
from spreadmix.errors import NoSolutionError

EXP = sm.Exponential(1.0)
GAMMA = sm.Gamma(2.0, 1.0)
IG = sm.InverseGaussian(1.0 / math.sqrt(2.0), 1.0)
CHI2 = sm.Gamma(1.0, 2.0)
KIND = sm.MgfKind


def mv_target(params, law, kind=KIND.TRUNCATED):
    return sm.proxy_moments_mean_variance(params, law, kind)


class TestRoundTrips:
    def test_mean_variance(self):
        params = sm.MeanVarianceProxy(a=0.2, b=0.05, c=0.1, d=0.5)
        target = mv_target(params, EXP)
        report = sm.match_mean_variance(target, EXP, KIND.TRUNCATED)
        assert report.residual_norm < 1e-10
        matched = sm.proxy_moments_mean_variance(report.params, EXP, KIND.TRUNCATED)
        np.testing.assert_allclose(matched.values, target.values, rtol=0, atol=1e-10)

    def test_variance(self):
        params = sm.VarianceProxy(a=0.25, b=0.1, c=0.3)
        target = sm.proxy_moments_variance(params, GAMMA, KIND.TRUNCATED)
        report = sm.match_variance(target, GAMMA, KIND.TRUNCATED)
        assert report.residual_norm < 1e-10
        matched = sm.proxy_moments_variance(report.params, GAMMA, KIND.TRUNCATED)
        np.testing.assert_allclose(matched.values, target.values, rtol=0, atol=1e-10)

    def test_elliptical(self):
        params = sm.EllipticalProxy(a=0.3, b=0.1, c=0.2)
        target = sm.proxy_moments_elliptical(params, CHI2)
        report = sm.match_elliptical(target, CHI2)
        assert report.residual_norm < 1e-10
        matched = sm.proxy_moments_elliptical(report.params, CHI2)
        np.testing.assert_allclose(matched.values, target.values, rtol=0, atol=1e-10)

    def test_exact_kind_round_trip(self):
        params = sm.MeanVarianceProxy(a=0.15, b=0.02, c=-0.2, d=0.1)
        target = mv_target(params, IG, KIND.EXACT)
        report = sm.match_mean_variance(target, IG, KIND.EXACT)
        assert report.residual_norm < 1e-10


class TestDegenerateTarget:
    def test_zero_moments(self):
        target = sm.MomentSet((0.0, 0.0, 0.0, 0.0), sm.MomentMode.MEAN_VARIANCE, KIND.TRUNCATED)
        report = sm.match_mean_variance(target, EXP, KIND.TRUNCATED)
        assert report.residual_norm < 1e-10


class TestContracts:
    def test_mode_is_checked(self):
        target = sm.proxy_moments_variance(sm.VarianceProxy(0.2, 0.0, 0.0), EXP, KIND.TRUNCATED)
        with pytest.raises(ValueError, match="mean-variance"):
            sm.match_mean_variance(target, EXP, KIND.TRUNCATED)

    def test_impossible_variance_rejected(self):
        # M2 < M1^2 cannot come from any random variable
        with pytest.raises(ValueError, match="negative variance"):
            sm.MomentSet((2.0, 1.0, 1.0), sm.MomentMode.VARIANCE, KIND.EXACT)

    def test_no_solution_for_negative_skew(self):
        # the proxy family has strictly positive central skew
        target = sm.MomentSet((0.0, 0.04, -0.01), sm.MomentMode.VARIANCE, KIND.TRUNCATED)
        with pytest.raises(NoSolutionError):
            sm.match_variance(target, EXP, KIND.TRUNCATED)

    def test_positive_scale_and_shift_constraints(self):
        params = sm.MeanVarianceProxy(a=0.3, b=-0.1, c=0.2, d=-0.4)
        report = sm.match_mean_variance(mv_target(params, GAMMA), GAMMA, KIND.TRUNCATED)
        assert report.params.a > 0.0
        assert math.isfinite(report.params.c)

    def test_exact_kind_respects_domain_margin(self):
        params = sm.MeanVarianceProxy(a=0.3, b=0.05, c=0.1, d=0.2)
        target = mv_target(params, EXP, KIND.EXACT)
        report = sm.match_mean_variance(target, EXP, KIND.EXACT)
        p = report.params
        margin = EXP.mgf_domain_bound * (1.0 - 1e-6)
        for n in (1, 2, 3, 4):
            assert 0.5 * n * n * p.a**2 + n * p.b <= margin


class TestReportInvariants:
    def test_residual_recomputable_from_proxy_moments(self):
        params = sm.MeanVarianceProxy(a=0.22, b=0.03, c=0.15, d=0.4)
        target = mv_target(params, EXP)
        report = sm.match_mean_variance(target, EXP, KIND.TRUNCATED)
        p = report.params
        matched = sm.proxy_moments_mean_variance(p, EXP, KIND.TRUNCATED)
        # E[(W - d)^n] and E[(S - d)^n] via the binomial expansions
        residuals = []
        for n in (1, 2, 3, 4):
            lhs = sum(
                math.comb(n, j) * (-p.d) ** j * (matched.values[n - j - 1] if n - j > 0 else 1.0)
                for j in range(n + 1)
            )
            rhs = sum(
                math.comb(n, j) * (-p.d) ** j * (target.values[n - j - 1] if n - j > 0 else 1.0)
                for j in range(n + 1)
            )
            residuals.append(lhs - rhs)
        recomputed = float(np.linalg.norm(residuals))
        assert recomputed == pytest.approx(report.residual_norm, abs=1e-14)

    def test_reduced_residuals_helper_agrees(self):
        params = sm.VarianceProxy(a=0.25, b=0.1, c=0.3)
        target = sm.proxy_moments_variance(params, GAMMA, KIND.TRUNCATED)
        report = sm.match_variance(target, GAMMA, KIND.TRUNCATED)
        vec = sm.reduced_residuals(report.params, target, GAMMA, KIND.TRUNCATED)
        assert float(np.linalg.norm(vec)) == pytest.approx(report.residual_norm, abs=1e-14)

    def test_determinism(self):
        params = sm.MeanVarianceProxy(a=0.2, b=0.05, c=0.1, d=0.5)
        target = mv_target(params, EXP)
        first = sm.match_mean_variance(target, EXP, KIND.TRUNCATED)
        second = sm.match_mean_variance(target, EXP, KIND.TRUNCATED)
        assert first.params == second.params
        assert first.residual_norm == second.residual_norm
        assert first.starts_tried == second.starts_tried

    def test_report_fields(self):
        params = sm.EllipticalProxy(a=0.3, b=0.1, c=0.2)
        target = sm.proxy_moments_elliptical(params, CHI2)
        report = sm.match_elliptical(target, CHI2)
        assert report.starts_tried > 0
        assert report.iterations > 0
        assert report.mgf_kind is KIND.EXACT


class TestRandomizedRoundTrips:
    @pytest.mark.parametrize("law", [EXP, GAMMA, IG], ids=["exp", "gamma", "ig"])
    def test_mean_variance_sample(self, law):
        rng = np.random.Generator(np.random.Philox(5))
        for _ in range(5):
            params = sm.MeanVarianceProxy(
                a=rng.uniform(0.05, 0.3), b=rng.uniform(-0.1, 0.08),
                c=rng.uniform(-0.5, 0.5), d=rng.uniform(-1.0, 1.0),
            )
            target = mv_target(params, law)
            report = sm.match_mean_variance(target, law, KIND.TRUNCATED)
            assert report.residual_norm < 1e-10
