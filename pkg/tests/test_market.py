import math

import numpy as np
import pytest
from scipy import integrate

import spreadmix as sm
from spreadmix.errors import MgfDomainError

EXP = sm.Exponential(1.0)
GAMMA = sm.Gamma(2.0, 1.0)
IG = sm.InverseGaussian(1.0 / math.sqrt(2.0), 1.0)


def benchmark_spec(law, s1=5.0, s2=1.0, r=0.0, beta=0.1):
    return sm.ModelSpec(
        s1_0=s1, s2_0=s2, law=law, r=r, beta1=beta, beta2=beta,
        a11=0.15, a12=0.05, a21=0.05, a22=0.15,
    )


class TestMartingaleDrift:
    def test_exponential_closed_form(self):
        # -ln phi(0.1 + 0.025/2) = ln(1 - 0.1125) for the unit exponential
        omega = sm.martingale_drift(EXP, 0.0, 0.1, 0.025)
        assert omega == pytest.approx(math.log(1.0 - 0.1125), abs=1e-12)

    def test_zero_exposure(self):
        for law in (EXP, GAMMA, IG):
            assert sm.martingale_drift(law, 0.0, 0.0, 0.0) == 0.0

    def test_domain_violation(self):
        with pytest.raises(MgfDomainError) as err:
            sm.martingale_drift(EXP, 0.0, 1.0, 0.1)
        assert err.value.bound == 1.0
        assert err.value.offenders[0][1] == pytest.approx(1.05)

    def test_delta_shifts_linearly(self):
        base = sm.martingale_drift(EXP, 0.0, 0.1, 0.025)
        assert sm.martingale_drift(EXP, 0.3, 0.1, 0.025) == pytest.approx(base - 0.3, abs=1e-14)


class TestBuildEffective:
    def test_benchmark_levels(self):
        model = sm.build_effective(benchmark_spec(EXP))
        assert model.mu1 == pytest.approx(math.log(5.0) + math.log(0.8875), abs=1e-12)
        assert model.mu2 == pytest.approx(math.log(0.8875), abs=1e-12)

    def test_martingale_by_quadrature(self):
        # E[exp(X_i)] = e^r S_i(0), integrating e^{(beta + sigma^2/2) y} f(y)
        for law in (EXP, GAMMA, IG):
            for r in (0.0, 0.05):
                spec = benchmark_spec(law, r=r)
                model = sm.build_effective(spec)
                for mu, beta, ssq, s0 in (
                    (model.mu1, spec.beta1, spec.sigma1_sq, spec.s1_0),
                    (model.mu2, spec.beta2, spec.sigma2_sq, spec.s2_0),
                ):
                    t = beta + ssq / 2.0
                    val, _ = integrate.quad(
                        lambda y: math.exp(min(t * y, 700.0)) * law.density(y), 0, np.inf
                    )
                    assert math.exp(mu) * val == pytest.approx(
                        math.exp(r) * s0, rel=1e-10
                    )

    def test_rate_factor(self):
        spec = benchmark_spec(GAMMA, r=0.05)
        model = sm.build_effective(spec)
        forward = math.exp(model.mu1) * GAMMA.mgf(spec.beta1 + spec.sigma1_sq / 2.0)
        assert forward / spec.s1_0 == pytest.approx(math.exp(0.05), abs=1e-8)

    def test_scale_consistency(self):
        base = sm.build_effective(benchmark_spec(EXP))
        scaled = sm.build_effective(benchmark_spec(EXP, s1=15.0))
        assert scaled.mu1 - base.mu1 == pytest.approx(math.log(3.0), abs=1e-12)
        assert scaled.mu2 == base.mu2

    def test_symmetry(self):
        model = sm.build_effective(benchmark_spec(IG, s1=2.0, s2=2.0))
        assert model.mu1 == model.mu2

    def test_propagates_domain_error(self):
        spec = sm.ModelSpec(s1_0=1, s2_0=1, law=EXP, beta1=1.0, beta2=0.0,
                            a11=0.3, a12=0.0, a21=0.0, a22=0.3)
        with pytest.raises(MgfDomainError):
            sm.build_effective(spec)


class TestElliptical:
    CHI2 = sm.Gamma(1.0, 2.0)

    def spec(self, **kw):
        kw.setdefault("law", self.CHI2)
        return sm.ModelSpec(
            s1_0=5.0, s2_0=1.0, r=kw.pop("r", 0.0), elliptical=True,
            a11=0.15, a12=0.05, a21=0.05, a22=0.15, **kw,
        )

    def test_gaussian_reduction_drift(self):
        # with the chi-square(2) mixer the correction equals -sigma^2/2
        model = sm.build_effective(self.spec())
        ssq = 0.15**2 + 0.05**2
        assert model.mu1 == pytest.approx(math.log(5.0) - ssq / 2.0, abs=1e-10)

    def test_martingale_elliptical(self):
        model = sm.build_effective(self.spec(r=0.03))
        ssq = 0.15**2 + 0.05**2
        forward = math.exp(model.mu1) * sm.circle_mgf(self.CHI2, ssq)
        assert forward == pytest.approx(math.exp(0.03) * 5.0, rel=1e-10)

    def test_raw_mu_override(self):
        model = sm.build_effective(self.spec(mu1_raw=-0.1, mu2_raw=0.2))
        assert model.mu1 == pytest.approx(math.log(5.0) - 0.1, abs=1e-14)
        assert model.mu2 == pytest.approx(0.2, abs=1e-14)

    def test_beta_rejected(self):
        with pytest.raises(ValueError, match="elliptical"):
            sm.ModelSpec(s1_0=1, s2_0=1, law=self.CHI2, elliptical=True,
                         beta1=0.1, a11=0.1, a12=0.0, a21=0.0, a22=0.1)

    def test_override_requires_elliptical(self):
        with pytest.raises(ValueError, match="elliptical"):
            sm.ModelSpec(s1_0=1, s2_0=1, law=EXP, mu1_raw=0.1,
                         a11=0.1, a12=0.0, a21=0.0, a22=0.1)


class TestValidation:
    def test_positive_prices(self):
        with pytest.raises(ValueError, match="s1_0"):
            sm.ModelSpec(s1_0=-5, s2_0=1, law=EXP, a11=0.1, a12=0, a21=0, a22=0.1)

    def test_nonzero_rows(self):
        with pytest.raises(ValueError, match="row 1"):
            sm.ModelSpec(s1_0=1, s2_0=1, law=EXP, a11=0, a12=0, a21=0, a22=0.1)

    def test_contract(self):
        with pytest.raises(ValueError, match="strike"):
            sm.SpreadContract(strike=-1.0)
        with pytest.raises(ValueError, match="maturity"):
            sm.SpreadContract(strike=1.0, maturity=0.0)
        assert sm.SpreadContract(strike=0.0).maturity == 1.0
