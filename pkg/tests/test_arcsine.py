import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, stats

from ladderlab.arcsine import (ArcSineLaw, JointLimitLaw, ks_fit, mean_undershoot_check, overshoot_limit_cdf,
                               overshoot_limit_pdf, pbeta_joint_pdf, prior_sup_law, qbeta_cdf, qbeta_pdf,
                               undershoot_law)
from ladderlab.errors import DomainError, InsufficientDataError, PreconditionError
from ladderlab.measures import Exponential, compound_poisson
from ladderlab.models import CompoundPoissonDrift, Stable, pure_drift
from ladderlab.simulate import first_passages

betas = st.floats(0.05, 0.95)


def test_qbeta_value():
    assert qbeta_pdf(0.5, 0.5) == pytest.approx(2 / math.pi, rel=1e-12)


def test_qbeta_singular_at_zero():
    y = np.array([1e-6, 1e-8])
    v = qbeta_pdf(0.5, y)
    assert v[1] / v[0] == pytest.approx(10.0, rel=1e-3)


def test_joint_value():
    assert pbeta_joint_pdf(0.5, 0.5, 0.5) == pytest.approx(math.sqrt(2) / (2 * math.pi), rel=1e-12)


def test_overshoot_value():
    # w-marginal of the joint density: sin(pi/2)/pi * 1 / 2
    assert overshoot_limit_pdf(0.5, 1.0) == pytest.approx(1 / (2 * math.pi), rel=1e-12)


@given(b=betas)
def test_qbeta_normalised(b):
    v = integrate.quad(lambda y: qbeta_pdf(b, y), 0, 1, limit=200)[0]
    assert v == pytest.approx(1.0, abs=1e-6)


@given(b=betas, w=st.floats(0.01, 50))
def test_overshoot_is_joint_marginal(b, w):
    m = integrate.quad(lambda u: pbeta_joint_pdf(b, u, w), 0, 1, limit=200)[0]
    assert overshoot_limit_pdf(b, w) == pytest.approx(m, rel=1e-5)


@given(b=betas, u=st.floats(0.01, 0.99))
def test_undershoot_is_joint_marginal(b, u):
    m = integrate.quad(lambda w: pbeta_joint_pdf(b, u, w), 0, np.inf, limit=200)[0]
    assert qbeta_pdf(b, u) == pytest.approx(m, rel=1e-5)


@given(b=betas, x=st.floats(0.01, 100))
def test_overshoot_cdf_matches_pdf(b, x):
    v = integrate.quad(lambda s: overshoot_limit_pdf(b, s), 0, x, limit=200)[0]
    assert overshoot_limit_cdf(b, x) == pytest.approx(v, abs=1e-6)


@given(b=betas, y=st.floats(0.01, 0.99))
def test_qbeta_cdf_matches_pdf(b, y):
    v = integrate.quad(lambda s: qbeta_pdf(b, s), 0, y, limit=200)[0]
    assert qbeta_cdf(b, y) == pytest.approx(v, abs=1e-6)


def test_overshoot_degenerates_as_beta_to_one():
    assert overshoot_limit_cdf(0.999, 0.01) > 0.99


def test_domain_errors():
    with pytest.raises(DomainError):
        qbeta_pdf(0.0, 0.5)
    with pytest.raises(DomainError):
        qbeta_pdf(0.5, 1.0)
    with pytest.raises(DomainError):
        overshoot_limit_pdf(0.5, -1.0)
    with pytest.raises(DomainError):
        pbeta_joint_pdf(0.5, 0.5, 0.0)
    with pytest.raises(DomainError):
        ArcSineLaw(1.5)


def test_degenerate_laws():
    assert ArcSineLaw(0.0).atom == 1.0 and ArcSineLaw(1.0).atom == 0.0
    assert JointLimitLaw(0.0).atom == (1.0, math.inf)
    assert JointLimitLaw(1.0).atom == (0.0, 0.0)
    assert ArcSineLaw(1.0).cdf(0.0) == 1.0
    with pytest.raises(DomainError):
        ArcSineLaw(0.0).pdf(0.5)


@given(b=st.floats(0.0, 1.0))
def test_prior_sup_mean_is_beta(b):
    assert prior_sup_law(b).mean == pytest.approx(b)
    assert undershoot_law(b).mean == pytest.approx(1 - b)


def test_joint_sampler():
    u, w = JointLimitLaw(0.3).sample(np.random.default_rng(1), 20_000)
    assert ks_fit(u, lambda y: qbeta_cdf(0.3, y)).passed
    assert ks_fit(w, lambda x: overshoot_limit_cdf(0.3, x)).passed


def test_ks_self_consistency():
    law = ArcSineLaw(0.4)
    assert ks_fit(law.sample(np.random.default_rng(2), 5000), law.cdf).passed


def test_ks_shifted_fails():
    law = ArcSineLaw(0.4)
    x = np.clip(law.sample(np.random.default_rng(3), 5000) + 0.1, 0, 1)
    assert not ks_fit(x, law.cdf).passed


def test_ks_constant_fails():
    assert not ks_fit(np.full(500, 0.5), ArcSineLaw(0.5).cdf).passed


def test_ks_too_few():
    with pytest.raises(InsufficientDataError):
        ks_fit(np.ones(10), stats.uniform.cdf)


def test_mean_undershoot_pure_drift():
    recs = first_passages(pure_drift(1.0), 5.0, 100, 0)
    assert mean_undershoot_check(recs) == (1.0, 0.0)


def test_mean_undershoot_cauchy():
    recs = first_passages(Stable(1.0), 1e3, 3000, np.random.default_rng(4), dt=1e-2)
    m, se = mean_undershoot_check(recs)
    assert m == pytest.approx(0.5, abs=0.03)


def test_mean_undershoot_rejects_unpassed():
    f = CompoundPoissonDrift(compound_poisson(1.0, Exponential(1.0)), drift=-0.5)
    recs = first_passages(f, 1.0, 200, 0, t_cap=1.0)
    assert 0 < recs.n_passed < 200
    with pytest.raises(PreconditionError):
        mean_undershoot_check(recs)
