"""Generalized arc-sine laws and the joint limit law of undershoot and overshoot.

Convention (checked numerically against simulation and against the
``w``-marginal of :func:`pbeta_joint_pdf`): ``U(r)/r`` has density ``q_beta``,
so ``S_{T_r-}/r = 1 - U(r)/r`` has density ``q_beta(1 - y) = q_{1-beta}(y)`` and
mean ``beta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import DomainError, InsufficientDataError, PreconditionError
from .simulate import PassageRecords


def _interior_beta(beta):
    if not 0.0 < beta < 1.0:
        raise DomainError("beta must lie in (0, 1); use ArcSineLaw for the endpoints")


def qbeta_pdf(beta: float, y):
    """``sin(beta pi)/pi * y^-beta (1-y)^(beta-1)`` on ``(0, 1)``."""
    _interior_beta(beta)
    y = np.asarray(y, dtype=float)
    if np.any((y <= 0) | (y >= 1)):
        raise DomainError("y must lie in (0, 1)")
    out = math.sin(beta * math.pi) / math.pi * y ** -beta * (1 - y) ** (beta - 1)
    return out if out.ndim else float(out)


def qbeta_cdf(beta: float, y):
    _interior_beta(beta)
    return stats.beta(1 - beta, beta).cdf(y)


def pbeta_joint_pdf(beta: float, u, w):
    """Joint limit density of ``(U(r), O(r))/r``."""
    _interior_beta(beta)
    u, w = np.asarray(u, dtype=float), np.asarray(w, dtype=float)
    if np.any((u <= 0) | (u >= 1)) or np.any(w <= 0):
        raise DomainError("need 0 < u < 1 and w > 0")
    out = beta * math.sin(beta * math.pi) / math.pi * (1 - u) ** (beta - 1) * (u + w) ** (-1 - beta)
    return out if out.ndim else float(out)


def overshoot_limit_pdf(beta: float, x):
    """Limit density of ``O(r)/r``: ``sin(beta pi)/pi * x^-beta / (1 + x)``.

    This is the ``w``-marginal of :func:`pbeta_joint_pdf`, i.e. a beta-prime
    law with parameters ``(1 - beta, beta)``.
    """
    _interior_beta(beta)
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("x must be > 0")
    out = math.sin(beta * math.pi) / math.pi * x ** -beta / (1 + x)
    return out if out.ndim else float(out)


def overshoot_limit_cdf(beta: float, x):
    _interior_beta(beta)
    return stats.betaprime(1 - beta, beta).cdf(x)


@dataclass(frozen=True)
class ArcSineLaw:
    """Law with density ``q_beta``; unit mass at 1 for ``beta = 0`` and at 0 for ``beta = 1``."""

    beta: float

    def __post_init__(self):
        if not 0.0 <= self.beta <= 1.0:
            raise DomainError("beta must lie in [0, 1]")

    @property
    def degenerate(self):
        return self.beta in (0.0, 1.0)

    @property
    def atom(self):
        return 1.0 - self.beta if self.degenerate else None

    @property
    def mean(self):
        return 1.0 - self.beta

    def pdf(self, y):
        if self.degenerate:
            raise DomainError("degenerate law has no density")
        return qbeta_pdf(self.beta, y)

    def cdf(self, y):
        if self.degenerate:
            return np.where(np.asarray(y) >= self.atom, 1.0, 0.0)
        return qbeta_cdf(self.beta, y)

    def sample(self, rng, n):
        if self.degenerate:
            return np.full(n, self.atom)
        return rng.beta(1 - self.beta, self.beta, n)


def undershoot_law(beta: float) -> ArcSineLaw:
    """Limit law of ``U(r)/r``."""
    return ArcSineLaw(beta)


def prior_sup_law(beta: float) -> ArcSineLaw:
    """Limit law of ``S_{T_r-}/r``."""
    return ArcSineLaw(1.0 - beta)


@dataclass(frozen=True)
class JointLimitLaw:
    """Limit of ``(U(r), O(r))/r``; Dirac at ``(1, inf)`` or ``(0, 0)`` at the endpoints."""

    beta: float

    def __post_init__(self):
        if not 0.0 <= self.beta <= 1.0:
            raise DomainError("beta must lie in [0, 1]")

    @property
    def atom(self):
        return {0.0: (1.0, math.inf), 1.0: (0.0, 0.0)}.get(self.beta)

    def pdf(self, u, w):
        if self.atom is not None:
            raise DomainError("degenerate law has no density")
        return pbeta_joint_pdf(self.beta, u, w)

    def sample(self, rng, n):
        if self.atom is not None:
            return np.full(n, self.atom[0]), np.full(n, self.atom[1])
        # U ~ q_beta; given U = u, O/(u) + 1 is Pareto: P(O > w | u) = (u/(u+w))^beta
        u = rng.beta(1 - self.beta, self.beta, n)
        w = u * (rng.random(n) ** (-1 / self.beta) - 1)
        return u, w


@dataclass
class KSResult:
    statistic: float
    pvalue: float
    passed: bool
    n: int
    level: float


def ks_fit(samples, cdf, level: float = 0.01, min_samples: int = 100) -> KSResult:
    """One-sample Kolmogorov-Smirnov test, asymptotic p-value."""
    x = np.asarray(samples, dtype=float)
    if x.size < min_samples:
        raise InsufficientDataError(f"need >= {min_samples} samples, got {x.size}")
    res = stats.kstest(x, cdf, method="asymp")
    return KSResult(float(res.statistic), float(res.pvalue), bool(res.pvalue >= level), int(x.size),
                    level)


def mean_undershoot_check(records: PassageRecords, r: float | None = None) -> tuple[float, float]:
    """``mean(S_{T_r-}) / r`` with its standard error."""
    r = records.r if r is None else r
    if records.n_passed == 0:
        raise InsufficientDataError("no passed records")
    if records.n_not_passed:
        raise PreconditionError(f"{records.n_not_passed} records did not pass level r")
    s = records.prior_sup / r
    se = float(s.std(ddof=1) / math.sqrt(s.size)) if s.size > 1 else math.inf
    return float(s.mean()), se
