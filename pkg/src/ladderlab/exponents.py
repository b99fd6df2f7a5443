"""Laplace exponents of subordinators by three routes.

* the triplet formula ``phi(lam) = kappa + d lam + int (1 - e^{-lam y}) nu(dy)``;
* ratios ``phi(lam) / phi(lam')`` from the one-dimensional marginals of a
  Lévy process (the ``dt/t`` double integral for the ascending ladder height);
* the logarithmic renewal functions ``G1``, ``G2`` of a subordinator, their
  Mellin / Laplace transforms, and the recovery of the mean and the drift.

Marginals enter through :class:`MarginalLawProvider` objects exposing
``sf(t, x) = P(X_t > x)`` vectorised over ``t`` (and ``x``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate, interpolate, special, stats

from . import EULER_GAMMA
from .errors import DomainError, PreconditionError
from .measures import LevyMeasure, NullSide, PowerSide
from .models import stable_jump_constants
from .quad import DEFAULT, QuadratureSpec, gl_log_integral, panel_quad

# dt/t integrals decay only algebraically (Gaussian ratios like t^{-1/2}, G1 like t y^alpha)
WIDE = QuadratureSpec(t_lo=1e-14, t_hi=1e14, decay_tol=1e-5)


@dataclass(frozen=True)
class SubordinatorTriplet:
    kappa0: float = 0.0
    d: float = 0.0
    nu: LevyMeasure = field(default_factory=LevyMeasure)

    def __post_init__(self):
        if self.kappa0 < 0 or self.d < 0:
            raise DomainError("killing rate and drift must be >= 0")
        if not isinstance(self.nu.minus, NullSide):
            raise DomainError("a subordinator's Lévy measure lives on (0, inf)")
        side = self.nu.plus
        if isinstance(side, PowerSide) and side.alpha >= 1:
            raise DomainError("int min(1, y) nu(dy) diverges for alpha >= 1")


def phi_from_triplet(s: SubordinatorTriplet, lam: float, quad: QuadratureSpec = DEFAULT) -> float:
    if lam < 0:
        raise DomainError("lam must be >= 0")
    side = s.nu.plus
    eps = s.nu.eps
    val = s.kappa0 + s.d * lam
    if isinstance(side, NullSide) or lam == 0:
        return val
    val += sum(m * -math.expm1(-lam * a) for a, m in side.atoms)
    dens = lambda y: -math.expm1(-lam * y) * float(side.density(y))  # noqa: E731
    X = max(quad.x_max, 50.0 / lam)
    val += panel_quad(dens, eps, X, quad)[0]
    val += float(side.tail(X)) - sum(m for a, m in side.atoms if a > X)  # e^{-lam y} < e^{-50} beyond X
    if eps > 0:
        # below eps: 1 - e^{-lam y} = lam y - lam^2 y^2 / 2 + ...
        val += lam * side.small_moment(1, eps) - lam ** 2 / 2 * side.small_moment(2, eps)
    return val


# --------------------------------------------------------------------------
# marginal laws


class MarginalLawProvider:
    """``P(X_t > x)`` for a Lévy process or subordinator ``X``."""

    def sf(self, t, x):
        raise NotImplementedError

    def cdf(self, t, x):
        return 1.0 - self.sf(t, x)

    def breaks(self, x) -> list:
        """t-values where ``t -> P(X_t > x)`` is not smooth."""
        return []


@dataclass(frozen=True)
class DriftSubordinator(MarginalLawProvider):
    d: float = 1.0

    def sf(self, t, x):
        return np.where(self.d * np.asarray(t) > x, 1.0, 0.0)

    def breaks(self, x):
        return [x / self.d] if x > 0 else []

    def phi(self, lam):
        return self.d * lam


@dataclass(frozen=True)
class PoissonSubordinator(MarginalLawProvider):
    """``X_t = d t + N_t`` with ``N`` a Poisson process of the given rate (unit jumps)."""

    rate: float = 1.0
    d: float = 0.0

    def sf(self, t, x):
        t = np.asarray(t, dtype=float)
        k = np.floor(x - self.d * t)
        return np.where(k < 0, 1.0, stats.poisson.sf(np.maximum(k, 0), self.rate * t))

    def breaks(self, x):
        pts = []
        if self.d > 0 and x > 0:
            pts += [(x - k) / self.d for k in range(int(min(math.floor(x), 400)) + 1)]
        if self.rate > 0 and x > 1:
            # the count's law concentrates where rate t = x, width sqrt(x)
            t0 = x / (self.rate + self.d)
            w = 1.0 / math.sqrt(x)
            pts += [t0 * (1 + k * w) for k in range(-10, 11) if 1 + k * w > 0]
        return pts

    def phi(self, lam):
        return self.d * lam - self.rate * math.expm1(-lam)

    def kinks_G1(self, n=200):
        """y-values where ``G1`` is not smooth (pure jump case)."""
        return [1.0 / k for k in range(1, n + 1)] if self.d == 0 else []

    def kinks_G2(self, n=200):
        """Atoms of the measure ``G2`` (pure jump case)."""
        return [float(k) for k in range(1, n + 1)] if self.d == 0 else []


TABLE_EDGE = 10.0  # beyond this the tail series is used


def _zolotarev(alpha, delta):
    """``(rho, lam')`` with ``Psi_alpha = -lam' |u|^alpha exp(-i pi alpha (2 rho - 1) sgn(u) / 2)``."""
    th = 2.0 / (math.pi * alpha) * math.atan(delta * math.tan(math.pi * alpha / 2))
    return (1 + th) / 2, 1.0 / math.cos(math.pi * alpha * th / 2)


def stable_tail_series(alpha: float, delta: float, x, terms: int = 8):
    """``P(X > x)`` for large ``x > 0`` (``c = 1``) from the power series in ``x^{-alpha}``;
    convergent for ``alpha < 1``, asymptotic otherwise."""
    rho, lamp = _zolotarev(alpha, delta)
    k = np.arange(1, terms + 1)
    x = np.asarray(x, dtype=float)[..., None]
    t = ((-1.0) ** (k + 1) * special.gamma(k * alpha) / special.factorial(k)
         * np.sin(k * math.pi * alpha * rho) * lamp ** k * x ** (-k * alpha))
    return t.sum(-1) / math.pi


@lru_cache(maxsize=32)
def _stable_table(alpha: float, delta: float):
    """Monotone interpolant of ``P(X > x)`` on ``[-TABLE_EDGE, TABLE_EDGE]``."""
    pos = np.geomspace(1e-4, TABLE_EDGE, 301)
    xs = np.concatenate([-pos[::-1], [0.0], pos])
    dist = stats.levy_stable(alpha, delta)
    one_sided = alpha < 1 and delta == 1
    if one_sided:
        sf = np.where(xs <= 0, 1.0, dist.sf(np.maximum(xs, 1e-300)))
    else:
        sf = dist.sf(xs)
    sf = np.minimum.accumulate(np.clip(sf, 0.0, 1.0))
    if not one_sided:
        # scipy loses accuracy within ~1e-3 of the origin; use the expansion there
        f0 = float(dist.pdf(0.0))
        core = np.abs(xs) <= 1e-2
        sf[core] = sf[xs == 0.0][0] - f0 * xs[core]
    return interpolate.PchipInterpolator(xs, sf, extrapolate=False)


@dataclass(frozen=True)
class StableMarginal(MarginalLawProvider):
    """Strictly stable process with exponent ``Psi_alpha(alpha, c, delta)``.

    The symmetric Cauchy law is closed form; other laws are tabulated once from
    ``scipy.stats.levy_stable`` (same parameterisation, scale ``c^{1/alpha}``)
    with power tails beyond the table.
    """

    alpha: float
    c: float = 1.0
    delta: float = 0.0

    def sf(self, t, x):
        t = np.asarray(t, dtype=float)
        z = x / (self.c * t) ** (1 / self.alpha)
        return self.unit_sf(z)

    def unit_sf(self, z):
        z = np.asarray(z, dtype=float)
        if self.alpha == 1 and self.delta == 0:
            return 0.5 - np.arctan(z) / np.pi
        if self.alpha == 2:
            return stats.norm.sf(z, scale=math.sqrt(2.0))
        if self.alpha == 0.5 and self.delta == 1:
            # Lévy law with unit scale at c = 1
            with np.errstate(divide="ignore"):
                return np.where(z <= 0, 1.0, special.erf(np.sqrt(0.5 / np.maximum(z, 1e-300))))
        f = _stable_table(self.alpha, self.delta)
        E = TABLE_EDGE
        a = np.maximum(np.abs(z), E)
        out = f(np.clip(z, -E, E))
        out = np.where(z > E, stable_tail_series(self.alpha, self.delta, a), out)
        out = np.where(z < -E, 1.0 - stable_tail_series(self.alpha, -self.delta, a), out)
        return out

    @property
    def rho(self):
        from .models import positivity_param

        return positivity_param(self.alpha, self.delta)


def stable_subordinator(alpha: float) -> StableMarginal:
    """Stable subordinator with ``phi(lam) = lam^alpha`` (``0 < alpha < 1``)."""
    if not 0 < alpha < 1:
        raise DomainError("stable subordinator needs 0 < alpha < 1")
    return StableMarginal(alpha, math.cos(math.pi * alpha / 2), 1.0)


def stable_subordinator_triplet(alpha: float) -> SubordinatorTriplet:
    """Triplet of the subordinator with ``phi(lam) = lam^alpha``."""
    cp, _ = stable_jump_constants(alpha, math.cos(math.pi * alpha / 2), 1.0)
    return SubordinatorTriplet(0.0, 0.0, LevyMeasure(PowerSide(cp, alpha), NullSide(), 1e-8))


@dataclass(frozen=True)
class GaussianMarginal(MarginalLawProvider):
    sigma: float = 1.0
    mu: float = 0.0

    def sf(self, t, x):
        t = np.asarray(t, dtype=float)
        return stats.norm.sf((x - self.mu * t) / (self.sigma * np.sqrt(t)))


# --------------------------------------------------------------------------
# ratio of ladder-height exponents from marginals


_U_EDGES = np.concatenate([np.geomspace(1e-14, 1.0, 29), np.linspace(1.0, 60.0, 13)[1:]])


def _u_nodes(order=16):
    x, w = np.polynomial.legendre.leggauss(order)
    a, b = _U_EDGES[:-1], _U_EDGES[1:]
    u = (0.5 * (b - a))[:, None] * x[None, :] + (0.5 * (a + b))[:, None]
    wu = w[None, :] * (0.5 * (b - a))[:, None]
    return u.ravel(), wu.ravel()


def fristedt_phi_ratio(m: MarginalLawProvider, lam: float, lam_p: float,
                       quad: QuadratureSpec = WIDE) -> float:
    """``phi(lam) / phi(lam')`` for the ascending ladder height of ``m``'s process.

    ``log phi(lam) - log phi(lam') = int dt/t int_0^inf e^{-u} (P(X_t > u/lam) - P(X_t > u/lam')) du``.
    """
    if not (lam > 0 and lam_p > 0):
        raise DomainError("lam, lam' must be > 0")
    u, wu = _u_nodes()
    wu = wu * np.exp(-u)

    def inner(t):
        t = np.asarray(t, dtype=float)[:, None]
        diff = m.sf(t, u[None, :] / lam) - m.sf(t, u[None, :] / lam_p)
        return diff @ wu

    return math.exp(gl_log_integral(inner, quad, per_decade=2, order=16, rtol=1e-6))


# --------------------------------------------------------------------------
# logarithmic renewal functions


def frullani_G1(m: MarginalLawProvider, y: float, quad: QuadratureSpec = WIDE) -> float:
    """``G1(y) = int dt/t e^{-t} P(sigma_t > 1/y)``."""
    if not y > 0:
        raise DomainError("y must be > 0")
    x = 1.0 / y
    return gl_log_integral(lambda t: np.exp(-t) * m.sf(t, x), quad, points=m.breaks(x))


def harmonic_G2(m: MarginalLawProvider, x: float, quad: QuadratureSpec = WIDE) -> float:
    """``G2[0, x] = int dt/t (1 - e^{-t}) P(sigma_t <= x)``; the atom at 0 is included."""
    if x < 0:
        raise DomainError("x must be >= 0")
    return gl_log_integral(lambda t: -np.expm1(-t) * m.cdf(t, x), quad, points=m.breaks(x))


def _exp_average(g, scale_fn, e_lo, e_hi=60.0, order=16, rtol=1e-6, points=()):
    """``int_{e_lo}^{e_hi} e^{-e} g(scale_fn(e)) de`` by Gauss-Legendre in ``log e``;
    ``points`` are e-values where ``g`` is not smooth."""
    from .errors import QuadratureError

    base = np.concatenate([np.geomspace(e_lo, 1.0, max(2, int(2 * math.log10(1 / e_lo))) + 1),
                           np.geomspace(1.0, e_hi, 9)[1:]])
    extra = [p for p in points if e_lo < p < e_hi]
    edges = np.log(np.unique(np.concatenate([base, extra])))
    a, b = edges[:-1], edges[1:]
    vals = []
    for n in (order, order // 2 + 1):
        x, w = np.polynomial.legendre.leggauss(n)
        s = ((0.5 * (b - a))[:, None] * x[None, :] + (0.5 * (a + b))[:, None]).ravel()
        e = np.exp(s)
        gv = np.array([g(scale_fn(v)) for v in e])
        ww = (w[None, :] * (0.5 * (b - a))[:, None]).ravel()
        vals.append(float(np.sum(ww * e * np.exp(-e) * gv)))
    if abs(vals[0] - vals[1]) > rtol * max(1.0, abs(vals[0])):
        raise QuadratureError("exponential average did not converge", residual=abs(vals[0] - vals[1]))
    return vals[0]


def mellin_hat_G1(G1, theta: float, y_max: float = 1e9, points=()) -> float:
    """``int dx/x (theta/x) e^{-theta/x} G1(x)`` computed as ``E G1(theta / E)``, ``E ~ Exp(1)``.

    Arguments of ``G1`` are kept below ``Y = theta / e_lo <= y_max``; the piece
    ``e < e_lo`` is added as ``e_lo (G1(Y) + b)`` with ``b`` the local slope of
    ``G1`` against ``log y``.  ``points`` are y-values where ``G1`` kinks.
    """
    if not theta > 0:
        raise DomainError("theta must be > 0")
    e_lo = min(theta / y_max, 1e-3)
    Y = theta / e_lo
    g_hi = G1(Y)
    b = (g_hi - G1(Y / 2)) / math.log(2)
    body = _exp_average(G1, lambda e: theta / e, e_lo, points=[theta / y for y in points])
    return body + e_lo * (g_hi + b)


def laplace_G2(G2, theta: float, points=()) -> float:
    """Laplace transform of the measure ``G2(dx)`` (atom at 0 included):
    ``int e^{-theta x} G2(dx) = E G2[0, E / theta]``; ``points`` are atoms of ``G2``."""
    if not theta > 0:
        raise DomainError("theta must be > 0")
    return (_exp_average(G2, lambda e: e / theta, 1e-12, points=[theta * x for x in points])
            + G2(1e-12 / theta) * (-math.expm1(-1e-12)))


@dataclass
class LimitEstimate:
    value: float  # recovered mean / drift (inf or 0 for the divergence verdicts)
    limit: float  # R or R-tilde; +-inf on divergence
    converged: bool
    probes: list
    sequence: list


def _limit_along(seq, probes, tol):
    seq = np.asarray(seq, dtype=float)
    lp = np.log(np.asarray(probes, dtype=float))
    slope = np.polyfit(lp[-3:], seq[-3:], 1)[0]
    spread = float(np.ptp(seq[-3:]))
    return abs(slope) < tol and spread < 10 * tol, slope


def mean_from_G2(G2, probes=(1e2, 1e3, 1e4, 1e5), tol: float = 2e-3) -> LimitEstimate:
    """``E sigma_1 = exp(gamma + R)``, ``R = lim (log theta - G2(theta))``, ``gamma = +0.5772...``."""
    seq = [math.log(p) - G2(p) for p in probes]
    ok, slope = _limit_along(seq, probes, tol)
    if not ok:
        if slope <= 0:
            raise PreconditionError("log theta - G2(theta) decreases: Sinaï index at infinity exceeds 1")
        return LimitEstimate(math.inf, math.inf, False, list(probes), seq)
    return LimitEstimate(math.exp(EULER_GAMMA + seq[-1]), seq[-1], True, list(probes), seq)


def drift_from_G1(G1, probes=(1e2, 1e3, 1e4, 1e5), tol: float = 2e-3) -> LimitEstimate:
    """``d = exp(gamma + R~)``, ``R~ = lim (G1(theta) - log theta)``; zero-drift verdict on divergence."""
    seq = [G1(p) - math.log(p) for p in probes]
    ok, slope = _limit_along(seq, probes, tol)
    if not ok:
        if slope >= 0:
            raise PreconditionError("G1(theta) - log theta increases: Sinaï index at 0 exceeds 1")
        return LimitEstimate(0.0, -math.inf, False, list(probes), seq)
    return LimitEstimate(math.exp(EULER_GAMMA + seq[-1]), seq[-1], True, list(probes), seq)
