"""Lévy process families, characteristic exponents and stable domains of attraction.

Conventions: ``E exp(i lam xi_t) = exp(t Psi(lam))`` and the truncation in
the Lévy-Khintchine formula is ``1_{|x|<1}``.  The strictly stable exponent is

    Psi_alpha(lam) = -c |lam|^alpha (1 - i delta sgn(lam) tan(pi alpha / 2))

(with the extra ``log|lam|`` factor at ``alpha = 1``).  At ``alpha = 2`` the
parameter ``c`` is the Gaussian variance, ``Psi_2(lam) = -c lam^2 / 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, optimize, stats

from .errors import DomainError, PreconditionError, QuadratureError
from .measures import (Atom, Exponential, LawSide, LevyMeasure, NullSide, Pareto, PowerSide,
                       compound_poisson, law_from_config, stable_measure, tail_balance)
from .rng import block_map, make_rng

N_EXACT = 200  # expected jump count up to which compound sums are drawn jump by jump
N_BIG = 100  # expected count of individually drawn jumps in the truncated scheme


@dataclass(frozen=True)
class LevyTriplet:
    a: float = 0.0
    q2: float = 0.0
    pi: LevyMeasure = field(default_factory=LevyMeasure)

    def __post_init__(self):
        if self.q2 < 0:
            raise DomainError("q2 must be >= 0")


# --------------------------------------------------------------------------
# characteristic exponent by quadrature


X_SPLIT_MAX = 1e15  # keeps 1/lam finite for subnormal lam


def _density_part(side, lam: float, eps: float) -> complex:
    """``int_{(eps,inf)} (e^{i lam x} - 1 - i lam x 1_{x<1}) side(dx)``, lam > 0,
    density part only."""
    f = lambda x: float(side.density(x))  # noqa: E731
    X = min(max(1.0, 1.0 / lam), X_SPLIT_MAX)
    lo = eps
    kw = dict(epsabs=1e-14, epsrel=1e-10, limit=400)
    edges = sorted({lo, X, *([1.0] if lo < 1.0 < X else [])}
                   | set(np.geomspace(max(lo, 1e-12), X, 25).tolist()))
    edges = [e for e in edges if lo <= e <= X]
    if lo == 0.0:
        edges = [0.0] + edges
    re = im = 0.0
    err = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        if b <= a:
            continue
        r, e1 = integrate.quad(lambda x: -2.0 * math.sin(lam * x / 2) ** 2 * f(x), a, b, **kw)
        i, e2 = integrate.quad(lambda x: (math.sin(lam * x) - (lam * x if x < 1 else 0.0)) * f(x),
                               a, b, **kw)
        re += r
        im += i
        err += e1 + e2
    # oscillatory tail in u = lam x; QAWF can crash on an integrand that is 0 throughout
    rc = rs = e3 = e4 = 0.0
    if float(side.tail(X)) > 0:
        g = lambda u: f(u / lam) / lam  # noqa: E731
        rc, e3 = integrate.quad(g, lam * X, np.inf, weight="cos", wvar=1.0, limlst=200)
        rs, e4 = integrate.quad(g, lam * X, np.inf, weight="sin", wvar=1.0, limlst=200)
    re += rc - float(side.tail(X)) + sum(m for a, m in side.atoms if a > X)
    im += rs
    err += e3 + e4
    scale = max(1.0, abs(re), abs(im))
    if not math.isfinite(err) or err > 1e-5 * scale:
        raise QuadratureError(f"characteristic-exponent quadrature at lam={lam:g}", residual=err)
    return complex(re, im)


def _side_exponent(side, lam: float, eps: float) -> complex:
    if not math.isfinite(lam):
        raise DomainError("lam must be finite")
    if isinstance(side, NullSide) or lam == 0.0:
        return 0j
    if lam < 0:
        return _side_exponent(side, -lam, eps).conjugate()
    total = 0j
    for a, m in side.atoms:
        total += m * (np.exp(1j * lam * a) - 1.0 - 1j * lam * a * (a < 1.0))
    total += _density_part(side, lam, eps)
    if eps > 0:
        total += -0.5 * lam ** 2 * side.small_moment(2, eps) - 1j * lam ** 3 / 6 * side.small_moment(3, eps)
    return total


def char_exponent(t: LevyTriplet, lam: float) -> complex:
    """``Psi(lam)`` from a triplet, jump integral by quadrature."""
    lam = float(lam)
    plus = _side_exponent(t.pi.plus, lam, t.pi.eps)
    minus = _side_exponent(t.pi.minus, lam, t.pi.eps).conjugate()
    return 1j * t.a * lam - 0.5 * lam ** 2 * t.q2 + plus + minus


def stable_exponent(alpha: float, c: float, delta: float, lam):
    """The strictly stable exponent, vectorised in ``lam``."""
    _check_stable(alpha, c, delta)
    lam = np.asarray(lam, dtype=float)
    if alpha == 2:
        out = -c * lam ** 2 / 2 + 0j
    else:
        a = np.abs(lam) ** alpha
        s = np.sign(lam)
        if alpha == 1:
            with np.errstate(divide="ignore", invalid="ignore"):
                logl = np.where(lam == 0, 0.0, np.log(np.abs(lam)))
            # tan(pi/2) is infinite; delta = 0 drops the term
            skew = 0.0 if delta == 0 else delta * math.tan(math.pi * alpha / 2)
            out = -c * a * (1 - 1j * skew * s * logl)
        else:
            out = -c * a * (1 - 1j * delta * s * math.tan(math.pi * alpha / 2))
    return out[()] if out.ndim == 0 else out


def positivity_param(alpha: float, delta: float) -> float:
    """``rho = P(X_1 >= 0)`` of the strictly stable law."""
    if not (0 < alpha <= 2 and -1 <= delta <= 1):
        raise DomainError("need alpha in (0, 2] and delta in [-1, 1]")
    if alpha == 1:
        return 0.5 if delta == 0 else 0.5 + math.copysign(0.5, delta)
    return 0.5 + math.atan(delta * math.tan(alpha * math.pi / 2)) / (math.pi * alpha)


def _check_stable(alpha, c, delta):
    if not (0 < alpha <= 2):
        raise DomainError("alpha must lie in (0, 2]")
    if not c > 0:
        raise DomainError("c must be > 0")
    if not -1 <= delta <= 1:
        raise DomainError("delta must lie in [-1, 1]")


def stable_jump_constants(alpha: float, c: float, delta: float) -> tuple[float, float]:
    """Densities ``c_pm x^{-1-alpha}`` of the Lévy measure of ``Psi_alpha``."""
    if alpha == 1:
        if delta != 0:
            raise DomainError("alpha = 1 requires delta = 0 here")
        total = 2.0 * c / math.pi
    else:
        total = -c / (math.gamma(-alpha) * math.cos(math.pi * alpha / 2))
    return total * (1 + delta) / 2, total * (1 - delta) / 2


def stable_c_from_tails(alpha: float, tail_plus: float, tail_minus: float) -> tuple[float, float]:
    """``(c, delta)`` of the stable law whose Lévy measure has tails
    ``tail_pm x^{-alpha}``."""
    cp, cm = alpha * tail_plus, alpha * tail_minus
    if alpha == 1:
        return (cp + cm) * math.pi / 2, (cp - cm) / (cp + cm)
    c = -(cp + cm) * math.gamma(-alpha) * math.cos(math.pi * alpha / 2)
    return c, (cp - cm) / (cp + cm)


# --------------------------------------------------------------------------
# samplers


def cms(alpha: float, delta: float, rng, n) -> np.ndarray:
    """Chambers-Mallows-Stuck draws with exponent ``Psi_alpha`` at ``c = 1``."""
    if alpha == 2:
        return rng.standard_normal(n)
    V = rng.uniform(-math.pi / 2, math.pi / 2, n)
    if alpha == 1:
        if delta != 0:
            raise DomainError("alpha = 1, delta != 0 is not simulated")
        return np.tan(V)
    W = rng.exponential(1.0, n)
    t = delta * math.tan(math.pi * alpha / 2)
    B = math.atan(t) / alpha
    S = (1 + t * t) ** (1 / (2 * alpha))
    return (S * np.sin(alpha * (V + B)) / np.cos(V) ** (1 / alpha)
            * (np.cos(V - alpha * (V + B)) / W) ** ((1 - alpha) / alpha))


def _compound_sum(side, t: float, n: int, rng) -> np.ndarray:
    """Sum of the jumps of one side over time ``t``, ``n`` replicas."""
    if isinstance(side, NullSide):
        return np.zeros(n)
    mean_count = side.rate * t
    law = side.law
    if isinstance(law, Atom):
        return rng.poisson(mean_count, n) * law.value
    if isinstance(law, Exponential):
        k = rng.poisson(mean_count, n)
        out = np.zeros(n)
        pos = k > 0
        out[pos] = rng.gamma(k[pos], 1.0 / law.rate)
        return out
    if mean_count <= N_EXACT:
        k = rng.poisson(mean_count, n)
        jumps = law.sample(rng, int(k.sum()))
        return _segment_sums(jumps, k)
    # truncated scheme: jumps above the level K, exceeded N_BIG times on
    # average, are drawn exactly; the rest enter through mean and variance
    p = N_BIG / mean_count
    K = _law_quantile(law, p)
    k = rng.poisson(mean_count * float(law.sf(K)), n)
    big = law.sample_above(rng, int(k.sum()), K)
    m1 = law.partial_moment(1, K)
    m2 = law.partial_moment(2, K)
    small = rng.normal(mean_count * m1, math.sqrt(mean_count * m2), n)
    return small + _segment_sums(big, k)


def _segment_sums(values, counts):
    out = np.zeros(len(counts))
    if values.size:
        idx = np.repeat(np.arange(len(counts)), counts)
        np.add.at(out, idx, values)
    return out


def _law_quantile(law, p):
    if isinstance(law, Pareto):
        return law.scale * (p ** (-1.0 / law.alpha) - 1.0)
    hi = 1.0
    while float(law.sf(hi)) > p:
        hi *= 2.0
    return optimize.brentq(lambda x: float(law.sf(x)) - p, 0.0, hi, xtol=1e-12 * hi)


# --------------------------------------------------------------------------
# families


class ProcessFamily:
    """Base class; subclasses are immutable dataclasses."""

    exact_passage = False  # first passage computable exactly

    def triplet(self) -> LevyTriplet:
        raise NotImplementedError

    def char_exponent(self, lam):
        return char_exponent(self.triplet(), lam)

    def sample(self, t: float, n: int, rng) -> np.ndarray:
        """``n`` independent draws of ``xi_t``."""
        raise NotImplementedError

    def dual(self) -> "ProcessFamily":
        raise NotImplementedError

    @property
    def gaussian(self) -> bool:
        return self.triplet().q2 > 0


@dataclass(frozen=True)
class Stable(ProcessFamily):
    alpha: float
    c: float = 1.0
    delta: float = 0.0

    def __post_init__(self):
        _check_stable(self.alpha, self.c, self.delta)

    @property
    def rho(self):
        return positivity_param(self.alpha, self.delta)

    @property
    def simulable(self):
        return not (self.alpha == 1 and self.delta != 0)

    def triplet(self):
        if self.alpha == 2:
            return LevyTriplet(0.0, self.c)
        cp, cm = stable_jump_constants(self.alpha, self.c, self.delta)
        a = 0.0 if self.alpha == 1 else (cp - cm) / (1 - self.alpha)
        return LevyTriplet(a, 0.0, stable_measure(self.alpha, cp, cm))

    def char_exponent(self, lam):
        return stable_exponent(self.alpha, self.c, self.delta, lam)

    def scale(self, t):
        """Scale factor of ``xi_t`` relative to a unit-c, unit-time draw."""
        return (self.c * t) ** (1 / self.alpha) if self.alpha != 2 else math.sqrt(self.c * t)

    def sample(self, t, n, rng):
        if not self.simulable:
            raise DomainError("alpha = 1 with delta != 0 is excluded from simulation")
        return self.scale(t) * cms(self.alpha, self.delta, rng, n)

    def dual(self):
        return Stable(self.alpha, self.c, -self.delta)


@dataclass(frozen=True)
class BrownianDrift(ProcessFamily):
    mu: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        if self.sigma < 0:
            raise DomainError("sigma must be >= 0")

    @property
    def exact_passage(self):
        return self.sigma == 0

    def triplet(self):
        return LevyTriplet(self.mu, self.sigma ** 2)

    def char_exponent(self, lam):
        lam = np.asarray(lam, dtype=float)
        out = 1j * self.mu * lam - 0.5 * self.sigma ** 2 * lam ** 2
        return out[()] if out.ndim == 0 else out

    def sample(self, t, n, rng):
        return self.mu * t + self.sigma * math.sqrt(t) * rng.standard_normal(n)

    def dual(self):
        return BrownianDrift(-self.mu, self.sigma)


@dataclass(frozen=True)
class CompoundPoissonDrift(ProcessFamily):
    """``xi_t = drift * t + (sum of jumps)`` with a finite Lévy measure."""

    measure: LevyMeasure
    drift: float = 0.0
    exact_passage = True

    def __post_init__(self):
        if not self.measure.finite:
            raise DomainError("compound Poisson family needs a finite Lévy measure")

    @classmethod
    def of(cls, rate, up=None, down=None, p_up=1.0, drift=0.0):
        return cls(compound_poisson(rate, up, down, p_up), drift)

    @property
    def rate(self):
        return self.measure.big_rate

    def triplet(self):
        return LevyTriplet(self.drift + self.measure.compensator_drift(), 0.0, self.measure)

    def sample(self, t, n, rng):
        return (self.drift * t + _compound_sum(self.measure.plus, t, n, rng)
                - _compound_sum(self.measure.minus, t, n, rng))

    def dual(self):
        m = self.measure
        return CompoundPoissonDrift(LevyMeasure(m.minus, m.plus, m.eps), -self.drift)

    @property
    def mean(self):
        m = self.measure
        up = m.plus.rate * m.plus.law.mean if isinstance(m.plus, LawSide) else 0.0
        down = m.minus.rate * m.minus.law.mean if isinstance(m.minus, LawSide) else 0.0
        return self.drift + up - down


def pure_drift(mu: float) -> BrownianDrift:
    return BrownianDrift(mu, 0.0)


def family_from_config(cfg: dict) -> ProcessFamily:
    """``family`` is one of ``stable``, ``brownian``, ``compound_poisson``."""
    fam = cfg.get("family")
    g = lambda k, d=None: float(cfg[k]) if k in cfg else d  # noqa: E731
    if fam == "stable":
        return Stable(g("alpha"), g("c", 1.0), g("delta", 0.0))
    if fam == "brownian":
        return BrownianDrift(g("mu", 0.0), g("sigma", 1.0))
    if fam == "compound_poisson":
        up = {k[3:]: v for k, v in cfg.items() if k.startswith("up.")}
        down = {k[5:]: v for k, v in cfg.items() if k.startswith("down.")}
        return CompoundPoissonDrift.of(g("rate", 1.0), law_from_config(up) if up else None,
                                       law_from_config(down) if down else None,
                                       g("p_up", 1.0), g("drift", 0.0))
    raise DomainError(f"unknown process family {fam!r}")


# --------------------------------------------------------------------------
# scaling and domain of attraction


def _abs_quantile_block(n, rng, f, t):
    return np.abs(f.sample(t, n, rng))


def scaling_b(f: ProcessFamily, t: float, rng=None, n: int = 100_000, full: bool = False,
              workers: int = 1):
    """Norming ``b(t)``: ``t^{1/alpha}`` for stable families, otherwise the
    Monte Carlo ``r`` with ``P(|xi_t| > r) = 1/4``.

    With ``full=True`` returns ``(b, stderr)``.
    """
    if isinstance(f, Stable):
        b = t ** (1 / f.alpha)
        return (b, 0.0) if full else b
    rng = make_rng(rng)
    x = np.sort(np.concatenate(block_map(_abs_quantile_block, n, rng, f, t, workers=workers)))
    b = float(np.quantile(x, 0.75))
    # distribution-free standard error from the binomial spread of the rank
    h = math.sqrt(0.75 * 0.25 / n)
    lo, hi = np.quantile(x, [0.75 - h, 0.75 + h])
    se = float(hi - lo) / 2
    return (b, se) if full else b


@lru_cache(maxsize=64)
def stable_abs_quantile(alpha: float, delta: float, prob: float = 0.75) -> float:
    """``q`` with ``P(|X| <= q) = prob`` for ``X`` with exponent ``Psi_alpha`` at ``c = 1``."""
    if alpha == 1 and delta == 0:
        return math.tan(math.pi * prob / 2)
    if alpha == 2:
        return stats.norm.ppf(0.5 + prob / 2)
    dist = stats.levy_stable(alpha, delta)

    def excess(q):
        return float(dist.cdf(q) - dist.cdf(-q)) - prob

    hi = 1.0
    while excess(hi) < 0:
        hi *= 2
    return optimize.brentq(excess, 0.0, hi, xtol=1e-10)


def stable_c_for_quantile_norming(alpha: float, delta: float) -> float:
    """The ``c`` making ``P(|X| > 1) = 1/4`` -- the stable law matched to the
    quantile rule of :func:`scaling_b`."""
    q = stable_abs_quantile(alpha, delta)
    return q ** (-alpha) if alpha != 2 else q ** (-2)


@dataclass
class DALimitResult:
    max_deviation: float
    by_t: list  # max relative deviation at each t
    monotone: bool


def da_limit_check(f: ProcessFamily, target: tuple, lam_grid: Sequence[float],
                   t_grid: Sequence[float], b: Callable[[float], float]) -> DALimitResult:
    """``max |t Psi(lam / b(t)) - Psi_alpha(lam)| / |Psi_alpha(lam)|`` over the grids."""
    alpha, c, delta = target
    ref = {lam: complex(stable_exponent(alpha, c, delta, lam)) for lam in lam_grid}
    by_t = []
    for t in t_grid:
        bt = b(t)
        if not bt > 0:
            raise PreconditionError(f"b({t:g}) must be > 0")
        dev = 0.0
        for lam in lam_grid:
            val = t * complex(f.char_exponent(lam / bt))
            dev = max(dev, abs(val - ref[lam]) / abs(ref[lam]))
        by_t.append(dev)
    monotone = all(b_ <= a_ * (1 + 1e-9) + 1e-15 for a_, b_ in zip(by_t[:-1], by_t[1:]))
    return DALimitResult(max(by_t), by_t, monotone)


@dataclass
class TBResult:
    passed: bool
    index: float  # fitted RV index of Pi^+ + Pi^- at infinity
    p: float
    q: float
    delta: float  # p - q at the largest x


def tb_check(m: LevyMeasure, alpha: float, delta: float,
             x_grid: Sequence[float] = tuple(np.geomspace(1e4, 1e8, 17)), tol: float = 0.02) -> TBResult:
    """Tail-balance criterion: ``Pi^+ + Pi^-`` regularly varying with index
    ``-alpha`` and the balance ``(p, q)`` settling at ``p - q = delta``."""
    from .regvar import rv_index_fit

    total = lambda x: float(m.right_tail(x) + m.left_tail(x))  # noqa: E731
    fit = rv_index_fit(total, "at_infinity", x_grid)
    p, q = tail_balance(m, max(x_grid))
    ok = abs(fit.index + alpha) <= tol and abs((p - q) - delta) <= tol
    return TBResult(ok, fit.index, p, q, p - q)
