"""Lévy measures on the line: tails, integrated tails, jump samplers.

A :class:`LevyMeasure` is assembled from two one-sided parts (positive jumps
and magnitudes of negative jumps).  Two kinds of side are shipped:

* :class:`LawSide` -- finite mass ``rate`` times a jump law (compound Poisson);
* :class:`PowerSide` -- the stable density ``c x^{-1-alpha}`` (infinite mass),
  sampled only above a cutoff ``eps``; the jumps below it are replaced by
  their compensator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .errors import DivergentIntegralError, DomainError, ZeroTailError
from .quad import DEFAULT, QuadratureSpec, panel_quad


# --------------------------------------------------------------------------
# jump laws (probability laws of jump magnitudes on (0, inf))


class JumpLaw:
    """Law of a positive jump magnitude."""

    atoms: tuple = ()

    def sf(self, x):
        raise NotImplementedError

    def pdf(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def sample(self, rng, n):
        raise NotImplementedError

    def sample_above(self, rng, n, k):
        """Draws from the law conditioned on ``J > k``."""
        raise NotImplementedError

    @property
    def mean(self) -> float:
        raise NotImplementedError

    def partial_moment(self, k: int, upper: float) -> float:
        """``E[J^k ; J <= upper]``."""
        total = sum(m * a ** k for a, m in self.atoms if a <= upper)
        if upper > 0:
            f = lambda x: x ** k * float(self.pdf(x))  # noqa: E731
            total += panel_quad(f, 0.0, upper)[0]
        return total

    def laplace(self, th: float) -> float:
        """``E exp(-th J)``."""
        total = sum(m * math.exp(-th * a) for a, m in self.atoms)
        f = lambda x: math.exp(-th * x) * float(self.pdf(x))  # noqa: E731
        return total + integrate.quad(f, 0.0, np.inf, limit=200)[0]


@dataclass(frozen=True)
class Exponential(JumpLaw):
    rate: float = 1.0

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x < 0, 1.0, np.exp(-self.rate * np.maximum(x, 0.0)))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x < 0, 0.0, self.rate * np.exp(-self.rate * np.maximum(x, 0.0)))

    def sample(self, rng, n):
        return rng.exponential(1.0 / self.rate, size=n)

    def sample_above(self, rng, n, k):
        return k + rng.exponential(1.0 / self.rate, size=n)

    @property
    def mean(self):
        return 1.0 / self.rate

    def partial_moment(self, k, upper):
        return float(integrate.quad(lambda x: x ** k * self.rate * math.exp(-self.rate * x),
                                    0.0, upper, epsabs=1e-13, epsrel=1e-11)[0])

    def laplace(self, th):
        return self.rate / (self.rate + th)


@dataclass(frozen=True)
class Pareto(JumpLaw):
    """Shifted (Lomax) Pareto law: ``P(J > x) = (1 + x/scale)^(-alpha)``."""

    alpha: float = 1.5
    scale: float = 1.0

    def __post_init__(self):
        if self.alpha <= 0 or self.scale <= 0:
            raise DomainError("Pareto needs alpha > 0 and scale > 0")

    def sf(self, x):
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        return (1.0 + x / self.scale) ** (-self.alpha)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        d = self.alpha / self.scale * (1.0 + np.maximum(x, 0.0) / self.scale) ** (-self.alpha - 1)
        return np.where(x < 0, 0.0, d)

    def sample(self, rng, n):
        u = rng.random(n)
        return self.scale * ((1.0 - u) ** (-1.0 / self.alpha) - 1.0)

    def sample_above(self, rng, n, k):
        u = rng.random(n)
        return self.scale * ((1.0 + k / self.scale) * (1.0 - u) ** (-1.0 / self.alpha) - 1.0)

    @property
    def mean(self):
        return self.scale / (self.alpha - 1.0) if self.alpha > 1 else math.inf

    def partial_moment(self, k, upper):
        # in y = 1 + x/s the integrand is a finite sum of powers of y
        a, s = self.alpha, self.scale
        Y = 1.0 + upper / s
        total = 0.0
        for j in range(k + 1):
            e = j - a - 1.0  # exponent of y in C(k,j) y^j (-1)^(k-j) * a y^(-a-1)
            coef = math.comb(k, j) * (-1.0) ** (k - j) * a
            total += coef * (math.log(Y) if abs(e + 1) < 1e-14 else (Y ** (e + 1) - 1.0) / (e + 1))
        return s ** k * total


@dataclass(frozen=True)
class Atom(JumpLaw):
    value: float = 1.0

    @property
    def atoms(self):
        return ((self.value, 1.0),)

    def sf(self, x):
        return np.where(np.asarray(x, dtype=float) < self.value, 1.0, 0.0)

    def sample(self, rng, n):
        return np.full(n, self.value)

    def sample_above(self, rng, n, k):
        return np.full(n, self.value)

    @property
    def mean(self):
        return self.value

    def partial_moment(self, k, upper):
        return self.value ** k if self.value <= upper else 0.0


LAWS = {"exponential": Exponential, "pareto": Pareto, "atom": Atom}


def law_from_config(spec: dict) -> JumpLaw:
    spec = dict(spec)
    name = spec.pop("law")
    try:
        cls = LAWS[name]
    except KeyError:
        raise DomainError(f"unknown jump law {name!r}") from None
    return cls(**{k: float(v) for k, v in spec.items()})


# --------------------------------------------------------------------------
# one-sided parts of a Lévy measure


class Side:
    finite = True

    def tail(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def density(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    atoms: tuple = ()

    def small_moment(self, k: int, eps: float) -> float:
        """``int_{(0, eps]} x^k nu(dx)``; zero for finite sides (eps = 0)."""
        return 0.0

    def sample_big(self, rng, n, eps):
        return np.zeros(n)


@dataclass(frozen=True)
class NullSide(Side):
    pass


@dataclass(frozen=True)
class LawSide(Side):
    rate: float
    law: JumpLaw

    def tail(self, x):
        return self.rate * self.law.sf(x)

    def density(self, x):
        return self.rate * self.law.pdf(x)

    @property
    def atoms(self):
        return tuple((a, self.rate * m) for a, m in self.law.atoms)

    def sample_big(self, rng, n, eps):
        return self.law.sample(rng, n)


@dataclass(frozen=True)
class PowerSide(Side):
    """Density ``c x^{-1-alpha}`` on ``(0, inf)``."""

    c: float
    alpha: float
    finite = False

    def tail(self, x):
        x = np.asarray(x, dtype=float)
        return self.c / self.alpha * x ** (-self.alpha)

    def density(self, x):
        x = np.asarray(x, dtype=float)
        return self.c * x ** (-1.0 - self.alpha)

    def small_moment(self, k, eps):
        if k <= self.alpha:
            return math.inf
        return self.c * eps ** (k - self.alpha) / (k - self.alpha)

    def sample_big(self, rng, n, eps):
        return eps * (1.0 - rng.random(n)) ** (-1.0 / self.alpha)


# --------------------------------------------------------------------------


@dataclass(frozen=True)
class LevyMeasure:
    plus: Side = field(default_factory=NullSide)
    minus: Side = field(default_factory=NullSide)
    eps: float = 0.0  # small-jump cutoff; 0 for finite measures

    def right_tail(self, x):
        return self.plus.tail(x)

    def left_tail(self, x):
        return self.minus.tail(x)

    @property
    def finite(self) -> bool:
        return self.plus.finite and self.minus.finite

    @property
    def big_rate(self) -> float:
        """Mass of ``{|x| > eps}``."""
        return self._side_rate(self.plus) + self._side_rate(self.minus)

    def _side_rate(self, side):
        if isinstance(side, NullSide):
            return 0.0
        if isinstance(side, LawSide):
            return side.rate
        return float(side.tail(self.eps))

    @property
    def p_up(self) -> float:
        r = self.big_rate
        return self._side_rate(self.plus) / r if r > 0 else 0.0

    def sample_jumps(self, rng, n):
        """``n`` i.i.d. jumps from the normalised law of jumps with ``|x| > eps``."""
        up = rng.random(n) < self.p_up
        out = np.empty(n)
        k = int(up.sum())
        out[up] = self.plus.sample_big(rng, k, self.eps)
        out[~up] = -self.minus.sample_big(rng, n - k, self.eps)
        return out

    def compensator_drift(self) -> float:
        """``int_{eps<|x|<1} x Pi(dx)``: the drift removed when big jumps are
        sampled raw under the ``1_{|x|<1}`` truncation."""
        if self.finite:
            total = 0.0
            for side, sgn in ((self.plus, 1.0), (self.minus, -1.0)):
                if isinstance(side, LawSide):
                    total += sgn * side.rate * side.law.partial_moment(1, 1.0 - 1e-15)
            return total
        total = 0.0
        for side, sgn in ((self.plus, 1.0), (self.minus, -1.0)):
            if isinstance(side, PowerSide) and self.eps < 1:
                a = side.alpha
                val = (math.log(1 / self.eps) if a == 1 else (1 - self.eps ** (1 - a)) / (1 - a))
                total += sgn * side.c * val
        return total


def compound_poisson(rate: float, up: JumpLaw | None, down: JumpLaw | None = None,
                     p_up: float = 1.0) -> LevyMeasure:
    if rate < 0 or not 0 <= p_up <= 1:
        raise DomainError("need rate >= 0 and p_up in [0, 1]")
    plus = LawSide(rate * p_up, up) if (up is not None and p_up > 0 and rate > 0) else NullSide()
    minus = (LawSide(rate * (1 - p_up), down or up)
             if (p_up < 1 and rate > 0 and (down or up) is not None) else NullSide())
    return LevyMeasure(plus, minus, 0.0)


def stable_measure(alpha: float, c_plus: float, c_minus: float, eps: float = 1e-4) -> LevyMeasure:
    if not 0 < alpha < 2:
        raise DomainError("stable Lévy measure needs 0 < alpha < 2")
    plus = PowerSide(c_plus, alpha) if c_plus > 0 else NullSide()
    minus = PowerSide(c_minus, alpha) if c_minus > 0 else NullSide()
    return LevyMeasure(plus, minus, eps)


# --------------------------------------------------------------------------
# operations


def _tail_fn(m) -> Callable[[float], float]:
    if isinstance(m, LevyMeasure):
        return lambda z: float(m.right_tail(z))
    return lambda z: float(m(z))


def integrated_tail(m, x: float, quad: QuadratureSpec = DEFAULT) -> float:
    """``int_x^inf tail(z) dz`` for a measure (right tail) or a tail function.

    Explicit quadrature runs to ``X = max(quad.x_max, 100 x)``; beyond it the
    tail is treated as regularly varying with the local index read off on
    ``[X, 2X]``.  Raises :class:`DivergentIntegralError` if that index is
    ``>= -1``.
    """
    if x < 0:
        raise DomainError("x must be >= 0")
    tail = _tail_fn(m)
    X = max(quad.x_max, 100.0 * x)
    body = panel_quad(tail, x, X, quad)[0]
    tX, t2X = tail(X), tail(2 * X)
    if tX <= 0.0:
        return body
    if t2X <= 0.0:
        return body  # decays faster than any power
    index = math.log(t2X / tX) / math.log(2.0)
    if index >= -1.0 - 1e-3:
        raise DivergentIntegralError(
            f"tail has local index {index:.3f} >= -1 at x={X:g}: not integrable")
    return body + X * tX / (-index - 1.0)


@dataclass
class LongTailResult:
    passed: bool
    max_deviation: float  # at the largest probe
    deviations: list  # per probe, max over shifts
    monotone: bool  # deviations nonincreasing along probes
    probes: tuple
    shifts: tuple
    tol: float

    def __bool__(self):
        return self.passed


def long_tailed_test(tail: Callable, probes: Sequence[float] = (1e3, 1e4, 1e5, 1e6),
                     shifts: Sequence[float] = (1.0, 5.0, 10.0), tol: float = 0.02) -> LongTailResult:
    probes = tuple(sorted(float(p) for p in probes))
    shifts = tuple(float(t) for t in shifts)
    devs = []
    for x in probes:
        base = float(tail(x))
        if not base > 0 or not math.isfinite(base):
            raise ZeroTailError(f"tail vanishes or is infinite at x={x:g}")
        devs.append(max(abs(float(tail(x + t)) / base - 1.0) for t in shifts))
    monotone = all(b <= a + 1e-15 for a, b in zip(devs[:-1], devs[1:]))
    return LongTailResult(devs[-1] <= tol, devs[-1], devs, monotone, probes, shifts, tol)


def tail_balance(m: LevyMeasure, x: float) -> tuple[float, float]:
    up = float(m.right_tail(x))
    down = float(m.left_tail(x))
    total = up + down
    if not total > 0:
        raise ZeroTailError(f"Pi^+ + Pi^- vanishes at x={x:g}")
    p = up / total
    return p, 1.0 - p


def measure_from_config(cfg: dict) -> LevyMeasure:
    """Build a measure from flat keys.

    ``family = compound_poisson`` with ``rate``, ``p_up`` and ``up.*`` /
    ``down.*`` law keys, or ``family = stable`` with ``alpha``, ``c_plus``,
    ``c_minus`` and optional ``eps``.
    """
    fam = cfg.get("family")
    if fam == "compound_poisson":
        up = {k[3:]: v for k, v in cfg.items() if k.startswith("up.")}
        down = {k[5:]: v for k, v in cfg.items() if k.startswith("down.")}
        return compound_poisson(float(cfg.get("rate", 1.0)),
                                law_from_config(up) if up else None,
                                law_from_config(down) if down else None,
                                float(cfg.get("p_up", 1.0)))
    if fam == "stable":
        return stable_measure(float(cfg["alpha"]), float(cfg["c_plus"]), float(cfg["c_minus"]),
                              float(cfg.get("eps", 1e-4)))
    raise DomainError(f"unknown measure family {fam!r}")
