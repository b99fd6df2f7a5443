"""Quadrature helpers: geometric panels and ``dt/t`` integrals over log grids.

Panels are integrated with QUADPACK's adaptive Gauss-Kronrod rule
(``scipy.integrate.quad``).  Integrals of the form ``int_0^inf f(t) dt/t``
are computed in ``s = log t`` on ``[t_lo, t_hi]`` with one panel per decade;
the integrand must have decayed at both ends.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np
from scipy import integrate

from .errors import QuadratureError, TruncationError


@dataclass(frozen=True)
class QuadratureSpec:
    epsabs: float = 1e-12
    epsrel: float = 1e-9
    limit: int = 200
    x_max: float = 1e6  # horizon of explicit quadrature for tails
    t_lo: float = 1e-8
    t_hi: float = 1e8
    decay_tol: float = 1e-6  # endpoint integrand allowed, relative to max(1, |I|)


DEFAULT = QuadratureSpec()


def _quad(f, a, b, spec: QuadratureSpec, points=None):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(f, a, b, epsabs=spec.epsabs, epsrel=spec.epsrel,
                                      limit=spec.limit, points=points)
        except integrate.IntegrationWarning as exc:
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, err = integrate.quad(f, a, b, epsabs=spec.epsabs, epsrel=spec.epsrel,
                                      limit=spec.limit, points=points)
            if not (err <= max(1e3 * spec.epsabs, 1e-6 * abs(val))):
                raise QuadratureError(f"quad on [{a:g}, {b:g}]: {exc}", residual=err) from None
    return val, err


def geometric_breaks(a: float, b: float, per_decade: int = 1) -> np.ndarray:
    """Breakpoints from ``a`` to ``b`` (both > 0), ``per_decade`` per factor 10."""
    n = max(1, int(math.ceil(per_decade * math.log10(b / a))))
    return np.geomspace(a, b, n + 1)


def panel_quad(f: Callable[[float], float], a: float, b: float,
               spec: QuadratureSpec = DEFAULT, extra: Iterable[float] = ()) -> tuple[float, float]:
    """Integrate ``f`` on ``[a, b]`` (``a >= 0``) over geometric panels."""
    if b <= a:
        return 0.0, 0.0
    lo = max(a, min(1e-12, b * 1e-12))  # one panel covers [a, lo] when a is tiny
    edges = set(geometric_breaks(lo, b).tolist())
    edges.update(x for x in extra if a < x < b)
    edges = sorted(edges | {a, b})
    total = 0.0
    err = 0.0
    for lo_, hi_ in zip(edges[:-1], edges[1:]):
        v, e = _quad(f, lo_, hi_, spec)
        total += v
        err += e
    return total, err


def log_integral(f: Callable[[float], float], spec: QuadratureSpec = DEFAULT,
                 points: Iterable[float] = (), check_decay: bool = True) -> float:
    """``int_{t_lo}^{t_hi} f(t) dt / t`` with endpoint-decay assertions.

    ``points`` are t-values where ``f`` is known to be non-smooth.
    """
    s_lo, s_hi = math.log(spec.t_lo), math.log(spec.t_hi)
    g = lambda s: f(math.exp(s))  # noqa: E731
    edges = set(np.linspace(s_lo, s_hi, int(round((s_hi - s_lo) / math.log(10))) + 1).tolist())
    for t in points:
        if spec.t_lo < t < spec.t_hi:
            edges.add(math.log(t))
    edges = sorted(edges)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        total += _quad(g, a, b, spec)[0]
    if check_decay:
        ends = max(abs(f(spec.t_lo)), abs(f(spec.t_hi)))
        if ends > spec.decay_tol * max(1.0, abs(total)):
            raise TruncationError(
                f"dt/t integrand not decayed at t-window ends (|f| = {ends:.3g})")
    return total


_GL = {}


def _gauss_legendre(n):
    if n not in _GL:
        _GL[n] = np.polynomial.legendre.leggauss(n)
    return _GL[n]


def gl_log_integral(f: Callable[[np.ndarray], np.ndarray], spec: QuadratureSpec = DEFAULT,
                    points: Iterable[float] = (), per_decade: int = 2, order: int = 24,
                    check_decay: bool = True, rtol: float = 1e-6) -> float:
    """Vectorised ``int_{t_lo}^{t_hi} f(t) dt / t`` by composite Gauss-Legendre in ``log t``.

    ``f`` takes an array of t-values.  Panels break at ``points``; the result
    is compared against a rule of order ``order // 2 + 1`` on the same panels.
    """
    s_lo, s_hi = math.log(spec.t_lo), math.log(spec.t_hi)
    n_pan = int(round(per_decade * (s_hi - s_lo) / math.log(10)))
    edges = set(np.linspace(s_lo, s_hi, n_pan + 1).tolist())
    edges.update(math.log(t) for t in points if spec.t_lo < t < spec.t_hi)
    edges = np.array(sorted(edges))
    a, b = edges[:-1], edges[1:]
    vals = []
    for n in (order, order // 2 + 1):
        x, w = _gauss_legendre(n)
        s = (0.5 * (b - a))[:, None] * x[None, :] + (0.5 * (a + b))[:, None]
        fv = np.asarray(f(np.exp(s.ravel())), dtype=float).reshape(s.shape)
        vals.append(float(np.sum(fv * w[None, :] * (0.5 * (b - a))[:, None])))
    total, coarse = vals
    if not math.isfinite(total) or abs(total - coarse) > rtol * max(1.0, abs(total)):
        raise QuadratureError("log-t Gauss-Legendre rules disagree", residual=abs(total - coarse))
    if check_decay:
        ends = np.abs(np.asarray(f(np.array([spec.t_lo, spec.t_hi])), dtype=float)).max()
        if ends > spec.decay_tol * max(1.0, abs(total)):
            raise TruncationError(
                f"dt/t integrand not decayed at t-window ends (|f| = {ends:.3g})")
    return total
