"""Regular-variation index fits and difference limits ``G(lam x) - G(x) -> beta log lam``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import EULER_GAMMA
from .errors import DomainError, NonConvergenceError, PreconditionError

# int_0^inf e^{-v} log v dv; the shift between a logarithmic renewal function
# and its Mellin smoothing is beta times this constant
ABELIAN_SHIFT = -EULER_GAMMA

DIRECTIONS = ("at_zero", "at_infinity")


def _check_direction(direction):
    if direction not in DIRECTIONS:
        raise DomainError(f"direction must be one of {DIRECTIONS}")


@dataclass
class RVFit:
    index: float
    residual: float  # max |log(f(lam x)/f(x))/log lam - index| over the window
    window: tuple
    rms: float  # least-squares residual of the log-log fit


def _fit(lx, ly):
    A = np.vstack([lx, np.ones_like(lx)]).T
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    rms = float(np.sqrt(np.mean((A @ coef - ly) ** 2)))
    return float(coef[0]), rms


def rv_index_fit(f: Callable[[float], float], direction: str, grid: Sequence[float],
                 lam: float = 2.0, candidates: int = 3) -> RVFit:
    """Log-log slope of ``f`` over the decade of ``grid`` nearest the limit point.

    Decade windows slide by half a decade; among the ``candidates`` windows
    closest to the limit the one with the smallest fit residual is used.
    """
    _check_direction(direction)
    x = np.sort(np.asarray(grid, dtype=float))
    if np.any(x <= 0) or len(x) < 3:
        raise PreconditionError("grid must hold >= 3 positive points")
    y = np.array([f(v) for v in x], dtype=float)
    if np.any(~(y > 0)):
        raise DomainError("f must be positive on the grid")
    lx, ly = np.log10(x), np.log10(y)
    span = lx[-1] - lx[0]
    starts = []
    if span <= 1.0:
        starts = [lx[0]]
    else:
        k = np.arange(0.0, span - 1.0 + 1e-9, 0.5)
        starts = list(lx[0] + k) + ([lx[-1] - 1.0] if (span - 1.0) % 0.5 > 1e-9 else [])
    starts = sorted(set(starts), reverse=(direction == "at_infinity"))[:candidates]
    best = None
    for s in starts:
        m = (lx >= s - 1e-12) & (lx <= s + 1.0 + 1e-12)
        if m.sum() < 2:
            continue
        slope, rms = _fit(lx[m], ly[m])
        if best is None or rms < best[2] - 1e-15:
            best = (slope, (10 ** s, 10 ** (s + 1)), rms, m)
    slope, window, rms, m = best
    ratios = [math.log(f(lam * v) / f(v)) / math.log(lam) for v in x[m]]
    return RVFit(slope, float(np.max(np.abs(np.array(ratios) - slope))), window, rms)


@dataclass
class DifferenceLimit:
    beta: float
    by_probe: list  # slope estimate at each probe
    converged: bool
    lam_set: tuple


def difference_limit(G: Callable[[float], float], lam_set: Sequence[float] = (2, 4, 8),
                     direction: str = "at_infinity", probes: Sequence[float] = (1e2, 1e3, 1e4),
                     tol: float = 0.01) -> DifferenceLimit:
    """Slope through the origin of ``G(lam x) - G(x)`` against ``log lam``, at each probe.

    ``probes`` must run toward the limit point; ``beta`` is the estimate at the
    last probe and ``converged`` says whether the last two agree within ``tol``.
    """
    _check_direction(direction)
    lam = np.asarray(lam_set, dtype=float)
    if np.any(lam <= 1):
        raise PreconditionError("lam_set must hold values > 1")
    ll = np.log(lam)
    est = []
    for x in probes:
        g0 = G(x)
        d = np.array([G(l * x) - g0 for l in lam])
        if not np.all(np.isfinite(d)):
            raise PreconditionError(f"G not finite near {x:g}")
        est.append(float(ll @ d / (ll @ ll)))
    conv = len(est) < 2 or abs(est[-1] - est[-2]) <= tol
    return DifferenceLimit(est[-1], est, conv, tuple(lam_set))


@dataclass
class AbelianShift:
    max_deviation: float
    shifts: list  # G(theta) - G_hat(theta) at each probe
    target: float  # beta * ABELIAN_SHIFT


def abelian_shift_check(G: Callable[[float], float], G_hat: Callable[[float], float],
                        probes: Sequence[float], beta: float) -> AbelianShift:
    """``max |G(theta) - G_hat(theta) - beta c|`` over ``probes``, with
    ``c = int e^{-v} log v dv = -0.5772...``."""
    shifts = [G(p) - G_hat(p) for p in probes]
    target = beta * ABELIAN_SHIFT
    return AbelianShift(float(max(abs(s - target) for s in shifts)), shifts, target)


def require_converged(d: DifferenceLimit):
    if not d.converged:
        raise NonConvergenceError(f"difference limit did not stabilise: {d.by_probe}")
    return d.beta
