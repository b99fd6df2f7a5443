"""Monte Carlo evaluation of ``int_0^inf dt/t P(z < xi_t <= lam z)`` and the index it defines.

Only one-dimensional marginals enter, so every t-node is sampled directly
(exact marginals; see :meth:`ProcessFamily.sample`).  All intervals
``(z, lam z]`` of one call share the same samples.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import PreconditionError, WindowTooNarrowError
from .models import ProcessFamily, Stable, stable_abs_quantile
from .regvar import DIRECTIONS
from .rng import block_map, make_rng

WINDOW = (1e-2, 1e4)  # t-window in units of tau(z)
NODES_PER_DECADE = 8
BOUNDARY_FRACTION = 0.01


@dataclass
class SinaiEstimate:
    z: float
    lam: float
    value: float
    stderr: float
    t_window: tuple


def stable_sinai_exact(alpha: float, rho: float, lam: float) -> float:
    """``alpha rho log lam``; for ``lam < 1`` the interval is ``(lam z, z]`` and the sign flips."""
    if not lam > 0:
        raise PreconditionError("lam must be > 0")
    return alpha * rho * math.log(lam)


def passage_scale(f: ProcessFamily, z: float, rng=None, pilot: int = 4000) -> float:
    """``tau(z)``: the time at which the median of ``|xi_t|`` equals ``z``."""
    if isinstance(f, Stable):
        m = stable_abs_quantile(f.alpha, f.delta, 0.5)
        return (z / m) ** f.alpha / f.c if f.alpha != 2 else (z / m) ** 2 / f.c
    rng = make_rng(rng)
    lo, hi = -30.0, 30.0  # log t
    child = rng.spawn(1)[0]
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        med = np.median(np.abs(f.sample(math.exp(mid), pilot, child)))
        if med < z:
            lo = mid
        else:
            hi = mid
        if hi - lo < 0.05:
            break
    return math.exp(0.5 * (lo + hi))


def _counts_block(n, rng, f, t, z, lams, coef):
    x = f.sample(t, n, rng)
    ind = np.stack([(x > z) & (x <= lam * z) for lam in lams]).astype(float)
    y = coef @ ind
    return ind.sum(1), float(y.sum()), float((y ** 2).sum())


def _sample_window(f, z, lams, t_grid, replicas, rng, coef, workers):
    """Per t-node: hit frequencies for each interval, and mean/var of ``coef . indicators``."""
    P = np.zeros((len(t_grid), len(lams)))
    Ym = np.zeros(len(t_grid))
    Yv = np.zeros(len(t_grid))
    for j, (t, child) in enumerate(zip(t_grid, rng.spawn(len(t_grid)))):
        parts = block_map(_counts_block, replicas, child, f, t, z, lams, coef, workers=workers)
        P[j] = sum(p[0] for p in parts) / replicas
        s1 = sum(p[1] for p in parts)
        s2 = sum(p[2] for p in parts)
        Ym[j] = s1 / replicas
        Yv[j] = max(s2 / replicas - Ym[j] ** 2, 0.0)
    return P, Ym, Yv


def _trapezoid_weights(t_grid):
    s = np.log(t_grid)
    w = np.zeros(len(s))
    d = np.diff(s)
    w[:-1] += d / 2
    w[1:] += d / 2
    return w


def default_t_grid(f, z, rng=None, window=WINDOW, per_decade=NODES_PER_DECADE):
    tau = passage_scale(f, z, rng)
    lo, hi = window
    n = int(round(per_decade * math.log10(hi / lo))) + 1
    return np.geomspace(lo * tau, hi * tau, n)


def sinai_functionals(f: ProcessFamily, z: float, lams: Sequence[float], t_grid=None,
                      replicas: int = 100_000, rng=None, workers: int = 1,
                      window=WINDOW, check_window: bool = True) -> list[SinaiEstimate]:
    """One :class:`SinaiEstimate` per ``lam``, from shared samples."""
    if not z > 0:
        raise PreconditionError("z must be > 0")
    lams = [float(l) for l in lams]
    if any(not l >= 1 for l in lams):
        raise PreconditionError("lam must be >= 1")
    rng = make_rng(rng)
    pilot_rng, main_rng = rng.spawn(2)
    if t_grid is None:
        t_grid = default_t_grid(f, z, pilot_rng, window)
    t_grid = np.asarray(t_grid, dtype=float)
    P, _, _ = _sample_window(f, z, lams, t_grid, replicas, main_rng, np.ones(len(lams)), workers)
    w = _trapezoid_weights(t_grid)
    out = []
    for i, lam in enumerate(lams):
        p = P[:, i]
        val = float(w @ p)
        se = float(math.sqrt(np.sum(w ** 2 * p * (1 - p)) / replicas))
        if check_window and lam > 1 and val > 0:
            edge = p[0] + p[-1]
            if edge > BOUNDARY_FRACTION * val:
                raise WindowTooNarrowError(
                    f"boundary integrand {edge:.3g} exceeds {BOUNDARY_FRACTION:.0%} of {val:.3g} "
                    f"(z={z:g}, lam={lam:g})")
        out.append(SinaiEstimate(z, lam, val, se, (float(t_grid[0]), float(t_grid[-1]))))
    return out


def sinai_functional(f: ProcessFamily, z: float, lam: float, t_grid=None, replicas: int = 100_000,
                     rng=None, workers: int = 1, window=WINDOW) -> SinaiEstimate:
    if lam == 1:
        return SinaiEstimate(z, 1.0, 0.0, 0.0, (math.nan, math.nan))
    return sinai_functionals(f, z, [lam], t_grid, replicas, rng, workers, window)[0]


@dataclass
class SinaiIndex:
    beta: float
    stderr: float
    stabilized: bool
    z: float  # the z at which beta was read off
    by_z: list = field(default_factory=list)  # (z, beta_hat, stderr)
    in_unit_interval: bool = True
    estimates: list = field(default_factory=list)  # SinaiEstimate per (z, lam)


def sinai_index(f: ProcessFamily, direction: str = "at_infinity", lam_set=(2.0, 4.0, 8.0),
                z_schedule=None, replicas: int = 100_000, rng=None, workers: int = 1,
                tol: float = 0.05, window=WINDOW) -> SinaiIndex:
    """Slope of the functional against ``log lam`` (regression through the origin),
    followed along ``z_schedule`` until successive estimates agree within ``tol``."""
    if direction not in DIRECTIONS:
        raise PreconditionError(f"direction must be one of {DIRECTIONS}")
    lams = np.asarray(lam_set, dtype=float)
    if len(lams) < 3 or np.any(lams <= 1):
        raise PreconditionError("lam_set needs >= 3 values > 1")
    if z_schedule is None:
        z_schedule = ([10.0 ** k for k in range(1, 5)] if direction == "at_infinity"
                      else [10.0 ** -k for k in range(1, 5)])
    z_schedule = list(z_schedule)
    steps = np.diff(np.log(z_schedule))
    if not (np.all(steps > 0) if direction == "at_infinity" else np.all(steps < 0)):
        raise PreconditionError("z_schedule must move monotonically toward the limit point")
    ll = np.log(lams)
    coef = ll / (ll @ ll)
    rng = make_rng(rng)
    by_z, estimates = [], []
    for z, child in zip(z_schedule, rng.spawn(len(z_schedule))):
        pilot_rng, main_rng = child.spawn(2)
        t_grid = default_t_grid(f, z, pilot_rng, window)
        P, Ym, Yv = _sample_window(f, z, list(lams), t_grid, replicas, main_rng, coef, workers)
        w = _trapezoid_weights(t_grid)
        by_z.append((z, float(w @ Ym), float(math.sqrt(np.sum(w ** 2 * Yv) / replicas))))
        win = (float(t_grid[0]), float(t_grid[-1]))
        for i, lam in enumerate(lams):
            p = P[:, i]
            se = float(math.sqrt(np.sum(w ** 2 * p * (1 - p)) / replicas))
            estimates.append(SinaiEstimate(z, float(lam), float(w @ p), se, win))
    betas = [b for _, b, _ in by_z]
    stab = len(betas) >= 2 and abs(betas[-1] - betas[-2]) <= tol
    z, beta, se = by_z[-1]
    return SinaiIndex(beta, se, stab, z, by_z, 0.0 <= beta <= 1.0, estimates)


def write_csv(estimates: Sequence[SinaiEstimate], path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["z", "lambda", "value", "stderr", "t_min", "t_max"])
        for e in estimates:
            w.writerow([repr(float(v)) for v in (e.z, e.lam, e.value, e.stderr, *e.t_window)])
