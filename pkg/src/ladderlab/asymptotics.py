"""Tail estimates for the ascending ladder height measure ``po``.

* the two identities linking ``po``, the dual ladder objects and ``Pi+``
  (:func:`eai_rhs`, :func:`ea_rhs`);
* the large-``x`` asymptotes of ``po(x, inf)`` and their regularly varying
  special case;
* key-renewal and Blackwell-window ratios from simulated ladder heights;
* index comparisons near 0;
* an exact random-walk analogue (:func:`rw_ladder_oracle`).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .errors import (DivergentIntegralError, DomainError, InsufficientDataError,
                     PreconditionError)
from .exponents import SubordinatorTriplet
from .measures import JumpLaw, LevyMeasure, NullSide, integrated_tail
from .models import CompoundPoissonDrift
from .quad import DEFAULT, QuadratureSpec
from .regvar import rv_index_fit
from .rng import block_map, make_rng
from .simulate import BATCH, LadderHeightSample, PotentialMeasure

MIN_EXCEEDANCES = 200  # "well sampled": at least this many realised heights beyond x


@dataclass
class Estimate:
    value: float
    stderr: float = 0.0


def _tail(pi) -> Callable[[float], float]:
    if isinstance(pi, LevyMeasure):
        return lambda x: float(pi.right_tail(x))
    return lambda x: float(pi(x))


def _tail_integral(pi, x, quad=DEFAULT):
    try:
        return integrated_tail(pi, x, quad)
    except DivergentIntegralError:
        return math.inf


# --------------------------------------------------------------------------
# ladder objects


@dataclass(frozen=True)
class LadderTriplets:
    """Characteristics of the ascending (``up``) and dual (``down``) ladder heights.

    ``po_density`` is the density of ``po`` and is required when the dual
    ladder height has a drift.
    """

    up: SubordinatorTriplet
    down: SubordinatorTriplet
    po_density: Callable | None = None

    def __post_init__(self):
        if self.po_density is not None and self.down.d == 0:
            raise PreconditionError("a po density is only carried when the dual drift is > 0")

    def po_tail(self, x):
        return float(self.up.nu.right_tail(x))

    @property
    def ne_mass(self):
        return float(self.down.nu.right_tail(0.0)) if self.down.nu.plus.finite else math.inf

    @property
    def mu(self) -> float:
        """``E H^_1 = d^ + int y ne(dy)``; infinite when the dual is killed."""
        if self.down.kappa0 > 0:
            return math.inf
        ne = self.down.nu
        mean_jump = 0.0 if isinstance(ne.plus, NullSide) else _tail_integral(ne, 0.0)
        return self.down.d + mean_jump


def cramer_lundberg_ladders(rate: float, jump_rate: float, drift: float) -> LadderTriplets:
    """Closed-form ladder objects of ``xi = -drift t + CP(rate, Exp(jump_rate))``.

    The dual ladder height is a pure drift ``d^ = 1`` (local time = dual
    supremum), so ``po(dy) = rate e^{-jump_rate y} dy``, no ``ne``, no dual killing.
    """
    from .measures import Exponential, LawSide

    if not (rate > 0 and jump_rate > 0 and drift > 0):
        raise PreconditionError("need rate, jump_rate, drift > 0")
    kappa0 = max(drift - rate / jump_rate, 0.0)
    po = LevyMeasure(LawSide(rate / jump_rate, Exponential(jump_rate)))
    up = SubordinatorTriplet(kappa0, 0.0, po)
    down = SubordinatorTriplet(0.0, 1.0, LevyMeasure())
    return LadderTriplets(up, down, lambda x: rate * math.exp(-jump_rate * x))


# --------------------------------------------------------------------------
# the two identities


def eai_rhs(V: PotentialMeasure, pi, x: float, quad: QuadratureSpec = DEFAULT) -> Estimate:
    """``int V^(dy) Pi+(x + y)``.

    Histograms use midpoint masses; beyond the last edge the last bin's
    density is extended flat, which costs ``density * int_{x+e}^inf Pi+``.
    """
    if x < 0:
        raise DomainError("x must be >= 0")
    tail = _tail(pi)
    atom = V.atom0 * tail(x)
    if V.kind == "closed_form":
        f = lambda y: float(V.density_fn(y)) * tail(x + y)  # noqa: E731
        val, _ = integrate.quad(f, 0.0, 1.0, limit=200)
        body, err = integrate.quad(f, 1.0, np.inf, limit=400)
        if not math.isfinite(body) or (math.isinf(V.total_mass) and err > 1e-3 * max(abs(body), 1e-300)):
            # slow algebraic decay: integrate on panels and check the remainder
            body = _panel_to_infinity(f, 1.0, tail, x, V)
        return Estimate(atom + val + body, 0.0)
    e = V.edges
    mid = 0.5 * (e[:-1] + e[1:])
    w = np.array([tail(x + m) for m in mid])
    val = atom + float(V.masses @ w)
    var = float(np.sum((V.stderr * w) ** 2))
    last = V.masses[-1] / (e[-1] - e[-2])
    if last > 0:
        rest = _tail_integral(pi, x + e[-1], quad)
        if math.isinf(rest):
            raise DivergentIntegralError("V^ has infinite mass and Pi+ is not integrable against it")
        val += last * rest
        var += (V.stderr[-1] / (e[-1] - e[-2]) * rest) ** 2
    return Estimate(val, math.sqrt(var))


def _panel_to_infinity(f, a, tail, x, V):
    total, lo = 0.0, a
    for _ in range(60):
        hi = lo * 10
        piece = integrate.quad(f, lo, hi, limit=200)[0]
        total += piece
        # V^ density is eventually flat or decreasing; stop when the decade adds little
        if piece <= 1e-10 * max(total, 1e-300):
            return total
        lo = hi
    raise DivergentIntegralError("V^ has infinite mass and Pi+ is not integrable against it")


@dataclass
class EAResult:
    value: float
    jump_term: float
    drift_term: float
    killing_term: float


def ea_rhs(lt: LadderTriplets, x: float, quad: QuadratureSpec = DEFAULT) -> EAResult:
    """``int_{(x,inf)} po(dy) ne(y - x, inf) + d^ p(x) + kappa^_0 po(x, inf)``."""
    if not x > 0:
        raise DomainError("x must be > 0")
    if lt.down.d > 0 and lt.po_density is None:
        raise PreconditionError("the dual has a drift: the density of po is required")
    ne, po = lt.down.nu, lt.up.nu.plus
    jump = 0.0
    if not isinstance(ne.plus, NullSide) and not isinstance(po, NullSide):
        f = lambda y: float(po.density(y)) * float(ne.right_tail(y - x))  # noqa: E731
        jump = integrate.quad(f, x, np.inf, limit=400)[0]
        jump += sum(m * float(ne.right_tail(a - x)) for a, m in po.atoms if a > x)
    drift = lt.down.d * float(lt.po_density(x)) if lt.down.d > 0 else 0.0
    kill = lt.down.kappa0 * lt.po_tail(x)
    return EAResult(jump + drift + kill, jump, drift, kill)


# --------------------------------------------------------------------------
# asymptotes


def tail_asymptote_finite_mean(pi, mu: float, x: float, quad: QuadratureSpec = DEFAULT) -> float:
    """``Pi+_I(x) / mu``; ``pi`` is a measure or the integrated tail ``Pi+_I`` itself."""
    if not (0 < mu < math.inf):
        raise PreconditionError("mu = E H^_1 must be finite and > 0")
    if isinstance(pi, LevyMeasure):
        return integrated_tail(pi, x, quad) / mu
    return float(pi(x)) / mu


def tail_asymptote_killed(pi, kappa0_hat: float, x: float) -> float:
    """``Pi+(x) / kappa^_0``."""
    if not kappa0_hat > 0:
        raise PreconditionError("needs kappa^_0 > 0 (xi drifting to +inf)")
    return _tail(pi)(x) / kappa0_hat


def rv_tail_asymptote(pi, alpha: float, mu: float, x: float,
                      grid: Sequence[float] = tuple(np.geomspace(1e4, 1e8, 17)),
                      tol: float = 0.05) -> float:
    """``x Pi+(x) / (alpha mu)``, after checking ``Pi+`` has index ``-1 - alpha`` at infinity."""
    if not 0 < alpha <= 1:
        raise PreconditionError("alpha must lie in (0, 1]")
    if not (0 < mu < math.inf):
        raise PreconditionError("mu must be finite and > 0")
    tail = _tail(pi)
    try:
        fit = rv_index_fit(tail, "at_infinity", grid)
    except DomainError as exc:
        raise PreconditionError(f"Pi+ is not regularly varying on the grid: {exc}") from exc
    if abs(fit.index + 1 + alpha) > tol or fit.residual > tol:
        raise PreconditionError(f"Pi+ is not regularly varying with index {-1 - alpha:g} "
                                f"(fitted {fit.index:.4f}, residual {fit.residual:.3g})")
    return x * tail(x) / (alpha * mu)


# --------------------------------------------------------------------------
# empirical po from simulated ladder heights


@dataclass
class EmpiricalPo:
    """``po = norm * P(Z in dy, Z < inf)`` for the first ladder height ``Z``.

    The constant ``norm`` ties the sample to the local-time convention of
    ``V^``: it is ``po(0, inf)`` from :func:`eai_rhs` over ``P(Z < inf)``.
    """

    sample: LadderHeightSample
    norm: float
    measure: LevyMeasure

    def _scaled(self, est):
        return Estimate(self.norm * est[0], self.norm * est[1])

    def tail(self, x) -> Estimate:
        return self._scaled(self.sample.tail(x))

    def window(self, x, z) -> Estimate:
        return self._scaled(self.sample.window(x, z))

    def exceedances(self, x) -> int:
        return self.sample.exceedances(x)

    def integral(self, g: Callable, x: float) -> Estimate:
        """``int_x^inf g(y - x) po(dy)``."""
        side = self.measure.plus
        rate = self.sample.family.rate

        def one(d):
            inner = integrate.quad(lambda s: g(s) * float(side.density(x + d + s)), 0.0, np.inf,
                                   limit=200)[0]
            return (inner + sum(m * g(a - x - d) for a, m in side.atoms if a > x + d)) / rate

        kernel, tail = _interpolated(one, self.sample.level_cap)
        return self._scaled(self.sample.expect(kernel, tail))


def _interpolated(fn, cap, n=241, fine=4000):
    """``fn`` on a log grid of depths, interpolated in log-log (linear below 1e-4),
    with a vectorised ``int_{d0}^inf`` (power-law extrapolation past the grid)."""
    d = np.concatenate([[0.0], np.geomspace(1e-4, 10 * cap, n)])
    v = np.array([fn(float(u)) for u in d])
    lv = np.log(np.maximum(v, 1e-300))
    ld = np.log(d[1:])

    def k(u):
        u = np.asarray(u, dtype=float)
        out = np.exp(np.interp(np.log(np.maximum(u, 1e-4)), ld, lv[1:]))
        out = np.where(u < 1e-4, v[0] + (v[1] - v[0]) * u / 1e-4, out)
        slope = (lv[-1] - lv[-2]) / (ld[-1] - ld[-2])
        out = np.where(u > d[-1], v[-1] * (np.maximum(u, d[-1]) / d[-1]) ** slope, out)
        return out if out.ndim else float(out)

    slope = (lv[-1] - lv[-2]) / (ld[-1] - ld[-2])
    beyond = v[-1] * d[-1] / (-slope - 1) if slope < -1 and v[-1] > 0 else 0.0
    if v[-1] > 0 and slope >= -1:
        raise DivergentIntegralError("kernel is not integrable over depth")
    u = np.concatenate([[0.0], np.geomspace(1e-6, d[-1], fine)])
    ku = k(u)
    seg = 0.5 * (ku[1:] + ku[:-1]) * np.diff(u)
    cum = np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]]) + beyond

    def ktail(d0):
        d0 = np.asarray(d0, dtype=float)
        out = np.interp(d0, u, cum)
        far = d0 > d[-1]
        if np.any(far):
            out = np.where(far, v[-1] * d[-1] / (-slope - 1) * (np.maximum(d0, d[-1]) / d[-1]) ** (slope + 1)
                           if slope < -1 else 0.0, out)
        return out if out.ndim else float(out)

    ktail.vectorized = True
    return k, ktail


def empirical_po(sample: LadderHeightSample, V: PotentialMeasure) -> EmpiricalPo:
    m = sample.family.measure
    total = eai_rhs(V, m, 0.0).value
    p_finite = sample.tail(0.0)[0]
    if not p_finite > 0:
        raise InsufficientDataError("no finite ladder heights in the sample")
    return EmpiricalPo(sample, total / p_finite, m)


@dataclass
class KeyRenewal:
    ratio: float  # (1/Pi+(x)) int g(y - x) po(dy)
    stderr: float
    target: float  # (1/mu) int g
    x: float

    @property
    def normalised(self):
        return self.ratio / self.target


def _g_integral(g, g_integral):
    if g_integral is None:
        g_integral, err = integrate.quad(g, 0.0, np.inf, limit=400)
        if not math.isfinite(g_integral) or err > 1e-6 * max(abs(g_integral), 1.0):
            raise PreconditionError("g is not integrable on (0, inf)")
    if not math.isfinite(g_integral):
        raise PreconditionError("g is not integrable on (0, inf)")
    return g_integral


def key_renewal_limit(po: EmpiricalPo, pi, mu: float, g: Callable, x: float,
                      g_integral: float | None = None,
                      min_exceedances: int = MIN_EXCEEDANCES) -> KeyRenewal:
    gi = _g_integral(g, g_integral)
    if po.exceedances(x) < min_exceedances:
        raise InsufficientDataError(f"only {po.exceedances(x)} ladder heights beyond x={x:g}")
    est = po.integral(g, x)
    t = _tail(pi)(x)
    return KeyRenewal(est.value / t, est.stderr / t, gi / mu, x)


@dataclass
class BRTWindow:
    ratio: float  # po(x, x+z] / ((z/mu) Pi+(x))
    stderr: float
    bound_lhs: float  # po(x, x+z] / Pi+(x)
    bound_rhs: float  # V^(z)
    bound_ok: bool


def brt_window(po: EmpiricalPo, pi, mu: float, x: float, z: float, V: PotentialMeasure,
               min_exceedances: int = MIN_EXCEEDANCES, slack: float = 3.0) -> BRTWindow:
    """Blackwell-type window ratio and the bound ``po(x, x+z]/Pi+(x) <= V^(z)``.

    The bound is checked with ``slack`` standard errors of the Monte Carlo estimate.
    """
    if not z > 0:
        raise PreconditionError("z must be > 0")
    if po.exceedances(x) < min_exceedances:
        raise InsufficientDataError(f"only {po.exceedances(x)} ladder heights beyond x={x:g}")
    est = po.window(x, z)
    t = _tail(pi)(x)
    lhs, se = est.value / t, est.stderr / t
    rhs = V.mass(-1.0, z)
    rhs_se = 0.0
    if V.kind == "histogram":
        k = np.searchsorted(V.edges, z, side="right")
        rhs_se = float(np.sqrt(np.sum(V.stderr[:k] ** 2)))
    ratio = est.value / (z / mu * t)
    return BRTWindow(ratio, se * mu / z, lhs, rhs, bool(lhs - slack * se <= rhs + slack * rhs_se))


# --------------------------------------------------------------------------
# behaviour near 0


@dataclass
class ZeroBehavior:
    case: str
    alpha: float
    po_index: float
    pi_index: float
    expected_po_index: float
    passed: bool
    tol: float


def zero_behavior_check(lt: LadderTriplets, pi, case: str,
                        x_grid: Sequence[float] = tuple(np.geomspace(1e-8, 1e-5, 13)),
                        po_tail: Callable | None = None, tol: float = 0.05) -> ZeroBehavior:
    """Compare regular-variation indices of ``po(x, inf)`` and ``Pi+(x)`` at 0.

    ``drift_positive``: ``po`` index ``-alpha`` against ``Pi+`` index ``-alpha-1``,
    with ``po(x, inf) ~ (1/d^) int_x^1 Pi+`` when ``po_tail`` is not given.
    ``finite_ne``: both indices ``-alpha``, with ``po(x, inf) ~ Pi+(x)/(ne mass + kappa^_0)``.
    """
    tail = _tail(pi)
    if case == "drift_positive":
        if not lt.down.d > 0:
            raise PreconditionError("hypothesis not met: the dual ladder height has no drift")
        pi_fit = rv_index_fit(tail, "at_zero", x_grid)
        alpha = -pi_fit.index - 1
        if po_tail is None:
            po_tail = lambda x: integrate.quad(tail, x, 1.0, limit=200, points=np.geomspace(x, 1.0, 8)[1:-1])[0] / lt.down.d  # noqa: E731
        expected = -alpha
    elif case == "finite_ne":
        if lt.down.d != 0:
            raise PreconditionError("hypothesis not met: the dual ladder height has a drift")
        mass = lt.ne_mass + lt.down.kappa0
        if not (0 < mass < math.inf):
            raise PreconditionError("hypothesis not met: ne must have finite, nonzero mass")
        pi_fit = rv_index_fit(tail, "at_zero", x_grid)
        alpha = -pi_fit.index
        if po_tail is None:
            po_tail = lambda x: tail(x) / mass  # noqa: E731
        expected = -alpha
    else:
        raise DomainError("case must be 'drift_positive' or 'finite_ne'")
    if not 0 < alpha <= 1 + tol:
        raise PreconditionError(f"fitted alpha={alpha:.4f} lies outside (0, 1]")
    po_fit = rv_index_fit(po_tail, "at_zero", x_grid)
    return ZeroBehavior(case, alpha, po_fit.index, pi_fit.index, expected,
                        abs(po_fit.index - expected) <= tol, tol)


# --------------------------------------------------------------------------
# random-walk oracle


@dataclass(frozen=True)
class StepLaw:
    """Random-walk step ``X = U - V`` with independent ``U ~ up`` and ``V ~ down``."""

    up: JumpLaw | None = None
    down: JumpLaw | None = None

    def sample(self, rng, n):
        u = self.up.sample(rng, n) if self.up is not None else np.zeros(n)
        v = self.down.sample(rng, n) if self.down is not None else np.zeros(n)
        return u - v

    @property
    def mean(self):
        return (self.up.mean if self.up is not None else 0.0) - (
            self.down.mean if self.down is not None else 0.0)

    def _over_down(self, fn):
        """``E fn(V)``."""
        d = self.down
        if d is None:
            return fn(0.0)
        atoms = d.atoms
        if atoms:
            return sum(m * fn(a) for a, m in atoms)
        return integrate.quad(lambda v: fn(v) * float(d.pdf(v)), 0.0, np.inf, limit=200)[0]

    def _up_tail(self, b):
        return float(self.up.sf(b)) if self.up is not None else float(b < 0)

    def sf(self, x):
        """``P(X > x)``."""
        return self._over_down(lambda v: self._up_tail(x + v))

    def window_kernel(self, a, z):
        """``P(a < X <= a + z)``."""
        return self._over_down(lambda v: self._up_tail(a + v) - self._up_tail(a + v + z))

    def kernel(self, g, a):
        """``E[g(X - a); X > a]``."""
        up = self.up
        if up is None:
            return 0.0
        if up.atoms:
            return self._over_down(lambda v: sum(m * g(u - a - v) for u, m in up.atoms if u > a + v))
        return self._over_down(lambda v: integrate.quad(
            lambda s: g(s) * float(up.pdf(a + v + s)), 0.0, np.inf, limit=200)[0])


def _rw_block(n, rng, step: StepLaw, D, edges, batch, n_max):
    nb = -(-n // batch)
    nbins = len(edges) - 1
    counts = np.zeros(nb * nbins)
    sums = np.zeros(nb * nbins)
    stops = [[] for _ in range(nb)]
    heights = []
    X = np.zeros(n)
    act = np.arange(n)
    for _ in range(n_max):
        if not act.size:
            break
        d = -X[act]
        k = np.clip(np.searchsorted(edges, d, side="right") - 1, 0, nbins - 1)
        idx = (act // batch) * nbins + k
        counts += np.bincount(idx, minlength=counts.size)
        sums += np.bincount(idx, weights=d, minlength=sums.size)
        x = X[act] + step.sample(rng, act.size)
        up = x > 0
        heights.append(x[up])
        cap = ~up & (x < -D)
        for i, xi in zip(act[cap], x[cap]):
            stops[i // batch].append(-xi)
        X[act] = x
        act = act[~up & ~cap]
    sizes = np.full(nb, batch)
    sizes[-1] = n - batch * (nb - 1)
    return (counts.reshape(nb, nbins), sums.reshape(nb, nbins), stops, sizes,
            np.concatenate(heights) if heights else np.zeros(0), act.size)


def _descent_block(n, rng, step: StepLaw, n_max):
    X = step.sample(rng, n)
    out = np.full(n, np.nan)
    act = np.arange(n)
    for _ in range(n_max):
        done = X[act] <= 0
        out[act[done]] = X[act[done]]
        act = act[~done]
        if not act.size:
            break
        X[act] += step.sample(rng, act.size)
    return out


@dataclass
class RWLadderOracle:
    step: StepLaw
    ladder: LadderHeightSample  # family field holds the step law
    descending: np.ndarray  # Z at the first weak descending epoch (NaN if not reached)
    not_reached: int  # walks without a strict ascent (capped or out of steps)
    unfinished: int  # walks that exhausted n_max steps
    m: float  # |E Z_{N^}|
    m_stderr: float

    @property
    def replicas(self):
        return self.ladder.n

    def key_renewal(self, g: Callable, x: float, g_integral: float | None = None,
                    window: float | None = None) -> KeyRenewal:
        """``(1/F(x, inf)) E[g(Z_N - x); x < Z_N < inf]`` against ``(1/m) int g``.

        ``window=z`` selects ``g = 1_(0, z]`` with a closed-form kernel.
        """
        if window is not None:
            z = window
            gi = z
            fn = lambda a: self.step.window_kernel(x + a, z)  # noqa: E731
        else:
            gi = _g_integral(g, g_integral)
            fn = lambda a: self.step.kernel(g, x + a)  # noqa: E731
        kernel, tail = _interpolated(fn, self.ladder.level_cap)
        v, se = self.ladder.expect(kernel, tail)
        F = self.step.sf(x)
        return KeyRenewal(v / F, se / F, gi / self.m, x)


def rw_ladder_oracle(step: StepLaw, n_max: int = 100_000, replicas: int = 1_000_000, rng=None,
                     level_cap: float = 100.0, workers: int = 1,
                     descending_replicas: int | None = None) -> RWLadderOracle:
    """Exact simulation of the first strict ascending ladder height ``Z_N`` and
    the first weak descending ladder height ``Z_N^`` of ``Z_n = X_1 + ... + X_n``.

    Walks are stopped at depth ``level_cap``; their remaining contribution uses
    ``1/|E X|`` visits per unit depth, as in :class:`LadderHeightSample`.
    """
    rng = make_rng(rng)
    asc_rng, desc_rng = rng.spawn(2)
    edges = np.concatenate([[0.0], np.geomspace(1e-4, level_cap * (1 + 1e-9), 281)])
    parts = block_map(_rw_block, replicas, asc_rng, step, level_cap, edges, BATCH, n_max,
                      workers=workers)
    mean = step.mean
    visit = 1.0 / abs(mean) if mean < 0 else math.inf
    ladder = LadderHeightSample(
        step, edges,
        np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts]),
        [s for p in parts for s in p[2]], np.concatenate([p[3] for p in parts]),
        np.concatenate([p[4] for p in parts]), level_cap, visit)
    unfinished = int(sum(p[5] for p in parts))
    not_reached = replicas - ladder.heights.size
    nd = descending_replicas or min(replicas, 200_000)
    desc = np.concatenate(block_map(_descent_block, nd, desc_rng, step, n_max, workers=workers))
    ok = desc[~np.isnan(desc)]
    if ok.size:
        m = float(abs(ok.mean()))
        m_se = float(ok.std(ddof=1) / math.sqrt(ok.size)) if ok.size > 1 else math.inf
    else:
        m, m_se = math.nan, math.nan
    return RWLadderOracle(step, ladder, desc, not_reached, unfinished, m, m_se)


# --------------------------------------------------------------------------
# reports


@dataclass
class TailReport:
    family: str
    x_grid: list
    empirical: list
    asymptote: list
    ratio: list
    stderr: list
    extra: dict = field(default_factory=dict)

    def to_json(self):
        d = asdict(self)
        extra = d.pop("extra")
        d.update(extra)
        return json.dumps(d, indent=2, sort_keys=True)


def well_sampled_decade(po: EmpiricalPo | LadderHeightSample, grid: Sequence[float],
                        min_exceedances: int = MIN_EXCEEDANCES) -> list:
    """The top decade of ``grid`` in which every point has enough exceedances."""
    ok = [x for x in grid if po.exceedances(x) >= min_exceedances]
    if not ok:
        raise InsufficientDataError("no grid point is well sampled")
    top = max(ok)
    return [x for x in ok if x >= top / 10]


def tail_report(family: str, po: EmpiricalPo, x_grid: Sequence[float],
                asymptote: Callable[[float], float], **extra) -> TailReport:
    emp, asy, rat, se = [], [], [], []
    for x in x_grid:
        e = po.tail(x)
        a = asymptote(x)
        emp.append(e.value)
        asy.append(a)
        rat.append(e.value / a)
        se.append(e.stderr / a)
    return TailReport(family, [float(x) for x in x_grid], emp, asy, rat, se, extra)


def dual_ladder_mean(f: CompoundPoissonDrift, n: int = 100_000, rng=None, n_max: int = 100_000):
    """``mu`` by two routes: closed form (when known) and simulation of the dual's first ladder height.

    Closed forms: the dual creeps and has no upward jumps (``mu = 1`` with the
    dual supremum as local time); exponential dual upward jumps and no dual
    drift (``mu`` is the exponential mean, one unit of local time per ladder
    point).  The simulated route applies when the dual does not creep.
    """
    from .measures import Exponential, LawSide

    g = f.dual()
    closed = None
    up = g.measure.plus
    if g.drift > 0 and isinstance(up, NullSide):
        closed = 1.0
    elif g.drift <= 0 and isinstance(up, LawSide) and isinstance(up.law, Exponential):
        closed = up.law.mean
    sim = None
    if g.drift <= 0:
        if not g.mean > 0:
            raise PreconditionError("the dual must drift to +inf for a finite simulated mean")
        rng = make_rng(rng)
        h = np.concatenate(block_map(_dual_first_height, n, rng, g, n_max))
        h = h[~np.isnan(h)]
        sim = Estimate(float(h.mean()), float(h.std(ddof=1) / math.sqrt(h.size)))
    return closed, sim


def _dual_first_height(n, rng, g: CompoundPoissonDrift, n_max):
    X = np.zeros(n)
    out = np.full(n, np.nan)
    act = np.arange(n)
    for _ in range(n_max):
        if not act.size:
            break
        w = rng.exponential(1.0 / g.rate, act.size)
        X[act] += g.drift * w + g.measure.sample_jumps(rng, act.size)
        up = X[act] > 0
        out[act[up]] = X[act[up]]
        act = act[~up]
    return out
