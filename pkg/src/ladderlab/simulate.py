"""Path simulation, first passage above a level, ladder points and dual potential measures.

Compound Poisson families are simulated event by event and are exact.  Stable
and Gaussian families are stepped on a grid; first passage uses a step that
shrinks with the distance to the level and with the size of the running
supremum (``h = dt * dist^alpha / c``), so ``dt`` is a relative resolution
and the record carries a ``grid`` flag.
"""

from __future__ import annotations

import csv
import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InsufficientDataError, PreconditionError
from .models import BrownianDrift, CompoundPoissonDrift, ProcessFamily, Stable, cms
from .rng import block_map, make_rng

FLAG_EXACT, FLAG_GRID, FLAG_NOT_PASSED = "exact", "grid", "not_passed"


@dataclass
class Path:
    times: np.ndarray
    values: np.ndarray
    sup_values: np.ndarray = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.sup_values is None:
            self.sup_values = np.maximum.accumulate(self.values)
        if not (len(self.times) == len(self.values) == len(self.sup_values)):
            raise ValueError("times, values and sup_values must have equal length")

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "x", "s"])
            for row in zip(self.times, self.values, self.sup_values):
                w.writerow([repr(float(v)) for v in row])


def _cp_events(f: CompoundPoissonDrift, horizon, rng):
    n = rng.poisson(f.rate * horizon)
    times = np.sort(rng.uniform(0.0, horizon, n))
    return times, f.measure.sample_jumps(rng, n)


def sample_path(f: ProcessFamily, horizon: float, dt: float, rng, merge_events: bool = False) -> Path:
    """Path on the grid ``0, dt, ..., horizon``.

    Compound Poisson paths use exact jump times; with ``merge_events`` the jump
    times (post-jump values) are merged into the grid.
    """
    if not dt > 0 or horizon < dt:
        raise PreconditionError("need dt > 0 and horizon >= dt")
    rng = make_rng(rng)
    n = int(round(horizon / dt))
    grid = np.arange(n + 1) * dt
    if isinstance(f, CompoundPoissonDrift):
        jt, jumps = _cp_events(f, grid[-1], rng)
        cum = np.concatenate([[0.0], np.cumsum(jumps)])
        if merge_events:
            times = np.union1d(grid, jt)
        else:
            times = grid
        k = np.searchsorted(jt, times, side="right")
        return Path(times, f.drift * times + cum[k])
    if isinstance(f, BrownianDrift) and f.sigma == 0:
        return Path(grid, f.mu * grid)
    inc = f.sample(dt, n, rng)
    return Path(grid, np.concatenate([[0.0], np.cumsum(inc)]))


@dataclass
class LadderSample:
    epochs: np.ndarray
    heights: np.ndarray


def extract_ladders(p: Path) -> LadderSample:
    """Grid indices where the running supremum strictly increases (origin included)."""
    if len(p.values) == 0:
        raise PreconditionError("empty path")
    s = p.sup_values
    idx = np.concatenate([[0], np.flatnonzero(s[1:] > s[:-1]) + 1])
    return LadderSample(p.times[idx], s[idx])


# --------------------------------------------------------------------------
# first passage


@dataclass(frozen=True)
class PassageRecord:
    r: float
    T_r: float
    overshoot: float
    undershoot: float
    prior_sup: float
    flag: str = FLAG_EXACT
    dt: float = 0.0


@dataclass
class PassageRecords:
    """Batch of first-passage records; entries with ``passed == False`` are NaN."""

    r: float
    T: np.ndarray
    O: np.ndarray
    prior_sup: np.ndarray
    passed: np.ndarray
    flag: str
    dt: float = 0.0

    @property
    def U(self):
        return self.r - self.prior_sup

    @property
    def n_passed(self):
        return int(self.passed.sum())

    @property
    def n_not_passed(self):
        return int((~self.passed).sum())

    def records(self):
        for i in np.flatnonzero(self.passed):
            yield PassageRecord(self.r, float(self.T[i]), float(self.O[i]), float(self.U[i]),
                                float(self.prior_sup[i]), self.flag, self.dt)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["r", "T", "U", "O", "prior_sup", "flag"])
            for i in range(len(self.T)):
                if self.passed[i]:
                    row = [self.r, self.T[i], self.U[i], self.O[i], self.prior_sup[i]]
                    w.writerow([repr(float(v)) for v in row] + [self.flag])
                else:
                    w.writerow([repr(float(self.r)), "", "", "", "", FLAG_NOT_PASSED])


def _passage_cp(n, rng, f: CompoundPoissonDrift, r, t_cap, max_events):
    T = np.full(n, np.nan)
    O = np.full(n, np.nan)
    P = np.full(n, np.nan)
    X = np.zeros(n)
    S = np.zeros(n)
    t = np.zeros(n)
    act = np.arange(n)
    d = f.drift
    for _ in range(max_events):
        if act.size == 0:
            break
        w = rng.exponential(1.0 / f.rate, act.size)
        x0, s0, t0 = X[act], S[act], t[act]
        if d > 0:
            # creeping through r before the next jump
            tc = t0 + (r - x0) / d
            creep = (x0 + d * w > r) & (tc <= t_cap)
            ci = act[creep]
            T[ci], O[ci], P[ci] = tc[creep], 0.0, r
        else:
            creep = np.zeros(act.size, bool)
        xl = x0 + d * w
        sl = np.maximum(s0, xl)
        tn = t0 + w
        J = f.measure.sample_jumps(rng, act.size)
        xn = xl + J
        hit = ~creep & (xn > r) & (tn <= t_cap)
        hi = act[hit]
        T[hi], O[hi], P[hi] = tn[hit], xn[hit] - r, sl[hit]
        X[act], S[act], t[act] = xn, np.maximum(sl, xn), tn
        act = act[~creep & ~hit & (tn <= t_cap)]
    return T, O, P


def _step_scale(f, dist, dt):
    """Time step and the increment law's scale at distance ``dist`` to the level."""
    if isinstance(f, Stable):
        if f.alpha == 2:
            h = dt * dist ** 2 / f.c
        else:
            h = dt * dist ** f.alpha / f.c
        return h
    # Brownian with drift: the smaller of the diffusive and ballistic times
    h = dt * dist ** 2 / f.sigma ** 2
    if f.mu != 0:
        h = np.minimum(h, dt ** 0.5 * dist / abs(f.mu))
    return h


def _increments(f, h, rng):
    if isinstance(f, Stable):
        z = cms(f.alpha, f.delta, rng, h.size)
        return (f.c * h) ** (1 / f.alpha) * z if f.alpha != 2 else np.sqrt(f.c * h) * z
    return f.mu * h + f.sigma * np.sqrt(h) * rng.standard_normal(h.size)


def _passage_grid(n, rng, f, r, dt, t_cap, adaptive, floor, max_steps):
    T = np.full(n, np.nan)
    O = np.full(n, np.nan)
    P = np.full(n, np.nan)
    X = np.zeros(n)
    S = np.zeros(n)
    t = np.zeros(n)
    act = np.arange(n)
    for _ in range(max_steps):
        if act.size == 0:
            break
        x0 = X[act]
        if adaptive:
            # resolve both the level and the running supremum near the origin
            dist = np.minimum(r - x0, np.maximum(np.abs(x0), S[act]))
            h = _step_scale(f, np.maximum(dist, floor * r), dt)
        else:
            h = np.full(act.size, dt)
        xn = x0 + _increments(f, h, rng)
        tn = t[act] + h
        hit = (xn > r) & (tn <= t_cap)
        hi = act[hit]
        T[hi], O[hi], P[hi] = tn[hit], xn[hit] - r, S[hi]
        X[act], t[act] = xn, tn
        S[act] = np.maximum(S[act], xn)
        act = act[~hit & (tn <= t_cap)]
    return T, O, P


def _drifts_down(f):
    if isinstance(f, CompoundPoissonDrift):
        return f.mean < 0
    if isinstance(f, BrownianDrift):
        return f.mu < 0 or (f.mu == 0 and f.sigma == 0)
    if isinstance(f, Stable):
        return f.rho == 0
    return False


def first_passages(f: ProcessFamily, r: float, n: int, rng=None, dt: float = 1e-3,
                   t_cap: float = math.inf, workers: int = 1, adaptive: bool = True,
                   floor: float = 1e-6, max_steps: int = 10 ** 6) -> PassageRecords:
    """First passage strictly above ``r`` for ``n`` independent copies of ``xi``."""
    if not r > 0:
        raise PreconditionError("r must be > 0")
    if math.isinf(t_cap) and _drifts_down(f):
        raise PreconditionError("xi drifts to -inf: passage is not almost sure; set t_cap")
    rng = make_rng(rng)
    if isinstance(f, BrownianDrift) and f.sigma == 0:
        passed = np.full(n, f.mu > 0 and r / f.mu <= t_cap)
        T = np.where(passed, r / f.mu if f.mu > 0 else np.nan, np.nan)
        return PassageRecords(r, T, np.where(passed, 0.0, np.nan), np.where(passed, r, np.nan),
                              passed, FLAG_EXACT)
    if isinstance(f, CompoundPoissonDrift):
        parts = block_map(_passage_cp, n, rng, f, r, t_cap, max_steps, workers=workers)
        flag, step = FLAG_EXACT, 0.0
    else:
        if isinstance(f, Stable) and not f.simulable:
            raise DomainError("alpha = 1 with delta != 0 is excluded from simulation")
        parts = block_map(_passage_grid, n, rng, f, r, dt, t_cap, adaptive, floor, max_steps,
                          workers=workers)
        flag, step = FLAG_GRID, dt
    T, O, P = (np.concatenate([p[k] for p in parts]) for k in range(3))
    return PassageRecords(r, T, O, P, ~np.isnan(T), flag, step)


def first_passage(f: ProcessFamily, r: float, dt: float, t_cap: float, rng):
    """Single record, or ``None`` when ``t_cap`` is reached first."""
    recs = first_passages(f, r, 1, rng, dt=dt, t_cap=t_cap)
    return next(recs.records(), None)


# --------------------------------------------------------------------------
# potential measure of the dual ladder height


@dataclass
class PotentialMeasure:
    """``V^`` as a closed-form density or a histogram.

    ``normalisation`` names the local-time convention: ``"drift"`` (dual
    ladder drift set to 1, used whenever the dual creeps) or ``"count"`` (unit
    mass per ladder point, origin included).
    """

    kind: str  # "closed_form" or "histogram"
    normalisation: str
    edges: np.ndarray = None
    masses: np.ndarray = None
    stderr: np.ndarray = None
    total_mass: float = math.inf
    total_stderr: float = 0.0
    density_fn: object = None
    atom0: float = 0.0  # mass of the atom at the origin
    replicas: int = 0

    def density(self, y):
        y = np.asarray(y, dtype=float)
        if self.kind == "closed_form":
            return self.density_fn(y)
        k = np.clip(np.searchsorted(self.edges, y, side="right") - 1, 0, len(self.masses) - 1)
        inside = (y >= self.edges[0]) & (y < self.edges[-1])
        return np.where(inside, self.masses[k] / np.diff(self.edges)[k], 0.0)

    def mass(self, a, b):
        """``V^((a, b])`` plus the origin atom when ``a < 0 <= b``."""
        from scipy import integrate

        atom = self.atom0 if a < 0 <= b else 0.0
        lo = max(a, 0.0)
        if b <= lo:
            return atom
        if self.kind == "closed_form":
            return atom + integrate.quad(lambda y: float(self.density_fn(y)), lo, b, limit=200)[0]
        e = self.edges
        left = np.clip(e[:-1], lo, b)
        right = np.clip(e[1:], lo, b)
        frac = (right - left) / np.diff(e)
        return atom + float(np.sum(self.masses * frac))


def _creep_block(n, rng, g: CompoundPoissonDrift, horizon, edges):
    """Occupation of creeping levels, per bin, summed over ``n`` dual paths."""
    acc = np.zeros(len(edges) - 1)
    acc2 = np.zeros(len(edges) - 1)
    per = np.zeros((n, len(edges) - 1))
    X = np.zeros(n)
    S = np.zeros(n)
    t = np.zeros(n)
    act = np.arange(n)
    while act.size:
        w = np.minimum(rng.exponential(1.0 / g.rate, act.size), horizon - t[act])
        x0, s0 = X[act], S[act]
        top = x0 + g.drift * w
        a, b = s0, np.maximum(s0, top)
        cov = np.clip(edges[None, :], a[:, None], b[:, None]) - a[:, None]
        per[act] += np.diff(cov, axis=1)
        t[act] += w
        J = g.measure.sample_jumps(rng, act.size)
        X[act] = top + J
        S[act] = np.maximum(b, X[act])
        act = act[t[act] < horizon]
    acc += per.sum(0)
    acc2 += (per ** 2).sum(0)
    return acc, acc2


def _count_block(n, rng, g: CompoundPoissonDrift, horizon, edges):
    """Ladder points of the dual (origin included), per bin."""
    per = np.zeros((n, len(edges) - 1))
    atom = np.ones(n)
    X = np.zeros(n)
    S = np.zeros(n)
    t = np.zeros(n)
    act = np.arange(n)
    while act.size:
        w = rng.exponential(1.0 / g.rate, act.size)
        t[act] += w
        live = t[act] < horizon
        act = act[live]
        w = w[live]
        X[act] += g.drift * w + g.measure.sample_jumps(rng, act.size)
        up = X[act] > S[act]
        ui = act[up]
        S[ui] = X[ui]
        k = np.searchsorted(edges, X[ui], side="right") - 1
        ok = (k >= 0) & (k < per.shape[1])
        np.add.at(per, (ui[ok], k[ok]), 1.0)
    return per.sum(0), (per ** 2).sum(0), atom.sum()


def potential_measure_dual(f: ProcessFamily, horizon: float, dt: float, replicas: int, rng=None,
                           edges=None, workers: int = 1, closed_form: bool = True) -> PotentialMeasure:
    """``V^``, the potential measure of the ladder height of ``-xi``.

    Closed forms: stable (``x^{g-1}/Gamma(g)`` with ``g = alpha (1 - rho)``),
    pure drift, and spectrally positive compound Poisson families whose dual
    creeps (density ``e^{-Phi x}``, ``Phi`` the dual's killing exponent).
    Other compound Poisson families are simulated exactly over ``horizon``;
    Brownian families on the grid ``dt``.  ``closed_form=False`` forces
    simulation for compound Poisson families.
    """
    from scipy import optimize, special

    if replicas < 1:
        raise PreconditionError("replicas must be >= 1")
    if isinstance(f, Stable):
        g = f.alpha * (1 - f.rho)
        if g == 0:
            return PotentialMeasure("closed_form", "count", atom0=1.0, total_mass=1.0,
                                    density_fn=lambda y: np.zeros_like(np.asarray(y, float)))
        return PotentialMeasure("closed_form", "exponent",
                                density_fn=lambda y: np.where(np.asarray(y) > 0, np.asarray(y, float) ** (g - 1), 0.0)
                                / special.gamma(g))
    if isinstance(f, BrownianDrift) and f.sigma == 0:
        if -f.mu > 0:
            return PotentialMeasure("closed_form", "drift", density_fn=lambda y: np.ones_like(np.asarray(y, float)))
        return PotentialMeasure("closed_form", "count", atom0=1.0, total_mass=1.0,
                                density_fn=lambda y: np.zeros_like(np.asarray(y, float)))
    rng = make_rng(rng)
    if edges is None:
        edges = np.linspace(0.0, 10.0, 101)
    edges = np.asarray(edges, dtype=float)
    if isinstance(f, CompoundPoissonDrift):
        g = f.dual()
        if closed_form and g.drift > 0 and g.measure.right_tail(0.0) == 0:
            # dual is spectrally negative: pure-drift ladder killed at rate Phi
            psi = lambda th: g.drift * th - g.rate + g.rate * _laplace_down(g, th)  # noqa: E731
            phi = 0.0
            if g.mean < 0:
                hi = 1.0
                while psi(hi) <= 0:
                    hi *= 2
                phi = optimize.brentq(psi, 1e-12, hi, xtol=1e-14)
            tot = math.inf if phi == 0 else 1.0 / phi
            return PotentialMeasure("closed_form", "drift", total_mass=tot,
                                    density_fn=lambda y: np.exp(-phi * np.asarray(y, float)))
        if g.drift > 0:
            parts = block_map(_creep_block, replicas, rng, g, horizon, edges, workers=workers)
            s1 = sum(p[0] for p in parts)
            s2 = sum(p[1] for p in parts)
            norm, atom = "drift", 0.0
        else:
            parts = block_map(_count_block, replicas, rng, g, horizon, edges, workers=workers)
            s1 = sum(p[0] for p in parts)
            s2 = sum(p[1] for p in parts)
            norm, atom = "count", 1.0
        return _histogram(edges, s1, s2, replicas, norm, atom)
    if isinstance(f, BrownianDrift):
        # continuous paths creep over every level up to the supremum
        parts = block_map(_brownian_sup_block, replicas, rng, f.dual(), horizon, dt, edges,
                          workers=workers)
        s1 = sum(p[0] for p in parts)
        s2 = sum(p[1] for p in parts)
        return _histogram(edges, s1, s2, replicas, "drift", 0.0)
    raise DomainError(f"no potential-measure rule for {type(f).__name__}")


def _laplace_down(g, th):
    """``E exp(th J)`` for the (downward) jump law of ``g``, ``J <= 0``."""
    return g.measure.minus.law.laplace(th)


def _brownian_sup_block(n, rng, g, horizon, dt, edges):
    steps = int(round(horizon / dt))
    S = np.zeros(n)
    X = np.zeros(n)
    for _ in range(steps):
        X += g.sample(dt, n, rng)
        np.maximum(S, X, out=S)
    cov = np.clip(edges[None, :], 0.0, S[:, None])
    per = np.diff(cov, axis=1)
    return per.sum(0), (per ** 2).sum(0)


def _histogram(edges, s1, s2, n, norm, atom):
    mean = s1 / n
    var = np.maximum(s2 / n - mean ** 2, 0.0)
    se = np.sqrt(var / n)
    total = atom + float(mean.sum())
    return PotentialMeasure("histogram", norm, edges, mean, se, total,
                            float(np.sqrt(np.sum(var) / n)), atom0=atom, replicas=n)


# --------------------------------------------------------------------------
# first ascending ladder height of a compound Poisson process


BATCH = 1000  # paths per batch; batch means give the standard errors


@dataclass
class LadderHeightSample:
    """First strict ascending ladder height ``Z`` of a compound Poisson family
    with drift ``<= 0``, with a conditional-expectation estimator.

    Each jump from pre-jump depth ``d = -X >= 0`` crosses above ``x`` with
    probability ``Pi+(x + d) / rate``; summing these over the jumps before the
    first passage above 0 estimates ``P(Z > x, Z < inf)`` without waiting for
    rare exceedances.  Paths are stopped at depth ``level_cap``; the remaining
    contribution is approximated by the renewal estimate
    ``Pi+_I(x + d_stop) / |E xi_1|``.
    """

    family: CompoundPoissonDrift
    depth_edges: np.ndarray
    counts: np.ndarray  # (batches, bins) pre-jump depth counts
    sums: np.ndarray  # (batches, bins) sums of pre-jump depths
    stop_depths: list  # per batch, depths at which capped paths were stopped
    batch_sizes: np.ndarray
    heights: np.ndarray  # realised finite ladder heights
    level_cap: float
    visit_rate: float = None  # pre-passage visits per unit depth far below 0

    @property
    def n(self):
        return int(self.batch_sizes.sum())

    @property
    def n_capped(self):
        return int(sum(len(s) for s in self.stop_depths))

    def _centers(self):
        with np.errstate(invalid="ignore", divide="ignore"):
            c = self.sums / self.counts
        mid = 0.5 * (self.depth_edges[:-1] + self.depth_edges[1:])
        return np.where(self.counts > 0, c, mid[None, :])

    def expect(self, kernel, kernel_tail=None):
        """Estimate ``E sum_jumps kernel(d)`` (value, stderr).

        ``kernel(d)`` is the expected contribution of one jump from depth ``d``;
        ``kernel_tail(d0)`` is ``int_{d0}^inf kernel(u) du`` for the capped
        remainder (by quadrature when omitted); it is called on arrays when it
        carries ``vectorized = True``.
        """
        f = self.family
        scale = self.visit_rate if self.visit_rate is not None else f.rate / abs(f.mean)
        c = self._centers()
        per_batch = np.sum(self.counts * kernel(c), axis=1)
        if self.n_capped:
            if kernel_tail is None:
                from scipy import integrate

                def kernel_tail(d0):
                    return integrate.quad(lambda u: float(kernel(np.array(u))), d0, np.inf,
                                          limit=200)[0]
            if getattr(kernel_tail, "vectorized", False):
                total = lambda ds: float(np.sum(kernel_tail(np.asarray(ds, dtype=float))))  # noqa: E731
            else:
                cached = functools.lru_cache(maxsize=None)(kernel_tail)
                total = lambda ds: sum(cached(d) for d in _dedupe(ds))  # noqa: E731
            for b, depths in enumerate(self.stop_depths):
                if len(depths):
                    per_batch[b] += scale * total(depths)
        means = per_batch / self.batch_sizes
        value = float(per_batch.sum() / self.n)
        if len(means) > 1:
            w = self.batch_sizes / self.n
            se = float(np.sqrt(np.sum(w ** 2 * (means - value) ** 2) * len(means) / (len(means) - 1)))
        else:
            se = math.nan
        return value, se

    def tail(self, x):
        """``P(Z > x, Z < inf)`` (value, stderr)."""
        m = self.family.measure
        rate = self.family.rate
        from .measures import integrated_tail

        return self.expect(lambda d: m.right_tail(x + d) / rate,
                           lambda d0: integrated_tail(m, x + d0) / rate)

    def window(self, x, z):
        """``P(x < Z <= x + z)`` (value, stderr)."""
        m = self.family.measure
        rate = self.family.rate
        from .measures import integrated_tail

        return self.expect(lambda d: (m.right_tail(x + d) - m.right_tail(x + z + d)) / rate,
                           lambda d0: (integrated_tail(m, x + d0) - integrated_tail(m, x + z + d0)) / rate)

    def exceedances(self, x):
        return int(np.sum(self.heights > x))


def _dedupe(depths):
    # capped paths stop on the cap by drift unless a downward jump overshoots it
    vals, cnt = np.unique(np.round(np.asarray(depths), 9), return_counts=True)
    for v, k in zip(vals, cnt):
        for _ in range(k):
            yield float(v)


def _ladder_block(n, rng, f: CompoundPoissonDrift, D, edges, batch):
    nb = -(-n // batch)
    nbins = len(edges) - 1
    counts = np.zeros(nb * nbins)
    sums = np.zeros(nb * nbins)
    stops = [[] for _ in range(nb)]
    heights = []
    X = np.zeros(n)
    act = np.arange(n)
    while act.size:
        w = rng.exponential(1.0 / f.rate, act.size)
        x = X[act] + f.drift * w
        cap = x < -D
        for i, xi, x0 in zip(act[cap], x[cap], X[act][cap]):
            stops[i // batch].append(D if x0 >= -D else -x0)
        act, x = act[~cap], x[~cap]
        d = -x
        k = np.clip(np.searchsorted(edges, d, side="right") - 1, 0, nbins - 1)
        idx = (act // batch) * nbins + k
        counts += np.bincount(idx, minlength=counts.size)
        sums += np.bincount(idx, weights=d, minlength=sums.size)
        x = x + f.measure.sample_jumps(rng, act.size)
        up = x > 0
        heights.append(x[up])
        X[act] = x
        act = act[~up]
    sizes = np.full(nb, batch)
    sizes[-1] = n - batch * (nb - 1)
    return counts.reshape(nb, nbins), sums.reshape(nb, nbins), stops, sizes, np.concatenate(heights)


def ladder_height_sample(f: CompoundPoissonDrift, n: int, rng=None, level_cap: float = 1e3,
                         workers: int = 1) -> LadderHeightSample:
    if not isinstance(f, CompoundPoissonDrift):
        raise DomainError("ladder height sampling needs a compound Poisson family")
    if f.drift > 0:
        raise PreconditionError("the ladder height sampler needs drift <= 0 (no creeping)")
    if not f.mean < 0:
        raise PreconditionError("the capped estimator needs E xi_1 < 0")
    rng = make_rng(rng)
    edges = np.concatenate([[0.0], np.geomspace(1e-4, level_cap * (1 + 1e-9), 281)])
    parts = block_map(_ladder_block, n, rng, f, level_cap, edges, BATCH, workers=workers)
    return LadderHeightSample(
        f, edges,
        np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts]),
        [s for p in parts for s in p[2]], np.concatenate([p[3] for p in parts]),
        np.concatenate([p[4] for p in parts]), level_cap)
