import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ladderlab.errors import DomainError, PreconditionError
from ladderlab.measures import Atom, Exponential, Pareto, compound_poisson
from ladderlab.models import BrownianDrift, CompoundPoissonDrift, Stable, pure_drift
from ladderlab.simulate import (Path, extract_ladders, first_passage, first_passages, ladder_height_sample,
                                potential_measure_dual, sample_path)

CL = CompoundPoissonDrift(compound_poisson(1.0, Exponential(2.0)), drift=-1.0)


def test_pure_drift_path():
    p = sample_path(pure_drift(1.0), 2.0, 1.0, np.random.default_rng(0))
    assert p.values.tolist() == [0.0, 1.0, 2.0]


def test_compound_poisson_jump_count():
    f = CompoundPoissonDrift(compound_poisson(1.0, Atom(1.0)))
    p = sample_path(f, 1e4, 1.0, np.random.default_rng(1))
    assert abs(p.values[-1] - 1e4) < 3 * math.sqrt(1e4)


def test_merged_events_include_jump_times():
    f = CompoundPoissonDrift(compound_poisson(1.0, Atom(1.0)), drift=-0.5)
    p = sample_path(f, 20.0, 1.0, np.random.default_rng(2), merge_events=True)
    assert len(p.times) > 21
    assert np.all(np.diff(p.times) > 0)


def test_sample_path_rejects_bad_grid():
    with pytest.raises(PreconditionError):
        sample_path(pure_drift(1.0), 1.0, 0.0, 0)


def test_path_length_mismatch():
    with pytest.raises(ValueError):
        Path([0.0, 1.0], [0.0])


def test_ladders_increasing_path():
    p = Path(np.arange(5.0), np.arange(5.0) ** 2)
    assert len(extract_ladders(p).heights) == 5


def test_ladders_decreasing_path():
    lad = extract_ladders(Path(np.arange(5.0), -np.arange(5.0)))
    assert lad.epochs.tolist() == [0.0] and lad.heights.tolist() == [0.0]


def test_ladders_pure_drift():
    lad = extract_ladders(sample_path(pure_drift(1.0), 10.0, 0.5, 0))
    assert np.allclose(lad.heights, lad.epochs)


@given(st.lists(st.floats(-10, 10), min_size=1, max_size=50))
def test_ladder_heights_strictly_increase(values):
    lad = extract_ladders(Path(np.arange(len(values), dtype=float), values))
    assert np.all(np.diff(lad.heights) > 0)
    assert lad.heights[-1] == max(values)


def test_first_passage_pure_drift():
    rec = first_passage(pure_drift(1.0), 2.0, 0.1, math.inf, 0)
    assert (rec.T_r, rec.overshoot, rec.undershoot, rec.prior_sup) == (2.0, 0.0, 0.0, 2.0)


def test_first_passage_unit_jumps():
    f = CompoundPoissonDrift(compound_poisson(1.0, Atom(1.0)))
    recs = first_passages(f, 0.5, 10_000, np.random.default_rng(3))
    assert np.all(recs.O == 0.5)
    assert abs(recs.T.mean() - 1.0) < 3 / math.sqrt(10_000)


def test_first_passage_not_passed_when_capped():
    f = CompoundPoissonDrift(compound_poisson(1.0, Exponential(1.0)), drift=-5.0)
    recs = first_passages(f, 50.0, 200, np.random.default_rng(4), t_cap=1.0)
    assert recs.n_not_passed > 0 and np.all(np.isnan(recs.T[~recs.passed]))


@settings(max_examples=15)
@given(rate=st.floats(0.5, 3.0), drift=st.floats(-1.0, 2.0), p_up=st.floats(0.3, 1.0),
       r=st.floats(0.1, 20.0))
def test_passage_record_geometry(rate, drift, p_up, r):
    f = CompoundPoissonDrift(compound_poisson(rate, Exponential(1.0), Pareto(2.0), p_up), drift)
    recs = first_passages(f, r, 200, np.random.default_rng(5), t_cap=1e3)
    ok = recs.passed
    assert np.all(recs.O[ok] >= 0)
    assert np.all(recs.prior_sup[ok] <= r + 1e-12)
    assert np.all(recs.U[ok] >= -1e-12)
    assert np.all(recs.T[ok] > 0)


def test_cauchy_passage_on_grid():
    recs = first_passages(Stable(1.0), 10.0, 500, np.random.default_rng(6), dt=1e-2)
    assert recs.n_passed == 500 and recs.flag == "grid"


def test_first_passages_worker_invariance():
    f = CompoundPoissonDrift(compound_poisson(1.0, Exponential(1.0), Pareto(3.0), 0.6), 0.2)
    a = first_passages(f, 5.0, 60_000, np.random.default_rng(7), workers=1)
    b = first_passages(f, 5.0, 60_000, np.random.default_rng(7), workers=3)
    assert np.array_equal(a.T, b.T, equal_nan=True) and np.array_equal(a.O, b.O, equal_nan=True)


def test_potential_measure_pure_drift_dual():
    V = potential_measure_dual(pure_drift(-1.0), 1.0, 0.1, 1)
    assert float(V.density(3.0)) == 1.0


def test_potential_measure_brownian_flat():
    V = potential_measure_dual(BrownianDrift(-1.0, 1.0), 40.0, 0.01, 2000, np.random.default_rng(8),
                               edges=np.linspace(0, 10, 11))
    d = V.masses / np.diff(V.edges)
    # grid monitoring misses a little of the supremum; flat near 1 away from 0
    assert np.all(np.abs(d[2:] - 1.0) < 0.08)
    assert np.ptp(d[2:]) < 0.08


def test_potential_measure_cramer_lundberg_simulated_vs_closed():
    V_cf = potential_measure_dual(CL, 1.0, 0.0, 1)
    V = potential_measure_dual(CL, 100.0, 0.0, 5000, np.random.default_rng(9), closed_form=False)
    assert V.kind == "histogram" and V_cf.kind == "closed_form"
    assert V.mass(0.0, 5.0) == pytest.approx(V_cf.mass(0.0, 5.0), rel=0.05)


def test_potential_measure_stable_closed_form():
    V = potential_measure_dual(Stable(1.5), 1.0, 0.0, 1)
    g = 0.75
    assert V.mass(0.0, 2.0) == pytest.approx(2.0 ** g / math.gamma(g + 1), rel=1e-6)


def test_potential_measure_rejects_zero_replicas():
    with pytest.raises(PreconditionError):
        potential_measure_dual(CL, 1.0, 0.0, 0)


def test_ladder_height_tail_cramer_lundberg():
    # ruin probability rate E J / c = 1/2; ladder law given finite is Exp(2)
    s = ladder_height_sample(CL, 20_000, np.random.default_rng(10))
    for x in (0.0, 0.5, 1.5):
        v, se = s.tail(x)
        assert abs(v - 0.5 * math.exp(-2 * x)) < max(4 * se, 1e-3)


def test_ladder_height_window_cramer_lundberg():
    s = ladder_height_sample(CL, 20_000, np.random.default_rng(11))
    v, se = s.window(0.5, 1.0)
    assert abs(v - 0.5 * (math.exp(-1.0) - math.exp(-3.0))) < max(4 * se, 1e-3)


def test_ladder_height_preconditions():
    with pytest.raises(DomainError):
        ladder_height_sample(Stable(1.5), 10)
    with pytest.raises(PreconditionError):
        ladder_height_sample(CompoundPoissonDrift(compound_poisson(1.0, Exponential(1.0)), 1.0), 10)
    with pytest.raises(PreconditionError):
        ladder_height_sample(CompoundPoissonDrift(compound_poisson(1.0, Exponential(1.0)), -0.5), 10)


def test_first_passage_requires_cap_when_drifting_down():
    f = CompoundPoissonDrift(compound_poisson(1.0, Exponential(1.0)), drift=-2.0)
    with pytest.raises(PreconditionError):
        first_passages(f, 1.0, 10, 0)
    with pytest.raises(PreconditionError):
        first_passages(BrownianDrift(-1.0, 1.0), 1.0, 10, 0)
