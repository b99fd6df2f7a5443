import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ladderlab.errors import PreconditionError, WindowTooNarrowError
from ladderlab.measures import Pareto, compound_poisson
from ladderlab.models import BrownianDrift, CompoundPoissonDrift, Stable
from ladderlab.sinai import (passage_scale, sinai_functional, sinai_functionals, sinai_index,
                             stable_sinai_exact, write_csv)


def test_exact_values():
    assert stable_sinai_exact(1.5, 0.5, 2.0) == pytest.approx(0.51986, abs=1e-5)
    assert stable_sinai_exact(0.3, 0.9, 1.0) == 0.0
    assert stable_sinai_exact(1.0, 0.5, math.e) == pytest.approx(0.5)


def test_exact_rejects_lambda():
    with pytest.raises(PreconditionError):
        stable_sinai_exact(1.0, 0.5, 0.0)


def test_stable_functional():
    e = sinai_functional(Stable(1.5), 100.0, 2.0, replicas=20_000, rng=np.random.default_rng(1))
    assert abs(e.value - 0.75 * math.log(2)) < max(4 * e.stderr, 0.02)


def test_lambda_one_is_zero():
    assert sinai_functional(Stable(1.5), 10.0, 1.0).value == 0.0


def test_brownian_functional():
    e = sinai_functional(BrownianDrift(0.0, 1.0), 100.0, math.e, replicas=20_000,
                         rng=np.random.default_rng(2))
    assert abs(e.value - 1.0) < max(4 * e.stderr, 0.03)


def test_narrow_window_detected():
    with pytest.raises(WindowTooNarrowError):
        sinai_functional(Stable(1.5), 10.0, 2.0, replicas=2000, rng=0, window=(0.5, 2.0))


def test_rejects_bad_arguments():
    with pytest.raises(PreconditionError):
        sinai_functionals(Stable(1.5), 0.0, [2.0])
    with pytest.raises(PreconditionError):
        sinai_functionals(Stable(1.5), 1.0, [0.5])


@settings(max_examples=10)
@given(lams=st.lists(st.floats(1.0, 20.0), min_size=2, max_size=4))
def test_functional_monotone_in_lambda(lams):
    lams = sorted(lams)
    est = sinai_functionals(Stable(1.2), 10.0, lams, replicas=2000, rng=np.random.default_rng(3),
                            check_window=False)
    vals = [e.value for e in est]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    assert all(v >= 0 for v in vals)


def test_passage_scale_stable_median():
    f = Stable(1.5)
    t = passage_scale(f, 10.0)
    x = f.sample(t, 100_000, np.random.default_rng(4))
    assert np.median(np.abs(x)) == pytest.approx(10.0, rel=0.02)


def test_passage_scale_monte_carlo():
    f = CompoundPoissonDrift(compound_poisson(1.0, Pareto(0.7), p_up=0.5))
    t = passage_scale(f, 100.0, np.random.default_rng(5))
    x = f.sample(t, 20_000, np.random.default_rng(6))
    assert np.median(np.abs(x)) == pytest.approx(100.0, rel=0.15)


def test_index_cauchy():
    r = sinai_index(Stable(1.0), z_schedule=[1e2, 1e3], replicas=20_000, rng=7)
    assert r.beta == pytest.approx(0.5, abs=0.05) and r.in_unit_interval


def test_index_one_sided_stable():
    r = sinai_index(Stable(0.5, 1.0, 1.0), z_schedule=[1e2, 1e3], replicas=20_000, rng=8)
    assert r.beta == pytest.approx(0.5, abs=0.05)


def test_index_brownian_at_zero():
    r = sinai_index(BrownianDrift(1.0, 1.0), "at_zero", z_schedule=[1e-2, 1e-3], replicas=20_000, rng=9)
    assert r.beta == pytest.approx(1.0, abs=0.05)


def test_index_rejects_schedule():
    with pytest.raises(PreconditionError):
        sinai_index(Stable(1.0), z_schedule=[1e3, 1e2])
    with pytest.raises(PreconditionError):
        sinai_index(Stable(1.0), lam_set=(2, 4))
    with pytest.raises(PreconditionError):
        sinai_index(Stable(1.0), "sideways")


def test_index_worker_invariance():
    a = sinai_index(Stable(1.5), z_schedule=[10.0, 100.0], replicas=30_000, rng=10, workers=1)
    b = sinai_index(Stable(1.5), z_schedule=[10.0, 100.0], replicas=30_000, rng=10, workers=2)
    assert a.by_z == b.by_z


def test_write_csv(tmp_path):
    est = sinai_functionals(Stable(1.5), 10.0, [2.0, 4.0], replicas=2000, rng=11)
    p = tmp_path / "s.csv"
    write_csv(est, p)
    rows = list(csv.reader(open(p)))
    assert rows[0] == ["z", "lambda", "value", "stderr", "t_min", "t_max"]
    assert float(rows[2][1]) == 4.0 and len(rows) == 3
