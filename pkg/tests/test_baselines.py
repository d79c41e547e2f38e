import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from discround.baselines import ViolationProfile, brute_force_best, iterated_round, randomized_round
from discround.matroid import GraphicMatroid

from conftest import bases_of


def test_randomized_round_integral_input():
    assert list(randomized_round([1, 0, 1], seed=3)) == [1, 0, 1]


def test_randomized_round_mean():
    xs = [randomized_round([0.5], seed=s)[0] for s in range(10_000)]
    assert abs(np.mean(xs) - 0.5) <= 0.02


def test_randomized_round_marginals():
    y = np.array([0.1, 0.5, 0.9, 0.03])
    n = 4000
    xs = np.array([randomized_round(y, seed=s) for s in range(n)])
    assert np.all(np.abs(xs.mean(axis=0) - y) <= 4 * np.sqrt(y * (1 - y) / n))


def test_randomized_round_chernoff():
    rng = np.random.default_rng(0)
    y = rng.uniform(0, 1, 100)
    b = y.sum()
    assert b >= 25
    ok = sum(abs(randomized_round(y, seed=s).sum() - b) <= 4 * math.sqrt(b) for s in range(1000))
    assert ok >= 990


def test_iterated_round_example():
    x, dropped = iterated_round([0.5, 0.5], [[1, 1]])
    assert tuple(x) in ((1, 0), (0, 1)) and x.sum() == 1 and dropped == []


def test_iterated_round_integral_unchanged():
    x, _ = iterated_round([1.0, 0.0], [[1, 1]])
    assert list(x) == [1, 0]


def test_iterated_round_no_constraints_rounds_nearest():
    x, _ = iterated_round([0.3, 0.7, 0.5, 0.49])
    # with no rows the null space is everything, so the walk reaches faces first
    assert set(x) <= {0.0, 1.0}
    x2, _ = iterated_round([0.3, 0.7], np.zeros((0, 2)))
    assert set(x2) <= {0.0, 1.0}


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_iterated_round_live_rows_exact(seed):
    rng = np.random.default_rng(seed)
    n, m = 14, 5
    a = rng.integers(0, 2, (m, n)).astype(float)
    y = rng.uniform(0, 1, n)
    x, dropped = iterated_round(y, a)
    assert set(x) <= {0.0, 1.0}
    live = [j for j in range(m) if j not in dropped]
    for j in live:
        assert abs(a[j] @ x - a[j] @ y) <= 1e-8 * np.linalg.norm(a[j])
    assert len(dropped) <= m


def test_brute_force_examples():
    assert brute_force_best([[1, 1]], [1])[0] == 0
    assert brute_force_best([[1]], [0.5])[0] == 0.5


def test_brute_force_triangle_bases():
    gm = GraphicMatroid(((0, 1), (1, 2), (0, 2)))
    a = np.array([[1, 0, 1], [1, 1, 0], [0, 1, 1]], dtype=float)  # vertex degrees
    b = np.array([1, 1, 1])
    best, wit = brute_force_best(a, b, gm)
    manual = min(np.max(np.abs(a @ np.isin(range(3), t).astype(float) - b)) for t in bases_of(gm))
    assert best == manual == 1
    assert gm.is_independent(np.flatnonzero(wit))


def test_brute_force_limit():
    with pytest.raises(ValueError):
        brute_force_best(np.ones((1, 23)), [1])


def test_violation_profile():
    p = ViolationProfile.of([[1, 1], [1, 0]], [1, 0], [1, 1], bounds=[2, 1])
    assert list(p.violations) == [1, 1] and p.max == 1 and list(p.normalized) == [0.5, 1]
