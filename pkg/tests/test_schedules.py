import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from discround.baselines import brute_force_best
from discround.matroid import GraphicMatroid, PartitionMatroid, UniformMatroid
from discround.schedules import (
    COMPLETION_LIMIT,
    PARTS,
    ScheduleParams,
    assign_parts,
    degmat,
    heavy_elements,
    l_scale,
    lambda_for,
    laminar_rsp,
    menu_values,
    multicrit,
    round_full,
    rsp,
    rsp_reduce,
)
from discround.walk import UNBOUNDED, WalkConfig

from conftest import K4, bases_of, mix_of_bases


def _label(menu):
    return PARTS[int(np.argmin(menu))]


def test_menu_example_m1():
    lab = assign_parts([1e4], 100, 100, 100)[0]
    assert lab.part == "M1"
    assert lab.menu[0] == 1 and abs(lab.menu[1] - 10.48) < 0.01 and abs(lab.menu[3] - 46.05) < 0.01
    assert lab.menu[2] > 700


def test_menu_example_m4():
    n, m = 100, 10 ** 6
    menu = menu_values(m, n, m, 1, 2, l_scale(n, m))
    assert _label(menu) == "M4"


def test_menu_example_large_b():
    n = m = 50
    labels = assign_parts([n * n] * m, n, m, 10)
    for j, lab in enumerate(labels, start=1):
        if j <= n * math.log(3):
            assert lab.part == "M1"


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0, 1e4), min_size=1, max_size=20), st.integers(2, 500), st.integers(1, 50))
def test_assign_parts_is_argmin_and_pure(b, n, delta):
    a1 = assign_parts(b, n, len(b), delta)
    a2 = assign_parts(list(b), n, len(b), delta)
    assert a1 == a2
    for lab in a1:
        assert lab.part == PARTS[lab.menu.index(min(lab.menu))]


def test_schedule_params_validation():
    with pytest.raises(ValueError):
        ScheduleParams(c1=0.01)
    with pytest.raises(ValueError):
        ScheduleParams(c2=1.0).resolved(10)


def test_lambda_examples():
    p = ScheduleParams()
    f = 1000
    assert lambda_for("M1", int(p.c1 * f), f, 1, 1, p) == 0
    j = math.e * p.c1 * f
    assert abs(lambda_for("M1", j, f, 1, 1, p, k0=10) - math.sqrt(20)) < 1e-12
    assert lambda_for("M3", 7, f, 1, 1, p) == UNBOUNDED
    assert abs(lambda_for("M4", 3, f, 1, 9, p, delta=9, k0=10) - math.sqrt(40)) < 1e-12


def test_round_full_integral_fixed_point():
    x, rep = round_full([1.0, 0.0, 1.0], np.ones((1, 3)))
    assert list(x) == [1, 0, 1] and rep.max_violation == 0


def test_round_full_cardinality_row():
    best, _ = brute_force_best(np.ones((1, 10)), [5])
    assert best == 0
    for s in range(5):
        x, rep = round_full([0.5] * 10, np.ones((1, 10)), [5], seed=s)
        assert set(x) <= {0.0, 1.0}
        assert rep.rows[0].violation >= best
        assert rep.rows[0].violation <= rep.rows[0].bound_min * 25


def test_m3_targets_are_bumped_to_l():
    # large n with few, low-b rows: sqrt(L b)+L beats the other terms only when L is small
    n, m = 4096, 4096
    big_l = l_scale(n, m)
    labels = assign_parts([big_l * 4] * 3, n, m, 4096)
    assert all(l.part in PARTS for l in labels)
    menu = menu_values(4000, n, m, 1, 4096, big_l)
    assert menu[2] == math.sqrt(big_l) + big_l


def test_round_full_iterations_pass_lambda_condition():
    rng = np.random.default_rng(3)
    n, m = 96, 96
    a = rng.integers(0, 2, (m, n)).astype(float)
    y = rng.uniform(0.05, 0.95, n)
    x, rep = round_full(y, a, seed=4)
    assert rep.meta["iterations"] >= 1
    for it in rep.meta["iteration_log"]:
        assert it["lambda_sum"] < it["f"] / 16
        if it["f"] > COMPLETION_LIMIT:
            assert it["newly_integral"] >= 1
    assert set(x) <= {0.0, 1.0}


def test_round_full_with_matroid_returns_base():
    pm = PartitionMatroid(60, tuple(tuple(range(3 * i, 3 * i + 3)) for i in range(20)), (1,) * 20)
    rng = np.random.default_rng(0)
    y = np.zeros(60)
    for i in range(20):
        y[3 * i:3 * i + 3] = rng.dirichlet(np.ones(3))
    a = rng.integers(0, 2, (10, 60)).astype(float)
    x, rep = round_full(y, a, structure=pm, base=True, seed=1)
    sel = np.flatnonzero(x)
    assert pm.is_independent(sel) and len(sel) == 20


# -- degmat ----------------------------------------------------------------------------

def test_degmat_integral_input():
    pm = PartitionMatroid(2, ((0, 1),), (1,))
    res = degmat([1, 2], [[1, 1]], [1], pm, [1.0, 0.0])
    assert res.base == frozenset({0}) and res.cost == 1 and res.violations[0] == 0


def test_degmat_half_half():
    pm = PartitionMatroid(2, ((0, 1),), (1,))
    res = degmat([1, 2], [[1, 1]], [1], pm, [0.5, 0.5])
    assert res.base == frozenset({0}) and res.cost == 1 <= 1.5
    assert sorted((tuple(b), round(w, 9)) for b, w in res.decomposition) == [((0,), 0.5), ((1,), 0.5)]


def test_degmat_cost_drift_over_full_run():
    n_parts = 30
    pm = PartitionMatroid(3 * n_parts, tuple(tuple(range(3 * i, 3 * i + 3)) for i in range(n_parts)), (1,) * n_parts)
    rng = np.random.default_rng(7)
    y = np.concatenate([rng.dirichlet(np.ones(3)) for _ in range(n_parts)])
    d = rng.integers(0, 20, 3 * n_parts)
    a = rng.integers(0, 2, (8, 3 * n_parts)).astype(float)
    res = degmat(d, a, np.ceil(a @ y), pm, y, seed=2)
    assert res.report.meta["iterations"] >= 1
    assert res.report.meta["cost_drift"] < 1
    assert res.cost <= d @ y + 1
    assert pm.is_independent(res.base) and len(res.base) == n_parts


def test_degmat_rejects_point_outside_base_polytope():
    from discround.walk import PreconditionError
    with pytest.raises(PreconditionError):
        degmat([1, 1, 1], None, None, GraphicMatroid(((0, 1), (1, 2), (0, 2))), [0.5, 0.5, 0.5])


# -- multicrit ----------------------------------------------------------------------------

def test_multicrit_pure_enumeration():
    res = multicrit(UniformMatroid(2, 1), [[5, 6]], [6], 0.5)
    assert heavy_elements([[5, 6]], [6], 0.5) == [0, 1]
    assert res.status == "OK" and res.base == frozenset({0})


def test_multicrit_zero_costs():
    res = multicrit(K4, np.zeros((2, 6)), [1, 1], 0.5)
    assert res.status == "OK" and K4.is_independent(res.base) and len(res.base) == 3 and res.branches == 0


def test_multicrit_planted_unique_basis():
    pm = PartitionMatroid(6, ((0, 1), (2, 3), (4, 5)), (1, 1, 1))
    costs = np.array([[1, 5, 1, 5, 1, 5], [5, 1, 5, 1, 5, 1]], dtype=float)
    costs[1, [0, 2, 4]] = [1, 1, 1]
    planted = [0, 2, 4]
    budgets = costs[:, planted].sum(axis=1)
    res = multicrit(pm, costs, budgets, 0.25)
    assert res.status == "OK" and res.base == frozenset(planted)
    assert np.all(res.costs <= budgets)


def test_multicrit_infeasible():
    res = multicrit(UniformMatroid(2, 1), [[5, 6]], [4], 0.5)
    assert res.status == "INFEASIBLE"


# -- paths ------------------------------------------------------------------------------------

def test_rsp_reduce_disjoint():
    inst = rsp_reduce([[(["a", "b"], 0.5), (["c", "d"], 0.5)]], {})
    assert inst.matroid.parts == ((0, 1),)
    assert (inst.a.sum(axis=1) == 1).all()
    assert inst.delta == 2


def test_rsp_reduce_shared_edge():
    inst = rsp_reduce([[(["e", "x"], 0.5), (["e", "y"], 0.5)]], {"e": 1})
    row = inst.a[inst.edges.index("e")]
    assert list(row) == [1, 1]


def test_rsp_reduce_rejects_empty_pair():
    with pytest.raises(ValueError):
        rsp_reduce([[]], {})


def test_rsp_capacity_respected_up_to_bound():
    pairs = [[(["s1", "e"], 0.5), (["s1", "f"], 0.5)], [(["s2", "e"], 0.5), (["s2", "g"], 0.5)]]
    res = rsp(pairs, {"e": 1, "f": 1, "g": 1})
    assert set(res.chosen) == {0, 1}
    row = next(r for r in res.report.rows if r.constraint_id == 0)
    assert res.loads["e"] <= 1 + row.bound_min * 25


def test_laminar_rsp_single_set():
    pairs = [[(["a"], 0.5), (["b"], 0.5)], [(["c"], 0.5), (["d"], 0.5)]]
    res = laminar_rsp(pairs, [([0, 1], 2)], {})
    assert res.requirements_met
    assert sum(c for p in res.counts.values() for _, c in p) >= 2


def test_laminar_rsp_nested_exact_counts():
    pairs = [[(["a"], 0.5), (["b"], 0.5)], [(["c"], 0.6), (["d"], 0.4)], [(["e"], 0.3), (["f"], 0.7)]]
    for s in range(5):
        res = laminar_rsp(pairs, [([0], 1), ([0, 1, 2], 3)], {}, seed=s)
        assert res.requirements_met
        assert sum(c for _, c in res.counts[0]) >= 1


def test_laminar_rsp_integral_passthrough():
    pairs = [[(["a"], 2)], [(["b"], 1)]]
    res = laminar_rsp(pairs, [([0, 1], 3)], {"a": 2})
    assert res.counts == {0: [(["a"], 2)], 1: [(["b"], 1)]}
    assert res.loads == {"a": 2.0, "b": 1.0}


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_multicrit_returns_full_bases(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 14))
    m = UniformMatroid(n, int(rng.integers(1, 4)))
    costs = rng.integers(0, 10, (2, n)).astype(float)
    planted = list(rng.choice(n, m.full_rank, replace=False))
    budgets = np.maximum(costs[:, planted].sum(axis=1), 1.0)
    res = multicrit(m, costs, budgets, 0.5, seed=seed)
    assert res.status != "INFEASIBLE"
    assert len(res.base) == m.full_rank
