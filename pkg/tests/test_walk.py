import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from discround.matroid import GraphicMatroid, PartitionMatroid, UniformMatroid, separate
from discround.walk import (
    UNBOUNDED,
    PreconditionError,
    RoundingWalk,
    SideConstraint,
    WalkConfig,
    WalkTerminated,
    build_polytope,
    check_lambda_condition,
    classify_scales,
    default_levels,
    partial_round,
    potential,
    restart_streams,
)

from conftest import TRIANGLE


# -- scale classes ------------------------------------------------------------

def test_classify_example():
    c = classify_scales([0.5, 0.3, 0.9, 0.05])
    assert c.labels() == ["U1", "U1", "V3", "U4"]
    assert np.allclose(c.scale, [0.5, 0.5, 0.125, 0.0625])


def test_classify_integral_frozen():
    c = classify_scales([1.0, 0.0])
    assert c.frozen.all() and c.labels() == [None, None]


def test_classify_bottom_bucket():
    n = 8
    ell = default_levels(n)
    c = classify_scales([2.0 ** -ell / 2] + [0.5] * (n - 1))
    assert c.level[0] == ell and c.scale[0] == 2.0 ** -ell


def test_classify_rejects_out_of_range():
    with pytest.raises(ValueError, match="coordinate 1"):
        classify_scales([0.2, 1.5])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=1, max_size=30))
def test_class_membership_predicates(raw):
    y = np.array(raw)
    c = classify_scales(y)
    for i, v in enumerate(y):
        if v in (0.0, 1.0):
            assert c.side[i] == 0
            continue
        k = int(c.level[i])
        dist = v if c.side[i] > 0 else 1 - v
        assert c.side[i] == (1 if v <= 0.5 else -1)
        if k < c.ell:
            assert 2.0 ** (-k - 1) < dist <= 2.0 ** -k
        else:
            assert dist <= 2.0 ** -k
        assert c.scale[i] == 2.0 ** -k


# -- lambda condition -----------------------------------------------------------

def test_lambda_condition_examples():
    assert check_lambda_condition([0.0] * 9, 160, 10)
    assert not check_lambda_condition([0.0] * 11, 160, 10)
    assert check_lambda_condition([UNBOUNDED] * 50, 3, 10)


# -- config ----------------------------------------------------------------------

def test_config_presets_and_validation():
    p = WalkConfig.practical()
    assert (p.alpha, p.gamma, p.steps, p.k0, p.slack_exp) == (4.0, 0.04, 100_000, 10.0, 3.0)
    q = WalkConfig.paper(4)
    assert q.alpha == 40 and q.gamma == 4.0 ** -6 and q.steps == int(10 * 40 ** 2 / q.gamma ** 2)
    for bad in ({"alpha": 1.5}, {"gamma": 0}, {"restarts": 0}, {"stop_fraction": 0}, {"k0": -1}):
        with pytest.raises(ValueError):
            WalkConfig(**bad)


# -- polytope --------------------------------------------------------------------

def test_polytope_two_coordinates():
    q = build_polytope([0.5, 0.5], cfg=WalkConfig(alpha=2))
    assert np.allclose(q.lower, 0) and np.allclose(q.upper, 1)
    assert q.class_rows.shape[0] == 2 * default_levels(2)
    assert np.allclose(q.class_rows[0], [1, 1]) and q.class_rhs[0] == 1
    assert q.constraint_count == 0 + 0 + 2 * default_levels(2) + 4


def test_polytope_caps():
    q = build_polytope([0.25, 0.25], cfg=WalkConfig(alpha=2))
    assert np.allclose(q.upper, 0.5)


def test_polytope_band_width():
    q = build_polytope([0.5, 0.5], [SideConstraint([1, 1], 1.0)], cfg=WalkConfig())
    assert abs(q.side_width[0] - (math.sqrt(0.5) + math.sqrt(2) / 8)) < 1e-12
    assert q.w_scale[0] == 0.5


def test_polytope_lambda_capped_at_n():
    q = build_polytope([0.5, 0.5], [SideConstraint([1, 1], 50.0)])
    assert q.side_lambda[0] == 2


def test_polytope_rejects_infeasible_structure():
    with pytest.raises(PreconditionError):
        build_polytope([0.9, 0.9, 0.9], structure=TRIANGLE)


# -- direction and truncation ----------------------------------------------------

def _walk(y, side=None, structure=None, cfg=None, seed=0, base=False):
    cfg = cfg or WalkConfig()
    q = build_polytope(y, side, structure, cfg, base=base)
    return RoundingWalk(q, cfg, restart_streams(seed, 1)[0])


def test_direction_two_coordinates():
    w = _walk([0.5, 0.5])
    g = w.direction()
    assert np.allclose(np.abs(g), 0.5 / math.sqrt(2)) and abs(g.sum()) < 1e-15


def test_direction_all_frozen_terminates():
    w = _walk([1.0, 0.0])
    assert w.dim == 0
    with pytest.raises(WalkTerminated):
        w.direction()


def test_direction_mean_is_zero():
    w = _walk(np.linspace(0.1, 0.9, 12))
    draws = np.array([w.direction() for _ in range(10_000)])
    se = draws.std(axis=0) / math.sqrt(len(draws))
    assert np.all(np.abs(draws.mean(axis=0)) <= 4 * se + 1e-15)


def test_truncate_box():
    w = _walk([0.5])
    x, hits = w.truncate([0.5], [1.2])
    assert x[0] == 1.0 and hits == [("var", 0, 1)]


def test_truncate_inside_returns_target():
    w = _walk([0.5, 0.5])
    x, hits = w.truncate([0.5, 0.5], [0.52, 0.48])
    assert np.allclose(x, [0.52, 0.48]) and hits == []


def test_truncate_triangle_rank_face():
    w = _walk([0.6, 0.6, 0.6], structure=TRIANGLE)
    x, hits = w.truncate([0.6] * 3, np.array([0.6] * 3) + np.ones(3) / math.sqrt(3))
    assert abs(x.sum() - 2) < 1e-12
    assert hits == [("rank", 0, None)]
    assert separate(TRIANGLE, x) is None
    assert separate(TRIANGLE, x + 1e-6) is not None


# -- partial rounding ---------------------------------------------------------------

def test_partial_round_integral_input():
    y, rep = partial_round([1.0, 0.0, 1.0])
    assert list(y) == [1, 0, 1] and rep.success and rep.steps == 0


def test_partial_round_two_coordinates_is_fair():
    # larger step keeps the 10^4 runs quick; absorption probabilities do not depend on the step size
    cfg = WalkConfig(gamma=0.25, restarts=1)
    ones = 0
    for s in range(10_000):
        y, _ = partial_round([0.5, 0.5], cfg=cfg, seed=s)
        assert tuple(y) in ((1.0, 0.0), (0.0, 1.0))
        ones += y[0] == 1.0
    assert abs(ones / 10_000 - 0.5) <= 0.05


def test_partial_round_two_coordinates_practical_preset():
    cfg = WalkConfig.practical(restarts=1)
    res = [partial_round([0.5, 0.5], cfg=cfg, seed=s)[0][0] for s in range(400)]
    assert set(res) <= {0.0, 1.0}
    assert abs(np.mean(res) - 0.5) <= 0.1


def test_partial_round_partition_base():
    pm = PartitionMatroid(4, ((0, 1), (2, 3)), (1, 1))
    for s in range(20):
        y, rep = partial_round([0.5] * 4, None, pm, WalkConfig(), seed=s, base=True)
        assert abs(y[0] + y[1] - 1) < 1e-12 and abs(y[2] + y[3] - 1) < 1e-12
        assert np.sum((y == 0) | (y == 1)) >= 2


def test_partial_round_lambda_condition_enforced():
    side = [SideConstraint(np.ones(16), 0.0) for _ in range(2)]
    with pytest.raises(PreconditionError):
        partial_round(np.full(16, 0.5), side)


def test_partial_round_is_deterministic():
    rng = np.random.default_rng(5)
    y0 = rng.uniform(0.05, 0.95, 40)
    side = [SideConstraint(r, 5.0) for r in rng.integers(0, 2, (20, 40)).astype(float)]
    a, ra = partial_round(y0, side, seed=11)
    b, rb = partial_round(y0, side, seed=11)
    assert np.array_equal(a, b) and ra.steps == rb.steps
    c, _ = partial_round(y0, side, seed=12)
    assert not np.array_equal(a, c)


def test_potential_examples():
    c = classify_scales([0.5, 0.5])
    assert potential([0.5, 0.5], c) == 2
    c = classify_scales([0.25, 0.1, 0.3])
    assert potential([0, 0, 0], c) == 0
    alpha = 4
    caps = np.minimum(alpha * c.scale, 1)
    assert abs(potential(caps, c) - alpha ** 2 * 3) < 1e-9 or np.any(caps == 1)


# -- walk invariants ----------------------------------------------------------------

def _registered_rows_scaled(w):
    return w.registered_rows()


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_walk_invariants_every_step(seed):
    rng = np.random.default_rng(seed)
    n, m = 20, 12
    y = rng.uniform(0.02, 0.98, n)
    side = [SideConstraint(r, rng.uniform(0.5, 3)) for r in rng.integers(0, 2, (m, n)).astype(float)]
    cfg = WalkConfig(gamma=0.1, debug=True, stop_fraction=1.0, steps=5_000)
    w = _walk(y, side, cfg=cfg, seed=seed)
    q = w.q
    prev = (w.c_var, w.c_side, int(w.struct_state.sum()))
    while w.t < cfg.steps and w.dim > 0:
        g = w.direction()
        rows = w.registered_rows()
        norms = np.linalg.norm(rows, axis=1)
        assert np.all(np.abs(rows @ g) <= 1e-8 * np.maximum(norms, 1))
        w.step()
        cur = (w.c_var, w.c_side, int(w.struct_state.sum()))
        assert all(c >= p for c, p in zip(cur, prev))
        prev = cur
        drift = np.abs(q.class_rows @ w.X - q.class_rhs)
        assert np.all(drift <= 1e-9 * (1 + np.abs(q.class_rhs)))
        assert q.violation(w.X) <= 1e-8
    assert w.truncations <= w.n_frac


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000))
def test_walk_preserves_graphic_matroid(seed):
    rng = np.random.default_rng(seed)
    edges = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3), (0, 4), (3, 4))
    gm = GraphicMatroid(edges)
    from conftest import mix_of_bases
    y = mix_of_bases(gm, rng, 4)
    y = np.where((y > 0) & (y < 1), y, np.clip(y, 0, 1))
    out, rep = partial_round(y, None, gm, WalkConfig(), seed=seed, base=True)
    assert separate(gm, out) is None and abs(out.sum() - gm.full_rank) < 1e-8
    assert all(a.structure_ok for a in rep.audits)


def test_walk_uniform_matroid_independent_set():
    um = UniformMatroid(12, 5)
    out, rep = partial_round(np.full(12, 0.4), None, um, WalkConfig(), seed=3)
    assert out.sum() <= 5 + 1e-9 and abs(out.sum() - 4.8) < 1e-9
