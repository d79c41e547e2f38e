import itertools

import numpy as np
import pytest

from discround.matroid import GraphicMatroid, PartitionMatroid, UniformMatroid


def all_subsets(n):
    for r in range(n + 1):
        yield from itertools.combinations(range(n), r)


def brute_rank(m, subset):
    subset = list(subset)
    for r in range(len(subset), -1, -1):
        if any(m.is_independent(c) for c in itertools.combinations(subset, r)):
            return r
    return 0


def bases_of(m):
    return [b for b in itertools.combinations(range(m.n), m.full_rank) if m.is_independent(b)]


def mix_of_bases(m, rng, k=3):
    """Random convex combination of bases (a point of the base polytope)."""
    bases = bases_of(m)
    pick = rng.choice(len(bases), size=min(k, len(bases)), replace=False)
    w = rng.dirichlet(np.ones(len(pick)))
    y = np.zeros(m.n)
    for p, wi in zip(pick, w):
        y[list(bases[p])] += wi
    return y


TRIANGLE = GraphicMatroid(((0, 1), (1, 2), (0, 2)))
K4 = GraphicMatroid(((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)))


@pytest.fixture
def triangle():
    return TRIANGLE


@pytest.fixture
def small_matroids():
    return [
        UniformMatroid(5, 2),
        PartitionMatroid(6, ((0, 1), (2, 3, 4), (5,)), (1, 2, 1)),
        TRIANGLE,
        K4,
    ]
