import time

import numpy as np
import pytest

from qgatsp.exact import brute_force, held_karp
from qgatsp.tsplib import distance_matrix, load_instance, tour_length

from conftest import random_dmat


def test_unit_square(square):
    assert held_karp(distance_matrix(square)).optimal_length == 4.0


def test_triangle(triangle):
    res = held_karp(distance_matrix(triangle))
    assert res.optimal_length == 12.0
    assert res.optimal_tour[0] == 0


@pytest.mark.parametrize("name, expected, tol", [("burma14", 30.879, 0.01), ("ulysses16", 73.987, 0.02)])
def test_published_optima(name, expected, tol):
    d = distance_matrix(load_instance(name))
    start = time.perf_counter()
    res = held_karp(d)
    assert time.perf_counter() - start < 30
    assert res.optimal_length == pytest.approx(expected, abs=tol)
    assert tour_length(res.optimal_tour, d) == pytest.approx(res.optimal_length)


def test_burma14_geo_optimum(burma14):
    # TSPLIB's published optimum for burma14 under its declared GEO metric
    assert held_karp(distance_matrix(burma14, "tsplib")).optimal_length == 3323


@pytest.mark.parametrize("seed", range(12))
def test_matches_enumeration(seed):
    n = 4 + seed % 6  # 4..9
    d = random_dmat(n, seed)
    hk = held_karp(d)
    bf = brute_force(d)
    assert hk.optimal_length == pytest.approx(bf.optimal_length, abs=1e-9)
    assert tour_length(hk.optimal_tour, d) == pytest.approx(hk.optimal_length)


def test_deterministic():
    d = random_dmat(9, 3)
    assert held_karp(d) == held_karp(d)


def test_label_permutation_invariance():
    d = random_dmat(8, 11)
    perm = np.random.default_rng(0).permutation(8)
    relabelled = d[np.ix_(perm, perm)]
    a, b = held_karp(d), held_karp(relabelled)
    assert a.optimal_length == pytest.approx(b.optimal_length)
    back = [int(perm[c]) for c in b.optimal_tour]
    assert tour_length(back, d) == pytest.approx(a.optimal_length)


def test_optimum_beats_sampled_tours():
    d = random_dmat(10, 5)
    best = held_karp(d).optimal_length
    rng = np.random.default_rng(1)
    for _ in range(2000):
        assert tour_length(rng.permutation(10), d) >= best - 1e-12


def test_limit_enforced():
    with pytest.raises(ValueError, match="exceeds"):
        held_karp(random_dmat(12, 0), limit=10)
    with pytest.raises(ValueError):
        held_karp(random_dmat(2, 0))
