"""Held-Karp dynamic program: provably optimal tours for small instances."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .tsplib import tour_length

DEFAULT_LIMIT = 18


@dataclass(frozen=True)
class ExactResult:
    optimal_length: float
    optimal_tour: list[int]


def held_karp(dmat: np.ndarray, limit: int = DEFAULT_LIMIT) -> ExactResult:
    """Optimal closed tour through all cities, anchored at city 0.

    Memory is O(2^(N-1) * (N-1)), so ``limit`` caps N. Ties between equal
    completions go to the lowest city index.
    """
    d = np.asarray(dmat, dtype=float)
    n = d.shape[0]
    if n < 3:
        raise ValueError(f"held_karp needs at least 3 cities, got {n}")
    if n > limit:
        raise ValueError(f"instance has {n} cities, exceeds exact-solver limit {limit}")

    # cities 1..n-1 are relabelled 0..m-1; bit j of a mask is city j+1
    m = n - 1
    full = 1 << m
    inner = d[1:, 1:]
    cost = np.full((full, m), np.inf)
    parent = np.full((full, m), -1, dtype=np.int64)
    for j in range(m):
        cost[1 << j, j] = d[0, j + 1]

    members = [[j for j in range(m) if mask >> j & 1] for mask in range(full)]
    for mask in range(1, full):
        last = members[mask]
        if len(last) < 2:
            continue
        for j in last:
            prev = mask ^ (1 << j)
            ks = members[prev]
            cand = cost[prev, ks] + inner[ks, j]
            best = int(np.argmin(cand))
            cost[mask, j] = cand[best]
            parent[mask, j] = ks[best]

    closing = cost[full - 1] + d[1:, 0]
    j = int(np.argmin(closing))
    best_len = float(closing[j])

    order = []
    mask = full - 1
    while j != -1:
        order.append(j + 1)
        prev_j = int(parent[mask, j])
        mask ^= 1 << j
        j = prev_j
    tour = [0] + order[::-1]
    return ExactResult(optimal_length=best_len, optimal_tour=tour)


def brute_force(dmat: np.ndarray) -> ExactResult:
    """Exhaustive enumeration over every tour starting at city 0 (N <= 10 or so)."""
    d = np.asarray(dmat, dtype=float)
    n = d.shape[0]
    rest = np.array(list(permutations(range(1, n))), dtype=np.intp)
    tours = np.hstack([np.zeros((len(rest), 1), dtype=np.intp), rest])
    lengths = d[tours, np.roll(tours, -1, axis=1)].sum(axis=1)
    k = int(np.argmin(lengths))
    best = tours[k].tolist()
    return ExactResult(optimal_length=tour_length(best, d), optimal_tour=best)
