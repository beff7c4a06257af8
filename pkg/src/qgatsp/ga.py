"""Classical genetic algorithm on permutation-encoded tours.

Each generation ranks the population by tour length, mates the better half
with order crossover and swap mutation, then keeps the best
``population_size`` distinct tours of parents and offspring together.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from .tsplib import DistanceMetric, TspInstance, distance_matrix, validate_tour

Tour = list[int]


@dataclass(frozen=True)
class GaParams:
    population_size: int = 80
    pc: float = 0.7
    pm: float = 0.3
    generation_max: int = 500
    elite_count: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be at least 2")
        if not (0.0 <= self.pc <= 1.0 and 0.0 <= self.pm <= 1.0):
            raise ValueError("pc and pm must lie in [0, 1]")
        if self.generation_max < 1:
            raise ValueError("generation_max must be positive")
        if not 1 <= self.elite_count < self.population_size:
            raise ValueError("elite_count must satisfy 1 <= elite_count < population_size")
        if self.seed < 0:
            raise ValueError("seed must be unsigned")


@dataclass
class RunRecord:
    """Outcome of a single seeded solver run."""

    best_length: float
    best_tour: Tour
    iterations_to_best: int
    fitness_curve: list[float]
    wall_time_seconds: float
    seed: int
    algorithm: str = "ga"
    extra: dict = field(default_factory=dict)


def tour_lengths(tours: np.ndarray, dmat: np.ndarray) -> np.ndarray:
    """Closed-tour length of every row of a (P, N) integer array."""
    return dmat[tours, np.roll(tours, -1, axis=1)].sum(axis=1)


def curve_summary(curve: list[float]) -> tuple[float, int]:
    best = curve[-1]
    return best, next(g for g, v in enumerate(curve) if v == best)


def init_random_population(n: int, params: GaParams, rng: np.random.Generator) -> np.ndarray:
    if n < 3:
        raise ValueError(f"need at least 3 cities, got {n}")
    return np.array([rng.permutation(n) for _ in range(params.population_size)], dtype=np.intp)


def _ox_child(keep: np.ndarray, donor: np.ndarray, a: int, b: int) -> np.ndarray:
    n = len(keep)
    child = np.empty(n, dtype=np.intp)
    child[a:b] = keep[a:b]
    used = np.zeros(n, dtype=bool)
    used[keep[a:b]] = True
    fill = [c for c in np.roll(donor, -b) if not used[c]]
    positions = [(b + k) % n for k in range(n - (b - a))]
    child[positions] = fill
    return child


def order_crossover(p1, p2, cut=None, rng: np.random.Generator | None = None):
    """Order crossover (OX).

    ``child1`` keeps ``p1[a:b]`` in place; the other positions, starting at
    ``b`` and wrapping around, receive the missing cities in the order they
    appear in ``p2`` read circularly from index ``b``. ``child2`` mirrors this
    with the parents swapped. A random cut is drawn from ``rng`` when ``cut``
    is None.

    >>> c1, c2 = order_crossover([0, 1, 2, 3, 4], [4, 3, 2, 1, 0], (1, 3))
    >>> c1.tolist()
    [3, 1, 2, 0, 4]
    """
    p1 = np.asarray(p1, dtype=np.intp)
    p2 = np.asarray(p2, dtype=np.intp)
    n = len(p1)
    if len(p2) != n:
        raise ValueError("parents differ in length")
    if cut is None:
        if rng is None:
            raise ValueError("need either a cut or an rng")
        a, b = sorted(rng.choice(n + 1, size=2, replace=False))
    else:
        a, b = cut
    if not 0 <= a < b <= n:
        raise ValueError(f"invalid cut ({a}, {b}) for {n} cities")
    return _ox_child(p1, p2, a, b), _ox_child(p2, p1, a, b)


def swap_mutation(tour, rng: np.random.Generator | None = None, positions=None) -> np.ndarray:
    """Exchange the cities at two distinct positions."""
    t = np.array(tour, dtype=np.intp)
    if positions is None:
        i, j = rng.choice(len(t), size=2, replace=False)
    else:
        i, j = positions
        if i == j:
            raise ValueError("swap positions must differ")
    t[i], t[j] = t[j], t[i]
    return t


def _truncate_unique(candidates: np.ndarray, lengths: np.ndarray, size: int):
    order = np.argsort(lengths, kind="stable")
    seen = set()
    first, rest = [], []
    for k in order:
        key = candidates[k].tobytes()
        (rest if key in seen else first).append(k)
        seen.add(key)
    keep = (first + rest)[:size]
    # survivors stay in rank order
    keep.sort(key=lambda k: (lengths[k], k))
    return candidates[keep], lengths[keep]


def ga_step(population: np.ndarray, dmat: np.ndarray, params: GaParams, rng: np.random.Generator,
            lengths: np.ndarray | None = None):
    """Advance one generation; returns ``(population, lengths, best_length)``.

    The returned population is sorted by tour length. Offspring identical to
    a tour already present do not displace anything; duplicates only fill
    the population when there are too few distinct tours.
    """
    if lengths is None:
        lengths = tour_lengths(population, dmat)
    ranked = np.argsort(lengths, kind="stable")
    pool = population[ranked[: max(2, len(population) // 2)]]
    pool = pool[rng.permutation(len(pool))]

    offspring = []
    for k in range(0, len(pool) - 1, 2):
        a, b = pool[k], pool[k + 1]
        if rng.random() < params.pc:
            a, b = order_crossover(a, b, rng=rng)
        for child in (a, b):
            if rng.random() < params.pm:
                child = swap_mutation(child, rng)
            offspring.append(child)

    if offspring:
        kids = np.array(offspring, dtype=np.intp)
        candidates = np.concatenate([population, kids])
        cand_len = np.concatenate([lengths, tour_lengths(kids, dmat)])
    else:
        candidates, cand_len = population, lengths
    population, lengths = _truncate_unique(candidates, cand_len, params.population_size)
    return population, lengths, float(lengths[0])


def run_ga(inst: TspInstance, metric: DistanceMetric | str = DistanceMetric.EUCLID_RAW,
           params: GaParams = GaParams(), *, dmat: np.ndarray | None = None,
           debug: bool = False) -> RunRecord:
    """Run the GA for ``params.generation_max`` generations."""
    if dmat is None:
        dmat = distance_matrix(inst, metric)
    n = dmat.shape[0]
    rng = np.random.default_rng(params.seed)

    start = time.perf_counter()
    population = init_random_population(n, params, rng)
    lengths = tour_lengths(population, dmat)
    curve = []
    best_len, best_tour = np.inf, None
    for _ in range(params.generation_max):
        population, lengths, gen_best = ga_step(population, dmat, params, rng, lengths)
        if debug:
            for t in population:
                validate_tour(t, n)
        if gen_best < best_len:
            best_len, best_tour = gen_best, population[0].tolist()
        curve.append(best_len)
    elapsed = time.perf_counter() - start

    best, iters = curve_summary(curve)
    return RunRecord(best_length=best, best_tour=best_tour, iterations_to_best=iters,
                     fitness_curve=curve, wall_time_seconds=elapsed, seed=params.seed,
                     algorithm="ga")


def with_seed(params, seed: int):
    return replace(params, seed=seed)
