"""Quantum-inspired genetic algorithm (QGA) for the TSP.

A chromosome holds N genes of ``b`` qubits each. Every qubit is a real
amplitude pair ``(alpha, beta)`` with ``alpha**2 + beta**2 == 1``; measuring
it yields 1 with probability ``beta**2``. The measured bits of a gene are read
as an unsigned integer, reduced modulo N, and duplicates are repaired into a
valid tour.

The population is stored as arrays of shape ``(P, N, b)`` rather than as
per-qubit objects; :class:`QuantumChromosome` is a copy of one row.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace

import numpy as np

from .ga import RunRecord, Tour, curve_summary, order_crossover, tour_lengths
from .tsplib import DistanceMetric, TspInstance, distance_matrix

CEIL = "ceil"
FLOOR = "floor"
STOCHASTIC = "stochastic"
LITERAL = "literal"

DEFAULT_THETA_CAP = 0.05 * math.pi


@dataclass(frozen=True)
class QubitAmplitude:
    alpha: float
    beta: float

    def __post_init__(self):
        if abs(self.alpha ** 2 + self.beta ** 2 - 1.0) > 1e-9:
            raise ValueError(f"amplitudes ({self.alpha}, {self.beta}) are not normalized")


@dataclass(frozen=True)
class QgaParams:
    """QGA settings.

    ``pm_qubit`` and ``elite_count`` default to ``2 / (N * b)`` and
    ``ceil(population_size / 5)`` when left as None. ``theta_cap=None``
    disables the rotation-step clamp.
    """

    population_size: int = 80
    pc: float = 0.7
    pm_chrom: float = 0.3
    pm_qubit: float | None = None
    generation_max: int = 500
    elite_count: int | None = None
    theta_scale: float = 0.01
    theta_cap: float | None = DEFAULT_THETA_CAP
    bits_rule: str = CEIL
    measurement: str = STOCHASTIC
    seed: int = 0

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be at least 2")
        for name in ("pc", "pm_chrom"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.pm_qubit is not None and not 0.0 <= self.pm_qubit <= 1.0:
            raise ValueError("pm_qubit must lie in [0, 1]")
        if self.generation_max < 1:
            raise ValueError("generation_max must be positive")
        if self.elite_count is not None and not 0 <= self.elite_count < self.population_size:
            raise ValueError("elite_count must be below population_size")
        if self.theta_scale <= 0:
            raise ValueError("theta_scale must be positive")
        if self.theta_cap is not None and self.theta_cap <= 0:
            raise ValueError("theta_cap must be positive (or None for no clamp)")
        if self.bits_rule not in (CEIL, FLOOR):
            raise ValueError(f"bits_rule must be {CEIL!r} or {FLOOR!r}")
        if self.measurement not in (STOCHASTIC, LITERAL):
            raise ValueError(f"measurement must be {STOCHASTIC!r} or {LITERAL!r}")
        if self.seed < 0:
            raise ValueError("seed must be unsigned")

    def resolved_elite_count(self) -> int:
        if self.elite_count is None:
            return math.ceil(self.population_size / 5)
        return self.elite_count

    def resolved_pm_qubit(self, n: int, b: int) -> float:
        if self.pm_qubit is None:
            return min(1.0, 2.0 / (n * b))
        return self.pm_qubit


@dataclass
class QuantumChromosome:
    alpha: np.ndarray  # (N, b)
    beta: np.ndarray  # (N, b)
    last_bits: np.ndarray  # (N, b) uint8
    tour: Tour

    @property
    def genes(self) -> list[list[QubitAmplitude]]:
        return [[QubitAmplitude(float(a), float(b)) for a, b in zip(ra, rb)]
                for ra, rb in zip(self.alpha, self.beta)]


@dataclass
class QuantumPopulation:
    alpha: np.ndarray  # (P, N, b)
    beta: np.ndarray  # (P, N, b)
    bits: np.ndarray  # (P, N, b) uint8
    tours: np.ndarray  # (P, N) intp

    def __len__(self):
        return self.alpha.shape[0]

    def copy(self) -> "QuantumPopulation":
        return QuantumPopulation(self.alpha.copy(), self.beta.copy(), self.bits.copy(), self.tours.copy())

    def take(self, idx) -> "QuantumPopulation":
        return QuantumPopulation(self.alpha[idx], self.beta[idx], self.bits[idx], self.tours[idx])

    def chromosome(self, i: int) -> QuantumChromosome:
        return QuantumChromosome(self.alpha[i].copy(), self.beta[i].copy(),
                                 self.bits[i].copy(), self.tours[i].tolist())


def bits_per_gene(n: int, rule: str = CEIL) -> int:
    """Qubits needed per gene for ``n`` cities.

    >>> bits_per_gene(14), bits_per_gene(14, FLOOR), bits_per_gene(16, FLOOR)
    (4, 3, 4)
    """
    if n < 3:
        raise ValueError(f"need at least 3 cities, got {n}")
    if rule == CEIL:
        return (n - 1).bit_length()
    if rule == FLOOR:
        return max(1, n.bit_length() - 1)
    raise ValueError(f"unknown bits rule {rule!r}")


def hadamard_rotated(theta):
    """Amplitudes of ``U(theta) H |0>``, i.e. ``(cos(theta + pi/4), sin(theta + pi/4))``."""
    hadamard = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)
    plus = hadamard @ np.array([1.0, 0.0])
    theta = np.asarray(theta, dtype=float)
    c, s = np.cos(theta), np.sin(theta)
    return c * plus[0] - s * plus[1], s * plus[0] + c * plus[1]


def measure(alpha: np.ndarray, beta: np.ndarray, rng: np.random.Generator,
            mode: str = STOCHASTIC) -> np.ndarray:
    """Collapse every qubit; 1 with probability ``beta**2``.

    ``mode="literal"`` instead returns 1 exactly where ``beta**2 > alpha**2``.
    """
    if mode == LITERAL:
        return (beta ** 2 > alpha ** 2).astype(np.uint8)
    return (rng.random(alpha.shape) < beta ** 2).astype(np.uint8)


def gene_values(bits: np.ndarray) -> np.ndarray:
    """Read the last axis of ``bits`` as big-endian unsigned integers."""
    b = bits.shape[-1]
    weights = 1 << np.arange(b - 1, -1, -1)
    return (bits.astype(np.int64) * weights).sum(axis=-1)


def repair(cities) -> Tour:
    """Replace repeated cities with the missing ones, in ascending order.

    The first occurrence of each city stays where it is.

    >>> repair([2, 2, 4, 0, 2])
    [2, 1, 4, 0, 3]
    """
    n = len(cities)
    present = np.zeros(n, dtype=bool)
    present[np.asarray(cities)] = True
    missing = iter(np.flatnonzero(~present).tolist())
    used = set()
    out = []
    for c in cities:
        c = int(c)
        if c in used:
            c = next(missing)
        used.add(c)
        out.append(c)
    return out


def decode_and_repair(bits: np.ndarray, n: int) -> Tour:
    """Decode one chromosome's (N, b) bits into a valid tour."""
    return repair((gene_values(bits) % n).tolist())


def encode_tour(tour, b: int) -> np.ndarray:
    """Write each city index as ``b`` big-endian bits; inverse of decoding."""
    t = np.asarray(tour, dtype=np.int64)
    if t.size and t.max() >= 1 << b:
        raise ValueError(f"city {int(t.max())} does not fit in {b} bits")
    shifts = np.arange(b - 1, -1, -1)
    return ((t[:, None] >> shifts) & 1).astype(np.uint8)


def _collapse(pop: QuantumPopulation, n: int, rng, mode: str) -> None:
    pop.bits = measure(pop.alpha, pop.beta, rng, mode)
    provisional = gene_values(pop.bits) % n
    pop.tours = np.array([repair(row) for row in provisional.tolist()], dtype=np.intp)


def init_quantum_population(n: int, params: QgaParams, rng: np.random.Generator) -> QuantumPopulation:
    """Random initial phases in [0, pi/2], then a first measurement."""
    b = bits_per_gene(n, params.bits_rule)
    theta = rng.uniform(0.0, math.pi / 2, size=(params.population_size, n, b))
    alpha, beta = hadamard_rotated(theta)
    pop = QuantumPopulation(alpha, beta, np.zeros_like(alpha, dtype=np.uint8),
                            np.zeros((params.population_size, n), dtype=np.intp))
    _collapse(pop, n, rng, params.measurement)
    return pop


def elite_replace(pop: QuantumPopulation, lengths: np.ndarray, elite_count: int):
    """Sort by length and overwrite the worst ``elite_count`` with copies of the best.

    Returns ``(population, lengths)``, both in the new order.
    """
    order = np.argsort(lengths, kind="stable")
    if elite_count > 0:
        order = np.concatenate([order[:-elite_count], order[:elite_count]])
    return pop.take(order), lengths[order]


def quantum_crossover(pop: QuantumPopulation, pc: float, rng: np.random.Generator) -> np.ndarray:
    """Order crossover on the tours of adjacent pairs, in place.

    Amplitudes and bits are left alone. Returns a boolean mask of the
    chromosomes whose tour was replaced.
    """
    changed = np.zeros(len(pop), dtype=bool)
    for k in range(0, len(pop) - 1, 2):
        if rng.random() < pc:
            c1, c2 = order_crossover(pop.tours[k], pop.tours[k + 1], rng=rng)
            pop.tours[k], pop.tours[k + 1] = c1, c2
            changed[k] = changed[k + 1] = True
    return changed


def quantum_mutation(pop: QuantumPopulation, pm_chrom: float, pm_qubit: float,
                     rng: np.random.Generator) -> None:
    """Swap ``alpha`` and ``beta`` of randomly chosen qubits, in place."""
    chosen = rng.random(len(pop)) < pm_chrom
    flips = (rng.random(pop.alpha.shape) < pm_qubit) & chosen[:, None, None]
    a = pop.alpha[flips]
    pop.alpha[flips] = pop.beta[flips]
    pop.beta[flips] = a


def delta_theta(generation: int, generation_max: int, theta_scale: float = 0.01,
                theta_cap: float | None = DEFAULT_THETA_CAP) -> float:
    """Rotation step, shrinking as ``theta_scale * generation_max / (generation + 1)``."""
    if not 0 <= generation < generation_max:
        raise ValueError(f"generation {generation} outside [0, {generation_max})")
    step = theta_scale * generation_max / (generation + 1)
    if theta_cap is not None:
        step = min(theta_cap, step)
    return step


def rotate(alpha, beta, angle):
    """Apply the 2x2 rotation gate elementwise."""
    c, s = np.cos(angle), np.sin(angle)
    return alpha * c - beta * s, alpha * s + beta * c


def rotation_update(pop: QuantumPopulation, best_bits: np.ndarray, step: float,
                    skip: int | None = None) -> None:
    """Rotate every qubit toward ``best_bits``, in place.

    A qubit measured 0 where the best has 1 turns by ``+step``; measured 1
    where the best has 0 turns by ``-step``; matching qubits stay. Chromosome
    ``skip`` (the current best) is not touched.
    """
    bits = pop.bits.astype(np.int8)
    direction = best_bits.astype(np.int8)[None] - bits
    if skip is not None:
        direction[skip] = 0
    pop.alpha, pop.beta = rotate(pop.alpha, pop.beta, direction * step)


def _best_bits(tour, b: int, pop: QuantumPopulation, holder: int) -> np.ndarray:
    try:
        return encode_tour(tour, b)
    except ValueError:
        # floor rule: high cities are unreachable, steer toward what was measured
        return pop.bits[holder]


def run_qga(inst: TspInstance, metric: DistanceMetric | str = DistanceMetric.EUCLID_RAW,
            params: QgaParams = QgaParams(), *, dmat: np.ndarray | None = None,
            debug: bool = False) -> RunRecord:
    """Run the QGA for ``params.generation_max`` generations.

    Per generation: measure, decode and repair, evaluate, record the best,
    elite replacement, crossover, mutation, re-evaluate crossed tours, record
    the best again, and rotate all other chromosomes toward the best tour.
    """
    if dmat is None:
        dmat = distance_matrix(inst, metric)
    n = dmat.shape[0]
    b = bits_per_gene(n, params.bits_rule)
    elite = params.resolved_elite_count()
    pm_qubit = params.resolved_pm_qubit(n, b)
    rng = np.random.default_rng(params.seed)

    start = time.perf_counter()
    pop = init_quantum_population(n, params, rng)
    best_len, best_tour = np.inf, None
    curve = []
    for gen in range(params.generation_max):
        if gen > 0:
            _collapse(pop, n, rng, params.measurement)
        lengths = tour_lengths(pop.tours, dmat)
        i = int(np.argmin(lengths))
        if lengths[i] < best_len:
            best_len, best_tour = float(lengths[i]), pop.tours[i].tolist()

        pop, lengths = elite_replace(pop, lengths, elite)
        changed = quantum_crossover(pop, params.pc, rng)
        quantum_mutation(pop, params.pm_chrom, pm_qubit, rng)
        if changed.any():
            lengths[changed] = tour_lengths(pop.tours[changed], dmat)
        if debug:
            _check(pop, n)

        holder = int(np.argmin(lengths))
        if lengths[holder] < best_len:
            best_len, best_tour = float(lengths[holder]), pop.tours[holder].tolist()
        step = delta_theta(gen, params.generation_max, params.theta_scale, params.theta_cap)
        rotation_update(pop, _best_bits(best_tour, b, pop, holder), step, skip=holder)
        curve.append(best_len)
    elapsed = time.perf_counter() - start

    best, iters = curve_summary(curve)
    return RunRecord(best_length=best, best_tour=best_tour, iterations_to_best=iters,
                     fitness_curve=curve, wall_time_seconds=elapsed, seed=params.seed,
                     algorithm="qga", extra={"bits_per_gene": b})


def _check(pop: QuantumPopulation, n: int) -> None:
    norm = pop.alpha ** 2 + pop.beta ** 2
    assert np.all(np.abs(norm - 1.0) <= 1e-9), "amplitude normalization drifted"
    for t in pop.tours:
        assert sorted(t.tolist()) == list(range(n)), "invalid tour"


def with_seed(params: QgaParams, seed: int) -> QgaParams:
    return replace(params, seed=seed)
