"""Repeated seeded runs, table-style aggregation, and CSV/JSON/SVG output."""

from __future__ import annotations

import csv
import json
import logging
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import ga, qga
from .tsplib import DistanceMetric, TspInstance, distance_matrix, load_instance, tour_length

log = logging.getLogger(__name__)

SUMMARY_COLUMNS = (
    "optimal_solution",
    "average_optimal_solution",
    "optimal_iterations",
    "average_iterations",
    "max_execution_time_s",
    "average_execution_time_s",
)
RUN_COLUMNS = ("algorithm", "instance", "run_index", "seed", "best_length",
               "iterations_to_best", "time_seconds")


@dataclass(frozen=True)
class ExperimentPlan:
    instance_path: str
    algorithm: str  # "ga" | "qga"
    params: ga.GaParams | qga.QgaParams
    metric: str = DistanceMetric.EUCLID_RAW.value
    repetitions: int = 10
    base_seed: int = 0

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError("repetitions must be at least 1")
        if self.algorithm not in ("ga", "qga"):
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        expected = ga.GaParams if self.algorithm == "ga" else qga.QgaParams
        if not isinstance(self.params, expected):
            raise TypeError(f"{self.algorithm} needs {expected.__name__}")


@dataclass(frozen=True)
class AggregateStats:
    optimal_solution: float
    average_optimal_solution: float
    optimal_iterations: int
    average_iterations: float
    max_execution_time_s: float
    average_execution_time_s: float

    def row(self) -> list:
        return [getattr(self, c) for c in SUMMARY_COLUMNS]


def aggregate(records: Sequence[ga.RunRecord]) -> AggregateStats:
    if not records:
        raise ValueError("no runs to aggregate")
    bests = [r.best_length for r in records]
    iters = [r.iterations_to_best for r in records]
    times = [r.wall_time_seconds for r in records]
    return AggregateStats(
        optimal_solution=min(bests),
        average_optimal_solution=statistics.fmean(bests),
        optimal_iterations=min(iters),
        average_iterations=statistics.fmean(iters),
        max_execution_time_s=max(times),
        average_execution_time_s=statistics.fmean(times),
    )


def solve_once(inst: TspInstance, algorithm: str, params, metric=DistanceMetric.EUCLID_RAW,
               dmat: np.ndarray | None = None) -> ga.RunRecord:
    if algorithm == "ga":
        return ga.run_ga(inst, metric, params, dmat=dmat)
    if algorithm == "qga":
        return qga.run_qga(inst, metric, params, dmat=dmat)
    raise ValueError(f"unknown algorithm {algorithm!r}")


def _run_one(plan: ExperimentPlan, inst: TspInstance, dmat: np.ndarray, run_index: int) -> ga.RunRecord:
    seed = plan.base_seed + run_index
    params = plan.params.__class__(**{**asdict(plan.params), "seed": seed})
    try:
        return solve_once(inst, plan.algorithm, params, plan.metric, dmat)
    except Exception as exc:
        raise RuntimeError(f"{plan.algorithm} run {run_index} (seed {seed}) on "
                           f"{inst.name} failed: {exc}") from exc


def run_experiment(plan: ExperimentPlan, workers: int = 1):
    """Execute ``plan.repetitions`` runs seeded ``base_seed + run_index``.

    Runs are independent, so ``workers > 1`` fans them out over processes;
    records come back in run order either way.
    """
    inst = load_instance(plan.instance_path)
    dmat = distance_matrix(inst, plan.metric)
    indices = range(plan.repetitions)
    if workers > 1 and plan.repetitions > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_one, [plan] * len(indices), [inst] * len(indices),
                                    [dmat] * len(indices), indices))
    else:
        records = [_run_one(plan, inst, dmat, k) for k in indices]
    for k, rec in enumerate(records):
        log.info("%s %s run %d: best %.3f at generation %d (%.2fs)", plan.algorithm,
                 inst.name, k, rec.best_length, rec.iterations_to_best, rec.wall_time_seconds)
    return records, aggregate(records)


def experiment_dir(out_dir, instance_name: str, algorithm: str) -> Path:
    return Path(out_dir) / instance_name / algorithm


def write_curve(path: Path, curve: Sequence[float]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["generation", "best_so_far"])
        for g, v in enumerate(curve):
            w.writerow([g, repr(float(v))])


def tour_svg(coords: np.ndarray, tour: Sequence[int], size: float = 600.0, margin: float = 30.0,
             title: str = "") -> str:
    """Render cities and the closed tour as an SVG 1.1 document.

    Coordinates are scaled uniformly into the canvas; the y axis is flipped
    so larger y values appear higher up.
    """
    pts = np.asarray(coords, dtype=float)
    lo = pts.min(axis=0)
    span = float(max((pts.max(axis=0) - lo).max(), 1e-12))
    scale = (size - 2 * margin) / span
    xy = np.column_stack([margin + (pts[:, 0] - lo[0]) * scale,
                          size - margin - (pts[:, 1] - lo[1]) * scale])
    closed = list(tour) + [tour[0]]
    poly = " ".join(f"{xy[c, 0]:.2f},{xy[c, 1]:.2f}" for c in closed)
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size:g}" '
        f'height="{size:g}" viewBox="0 0 {size:g} {size:g}">',
    ]
    if title:
        out.append(f"<title>{title}</title>")
    out.append(f'<polyline points="{poly}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>')
    for k, (x, y) in enumerate(xy, start=1):
        out.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3.5" fill="#d62728"><title>{k}</title></circle>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_artifacts(records: Sequence[ga.RunRecord], stats: AggregateStats, out_dir,
                   inst: TspInstance, algorithm: str, dmat: np.ndarray | None = None) -> Path:
    """Write runs.csv, summary.csv/json, per-run curves and the best-tour SVG.

    Files go under ``<out_dir>/<instance>/<algorithm>/``; the directory is
    returned.
    """
    target = experiment_dir(out_dir, inst.name, algorithm)
    try:
        target.mkdir(parents=True, exist_ok=True)
        if dmat is not None:
            for rec in records:
                check = tour_length(rec.best_tour, dmat)
                if not np.isclose(check, rec.best_length, rtol=1e-9, atol=1e-9):
                    raise ValueError(f"run seed {rec.seed}: recorded {rec.best_length} "
                                     f"but tour measures {check}")

        with open(target / "runs.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(RUN_COLUMNS)
            for k, rec in enumerate(records):
                w.writerow([algorithm, inst.name, k, rec.seed, repr(float(rec.best_length)),
                            rec.iterations_to_best, f"{rec.wall_time_seconds:.6f}"])

        with open(target / "tours.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["run_index", "best_tour"])
            for k, rec in enumerate(records):
                w.writerow([k, " ".join(str(c + 1) for c in rec.best_tour)])

        with open(target / "summary.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("algorithm", "instance") + SUMMARY_COLUMNS)
            w.writerow([algorithm, inst.name] + [repr(v) if isinstance(v, float) else v
                                                  for v in stats.row()])

        summary = {"algorithm": algorithm, "instance": inst.name, **asdict(stats)}
        (target / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")

        for k, rec in enumerate(records):
            write_curve(target / f"curve_{algorithm}_{k}.csv", rec.fitness_curve)

        if inst.coords is not None:
            best = min(records, key=lambda r: r.best_length)
            svg = tour_svg(inst.coords, best.best_tour,
                           title=f"{inst.name} {algorithm} best {best.best_length:.3f}")
            (target / "tour_best.svg").write_text(svg)
    except OSError as exc:
        raise OSError(f"cannot write artifacts to {target}: {exc}") from exc
    return target
