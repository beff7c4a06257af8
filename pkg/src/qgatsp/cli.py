"""Command-line front end: ``qgatsp {solve,bench,exact,info}``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import bench
from .exact import DEFAULT_LIMIT, held_karp
from .ga import GaParams
from .qga import CEIL, DEFAULT_THETA_CAP, FLOOR, LITERAL, STOCHASTIC, QgaParams
from .tsplib import BUNDLED_INSTANCES, TsplibError, distance_matrix, load_instance, resolve_metric

PRESETS = {
    "paper-small": {"pop": 80, "pc": 0.7, "pm": 0.3, "generations": 500},
    "paper-large": {"pop": 120, "pc": 0.9, "pm": 0.3, "generations": 500},
}
# att48 was run for 600 generations under the large parameter block
LARGE_GENERATIONS = {"att48": 600}

DEFAULTS = PRESETS["paper-small"]


def _theta_cap(text: str):
    if text.lower() == "none":
        return None
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError("theta cap must be positive or 'none'")
    return value


def _metric_name(text: str) -> str:
    if text not in ("euclid", "tsplib"):
        raise argparse.ArgumentTypeError("metric must be 'euclid' or 'tsplib'")
    return text


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qgatsp", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, solver=True):
        p.add_argument("--instance", required=True,
                       help=f"TSPLIB .tsp path, or a bundled name ({', '.join(BUNDLED_INSTANCES)})")
        p.add_argument("--metric", type=_metric_name, default="euclid",
                       help="'euclid' (raw Euclidean, default) or 'tsplib' (declared metric)")
        if not solver:
            return
        p.add_argument("--algorithm", choices=("ga", "qga"), default="ga")
        p.add_argument("--preset", choices=sorted(PRESETS), default=None)
        p.add_argument("--pop", type=int, default=None)
        p.add_argument("--pc", type=float, default=None)
        p.add_argument("--pm", type=float, default=None)
        p.add_argument("--generations", type=int, default=None)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--bits-rule", choices=(CEIL, FLOOR), default=CEIL)
        p.add_argument("--theta-cap", type=_theta_cap, default=DEFAULT_THETA_CAP,
                       help="rotation-step clamp in radians, or 'none'")
        p.add_argument("--measurement", choices=(STOCHASTIC, LITERAL), default=STOCHASTIC)
        p.add_argument("--out-dir", default="results")

    p_solve = sub.add_parser("solve", help="single seeded run")
    common(p_solve)
    p_bench = sub.add_parser("bench", help="repeated seeded runs with aggregate statistics")
    common(p_bench)
    p_bench.add_argument("--runs", type=int, default=10)
    p_bench.add_argument("--workers", type=int, default=1)
    p_exact = sub.add_parser("exact", help="Held-Karp optimum for small instances")
    common(p_exact, solver=False)
    p_exact.add_argument("--limit", type=int, default=DEFAULT_LIMIT)
    p_info = sub.add_parser("info", help="summary of a parsed instance")
    common(p_info, solver=False)
    return parser


def solver_params(args, instance_name: str):
    """Resolve preset and explicit flags into GaParams or QgaParams."""
    values = dict(DEFAULTS)
    if args.preset:
        values.update(PRESETS[args.preset])
        if args.preset == "paper-large" and instance_name in LARGE_GENERATIONS:
            values["generations"] = LARGE_GENERATIONS[instance_name]
    for key in ("pop", "pc", "pm", "generations"):
        if getattr(args, key) is not None:
            values[key] = getattr(args, key)
    if args.algorithm == "ga":
        return GaParams(population_size=values["pop"], pc=values["pc"], pm=values["pm"],
                        generation_max=values["generations"], seed=args.seed)
    return QgaParams(population_size=values["pop"], pc=values["pc"], pm_chrom=values["pm"],
                     generation_max=values["generations"], theta_cap=args.theta_cap,
                     bits_rule=args.bits_rule, measurement=args.measurement, seed=args.seed)


def _cmd_info(args) -> int:
    inst = load_instance(args.instance)
    print(f"name:            {inst.name}")
    print(f"dimension:       {inst.dimension}")
    print(f"declared metric: {inst.declared_metric}")
    print(f"coordinates:     {inst.coord_source if inst.coords is not None else 'none'}")
    print(f"explicit matrix: {'yes' if inst.explicit_weights is not None else 'no'}")
    metric = resolve_metric(inst, args.metric)
    print(f"metric in use:   {metric.value}")
    return 0


def _cmd_exact(args) -> int:
    inst = load_instance(args.instance)
    res = held_karp(distance_matrix(inst, args.metric), limit=args.limit)
    print(f"optimal length: {res.optimal_length:.3f}")
    print("optimal tour:   " + " ".join(str(c + 1) for c in res.optimal_tour))
    return 0


def _cmd_solve(args) -> int:
    inst = load_instance(args.instance)
    params = solver_params(args, inst.name)
    dmat = distance_matrix(inst, args.metric)
    rec = bench.solve_once(inst, args.algorithm, params, args.metric, dmat)
    target = bench.experiment_dir(args.out_dir, inst.name, args.algorithm)
    target.mkdir(parents=True, exist_ok=True)
    bench.write_curve(target / f"curve_{args.algorithm}_0.csv", rec.fitness_curve)
    if inst.coords is not None:
        (target / "tour_best.svg").write_text(bench.tour_svg(inst.coords, rec.best_tour))
    print(f"best length: {rec.best_length:.3f}")
    print("best tour:   " + " ".join(str(c + 1) for c in rec.best_tour))
    print(f"first reached at generation {rec.iterations_to_best} ({rec.wall_time_seconds:.2f}s)")
    return 0


def _cmd_bench(args) -> int:
    inst = load_instance(args.instance)
    plan = bench.ExperimentPlan(instance_path=args.instance, algorithm=args.algorithm,
                                params=solver_params(args, inst.name), metric=args.metric,
                                repetitions=args.runs, base_seed=args.seed)
    records, stats = bench.run_experiment(plan, workers=args.workers)
    target = bench.emit_artifacts(records, stats, args.out_dir, inst, args.algorithm,
                                  dmat=distance_matrix(inst, args.metric))
    for col, value in zip(bench.SUMMARY_COLUMNS, stats.row()):
        print(f"{col:26s} {value:.3f}" if isinstance(value, float) else f"{col:26s} {value}")
    print(f"artifacts: {target}")
    return 0


COMMANDS = {"info": _cmd_info, "exact": _cmd_exact, "solve": _cmd_solve, "bench": _cmd_bench}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (TsplibError, FileNotFoundError, ValueError, OSError, RuntimeError) as exc:
        print(f"qgatsp {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
