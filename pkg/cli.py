"""Command line for the Kuramoto tree toolkit.

Subcommands:
    generate    write a tree file of one of the families
    critical    exact critical coupling of a tree file
    simulate    integrate the dynamics at a given coupling
    montecarlo  estimate E(k_c) for one (family, n, distribution)
    figures     reproduce figure data as CSV files
    rearrange   reassign frequencies so that k_c <= w_max - w_min

Usage (example):
    python cli.py generate binary 15 --seed 3 --out data/trees/binary15.json
    python cli.py critical data/trees/binary15.json
    python cli.py simulate data/trees/chain3.json --k-rel 1.05
    python cli.py montecarlo chain 100 --samples 100000 --out data/chain.csv
    python cli.py figures 4 9 11 --out data/figures

Exit codes: 0 success, 2 parse error, 3 invalid tree, 4 bad parameters.
Defaults for --seed, --workers, --samples and the figure directory come
from KURAMOTO_* variables in the environment or .env.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path
from typing import List, Optional

import pandas as pd
from pydantic import ValidationError

ROOT = Path(__file__).resolve().parent
for folder in ("src", "pipeline"):
    path = str(ROOT / folder)
    if path not in sys.path:
        sys.path.insert(0, path)

from config import Settings, get_settings
from critical_coupling import critical_coupling
from dynamics import SimulationConfig, integrate, save_trajectory
from errors import STRUCTURE_ERRORS, KuramotoError, ParseError
from figures import FigureReproductionPipeline
from montecarlo import McCampaign, check_bounds, estimate_row, run_campaign
from rearrange import POOL_ORDERS, rearrange
from schemas import RearrangementDocument, TreeDocument, read_tree, write_document, write_tree
from tree_model import diameter, generate_tree, parse_distribution

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_STRUCTURE = 3
EXIT_PARAMETERS = 4


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a value >= 1, got {value}")
    return value


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not value > 0:
        raise argparse.ArgumentTypeError(f"expected a value > 0, got {value}")
    return value


def _distribution(args: argparse.Namespace):
    if args.dist == "uniform":
        return parse_distribution("uniform", lo=args.lo, hi=args.hi)
    return parse_distribution("normal", mean=args.mean, sd=args.sd)


def _add_distribution_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--dist", choices=["uniform", "normal"], default="uniform")
    parser.add_argument("--lo", type=float, help="uniform lower end (default 0)")
    parser.add_argument("--hi", type=float, help="uniform upper end (default 1)")
    parser.add_argument("--mean", type=float, help="normal mean (default 0.5)")
    parser.add_argument("--sd", type=float, help="normal standard deviation (default sqrt(1/12))")


def build_parser(settings: Settings) -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=settings.seed, help="master seed")
    common.add_argument("--out", type=str, default=None, help="output file or directory")
    common.add_argument("--workers", type=_positive_int, default=settings.workers)
    common.add_argument("--samples", type=_positive_int, default=settings.samples)

    parser = argparse.ArgumentParser(
        description="Critical coupling of Kuramoto oscillator trees"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    critical = commands.add_parser("critical", parents=[common], help="exact k_c of a tree file")
    critical.add_argument("tree", help="tree document (JSON)")
    critical.set_defaults(handler=cmd_critical)

    simulate = commands.add_parser("simulate", parents=[common], help="integrate the dynamics")
    simulate.add_argument("tree", help="tree document (JSON)")
    coupling = simulate.add_mutually_exclusive_group(required=True)
    coupling.add_argument("--k", type=float, help="coupling strength")
    coupling.add_argument("--k-rel", type=float, help="coupling as a multiple of k_c")
    simulate.add_argument("--dt", type=_positive_float, default=SimulationConfig().dt)
    simulate.add_argument("--t-max", type=_positive_float, default=SimulationConfig().t_max)
    simulate.add_argument("--fp-tol", type=_positive_float, default=SimulationConfig().fp_tol)
    simulate.add_argument("--init", choices=["zeros", "uniform"], default="zeros")
    simulate.add_argument("--stride", type=_positive_int, default=SimulationConfig().save_stride)
    simulate.add_argument("--frame", choices=["rotating", "lab"], default="rotating")
    simulate.set_defaults(handler=cmd_simulate)

    montecarlo = commands.add_parser("montecarlo", parents=[common], help="estimate E(k_c)")
    montecarlo.add_argument("family", help="chain, star, dumbbell, binary, tadpole(D), random_uniform, scale_free")
    montecarlo.add_argument("n", type=int)
    _add_distribution_flags(montecarlo)
    montecarlo.add_argument("--full", action="store_true", help="use the full sample count")
    montecarlo.add_argument("--histogram", action="store_true", help="also write a 200-bin histogram")
    montecarlo.add_argument("--bounds", action="store_true", help="check the general-tree bounds")
    montecarlo.set_defaults(handler=cmd_montecarlo)

    figures = commands.add_parser("figures", parents=[common], help="reproduce figure data")
    figures.add_argument("ids", nargs="+", help="figure ids, e.g. 4 5 9 or tadpole")
    figures.add_argument("--full", action="store_true", help="use the full sample count")
    figures.set_defaults(handler=cmd_figures)

    rearranged = commands.add_parser("rearrange", parents=[common], help="rearrange frequencies")
    rearranged.add_argument("tree", help="tree document (JSON)")
    rearranged.add_argument("--root", type=int, default=0)
    rearranged.add_argument(
        "--pool", choices=POOL_ORDERS, default="farthest", help="order inside each selection run"
    )
    rearranged.set_defaults(handler=cmd_rearrange)

    generate = commands.add_parser("generate", parents=[common], help="write a tree file")
    generate.add_argument("kind", help="chain, star, dumbbell, binary, tadpole(D), random_uniform, scale_free")
    generate.add_argument("n", type=int)
    _add_distribution_flags(generate)
    generate.set_defaults(handler=cmd_generate)

    return parser


# ------------------ Subcommands ------------------


def cmd_critical(args: argparse.Namespace, settings: Settings) -> int:
    tree = read_tree(args.tree)
    report = critical_coupling(tree)

    print(f"k_c = {report.k_c:.6f}")
    print(f"argmax edge: {report.argmax_edge[0]}-{report.argmax_edge[1]}")
    print(f"diameter: {report.diameter}, max partition: {report.max_partition}")
    print(f"{'edge':>12}  {'omega':>12}")
    for (u, v), omega in report.omegas:
        print(f"{f'{u}-{v}':>12}  {omega:12.6f}")

    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(report.to_json() + "\n", encoding="utf-8")
        print(f"✓ Report written to {out}")
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace, settings: Settings) -> int:
    tree = read_tree(args.tree)
    if args.k is not None:
        k = args.k
    else:
        k = args.k_rel * critical_coupling(tree).k_c

    cfg = SimulationConfig(
        dt=args.dt,
        t_max=args.t_max,
        fp_tol=args.fp_tol,
        init_phases=args.init,
        save_stride=args.stride,
        frame=args.frame,
    )
    start = time.time()
    trajectory = integrate(tree, k, cfg, seed=args.seed)
    elapsed = time.time() - start

    print(f"k = {k:.6f}")
    print(f"max |dphi/dt| at t_max: {float(abs(trajectory.final_velocities).max()):.3e}")
    print(f"synchronized: {'true' if trajectory.synchronized else 'false'}")
    print(f"Integration time: {elapsed:.3f}s ({cfg.steps} steps)")

    if args.out:
        path = save_trajectory(trajectory, args.out)
        print(f"✓ Trajectory written to {path}")
    return EXIT_OK


def _append_rows(frame: pd.DataFrame, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    exists = path.exists() and path.stat().st_size > 0
    frame.to_csv(path, mode="a" if exists else "w", header=not exists, index=False)


def cmd_montecarlo(args: argparse.Namespace, settings: Settings) -> int:
    campaign = McCampaign(
        family=args.family,
        n=args.n,
        dist=_distribution(args),
        samples=settings.full_samples if args.full else args.samples,
        master_seed=args.seed,
    )
    print(f"Running {campaign.family} n={campaign.n} ({campaign.dist.kind}, {campaign.samples} samples)...")

    start = time.time()
    estimate = run_campaign(
        campaign, workers=args.workers, histogram=args.histogram, progress=sys.stderr.isatty()
    )
    elapsed = time.time() - start

    row = pd.DataFrame([estimate_row(campaign, estimate)])
    print(row.to_csv(index=False), end="")
    print(f"Campaign time: {elapsed:.3f}s")

    if args.bounds:
        report = check_bounds(campaign, estimate)
        print(f"D = {report.D}, P = {report.P}")
        for name, holds in report.checks.items():
            value = getattr(report, name)
            print(f"  {'✓' if holds else '✗'} {name}: {value:.6f}")
        if not report.all_hold:
            print("⚠️  Some bounds are violated beyond the sampling error")

    if args.out:
        out = Path(args.out)
        _append_rows(row, out)
        print(f"✓ Row appended to {out}")
        if args.histogram:
            width = estimate.histogram_max / len(estimate.histogram)
            bins = pd.DataFrame(
                {
                    "bin_left": [i * width for i in range(len(estimate.histogram))],
                    "bin_right": [(i + 1) * width for i in range(len(estimate.histogram))],
                    "count": estimate.histogram,
                }
            )
            histogram_path = out.with_name(f"{out.stem}_histogram.csv")
            bins.to_csv(histogram_path, index=False)
            print(f"✓ Histogram written to {histogram_path}")
    return EXIT_OK


def cmd_figures(args: argparse.Namespace, settings: Settings) -> int:
    # reject every unknown id before running anything
    names = [FigureReproductionPipeline.resolve(figure) for figure in args.ids]

    pipeline = FigureReproductionPipeline(
        out_dir=args.out or settings.output_dir,
        samples=settings.full_samples if args.full else args.samples,
        master_seed=args.seed,
        workers=args.workers,
        progress=sys.stderr.isatty(),
    )

    start = time.time()
    written = 0
    for figure in args.ids:
        result = pipeline.run(figure)
        written += len(result["files"])

    print(f"\n{'=' * 80}")
    print(f"✓ {len(names)} figure(s), {written} file(s) in {time.time() - start:.1f}s")
    print(f"{'=' * 80}")
    return EXIT_OK


def cmd_rearrange(args: argparse.Namespace, settings: Settings) -> int:
    tree = read_tree(args.tree)
    result = rearrange(tree, root=args.root, pool=args.pool)
    print(f"k_c before: {result.k_c_before:.6f}")
    print(f"k_c after:  {result.k_c_after:.6f}")
    print(f"bound (w_max - w_min): {result.bound:.6f}")

    document = RearrangementDocument.from_result(tree, result, root=args.root)
    if args.out:
        path = write_document(document, args.out)
        print(f"✓ Rearrangement written to {path}")
    else:
        print(document.to_json(), end="")
    return EXIT_OK


def cmd_generate(args: argparse.Namespace, settings: Settings) -> int:
    tree = generate_tree(args.kind, args.n, _distribution(args), seed=args.seed)
    if args.out:
        path = write_tree(tree, args.out)
        print(f"✓ {args.kind} tree with n={tree.n} (diameter {diameter(tree)}) written to {path}")
    else:
        print(TreeDocument.from_tree(tree).to_json(), end="")
    return EXIT_OK


# ------------------ Entry point ------------------


def _fail(message: object) -> None:
    print(f"✗ {message}", file=sys.stderr)


def main(argv: Optional[List[str]] = None) -> int:
    try:
        settings = get_settings()
    except ValueError as exc:
        _fail(exc)
        return EXIT_PARAMETERS

    parser = build_parser(settings)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors and 0 for --help
        return int(exc.code or 0)

    try:
        return args.handler(args, settings)
    except ParseError as exc:
        _fail(exc)
        return EXIT_PARSE
    except STRUCTURE_ERRORS as exc:
        _fail(f"invalid tree: {exc}")
        return EXIT_STRUCTURE
    except (KuramotoError, ValidationError) as exc:
        _fail(exc)
        return EXIT_PARAMETERS


if __name__ == "__main__":
    sys.exit(main())
