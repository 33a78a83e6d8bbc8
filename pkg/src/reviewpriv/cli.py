# src/reviewpriv/cli.py

import sys
import json
import logging
import argparse
import dataclasses
from typing import Any, List, Optional

from .exceptions import ConvergenceError, ReviewPrivError
from .engine.weights import TransformMode
from .repository import InstanceRepository
from .session_manager import ReleaseManager

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_SOLVER = 2

class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; here 2 is reserved for solver failures."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="Seed for every random draw")
    common.add_argument("--tolerance", type=float, default=None, help="Projection tolerance (default 1e-9)")
    common.add_argument("--max-iterations", type=int, default=None, help="Projection iteration cap")
    common.add_argument("--output", default=None, help="Write the result here instead of stdout")
    common.add_argument("--verbose", action="store_true", help="Log progress to stderr")

    public = _Parser(add_help=False)
    public.add_argument("--transform", choices=[m.value for m in TransformMode], default=TransformMode.IDENTITY.value,
                        help="Treat the CSV as raw scores and turn them into weights first")
    public.add_argument("--normalized", default=None, help="Normalized-score CSV for the subjectivity transforms")

    ap = _Parser(prog="reviewpriv", description="Post-process noisy releases of sorted reviewer mean weights.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", parents=[common, public], help="Per-index bounds from public weights")
    p.add_argument("public", help="Public weights CSV")

    p = sub.add_parser("release", parents=[common, public], help="Project a noisy vector onto the bounds polytope")
    p.add_argument("public", help="Public weights CSV")
    p.add_argument("noisy", help="Noisy vector JSON (a list, or an object with an 'r' field)")
    p.add_argument("--total", type=float, default=None, help="Released total S; derived from the public data by default")

    p = sub.add_parser("simulate", parents=[common], help="Run a synthetic-conference experiment")
    p.add_argument("config", help="Experiment config JSON")
    p.add_argument("--dump", default=None, help="Per-trial CSV")
    p.add_argument("--instances", default=None, help="Directory for each trial's public CSV and noisy JSON")
    p.add_argument("--workers", type=int, default=None, help="Worker processes for trials")
    p.add_argument("--trials", type=int, default=None, help="Override the config's trial count")

    p = sub.add_parser("oracle", parents=[common, public], help="Brute-force Θ and check the bounds against it")
    p.add_argument("public", help="Public weights CSV")

    p = sub.add_parser("prop1", parents=[common], help="Expected errors of nearest-point projection vs raw noise")
    p.add_argument("--samples", type=int, default=None, help="Also estimate both errors by Monte Carlo")
    return ap

def _emit(payload: Any, output: Optional[str], repo: InstanceRepository) -> None:
    if output:
        repo.write_json(payload, output)
    else:
        sys.stdout.write(json.dumps(payload) + "\n")

def _dispatch(args: argparse.Namespace, manager: ReleaseManager, repo: InstanceRepository) -> None:
    if args.command == "bounds":
        pw = manager.load_public(args.public, args.transform, args.normalized)
        _emit(manager.compute_bounds(pw), args.output, repo)

    elif args.command == "release":
        pw = manager.load_public(args.public, args.transform, args.normalized)
        r = repo.load_vector(args.noisy)
        _emit(manager.release(pw, r, args.total, args.tolerance, args.max_iterations), args.output, repo)

    elif args.command == "simulate":
        if args.seed is None:
            raise ValueError("simulate requires --seed.")
        cfg = repo.load_experiment_config(args.config)
        overrides = {"base_seed": args.seed}
        if args.workers is not None:
            overrides["workers"] = args.workers
        if args.trials is not None:
            overrides["trials"] = args.trials
        if args.tolerance is not None:
            overrides["tolerance"] = args.tolerance
        if args.max_iterations is not None:
            overrides["max_iterations"] = args.max_iterations
        cfg = dataclasses.replace(cfg, **overrides)
        manager.simulate(cfg, args.output or "results.csv", dump=args.dump, instance_dir=args.instances)

    elif args.command == "oracle":
        pw = manager.load_public(args.public, args.transform, args.normalized)
        _emit(manager.oracle_report(pw), args.output, repo)

    elif args.command == "prop1":
        _emit(manager.prop1(samples=args.samples, seed=args.seed), args.output, repo)

def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_INPUT
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    repo = InstanceRepository()
    manager = ReleaseManager(repo)
    try:
        _dispatch(args, manager, repo)
    except ConvergenceError as e:
        print(f"reviewpriv: solver did not converge: {e}", file=sys.stderr)
        return EXIT_SOLVER
    except (ReviewPrivError, ValueError, OSError) as e:
        logger.debug("Command failed", exc_info=True)
        print(f"reviewpriv: {e}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK

if __name__ == "__main__":
    sys.exit(main())
