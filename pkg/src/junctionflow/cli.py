"""Command-line entry point.

Subcommands:
  simulate    run one scenario (baseline node solver or a given control)
  optimize    run the coordinate-ascent control search
  sweep-delta best penalized cost across a list of penalty weights
  validate    run the built-in oracle suites and print pass/fail lines

Exit codes: 0 success, 1 invariant violation or failed validation,
2 bad input.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import io as csvio
from .arc import BoundaryFluxError, CFLViolation, InvariantViolation
from .costs import cost_breakdown, delta_sweep
from .flux import DomainError
from .optimize import local_search
from .scenarios import load_scenario
from .simulate import run_scenario


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="junctionflow", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="simulate one scenario")
    sim.add_argument("scenario", help="bundled name (case1/case2/case3) or JSON path")
    sim.add_argument("-o", "--output", required=True, help="output directory")
    group = sim.add_mutually_exclusive_group(required=True)
    group.add_argument("--baseline", action="store_true",
                       help="flux-maximization node solver, no control")
    group.add_argument("--control", metavar="CSV",
                       help="piecewise-constant control file (t_start,t_end,g1..gm)")

    opt = sub.add_parser("optimize", help="search for a better inflow control")
    opt.add_argument("scenario")
    opt.add_argument("-o", "--output", required=True)
    opt.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                     help="parallel candidate evaluations (default: all cores)")
    opt.add_argument("--seedless", action="store_true",
                     help="accepted for compatibility; the search is "
                          "deterministic and uses no randomness")

    sw = sub.add_parser("sweep-delta", help="penalty-weight sweep")
    sw.add_argument("scenario")
    sw.add_argument("--deltas", required=True,
                    help="comma-separated penalty weights, e.g. 0.4,0.2,0.1,0")
    sw.add_argument("-o", "--output", required=True)
    sw.add_argument("--threads", type=int, default=os.cpu_count() or 1)

    sub.add_parser("validate", help="run the oracle suites")
    return p


def _write_run(outdir, result, spec, control=None):
    os.makedirs(outdir, exist_ok=True)
    csvio.write_node_traces(os.path.join(outdir, "traces.csv"), result)
    breakdown = cost_breakdown(spec, result.incoming, result.dts,
                               matrix_path=result.matrix_path,
                               point_traces=result.point_traces)
    csvio.write_cost_report(
        os.path.join(outdir, "cost_report.csv"),
        [(spec.delta, breakdown.integral, breakdown.tv_controls_total,
          breakdown.tv_matrix, breakdown.penalized)],
    )
    csvio.write_snapshots(outdir, result)
    if control is not None:
        csvio.write_control(os.path.join(outdir, "control.csv"),
                            control, spec.horizon)
    return breakdown


def _cmd_simulate(args) -> int:
    scn = load_scenario(args.scenario)
    control = None
    if args.control:
        control = csvio.read_control(args.control)
    result = run_scenario(scn, control=control, baseline=args.baseline)
    breakdown = _write_run(args.output, result, scn.cost, control=control)
    mode = "baseline" if args.baseline else "controlled"
    print(f"{scn.name} [{mode}] integral={breakdown.integral:.6f} "
          f"tv={breakdown.tv_controls_total:.6f} "
          f"penalized={breakdown.penalized:.6f}")
    return 0


def _cmd_optimize(args) -> int:
    scn = load_scenario(args.scenario)
    search = local_search(scn, threads=max(1, args.threads))
    breakdown = _write_run(args.output, search.result, scn.cost,
                           control=search.control)
    csvio.write_progress(os.path.join(args.output, "progress.csv"),
                         search.progress)
    print(f"{scn.name} [optimized] sweeps={search.sweeps} "
          f"integral={breakdown.integral:.6f} "
          f"tv={breakdown.tv_controls_total:.6f} "
          f"penalized={breakdown.penalized:.6f}")
    return 0


def _cmd_sweep(args) -> int:
    scn = load_scenario(args.scenario)
    try:
        deltas = [float(tok) for tok in args.deltas.split(",") if tok.strip() != ""]
    except ValueError:
        raise ValueError(f"could not parse --deltas {args.deltas!r}") from None
    if not deltas:
        raise ValueError("--deltas must list at least one value")

    def handle(scenario):
        search = local_search(scenario, threads=max(1, args.threads))
        return search.control, search.breakdown

    entries = delta_sweep(scn, deltas, handle)
    os.makedirs(args.output, exist_ok=True)
    csvio.write_cost_report(
        os.path.join(args.output, "sweep.csv"),
        [(e.delta, e.integral, e.tv_controls, e.tv_matrix, e.cost)
         for e in entries],
    )
    for e in entries:
        print(f"delta={e.delta:g} penalized={e.cost:.6f} integral={e.integral:.6f}")
    return 0


def _cmd_validate(args) -> int:
    from .validation import run_all
    ok = run_all(verbose=True)
    return 0 if ok else 1


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "optimize":
            return _cmd_optimize(args)
        if args.command == "sweep-delta":
            return _cmd_sweep(args)
        if args.command == "validate":
            return _cmd_validate(args)
        return 2
    except (DomainError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (CFLViolation, BoundaryFluxError, InvariantViolation, RuntimeError) as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
