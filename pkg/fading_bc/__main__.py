#!/usr/bin/env python3
"""
fading-bc  -  Rate regions of the two-user ergodic fading Gaussian broadcast
channel with partial channel-state knowledge at the transmitter.
"""

import argparse
import json
import logging
import sys
import time
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import pyperclip

from fading_bc.config import (
    BOUND_CHOICES,
    FORMAT_CHOICES,
    RESTRICTIONS,
    RunConfig,
    load_config,
    serialize_config,
)
from fading_bc.errors import ConfigError, FadingBCError, NoCapacityResult, VerificationFailed
from fading_bc.fading_model import CsitPartition, csit_refines_order
from fading_bc.policy_optimizer import (
    SupportResult,
    trace,
    trace_bounds,
    waterfill_sumrate,
)
from fading_bc.region_geometry import RateRegion, octant_directions, support
from fading_bc.report import RunReport, emit_report, load_report
from fading_bc.verify_suites import VERIFY_SUITES, run_suites

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"

# (inner bound, outer bound) traced by `region` and `secrecy`
BOUND_PAIRS = {
    "region": ("inner", "outer"),
    "secrecy": ("secrecy_inner", "secrecy_outer"),
}

# inner and outer hulls must agree this closely under perfect CSIT
PERFECT_CSIT_TOL = 1e-6


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML run config")
    common.add_argument("--bound", choices=BOUND_CHOICES, help="Which bound(s) to trace")
    common.add_argument(
        "--restriction", choices=list(RESTRICTIONS), help="Outer-bound policy restriction"
    )
    common.add_argument("--directions", type=int, help="Number of weight directions")
    common.add_argument("--seed", type=int, help="Optimizer random seed")
    common.add_argument("--out", help="Output directory")
    common.add_argument(
        "--format",
        action="append",
        choices=FORMAT_CHOICES,
        dest="formats",
        help="Output format (repeatable)",
    )
    common.add_argument(
        "--timing", action="store_true", help="Include wall-clock time in report.json"
    )
    common.add_argument(
        "-c", "--clipboard", action="store_true", help="Copy the summary to clipboard"
    )
    common.add_argument("-s", "--stdout", action="store_true", help="Print the summary")
    common.add_argument(
        "-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug"
    )

    parser = argparse.ArgumentParser(
        prog="fading-bc",
        description="Rate regions of the ergodic fading Gaussian broadcast channel",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("region", parents=[common], help="Trace inner/outer rate regions")
    sub.add_parser("sumrate", parents=[common], help="Sum-rate capacity by water-filling")
    sub.add_parser("secrecy", parents=[common], help="Trace secrecy rate regions")
    sub.add_parser("capacity", parents=[common], help="Closed capacity results")

    verify = sub.add_parser("verify", parents=[common], help="Run verification suites")
    verify.add_argument(
        "--suite", action="append", choices=list(VERIFY_SUITES), help="Suite to run"
    )
    verify.add_argument("--quick", action="store_true", help="Smaller draw counts")

    emit = sub.add_parser("emit", parents=[common], help="Render a stored report.json")
    emit.add_argument("report", help="Path to a report.json")
    emit.add_argument("--svg-r0", type=float, default=0.0, help="R0 of the SVG slice")
    return parser


def configure_logging(verbosity: int):
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    logging.basicConfig(level=level, format=LOG_FORMAT)


def resolve_config(args) -> RunConfig:
    if not args.config:
        raise ConfigError(f"{args.command} needs --config <path>")
    config = load_config(args.config)
    return config.with_overrides(
        bound=args.bound,
        restriction=args.restriction,
        directions=args.directions,
        seed=args.seed,
        out=args.out,
        formats=tuple(args.formats) if args.formats else None,
    )


def region_summary(regions: Dict[str, RateRegion]) -> Dict[str, object]:
    return {
        name: {
            "vertices": len(region.vertices),
            "max_common_rate": support(region, (1, 0, 0)),
            "max_sum_rate": support(region, (1, 1, 1)),
        }
        for name, region in regions.items()
    }


def format_regions(summary: Dict[str, Dict[str, object]]) -> str:
    lines = []
    for name, entry in summary.items():
        lines.append(
            f"{name}: {entry['vertices']} vertices, "
            f"max R0 {entry['max_common_rate']:.6f} bits, "
            f"max R0+R1+R2 {entry['max_sum_rate']:.6f} bits"
        )
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def trace_pair(
    config: RunConfig, partition: CsitPartition, command: str
) -> Tuple[Dict[str, RateRegion], List[SupportResult]]:
    """
    Trace the inner and/or outer bound of `command`.

    With both bounds the traces seed each other (see trace_bounds), so the
    traced outer region contains the traced inner one.
    """
    inner_bound, outer_bound = BOUND_PAIRS[command]
    opts, power = config.optimizer, config.power
    regions: Dict[str, RateRegion] = {}
    results: List[SupportResult] = []

    if config.bound == "both":
        inner_results, regions[inner_bound], outer_results, regions[outer_bound] = (
            trace_bounds(
                partition, inner_bound, outer_bound, config.restriction_mode, opts, power
            )
        )
        results += inner_results + outer_results
    elif config.bound == "inner":
        results, regions[inner_bound] = trace(partition, inner_bound, opts=opts, power=power)
    else:
        results, regions[outer_bound] = trace(
            partition, outer_bound, config.restriction_mode, opts=opts, power=power
        )
    if command == "secrecy" and config.bound in ("outer", "both"):
        nocommon_results, regions["secrecy_nocommon"] = trace(
            partition, "secrecy_nocommon", opts=opts, power=power
        )
        results += nocommon_results
    return regions, results


def max_support_gap(first: RateRegion, second: RateRegion, n_directions: int = 64) -> float:
    return max(
        abs(support(first, w) - support(second, w)) for w in octant_directions(n_directions)
    )


def warn_if_stalled(results: Sequence[SupportResult]):
    stalled = sum(not r.converged for r in results)
    if stalled:
        logger.warning(
            "%d of %d support searches hit the iteration cap", stalled, len(results)
        )


def command_region(config: RunConfig, command: str):
    regions, results = trace_pair(config, config.partition(), command)
    summary = {"regions": region_summary(regions)}
    return regions, results, summary, format_regions(summary["regions"])


def command_sumrate(config: RunConfig):
    phi, value = waterfill_sumrate(config.partition(), config.power)
    summary = {"sum_rate": value, "phi": phi.tolist()}
    text = f"{value:.6f} bits\nphi* = [{', '.join(f'{x:.6f}' for x in phi)}]"
    return {}, [], summary, text


def command_capacity(config: RunConfig):
    """Every closed capacity result that the CSIT map admits."""
    partition = config.partition()
    opts, power = config.optimizer, config.power
    regions: Dict[str, RateRegion] = {}
    results: List[SupportResult] = []
    summary: Dict[str, object] = {"results": []}

    if partition.is_perfect:
        inner_results, inner, outer_results, regions["capacity"] = trace_bounds(
            partition, "inner", "outer", opts=opts, power=power
        )
        gap = max_support_gap(inner, regions["capacity"])
        summary["inner_outer_gap"] = gap
        summary["inner_matches_outer"] = bool(gap <= PERFECT_CSIT_TOL)
        secrecy_results, regions["secrecy_capacity"] = trace(
            partition, "secrecy_outer", opts=opts, power=power
        )
        nocommon_results, regions["nocommon_capacity"] = trace(
            partition, "perfect_nocommon", opts=opts, power=power
        )
        results += inner_results + outer_results + secrecy_results + nocommon_results
        summary["results"].append("perfect CSIT")
    if csit_refines_order(partition):
        phi, value = waterfill_sumrate(partition, power)
        summary.update({"sum_rate": value, "phi": phi.tolist()})
        secrecy_results, regions["secrecy_nocommon_capacity"] = trace(
            partition, "secrecy_nocommon", opts=opts, power=power
        )
        results += secrecy_results
        summary["results"].append("degradedness known")
    if not summary["results"]:
        raise NoCapacityResult(
            "no closed capacity result: CSIT is neither perfect nor reveals the stronger user"
        )

    summary["regions"] = region_summary(regions)
    text = ", ".join(summary["results"]) + "\n" + format_regions(summary["regions"])
    if "sum_rate" in summary:
        text = f"sum-rate capacity: {summary['sum_rate']:.6f} bits\n" + text
    return regions, results, summary, text


def command_verify(args) -> str:
    seed = args.seed if args.seed is not None else 0
    results = run_suites(args.suite, seed=seed, quick=args.quick)
    lines = [
        f"{'PASS' if r.ok else 'FAIL'} {r.name}: {r.checks} checks, worst {r.worst:.3g}"
        + (f" ({r.detail})" if r.detail else "")
        for r in results
    ]
    if args.out:
        path = Path(args.out) / "verify.json"
        path.parent.mkdir(parents=True, exist_ok=True)
        payload = {"seed": seed, "quick": args.quick, "suites": [r.to_dict() for r in results]}
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    text = "\n".join(lines)
    failed = [r.name for r in results if not r.ok]
    if failed:
        print(text)
        raise VerificationFailed(f"verification failed: {', '.join(failed)}")
    return text


def command_emit(args) -> str:
    report = load_report(args.report)
    out_dir = args.out or str(Path(args.report).parent)
    formats = tuple(args.formats) if args.formats else ("csv", "svg")
    written = emit_report(report, out_dir, formats, svg_r0=args.svg_r0)
    return "\n".join(str(p) for p in written)


def dispatch(args) -> str:
    if args.command == "verify":
        return command_verify(args)
    if args.command == "emit":
        return command_emit(args)

    config = resolve_config(args)
    started = time.perf_counter()
    if args.command in BOUND_PAIRS:
        regions, results, summary, text = command_region(config, args.command)
    elif args.command == "sumrate":
        regions, results, summary, text = command_sumrate(config)
    else:
        regions, results, summary, text = command_capacity(config)
    warn_if_stalled(results)

    report = RunReport(
        command=args.command,
        config=serialize_config(config),
        regions=regions,
        supports=[r.to_dict() for r in results],
        summary=summary,
        wall_clock=time.perf_counter() - started,
    )
    emit_report(
        report,
        config.output.dir,
        config.output.formats,
        svg_r0=config.output.svg_r0,
        include_timing=args.timing,
    )
    return text


def output(text: str, args):
    if args.stdout:
        print(text)

    if args.clipboard:
        try:
            pyperclip.copy(text)
            if args.stdout:
                print("Output copied to clipboard.", file=sys.stderr)
        except Exception as e:
            print(f"Failed to copy to clipboard: {str(e)}", file=sys.stderr)


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    configure_logging(args.verbose)

    # no output option given: print
    if not (args.clipboard or args.stdout):
        args.stdout = True

    try:
        text = dispatch(args)
    except FadingBCError as e:
        print(f"Error: {e}", file=sys.stderr)
        return e.exit_code

    output(text, args)
    return 0


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
