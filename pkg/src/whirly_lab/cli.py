"""Command-line surface.

Every command resolves its seed from ``--seed``, then the ``WHIRLY_LAB_SEED``
environment variable, then a fixed default, and derives all randomness from
that seed through named streams.  Standard output carries the machine-readable
result (JSON by default, ``--format csv`` for a flat ``section,key,value``
table) and is byte-deterministic for a fixed command line and seed; progress
and timing notes go to standard error.

Exit codes: 0 on success (and on verifications that pass), 1 when a
verification or the acceptance suite fails, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

from .acceptance import ACCEPTANCE_SEED, CRITERIA
from .experiments import (
    ExperimentReport,
    positivity_scan,
    sharpness_check,
    verify_action_identity,
    verify_conditional_independence,
    verify_continuity,
    verify_convolution,
    verify_marginals,
    whirly_search,
)
from .montecarlo import estimate_measure
from .rng import RngStream
from .sets import BorelSet, disk_product, set_from_json
from .tree import sample_tree

ENV_SEED = "WHIRLY_LAB_SEED"
DEFAULT_SEED = ACCEPTANCE_SEED


# ---------------------------------------------------------------------------
# argument parsing helpers
# ---------------------------------------------------------------------------


def parse_complex(text: str) -> complex:
    """Parse ``X`` or ``X,Y`` as a complex number."""
    parts = text.split(",")
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"expected X or X,Y with numeric parts, got {text!r}")


def parse_set_spec(text: str) -> BorelSet:
    """Build a set from a shorthand, an inline JSON object, or a JSON file.

    Shorthand: ``disk:levelN:rR`` optionally followed by ``:cX,Y``, meaning
    the product of equal disks of radius ``R`` (centered at ``X+Yi``) over all
    level-``N`` coordinates.
    """
    text = text.strip()
    if text.startswith("{"):
        try:
            return set_from_json(json.loads(text))
        except (json.JSONDecodeError, ValueError, KeyError, TypeError) as exc:
            raise argparse.ArgumentTypeError(f"bad inline set JSON: {exc}")
    if text.startswith("disk:"):
        parts = text.split(":")
        try:
            if len(parts) not in (3, 4) or not parts[1].startswith("level"):
                raise ValueError("expected disk:levelN:rR[:cX,Y]")
            level = int(parts[1][len("level"):])
            if not parts[2].startswith("r"):
                raise ValueError("expected radius as rR")
            radius = float(parts[2][1:])
            center = 0j
            if len(parts) == 4:
                if not parts[3].startswith("c"):
                    raise ValueError("expected center as cX,Y")
                center = parse_complex(parts[3][1:])
            return disk_product(level, center, radius)
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise argparse.ArgumentTypeError(f"bad disk shorthand {text!r}: {exc}")
    try:
        with open(text, "r", encoding="utf-8") as handle:
            return set_from_json(json.load(handle))
    except OSError as exc:
        raise argparse.ArgumentTypeError(f"cannot read set file {text!r}: {exc}")
    except (json.JSONDecodeError, ValueError, KeyError, TypeError) as exc:
        raise argparse.ArgumentTypeError(f"bad set file {text!r}: {exc}")


def resolve_seed(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get(ENV_SEED)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{ENV_SEED} must be an integer, got {env!r}")
    return DEFAULT_SEED


def _stream(args: argparse.Namespace) -> RngStream:
    return RngStream(resolve_seed(args.seed), getattr(args, "stream", 0))


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------


def _emit_json(payload: dict, out) -> None:
    out.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _flatten(section: str, mapping: dict) -> list[tuple[str, str, str]]:
    rows = []
    for key in sorted(mapping):
        value = mapping[key]
        if isinstance(value, dict):
            rows.extend((section, f"{key}.{op}", repr(bound)) for op, bound in sorted(value.items()))
        else:
            rows.append((section, key, repr(value) if not isinstance(value, str) else value))
    return rows


def _emit_report(report: ExperimentReport, fmt: str, out) -> None:
    if fmt == "json":
        _emit_json(report.json_dict(include_runtime=False), out)
        return
    writer = csv.writer(out)
    writer.writerow(["section", "key", "value"])
    writer.writerow(["report", "name", report.name])
    writer.writerow(["report", "pass", str(report.passed).lower()])
    writer.writerow(["report", "seed", str(report.seed)])
    for row in _flatten("parameters", report.parameters):
        writer.writerow(row)
    for row in _flatten("observed", report.observed):
        writer.writerow(row)
    for row in _flatten("thresholds", report.thresholds):
        writer.writerow(row)


def _report_command(report: ExperimentReport, args: argparse.Namespace) -> int:
    verdict = "PASS" if report.passed else "FAIL"
    print(f"{verdict} {report.name} ({report.runtime_ms} ms)", file=sys.stderr)
    _emit_report(report, args.format, sys.stdout)
    return 0 if report.passed else 1


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _add_common(parser: argparse.ArgumentParser, *, workers: bool = False) -> None:
    parser.add_argument("--seed", type=int, default=None, help=f"master seed (default: ${ENV_SEED} or {DEFAULT_SEED})")
    parser.add_argument("--stream", type=int, default=0, help="stream id under the master seed")
    parser.add_argument("--format", choices=("json", "csv"), default="json", help="stdout format")
    if workers:
        parser.add_argument("--workers", type=int, default=1, help="worker threads (results are identical for any count)")


def cmd_sample(args: argparse.Namespace) -> int:
    tree = sample_tree(args.depth, _stream(args).generator())
    if args.format == "json":
        payload = {
            "depth": tree.depth,
            "levels": [[[z.real, z.imag] for z in level] for level in tree.levels],
            "seed": resolve_seed(args.seed),
        }
        _emit_json(payload, sys.stdout)
    else:
        writer = csv.writer(sys.stdout)
        writer.writerow(["section", "key", "value"])
        for n, level in enumerate(tree.levels):
            for index, z in enumerate(level):
                writer.writerow([f"level{n}", str(index), f"{z.real:.17g}{z.imag:+.17g}j"])
    return 0


def cmd_estimate(args: argparse.Namespace) -> int:
    depth = args.depth if args.depth is not None else args.set.level
    est = estimate_measure(
        args.set, depth, args.samples, _stream(args), workers=args.workers, confidence=args.confidence
    )
    if args.format == "json":
        _emit_json(est.json_dict(), sys.stdout)
    else:
        writer = csv.writer(sys.stdout)
        writer.writerow(["section", "key", "value"])
        for key, value in sorted(est.json_dict().items()):
            writer.writerow(["estimate", key, repr(value)])
    return 0


def cmd_verify_marginals(args: argparse.Namespace) -> int:
    return _report_command(verify_marginals(args.level, args.samples, _stream(args)), args)


def cmd_verify_action_identity(args: argparse.Namespace) -> int:
    report = verify_action_identity(args.level, args.k, args.s, args.trials, _stream(args))
    return _report_command(report, args)


def cmd_verify_continuity(args: argparse.Namespace) -> int:
    report = verify_continuity(
        args.radius,
        args.center,
        args.epsilon,
        args.level,
        args.samples,
        _stream(args),
        pairs=args.pairs,
        relaxed_delta=args.relaxed_delta,
        workers=args.workers,
    )
    return _report_command(report, args)


def cmd_verify_convolve(args: argparse.Namespace) -> int:
    report = verify_convolution(args.set, args.a, args.samples, _stream(args), workers=args.workers)
    return _report_command(report, args)


def cmd_verify_independence(args: argparse.Namespace) -> int:
    report = verify_conditional_independence(
        args.set, args.s, args.m, args.samples, _stream(args), workers=args.workers
    )
    return _report_command(report, args)


def cmd_positivity_scan(args: argparse.Namespace) -> int:
    report = positivity_scan(args.set, args.a, args.z_samples, args.inner_samples, _stream(args))
    return _report_command(report, args)


def cmd_whirly_search(args: argparse.Namespace) -> int:
    report = whirly_search(
        args.set,
        args.epsilon,
        args.samples,
        args.max_depth,
        _stream(args),
        z_samples=args.z_samples,
        inner_samples=args.inner_samples,
        workers=args.workers,
    )
    return _report_command(report, args)


def cmd_sharpness(args: argparse.Namespace) -> int:
    report = sharpness_check(args.a, args.b, args.dims, args.samples, _stream(args))
    return _report_command(report, args)


def cmd_suite(args: argparse.Namespace) -> int:
    if args.list:
        for criterion in CRITERIA:
            print(f"{criterion.key}: {criterion.title}")
        return 0
    scale = 0.1 if args.quick else 1.0
    if args.scale is not None:
        scale = args.scale
    seed = resolve_seed(args.seed)
    chosen = CRITERIA
    if args.criteria:
        wanted = set(args.criteria.split(","))
        unknown = wanted - {c.key for c in CRITERIA}
        if unknown:
            print(f"unknown criteria: {', '.join(sorted(unknown))}", file=sys.stderr)
            return 2
        chosen = tuple(c for c in CRITERIA if c.key in wanted)
    results = []
    for criterion in chosen:
        report = criterion.run(seed=seed, workers=args.workers, scale=scale)
        verdict = "PASS" if report.passed else "FAIL"
        print(f"{verdict} {criterion.key}: {criterion.title} ({report.runtime_ms} ms)", file=sys.stderr)
        results.append((criterion, report))
    all_passed = all(r.passed for _, r in results)
    payload = {
        "seed": seed,
        "scale": scale,
        "pass": all_passed,
        "criteria": {c.key: r.json_dict(include_runtime=False) for c, r in results},
    }
    _emit_json(payload, sys.stdout)
    return 0 if all_passed else 1


# ---------------------------------------------------------------------------
# parser assembly
# ---------------------------------------------------------------------------


def _default_disk() -> BorelSet:
    return disk_product(0, 0j, 1.0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="whirly-lab",
        description="Sample dyadic Gaussian trees, estimate cylinder-set measures, and run the verification experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw one tree and print its levels")
    p.add_argument("--depth", type=int, default=4)
    _add_common(p)
    p.set_defaults(run=cmd_sample)

    p = sub.add_parser("estimate", help="estimate the measure of a set")
    p.add_argument("--set", type=parse_set_spec, required=True, help="disk:levelN:rR[:cX,Y], inline JSON, or a JSON file")
    p.add_argument("--depth", type=int, default=None, help="sampling depth (default: the set's level)")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--confidence", type=float, default=0.95)
    _add_common(p, workers=True)
    p.set_defaults(run=cmd_estimate)

    p = sub.add_parser("verify-marginals", help="check level and innovation marginals")
    p.add_argument("--level", type=int, default=3)
    p.add_argument("--samples", type=int, default=100_000)
    _add_common(p)
    p.set_defaults(run=cmd_verify_marginals)

    p = sub.add_parser("verify-action-identity", help="check the exact whirling action identity")
    p.add_argument("--level", type=int, default=1)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("--trials", type=int, default=200)
    _add_common(p)
    p.set_defaults(run=cmd_verify_action_identity)

    p = sub.add_parser("verify-continuity", help="check measure continuity of the action")
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--center", type=parse_complex, default=0j)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--level", type=int, default=6)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--pairs", type=int, default=20)
    p.add_argument("--relaxed-delta", action="store_true", help="use the larger tolerance constant sqrt(epsilon/3)")
    _add_common(p, workers=True)
    p.set_defaults(run=cmd_verify_continuity)

    p = sub.add_parser("verify-convolve", help="check the translated-set averaging identity")
    p.add_argument("--set", type=parse_set_spec, default=_default_disk())
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=1_000_000)
    _add_common(p, workers=True)
    p.set_defaults(run=cmd_verify_convolve)

    p = sub.add_parser("verify-independence", help="check conditional independence of whirled events")
    p.add_argument("--set", type=parse_set_spec, default=_default_disk())
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--samples", type=int, default=100_000)
    _add_common(p, workers=True)
    p.set_defaults(run=cmd_verify_independence)

    p = sub.add_parser("positivity-scan", help="scan translated measures for positivity")
    p.add_argument("--set", type=parse_set_spec, default=_default_disk())
    p.add_argument("--a", type=float, default=-2.0)
    p.add_argument("--z-samples", type=int, default=200)
    p.add_argument("--inner-samples", type=int, default=10_000)
    _add_common(p)
    p.set_defaults(run=cmd_positivity_scan)

    p = sub.add_parser("whirly-search", help="search for whirling elements that inflate a set")
    p.add_argument("--set", type=parse_set_spec, default=_default_disk())
    p.add_argument("--epsilon", type=float, default=0.5)
    p.add_argument("--samples", type=int, default=200_000)
    p.add_argument("--max-depth", type=int, default=12)
    p.add_argument("--z-samples", type=int, default=200)
    p.add_argument("--inner-samples", type=int, default=10_000)
    _add_common(p, workers=True)
    p.set_defaults(run=cmd_whirly_search)

    p = sub.add_parser("sharpness", help="check concentration of the scaling statistic")
    p.add_argument("--a", type=float, default=2.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--dims", type=int, default=10_000)
    p.add_argument("--samples", type=int, default=200)
    _add_common(p)
    p.set_defaults(run=cmd_sharpness)

    p = sub.add_parser("suite", help="run the acceptance criteria")
    p.add_argument("--quick", action="store_true", help="run at scale 0.1")
    p.add_argument("--scale", type=float, default=None, help="explicit sample-count scale")
    p.add_argument("--criteria", type=str, default=None, help="comma-separated criterion keys")
    p.add_argument("--list", action="store_true", help="list criteria and exit")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(run=cmd_suite)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.run(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
