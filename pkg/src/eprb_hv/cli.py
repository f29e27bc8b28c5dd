"""Command-line front end.

Subcommands ``correlate``, ``sweep``, ``chsh`` and ``audit`` each write one
result as JSON (``{"manifest": ..., "result": ...}``) or CSV.  With CSV the
manifest goes to ``<out>.manifest.json``, or to stderr when writing to stdout.

Exit codes: 0 ok, 2 bad flags, 3 non-unit axis, 4 failed precondition,
10 CHSH violation, 11 remote dependence detected.
"""

from __future__ import annotations

import argparse
import hashlib
import math
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from . import analysis as an
from .experiment import ExperimentConfig, estimate_correlation, quadrature_expectation
from .geometry import NonUnitVectorError, UnitVector, Z_AXIS, angle_between, planar_axis, tilted_axis
from .models import ModelKind, SupportViolationError, analytic_expectation, naive_pair_expectation_analytic
from .serialize import canonical_json, dumps_csv, dumps_json, to_payload

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NON_UNIT = 3
EXIT_PRECONDITION = 4
EXIT_VIOLATED = 10
EXIT_REMOTE_DEPENDENCE = 11

COMMON_DEFAULTS = {"seed": 0, "trials": 100_000, "format": "json", "out": "-", "threads": 1}


@dataclass(frozen=True)
class CorrelateResult:
    model: ModelKind
    theta_deg: float
    a: UnitVector
    b: UnitVector
    estimate: float
    std_error: float
    analytic: float
    trials: int
    seed: int
    quadrature: float | None = None
    quadrature_nodes: int | None = None


@dataclass
class RunManifest:
    command: str
    parameters: dict[str, Any]
    seed: int
    version: str
    started_at: str
    checksums: dict[str, str] = field(default_factory=dict)


def result_checksum(result: Any) -> str:
    return hashlib.sha256(canonical_json(result).encode("utf-8")).hexdigest()


class _UsageError(Exception):
    pass


def _axis(text: str) -> UnitVector:
    try:
        return UnitVector.parse(text)
    except NonUnitVectorError:
        raise
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc


def _axis_list(text: str) -> list[UnitVector]:
    return [_axis(chunk) for chunk in text.split(";") if chunk.strip()]


def _add_common(p: argparse.ArgumentParser) -> None:
    # SUPPRESS lets the same flag appear before or after the subcommand
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="64-bit experiment seed (default 0)")
    p.add_argument("--trials", type=int, default=argparse.SUPPRESS, help="trials per estimate (default 100000)")
    p.add_argument("--format", choices=("json", "csv"), default=argparse.SUPPRESS)
    p.add_argument("--out", default=argparse.SUPPRESS, help="output path, '-' for stdout")
    p.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="worker cap; results do not depend on it")


def _model_arg(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--model", choices=[k.value for k in ModelKind], required=required)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eprb-hv", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    _add_common(parser)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("correlate", help="estimate E(a, b) for one model")
    _add_common(p)
    _model_arg(p)
    p.add_argument("--angle-deg", type=float, help="angle between a = z and b in the x-z plane")
    p.add_argument("--a", help="axis 'x,y,z' for particle 1")
    p.add_argument("--b", help="axis 'x,y,z' for particle 2")
    p.add_argument("--quadrature-nodes", type=int, help="also integrate on a grid of about this many nodes")

    p = sub.add_parser("sweep", help="E(theta) over an angle grid")
    _add_common(p)
    _model_arg(p)
    p.add_argument("--theta-start", type=float, default=0.0, help="degrees")
    p.add_argument("--theta-end", type=float, default=180.0, help="degrees")
    p.add_argument("--theta-steps", type=int, default=13, help="number of grid points")

    p = sub.add_parser("chsh", help="CHSH combination of four correlations")
    _add_common(p)
    _model_arg(p)
    p.add_argument("--optimal-planar", action="store_true", help="a, a', b, b' at 0, 90, 45, 135 degrees")
    for name in ("a", "a-prime", "b", "b-prime"):
        p.add_argument(f"--{name}", help="axis 'x,y,z'")

    p = sub.add_parser("audit", help="locality, no-signaling or ring-consistency check")
    _add_common(p)
    _model_arg(p, required=False)
    p.add_argument("--check", choices=("locality", "no-signaling", "ring"), required=True)
    p.add_argument("--probe", default="0,0,1", help="fixed lambda_1 for the locality check")
    p.add_argument("--settings", default="0,0,1;1,0,0", help="remote settings 'x,y,z;x,y,z;...'")
    p.add_argument("--random-settings", type=int, help="use this many random remote settings instead")
    p.add_argument("--b", help="particle 2 axis 'x,y,z'")
    p.add_argument("--meas-angle-deg", type=float, help="particle 2 axis at this angle (from z, or from the ring axis)")
    p.add_argument("--strict-ties", action="store_true", help="refuse probes orthogonal to a setting")
    p.add_argument("--state-axis", default="0,0,1", help="ring axis for --check ring")
    p.add_argument("--state-sign", type=int, choices=(1, -1), default=1)
    p.add_argument("--meas-axis", help="measurement axis 'x,y,z' for --check ring")
    return parser


def _fill_defaults(args: argparse.Namespace) -> None:
    for key, value in COMMON_DEFAULTS.items():
        if not hasattr(args, key):
            setattr(args, key, value)
    if args.trials < 1:
        raise _UsageError("--trials must be >= 1")
    if args.threads < 1:
        raise _UsageError("--threads must be >= 1")


def cmd_correlate(args: argparse.Namespace) -> tuple[Any, int]:
    model = ModelKind.parse(args.model)
    if args.angle_deg is not None:
        if args.a or args.b:
            raise _UsageError("give either --angle-deg or --a/--b, not both")
        if not 0.0 <= args.angle_deg <= 180.0:
            raise _UsageError("--angle-deg must lie in [0, 180]")
        theta = math.radians(args.angle_deg)
        a, b, theta_deg = Z_AXIS, planar_axis(theta), args.angle_deg
    elif args.a and args.b:
        a, b = _axis(args.a), _axis(args.b)
        theta = angle_between(a, b)
        theta_deg = math.degrees(theta)
    else:
        raise _UsageError("need --angle-deg or both --a and --b")

    est = estimate_correlation(ExperimentConfig(model, a, b, args.trials, args.seed), args.threads)
    if model is ModelKind.BELL_NAIVE:
        analytic = naive_pair_expectation_analytic(theta)
    else:
        analytic = analytic_expectation(model, a, b)
    quad = nodes = None
    if args.quadrature_nodes is not None:
        if model is ModelKind.QUANTUM_REFERENCE:
            raise _UsageError("--quadrature-nodes applies to bell-naive and matzkin only")
        if args.quadrature_nodes < 1:
            raise _UsageError("--quadrature-nodes must be positive")
        q = quadrature_expectation(model, a, b, args.quadrature_nodes)
        if q.warning:
            print(f"warning: {q.warning}", file=sys.stderr)
        quad, nodes = q.value, q.nodes
    result = CorrelateResult(
        model, theta_deg, a, b, est.mean, est.std_error, analytic, est.trials, args.seed, quad, nodes
    )
    return result, EXIT_OK


def sweep_grid(start: float, end: float, steps: int) -> list[float]:
    if steps < 1:
        raise _UsageError("--theta-steps must be >= 1")
    if start > end:
        raise _UsageError("--theta-start must not exceed --theta-end")
    if start < 0.0 or end > 180.0:
        raise _UsageError("angles must lie in [0, 180] degrees")
    if steps == 1:
        return [start]
    return [start + (end - start) * k / (steps - 1) for k in range(steps)]


def cmd_sweep(args: argparse.Namespace) -> tuple[Any, int]:
    grid = sweep_grid(args.theta_start, args.theta_end, args.theta_steps)
    rows = an.angle_sweep(ModelKind.parse(args.model), grid, args.trials, args.seed, args.threads, degrees=True)
    return rows, EXIT_OK


def cmd_chsh(args: argparse.Namespace) -> tuple[Any, int]:
    model = ModelKind.parse(args.model)
    given = [args.a, args.a_prime, args.b, args.b_prime]
    if args.optimal_planar:
        if any(given):
            raise _UsageError("--optimal-planar replaces the four axis flags")
        axes = an.optimal_planar_settings()
    elif all(given):
        axes = tuple(_axis(t) for t in given)
    else:
        raise _UsageError("need --optimal-planar or all of --a --a-prime --b --b-prime")
    report = an.chsh_scan(model, *axes, trials=args.trials, seed=args.seed, threads=args.threads)
    return report, EXIT_VIOLATED if report.violated else EXIT_OK


def _particle2_axis(args: argparse.Namespace, default_deg: float = 60.0) -> UnitVector:
    if args.b and args.meas_angle_deg is not None:
        raise _UsageError("give either --b or --meas-angle-deg")
    if args.b:
        return _axis(args.b)
    deg = default_deg if args.meas_angle_deg is None else args.meas_angle_deg
    return planar_axis(math.radians(deg))


def _remote_settings(args: argparse.Namespace) -> list[UnitVector]:
    if args.random_settings is not None:
        if args.random_settings < 0:
            raise _UsageError("--random-settings must be >= 0")
        return an.random_settings(args.random_settings, args.seed)
    return _axis_list(args.settings)


def cmd_audit(args: argparse.Namespace) -> tuple[Any, int]:
    if args.check == "ring":
        state = _axis(args.state_axis)
        if args.meas_axis and args.meas_angle_deg is not None:
            raise _UsageError("give either --meas-axis or --meas-angle-deg")
        if args.meas_axis:
            meas = _axis(args.meas_axis)
        else:
            deg = 60.0 if args.meas_angle_deg is None else args.meas_angle_deg
            meas = tilted_axis(state, math.radians(deg))
        report = an.ring_consistency_check(state, args.state_sign, meas, args.trials, args.seed, args.threads)
        return report, EXIT_OK

    if args.model is None:
        raise _UsageError(f"--check {args.check} needs --model")
    model = ModelKind.parse(args.model)
    b = _particle2_axis(args)
    settings = _remote_settings(args)
    if args.check == "locality":
        report = an.locality_audit(
            model, _axis(args.probe), b, settings, args.trials, args.seed, args.threads, strict=args.strict_ties
        )
        return report, EXIT_REMOTE_DEPENDENCE if report.depends_on_remote else EXIT_OK
    report = an.no_signaling_check(model, b, settings, args.trials, args.seed, args.threads)
    return report, EXIT_OK if report.consistent else EXIT_REMOTE_DEPENDENCE


COMMANDS = {"correlate": cmd_correlate, "sweep": cmd_sweep, "chsh": cmd_chsh, "audit": cmd_audit}


def _json_result(result: Any) -> Any:
    if isinstance(result, list):
        return {"rows": result}
    return result


def render(args: argparse.Namespace, argv: Sequence[str], result: Any) -> tuple[str, str]:
    """Return (data text, manifest JSON text) for ``result``."""
    params = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    params["argv"] = list(argv)
    manifest = RunManifest(
        command=args.command,
        parameters=params,
        seed=args.seed,
        version=__version__,
        started_at=datetime.now(timezone.utc).isoformat(),
        checksums={"result": result_checksum(_json_result(result))},
    )
    if args.format == "json":
        text = dumps_json({"manifest": to_payload(manifest), "result": to_payload(_json_result(result))})
        return text, ""
    return dumps_csv(result), dumps_json(manifest)


def _write(args: argparse.Namespace, text: str, manifest_text: str) -> None:
    if args.out == "-":
        sys.stdout.write(text)
        if manifest_text:
            sys.stderr.write(manifest_text)
        return
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    if manifest_text:
        with open(out.with_name(out.name + ".manifest.json"), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(manifest_text)


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _fill_defaults(args)
        result, code = COMMANDS[args.command](args)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NonUnitVectorError as exc:
        print(f"{parser.prog}: non-unit axis: {exc}", file=sys.stderr)
        return EXIT_NON_UNIT
    except (an.PreconditionError, SupportViolationError) as exc:
        print(f"{parser.prog}: precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    _write(args, *render(args, argv, result))
    return code


def rerun_manifest(manifest: dict[str, Any]) -> tuple[int, str]:
    """Re-execute a manifest's command; returns (exit code, result checksum)."""
    argv = [a for a in manifest["parameters"]["argv"]]
    args = build_parser().parse_args(argv)
    _fill_defaults(args)
    result, code = COMMANDS[args.command](args)
    return code, result_checksum(_json_result(result))


if __name__ == "__main__":
    sys.exit(main())
