"""Command-line front end.

Commands: ``generate``, ``curvature``, ``metric``, ``heat {apply,mass,verdict}``,
``verify``.  Graphs come from ``--input`` (gammaflow-graph-v1 JSON) or
``--family`` specs like ``path:10`` or ``birth_death:400 --b "(k+1)^3"``.
Reports embed the resolved configuration and are byte-identical for
identical configurations (suppress the timestamp with ``--no-timestamp``).

Exit codes follow the CI contract: 0 all checks pass, 1 any failure or
input/validation error, 2 any inconclusive check or unknown check name.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .errors import GammaflowError
from .families import FamilySpec, parse_family
from .graph import WeightedGraph, delta, load, sparse_map, to_dict
from .heat import apply_semigroup, build_semigroup, exhaustion_mass_curve
from .metrics import completeness_certificate, default_intrinsic_metric, verify_intrinsic
from .operators import curvature_profile, verify_cd
from .report import aggregate_exit_code
from .verify import CHECK_NAMES, check_stochastic_completeness, run_check_suite


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _add_input_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", help="graph file (gammaflow-graph-v1 JSON)")
    p.add_argument("--family", help="family spec, e.g. path:10 or hypercube:3")
    p.add_argument("--flavor", default="combinatorial",
                   choices=["combinatorial", "normalized", "custom"],
                   help="measure flavor for generated families")
    p.add_argument("--m", default="1", metavar="EXPR",
                   help="birth-death measure sequence in k, e.g. '1' or 'k+1'")
    p.add_argument("--b", default="1", metavar="EXPR",
                   help="birth-death edge weights in k, e.g. '(k+1)^3'")


def _add_output_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--output", help="output path (default: stdout)")
    p.add_argument("--format", default="json", choices=["json", "csv"])
    p.add_argument("--no-timestamp", action="store_true",
                   help="omit the timestamp field for byte-identical reports")


def _add_run_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=None,
                   help="worker count (falls back to GAMMAFLOW_JOBS, then 1)")
    p.add_argument("--tol-curvature", type=float, default=1e-8)
    p.add_argument("--tol-psd", type=float, default=1e-10)
    p.add_argument("--tol-check", type=float, default=1e-7)


def _jobs(args) -> int:
    if args.jobs is not None:
        return max(1, args.jobs)
    env = os.environ.get("GAMMAFLOW_JOBS")
    return max(1, int(env)) if env else 1


def _family_spec(args) -> FamilySpec:
    flavor = args.flavor
    if args.family.startswith("birth_death") and flavor != "normalized":
        flavor = "custom"
    return parse_family(args.family, flavor=flavor, m_expr=args.m, b_expr=args.b)


def _load_graph(args) -> tuple[WeightedGraph, str]:
    if args.input and args.family:
        raise ValueError("give either --input or --family, not both")
    if args.input:
        return load(args.input), args.input
    if args.family:
        from .families import generate_family
        return generate_family(_family_spec(args)), args.family
    raise ValueError("an input graph is required: pass --input or --family")


def _config(args, command: str, **extra) -> dict:
    cfg = {
        "command": command,
        "input": getattr(args, "input", None),
        "family": getattr(args, "family", None),
        "flavor": getattr(args, "flavor", None),
        "seed": getattr(args, "seed", None),
        "jobs": _jobs(args) if hasattr(args, "jobs") else None,
        "format": args.format,
        "tolerances": {
            "curvature": getattr(args, "tol_curvature", None),
            "psd": getattr(args, "tol_psd", None),
            "check": getattr(args, "tol_check", None),
        },
    }
    cfg.update(extra)
    return cfg


def _emit(args, payload: dict, csv_lines: list[str] | None = None) -> None:
    if not args.no_timestamp:
        payload = {"timestamp": datetime.now(timezone.utc).isoformat(), **payload}
    if args.format == "csv" and csv_lines is not None:
        text = "\n".join(csv_lines) + "\n"
    else:
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_function(g: WeightedGraph, spec: str, seed: int) -> np.ndarray:
    kind, _, rest = spec.partition(":")
    if kind == "delta":
        return delta(g, rest)
    if kind == "const":
        return np.full(g.n, float(rest or 1.0))
    if kind == "random":
        return np.random.default_rng(seed).standard_normal(g.n)
    raise ValueError(f"unknown function spec {spec!r}; use delta:ID, const:V, or random")


def _parse_values(text: str, cast=float) -> list:
    return [cast(v) for v in text.split(",") if v.strip()]


# ---------------------------------------------------------------------------
# command handlers
# ---------------------------------------------------------------------------

def cmd_generate(args) -> int:
    if not args.family:
        raise ValueError("generate requires --family")
    from .families import generate_family
    g = generate_family(_family_spec(args))
    payload = to_dict(g)
    csv_lines = None
    if args.format == "csv":
        csv_lines = ["u,v,mu"] + [f"{u},{v},{_fmt(w)}" for u, v, w in g.edges()]
    _emit(args, payload, csv_lines)
    return 0


def cmd_curvature(args) -> int:
    g, source = _load_graph(args)
    results, k_min = curvature_profile(g, tol=args.tol_curvature,
                                       psd_tol=args.tol_psd, jobs=_jobs(args))
    reports = []
    if args.verify_cd:
        reports.append(verify_cd(g, k_min, trials=args.trials, seed=args.seed,
                                 tol=args.tol_check))
    payload = {
        "config": _config(args, "curvature", source=source, trials=args.trials,
                          verify_cd=args.verify_cd),
        "K_min": k_min,
        "results": [
            {"vertex": r.vertex, "curvature": r.curvature,
             "bracket_lo": r.bracket[0], "bracket_hi": r.bracket[1],
             "minimizer": r.minimizer}
            for r in results
        ],
        "reports": [r.to_dict() for r in reports],
    }
    csv_lines = ["vertex,curvature,bracket_lo,bracket_hi"] + [
        f"{r.vertex},{_fmt(r.curvature)},{_fmt(r.bracket[0])},{_fmt(r.bracket[1])}"
        for r in results
    ]
    _emit(args, payload, csv_lines)
    return aggregate_exit_code(reports) if reports else 0


def cmd_metric(args) -> int:
    g, source = _load_graph(args)
    base = args.base or g.vertices[0]
    metric = default_intrinsic_metric(g, base)
    reports = []
    certificate = None
    if args.verify_intrinsic:
        reports.append(verify_intrinsic(g))
    if args.certificate:
        seq, rep = completeness_certificate(g, base, args.certificate, metric=metric)
        reports.append(rep)
        certificate = {"gamma_sups": seq.gamma_sups,
                       "bounds": [1.0 / (2.0 * k * k) for k in range(1, args.certificate + 1)]}
    payload = {
        "config": _config(args, "metric", source=source, base=base,
                          certificate=args.certificate),
        "metric": metric.to_dict(),
        "certificate": certificate,
        "reports": [r.to_dict() for r in reports],
    }
    csv_lines = ["vertex,dist"] + [
        f"{v},{_fmt(d)}" for v, d in zip(g.vertices, metric.dist)
    ]
    _emit(args, payload, csv_lines)
    return aggregate_exit_code(reports) if reports else 0


def cmd_heat_apply(args) -> int:
    g, source = _load_graph(args)
    op = build_semigroup(g, mode=args.mode)
    f = _parse_function(g, args.f, args.seed)
    value = apply_semigroup(op, args.t, f)
    payload = {
        "config": _config(args, "heat apply", source=source, t=args.t, f=args.f,
                          mode=args.mode),
        "function": sparse_map(g, f),
        "values": {v: float(val) for v, val in zip(g.vertices, value)},
    }
    csv_lines = ["vertex,value"] + [
        f"{v},{_fmt(val)}" for v, val in zip(g.vertices, value)
    ]
    _emit(args, payload, csv_lines)
    return 0


def _heat_target(args):
    """Exhaustion input: birth_death/lattice families stay symbolic so the
    host can be sized from the radii; anything else materializes."""
    if args.family:
        return _family_spec(args), args.family
    g, source = _load_graph(args)
    return g, source


def cmd_heat_mass(args) -> int:
    target, source = _heat_target(args)
    radii = _parse_values(args.radii)
    base = args.base or "0"
    curve = exhaustion_mass_curve(target, base, args.t, radii, ball_mode=args.ball)
    payload = {
        "config": _config(args, "heat mass", source=source, t=args.t,
                          radii=radii, base=base, ball=args.ball),
        "curve": curve.to_dict(),
    }
    csv_lines = ["radius,mass,deficit"] + [
        f"{_fmt(r)},{_fmt(m)},{_fmt(d)}" for r, m, d in curve.to_rows()
    ]
    _emit(args, payload, csv_lines)
    return 0


def cmd_heat_verdict(args) -> int:
    target, source = _heat_target(args)
    radii = _parse_values(args.radii)
    base = args.base or "0"
    report = check_stochastic_completeness(
        target, base, args.t, radii,
        plateau_threshold=args.threshold, ball_mode=args.ball)
    payload = {
        "config": _config(args, "heat verdict", source=source, t=args.t,
                          radii=radii, base=base, ball=args.ball,
                          threshold=args.threshold),
        "verdict": report.parameters["verdict"],
        "report": report.to_dict(),
    }
    curve = report.parameters["curve"]
    csv_lines = ["radius,mass,deficit"] + [
        f"{_fmt(r)},{_fmt(m)},{_fmt(d)}"
        for r, m, d in zip(curve["radii"], curve["masses"], curve["deficits"])
    ]
    _emit(args, payload, csv_lines)
    return aggregate_exit_code([report])


def cmd_verify(args) -> int:
    checks = list(CHECK_NAMES) if args.all else (args.check or [])
    if not checks:
        raise ValueError("select checks with --check NAME (repeatable) or --all")
    unknown = [c for c in checks if c not in CHECK_NAMES]
    if unknown:
        print(f"error: unknown check name(s): {', '.join(unknown)}", file=sys.stderr)
        print(f"valid names: {', '.join(CHECK_NAMES)}", file=sys.stderr)
        return 2
    g, source = _load_graph(args)
    times = _parse_values(args.times)
    reports = run_check_suite(
        g, checks, K=args.K, seed=args.seed, trials=args.trials, times=times,
        tol=args.tol_check, curvature_tol=args.tol_curvature,
        psd_tol=args.tol_psd, jobs=_jobs(args))
    payload = {
        "config": _config(args, "verify", source=source, checks=sorted(set(checks)),
                          K=args.K, trials=args.trials, times=times),
        "reports": [r.to_dict() for r in reports],
    }
    csv_lines = ["check,status,worst_residual"] + [
        f"{r.check_name},{r.status},{_fmt(r.worst_residual)}" for r in reports
    ]
    _emit(args, payload, csv_lines)
    return aggregate_exit_code(reports)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gammaflow",
        description="Gamma-calculus toolkit: curvature, intrinsic metrics, "
                    "heat semigroups, and theorem checks on weighted graphs.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="materialize a graph family to a file")
    _add_input_args(p)
    _add_output_args(p)
    p.set_defaults(handler=cmd_generate)

    p = sub.add_parser("curvature", help="per-vertex Bakry-Emery curvature and K_min")
    _add_input_args(p)
    _add_output_args(p)
    _add_run_args(p)
    p.add_argument("--verify-cd", action="store_true",
                   help="also verify the curvature inequality at K_min")
    p.add_argument("--trials", type=int, default=50)
    p.set_defaults(handler=cmd_curvature)

    p = sub.add_parser("metric", help="default intrinsic metric from a base vertex")
    _add_input_args(p)
    _add_output_args(p)
    _add_run_args(p)
    p.add_argument("--base", help="base vertex (default: first vertex)")
    p.add_argument("--verify-intrinsic", action="store_true")
    p.add_argument("--certificate", type=int, metavar="K_MAX",
                   help="build and verify cutoff functions eta_k for k=1..K_MAX")
    p.set_defaults(handler=cmd_metric)

    heat = sub.add_parser("heat", help="heat semigroup evaluations")
    hsub = heat.add_subparsers(dest="subcommand", required=True)

    p = hsub.add_parser("apply", help="evaluate P_t f")
    _add_input_args(p)
    _add_output_args(p)
    _add_run_args(p)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--f", default="delta:0", help="delta:ID, const:V, or random")
    p.add_argument("--mode", default="spectral", choices=["spectral", "ode"])
    p.set_defaults(handler=cmd_heat_apply)

    p = hsub.add_parser("mass", help="exhaustion heat-mass curve")
    _add_input_args(p)
    _add_output_args(p)
    _add_run_args(p)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--radii", required=True, help="comma-separated increasing radii")
    p.add_argument("--base", help="base vertex (default: '0')")
    p.add_argument("--ball", default="hop", choices=["hop", "intrinsic"])
    p.set_defaults(handler=cmd_heat_mass)

    p = hsub.add_parser("verdict", help="stochastic-completeness verdict")
    _add_input_args(p)
    _add_output_args(p)
    _add_run_args(p)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--radii", required=True)
    p.add_argument("--base", help="base vertex (default: '0')")
    p.add_argument("--ball", default="hop", choices=["hop", "intrinsic"])
    p.add_argument("--threshold", type=float, default=1e-6,
                   help="deficit plateau threshold for the verdict")
    p.set_defaults(handler=cmd_heat_verdict)

    p = sub.add_parser("verify", help="run theorem checks")
    _add_input_args(p)
    _add_output_args(p)
    _add_run_args(p)
    p.add_argument("--check", action="append", metavar="NAME",
                   help=f"one of: {', '.join(CHECK_NAMES)} (repeatable)")
    p.add_argument("--all", action="store_true", help="run every check")
    p.add_argument("--K", type=float, default=None,
                   help="curvature constant (default: computed K_min)")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--times", default="0.01,0.1,1", help="comma-separated times")
    p.set_defaults(handler=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except GammaflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
