"""Batch command-line front end.

Subcommands share --params/--format/--out and write deterministic files:
repeated runs are byte-identical, and every --out file gets a JSON sidecar
(<out>.meta.json) recording the parameter hash and tolerances used, so table
outputs can be audited. Randomness exists only in the `properties`
subcommand's sampling and is controlled by --seed; analyses never use it.

Exit codes: 0 ok, 1 input error, 2 validation failure, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .model import (
    DomainError,
    ModelParameters,
    ModelValidationError,
    PopulationState,
    classify_stability,
    cooperative_jacobian,
    equilibria,
    jacobian,
    load_parameters,
    order_leq_cone,
    params_hash,
    validate_params,
    vector_field,
)
from .integrate import IntegrationOptions, NumericalError, integrate
from .threshold import minimal_viable_w, separatrix_backward, separatrix_bisection
from .planner import minimal_release_size
from .parallel import sweep_map

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


class CliInputError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as input errors (exit 1)."""

    def error(self, message):
        raise CliInputError(message)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--params",
        default="wmelpop",
        help="parameter JSON file or preset name (default: wmelpop)",
    )
    parser.add_argument("--format", choices=("csv", "json"), default="json")
    parser.add_argument("--out", default=None, help="output path (default: stdout)")


def build_parser() -> _Parser:
    parser = _Parser(prog="wolbachia", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    eq = sub.add_parser("equilibria", help="steady states and stability report")
    _add_common(eq)

    sim = sub.add_parser("simulate", help="integrate one trajectory")
    _add_common(sim)
    sim.add_argument("--n0", type=float, required=True)
    sim.add_argument("--w0", type=float, required=True)
    sim.add_argument("--t-max", type=float, default=5000.0)
    sim.add_argument("--rel-tol", type=float, default=1e-9)
    sim.add_argument("--abs-tol", type=float, default=1e-12)
    sim.add_argument(
        "--capture-radius",
        type=float,
        default=None,
        help="stop on entering a ball of this radius around an attractor",
    )

    sep = sub.add_parser("separatrix", help="threshold curve between the basins")
    _add_common(sep)
    sep.add_argument("--method", choices=("backward", "bisection"), default="backward")
    sep.add_argument("--grid-points", type=int, default=33, help="bisection grid size")
    sep.add_argument("--tol", type=float, default=1e-6, help="bisection tolerance")
    sep.add_argument("--step", type=float, default=None, help="polyline spacing")
    sep.add_argument("--arc-budget", type=float, default=None)

    mr = sub.add_parser(
        "min-release", help="minimal single-release sizes over a grid of wild sizes"
    )
    _add_common(mr)
    mr.add_argument(
        "--n0-grid",
        default="0.25,0.5,0.75,1",
        help="comma-separated fractions of the wild carrying capacity",
    )
    mr.add_argument("--tol", type=float, default=1e-6)

    plan = sub.add_parser(
        "plan", help="minimal periodic-release campaign for one (n0, tau) cell"
    )
    _add_common(plan)
    group = plan.add_mutually_exclusive_group(required=True)
    group.add_argument("--n0", type=float, help="wild population size, individuals")
    group.add_argument(
        "--n0-frac", type=float, help="wild population size as a fraction of capacity"
    )
    plan.add_argument("--tau", type=float, required=True, help="days between releases")
    plan.add_argument("--budget", type=int, required=True, help="maximum releases")
    plan.add_argument("--tol", type=float, default=1e-3)

    props = sub.add_parser(
        "properties", help="randomized structural probes (the only --seed consumer)"
    )
    _add_common(props)
    props.add_argument("--seed", type=int, default=0)
    props.add_argument("--samples", type=int, default=200)

    return parser


def _write_output(
    text: str, args: argparse.Namespace, p: ModelParameters, meta: dict
) -> None:
    if args.out is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
        return
    _atomic_write(args.out, text if text.endswith("\n") else text + "\n")
    sidecar = {
        "command": args.command,
        "format": args.format,
        "params_hash": params_hash(p),
        "parameters": p.as_dict(),
        **meta,
    }
    _atomic_write(args.out + ".meta.json", json.dumps(sidecar, sort_keys=True) + "\n")


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".wolbachia-")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _state_dict(s: PopulationState) -> dict:
    return {"n": s.n, "w": s.w}


def _eig_list(values) -> list | None:
    if values is None:
        return None
    return [
        {"re": v.real, "im": v.imag} for v in values
    ]


def cmd_equilibria(args, p: ModelParameters) -> None:
    report = validate_params(p)
    eq = equilibria(p)
    stability = classify_stability(p)
    records = []
    for rec in (stability.e0, stability.e_n, stability.e_w, stability.e_c):
        if rec is None:
            continue
        records.append(
            {
                "label": rec.label,
                "state": _state_dict(rec.state),
                "classification": rec.classification,
                "eigenvalues": _eig_list(rec.eigenvalues),
                "by_rule": rec.by_rule,
                "unexpected_complex": rec.unexpected_complex,
            }
        )
    if args.format == "json":
        payload = {
            "n_sharp": eq.n_sharp,
            "w_sharp": eq.w_sharp,
            "coexistence_feasible": eq.e_c is not None,
            "equilibria": records,
            "validation": {
                "ok": report.ok,
                "feasible": report.feasible,
                "violations": list(report.violations),
            },
        }
        text = json.dumps(payload, sort_keys=True)
    else:
        buf = io.StringIO()
        buf.write("label,n,w,classification,eig1_re,eig1_im,eig2_re,eig2_im\n")
        for rec in records:
            eigs = rec["eigenvalues"] or [{"re": "", "im": ""}, {"re": "", "im": ""}]
            buf.write(
                f"{rec['label']},{rec['state']['n']!r},{rec['state']['w']!r},"
                f"{rec['classification']},{eigs[0]['re']!r},{eigs[0]['im']!r},"
                f"{eigs[1]['re']!r},{eigs[1]['im']!r}\n"
            )
        text = buf.getvalue()
    _write_output(text, args, p, {"tolerances": {}})


def cmd_simulate(args, p: ModelParameters) -> None:
    opts = IntegrationOptions(
        rel_tol=args.rel_tol, abs_tol=args.abs_tol, t_max=args.t_max
    )
    traj = integrate(
        p,
        PopulationState(args.n0, args.w0),
        opts,
        capture_radius=args.capture_radius,
    )
    if args.format == "json":
        text = traj.to_json()
    else:
        buf = io.StringIO()
        traj.to_csv(buf)
        text = buf.getvalue()
    meta = {
        "tolerances": {"rel_tol": repr(opts.rel_tol), "abs_tol": repr(opts.abs_tol)},
        "options": {"n0": args.n0, "w0": args.w0, "t_max": args.t_max},
    }
    _write_output(text, args, p, meta)


def cmd_separatrix(args, p: ModelParameters) -> None:
    if args.method == "backward":
        curve = separatrix_backward(p, arc_budget=args.arc_budget, step=args.step)
        tolerances = {}
    else:
        grid = np.linspace(0.0, p.n_sharp, args.grid_points)
        curve = separatrix_bisection(p, grid, tol=args.tol)
        tolerances = {"tol": repr(args.tol)}
    if args.format == "json":
        text = curve.to_json()
    else:
        buf = io.StringIO()
        curve.to_csv(buf)
        text = buf.getvalue()
    _write_output(text, args, p, {"tolerances": tolerances, "options": {"method": args.method}})


def cmd_min_release(args, p: ModelParameters) -> None:
    try:
        fractions = [float(v) for v in args.n0_grid.split(",") if v.strip()]
    except ValueError as exc:
        raise CliInputError(f"bad --n0-grid: {exc}") from exc
    if not fractions:
        raise CliInputError("--n0-grid is empty")
    n_sharp = p.n_sharp
    sizes = sweep_map(
        lambda frac: minimal_viable_w(p, frac * n_sharp, tol=args.tol), fractions
    )
    rows = [
        {
            "n0_frac": frac,
            "n0": frac * n_sharp,
            "w_min": w,
            "w_min_frac": w / n_sharp,
        }
        for frac, w in zip(fractions, sizes)
    ]
    if args.format == "json":
        text = json.dumps({"rows": rows}, sort_keys=True)
    else:
        buf = io.StringIO()
        buf.write("n0_frac,n0,w_min,w_min_frac\n")
        for r in rows:
            buf.write(f"{r['n0_frac']!r},{r['n0']!r},{r['w_min']!r},{r['w_min_frac']!r}\n")
        text = buf.getvalue()
    _write_output(text, args, p, {"tolerances": {"tol": repr(args.tol)}})


def cmd_plan(args, p: ModelParameters) -> None:
    n0 = args.n0 if args.n0 is not None else args.n0_frac * p.n_sharp
    result = minimal_release_size(p, n0, args.tau, args.budget, tol=args.tol)
    n_sharp = p.n_sharp
    row = {
        "n0_frac": result.n0 / n_sharp,
        "n0": result.n0,
        "lambda_hat": result.lambda_hat,
        "lambda_hat_frac": result.lambda_hat / n_sharp,
        "tau": result.tau,
        "releases": result.releases_used,
        "total_released": result.total_released,
        "total_released_frac": result.total_released / n_sharp,
        "duration_days": result.duration_days,
        "single_release_size": result.single_release_size,
    }
    if args.format == "json":
        text = json.dumps({"rows": [row]}, sort_keys=True)
    else:
        cols = list(row)
        buf = io.StringIO()
        buf.write(",".join(cols) + "\n")
        buf.write(",".join(repr(row[c]) for c in cols) + "\n")
        text = buf.getvalue()
    meta = {
        "tolerances": {"tol": repr(args.tol)},
        "options": {"tau": args.tau, "budget": args.budget},
    }
    _write_output(text, args, p, meta)


def cmd_properties(args, p: ModelParameters) -> None:
    """Seeded random probes of the model's structural properties."""
    rng = np.random.default_rng(args.seed)
    box_n, box_w = 2.0 * p.n_sharp, 2.0 * p.w_sharp
    checks: dict[str, dict] = {}

    states = rng.uniform(0.01, 1.0, size=(args.samples, 2)) * (box_n, box_w)
    metzler_bad = 0
    fd_worst = 0.0
    for n, w in states:
        coop = cooperative_jacobian(p, PopulationState(n, w))
        if coop[0, 1] < 0.0 or coop[1, 0] < 0.0:
            metzler_bad += 1
        step = 1e-5 * max(1.0, n, w)  # samples sit well inside the quadrant
        fd = np.empty((2, 2))
        for j, (dn_, dw_) in enumerate(((step, 0.0), (0.0, step))):
            up = vector_field(p, PopulationState(n + dn_, w + dw_))
            lo = vector_field(p, PopulationState(n - dn_, w - dw_))
            fd[:, j] = np.subtract(up, lo) / (2.0 * step)
        exact = jacobian(p, PopulationState(n, w))
        err = np.linalg.norm(fd - exact) / max(np.linalg.norm(exact), 1e-30)
        fd_worst = max(fd_worst, float(err))
    checks["metzler"] = {"violations": metzler_bad}
    checks["jacobian_fd"] = {"worst_rel_err": fd_worst, "ok": fd_worst <= 1e-5}

    triples = rng.uniform(0.0, 1.0, size=(args.samples, 3, 2)) * (box_n, box_w)
    order_bad = 0
    for a, b, c in triples:
        sa, sb, sc = (PopulationState(*a), PopulationState(*b), PopulationState(*c))
        if not order_leq_cone(sa, sa):
            order_bad += 1
        if (
            order_leq_cone(sa, sb)
            and order_leq_cone(sb, sa)
            and (sa.n, sa.w) != (sb.n, sb.w)
        ):
            order_bad += 1
        if order_leq_cone(sa, sb) and order_leq_cone(sb, sc) and not order_leq_cone(sa, sc):
            order_bad += 1
    checks["cone_partial_order"] = {"violations": order_bad}

    ok = (
        metzler_bad == 0
        and order_bad == 0
        and checks["jacobian_fd"]["ok"]
    )
    payload = {"seed": args.seed, "samples": args.samples, "checks": checks, "ok": ok}
    text = json.dumps(payload, sort_keys=True)
    _write_output(text, args, p, {"options": {"seed": args.seed, "samples": args.samples}})
    if not ok:
        raise NumericalError("property probes found violations; see report")


COMMANDS = {
    "equilibria": cmd_equilibria,
    "simulate": cmd_simulate,
    "separatrix": cmd_separatrix,
    "min-release": cmd_min_release,
    "plan": cmd_plan,
    "properties": cmd_properties,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        p = load_parameters(args.params)
        COMMANDS[args.command](args, p)
        return EXIT_OK
    except CliInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ModelValidationError, DomainError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
