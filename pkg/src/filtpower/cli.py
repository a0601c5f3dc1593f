"""Command-line front end: single solves, peak-energy scans, and
reproduction of the stored benchmark tables.

Exit codes: 0 converged (or reproduction matched the oracle), 1 usage or
configuration error, 2 the iteration hit max_iter (or a reproduction
missed the oracle), 3 the iteration diverged. Output is CSV (comment
header with the fully-resolved config, then rows; 9 significant digits,
UTF-8, LF) or JSON (one object). Runs with a fixed seed are deterministic
byte for byte.
"""

from __future__ import annotations

import argparse
import contextlib
import dataclasses
import json
import math
import sys
from pathlib import Path

import numpy as np

from .analysis import scan_peak_energies
from .filtering import FilterConfig, FilterInstabilityError
from .power import IterationSettings, Status, filtered_power_solve
from .problems import (
    CATALOG,
    JACOBI_CAP,
    brute_force_spectrum,
    from_samples,
    make_problem,
    reference_rows,
    simple_matrix,
)

__all__ = ["main", "build_parser"]

_EXIT_BY_STATUS = {
    Status.CONVERGED: 0,
    Status.MAX_ITERATIONS: 2,
    Status.DIVERGED: 3,
}

# brute-force annotation of file problems is only worth seconds of Jacobi
_FILE_SPECTRUM_LIMIT = 200


class _CliError(Exception):
    """Usage or configuration problem; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default, which would collide
    # with the max-iterations exit code; all user errors are 1 here
    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.9g}"
    return str(x)


def _iteration_flags(sp, with_ep: bool):
    if with_ep:
        sp.add_argument("--ep", type=float, required=True, help="peak energy E_p the filter targets")
    sp.add_argument("--m", type=int, default=None, help="substep count M (default: derived from dtau)")
    sp.add_argument("--alpha", type=float, default=1.0, help="filter exponent (whole number; default 1)")
    sp.add_argument("--dx", type=float, default=None, help="grid spacing override")
    sp.add_argument("--dtau", type=float, default=None, help="substep width (default dx^2/10 on grids)")
    sp.add_argument("--tol", type=float, default=1e-8, help="stagnation tolerance (default 1e-8)")
    sp.add_argument("--max-iter", dest="max_iter", type=int, default=10 ** 6)
    sp.add_argument("--seed", type=int, default=0, help="seed for the random start vector")
    sp.add_argument("--init", type=str, default=None, help="comma-separated start vector")
    sp.add_argument("--shift", type=float, default=0.0, help="constant added to the operator (taken back off in the results)")
    sp.add_argument("--scheme", choices=("auto", "polynomial", "split"), default="auto")
    _output_flags(sp)


def _output_flags(sp):
    sp.add_argument("--output", type=str, default=None, help="write here instead of stdout")
    sp.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="filtpower", description="Targeted eigensolver: power iteration through a peaked spectral filter.")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve for the eigenvalue nearest a peak energy")
    solve.add_argument("--problem", required=True, help="catalog name or a two-column CSV file of (x, V)")
    _iteration_flags(solve, with_ep=True)
    solve.set_defaults(func=cmd_solve)

    scan = sub.add_parser("scan", help="sweep the peak energy over a grid")
    scan.add_argument("--problem", required=True, help="catalog name or a two-column CSV file of (x, V)")
    scan.add_argument("--ep-min", dest="ep_min", type=float, required=True)
    scan.add_argument("--ep-max", dest="ep_max", type=float, required=True)
    scan.add_argument("--ep-step", dest="ep_step", type=float, required=True)
    scan.add_argument("--workers", type=int, default=1, help="solve rows in parallel processes")
    _iteration_flags(scan, with_ep=False)
    scan.set_defaults(func=cmd_scan)

    rep = sub.add_parser("reproduce", help="re-run a stored benchmark table against the oracle")
    what = rep.add_mutually_exclusive_group(required=True)
    what.add_argument("--table", type=int, choices=(1, 2, 3, 4))
    what.add_argument("--matrix-figs", dest="matrix_figs", action="store_true",
                      help="convergence histories and the substep sweep for the 3x3 example")
    _output_flags(rep)
    rep.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _CliError as exc:
        print(f"filtpower: error: {exc}", file=sys.stderr)
        return 1


# ---------------------------------------------------------------------------
# shared plumbing


def _load_problem(name: str, dx):
    if name in CATALOG:
        try:
            return make_problem(name, dx=dx)
        except ValueError as exc:
            raise _CliError(str(exc))
    path = Path(name)
    if path.exists():
        return _load_tabulated(path, dx)
    catalog = ", ".join(sorted(CATALOG))
    raise _CliError(
        f"unknown problem {name!r}; catalog: {catalog}; or pass a two-column CSV file of (x, V)"
    )


def _load_tabulated(path: Path, dx):
    try:
        data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    except ValueError as exc:
        raise _CliError(f"could not parse {path}: {exc}")
    if data.shape[1] != 2:
        raise _CliError(f"{path} must have exactly two columns (x, V)")
    try:
        problem = from_samples(data[:, 0], data[:, 1], name=path.stem)
    except ValueError as exc:
        raise _CliError(f"{path}: {exc}")
    spacing = problem.operator.grid.dx
    if dx is not None and abs(dx - spacing) > 1e-9 * max(1.0, abs(dx)):
        raise _CliError(f"--dx {dx:g} does not match the file's spacing {spacing:.9g}")
    return problem


def _parse_init(text):
    if text is None:
        return None
    try:
        vals = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise _CliError(f"could not parse --init {text!r} as comma-separated numbers")
    if not vals:
        raise _CliError("--init is empty")
    return np.asarray(vals, dtype=float)


def _settings(args) -> IterationSettings:
    try:
        return IterationSettings(
            tol=args.tol,
            max_iter=args.max_iter,
            seed=args.seed,
            init=_parse_init(args.init),
        )
    except ValueError as exc:
        raise _CliError(str(exc))


def _echo(command: str, problem, args, resolved: dict) -> dict:
    grid = getattr(problem.operator, "grid", None)
    cfg = {"command": command, "problem": problem.name}
    if grid is not None:
        cfg["dx"] = _fmt(float(grid.dx))
    cfg.update(resolved)
    cfg.update(
        alpha=_fmt(float(args.alpha)),
        tol=_fmt(float(args.tol)),
        max_iter=args.max_iter,
        seed=args.seed,
        init=args.init if args.init is not None else f"random(seed={args.seed})",
        shift=_fmt(float(args.shift)),
        scheme=args.scheme,
        format=args.fmt,
    )
    return cfg


@contextlib.contextmanager
def _open_output(path):
    if path is None:
        yield sys.stdout
    else:
        fh = open(path, "w", encoding="utf-8", newline="\n")
        try:
            yield fh
        finally:
            fh.close()


def _comment_block(config: dict) -> list:
    return [f"# {key} = {value}" for key, value in config.items()]


# ---------------------------------------------------------------------------
# solve


def cmd_solve(args) -> int:
    problem = _load_problem(args.problem, args.dx)
    if not args.ep > 0.0:
        raise _CliError("peak energy --ep must be positive")
    op = problem.operator.shifted(args.shift)
    try:
        cfg = FilterConfig.for_operator(
            args.ep + args.shift, op, args.alpha, dtau=args.dtau, substeps=args.m
        )
    except ValueError as exc:
        raise _CliError(str(exc))
    settings = _settings(args)
    try:
        report = filtered_power_solve(op, cfg, settings, scheme=args.scheme)
    except (ValueError, FilterInstabilityError) as exc:
        raise _CliError(str(exc))

    config = _echo("solve", problem, args, {
        "e_p": _fmt(float(args.ep)),
        "m": cfg.substeps,
        "dtau": _fmt(cfg.dtau),
    })
    shift = args.shift
    with _open_output(args.output) as out:
        if args.fmt == "csv":
            _write_solve_csv(out, config, problem, report, shift)
        else:
            _write_solve_json(out, config, problem, report, shift)
    return _EXIT_BY_STATUS[report.status]


def _vector_header(problem) -> dict:
    grid = getattr(problem.operator, "grid", None)
    if grid is None:
        return {"length": problem.operator.dim}
    head = {"grid_shape": ",".join(str(n) for n in grid.shape)}
    if grid.ndim == 3:
        head["ordering"] = "row-major, x fastest"
    return head


def _write_solve_csv(out, config, problem, report, shift):
    lines = _comment_block(config)
    lines.append(f"# status = {report.status.value}")
    lines.append(f"# eigenvalue = {_fmt(report.eigenvalue - shift)}")
    lines.append(f"# iterations = {report.iterations}")
    lines.append(f"# residual = {_fmt(report.residual)}")
    lines.append("# section = history")
    lines.append("k,estimate")
    for k, e in enumerate(report.history, start=1):
        lines.append(f"{k},{_fmt(float(e) - shift)}")
    lines.append("# section = eigenvector")
    for key, value in _vector_header(problem).items():
        lines.append(f"# {key} = {value}")
    lines.append("index,value")
    for i, value in enumerate(report.eigenvector):
        lines.append(f"{i},{_fmt(float(value))}")
    out.write("\n".join(lines) + "\n")


def _write_solve_json(out, config, problem, report, shift):
    payload = {
        "config": config,
        "report": {
            "status": report.status.value,
            "eigenvalue": report.eigenvalue - shift,
            "iterations": report.iterations,
            "residual": report.residual,
            **_vector_header(problem),
            "eigenvector": [float(v) for v in report.eigenvector],
        },
        "history": [float(e) - shift for e in report.history],
    }
    json.dump(payload, out, indent=1)
    out.write("\n")


# ---------------------------------------------------------------------------
# scan


def cmd_scan(args) -> int:
    problem = _load_problem(args.problem, args.dx)
    if not (0.0 < args.ep_min <= args.ep_max):
        raise _CliError("need 0 < --ep-min <= --ep-max")
    if not args.ep_step > 0.0:
        raise _CliError("--ep-step must be positive")
    count = int(math.floor((args.ep_max - args.ep_min) / args.ep_step + 1e-9)) + 1
    peaks = [args.ep_min + i * args.ep_step for i in range(count)]
    if args.workers < 1:
        raise _CliError("--workers must be at least 1")

    shift = args.shift
    scan_problem = problem
    if shift != 0.0:
        scan_problem = dataclasses.replace(
            problem,
            operator=problem.operator.shifted(shift),
            discrete=None if problem.discrete is None else problem.discrete + shift,
            continuum=None if problem.continuum is None else problem.continuum + shift,
        )
    if scan_problem.discrete is None and scan_problem.operator.dim <= _FILE_SPECTRUM_LIMIT:
        vals = [v for v, _ in brute_force_spectrum(scan_problem.operator, max_dim=JACOBI_CAP)]
        scan_problem = dataclasses.replace(scan_problem, discrete=np.asarray(vals))

    settings = _settings(args)
    try:
        result = scan_peak_energies(
            scan_problem,
            [p + shift for p in peaks],
            settings,
            alpha=args.alpha,
            substeps=args.m,
            dtau=args.dtau,
            scheme=args.scheme,
            workers=args.workers,
        )
    except (ValueError, FilterInstabilityError) as exc:
        raise _CliError(str(exc))

    config = _echo("scan", problem, args, {
        "ep_min": _fmt(float(args.ep_min)),
        "ep_max": _fmt(float(args.ep_max)),
        "ep_step": _fmt(float(args.ep_step)),
        "m": args.m if args.m is not None else "derived",
        "workers": args.workers,
    })
    with _open_output(args.output) as out:
        if args.fmt == "csv":
            _write_scan_csv(out, config, result, shift)
        else:
            _write_scan_json(out, config, result, shift)
    return 0 if result.any_converged else 2


def _scan_cells(row, shift):
    e_p = _fmt(row.e_p - shift)
    eig = _fmt(row.eigenvalue - shift) if np.isfinite(row.eigenvalue) else ""
    tp = "" if row.nearest_e_tp is None else _fmt(row.nearest_e_tp - shift)
    pr = "" if row.predicted_r is None else _fmt(row.predicted_r)
    return e_p, eig, str(row.iterations), row.status.value, tp, pr


def _write_scan_csv(out, config, result, shift):
    lines = _comment_block(config)
    if len(result.turning_points):
        tps = ",".join(_fmt(float(t) - shift) for t in result.turning_points)
        lines.append(f"# turning_points = {tps}")
    lines.append("e_p,eigenvalue,iterations,status,nearest_e_tp,predicted_R")
    for row in result.rows:
        lines.append(",".join(_scan_cells(row, shift)))
    out.write("\n".join(lines) + "\n")


def _write_scan_json(out, config, result, shift):
    rows = []
    for row in result.rows:
        rows.append({
            "e_p": row.e_p - shift,
            "eigenvalue": row.eigenvalue - shift if np.isfinite(row.eigenvalue) else None,
            "iterations": row.iterations,
            "status": row.status.value,
            "nearest_e_tp": None if row.nearest_e_tp is None else row.nearest_e_tp - shift,
            "predicted_R": row.predicted_r,
        })
    payload = {
        "config": config,
        "rows": rows,
        "turning_points": [float(t) - shift for t in result.turning_points],
    }
    json.dump(payload, out, indent=1)
    out.write("\n")


# ---------------------------------------------------------------------------
# reproduce

_ORACLE_MATCH = 1e-6  # relative; reproduction fails past this


def cmd_reproduce(args) -> int:
    if args.matrix_figs:
        return _reproduce_matrix_figs(args)
    return _reproduce_table(args)


def _label_text(label) -> str:
    if isinstance(label, tuple):
        return "-".join(str(i) for i in label)
    return str(label)


def _reproduce_table(args) -> int:
    problem, rows = reference_rows(args.table)
    settings = IterationSettings()
    out_rows = []
    worst = 0.0
    for label, idx, published in rows:
        e_p = float(problem.discrete[idx])
        cfg = FilterConfig.for_operator(e_p, problem.operator, 1.0)
        report = filtered_power_solve(problem.operator, cfg, settings)
        discrete = float(problem.discrete[idx])
        exact = float(problem.continuum[idx])
        err_disc = abs(report.eigenvalue - discrete) / abs(discrete)
        err_exact = abs(report.eigenvalue - exact) / abs(exact)
        if report.status is not Status.CONVERGED:
            err_disc = math.inf
        worst = max(worst, err_disc)
        out_rows.append({
            "label": _label_text(label),
            "e_p": e_p,
            "exact": exact,
            "discrete": discrete,
            "computed": report.eigenvalue,
            "published": published,
            "err_vs_discrete": err_disc,
            "err_vs_exact": err_exact,
        })

    config = {
        "command": "reproduce",
        "table": args.table,
        "problem": problem.name,
        "dx": _fmt(float(problem.operator.grid.dx)),
        "tol": _fmt(settings.tol),
        "format": args.fmt,
    }
    ok = worst <= _ORACLE_MATCH
    with _open_output(args.output) as out:
        if args.fmt == "csv":
            lines = _comment_block(config)
            lines.append("label,e_p,exact,discrete,computed,published,err_vs_discrete,err_vs_exact")
            for r in out_rows:
                lines.append(",".join([
                    r["label"], _fmt(r["e_p"]), _fmt(r["exact"]), _fmt(r["discrete"]),
                    _fmt(r["computed"]), _fmt(r["published"]),
                    _fmt(r["err_vs_discrete"]), _fmt(r["err_vs_exact"]),
                ]))
            lines.append(f"# oracle_match = {'pass' if ok else 'fail'}")
            out.write("\n".join(lines) + "\n")
        else:
            json.dump({"config": config, "rows": out_rows, "oracle_match": ok}, out, indent=1)
            out.write("\n")
    return 0 if ok else 2


def _reproduce_matrix_figs(args) -> int:
    problem = simple_matrix()
    op = problem.operator
    init = np.array([0.7, 0.8, 0.4])
    series = []
    for e_p in (0.8, 1.6, 2.6, 3.5):
        rep = filtered_power_solve(op, FilterConfig(e_p, 1.0, 100), IterationSettings(init=init))
        series.append((f"ep={_fmt(e_p)}", rep))
    for seed in (1, 2, 3, 4):
        rep = filtered_power_solve(op, FilterConfig(1.6, 1.0, 100), IterationSettings(seed=seed))
        series.append((f"seed={seed}", rep))
    for m in (5, 10, 50, 100):
        rep = filtered_power_solve(op, FilterConfig(1.6, 1.0, m), IterationSettings(init=init))
        series.append((f"m={m}", rep))

    sweep = []
    for m in range(2, 201):
        rep = filtered_power_solve(op, FilterConfig(1.6, 1.0, m), IterationSettings(init=init))
        sweep.append((m, rep))

    # the documented behavior: below the transition the iteration lands on
    # 1, from it on it lands on 2
    transition = None
    for m, rep in sweep:
        if rep.status is Status.CONVERGED and abs(rep.eigenvalue - 2.0) < 1e-4:
            transition = m
            break
    clean = transition is not None
    if clean:
        for m, rep in sweep:
            target = 1.0 if m < transition else 2.0
            if rep.status is not Status.CONVERGED or abs(rep.eigenvalue - target) > 1e-4:
                clean = False
                break
    ok = clean and transition is not None and 9 <= transition <= 11

    config = {"command": "reproduce", "selector": "matrix-figs", "problem": problem.name, "format": args.fmt}
    with _open_output(args.output) as out:
        if args.fmt == "csv":
            lines = _comment_block(config)
            lines.append("# section = histories")
            lines.append("series,k,estimate")
            for name, rep in series:
                for k, e in enumerate(rep.history, start=1):
                    lines.append(f"{name},{k},{_fmt(float(e))}")
            lines.append("# section = m-sweep")
            lines.append("m,eigenvalue,iterations,status")
            for m, rep in sweep:
                lines.append(f"{m},{_fmt(rep.eigenvalue)},{rep.iterations},{rep.status.value}")
            lines.append(f"# transition_m = {transition if transition is not None else 'none'}")
            out.write("\n".join(lines) + "\n")
        else:
            payload = {
                "config": config,
                "histories": [
                    {"series": name, "estimates": [float(e) for e in rep.history]}
                    for name, rep in series
                ],
                "m_sweep": [
                    {"m": m, "eigenvalue": rep.eigenvalue, "iterations": rep.iterations,
                     "status": rep.status.value}
                    for m, rep in sweep
                ],
                "transition_m": transition,
            }
            json.dump(payload, out, indent=1)
            out.write("\n")
    return 0 if ok else 2


if __name__ == "__main__":
    raise SystemExit(main())
