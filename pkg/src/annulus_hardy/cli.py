"""Command-line runner for the verification suites and experiments.

Every command writes its table as CSV (17 significant digits) and JSON,
optionally an SVG figure, and always a ``summary.json`` into ``--out``.

Exit status: 0 when every check passes, 1 when a check fails, 2 for a bad
configuration, 3 for an I/O failure.

Randomised families use numpy's ``default_rng`` (PCG64) seeded with ``--seed``.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .boundary import BoundaryArc
from .errors import AnnulusError
from .estimates import (
    bootstrap_limit,
    main_bound_h1,
    main_bound_hk,
    optimality_limit,
    optimality_sequence,
)
from .kernel import (
    AnnulusGeometry,
    KernelTruncation,
    compute_Cs,
    eval_p,
    kernel_mass,
    lower_bound_p,
    suggested_quad_points,
)
from .laurent import LaurentFunction, check_poisson_jensen, random_laurent, random_separated_laurent
from .robin import (
    InsufficientModesWarning,
    NeumannData,
    RobinCoefficient,
    StabilityRecord,
    parse_modes,
    solve_forward,
    stability_experiment,
)

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3
S_2PI = math.exp(-2 * math.pi)

_MAX_QUAD = 1 << 18


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return f"{float(v):.17g}"


def _clean(obj):
    """JSON-safe copy: numpy scalars unwrapped, non-finite floats as strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    return obj


def _dump_json(obj, path):
    path.write_text(json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n")


def _write_table(out, name, columns, rows):
    with open(out / f"{name}.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    _dump_json([dict(zip(columns, row)) for row in rows], out / f"{name}.json")
    return [f"{name}.csv", f"{name}.json"]


def _check(name, passed, value=None, threshold=None):
    return {"name": name, "passed": bool(passed), "value": value, "threshold": threshold}


# -- commands -----------------------------------------------------------------

def _radii(geom, count):
    inner = np.exp(np.linspace(math.log(geom.s), 0.0, count + 2)[1:-1])
    edges = np.array([geom.s * (1 + 5e-4), 1 - 5e-4])
    return np.concatenate([inner, edges])


def cmd_kernel_check(args, out):
    geom = AnnulusGeometry(args.s)
    trunc = KernelTruncation.for_geometry(geom)
    constants = compute_Cs(geom, trunc=trunc)
    edge_band = 1e-3
    rows, checks = [], []
    t = np.linspace(-math.pi, math.pi, 1000)
    for r in _radii(geom, args.radii):
        quad = min(_MAX_QUAD, suggested_quad_points(geom, r))
        err = abs(kernel_mass(geom, r, quad, trunc) - 1.0)
        near_edge = r - geom.s < edge_band or 1 - r < edge_band
        tol = args.tol * (100 if near_edge else 1)
        p = eval_p(geom, t, r, trunc)
        lb = lower_bound_p(geom, constants, r)
        rows.append((r, err, tol, float(p.min()), float(lb), float(p.min() - lb)))
        checks.append(_check(f"mass[r={r:.6g}]", err <= tol, err, tol))
        checks.append(_check(f"lower_bound[r={r:.6g}]", p.min() > 0 and p.min() >= lb, float(p.min()), float(lb)))
    files = _write_table(out, "kernel_check", ("r", "mass_err", "tol", "min_p", "lower_bound", "slack"), rows)
    if args.plot:
        from .plotting import plot_table
        plot_table([r[0] for r in rows], [[max(r[1], 1e-17) for r in rows]], out / "kernel_check.svg", "loglog",
                   reference=args.tol, reference_label="tolerance", xlabel="r", ylabel="|mass - 1|")
        files.append("kernel_check.svg")
    extra = {"c_s": constants.c_s, "threshold_log": constants.threshold_log, "j_max": trunc.j_max}
    return checks, files, extra


def cmd_jensen_check(args, out):
    geom = AnnulusGeometry(args.s)
    trunc = KernelTruncation.for_geometry(geom)
    rng = np.random.default_rng(args.seed)
    rows = []
    worst = math.inf
    for i in range(args.n_funcs):
        f = random_separated_laurent(rng, geom.s)
        # a fixed log-distance from both circles keeps the kernel resolvable
        margin = min(0.05, 0.25 * geom.q0)
        r = np.exp(rng.uniform(math.log(geom.s) + margin, -margin, args.n_points))
        z = r * np.exp(1j * rng.uniform(0, 2 * math.pi, args.n_points))
        quad = max(2048, min(_MAX_QUAD, suggested_quad_points(geom, math.exp(-margin))))
        slack = check_poisson_jensen(f, z, quad, trunc)
        worst = min(worst, float(slack.min()))
        rows.extend((i, zz.real, zz.imag, sl) for zz, sl in zip(z, slack))
    files = _write_table(out, "jensen_check", ("function", "z_re", "z_im", "slack"), rows)
    return [_check("jensen_slack", worst >= -args.tol, worst, -args.tol)], files, {}


def _unit_ball(f, k, M=1024):
    from .boundary import hardy_sobolev_norm
    return f / hardy_sobolev_norm(f, k, M)


def cmd_estimate_verify(args, out):
    geom = AnnulusGeometry(args.s)
    arc = BoundaryArc.parse(args.arc)
    constants = compute_Cs(geom).with_arc(arc)
    rng = np.random.default_rng(args.seed)
    family = [(f"f_{n}", LaurentFunction.monomial(geom.s, -n)) for n in range(args.n_min, args.n_max + 1)]
    family += [(f"random_{i}", random_laurent(rng, geom.s, 6)) for i in range(args.n_random)]
    rows, checks = [], []
    for k in range(1, args.k + 1):
        lim = bootstrap_limit(k)
        gap = max(abs(lim.a - k), abs(lim.b - k - 1), abs(lim.c - k))
        checks.append(_check(f"bootstrap_limit[k={k}]", gap <= 1e-12, gap, 1e-12))
        for name, base in family:
            f = _unit_ball(base, k)
            rep = main_bound_h1(f, arc, geom, constants) if k == 1 else main_bound_hk(f, k, arc, geom, constants)
            ok = rep.passed or not rep.hypothesis_ok
            rows.append((k, name, rep.lhs_log, rep.rhs_log, rep.slack_log, rep.hypothesis_ok, rep.passed))
            if rep.hypothesis_ok:
                checks.append(_check(f"{rep.name}[{name}]", ok, rep.lhs_log, rep.rhs_log))
    files = _write_table(out, "estimate_verify",
                         ("k", "function", "lhs_log", "rhs_log", "slack_log", "hypothesis_ok", "passed"), rows)
    extra = {"c_s": constants.c_s, "lambda0": constants.lambda0, "threshold_log": constants.threshold_log,
             "hypothesis_ok_count": sum(1 for r in rows if r[5])}
    return checks, files, extra


def cmd_optimality(args, out):
    geom = AnnulusGeometry(args.s)
    rows = optimality_sequence(geom, args.n_max)
    limit = optimality_limit(geom)
    final = rows[-1].A_n
    rel = abs(final - limit) / limit
    grid_err = max(r.grid_rel_err for r in rows)
    checks = [
        _check("A_n_limit", rel <= args.tol, rel, args.tol),
        _check("closed_form_vs_grid", grid_err <= 1e-10, grid_err, 1e-10),
    ]
    from .estimates import OptimalityRow
    files = _write_table(out, "optimality", OptimalityRow.CSV_COLUMNS, [r.csv_values() for r in rows])
    if args.plot:
        from .plotting import plot_table
        plot_table([r.n for r in rows], [[r.A_n for r in rows]], out / "optimality.svg", "line",
                   labels=["A_n"], reference=limit, reference_label="s |log s|", xlabel="n", ylabel="A_n")
        files.append("optimality.svg")
    return checks, files, {"limit": limit, "A_final": final}


def cmd_robin_stability(args, out):
    geom = AnnulusGeometry(args.s)
    q_star = RobinCoefficient.from_terms(parse_modes(args.q_modes), args.c, args.c_prime, args.n)
    dq = parse_modes(args.dq_modes)
    phi = NeumannData.from_terms(parse_modes(args.phi_modes))
    t_list = [10.0 ** -e for e in range(1, args.t_exp + 1)]
    with warnings.catch_warnings():
        warnings.simplefilter("error", InsufficientModesWarning)
        base = solve_forward(geom, q_star, phi, args.modes)
        records = stability_experiment(geom, q_star, dq, phi, args.modes, t_list)
    residual = max(base.residuals.values())
    ratios = [r.ratio for r in records]
    deltas = [r.delta_u for r in records]
    bound = args.tol * ratios[0]
    checks = [
        _check("solver_residual", residual <= 1e-8, residual, 1e-8),
        _check("ratio_bounded", max(ratios) <= bound, max(ratios), bound),
        _check("delta_u_monotone", all(b < a for a, b in zip(deltas, deltas[1:])), None, None),
    ]
    files = _write_table(out, "robin_stability", StabilityRecord.CSV_COLUMNS, [r.csv_values() for r in records])
    if args.plot:
        from .plotting import plot_table
        x = [abs(r.log_delta_u) ** -(q_star.n - 1) for r in records]
        plot_table(x, [[r.delta_q for r in records]], out / "robin_stability.svg", "loglog",
                   labels=["delta_q"], xlabel="1 / |log delta_u|^(n-1)", ylabel="delta_q")
        files.append("robin_stability.svg")
    extra = {"alpha_inner": float(base.values(geom.s, 256).min()), "alpha_outer": float(base.values(1.0, 256).min()),
             "hypothesis_ok_count": sum(r.hypothesis_ok for r in records)}
    return checks, files, extra


COMMANDS = {
    "kernel-check": cmd_kernel_check,
    "jensen-check": cmd_jensen_check,
    "estimate-verify": cmd_estimate_verify,
    "optimality": cmd_optimality,
    "robin-stability": cmd_robin_stability,
}


# -- argument handling --------------------------------------------------------

def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def build_parser():
    parser = _Parser(prog="annulus-hardy", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, s_default, tol_default, tol_help):
        p.add_argument("--s", type=float, default=s_default, help="inner radius of the annulus")
        p.add_argument("--seed", type=int, default=0, help="seed for the PCG64 generator")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--plot", action="store_true", help="also render an SVG figure")
        p.add_argument("--config", help="key=value file; command-line flags override it")
        p.add_argument("--tol", type=float, default=tol_default, help=tol_help)
        return p

    p = common(sub.add_parser("kernel-check", help="kernel mass identity and lower bound"),
               0.5, 1e-10, "mass tolerance (100x within 1e-3 of the circles)")
    p.add_argument("--radii", type=_positive_int, default=10)

    p = common(sub.add_parser("jensen-check", help="Poisson-Jensen inequality on random functions"),
               0.5, 1e-8, "allowed negative slack")
    p.add_argument("--n-funcs", type=_positive_int, default=100)
    p.add_argument("--n-points", type=_positive_int, default=20)

    p = common(sub.add_parser("estimate-verify", help="logarithmic sup-norm bounds"),
               S_2PI, 1e-9, "unused; bounds are checked in logs")
    p.add_argument("--arc", default="outer", help="'outer', 'inner' or 'circle:start:length'")
    p.add_argument("--k", type=_positive_int, default=3, help="largest smoothness order")
    p.add_argument("--n-min", type=_positive_int, default=20)
    p.add_argument("--n-max", type=_positive_int, default=40)
    p.add_argument("--n-random", type=int, default=10)

    p = common(sub.add_parser("optimality", help="extremal sequence A_n"),
               0.5, 0.03, "relative tolerance of A_{n_max} against s |log s|")
    p.add_argument("--n-max", type=_positive_int, default=500)

    p = common(sub.add_parser("robin-stability", help="Robin coefficient stability sweep"),
               S_2PI, 3.0, "allowed growth of the stability ratio over its first value")
    p.add_argument("--n", type=int, default=2, help="smoothness order of q")
    p.add_argument("--modes", "--N", dest="modes", type=_positive_int, default=32, help="Fourier cutoff N")
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--c-prime", type=float, default=3.0)
    p.add_argument("--q-modes", default="0:2", help="coefficients of q as 'k:a, ...' for k >= 0")
    p.add_argument("--dq-modes", default="1:0.5", help="perturbation direction, same syntax")
    p.add_argument("--phi-modes", default="0:1", help="Neumann data, same syntax")
    p.add_argument("--t-exp", type=_positive_int, default=6, help="t runs over 1e-1 .. 1e-t_exp")
    return parser, sub


def read_config(path):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    cfg = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (x.strip() for x in line.split("=", 1))
        cfg[key.replace("-", "_")] = value
    return cfg


def parse_args(argv):
    parser, sub = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        cfg = read_config(args.config)
        if "N" in cfg:
            cfg["modes"] = cfg.pop("N")
        sp = sub.choices[args.command]
        known = {a.dest for a in sp._actions} - {"help", "config"}
        unknown = sorted(set(cfg) - known)
        if unknown:
            raise ConfigError(f"unknown config keys for {args.command}: {', '.join(unknown)}")
        for action in sp._actions:
            if action.dest in cfg and action.type is not None:
                try:
                    cfg[action.dest] = action.type(cfg[action.dest])
                except (TypeError, ValueError, argparse.ArgumentTypeError) as exc:
                    raise ConfigError(f"bad value for {action.dest}: {exc}") from exc
            elif action.dest in cfg and isinstance(action, argparse._StoreTrueAction):
                cfg[action.dest] = cfg[action.dest].lower() in ("1", "true", "yes", "on")
        sp.set_defaults(**cfg)
        args = parser.parse_args(argv)
    return args


def _guess_out(argv):
    for i, a in enumerate(argv):
        if a == "--out" and i + 1 < len(argv):
            return argv[i + 1]
        if a.startswith("--out="):
            return a.split("=", 1)[1]
    return "out"


def _write_summary(out, summary):
    try:
        out.mkdir(parents=True, exist_ok=True)
        _dump_json(summary, out / "summary.json")
        return True
    except OSError:
        return False


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        _write_summary(Path(_guess_out(argv)), {"status": "config_error", "error": str(exc), "exit_code": EXIT_CONFIG})
        return EXIT_CONFIG
    out = Path(args.out)
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("out", "config")}
    summary = {"command": args.command, "config": config}
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        checks, files, extra = COMMANDS[args.command](args, out)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        summary.update(status="io_error", error=str(exc), exit_code=EXIT_IO)
        _write_summary(out, summary)
        return EXIT_IO
    except (AnnulusError, ValueError, InsufficientModesWarning) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        summary.update(status="config_error", error=str(exc), exit_code=EXIT_CONFIG)
        _write_summary(out, summary)
        return EXIT_CONFIG
    passed = all(c["passed"] for c in checks)
    code = EXIT_OK if passed else EXIT_CHECK
    summary.update(status="pass" if passed else "fail", passed=passed, exit_code=code, checks=checks,
                   outputs=sorted(files + ["summary.json"]), results=extra,
                   failed=[c["name"] for c in checks if not c["passed"]])
    if not _write_summary(out, summary):
        print("I/O error: cannot write summary.json", file=sys.stderr)
        return EXIT_IO
    for c in checks:
        if not c["passed"]:
            print(f"FAIL {c['name']}: value={c['value']} threshold={c['threshold']}", file=sys.stderr)
    print(f"{args.command}: {'pass' if passed else 'fail'} ({sum(c['passed'] for c in checks)}/{len(checks)} checks)")
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
