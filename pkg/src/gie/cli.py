"""Command-line entry point.

Exit codes: 0 success, 2 configuration or I/O error, 3 physics-domain error
(e.g. no entanglement to budget), 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path
from typing import Sequence

from . import __version__
from .errors import ConfigError, GIEError, NotEntangled
from .figures import DEFAULT_T_END, FIGURES, diagnostics_row, fig2, fig3, fig4
from .io import format_value, utc_now, write_csv, write_manifest
from .metrology import covariance_moment_matrix, monte_carlo_moments, steady_budget
from .params import constants_from_config, derive, from_config, load_config, resolve_config
from .riccati import CSV_HEADER, IntegratorConfig, evolve_pair
from .steady import entanglement_criterion, steady_report
from .sweep import negativity_series, run_sweep, spec_from_mapping

EVOLVE_HEADER = CSV_HEADER + (
    "EN_raw", "EN", "purity_plus", "purity_minus", "sq_angle_plus", "sq_angle_minus",
    "eig_ratio_plus", "eig_ratio_minus",
)


class _Context:
    def __init__(self, args: argparse.Namespace, argv: Sequence[str]):
        self.args = args
        self.argv = list(argv)
        self.started = utc_now()
        self.raw = load_config(args.config)
        self.config = resolve_config(self.raw)
        self.params = from_config(self.raw)
        self.consts = constants_from_config(self.raw)
        self.out = Path(args.out)
        try:
            self.out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ConfigError(f"cannot create output directory {self.out}: {exc}") from exc

    def manifest(self, path: Path, **extra) -> None:
        extra.setdefault("options", {k: v for k, v in vars(self.args).items() if k != "func"})
        write_manifest(path, self.config, self.consts, ["gie", *self.argv], self.started, extra)


def _print_record(title: str, record: dict) -> None:
    print(title)
    width = max(len(k) for k in record)
    for key, value in record.items():
        print(f"  {key:<{width}}  {format_value(value)}")


def cmd_steady(ctx: _Context) -> int:
    d = derive(ctx.params, ctx.consts)
    record = steady_report(d).as_record()
    path = ctx.out / "steady.csv"
    write_csv(path, list(record), [list(record.values())])
    ctx.manifest(path)
    json_path = ctx.out / "steady.json"
    json_path.write_text(json.dumps(record, indent=2), encoding="utf-8")
    ctx.manifest(json_path)
    _print_record("steady state", record)
    return 0


def cmd_evolve(ctx: _Context) -> int:
    args = ctx.args
    if args.mode == "steady":
        return cmd_steady(ctx)
    d = derive(ctx.params, ctx.consts)
    try:
        cfg = IntegratorConfig(t_end=args.t_end, rel_tol=args.rel_tol, abs_tol=args.abs_tol,
                               grid_points=args.points, grid_t_min=args.t_min)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    traj = evolve_pair(d, cfg)
    en = negativity_series(traj, d.epsilon)
    rows = []
    for (t, vp, vm), e in zip(traj.samples(), en):
        rows.append([t, *vp.as_tuple(), *vm.as_tuple(), e, max(e, 0.0), *diagnostics_row(vp, vm)])
    path = ctx.out / "evolve.csv"
    write_csv(path, EVOLVE_HEADER, rows)
    ctx.manifest(path, converged=traj.converged, converged_at_s=traj.converged_at,
                 uncertainty_violations=traj.uncertainty_violations)
    print(f"wrote {len(rows)} samples to {path}")
    if traj.converged:
        print(f"converged (rhs criterion) from t = {traj.converged_at:.6g} s")
    return 0


def cmd_figure(ctx: _Context) -> int:
    name = ctx.args.name
    t_end = ctx.args.t_end
    if name == "fig2":
        outputs = {"fig2.csv": fig2(ctx.params, ctx.consts, t_end)}
    elif name == "fig3":
        curves, summary = fig3(ctx.params, ctx.consts, t_end, workers=ctx.args.workers)
        outputs = {"fig3.csv": curves, "fig3_onset.csv": summary}
    elif name == "fig4":
        outputs = {"fig4.csv": fig4(ctx.params, ctx.consts, t_end)}
    else:
        raise ConfigError(f"unknown figure {name!r}; choose from {FIGURES}")
    for fname, (header, rows) in outputs.items():
        path = ctx.out / fname
        write_csv(path, header, rows)
        ctx.manifest(path, figure=name)
        print(f"wrote {path}")
    return 0


def cmd_sweep(ctx: _Context) -> int:
    raw = load_config(ctx.args.spec)
    spec = spec_from_mapping(raw, ctx.raw)
    result = run_sweep(spec, workers=ctx.args.workers)
    csv_path = ctx.out / "sweep.csv"
    result.to_csv(csv_path)
    ctx.manifest(csv_path, sweep=spec.echo())
    json_path = ctx.out / "sweep.json"
    result.to_json(json_path)
    ctx.manifest(json_path)
    failed = sum(not r.ok for r in result.rows)
    print(f"wrote {len(result.rows)} rows ({failed} failed) to {csv_path}")
    return 0


def cmd_budget(ctx: _Context) -> int:
    args = ctx.args
    d = derive(ctx.params, ctx.consts)
    try:
        budget = steady_budget(d, args.target_snr, args.strict_paper_moments,
                               args.t_meas_factor)
    except NotEntangled as exc:
        crit = entanglement_criterion(d)
        print(f"not entangled: {exc}", file=sys.stderr)
        print(f"criterion margin Omega*eps / (4 sqrt2 gamma_m n_th+) = {crit.margin:.6g}",
              file=sys.stderr)
        return exc.exit_code
    record = budget.as_record()
    record["strict_paper_moments"] = args.strict_paper_moments
    _print_record("S/N budget", record)
    if args.check_moments:
        report = steady_report(d)
        for label, v in (("plus", report.v_plus), ("minus", report.v_minus)):
            est, se = monte_carlo_moments(v, args.samples, seed=args.seed)
            exact = covariance_moment_matrix(v)
            print(f"moment check ({label} mode, seed {args.seed}):")
            for key, value in vars(exact).items():
                z = (getattr(est, key) - value) / getattr(se, key) if getattr(se, key) else 0.0
                print(f"  {key:<6} formula {value:.6g}  monte-carlo {getattr(est, key):.6g}"
                      f"  ({z:+.2f} se)")
    path = ctx.out / "budget.csv"
    write_csv(path, list(record), [list(record.values())])
    ctx.manifest(path)
    return 0


def _common_options() -> argparse.ArgumentParser:
    # a fresh parent per level: argparse shares action objects between parents
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS,
                        help="JSON parameter file; missing keys take reference values")
    common.add_argument("--out", default=argparse.SUPPRESS, help="output directory")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                        help="seed for Monte-Carlo checks")
    common.add_argument("--strict-paper-moments", action="store_true", default=argparse.SUPPRESS,
                        help="use <dVpp^2> = 2 Vpp instead of 2 Vpp^2")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gie", parents=[_common_options()],
                                     description=__doc__.splitlines()[0])
    parser.set_defaults(config=None, out=".", seed=0, strict_paper_moments=False)
    parser.add_argument("--version", action="version", version=f"gie {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evolve", parents=[_common_options()], help="integrate the Riccati flow")
    p.add_argument("--t-end", type=float, default=DEFAULT_T_END)
    p.add_argument("--points", type=int, default=400)
    p.add_argument("--t-min", type=float, default=1e-2)
    p.add_argument("--rel-tol", type=float, default=1e-8)
    p.add_argument("--abs-tol", type=float, default=1e-12)
    p.add_argument("--mode", choices=("full", "steady"), default="full")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("steady", parents=[_common_options()],
                       help="closed-form steady state report")
    p.set_defaults(func=cmd_steady)

    p = sub.add_parser("figure", parents=[_common_options()], help="write figure data")
    p.add_argument("name", choices=FIGURES)
    p.add_argument("--t-end", type=float, default=DEFAULT_T_END)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("sweep", parents=[_common_options()], help="run a parameter sweep")
    p.add_argument("spec", help="JSON sweep specification")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("budget", parents=[_common_options()], help="S/N repetition and time budget")
    p.add_argument("--target-snr", type=float, default=1.0)
    p.add_argument("--t-meas-factor", type=float, default=1.0,
                   help="repetition time in units of kappa/g_+^2")
    p.add_argument("--check-moments", action="store_true",
                   help="cross-check moment formulas by Monte Carlo")
    p.add_argument("--samples", type=int, default=1_000_000)
    p.set_defaults(func=cmd_budget)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            ctx = _Context(args, argv)
            return args.func(ctx)
    except GIEError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ConfigError.exit_code


if __name__ == "__main__":
    sys.exit(main())
