"""Command-line front end.

Exit codes: 0 success, 1 usage or input error, 2 numerical failure
(an unstable classical oscillator network). Data files carry no timestamps;
run details go to a ``run.json`` sidecar next to them.
"""

from __future__ import annotations

import argparse
import datetime
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__, _core
from .classical import ClassicalInstabilityError
from .io import write_json, write_sweep_csv, write_trajectory_csv
from .rca import rca_sweep_grid
from .scenarios import (FMO_SITES, ChainScenario, FmoScenario, is_monotone_increasing,
                        run_chain, run_fmo, run_sweep)

OUTPUT_ENV = "EETSIM_OUTPUT_DIR"
SINGLE_CURVE_THRESHOLD = 1e-2
EXIT_USAGE = 1
EXIT_NUMERICAL = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _ratio(text: str) -> float:
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number or fraction: {text!r}")


def _grid(text: str) -> list[float]:
    parts = [p for p in text.split(",") if p.strip()]
    return [_ratio(p) for p in parts]


def _out_dir(args, name: str) -> Path:
    if args.out:
        return Path(args.out)
    return Path(os.environ.get(OUTPUT_ENV, "eetsim-out")) / name


def _sidecar(out: Path, argv) -> None:
    write_json({
        "argv": list(argv),
        "version": __version__,
        "backend": _core.BACKEND,
        "finished": datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds"),
    }, out / "run.json")


def cmd_chain(args, argv) -> int:
    try:
        sc = ChainScenario(n_sites=args.sites, v_over_eps=args.v_over_eps, tau_max=args.tau_max,
                           samples=args.samples)
    except ValueError as exc:
        raise UsageError(str(exc))
    res = run_chain(sc)
    out = _out_dir(args, "chain")
    for kind, traj in res.trajectories.items():
        write_trajectory_csv(traj, out / f"{kind}.csv")
    report = {
        "scenario": {"n_sites": sc.n_sites, "v_over_eps": sc.v_over_eps, "origin": sc.start,
                     "tau_max": sc.tau_max, "samples": sc.samples},
        "reports": {k: r.to_dict() for k, r in res.reports.items()},
        "velocity": None if res.velocity is None else res.velocity._asdict(),
        "second_order": res.residuals.magnitudes,
    }
    write_json(report, out / "report.json")
    _sidecar(out, argv)
    cq = res.reports["classical_vs_quantum"]
    print(f"chain: {sc.n_sites} sites, V/eps = {sc.v_over_eps:.6g}, tau in [0, {sc.tau_max:g}]")
    for name, r in res.reports.items():
        print(f"  {name:<22s} max |dP| = {r.max_pop_dev:.3e}   mean |dP| = {r.mean_pop_dev:.3e}")
    if res.velocity is not None:
        print(f"  spread velocity (quantum): {res.velocity.slope:.6f} sites per tau "
              f"over tau <= {res.velocity.t_end:.3g}")
    verdict = "indistinguishable" if cq.max_pop_dev < SINGLE_CURVE_THRESHOLD else "deviating"
    print(f"  classical vs quantum: {verdict}")
    print(f"  wrote {out}")
    return 0


def cmd_fmo(args, argv) -> int:
    try:
        sc = FmoScenario(hamiltonian_file=args.hamiltonian, initial_site=args.init,
                         t_max=args.t_max, samples=args.samples, energy_shift=args.shift)
    except ValueError as exc:
        raise UsageError(str(exc))
    res = run_fmo(sc)
    out = _out_dir(args, "fmo")
    labels = [f"monomer_{k}" for k in range(1, FMO_SITES + 1)]
    for kind, traj in res.trajectories.items():
        write_trajectory_csv(traj, out / f"{kind}.csv", labels)
    cq = res.reports["classical_vs_quantum"]
    breakdown = cq.max_pop_dev >= SINGLE_CURVE_THRESHOLD
    report = {
        "scenario": {"initial_site": sc.initial_site, "energy_shift": sc.energy_shift,
                     "t_max_fs": sc.t_max, "samples": sc.samples,
                     "hamiltonian": Path(sc.hamiltonian_file).name if sc.hamiltonian_file
                     else "bundled"},
        "reports": {k: r.to_dict() for k, r in res.reports.items()},
        "second_order": res.residuals.magnitudes,
        "rca_breakdown": breakdown,
        "single_curve_threshold": SINGLE_CURVE_THRESHOLD,
    }
    write_json(report, out / "report.json")
    _sidecar(out, argv)
    q, c = res.trajectories["quantum"], res.trajectories["classical"]
    print(f"fmo: start on monomer {sc.initial_site}, shift {sc.energy_shift:g} cm^-1, "
          f"t in [0, {sc.t_max:g}] fs")
    for k in range(FMO_SITES):
        flag = "*" if k < 3 else " "
        dev = cq.per_site_dev[k]
        print(f" {flag} monomer {k + 1}: peak P quantum {q.populations[:, k].max():.4f}  "
              f"classical {c.populations[:, k].max():.4f}  max |dP| {dev:.3e}")
    print("  (* plotted monomers 1-3)")
    print(f"  classical vs quantum max |dP| = {cq.max_pop_dev:.3e}, "
          f"coupling ratio V/eps = {cq.coupling_ratio:.3g}")
    if breakdown:
        print("  RCA breakdown: classical and quantum populations no longer coincide")
    else:
        print("  RCA valid: classical and quantum populations coincide")
    print(f"  wrote {out}")
    return 0


def cmd_sweep(args, argv) -> int:
    grid = args.grid if args.grid is not None else list(rca_sweep_grid(args.points))
    if not grid:
        raise UsageError("empty V/eps grid")
    if any(not r > 0 for r in grid):
        raise UsageError("V/eps values must be positive")
    try:
        base = ChainScenario(n_sites=args.sites, tau_max=args.tau_max, samples=args.samples)
    except ValueError as exc:
        raise UsageError(str(exc))
    points = run_sweep(grid, base, workers=args.workers)
    out = _out_dir(args, "sweep")
    write_sweep_csv(points, out / "sweep.csv")
    _sidecar(out, argv)
    print(f"sweep: {len(points)} points, classical vs quantum on a {base.n_sites}-site chain")
    for p in points:
        if p.stable:
            print(f"  V/eps = {p.v_over_eps:.5g}  max |dP| = {p.report.max_pop_dev:.3e}")
        else:
            print(f"  V/eps = {p.v_over_eps:.5g}  unstable ({p.error})")
    stable = [p for p in points if p.stable]
    if not stable:
        print("  every grid point is classically unstable", file=sys.stderr)
        return EXIT_NUMERICAL
    mono = is_monotone_increasing(points)
    print(f"  deviation monotone increasing in V/eps over stable points: {'yes' if mono else 'no'}")
    print(f"  wrote {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="eetsim", description="Quantum vs classical excitation transfer.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("chain", help="uniform nearest-neighbour chain")
    p.add_argument("--sites", type=int, default=19)
    p.add_argument("--v-over-eps", type=_ratio, default=1 / 40)
    p.add_argument("--tau-max", type=float, default=8.0)
    p.add_argument("--samples", type=int, default=400)
    p.add_argument("--out", help=f"output directory (default ${OUTPUT_ENV}/chain)")
    p.set_defaults(func=cmd_chain)

    p = sub.add_parser("fmo", help="seven-site FMO complex")
    p.add_argument("--init", type=int, default=1, help="initially excited monomer (1-7)")
    p.add_argument("--shift", type=float, default=0.0, help="shift of all site energies, cm^-1")
    p.add_argument("--hamiltonian", help="7x7 Hamiltonian file (default: bundled data)")
    p.add_argument("--t-max", type=float, default=1000.0, help="fs")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--out", help=f"output directory (default ${OUTPUT_ENV}/fmo)")
    p.set_defaults(func=cmd_fmo)

    p = sub.add_parser("sweep", help="classical-vs-quantum deviation over V/eps")
    p.add_argument("--grid", type=_grid, help="comma-separated V/eps values, fractions allowed")
    p.add_argument("--points", type=int, default=9,
                   help="log-spaced points in [1/160, 1/2] when --grid is absent")
    p.add_argument("--sites", type=int, default=19)
    p.add_argument("--tau-max", type=float, default=8.0)
    p.add_argument("--samples", type=int, default=400)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help=f"output directory (default ${OUTPUT_ENV}/sweep)")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, argv)
    except (UsageError, FileNotFoundError, ValueError) as exc:
        print(f"eetsim {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ClassicalInstabilityError, ArithmeticError) as exc:
        print(f"eetsim {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
