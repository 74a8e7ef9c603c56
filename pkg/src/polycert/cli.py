"""Command-line front end.

Subcommands cover the package's workflows: cone-membership certification of
a polynomial from a file, stand-alone re-verification of a serialized
certificate, coverage power minimization, barrier-planner simulation, the
randomized success-rate experiment, and region-of-attraction estimation.

Exit codes: 0 success/feasible, 2 infeasible or failed verification
(distinct from crashes), 1 usage or runtime errors. All randomness descends
from the --seed flag; identical invocations write identical bytes.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import barrier as barrier_mod
from . import coverage as coverage_mod
from . import roa as roa_mod
from .certify import (
    ConeTag,
    InfeasibleError,
    SemialgebraicSet,
    certificate_from_text,
    certificate_to_text,
    putinar_feasibility,
    verify_certificate,
)
from .conic import SolverFailureError, available_backends, get_backend
from .poly import poly_from_text, poly_to_text

CONE_CAPABILITIES = {
    ConeTag.DSOS: frozenset({"lp"}),
    ConeTag.SDSOS: frozenset({"lp", "socp"}),
    ConeTag.SOS: frozenset({"lp", "socp", "sdp"}),
}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Argparse that reports malformed invocations as exit code 1."""

    def error(self, message):
        raise _UsageError(message)


def _resolve_backend(args, cone: ConeTag | None):
    backend = get_backend(getattr(args, "backend", None))
    if cone is not None and not CONE_CAPABILITIES[cone] <= backend.capabilities:
        raise ValueError(
            f"cone {cone.name} needs capabilities {sorted(CONE_CAPABILITIES[cone])} "
            f"but backend {backend.name!r} provides {sorted(backend.capabilities)}"
        )
    return backend


def _write(path: str | None, text: str, label: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)
        print(f"{label} written to {path}")


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_certify(args) -> int:
    cone = ConeTag.parse(args.cone)
    backend = _resolve_backend(args, cone)
    p = poly_from_text(Path(args.poly).read_text().strip())
    if args.set is not None:
        set_text = Path(args.set).read_text().strip().splitlines()
        S = SemialgebraicSet.of(p.nvars, [poly_from_text(line, p.nvars) for line in set_text if line])
    else:
        S = SemialgebraicSet(p.nvars)
    try:
        cert = putinar_feasibility(
            p, S, cone, args.mult_degree,
            backend=backend, sigma0_half_degree=args.half_degree,
        )
    except InfeasibleError as exc:
        print(f"infeasible: {exc}")
        return 2
    print(f"feasible: {cone.name} certificate with sigma0 basis size {len(cert.sigma0.basis)}")
    _write(args.out, certificate_to_text(cert), "certificate")
    return 0


def _cmd_verify(args) -> int:
    cert = certificate_from_text(Path(args.certificate).read_text())
    report = verify_certificate(cert, tol=args.tol)
    print(report.summary())
    return 0 if report.passed else 2


def _cmd_coverage(args) -> int:
    cone = ConeTag.parse(args.cone)
    backend = _resolve_backend(args, cone)
    if args.instance in coverage_mod.BUILTIN_INSTANCES:
        instance = coverage_mod.BUILTIN_INSTANCES[args.instance]()
    else:
        instance = coverage_mod.instance_from_text(Path(args.instance).read_text())
    if args.only_transmitter is not None:
        instance = instance.restrict([args.only_transmitter])
    try:
        solution = coverage_mod.solve_coverage(
            instance, args.mult_degree, cone,
            backend=backend, enforce_rate_bounds=not args.no_rate_bounds,
        )
    except InfeasibleError as exc:
        print(f"infeasible: {exc}")
        return 2
    rates = ", ".join(f"c{i + 1}={r:.6f}" for i, r in enumerate(solution.rates))
    print(f"optimal rates: {rates}; total {solution.total:.6f}")
    _write(args.out, coverage_mod.solution_to_text(solution), "solution")
    if args.grid_out is not None:
        grid = coverage_mod.sample_energy_grid(
            instance, solution.rates, resolution=args.grid_resolution
        )
        _write(args.grid_out, coverage_mod.grid_to_csv(grid, instance.level), "grid")
    return 0


def _cmd_barrier_sim(args) -> int:
    cone = ConeTag.parse(args.cone)
    _resolve_backend(args, cone)
    if args.env is not None:
        start, obstacles = barrier_mod.environment_from_text(Path(args.env).read_text())
    else:
        rng = np.random.default_rng(np.random.SeedSequence([args.seed]))
        start = barrier_mod.UAVState(0.0, 0.0, math.radians(args.psi0_deg))
        obstacles = barrier_mod.sample_environment(rng, start)
    wind = args.wind
    try:
        wind = float(wind)
    except ValueError:
        pass
    traj = barrier_mod.simulate(
        obstacles, start, args.duration, wind,
        cone=cone, seed=args.seed,
    )
    print(
        f"simulated {args.duration}s: collided={traj.collided} "
        f"all_certified={traj.all_certified} replans={len(traj.certificates)} "
        f"events={len(traj.events)}"
    )
    _write(args.out, barrier_mod.trajectory_to_csv(traj), "trajectory")
    return 0


def _cmd_barrier_table1(args) -> int:
    cones = tuple(c.strip() for c in args.cones.split(",") if c.strip())
    for cone in cones:
        _resolve_backend(args, ConeTag.parse(cone))
    psi0 = tuple(float(v) for v in args.psi0_deg.split(","))
    result = barrier_mod.run_table1_experiment(
        psi0_deg=psi0, n_envs=args.n_envs, seed=args.seed,
        cones=cones, max_workers=args.max_workers,
    )
    for p in result.psi0_deg:
        row = "  ".join(
            f"{cone}={result.success_rate(p, cone):5.1f}%" for cone in result.cones
        )
        print(f"psi0={p:5.1f} deg: {row}")
    if {"sdsos", "sos"} <= set(result.cones):
        print(f"inclusion violations (sdsos certified, sos not): {result.inclusion_violations()}")
    _write(args.out, result.summary_csv(), "summary")
    if args.detail_out is not None:
        _write(args.detail_out, result.detail_csv(), "detail")
    return 0


def _cmd_roa(args) -> int:
    cone = ConeTag.parse(args.cone)
    backend = _resolve_backend(args, cone)
    sys_ = roa_mod.system_from_text(Path(args.system).read_text())
    slice_spec = None
    if args.slice is not None:
        parts = [float(v) for v in args.slice.split(",")]
        if len(parts) < 6:
            raise ValueError("--slice needs i,j,xlo,xhi,ylo,yhi[,resolution]")
        dims = (int(parts[0]), int(parts[1]))
        if not all(0 <= d < sys_.n for d in dims) or dims[0] == dims[1]:
            raise ValueError(
                f"slice dims {dims} invalid for a system with {sys_.n} state(s)"
            )
        bounds = tuple(parts[2:6])
        res = int(parts[6]) if len(parts) > 6 else 200
        slice_spec = (dims, bounds, res)
    opts = roa_mod.RoaOptions(
        degV=args.deg_v, degL=args.deg_l, deg_u=args.deg_u,
        max_iters=args.max_iters, backend=backend,
    )
    try:
        result = roa_mod.run_alternation(sys_, cone, opts)
    except InfeasibleError as exc:
        print(f"infeasible: {exc}")
        return 2
    print(
        f"rho = {result.rho:.6f} after {result.iterations} iterations "
        f"({result.terminated_by}); V = {poly_to_text(result.V)}"
    )
    _write(args.out, roa_mod.result_to_text(result), "result")
    if slice_spec is not None:
        dims, bounds, res = slice_spec
        csv = roa_mod.sublevel_slice_csv(result.V, result.rho, dims, bounds, res)
        _write(args.slice_out, csv, "slice")
    return 0


# ---------------------------------------------------------------------------
# Parser


def _build_parser() -> _Parser:
    parser = _Parser(prog="polycert", description=__doc__)
    parser.add_argument(
        "--backend", default=None, choices=sorted(available_backends()),
        help="conic backend (default: POLYCERT_BACKEND env var or clarabel)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("certify", help="certify nonnegativity of a polynomial from a file")
    p.add_argument("--poly", required=True, help="file with one serialized polynomial")
    p.add_argument("--set", default=None, help="file with constraint polynomials, one per line")
    p.add_argument("--cone", required=True)
    p.add_argument("--mult-degree", type=int, default=0)
    p.add_argument("--half-degree", type=int, default=None, help="raise sigma0's half-degree")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_certify)

    p = sub.add_parser("verify", help="re-check a serialized certificate")
    p.add_argument("--certificate", required=True)
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("coverage", help="minimize total transmitter power with certificates")
    p.add_argument("--instance", required=True, help="built-in name or instance file")
    p.add_argument("--mult-degree", type=int, default=2)
    p.add_argument("--cone", default="sos")
    p.add_argument("--only-transmitter", type=int, default=None)
    p.add_argument("--no-rate-bounds", action="store_true")
    p.add_argument("--out", default=None)
    p.add_argument("--grid-out", default=None)
    p.add_argument("--grid-resolution", type=int, default=400)
    p.set_defaults(func=_cmd_coverage)

    p = sub.add_parser("barrier-sim", help="closed-loop simulation with barrier replanning")
    p.add_argument("--env", default=None, help="environment file (default: random from seed)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--psi0-deg", type=float, default=0.0)
    p.add_argument("--cone", default="sdsos")
    p.add_argument("--duration", type=float, default=1.0)
    p.add_argument("--wind", default="0.0", help="constant value, 'random', or 'switching'")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_barrier_sim)

    p = sub.add_parser("barrier-table1", help="success-rate experiment over random environments")
    p.add_argument("--seed", type=int, default=26)
    p.add_argument("--n-envs", type=int, default=100)
    p.add_argument("--psi0-deg", default="0,10,20,30,40")
    p.add_argument("--cones", default="sdsos,sos")
    p.add_argument("--max-workers", type=int, default=None, help="0 disables the process pool")
    p.add_argument("--out", default=None)
    p.add_argument("--detail-out", default=None)
    p.set_defaults(func=_cmd_barrier_table1)

    p = sub.add_parser("roa", help="region-of-attraction estimation by alternation")
    p.add_argument("--system", required=True, help="system definition file")
    p.add_argument("--cone", default="sdsos")
    p.add_argument("--deg-v", type=int, default=2)
    p.add_argument("--deg-l", type=int, default=4)
    p.add_argument("--deg-u", type=int, default=3)
    p.add_argument("--max-iters", type=int, default=30)
    p.add_argument("--out", default=None)
    p.add_argument("--slice", default=None, help="i,j,xlo,xhi,ylo,yhi[,resolution]")
    p.add_argument("--slice-out", default=None)
    p.set_defaults(func=_cmd_roa)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    except InfeasibleError as exc:
        print(f"infeasible: {exc}")
        return 2
    except (SolverFailureError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
