"""Region-of-attraction estimation by bilinear alternation.

Certifies that the sublevel set {V <= rho} of a Lyapunov function lies in
the region of attraction of the origin: V is positive definite and Vdot is
negative on {V <= rho} \\ {0}, witnessed by a nonnegative multiplier L with

    -Vdot + L (V - rho)  in cone.

The product rho * L makes the problem bilinear, so it alternates two convex
steps: with V fixed, maximize rho by bisection over (L, u) feasibility; with
(L, u) fixed, rho and the coefficients of V enter linearly, so maximize rho
directly. Iterations stop when rho improves by less than 1 percent.

Controller synthesis is optional: when the system has input channels G, a
polynomial u (one per channel, vanishing at the origin) is a decision
variable of the multiplier step alongside L.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from .certify import (
    ConeTag,
    GramCertificate,
    InfeasibleError,
    LinExpr,
    LinPoly,
    PutinarCertificate,
    SemialgebraicSet,
    _gram_handle,
    add_putinar_constraint,
    as_linpoly,
    constrain_in_cone,
    declare_poly_var,
    gram_polynomial,
    lp_add_scaled,
    lp_degree,
    lp_from_poly,
    lp_mul_poly,
    lp_partial_derivative,
    putinar_feasibility,
    verify_certificate,
)
from .conic import ConicProgram, SolverFailureError, solve
from .poly import (
    Polynomial,
    lie_derivative,
    monomial_basis,
    partial_derivative,
    poly_from_text,
    poly_to_text,
)

PD_EPS = 1e-6
MARGIN_EPS = 1e-4
RHO_CAP = 1e6


@dataclass(frozen=True)
class PolySystem:
    """Polynomial dynamics xdot = f(x) + G(x) u with equilibrium at origin."""

    n: int
    f: tuple[Polynomial, ...]
    G: tuple[tuple[Polynomial, ...], ...] | None = None  # n rows x m inputs

    def __post_init__(self):
        if len(self.f) != self.n:
            raise ValueError("f must have one component per state")
        origin = (0.0,) * self.n
        for i, fi in enumerate(self.f):
            if fi.nvars != self.n:
                raise ValueError("f component variable count mismatch")
            if abs(fi(origin)) > 0.0:
                raise ValueError(f"f[{i}](0) != 0: origin is not an equilibrium")
        if self.G is not None:
            if len(self.G) != self.n:
                raise ValueError("G must have one row per state")
            m = len(self.G[0])
            for row in self.G:
                if len(row) != m or any(g.nvars != self.n for g in row):
                    raise ValueError("G must be rectangular over the state variables")

    def num_inputs(self) -> int:
        return 0 if self.G is None else len(self.G[0])

    def closed_loop(self, u: Sequence[Polynomial] | None) -> tuple[Polynomial, ...]:
        """f + G u componentwise (u required iff the system has inputs)."""
        if self.G is None:
            return self.f
        if u is None or len(u) != self.num_inputs():
            raise ValueError("one controller polynomial required per input")
        closed = []
        for i in range(self.n):
            fi = self.f[i]
            for j, uj in enumerate(u):
                fi = fi + self.G[i][j] * uj
            closed.append(fi)
        return tuple(closed)


def linearize(sys: PolySystem) -> tuple[np.ndarray, np.ndarray | None]:
    """A from the degree-1 coefficients of f; B = G(0) when inputs exist."""
    A = np.zeros((sys.n, sys.n))
    for i, fi in enumerate(sys.f):
        for j in range(sys.n):
            mono = tuple(1 if k == j else 0 for k in range(sys.n))
            A[i, j] = fi.coeff(mono)
    if sys.G is None:
        return A, None
    origin = (0.0,) * sys.n
    B = np.array([[g(origin) for g in row] for row in sys.G])
    return A, B


def lyap_init(A: np.ndarray) -> Polynomial:
    """Quadratic seed V = x^T P x with A^T P + P A = -I, normalized so that
    the unit-vector values of V sum to 1. Requires A Hurwitz."""
    A = np.asarray(A, dtype=float)
    if np.max(np.real(np.linalg.eigvals(A))) >= 0:
        raise ValueError("linearization is not Hurwitz; no Lyapunov initialization")
    P = scipy.linalg.solve_continuous_lyapunov(A.T, -np.eye(len(A)))
    P = (P + P.T) / 2.0
    P /= np.trace(P)
    n = len(A)
    terms = {}
    for i in range(n):
        for j in range(i, n):
            mono = tuple((1 if k == i else 0) + (1 if k == j else 0) for k in range(n))
            terms[mono] = P[i, j] if i == j else 2.0 * P[i, j]
    return Polynomial(n, terms)


def _sum_of_squares_poly(n: int) -> Polynomial:
    return Polynomial(n, {tuple(2 if k == i else 0 for k in range(n)): 1.0 for i in range(n)})


def _unit_value_expr(vlp: LinPoly, n: int, j: int) -> LinExpr:
    """V(e_j) as a linear expression: sum of coefficients of monomials
    supported on variable j alone (plus any constant)."""
    expr = LinExpr()
    for mono, e in vlp.items():
        if all(v == 0 for k, v in enumerate(mono) if k != j):
            expr.add_scaled(e, 1.0)
    return expr


# ---------------------------------------------------------------------------
# Alternation steps


def _input_channel(V: Polynomial, sys: PolySystem, j: int) -> Polynomial:
    """Coefficient of u_j in Vdot: sum_i dV/dx_i * G_ij."""
    channel = Polynomial.zero(sys.n)
    for i in range(sys.n):
        channel = channel + partial_derivative(V, i) * sys.G[i][j]
    return channel


def _multiplier_feasible(
    sys: PolySystem,
    V: Polynomial,
    rho: float,
    cone: ConeTag,
    degL: int,
    deg_u: int,
    eps: float,
    backend,
):
    """One feasibility solve of the multiplier step at fixed rho.

    Returns (L, u) on success, None when infeasible.
    """
    n = sys.n
    prog = ConicProgram()
    L_handle = _gram_handle(prog, n, degL // 2, cone)
    L_lp = gram_polynomial(L_handle)

    main: LinPoly = {}
    lp_add_scaled(main, lp_from_poly(lie_derivative(V, sys.f)), -1.0)
    u_vars = []
    if sys.G is not None:
        for j in range(sys.num_inputs()):
            uj = declare_poly_var(prog, n, deg_u, drop_constant=True)
            u_vars.append(uj)
            lp_add_scaled(main, lp_mul_poly(as_linpoly(uj), _input_channel(V, sys, j)), -1.0)
    lp_add_scaled(main, lp_mul_poly(L_lp, V - rho), 1.0)
    lp_add_scaled(main, lp_from_poly(eps * _sum_of_squares_poly(n)), -1.0)
    half = (lp_degree(main) + 1) // 2
    main_handle = constrain_in_cone(prog, main, cone, half)

    sol = solve(prog, backend)
    if sol.status == "infeasible":
        return None
    if sol.status not in ("optimal", "inaccurate"):
        raise SolverFailureError(f"multiplier feasibility solve ended with {sol.status}")
    L = GramCertificate(
        L_handle.basis, L_handle.gram_values(sol.x), cone, L_handle.witness_values(sol.x)
    ).polynomial()
    u = tuple(uj.value(sol.x) for uj in u_vars) if u_vars else None
    del main_handle
    return L, u


def multiplier_step(
    sys: PolySystem,
    V: Polynomial,
    cone,
    degL: int = 4,
    deg_u: int = 3,
    eps: float = MARGIN_EPS,
    rho_init: float = 1e-3,
    rho_cap: float = RHO_CAP,
    rho_floor: float = 1e-7,
    bisect_rel: float = 1e-4,
    backend=None,
) -> tuple[float, Polynomial, tuple[Polynomial, ...] | None]:
    """Maximize rho by bisection with V fixed; returns (rho, L, u).

    Maintains a bracket [feasible, infeasible]: the initial probe grows by
    doubling while feasible (capped at rho_cap, reported as effectively
    global) or shrinks by halving until feasible. A probe whose solve breaks
    down numerically counts as infeasible: the bracket keeps only witnessed
    points, so shrinking stays sound. Raises InfeasibleError when every
    rho down to rho_floor fails; below the floor a feasibility verdict for
    L(0)*rho sits under solver tolerance and means nothing.
    """
    cone = ConeTag.parse(cone)

    def probe_at(r):
        try:
            return _multiplier_feasible(sys, V, r, cone, degL, deg_u, eps, backend)
        except SolverFailureError:
            return None

    rho = min(max(rho_init, rho_floor), rho_cap)
    witness = probe_at(rho)
    if witness is None:
        hi = rho
        while witness is None:
            rho /= 2.0
            if rho < rho_floor:
                raise InfeasibleError(
                    "multiplier step infeasible for every probed rho; "
                    "Lyapunov initialization appears invalid"
                )
            witness = probe_at(rho)
        lo = rho
    else:
        lo = rho
        hi = None
        while hi is None:
            probe = lo * 2.0
            if probe >= rho_cap:
                w = probe_at(rho_cap)
                if w is not None:
                    return rho_cap, w[0], w[1]
                hi = rho_cap
                break
            w = probe_at(probe)
            if w is None:
                hi = probe
            else:
                lo, witness = probe, w
    while hi - lo > bisect_rel * max(lo, 1e-6):
        mid = 0.5 * (lo + hi)
        w = probe_at(mid)
        if w is None:
            hi = mid
        else:
            lo, witness = mid, w
    return lo, witness[0], witness[1]


def lyapunov_step(
    sys: PolySystem,
    L: Polynomial,
    u: Sequence[Polynomial] | None,
    cone,
    degV: int = 2,
    eps: float = MARGIN_EPS,
    pd_eps: float = PD_EPS,
    rho_cap: float = RHO_CAP,
    backend=None,
) -> tuple[Polynomial, float]:
    """Maximize rho over (V, rho) with L and u fixed; returns (V, rho).

    V has no constant term, satisfies the positive-definiteness witness
    V - pd_eps * sum x_i^2 in cone, and is normalized so the unit-vector
    values sum to 1.
    """
    cone = ConeTag.parse(cone)
    n = sys.n
    f_cl = sys.closed_loop(u)
    prog = ConicProgram()
    Vvar = declare_poly_var(prog, n, degV, drop_constant=True)
    vlp = as_linpoly(Vvar)
    rho_var = prog.add_variable()
    prog.add_nonneg(rho_var)
    cap_slack = prog.add_variable()
    prog.add_nonneg(cap_slack)
    prog.add_equality({rho_var: 1.0, cap_slack: 1.0}, rho_cap)
    prog.add_objective_term(rho_var, -1.0)

    pd_target: LinPoly = {m: e.copy() for m, e in vlp.items()}
    lp_add_scaled(pd_target, lp_from_poly(pd_eps * _sum_of_squares_poly(n)), -1.0)
    constrain_in_cone(prog, pd_target, cone, (degV + 1) // 2)

    main: LinPoly = {}
    for i in range(n):
        lp_add_scaled(main, lp_mul_poly(lp_partial_derivative(vlp, i), f_cl[i]), -1.0)
    lp_add_scaled(main, lp_mul_poly(vlp, L), 1.0)
    rho_lp: LinPoly = {(0,) * n: LinExpr.of_var(rho_var)}
    lp_add_scaled(main, lp_mul_poly(rho_lp, L), -1.0)
    lp_add_scaled(main, lp_from_poly(eps * _sum_of_squares_poly(n)), -1.0)
    constrain_in_cone(prog, main, cone, (lp_degree(main) + 1) // 2)

    norm = LinExpr()
    for j in range(n):
        norm.add_scaled(_unit_value_expr(vlp, n, j), 1.0)
    prog.add_equality(norm.terms, 1.0 - norm.const)

    sol = solve(prog, backend)
    if sol.status == "infeasible":
        raise InfeasibleError("Lyapunov step infeasible with the given multiplier")
    if sol.status not in ("optimal", "inaccurate"):
        raise SolverFailureError(f"Lyapunov step ended with status {sol.status}")
    return Vvar.value(sol.x), float(sol.x[rho_var])


# ---------------------------------------------------------------------------
# Alternation driver


@dataclass
class RoaOptions:
    degV: int = 2
    degL: int = 4
    deg_u: int = 3
    max_iters: int = 30
    rel_tol: float = 0.01
    eps: float = MARGIN_EPS
    pd_eps: float = PD_EPS
    rho_cap: float = RHO_CAP
    bisect_rel: float = 1e-4
    backend: object = None
    initial_controller: tuple[Polynomial, ...] | None = None


@dataclass
class RoaResult:
    V: Polynomial
    rho: float
    u: tuple[Polynomial, ...] | None
    trace: list[float]
    iterations: int
    terminated_by: str  # converged | max_iters | cap
    cone: ConeTag
    certificates: dict


def run_alternation(sys: PolySystem, cone, opts: RoaOptions | None = None) -> RoaResult:
    """Alternate multiplier_step / lyapunov_step from the Lyapunov-equation
    seed until rho changes by less than rel_tol (default 1 percent)."""
    opts = opts or RoaOptions()
    cone = ConeTag.parse(cone)
    u0 = opts.initial_controller
    if sys.G is not None and u0 is None:
        raise ValueError("systems with inputs need an initial controller for the seed")
    A, _ = linearize(
        PolySystem(sys.n, sys.closed_loop(u0)) if sys.G is not None else sys
    )
    V = lyap_init(A)
    u = u0
    rho_prev = None
    trace: list[float] = []
    terminated_by = "max_iters"
    iterations = 0
    for iterations in range(1, opts.max_iters + 1):
        rho_start = rho_prev * (1.0 - 1e-6) if rho_prev else 1e-3
        rho_m, L, u_new = multiplier_step(
            sys, V, cone,
            degL=opts.degL, deg_u=opts.deg_u, eps=opts.eps,
            rho_init=rho_start, rho_cap=opts.rho_cap,
            bisect_rel=opts.bisect_rel, backend=opts.backend,
        )
        if u_new is not None:
            u = u_new
        V, rho = lyapunov_step(
            sys, L, u, cone,
            degV=opts.degV, eps=opts.eps, pd_eps=opts.pd_eps,
            rho_cap=opts.rho_cap, backend=opts.backend,
        )
        rho = max(rho, rho_m)
        trace.append(rho)
        if rho >= opts.rho_cap * (1.0 - 1e-9):
            terminated_by = "cap"
            rho_prev = rho
            break
        if rho_prev is not None and abs(rho - rho_prev) < opts.rel_tol * abs(rho_prev):
            terminated_by = "converged"
            rho_prev = rho
            break
        rho_prev = rho

    certificates = _final_certificates(sys, V, rho_prev, u, cone, opts)
    return RoaResult(V, rho_prev, u, trace, iterations, terminated_by, cone, certificates)


def _final_certificates(
    sys: PolySystem, V: Polynomial, rho: float, u, cone: ConeTag, opts: RoaOptions
) -> dict:
    """Re-derive stand-alone membership proofs for the final iterate.

    The Lyapunov decrease proof re-solves for a multiplier at the final
    (V, rho); positive definiteness and the multiplier itself are plain cone
    memberships (Putinar certificates over the empty set).
    """
    n = sys.n
    empty = SemialgebraicSet(n)
    pd_poly = V - PD_EPS * _sum_of_squares_poly(n)
    certs = {"V_pd": putinar_feasibility(pd_poly, empty, cone, 0, backend=opts.backend)}
    witness = _multiplier_feasible(
        sys, V, rho, cone, opts.degL, opts.deg_u, opts.eps, opts.backend
    )
    if witness is None:
        # The alternation accepted rho at solver tolerance; back off slightly
        # for a standalone proof.
        witness = _multiplier_feasible(
            sys, V, rho * (1 - 1e-6), cone, opts.degL, opts.deg_u, opts.eps, opts.backend
        )
    if witness is not None:
        L, u_w = witness
        f_cl = sys.closed_loop(u_w if u_w is not None else u)
        decrease = -lie_derivative(V, f_cl) + L * (V - rho) - opts.eps * _sum_of_squares_poly(n)
        certs["decrease"] = putinar_feasibility(decrease, empty, cone, 0, backend=opts.backend)
        certs["multiplier"] = putinar_feasibility(L, empty, cone, 0, backend=opts.backend)
    return certs


# ---------------------------------------------------------------------------
# Hessian-diagonalizing coordinate transform


def hessian_at_origin(p: Polynomial) -> np.ndarray:
    n = p.nvars
    H = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            mono = tuple(
                (2 if k == i else 0) if i == j else (1 if k in (i, j) else 0)
                for k in range(n)
            )
            H[i, j] = 2.0 * p.coeff(mono) if i == j else p.coeff(mono)
    return H


def hessian_diagonalizing_transform(V: Polynomial, Vdot: Polynomial) -> np.ndarray:
    """T with T^T H1 T = I and T^T H2 T diagonal, for H1 = hess V(0) and
    H2 = -hess Vdot(0), both required positive definite."""
    H1 = hessian_at_origin(V)
    H2 = -hessian_at_origin(Vdot)
    try:
        Lc = np.linalg.cholesky(H1)
    except np.linalg.LinAlgError:
        raise ValueError("Hessian of V at origin is not positive definite") from None
    M = np.linalg.solve(Lc, np.linalg.solve(Lc, H2).T).T
    M = (M + M.T) / 2.0
    eigvals, U = np.linalg.eigh(M)
    if eigvals[0] <= 0:
        raise ValueError("Hessian of -Vdot at origin is not positive definite")
    return np.linalg.solve(Lc.T, U)


# ---------------------------------------------------------------------------
# Simulation oracle: batched RK4 convergence checking


class BatchField:
    """Vectorized evaluator for a polynomial vector field on (N, n) arrays."""

    def __init__(self, fs: Sequence[Polynomial]):
        self.n = fs[0].nvars
        self.components = []
        for f in fs:
            monos = list(f.terms.items())
            E = np.array([m for m, _ in monos], dtype=np.int64).reshape(len(monos), self.n)
            c = np.array([v for _, v in monos])
            self.components.append((E, c))

    def __call__(self, X: np.ndarray) -> np.ndarray:
        out = np.empty_like(X)
        for i, (E, c) in enumerate(self.components):
            if len(c) == 0:
                out[:, i] = 0.0
                continue
            out[:, i] = (X[:, None, :] ** E[None, :, :]).prod(axis=2) @ c
        return out


def simulate_converges(
    fs: Sequence[Polynomial],
    points: np.ndarray,
    horizon: float,
    dt: float,
    target: float = 1e-3,
    blowup: float = 1e3,
) -> np.ndarray:
    """RK4 each row of points under xdot = f(x); True where the trajectory
    reaches ||x|| <= target within the horizon (frozen once reached)."""
    field = BatchField(fs)
    X = np.array(points, dtype=float)
    n_steps = int(round(horizon / dt))
    converged = np.linalg.norm(X, axis=1) <= target
    dead = np.zeros(len(X), dtype=bool)
    for _ in range(n_steps):
        active = ~(converged | dead)
        if not active.any():
            break
        Y = X[active]
        k1 = field(Y)
        k2 = field(Y + 0.5 * dt * k1)
        k3 = field(Y + 0.5 * dt * k2)
        k4 = field(Y + dt * k3)
        Y = Y + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        X[active] = Y
        norms = np.linalg.norm(Y, axis=1)
        idx = np.flatnonzero(active)
        converged[idx[norms <= target]] = True
        dead[idx[norms > blowup]] = True
    return converged


def convergence_horizon(A: np.ndarray, factor: float = 25.0) -> float:
    """Horizon scaled to the slowest linear mode of A (Hurwitz)."""
    rates = -np.real(np.linalg.eigvals(A))
    slowest = float(np.min(rates))
    if slowest <= 0:
        raise ValueError("A is not Hurwitz")
    return factor / slowest


def sample_sublevel(
    V: Polynomial, rho: float, n_samples: int, rng: np.random.Generator
) -> np.ndarray:
    """Uniform samples of {V <= rho} for quadratic positive definite V,
    by rejection from the ellipsoid's bounding box."""
    if V.degree() != 2:
        raise ValueError("sublevel sampling implemented for quadratic V only")
    n = V.nvars
    P = hessian_at_origin(V) / 2.0
    Pinv = np.linalg.inv(P)
    box = np.sqrt(rho * np.diag(Pinv))
    field = BatchField([V])
    out = np.empty((0, n))
    while len(out) < n_samples:
        draw = rng.uniform(-box, box, size=(max(n_samples, 1024), n))
        vals = field(draw)[:, 0]
        out = np.vstack([out, draw[vals <= rho]])
    return out[:n_samples]


# ---------------------------------------------------------------------------
# Quadrotor-scale assembly stress check


@dataclass
class StressReport:
    nvars: int
    basis_size: int
    num_vars: int
    num_equalities: int
    num_rotated_cones: int
    num_nonneg: int
    num_psd_blocks: int
    build_seconds: float
    solve_status: str | None = None
    solve_seconds: float | None = None


def stress_system(n: int = 16) -> PolySystem:
    """Coupled damped oscillators with cubic softening, stable at the origin."""
    if n % 2 != 0:
        raise ValueError("stress system has oscillator pairs; n must be even")
    fs = []
    for k in range(n // 2):
        pos, vel = 2 * k, 2 * k + 1
        x_pos = Polynomial.variable(n, pos)
        x_vel = Polynomial.variable(n, vel)
        coupling = Polynomial.zero(n)
        if k > 0:
            coupling = 0.1 * Polynomial.variable(n, 2 * (k - 1))
        fs.append(x_vel)
        fs.append(-(1.0 + 0.1 * k) * x_pos - 0.5 * x_vel - x_pos * x_pos * x_pos + coupling)
    return PolySystem(n, tuple(fs))


def stress_assembly(
    n: int = 16,
    degL: int = 4,
    rho: float = 0.1,
    cone="sdsos",
    attempt_solve: bool = False,
    time_limit: float = 300.0,
    backend=None,
) -> StressReport:
    """Assemble (and optionally attempt) the n-state degree-6 decrease
    program: -Vdot + L (V - rho) - eps||x||^2 in cone, V from lyap_init.

    Reports program dimensions; asserts nothing about optima.
    """
    cone = ConeTag.parse(cone)
    sys = stress_system(n)
    A, _ = linearize(sys)
    V = lyap_init(A)
    started = time.perf_counter()
    prog = ConicProgram()
    L_handle = _gram_handle(prog, n, degL // 2, cone)
    main: LinPoly = {}
    lp_add_scaled(main, lp_from_poly(lie_derivative(V, sys.f)), -1.0)
    lp_add_scaled(main, lp_mul_poly(gram_polynomial(L_handle), V - rho), 1.0)
    lp_add_scaled(main, lp_from_poly(MARGIN_EPS * _sum_of_squares_poly(n)), -1.0)
    half = (lp_degree(main) + 1) // 2
    handle = constrain_in_cone(prog, main, cone, half)
    build_seconds = time.perf_counter() - started
    report = StressReport(
        nvars=n,
        basis_size=handle.size(),
        num_vars=prog.num_vars,
        num_equalities=len(prog.eq_rows),
        num_rotated_cones=len(prog.rotated_cones),
        num_nonneg=len(prog.nonneg),
        num_psd_blocks=len(prog.psd_blocks),
        build_seconds=build_seconds,
    )
    if attempt_solve:
        t0 = time.perf_counter()
        try:
            sol = solve(prog, backend, time_limit=time_limit)
            report.solve_status = sol.status
        except SolverFailureError as exc:
            report.solve_status = f"solver failure: {exc}"
        report.solve_seconds = time.perf_counter() - t0
    return report


# ---------------------------------------------------------------------------
# System and result files

SYSTEM_HEADER = "poly-system v1"


def system_to_text(sys: PolySystem) -> str:
    lines = [SYSTEM_HEADER, f"nvars {sys.n}", "f"]
    for fi in sys.f:
        lines.append(poly_to_text(fi))
    if sys.G is None:
        lines.append("inputs 0")
    else:
        lines.append(f"inputs {sys.num_inputs()}")
        for row in sys.G:
            for g in row:
                lines.append(poly_to_text(g))
    lines.append("end")
    return "\n".join(lines) + "\n"


def system_from_text(text: str) -> PolySystem:
    lines = text.strip().splitlines()
    if not lines or lines[0] != SYSTEM_HEADER:
        raise ValueError("missing system header")
    n = int(lines[1].split()[1])
    if lines[2] != "f":
        raise ValueError("missing f block")
    pos = 3
    fs = []
    for _ in range(n):
        fs.append(poly_from_text(lines[pos], n))
        pos += 1
    m = int(lines[pos].split()[1]); pos += 1
    G = None
    if m:
        rows = []
        for _ in range(n):
            row = []
            for _ in range(m):
                row.append(poly_from_text(lines[pos], n)); pos += 1
            rows.append(tuple(row))
        G = tuple(rows)
    if lines[pos] != "end":
        raise ValueError("missing end marker")
    return PolySystem(n, tuple(fs), G)


def result_to_text(result: RoaResult) -> str:
    lines = ["roa-result v1"]
    lines.append(f"cone {result.cone.name}")
    lines.append(f"rho {result.rho!r}")
    lines.append(f"V {poly_to_text(result.V)}")
    if result.u is None:
        lines.append("inputs 0")
    else:
        lines.append(f"inputs {len(result.u)}")
        for uj in result.u:
            lines.append(poly_to_text(uj))
    lines.append("trace " + " ".join(repr(r) for r in result.trace))
    lines.append(f"iterations {result.iterations}")
    lines.append(f"terminated_by {result.terminated_by}")
    lines.append("end")
    return "\n".join(lines) + "\n"


def sublevel_slice_csv(
    V: Polynomial,
    rho: float,
    dims: tuple[int, int],
    bounds: tuple[float, float, float, float],
    resolution: int = 200,
) -> str:
    """Grid CSV of V over a 2-D coordinate slice (other coordinates zero),
    with an indicator for membership in {V <= rho}."""
    i, j = dims
    if not (0 <= i < V.nvars and 0 <= j < V.nvars) or i == j:
        raise ValueError(
            f"slice dims {dims} invalid for a function of {V.nvars} variable(s)"
        )
    x_lo, x_hi, y_lo, y_hi = bounds
    xs = np.linspace(x_lo, x_hi, resolution)
    ys = np.linspace(y_lo, y_hi, resolution)
    lines = [f"x{i},x{j},V,inside"]
    point = [0.0] * V.nvars
    for yv in ys:
        for xv in xs:
            point[i] = float(xv)
            point[j] = float(yv)
            val = float(V(point))
            lines.append(f"{point[i]!r},{point[j]!r},{val!r},{int(val <= rho)}")
    return "\n".join(lines) + "\n"
