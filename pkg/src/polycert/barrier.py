"""Collision avoidance for a planar constant-speed vehicle.

A Dubins-style vehicle picks among five yaw-servo control primitives. Before
executing a primitive the planner synthesizes a barrier function V over the
unit ball around the current state: V vanishes at the current state, exceeds
1 on the interiors of the two nearest obstacles ahead, and decreases along
the degree-3 Taylor-expanded closed-loop dynamics for every admissible
crosswind. Trajectories that start at V = 0 then cannot reach V > 1, so the
vehicle cannot enter either obstacle while the certificate's ball remains
valid. The simulator replans on a fixed interval and integrates the exact
(non-expanded) dynamics.

All certificates are expressed in coordinates centered at the anchor state,
which pins V(anchor) = 0 structurally and keeps coefficients well scaled.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .certify import (
    ConeTag,
    InfeasibleError,
    LinExpr,
    LinPoly,
    PutinarCertificate,
    SemialgebraicSet,
    add_putinar_constraint,
    declare_poly_var,
    lp_extend_vars,
    lp_from_polyvar,
    lp_mul_poly,
    lp_partial_derivative,
    verify_certificate,
)
from .conic import ConicProgram, SolverFailureError, solve
from .poly import Polynomial, poly_from_text, poly_to_text, taylor_trig

SPEED = 1.0
WIND_BOUND = 0.05
TURN_GAIN = 50.0
EPS_MARGIN = 1e-4
TAYLOR_DEGREE = 3
# Stand-in obstacle used to pad the planner's two-obstacle program when fewer
# than two real obstacles qualify; far enough to be vacuous inside the unit
# certificate ball, near enough to keep constraint coefficients well scaled.
VIRTUAL_OBSTACLE_DISTANCE = 10.0


def wrap_angle(psi: float) -> float:
    """Wrap to (-pi, pi]."""
    wrapped = math.fmod(psi + math.pi, 2.0 * math.pi)
    if wrapped <= 0.0:
        wrapped += 2.0 * math.pi
    return wrapped - math.pi


@dataclass(frozen=True)
class UAVState:
    x: float
    y: float
    psi: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.psi])

    def heading(self) -> tuple[float, float]:
        return (-math.sin(self.psi), math.cos(self.psi))


@dataclass(frozen=True)
class Obstacle:
    x: float
    y: float
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("obstacle radius must be positive")

    def contains(self, px: float, py: float) -> bool:
        return (px - self.x) ** 2 + (py - self.y) ** 2 < self.radius**2

    def clearance(self, px: float, py: float) -> float:
        return math.hypot(px - self.x, py - self.y) - self.radius


@dataclass(frozen=True)
class ControlPrimitive:
    """Yaw servo u = -gain * (psi - psi_des)."""

    index: int
    psi_des: float
    gain: float = TURN_GAIN

    def u_value(self, psi: float) -> float:
        return -self.gain * (psi - self.psi_des)


PRIMITIVES: tuple[ControlPrimitive, ...] = tuple(
    ControlPrimitive(i + 1, math.radians(deg))
    for i, deg in enumerate((0.0, -20.0, 20.0, -45.0, 45.0))
)


def dubins_dynamics(state: UAVState, u: float, w: float) -> np.ndarray:
    """(xdot, ydot, psidot) = (-v sin psi + w, v cos psi, u) with v = 1."""
    return np.array([-SPEED * math.sin(state.psi) + w, SPEED * math.cos(state.psi), u])


def _embed_univariate(p: Polynomial, nvars: int, var_index: int) -> Polynomial:
    terms = {}
    for mono, c in p.terms.items():
        m = [0] * nvars
        m[var_index] = mono[0]
        terms[tuple(m)] = c
    return Polynomial(nvars, terms)


def taylor_dynamics(
    center_psi: float, primitive: ControlPrimitive | None = None
) -> tuple[Polynomial, Polynomial, Polynomial]:
    """Degree-3 polynomial vector field in offset coordinates (dx, dy, dpsi, w).

    dpsi is the yaw offset from center_psi; sin and cos are Taylor-truncated
    about the center. The third component is the primitive's servo law (exact,
    affine in dpsi) or zero when no primitive is given.
    """
    sin_t = _embed_univariate(taylor_trig("sin", center_psi, TAYLOR_DEGREE), 4, 2)
    cos_t = _embed_univariate(taylor_trig("cos", center_psi, TAYLOR_DEGREE), 4, 2)
    w = Polynomial.variable(4, 3)
    fx = -SPEED * sin_t + w
    fy = SPEED * cos_t
    if primitive is None:
        fpsi = Polynomial.zero(4)
    else:
        dpsi = Polynomial.variable(4, 2)
        fpsi = -primitive.gain * (dpsi + (center_psi - primitive.psi_des))
    return fx, fy, fpsi


def _lp_negated(lp: LinPoly) -> LinPoly:
    return {m: e.scaled(-1.0) for m, e in lp.items()}


def _unit_ball(nvars: int, ndims: int) -> Polynomial:
    g = Polynomial.constant(nvars, 1.0)
    for i in range(ndims):
        xi = Polynomial.variable(nvars, i)
        g = g - xi * xi
    return g


@dataclass
class BarrierCertificate:
    """Barrier V anchored at a state, with one proof per safety condition.

    V is a polynomial in offset coordinates (dx, dy, dpsi) relative to the
    anchor; V(anchor) = 0 holds structurally (no constant term). The obstacle
    proofs certify V >= 1 + margin on each obstacle interior within the unit
    ball; the dynamics proof certifies Vdot <= -margin on ball x wind range.
    """

    anchor: UAVState
    primitive_index: int
    cone: ConeTag
    V: Polynomial  # 3 offset variables
    obstacle_certs: tuple[PutinarCertificate, ...]
    dynamics_cert: PutinarCertificate
    solve_seconds: float

    def value(self, state: UAVState) -> float:
        return self.V(
            (
                state.x - self.anchor.x,
                state.y - self.anchor.y,
                wrap_angle(state.psi - self.anchor.psi),
            )
        )


def synthesize_barrier(
    x0: UAVState,
    obstacles: Sequence[Obstacle],
    primitive: ControlPrimitive,
    cone,
    degV: int = 4,
    mult_obs_degree: int = 2,
    mult_dyn_degree: int = 4,
    eps: float = EPS_MARGIN,
    backend=None,
) -> BarrierCertificate:
    """Find a degree-degV barrier for one primitive, or raise InfeasibleError.

    Infeasibility means no certificate exists at these degrees; it cannot
    distinguish an unsafe primitive from an insufficient degree.
    """
    cone = ConeTag.parse(cone)
    if len(obstacles) != 2:
        raise ValueError("exactly two obstacles required (pad with virtual ones)")
    for obs in obstacles:
        if obs.contains(x0.x, x0.y):
            raise ValueError("anchor state lies inside an obstacle")

    started = time.perf_counter()
    prog = ConicProgram()
    V = declare_poly_var(prog, 3, degV, drop_constant=True)
    V3 = lp_from_polyvar(V)

    ball3 = _unit_ball(3, 3)
    obstacle_handles = []
    for obs in obstacles:
        dx = Polynomial.variable(3, 0) + (x0.x - obs.x)
        dy = Polynomial.variable(3, 1) + (x0.y - obs.y)
        outside = dx * dx + dy * dy - obs.radius**2
        region = SemialgebraicSet.of(3, [-outside, ball3])
        target: LinPoly = {m: e.copy() for m, e in V3.items()}
        const = target.setdefault((0, 0, 0), LinExpr())
        const.const -= 1.0 + eps
        obstacle_handles.append(
            add_putinar_constraint(prog, target, region, cone, mult_obs_degree)
        )

    V4 = lp_extend_vars(V3, 4)
    f = taylor_dynamics(x0.psi, primitive)
    vdot: LinPoly = {}
    for i in range(3):
        partial = lp_partial_derivative(V4, i)
        for mono, expr in lp_mul_poly(partial, f[i]).items():
            acc = vdot.get(mono)
            if acc is None:
                vdot[mono] = expr
            else:
                acc.add_scaled(expr, 1.0)
    target_c = _lp_negated(vdot)
    const = target_c.setdefault((0, 0, 0, 0), LinExpr())
    const.const -= eps
    wind = Polynomial(4, {(0, 0, 0, 0): WIND_BOUND**2, (0, 0, 0, 2): -1.0})
    region_c = SemialgebraicSet.of(4, [_unit_ball(4, 3), wind])
    dynamics_handle = add_putinar_constraint(prog, target_c, region_c, cone, mult_dyn_degree)

    sol = solve(prog, backend)
    if sol.status == "infeasible":
        raise InfeasibleError(
            f"no {cone.name} barrier for primitive {primitive.index} at degree {degV}"
        )
    if sol.status not in ("optimal", "inaccurate"):
        raise SolverFailureError(f"barrier solve ended with status {sol.status}")

    certs = []
    for handle in obstacle_handles + [dynamics_handle]:
        cert = handle.extract(sol.x)
        report = verify_certificate(cert, backend=backend)
        if not report.passed:
            raise SolverFailureError(
                f"barrier certificate failed verification: {'; '.join(report.failures)}"
            )
        certs.append(cert)

    return BarrierCertificate(
        anchor=x0,
        primitive_index=primitive.index,
        cone=cone,
        V=V.value(sol.x),
        obstacle_certs=tuple(certs[:2]),
        dynamics_cert=certs[2],
        solve_seconds=time.perf_counter() - started,
    )


# ---------------------------------------------------------------------------
# Planner


@dataclass
class PlanResult:
    primitive_index: int | None  # None when no primitive certifies
    certificate: BarrierCertificate | None
    tried: tuple[int, ...]
    obstacles_used: tuple[Obstacle, ...]


def _virtual_obstacle(state: UAVState, k: int) -> Obstacle:
    hx, hy = state.heading()
    d = VIRTUAL_OBSTACLE_DISTANCE + k
    return Obstacle(state.x - d * hx, state.y - d * hy, 0.03)


def select_obstacles(state: UAVState, obstacles: Sequence[Obstacle]) -> tuple[Obstacle, ...]:
    """Two nearest obstacles ahead (positive projection onto the heading),
    padded with virtual far obstacles when fewer qualify."""
    hx, hy = state.heading()
    ahead = [
        obs
        for obs in obstacles
        if (obs.x - state.x) * hx + (obs.y - state.y) * hy > 0.0
    ]
    ahead.sort(key=lambda o: (o.x - state.x) ** 2 + (o.y - state.y) ** 2)
    chosen = list(ahead[:2])
    k = 0
    while len(chosen) < 2:
        chosen.append(_virtual_obstacle(state, k))
        k += 1
    return tuple(chosen)


def plan_step(
    state: UAVState,
    obstacles: Sequence[Obstacle],
    cone="sdsos",
    backend=None,
    **synth_kwargs,
) -> PlanResult:
    """Try primitives in index order against the two nearest obstacles ahead;
    return the first that certifies, or primitive_index=None if all fail."""
    pair = select_obstacles(state, obstacles)
    tried = []
    for primitive in PRIMITIVES:
        tried.append(primitive.index)
        try:
            cert = synthesize_barrier(state, pair, primitive, cone, backend=backend, **synth_kwargs)
        except (InfeasibleError, SolverFailureError):
            # a primitive the solver cannot certify is unusable either way
            continue
        return PlanResult(primitive.index, cert, tuple(tried), pair)
    return PlanResult(None, None, tuple(tried), pair)


# ---------------------------------------------------------------------------
# Simulator


@dataclass
class TrajectoryRow:
    t: float
    x: float
    y: float
    psi: float
    u: float
    w: float
    primitive: int
    status: str  # certified | hold | coast | collided


@dataclass
class Trajectory:
    rows: list[TrajectoryRow]
    events: list[tuple[float, str]]
    all_certified: bool
    collided: bool
    certificates: list[tuple[float, BarrierCertificate]]

    def final_state(self) -> UAVState:
        last = self.rows[-1]
        return UAVState(last.x, last.y, last.psi)


def _rk4_step(state: np.ndarray, primitive: ControlPrimitive, w: float, dt: float) -> np.ndarray:
    def deriv(s: np.ndarray) -> np.ndarray:
        u = primitive.u_value(s[2])
        return np.array([-SPEED * math.sin(s[2]) + w, SPEED * math.cos(s[2]), u])

    k1 = deriv(state)
    k2 = deriv(state + 0.5 * dt * k1)
    k3 = deriv(state + 0.5 * dt * k2)
    k4 = deriv(state + dt * k3)
    return state + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def _wind_value(policy, rng: np.random.Generator | None, replan_count: int) -> float:
    if isinstance(policy, (int, float)):
        w = float(policy)
        if abs(w) > WIND_BOUND + 1e-12:
            raise ValueError(f"constant wind {w} exceeds bound {WIND_BOUND}")
        return w
    if policy == "random":
        if rng is None:
            raise ValueError("random wind policy requires a seed")
        return float(rng.uniform(-WIND_BOUND, WIND_BOUND))
    if policy == "switching":
        return WIND_BOUND if replan_count % 2 == 0 else -WIND_BOUND
    raise ValueError(f"unknown wind policy {policy!r}")


def simulate(
    obstacles: Sequence[Obstacle],
    x_init: UAVState,
    duration: float,
    wind_policy,
    cone="sdsos",
    seed: int | None = None,
    dt: float = 1e-3,
    replan_dt: float = 0.05,
    backend=None,
    **synth_kwargs,
) -> Trajectory:
    """Fixed-step RK4 on the exact dynamics with periodic replanning.

    wind_policy: a constant in [-0.05, 0.05], "random" (uniform redraw every
    integration step), or "switching" (+/-0.05 alternating per replan).
    When no primitive certifies, the previous primitive is held and logged.
    """
    if duration <= 0:
        raise ValueError("duration must be positive")
    rng = np.random.default_rng(seed) if seed is not None else None
    steps = round(duration / dt)
    replan_every = max(1, round(replan_dt / dt))

    state = np.array([x_init.x, x_init.y, wrap_angle(x_init.psi)])
    active = PRIMITIVES[0]
    rows: list[TrajectoryRow] = []
    events: list[tuple[float, str]] = []
    certificates: list[tuple[float, BarrierCertificate]] = []
    all_certified = True
    collided = False
    replan_count = 0
    status = "coast"

    for step in range(steps):
        t = step * dt
        if step % replan_every == 0:
            plan = plan_step(UAVState(*state), obstacles, cone, backend=backend, **synth_kwargs)
            replan_count += 1
            if plan.primitive_index is None:
                all_certified = False
                events.append((t, f"no-safe-primitive: holding {active.index}"))
                status = "hold"
            else:
                active = PRIMITIVES[plan.primitive_index - 1]
                certificates.append((t, plan.certificate))
                status = "certified"
        else:
            status = "coast"
        w = _wind_value(wind_policy, rng, replan_count - 1)
        u = active.u_value(state[2])
        rows.append(
            TrajectoryRow(
                t, float(state[0]), float(state[1]), float(state[2]),
                float(u), w, active.index, status,
            )
        )
        state = _rk4_step(state, active, w, dt)
        state[2] = wrap_angle(state[2])
        if any(obs.contains(state[0], state[1]) for obs in obstacles):
            collided = True
            events.append(((step + 1) * dt, "collision"))
            rows.append(
                TrajectoryRow(
                    (step + 1) * dt, float(state[0]), float(state[1]), float(state[2]),
                    float(active.u_value(state[2])), w, active.index, "collided",
                )
            )
            break
    else:
        rows.append(
            TrajectoryRow(
                steps * dt, float(state[0]), float(state[1]), float(state[2]),
                float(active.u_value(state[2])), 0.0, active.index, "end",
            )
        )
    return Trajectory(rows, events, all_certified, collided, certificates)


def trajectory_to_csv(traj: Trajectory) -> str:
    lines = ["t,x,y,psi,u,w,primitive,status"]
    for r in traj.rows:
        lines.append(
            f"{r.t!r},{r.x!r},{r.y!r},{r.psi!r},{r.u!r},{r.w!r},{r.primitive},{r.status}"
        )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Randomized environments and the success-rate experiment


def sample_environment(rng: np.random.Generator, start: UAVState, n_obstacles: int = 2) -> tuple[Obstacle, ...]:
    """Obstacles of radius 0.03 with centers uniform in [-0.2, 0.2] x [0, 0.2];
    any obstacle covering the start state is redrawn."""
    obstacles = []
    while len(obstacles) < n_obstacles:
        cx = float(rng.uniform(-0.2, 0.2))
        cy = float(rng.uniform(0.0, 0.2))
        obs = Obstacle(cx, cy, 0.03)
        if obs.clearance(start.x, start.y) <= 1e-9:
            continue
        obstacles.append(obs)
    return tuple(obstacles)


def _table1_task(args) -> tuple[int, int, dict]:
    psi_idx, env_idx, psi0_deg, seed, cones, degV = args
    rng = np.random.default_rng(np.random.SeedSequence([seed, psi_idx, env_idx]))
    start = UAVState(0.0, 0.0, math.radians(psi0_deg))
    obstacles = sample_environment(rng, start)
    out = {}
    for cone in cones:
        t0 = time.perf_counter()
        try:
            synthesize_barrier(start, obstacles, PRIMITIVES[0], cone, degV=degV)
            feasible = True
        except InfeasibleError:
            feasible = False
        except SolverFailureError:
            # numerical breakdown: neither a certificate nor an infeasibility
            # verdict, so the environment is excluded from the inclusion check
            feasible = None
        out[cone] = (feasible, time.perf_counter() - t0)
    return psi_idx, env_idx, out


@dataclass
class Table1Result:
    psi0_deg: tuple[float, ...]
    cones: tuple[str, ...]
    n_envs: int
    seed: int
    feasible: dict  # (psi0_deg, cone) -> list[bool]
    solve_seconds: dict  # (psi0_deg, cone) -> list[float]

    def success_rate(self, psi0: float, cone: str) -> float:
        flags = self.feasible[(psi0, cone)]
        return 100.0 * sum(1 for f in flags if f is True) / len(flags)

    def inclusion_violations(self) -> int:
        """Environments where SDSOS certified but SOS proved infeasible (must
        be 0); solver breakdowns (status None) carry no verdict and are
        excluded."""
        if "sdsos" not in self.cones or "sos" not in self.cones:
            return 0
        count = 0
        for psi0 in self.psi0_deg:
            for a, b in zip(self.feasible[(psi0, "sdsos")], self.feasible[(psi0, "sos")]):
                if a is True and b is False:
                    count += 1
        return count

    def median_solve_seconds(self, cone: str) -> float:
        times = [t for psi0 in self.psi0_deg for t in self.solve_seconds[(psi0, cone)]]
        return float(np.median(times))

    def summary_csv(self) -> str:
        lines = ["psi0_deg,cone,n_envs,successes,rate_pct,median_solve_s,mean_solve_s"]
        for psi0 in self.psi0_deg:
            for cone in self.cones:
                flags = self.feasible[(psi0, cone)]
                times = self.solve_seconds[(psi0, cone)]
                successes = sum(1 for f in flags if f is True)
                lines.append(
                    f"{psi0!r},{cone},{len(flags)},{successes},"
                    f"{self.success_rate(psi0, cone)!r},"
                    f"{float(np.median(times))!r},{float(np.mean(times))!r}"
                )
        return "\n".join(lines) + "\n"

    def detail_csv(self) -> str:
        lines = ["psi0_deg,env,cone,feasible,solve_s"]
        for psi0 in self.psi0_deg:
            for cone in self.cones:
                for env_idx, (flag, t) in enumerate(
                    zip(self.feasible[(psi0, cone)], self.solve_seconds[(psi0, cone)])
                ):
                    status = "failed" if flag is None else int(flag)
                    lines.append(f"{psi0!r},{env_idx},{cone},{status},{t!r}")
        return "\n".join(lines) + "\n"


def run_table1_experiment(
    psi0_deg: Sequence[float] = (0.0, 10.0, 20.0, 30.0, 40.0),
    n_envs: int = 100,
    seed: int = 26,
    cones: Sequence[str] = ("sdsos", "sos"),
    degV: int = 4,
    max_workers: int | None = None,
) -> Table1Result:
    """Success rate of the first primitive over random obstacle environments.

    Environments are shared across cones (same seed substream per task), so
    cone inclusion makes SDSOS success imply SOS success environment by
    environment. Tasks run in a process pool; results reduce in task order
    for determinism.
    """
    cones = tuple(ConeTag.parse(c).name.lower() for c in cones)
    tasks = [
        (pi, ei, float(psi0_deg[pi]), seed, cones, degV)
        for pi in range(len(psi0_deg))
        for ei in range(n_envs)
    ]
    feasible = {(float(p), c): [None] * n_envs for p in psi0_deg for c in cones}
    seconds = {(float(p), c): [0.0] * n_envs for p in psi0_deg for c in cones}
    if max_workers == 0:
        results = list(map(_table1_task, tasks))
    else:
        with ProcessPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(_table1_task, tasks, chunksize=4))
    for pi, ei, out in results:
        for cone, (flag, t) in out.items():
            feasible[(float(psi0_deg[pi]), cone)][ei] = flag
            seconds[(float(psi0_deg[pi]), cone)][ei] = t
    return Table1Result(
        tuple(float(p) for p in psi0_deg), cones, n_envs, seed, feasible, seconds
    )


# ---------------------------------------------------------------------------
# Environment files

ENVIRONMENT_HEADER = "barrier-environment v1"


def environment_to_text(start: UAVState, obstacles: Sequence[Obstacle]) -> str:
    lines = [ENVIRONMENT_HEADER, f"start {start.x!r} {start.y!r} {start.psi!r}"]
    lines.append(f"obstacles {len(obstacles)}")
    for obs in obstacles:
        lines.append(f"{obs.x!r} {obs.y!r} {obs.radius!r}")
    lines.append("end")
    return "\n".join(lines) + "\n"


def environment_from_text(text: str) -> tuple[UAVState, tuple[Obstacle, ...]]:
    lines = text.strip().splitlines()
    if not lines or lines[0] != ENVIRONMENT_HEADER:
        raise ValueError("missing environment header")
    sx, sy, spsi = (float(v) for v in lines[1].split()[1:])
    n = int(lines[2].split()[1])
    obstacles = []
    for i in range(n):
        ox, oy, r = (float(v) for v in lines[3 + i].split())
        obstacles.append(Obstacle(ox, oy, r))
    if lines[3 + n] != "end":
        raise ValueError("missing end marker")
    return UAVState(sx, sy, spsi), tuple(obstacles)
