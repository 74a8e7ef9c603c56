"""Wireless-coverage power minimization.

Transmitters at fixed planar positions radiate energy that decays with
inverse squared distance. The task is to choose per-transmitter rates c_i,
minimizing total power, so that the cumulative energy field meets a required
level C everywhere on a collection of ellipsoidal regions. Clearing the
common denominator turns each region requirement into a single polynomial
nonnegativity constraint whose coefficients are linear in the rates, so the
whole problem is one conic solve with a Putinar certificate per region.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .certify import (
    CERT_TOL,
    ConeTag,
    InfeasibleError,
    LinExpr,
    LinPoly,
    PutinarCertificate,
    SemialgebraicSet,
    add_putinar_constraint,
    lp_add_scaled,
    lp_from_poly,
    verify_certificate,
)
from .conic import ConicProgram, SolverFailureError, solve
from .poly import Polynomial, poly_from_text, poly_to_text


@dataclass(frozen=True)
class CoverageInstance:
    """Transmitter layout, rate bounds, required level, and target regions."""

    transmitters: tuple[tuple[float, float], ...]
    rate_bounds: tuple[float, ...]
    level: float
    regions: tuple[SemialgebraicSet, ...]

    def __post_init__(self):
        if len(self.rate_bounds) != len(self.transmitters):
            raise ValueError("one rate bound required per transmitter")
        if self.level <= 0:
            raise ValueError("required level must be positive")
        if any(b <= 0 for b in self.rate_bounds):
            raise ValueError("rate bounds must be positive")
        for region in self.regions:
            if region.nvars != 2:
                raise ValueError("regions must be planar (2 variables)")
            for tx in self.transmitters:
                if region.contains(tx):
                    raise ValueError(f"transmitter {tx} lies inside a target region")

    def restrict(self, indices: Sequence[int]) -> "CoverageInstance":
        """Sub-instance keeping only the chosen transmitters."""
        return CoverageInstance(
            tuple(self.transmitters[i] for i in indices),
            tuple(self.rate_bounds[i] for i in indices),
            self.level,
            self.regions,
        )


def ellipsoid_region(A: Sequence[Sequence[float]], center: Sequence[float], alpha: float) -> SemialgebraicSet:
    """Region {z : (z - c)^T A (z - c) <= alpha} as a one-constraint set."""
    cx, cy = center
    x = Polynomial.variable(2, 0) - cx
    y = Polynomial.variable(2, 1) - cy
    quad = A[0][0] * x * x + 2.0 * A[0][1] * x * y + A[1][1] * y * y
    return SemialgebraicSet.of(2, [Polynomial.constant(2, alpha) - quad])


def paper_fig1() -> CoverageInstance:
    """Built-in regression instance: two transmitters, five ellipsoids."""
    ellipsoids = [
        ([[3.0, 1.0], [1.0, 1.0]], (1.1, 1.75), 0.01),
        ([[1.0, 0.0], [0.0, 3.0]], (1.25, 2.0), 0.01),
        ([[1.0, 0.0], [0.0, 1.0]], (1.5, 1.75), 0.01),
        ([[1.0, -1.0], [-1.0, 3.0]], (1.8, 1.8), 0.01),
        ([[5.0, 0.0], [0.0, 1.0]], (2.0, 1.4), 0.02),
    ]
    return CoverageInstance(
        transmitters=((1.0, 1.5), (2.0, 1.0)),
        rate_bounds=(11.0, 11.0),
        level=10.0,
        regions=tuple(ellipsoid_region(A, c, a) for A, c, a in ellipsoids),
    )


BUILTIN_INSTANCES = {"paper-fig1": paper_fig1}


def _squared_distance_poly(tx: tuple[float, float]) -> Polynomial:
    x = Polynomial.variable(2, 0) - tx[0]
    y = Polynomial.variable(2, 1) - tx[1]
    return x * x + y * y


def energy_field(instance: CoverageInstance, rates: Sequence[float], point: Sequence[float]) -> float:
    """Cumulative energy sum c_i / ((x - x_i)^2 + (y - y_i)^2) at one point."""
    total = 0.0
    for (tx, ty), c in zip(instance.transmitters, rates):
        d2 = (point[0] - tx) ** 2 + (point[1] - ty) ** 2
        if d2 == 0.0:
            raise ValueError(f"energy field is singular at transmitter ({tx}, {ty})")
        total += c / d2
    return total


def coverage_numerator(instance: CoverageInstance, rates) -> LinPoly | Polynomial:
    """Numerator of (E - C) over the common denominator of all distances.

    p = -C * prod D_i + sum c_i * prod_{k != i} D_k, with D_i the squared
    distance to transmitter i. Degree is 2 * (number of transmitters).
    Numeric rates give a Polynomial; LinExpr rates give a LinPoly whose
    coefficients stay linear in the rate variables.
    """
    if not instance.transmitters:
        raise ValueError("at least one transmitter required")
    dists = [_squared_distance_poly(tx) for tx in instance.transmitters]
    prod_all = Polynomial.constant(2, 1.0)
    for d in dists:
        prod_all = prod_all * d
    cofactors = []
    for i in range(len(dists)):
        cof = Polynomial.constant(2, 1.0)
        for k, d in enumerate(dists):
            if k != i:
                cof = cof * d
        cofactors.append(cof)

    if all(isinstance(c, (int, float)) for c in rates):
        p = -instance.level * prod_all
        for c, cof in zip(rates, cofactors):
            p = p + float(c) * cof
        return p
    lp: LinPoly = lp_from_poly(-instance.level * prod_all)
    for c, cof in zip(rates, cofactors):
        if not isinstance(c, LinExpr):
            c = LinExpr.of_const(float(c))
        for mono, coeff in cof.terms.items():
            acc = lp.get(mono)
            if acc is None:
                acc = LinExpr()
                lp[mono] = acc
            acc.add_scaled(c, coeff)
    return lp


@dataclass
class CoverageSolution:
    rates: tuple[float, ...]
    total: float
    certificates: tuple[PutinarCertificate, ...]
    cone: ConeTag
    mult_degree: int


def solve_coverage(
    instance: CoverageInstance,
    mult_degree: int,
    cone,
    backend=None,
    enforce_rate_bounds: bool = True,
    tol: float = CERT_TOL,
) -> CoverageSolution:
    """Minimize total rate subject to a certified coverage proof per region.

    The returned value upper-bounds the true optimum (raising mult_degree can
    only improve it). Raises InfeasibleError when no certificate exists at
    this cone/degree and SolverFailureError on backend breakdown or failed
    certificate verification.
    """
    cone = ConeTag.parse(cone)
    prog = ConicProgram()
    k = len(instance.transmitters)
    c_vars = prog.add_variables(k)
    prog.add_nonneg(c_vars)
    for v in c_vars:
        prog.add_objective_term(v, 1.0)
    if enforce_rate_bounds:
        for v, bound in zip(c_vars, instance.rate_bounds):
            s = prog.add_variable()
            prog.add_nonneg(s)
            prog.add_equality({v: 1.0, s: 1.0}, bound)

    numerator = coverage_numerator(instance, [LinExpr.of_var(v) for v in c_vars])
    handles = [
        add_putinar_constraint(prog, dict(numerator), region, cone, mult_degree)
        for region in instance.regions
    ]

    sol = solve(prog, backend)
    if sol.status == "infeasible":
        raise InfeasibleError(
            f"no rate assignment{' within bounds' if enforce_rate_bounds else ''} is "
            f"certifiable with {cone.name} multipliers of degree {mult_degree}"
        )
    if sol.status not in ("optimal", "inaccurate"):
        raise SolverFailureError(f"coverage solve ended with status {sol.status}")

    rates = tuple(float(sol.x[v]) for v in c_vars)
    certificates = []
    for handle in handles:
        cert = handle.extract(sol.x)
        report = verify_certificate(cert, tol=tol, backend=backend)
        if not report.passed:
            raise SolverFailureError(
                f"region certificate failed verification: {'; '.join(report.failures)}"
            )
        certificates.append(cert)
    return CoverageSolution(rates, sum(rates), tuple(certificates), cone, mult_degree)


# ---------------------------------------------------------------------------
# Grid sampling


def _poly_on_grid(p: Polynomial, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    out = np.zeros_like(X)
    for (a, b), coeff in p.terms.items():
        term = np.full_like(X, coeff)
        if a:
            term = term * X**a
        if b:
            term = term * Y**b
        out += term
    return out


@dataclass
class EnergyGrid:
    xs: np.ndarray  # shape (nx,)
    ys: np.ndarray  # shape (ny,)
    energy: np.ndarray  # shape (ny, nx); +inf at transmitter singularities
    covered: np.ndarray  # bool, energy >= level
    in_region: np.ndarray  # bool, point inside at least one target region

    def min_energy_over_regions(self) -> float:
        if not self.in_region.any():
            return math.inf
        return float(self.energy[self.in_region].min())


def sample_energy_grid(
    instance: CoverageInstance,
    rates: Sequence[float],
    bbox: tuple[float, float, float, float] = (0.5, 2.5, 0.5, 2.5),
    resolution: int = 400,
) -> EnergyGrid:
    """Energy field on a regular grid, CSV-ready (singularities flagged inf)."""
    x_lo, x_hi, y_lo, y_hi = bbox
    xs = np.linspace(x_lo, x_hi, resolution)
    ys = np.linspace(y_lo, y_hi, resolution)
    X, Y = np.meshgrid(xs, ys)
    energy = np.zeros_like(X)
    singular = np.zeros(X.shape, dtype=bool)
    for (tx, ty), c in zip(instance.transmitters, rates):
        d2 = (X - tx) ** 2 + (Y - ty) ** 2
        hit = d2 == 0.0
        singular |= hit
        with np.errstate(divide="ignore"):
            energy += np.where(hit, np.inf, c / np.where(hit, 1.0, d2))
    energy[singular] = np.inf
    in_region = np.zeros(X.shape, dtype=bool)
    for region in instance.regions:
        member = np.ones(X.shape, dtype=bool)
        for g in region.constraints:
            member &= _poly_on_grid(g, X, Y) >= 0.0
        in_region |= member
    return EnergyGrid(xs, ys, energy, energy >= instance.level, in_region)


def grid_to_csv(grid: EnergyGrid, level: float) -> str:
    lines = ["x,y,energy,log_energy,covered,in_region"]
    ny, nx = grid.energy.shape
    for iy in range(ny):
        for ix in range(nx):
            e = float(grid.energy[iy, ix])
            log_e = math.log(e) if 0 < e < math.inf else math.inf
            lines.append(
                f"{float(grid.xs[ix])!r},{float(grid.ys[iy])!r},{e!r},{log_e!r},"
                f"{int(grid.covered[iy, ix])},{int(grid.in_region[iy, ix])}"
            )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Structured-text instance and solution files

INSTANCE_HEADER = "coverage-instance v1"


def instance_to_text(instance: CoverageInstance) -> str:
    lines = [INSTANCE_HEADER, f"level {instance.level!r}"]
    lines.append(f"transmitters {len(instance.transmitters)}")
    for (tx, ty), bound in zip(instance.transmitters, instance.rate_bounds):
        lines.append(f"{tx!r} {ty!r} {bound!r}")
    n_constraints = sum(len(r.constraints) for r in instance.regions)
    lines.append(f"regions {len(instance.regions)}")
    for region in instance.regions:
        lines.append(f"region {len(region.constraints)}")
        for g in region.constraints:
            lines.append(poly_to_text(g))
    del n_constraints
    lines.append("end")
    return "\n".join(lines) + "\n"


def instance_from_text(text: str) -> CoverageInstance:
    lines = text.strip().splitlines()
    if not lines or lines[0] != INSTANCE_HEADER:
        raise ValueError("missing coverage instance header")
    pos = 1
    level = float(lines[pos].split()[1]); pos += 1
    n_tx = int(lines[pos].split()[1]); pos += 1
    transmitters, bounds = [], []
    for _ in range(n_tx):
        px, py, b = (float(v) for v in lines[pos].split()); pos += 1
        transmitters.append((px, py))
        bounds.append(b)
    n_regions = int(lines[pos].split()[1]); pos += 1
    regions = []
    for _ in range(n_regions):
        n_g = int(lines[pos].split()[1]); pos += 1
        gs = []
        for _ in range(n_g):
            gs.append(poly_from_text(lines[pos], 2)); pos += 1
        regions.append(SemialgebraicSet.of(2, gs))
    if lines[pos] != "end":
        raise ValueError("missing end marker")
    return CoverageInstance(tuple(transmitters), tuple(bounds), level, tuple(regions))


def solution_to_text(solution: CoverageSolution) -> str:
    from .certify import certificate_to_text

    lines = ["coverage-solution v1"]
    lines.append(f"cone {solution.cone.name}")
    lines.append(f"mult_degree {solution.mult_degree}")
    lines.append("rates " + " ".join(repr(r) for r in solution.rates))
    lines.append(f"total {solution.total!r}")
    lines.append(f"certificates {len(solution.certificates)}")
    for cert in solution.certificates:
        lines.append(certificate_to_text(cert).rstrip("\n"))
    lines.append("end coverage-solution")
    return "\n".join(lines) + "\n"
