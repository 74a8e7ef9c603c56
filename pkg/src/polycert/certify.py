"""Lower polynomial nonnegativity assertions to conic constraints and build
independently verifiable Putinar-style certificates.

The three certificate cones and their lowerings:

- DSOS: the Gram matrix is constrained diagonally dominant, linearized with
  the standard absolute-value split, giving a pure LP.
- SDSOS: the Gram matrix is a sum of 2x2 psd blocks, one rotated second-order
  cone per index pair, giving an SOCP.
- SOS: the Gram matrix is a psd block, giving an SDP.

A polynomial-valued decision variable (PolyVar) is a basis of monomials with
one scalar program variable per coefficient; every constraint in this module
matches coefficients of linear expressions in those variables, so targets may
mix fixed polynomials and unknowns freely.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import cones
from .cones import CERT_TOL, SddWitness
from .conic import ConicProgram, SolverFailureError, solve
from .poly import (
    Monomial,
    Polynomial,
    grlex_key,
    max_coeff_diff,
    monomial_basis,
    poly_from_text,
    poly_to_text,
)


class InfeasibleError(Exception):
    """No certificate exists at the requested cone and degree.

    Not a proof of negativity; a higher degree or wider cone may succeed.
    """


class DegreeOverflowError(ValueError):
    """Target polynomial degree exceeds what the Gram basis can represent."""


class ConeTag(enum.IntEnum):
    """Certificate cone, ordered by inclusion: DSOS < SDSOS < SOS."""

    DSOS = 0
    SDSOS = 1
    SOS = 2

    @staticmethod
    def parse(name) -> "ConeTag":
        if isinstance(name, ConeTag):
            return name
        try:
            return ConeTag[str(name).upper()]
        except KeyError:
            raise ValueError(f"unknown cone {name!r}; expected dsos, sdsos, or sos") from None


class LinExpr:
    """Mutable affine expression sum(coeff * var) + const over program vars."""

    __slots__ = ("terms", "const")

    def __init__(self, terms: dict[int, float] | None = None, const: float = 0.0):
        self.terms = dict(terms) if terms else {}
        self.const = float(const)

    @staticmethod
    def of_var(idx: int, coeff: float = 1.0) -> "LinExpr":
        return LinExpr({idx: coeff})

    @staticmethod
    def of_const(c: float) -> "LinExpr":
        return LinExpr(None, c)

    def copy(self) -> "LinExpr":
        return LinExpr(self.terms, self.const)

    def add_scaled(self, other: "LinExpr", s: float = 1.0) -> None:
        if s == 0.0:
            return
        terms = self.terms
        for var, coeff in other.terms.items():
            c = terms.get(var, 0.0) + s * coeff
            if c == 0.0:
                terms.pop(var, None)
            else:
                terms[var] = c
        self.const += s * other.const

    def add_term(self, var: int, coeff: float) -> None:
        c = self.terms.get(var, 0.0) + coeff
        if c == 0.0:
            self.terms.pop(var, None)
        else:
            self.terms[var] = c

    def scaled(self, s: float) -> "LinExpr":
        return LinExpr({v: s * c for v, c in self.terms.items()}, s * self.const)

    def evaluate(self, x: Sequence[float]) -> float:
        return self.const + sum(c * x[v] for v, c in self.terms.items())

    def is_zero(self) -> bool:
        return not self.terms and self.const == 0.0


# A polynomial with affine-expression coefficients: monomial -> LinExpr.
LinPoly = dict


def lp_from_poly(p: Polynomial) -> LinPoly:
    return {mono: LinExpr.of_const(c) for mono, c in p.terms.items()}


def lp_from_polyvar(pv: "PolyVar") -> LinPoly:
    return {mono: LinExpr.of_var(idx) for mono, idx in zip(pv.basis, pv.var_indices)}


def as_linpoly(p) -> LinPoly:
    if isinstance(p, Polynomial):
        return lp_from_poly(p)
    if isinstance(p, PolyVar):
        return lp_from_polyvar(p)
    if isinstance(p, dict):
        return p
    raise TypeError(f"expected Polynomial, PolyVar, or LinPoly, got {type(p).__name__}")


def lp_add_scaled(dst: LinPoly, src: LinPoly, s: float = 1.0) -> None:
    for mono, expr in src.items():
        acc = dst.get(mono)
        if acc is None:
            acc = LinExpr()
            dst[mono] = acc
        acc.add_scaled(expr, s)


def lp_mul_poly(lp: LinPoly, p: Polynomial) -> LinPoly:
    out: LinPoly = {}
    for m1, expr in lp.items():
        for m2, c in p.terms.items():
            mono = tuple(a + b for a, b in zip(m1, m2))
            acc = out.get(mono)
            if acc is None:
                acc = LinExpr()
                out[mono] = acc
            acc.add_scaled(expr, c)
    return out


def lp_degree(lp: LinPoly) -> int:
    return max((sum(m) for m in lp), default=0)


def lp_partial_derivative(lp: LinPoly, var_index: int) -> LinPoly:
    out: LinPoly = {}
    for mono, expr in lp.items():
        e = mono[var_index]
        if e == 0:
            continue
        lowered = tuple(v - 1 if i == var_index else v for i, v in enumerate(mono))
        acc = out.get(lowered)
        if acc is None:
            acc = LinExpr()
            out[lowered] = acc
        acc.add_scaled(expr, float(e))
    return out


def lp_extend_vars(lp: LinPoly, new_nvars: int) -> LinPoly:
    some = next(iter(lp), None)
    old = len(some) if some is not None else new_nvars
    pad = (0,) * (new_nvars - old)
    return {m + pad: e for m, e in lp.items()}


def lp_evaluate(lp: LinPoly, x: Sequence[float], nvars: int) -> Polynomial:
    return Polynomial(nvars, {m: e.evaluate(x) for m, e in lp.items()})


@dataclass(frozen=True)
class PolyVar:
    """Unknown polynomial: graded-lex monomial basis + program variables."""

    nvars: int
    basis: tuple[Monomial, ...]
    var_indices: tuple[int, ...]

    def degree(self) -> int:
        return max((sum(m) for m in self.basis), default=0)

    def value(self, x: Sequence[float]) -> Polynomial:
        return Polynomial(self.nvars, {m: x[i] for m, i in zip(self.basis, self.var_indices)})


def declare_poly_var(
    prog: ConicProgram, n: int, degree: int, drop_constant: bool = False
) -> PolyVar:
    """One scalar program variable per basis monomial of degree <= degree.

    drop_constant omits the constant monomial, pinning the value at the
    origin to zero structurally.
    """
    basis = monomial_basis(n, degree)
    if drop_constant:
        basis = [m for m in basis if sum(m) > 0]
    indices = prog.add_variables(len(basis))
    return PolyVar(n, tuple(basis), tuple(indices))


@dataclass(frozen=True)
class SemialgebraicSet:
    """Region {x : g_i(x) >= 0 for all i}."""

    nvars: int
    constraints: tuple[Polynomial, ...] = ()

    def __post_init__(self):
        for g in self.constraints:
            if g.nvars != self.nvars:
                raise ValueError("constraint variable count mismatch")

    @staticmethod
    def of(nvars: int, constraints: Iterable[Polynomial]) -> "SemialgebraicSet":
        return SemialgebraicSet(nvars, tuple(constraints))

    def with_constraint(self, g: Polynomial) -> "SemialgebraicSet":
        return SemialgebraicSet(self.nvars, self.constraints + (g,))

    def with_equality(self, h: Polynomial) -> "SemialgebraicSet":
        """Impose h = 0 as the pair of inequalities h >= 0 and -h >= 0."""
        return SemialgebraicSet(self.nvars, self.constraints + (h, -h))

    def with_ball(self, radius: float, center: Sequence[float] | None = None) -> "SemialgebraicSet":
        """Append radius^2 - sum (x_i - c_i)^2 >= 0 (Archimedean helper)."""
        n = self.nvars
        c = [0.0] * n if center is None else list(center)
        g = Polynomial.constant(n, radius * radius)
        for i in range(n):
            xi = Polynomial.variable(n, i) - c[i]
            g = g - xi * xi
        return self.with_constraint(g)

    def contains(self, point: Sequence[float], tol: float = 0.0) -> bool:
        return all(g(point) >= -tol for g in self.constraints)


# ---------------------------------------------------------------------------
# Gram lowerings


@dataclass
class GramHandle:
    """Gram parameterization of one cone membership inside a program."""

    cone: ConeTag
    nvars: int
    half_degree: int
    basis: tuple[Monomial, ...]
    entries: list  # m x m nested list of LinExpr (symmetric, shared refs)
    sdd_blocks: tuple[tuple[int, int, int, int, int], ...] = ()  # (i, j, u, v, t)

    def size(self) -> int:
        return len(self.basis)

    def gram_values(self, x: Sequence[float]) -> np.ndarray:
        m = len(self.basis)
        Q = np.empty((m, m))
        for i in range(m):
            for j in range(i, m):
                Q[i, j] = Q[j, i] = self.entries[i][j].evaluate(x)
        return Q

    def witness_values(self, x: Sequence[float]) -> SddWitness | None:
        if self.cone is not ConeTag.SDSOS or not self.sdd_blocks:
            return None
        sqrt2 = math.sqrt(2.0)
        blocks = tuple(
            (i, j, float(x[u]), float(x[t]) / sqrt2, float(x[v]))
            for i, j, u, v, t in self.sdd_blocks
        )
        return SddWitness(blocks)


def _gram_handle(
    prog: ConicProgram, nvars: int, half_degree: int, cone: ConeTag
) -> GramHandle:
    basis = tuple(monomial_basis(nvars, half_degree))
    m = len(basis)

    if m == 1:
        q = prog.add_variable()
        prog.add_nonneg(q)
        return GramHandle(cone, nvars, half_degree, basis, [[LinExpr.of_var(q)]])

    entries: list[list[LinExpr | None]] = [[None] * m for _ in range(m)]

    if cone is ConeTag.SOS:
        idx = [[0] * m for _ in range(m)]
        for i in range(m):
            for j in range(i, m):
                idx[i][j] = idx[j][i] = prog.add_variable()
                entries[i][j] = entries[j][i] = LinExpr.of_var(idx[i][j])
        prog.add_psd_block(idx)
        return GramHandle(cone, nvars, half_degree, basis, entries)

    if cone is ConeTag.SDSOS:
        # One 2x2 psd block per index pair; Q is their sum, so diagonals
        # accumulate the u/v block corners and off-diagonals are t/sqrt(2).
        sqrt2 = math.sqrt(2.0)
        diag = [LinExpr() for _ in range(m)]
        blocks = []
        for i in range(m):
            entries[i][i] = diag[i]
        for i in range(m):
            for j in range(i + 1, m):
                u, v, t = prog.add_variables(3)
                prog.add_rotated_cone(u, v, [t])
                blocks.append((i, j, u, v, t))
                diag[i].add_term(u, 1.0)
                diag[j].add_term(v, 1.0)
                entries[i][j] = entries[j][i] = LinExpr.of_var(t, 1.0 / sqrt2)
        return GramHandle(cone, nvars, half_degree, basis, entries, tuple(blocks))

    # DSOS: diagonal dominance with the absolute-value split. For each pair
    # t_ij bounds |Q_ij| via slack equalities, and each row surplus
    # Q_ii - sum_j t_ij is pinned to a nonnegative variable.
    q_idx = [[0] * m for _ in range(m)]
    t_idx = [[0] * m for _ in range(m)]
    for i in range(m):
        for j in range(i, m):
            q_idx[i][j] = q_idx[j][i] = prog.add_variable()
            entries[i][j] = entries[j][i] = LinExpr.of_var(q_idx[i][j])
    for i in range(m):
        for j in range(i + 1, m):
            t = prog.add_variable()
            t_idx[i][j] = t_idx[j][i] = t
            s1, s2 = prog.add_variables(2)
            prog.add_nonneg([s1, s2])
            prog.add_equality({t: 1.0, q_idx[i][j]: -1.0, s1: -1.0}, 0.0)
            prog.add_equality({t: 1.0, q_idx[i][j]: 1.0, s2: -1.0}, 0.0)
    for i in range(m):
        r = prog.add_variable()
        prog.add_nonneg(r)
        row = {q_idx[i][i]: 1.0, r: -1.0}
        for j in range(m):
            if j != i:
                row[t_idx[i][j]] = row.get(t_idx[i][j], 0.0) - 1.0
        prog.add_equality(row, 0.0)
    return GramHandle(cone, nvars, half_degree, basis, entries)


_PAIR_CACHE: dict[tuple[int, int], list[tuple[int, int, Monomial]]] = {}


def _pair_products(nvars: int, half_degree: int) -> list[tuple[int, int, Monomial]]:
    key = (nvars, half_degree)
    cached = _PAIR_CACHE.get(key)
    if cached is None:
        basis = monomial_basis(nvars, half_degree)
        cached = []
        for i, mi in enumerate(basis):
            for j in range(i, len(basis)):
                mj = basis[j]
                cached.append((i, j, tuple(a + b for a, b in zip(mi, mj))))
        _PAIR_CACHE[key] = cached
    return cached


def gram_polynomial(handle: GramHandle) -> LinPoly:
    """z^T Q z as a LinPoly over the handle's Gram variables."""
    out: LinPoly = {}
    entries = handle.entries
    for i, j, mono in _pair_products(handle.nvars, handle.half_degree):
        acc = out.get(mono)
        if acc is None:
            acc = LinExpr()
            out[mono] = acc
        acc.add_scaled(entries[i][j], 1.0 if i == j else 2.0)
    return out


def match_coefficients(prog: ConicProgram, lhs: LinPoly, rhs: LinPoly) -> int:
    """Add one equality row per monomial forcing lhs == rhs coefficientwise."""
    count = 0
    for mono in set(lhs) | set(rhs):
        expr = LinExpr()
        if mono in lhs:
            expr.add_scaled(lhs[mono], 1.0)
        if mono in rhs:
            expr.add_scaled(rhs[mono], -1.0)
        if expr.is_zero():
            continue
        prog.add_equality(expr.terms, -expr.const)
        count += 1
    return count


def constrain_in_cone(prog: ConicProgram, p, cone, half_degree: int) -> GramHandle:
    """Constrain p to be a cone-certified sum of squares over the basis of
    monomials up to half_degree, matching coefficients exactly."""
    cone = ConeTag.parse(cone)
    lp = as_linpoly(p)
    nvars = p.nvars if isinstance(p, (Polynomial, PolyVar)) else len(next(iter(lp)))
    deg = lp_degree(lp)
    if deg > 2 * half_degree:
        raise DegreeOverflowError(
            f"degree {deg} target cannot match a Gram over half-degree {half_degree}"
        )
    handle = _gram_handle(prog, nvars, half_degree, cone)
    match_coefficients(prog, gram_polynomial(handle), lp)
    return handle


# ---------------------------------------------------------------------------
# Putinar certificates


@dataclass(frozen=True)
class GramCertificate:
    """Monomial basis, Gram matrix, cone tag, and optional sdd witness."""

    basis: tuple[Monomial, ...]
    Q: np.ndarray
    cone: ConeTag
    witness: SddWitness | None = None

    def nvars(self) -> int:
        return len(self.basis[0])

    def polynomial(self) -> Polynomial:
        n = self.nvars()
        terms: dict[Monomial, float] = {}
        m = len(self.basis)
        for i in range(m):
            for j in range(i, m):
                mono = tuple(a + b for a, b in zip(self.basis[i], self.basis[j]))
                c = (1.0 if i == j else 2.0) * float(self.Q[i, j])
                if c != 0.0:
                    terms[mono] = terms.get(mono, 0.0) + c
        return Polynomial(n, terms)


@dataclass(frozen=True)
class PutinarCertificate:
    """Proof data for: p >= 0 on the set, via p = sigma0 + sum sigma_i g_i."""

    polynomial: Polynomial
    set: SemialgebraicSet
    sigma0: GramCertificate
    multipliers: tuple[GramCertificate, ...]

    def __post_init__(self):
        if len(self.multipliers) != len(self.set.constraints):
            raise ValueError("one multiplier required per set constraint")

    def identity_residual(self) -> float:
        acc = self.sigma0.polynomial()
        for sigma, g in zip(self.multipliers, self.set.constraints):
            acc = acc + sigma.polynomial() * g
        return max_coeff_diff(self.polynomial, acc)


@dataclass
class PutinarHandle:
    target: LinPoly
    set: SemialgebraicSet
    cone: ConeTag
    mult_degree: int
    sigma0: GramHandle
    multipliers: list[GramHandle]

    def extract(self, x: Sequence[float]) -> PutinarCertificate:
        nvars = self.set.nvars
        p = lp_evaluate(self.target, x, nvars)
        sigma0 = GramCertificate(
            self.sigma0.basis,
            self.sigma0.gram_values(x),
            self.cone,
            self.sigma0.witness_values(x),
        )
        mults = tuple(
            GramCertificate(h.basis, h.gram_values(x), self.cone, h.witness_values(x))
            for h in self.multipliers
        )
        return PutinarCertificate(p, self.set, sigma0, mults)


def add_putinar_constraint(
    prog: ConicProgram,
    p,
    S: SemialgebraicSet,
    cone,
    mult_degree: int,
    sigma0_half_degree: int | None = None,
) -> PutinarHandle:
    """Add the identity p = sigma0 + sum sigma_i g_i with all sigmas in cone.

    sigma0's half-degree starts at ceil(deg p / 2) and is raised, never
    truncated, until every product sigma_i * g_i fits inside 2*half-degree;
    sigma0_half_degree can raise it further but not truncate.
    """
    cone = ConeTag.parse(cone)
    if mult_degree < 0 or mult_degree % 2 != 0:
        raise ValueError("mult_degree must be even and nonnegative")
    lp = as_linpoly(p)
    deg_p = lp_degree(lp)
    h0 = (deg_p + 1) // 2
    if S.constraints:
        max_g = max(g.degree() for g in S.constraints)
        h0 = max(h0, (mult_degree + max_g + 1) // 2)
    if sigma0_half_degree is not None:
        h0 = max(h0, sigma0_half_degree)
    sigma0 = _gram_handle(prog, S.nvars, h0, cone)
    lhs = gram_polynomial(sigma0)
    multipliers = []
    for g in S.constraints:
        h = _gram_handle(prog, S.nvars, mult_degree // 2, cone)
        multipliers.append(h)
        lp_add_scaled(lhs, lp_mul_poly(gram_polynomial(h), g))
    match_coefficients(prog, lhs, lp)
    return PutinarHandle(lp, S, cone, mult_degree, sigma0, multipliers)


def putinar_feasibility(
    p: Polynomial,
    S: SemialgebraicSet,
    cone,
    mult_degree: int,
    backend=None,
    tol: float = CERT_TOL,
    time_limit: float | None = None,
    sigma0_half_degree: int | None = None,
) -> PutinarCertificate:
    """Search for a verified certificate that p >= 0 on S.

    Raises InfeasibleError when no certificate exists at this cone/degree
    (which proves nothing about negativity of p) and SolverFailureError when
    the backend breaks down or the extracted certificate fails verification.
    """
    if p.nvars != S.nvars:
        raise ValueError("polynomial and set variable counts differ")
    prog = ConicProgram()
    handle = add_putinar_constraint(prog, p, S, cone, mult_degree, sigma0_half_degree)
    sol = solve(prog, backend, time_limit=time_limit)
    if sol.status == "infeasible":
        raise InfeasibleError(
            f"no {ConeTag.parse(cone).name} certificate at multiplier degree {mult_degree}"
        )
    if sol.status not in ("optimal", "inaccurate"):
        raise SolverFailureError(f"certificate solve ended with status {sol.status}")
    cert = handle.extract(sol.x)
    report = verify_certificate(cert, tol=tol, backend=backend)
    if not report.passed:
        raise SolverFailureError(
            f"extracted certificate failed verification: {'; '.join(report.failures)}"
        )
    return cert


# ---------------------------------------------------------------------------
# Verification


@dataclass
class GramReport:
    name: str
    cone: ConeTag
    ok: bool
    margin: float
    detail: str = ""


@dataclass
class VerificationReport:
    passed: bool
    identity_residual: float
    gram_reports: list[GramReport]
    failures: list[str]

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        lines = [
            f"{status}: identity residual {self.identity_residual:.3e}",
        ]
        for gr in self.gram_reports:
            state = "ok" if gr.ok else "VIOLATED"
            lines.append(
                f"  {gr.name}: cone {gr.cone.name} {state}, margin {gr.margin:.3e}"
                + (f" ({gr.detail})" if gr.detail else "")
            )
        for f in self.failures:
            lines.append(f"  failure: {f}")
        return "\n".join(lines)


def _check_gram(name: str, gram: GramCertificate, tol: float, backend) -> GramReport:
    Q = np.asarray(gram.Q, dtype=float)
    sym_err = float(np.abs(Q - Q.T).max(initial=0.0))
    if sym_err > tol:
        return GramReport(name, gram.cone, False, -sym_err, "Gram matrix not symmetric")
    if gram.cone is ConeTag.DSOS:
        off = np.sum(np.abs(Q), axis=1) - np.abs(np.diag(Q))
        margin = float(np.min(np.diag(Q) - off))
        return GramReport(name, gram.cone, margin >= -tol, margin, "diagonal dominance")
    if gram.cone is ConeTag.SDSOS:
        if gram.witness is not None:
            recon = float(np.abs(gram.witness.reconstruct(len(Q)) - Q).max())
            block = gram.witness.max_block_violation()
            ok = recon <= tol and block <= tol
            detail = f"witness reconstruction {recon:.2e}, block violation {block:.2e}"
            return GramReport(name, gram.cone, ok, -max(recon, block), detail)
        ok, _ = cones.is_sdd(Q, tol, backend=backend)
        return GramReport(name, gram.cone, ok, 0.0 if ok else -1.0, "sdd feasibility solve")
    lam_min = float(np.linalg.eigvalsh((Q + Q.T) / 2.0)[0])
    return GramReport(name, gram.cone, cones.is_psd(Q, tol), lam_min, "minimum eigenvalue")


def verify_certificate(
    cert: PutinarCertificate, tol: float = CERT_TOL, backend=None
) -> VerificationReport:
    """Independently re-check a certificate from its stored data alone.

    Recomputes each sigma from its Gram matrix, checks the cone predicate
    for each tag, and checks the identity residual. PASS iff everything is
    within tol.
    """
    reports = [_check_gram("sigma0", cert.sigma0, tol, backend)]
    for k, gram in enumerate(cert.multipliers):
        reports.append(_check_gram(f"multiplier{k}", gram, tol, backend))
    residual = cert.identity_residual()
    failures = [
        f"{gr.name} violates {gr.cone.name} (margin {gr.margin:.3e})"
        for gr in reports
        if not gr.ok
    ]
    if residual > tol:
        failures.append(f"identity residual {residual:.3e} exceeds tol {tol:.1e}")
    return VerificationReport(not failures, residual, reports, failures)


# ---------------------------------------------------------------------------
# Certificate serialization

CERT_HEADER = "putinar-certificate v1"


def certificate_to_text(cert: PutinarCertificate) -> str:
    """Structured-text certificate for out-of-process verification."""
    lines = [CERT_HEADER, f"nvars {cert.set.nvars}"]
    lines.append(f"polynomial {poly_to_text(cert.polynomial)}")
    lines.append(f"constraints {len(cert.set.constraints)}")
    for g in cert.set.constraints:
        lines.append(poly_to_text(g))

    def emit(name: str, gram: GramCertificate) -> None:
        m = len(gram.basis)
        lines.append(f"gram {name} cone {gram.cone.name} basis {m}")
        for mono in gram.basis:
            lines.append(" ".join(str(e) for e in mono))
        for i in range(m):
            lines.append(" ".join(repr(float(v)) for v in gram.Q[i]))
        if gram.witness is not None:
            lines.append(f"witness {len(gram.witness.blocks)}")
            for i, j, mii, mij, mjj in gram.witness.blocks:
                lines.append(f"{i} {j} {mii!r} {mij!r} {mjj!r}")
        else:
            lines.append("witness 0")

    emit("sigma0", cert.sigma0)
    for k, gram in enumerate(cert.multipliers):
        emit(f"mult{k}", gram)
    lines.append("end")
    return "\n".join(lines) + "\n"


def certificate_from_text(text: str) -> PutinarCertificate:
    lines = text.strip().splitlines()
    pos = 0

    def take() -> str:
        nonlocal pos
        if pos >= len(lines):
            raise ValueError("truncated certificate text")
        line = lines[pos]
        pos += 1
        return line

    if take() != CERT_HEADER:
        raise ValueError("missing certificate header")
    nvars = int(take().split()[1])
    poly_line = take()
    if not poly_line.startswith("polynomial "):
        raise ValueError("missing polynomial line")
    p = poly_from_text(poly_line[len("polynomial "):], nvars)
    n_constraints = int(take().split()[1])
    constraints = tuple(poly_from_text(take(), nvars) for _ in range(n_constraints))

    def read_gram() -> tuple[str, GramCertificate]:
        head = take().split()
        if head[0] != "gram" or head[2] != "cone" or head[4] != "basis":
            raise ValueError(f"malformed gram header {' '.join(head)!r}")
        name, cone, m = head[1], ConeTag.parse(head[3]), int(head[5])
        basis = tuple(tuple(int(e) for e in take().split()) for _ in range(m))
        Q = np.array([[float(v) for v in take().split()] for _ in range(m)])
        n_blocks = int(take().split()[1])
        witness = None
        if n_blocks:
            blocks = []
            for _ in range(n_blocks):
                parts = take().split()
                blocks.append(
                    (int(parts[0]), int(parts[1]), float(parts[2]), float(parts[3]), float(parts[4]))
                )
            witness = SddWitness(tuple(blocks))
        return name, GramCertificate(basis, Q, cone, witness)

    name, sigma0 = read_gram()
    if name != "sigma0":
        raise ValueError("first gram must be sigma0")
    multipliers = []
    for k in range(n_constraints):
        name, gram = read_gram()
        if name != f"mult{k}":
            raise ValueError(f"expected mult{k}, got {name}")
        multipliers.append(gram)
    if take() != "end":
        raise ValueError("missing end marker")
    return PutinarCertificate(p, SemialgebraicSet(nvars, constraints), sigma0, tuple(multipliers))
