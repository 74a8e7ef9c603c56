"""Conic program intermediate representation.

A program is a list of scalar variables, a linear objective (always
minimize), sparse linear equality rows, and cone memberships over variables:
nonnegative orthant entries, rotated second-order cones
{(u, v, w) : 2uv >= ||w||^2, u, v >= 0}, and psd blocks given as full
symmetric matrices of variable indices. Backends translate this IR; nothing
here depends on any solver.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

SOLUTION_STATUSES = ("optimal", "infeasible", "unbounded", "inaccurate", "failed")


@dataclass(frozen=True)
class RotatedCone:
    u: int
    v: int
    w: tuple[int, ...]


@dataclass
class ConicSolution:
    """Result of one backend solve.

    Primal values are present exactly when status is optimal or inaccurate.
    """

    status: str
    x: np.ndarray | None = None
    objective: float | None = None
    solve_time: float = 0.0
    backend_name: str = ""
    raw_status: str = ""

    def __post_init__(self):
        if self.status not in SOLUTION_STATUSES:
            raise ValueError(f"unknown status {self.status!r}")
        has_x = self.x is not None
        if has_x != (self.status in ("optimal", "inaccurate")):
            raise ValueError(
                f"primal values present iff status optimal/inaccurate "
                f"(status={self.status}, x present={has_x})"
            )


class ConicProgram:
    __slots__ = (
        "num_vars",
        "objective",
        "eq_rows",
        "eq_rhs",
        "nonneg",
        "rotated_cones",
        "psd_blocks",
    )

    def __init__(self):
        self.num_vars: int = 0
        self.objective: dict[int, float] = {}
        self.eq_rows: list[dict[int, float]] = []
        self.eq_rhs: list[float] = []
        self.nonneg: list[int] = []
        self.rotated_cones: list[RotatedCone] = []
        self.psd_blocks: list[tuple[tuple[int, ...], ...]] = []

    def _check_var(self, idx: int) -> None:
        if not 0 <= idx < self.num_vars:
            raise IndexError(f"variable {idx} out of range (num_vars={self.num_vars})")

    def add_variable(self) -> int:
        self.num_vars += 1
        return self.num_vars - 1

    def add_variables(self, count: int) -> list[int]:
        if count < 0:
            raise ValueError("count must be nonnegative")
        start = self.num_vars
        self.num_vars += count
        return list(range(start, self.num_vars))

    def add_objective_term(self, var: int, coeff: float) -> None:
        self._check_var(var)
        c = self.objective.get(var, 0.0) + float(coeff)
        if c == 0.0:
            self.objective.pop(var, None)
        else:
            self.objective[var] = c

    def add_equality(self, row: Mapping[int, float], rhs: float) -> None:
        clean: dict[int, float] = {}
        for var, coeff in row.items():
            self._check_var(var)
            c = float(coeff)
            if c != 0.0:
                clean[int(var)] = clean.get(int(var), 0.0) + c
        self.eq_rows.append(clean)
        self.eq_rhs.append(float(rhs))

    def add_nonneg(self, variables: int | Iterable[int]) -> None:
        if isinstance(variables, int):
            variables = (variables,)
        for var in variables:
            self._check_var(var)
            self.nonneg.append(int(var))

    def add_rotated_cone(self, u: int, v: int, w_vars: Sequence[int]) -> None:
        self._check_var(u)
        self._check_var(v)
        for wv in w_vars:
            self._check_var(wv)
        self.rotated_cones.append(RotatedCone(int(u), int(v), tuple(int(w) for w in w_vars)))

    def add_psd_block(self, var_matrix: Sequence[Sequence[int]]) -> None:
        m = len(var_matrix)
        if m == 0:
            raise ValueError("psd block must be nonempty")
        block = tuple(tuple(int(v) for v in row) for row in var_matrix)
        for i, row in enumerate(block):
            if len(row) != m:
                raise ValueError("psd block must be square")
            for j, var in enumerate(row):
                self._check_var(var)
                if block[j][i] != var:
                    raise ValueError(f"psd block not symmetric at ({i},{j})")
        self.psd_blocks.append(block)

    def objective_value(self, x: Sequence[float]) -> float:
        return float(sum(c * x[v] for v, c in self.objective.items()))

    def __eq__(self, other) -> bool:
        if not isinstance(other, ConicProgram):
            return NotImplemented
        return (
            self.num_vars == other.num_vars
            and self.objective == other.objective
            and self.eq_rows == other.eq_rows
            and self.eq_rhs == other.eq_rhs
            and self.nonneg == other.nonneg
            and self.rotated_cones == other.rotated_cones
            and self.psd_blocks == other.psd_blocks
        )

    def __repr__(self) -> str:
        return (
            f"ConicProgram(vars={self.num_vars}, eqs={len(self.eq_rows)}, "
            f"nonneg={len(self.nonneg)}, rcones={len(self.rotated_cones)}, "
            f"psd={[len(b) for b in self.psd_blocks]})"
        )


def required_capabilities(prog: ConicProgram) -> frozenset[str]:
    """Cone capabilities a backend needs to solve this program."""
    caps = {"lp"}
    if prog.rotated_cones:
        caps.add("socp")
    if prog.psd_blocks:
        caps.add("sdp")
    return frozenset(caps)


def primal_residuals(prog: ConicProgram, x: Sequence[float]) -> dict[str, float]:
    """Max violation of each constraint family at the point x."""
    x = np.asarray(x, dtype=float)
    eq = 0.0
    for row, rhs in zip(prog.eq_rows, prog.eq_rhs):
        eq = max(eq, abs(sum(c * x[v] for v, c in row.items()) - rhs))
    nn = 0.0
    for var in prog.nonneg:
        nn = max(nn, max(0.0, -x[var]))
    rc = 0.0
    for cone in prog.rotated_cones:
        u, v = x[cone.u], x[cone.v]
        wsq = float(sum(x[wv] ** 2 for wv in cone.w))
        rc = max(rc, max(0.0, wsq - 2.0 * u * v), max(0.0, -u), max(0.0, -v))
    psd = 0.0
    for block in prog.psd_blocks:
        mat = np.array([[x[var] for var in row] for row in block])
        lam_min = float(np.linalg.eigvalsh((mat + mat.T) / 2.0)[0])
        psd = max(psd, max(0.0, -lam_min))
    out = {"equality": eq, "nonneg": nn, "rotated": rc, "psd": psd}
    out["max"] = max(out.values())
    return out


FORMAT_HEADER = "conic-program v1"


def program_to_text(prog: ConicProgram) -> str:
    """Serialize to the interchange format (repr floats, so reload is exact)."""
    lines = [FORMAT_HEADER, f"nvars {prog.num_vars}"]
    lines.append(f"objective {len(prog.objective)}")
    for var in sorted(prog.objective):
        lines.append(f"{var} {prog.objective[var]!r}")
    lines.append(f"equalities {len(prog.eq_rows)}")
    for row, rhs in zip(prog.eq_rows, prog.eq_rhs):
        lines.append(f"eq {rhs!r} {len(row)}")
        for var in sorted(row):
            lines.append(f"{var} {row[var]!r}")
    lines.append(f"nonneg {len(prog.nonneg)}")
    if prog.nonneg:
        lines.append(" ".join(str(v) for v in prog.nonneg))
    lines.append(f"rotated-cones {len(prog.rotated_cones)}")
    for cone in prog.rotated_cones:
        lines.append(
            f"{cone.u} {cone.v} {len(cone.w)}"
            + ("" if not cone.w else " " + " ".join(str(w) for w in cone.w))
        )
    lines.append(f"psd-blocks {len(prog.psd_blocks)}")
    for block in prog.psd_blocks:
        lines.append(str(len(block)))
        for row in block:
            lines.append(" ".join(str(v) for v in row))
    lines.append("end")
    return "\n".join(lines) + "\n"


def program_from_text(text: str) -> ConicProgram:
    lines = [ln.rstrip("\n") for ln in text.strip().splitlines()]
    pos = 0

    def take() -> str:
        nonlocal pos
        if pos >= len(lines):
            raise ValueError("truncated conic program text")
        line = lines[pos]
        pos += 1
        return line

    def expect_count(keyword: str) -> int:
        line = take()
        head, _, count = line.partition(" ")
        if head != keyword:
            raise ValueError(f"expected {keyword!r}, got {line!r}")
        return int(count)

    if take() != FORMAT_HEADER:
        raise ValueError("missing conic-program header")
    prog = ConicProgram()
    prog.num_vars = expect_count("nvars")

    for _ in range(expect_count("objective")):
        var_text, coeff_text = take().split()
        prog.add_objective_term(int(var_text), float(coeff_text))

    for _ in range(expect_count("equalities")):
        parts = take().split()
        if parts[0] != "eq" or len(parts) != 3:
            raise ValueError("malformed equality header")
        rhs, nnz = float(parts[1]), int(parts[2])
        row: dict[int, float] = {}
        for _ in range(nnz):
            var_text, coeff_text = take().split()
            row[int(var_text)] = float(coeff_text)
        prog.add_equality(row, rhs)

    n_nonneg = expect_count("nonneg")
    if n_nonneg:
        indices = [int(v) for v in take().split()]
        if len(indices) != n_nonneg:
            raise ValueError("nonneg count mismatch")
        prog.add_nonneg(indices)

    for _ in range(expect_count("rotated-cones")):
        parts = [int(v) for v in take().split()]
        u, v, k = parts[0], parts[1], parts[2]
        if len(parts) != 3 + k:
            raise ValueError("rotated cone length mismatch")
        prog.add_rotated_cone(u, v, parts[3:])

    for _ in range(expect_count("psd-blocks")):
        m = int(take())
        block = [[int(v) for v in take().split()] for _ in range(m)]
        prog.add_psd_block(block)

    if take() != "end":
        raise ValueError("missing end marker")
    return prog
