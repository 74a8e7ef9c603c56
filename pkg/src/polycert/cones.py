"""Membership tests for diagonally dominant, scaled diagonally dominant,
and positive semidefinite symmetric matrices, plus the sdd decomposition
witness used by certificate verification.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .conic import ConicProgram, solve

# Default absolute tolerance for certificate verification everywhere:
# comfortably above conic solver termination accuracy (~1e-8) and below any
# meaningful violation.
CERT_TOL = 1e-6


def _as_sym(A) -> np.ndarray:
    M = np.asarray(A, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("expected a square matrix")
    return (M + M.T) / 2.0


@dataclass(frozen=True)
class SddWitness:
    """Decomposition of a symmetric matrix into 2x2 psd principal blocks.

    blocks holds (i, j, M_ii, M_ij, M_jj) for i < j; embedding each block at
    rows/columns (i, j) and summing reproduces the witnessed matrix up to the
    tolerance it was produced under.
    """

    blocks: tuple[tuple[int, int, float, float, float], ...]

    def reconstruct(self, n: int) -> np.ndarray:
        M = np.zeros((n, n))
        for i, j, mii, mij, mjj in self.blocks:
            M[i, i] += mii
            M[j, j] += mjj
            M[i, j] += mij
            M[j, i] += mij
        return M

    def max_block_violation(self) -> float:
        """How far the worst block is from being 2x2 psd."""
        worst = 0.0
        for _, _, mii, mij, mjj in self.blocks:
            worst = max(worst, -mii, -mjj)
            # Schur-style margin scaled to stay comparable with entry size.
            det = mii * mjj - mij * mij
            if det < 0.0:
                scale = max(1.0, abs(mii), abs(mjj), abs(mij))
                worst = max(worst, -det / scale)
        return worst


def is_dd(A, tol: float = 0.0) -> bool:
    """Row diagonal dominance: a_ii + tol >= sum_{j != i} |a_ij|."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    M = _as_sym(A)
    off = np.sum(np.abs(M), axis=1) - np.abs(np.diag(M))
    return bool(np.all(np.diag(M) + tol >= off))


def is_psd(A, tol: float = CERT_TOL) -> bool:
    """Shifted Cholesky test: minimum eigenvalue >= -tol.

    A tiny dimension-scaled jitter is added on top of tol so that exactly
    singular psd matrices (common on the boundary of the dd cone) do not
    fail at tol=0 through rounding alone.
    """
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    M = _as_sym(A)
    n = M.shape[0]
    jitter = n * np.finfo(float).eps * max(1.0, float(np.abs(M).max(initial=0.0)))
    try:
        np.linalg.cholesky(M + (tol + jitter) * np.eye(n))
        return True
    except np.linalg.LinAlgError:
        return False


def is_sdd(
    A, tol: float = CERT_TOL, backend=None
) -> tuple[bool, SddWitness | None]:
    """Scaled diagonal dominance via the 2x2 block decomposition.

    Solves min s over block variables with blocks summing to A + s*I; A is
    sdd within tol iff the optimal s is <= tol. The returned witness then
    reconstructs A with residual |s| <= tol. Solver breakdown raises rather
    than answering, so "not sdd" is always a solved verdict.
    """
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    M = _as_sym(A)
    n = M.shape[0]
    if n == 1:
        return bool(M[0, 0] >= -tol), None

    prog = ConicProgram()
    s = prog.add_variable()
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    block_vars = {}
    for i, j in pairs:
        u, v, t = prog.add_variables(3)
        block_vars[(i, j)] = (u, v, t)
        prog.add_rotated_cone(u, v, [t])
        # Off-diagonal entries are fixed data: M_ij = t / sqrt(2).
        prog.add_equality({t: 1.0}, math.sqrt(2.0) * M[i, j])
    for i in range(n):
        row: dict[int, float] = {s: -1.0}
        for i2, j2 in pairs:
            if i2 == i:
                row[block_vars[(i2, j2)][0]] = 1.0
            elif j2 == i:
                row[block_vars[(i2, j2)][1]] = 1.0
        prog.add_equality(row, M[i, i])
    prog.add_objective_term(s, 1.0)

    sol = solve(prog, backend)
    if sol.status in ("optimal", "inaccurate"):
        s_val = float(sol.x[s])
        if s_val > tol:
            return False, None
        # The solved blocks sum to A + s*I. Folding -s/(n-1) into each block
        # diagonal makes them sum to A exactly; for s < 0 this only pushes
        # the blocks further inside the psd cone, and for 0 < s <= tol it
        # costs at most tol of block margin, which verification allows.
        shift = s_val / (n - 1)
        blocks = []
        for i, j in pairs:
            u, v, t = block_vars[(i, j)]
            blocks.append(
                (
                    i,
                    j,
                    float(sol.x[u]) - shift,
                    float(sol.x[t]) / math.sqrt(2.0),
                    float(sol.x[v]) - shift,
                )
            )
        return True, SddWitness(tuple(blocks))
    if sol.status == "infeasible":
        # Cannot happen with the diagonal slack present; treat as breakdown.
        from .conic import SolverFailureError

        raise SolverFailureError("sdd feasibility program reported infeasible")
    if sol.status == "unbounded":
        from .conic import SolverFailureError

        raise SolverFailureError("sdd margin program reported unbounded")
    from .conic import SolverFailureError

    raise SolverFailureError(f"sdd solve failed with status {sol.status}")


def sdd_upper_bound_by_scaling(
    A, d_grid: Sequence[float], tol: float = 0.0
) -> bool:
    """Grid-search oracle for sdd: is DAD dd for some positive diagonal D?

    Uses the equivalent positive-vector form d_i * a_ii >= sum_j |a_ij| d_j
    with d_1 fixed to 1, sweeping the remaining entries over d_grid. Sound
    but incomplete (a True verdict implies sdd; False only means the grid
    found nothing), so tests assert agreement in the grid->solver direction.
    Supports n <= 3, which is what the oracle comparison needs.
    """
    M = _as_sym(A)
    n = M.shape[0]
    if n > 3:
        raise ValueError("grid oracle supports n <= 3")
    grid = np.asarray(d_grid, dtype=float)
    if np.any(grid <= 0):
        raise ValueError("scaling grid must be positive")
    diag = np.diag(M)
    absM = np.abs(M)
    if n == 1:
        return bool(diag[0] >= -tol)
    if n == 2:
        d2 = grid
        ok = (diag[0] + tol >= absM[0, 1] * d2) & (d2 * diag[1] + tol >= absM[1, 0])
        return bool(np.any(ok))
    d2, d3 = np.meshgrid(grid, grid, indexing="ij")
    ok = (
        (diag[0] + tol >= absM[0, 1] * d2 + absM[0, 2] * d3)
        & (d2 * diag[1] + tol >= absM[1, 0] + absM[1, 2] * d3)
        & (d3 * diag[2] + tol >= absM[2, 0] + absM[2, 1] * d2)
    )
    return bool(np.any(ok))
