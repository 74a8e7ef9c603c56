"""Backend adapters for the conic IR.

Two adapters ship in-tree: Clarabel (LP + SOCP + SDP, the default) and
SciPy's HiGHS linprog (LP only, exercising the partial-capability path).
A backend is only handed to callers after it has passed the contract
battery once in the current process.
"""

from __future__ import annotations

import os
import time
from abc import ABC, abstractmethod

import numpy as np
import scipy.sparse as sp

from .program import ConicProgram, ConicSolution, required_capabilities


class UnsupportedConeError(ValueError):
    """Program contains a cone type the selected backend cannot handle."""


class SolverFailureError(RuntimeError):
    """A backend failed in a way that is not an infeasibility verdict."""


class Backend(ABC):
    name: str = ""
    capabilities: frozenset[str] = frozenset()
    # True when one adapter instance may run concurrent solves. Both in-tree
    # adapters construct all solver state per call, so they are reentrant;
    # the default policy for new adapters is one instance per solve.
    reentrant: bool = True

    @abstractmethod
    def solve(
        self,
        prog: ConicProgram,
        *,
        time_limit: float | None = None,
        max_iter: int | None = None,
        verbose: bool = False,
    ) -> ConicSolution:
        raise NotImplementedError

    def check_supports(self, prog: ConicProgram) -> None:
        missing = required_capabilities(prog) - self.capabilities
        if missing:
            raise UnsupportedConeError(
                f"backend {self.name!r} lacks {sorted(missing)} "
                f"required by this program"
            )


_SQRT2 = 2.0**0.5


class ClarabelBackend(Backend):
    name = "clarabel"
    capabilities = frozenset({"lp", "socp", "sdp"})

    _STATUS_MAP = {
        "Solved": "optimal",
        "AlmostSolved": "inaccurate",
        "PrimalInfeasible": "infeasible",
        "AlmostPrimalInfeasible": "infeasible",
        "DualInfeasible": "unbounded",
        "AlmostDualInfeasible": "unbounded",
    }

    def solve(self, prog, *, time_limit=None, max_iter=None, verbose=False):
        import clarabel

        self.check_supports(prog)
        n = prog.num_vars
        rows: list[int] = []
        cols: list[int] = []
        vals: list[float] = []
        b: list[float] = []
        cones = []
        r = 0

        if prog.eq_rows:
            for row, rhs in zip(prog.eq_rows, prog.eq_rhs):
                for var, coeff in row.items():
                    rows.append(r)
                    cols.append(var)
                    vals.append(coeff)
                b.append(rhs)
                r += 1
            cones.append(clarabel.ZeroConeT(len(prog.eq_rows)))

        if prog.nonneg:
            for var in prog.nonneg:
                rows.append(r)
                cols.append(var)
                vals.append(-1.0)
                b.append(0.0)
                r += 1
            cones.append(clarabel.NonnegativeConeT(len(prog.nonneg)))

        # Rotated cone (u, v, w) as the standard second-order cone
        # (u + v, u - v, sqrt(2) w): squaring the norm inequality gives back
        # 2uv >= ||w||^2 and u + v >= |u - v| forces u, v >= 0.
        for cone in prog.rotated_cones:
            rows.extend((r, r))
            cols.extend((cone.u, cone.v))
            vals.extend((-1.0, -1.0))
            b.append(0.0)
            r += 1
            rows.extend((r, r))
            cols.extend((cone.u, cone.v))
            vals.extend((-1.0, 1.0))
            b.append(0.0)
            r += 1
            for wv in cone.w:
                rows.append(r)
                cols.append(wv)
                vals.append(-_SQRT2)
                b.append(0.0)
                r += 1
            cones.append(clarabel.SecondOrderConeT(2 + len(cone.w)))

        # PSD block in scaled-vec form: column-stacked upper triangle with
        # off-diagonal entries multiplied by sqrt(2).
        for block in prog.psd_blocks:
            m = len(block)
            for j in range(m):
                for i in range(j + 1):
                    rows.append(r)
                    cols.append(block[i][j])
                    vals.append(-1.0 if i == j else -_SQRT2)
                    b.append(0.0)
                    r += 1
            cones.append(clarabel.PSDTriangleConeT(m))

        q = np.zeros(n)
        for var, coeff in prog.objective.items():
            q[var] = coeff

        start = time.perf_counter()
        if r == 0:
            elapsed = time.perf_counter() - start
            if np.any(q != 0.0) and n > 0:
                return ConicSolution(
                    status="unbounded",
                    solve_time=elapsed,
                    backend_name=self.name,
                    raw_status="trivial-unconstrained",
                )
            return ConicSolution(
                status="optimal",
                x=np.zeros(n),
                objective=0.0,
                solve_time=elapsed,
                backend_name=self.name,
                raw_status="trivial-unconstrained",
            )

        A = sp.coo_matrix((vals, (rows, cols)), shape=(r, n)).tocsc()
        P = sp.csc_matrix((n, n))
        settings = clarabel.DefaultSettings()
        settings.verbose = bool(verbose)
        if time_limit is not None:
            settings.time_limit = float(time_limit)
        if max_iter is not None:
            settings.max_iter = int(max_iter)
        solver = clarabel.DefaultSolver(P, q, A, np.array(b), cones, settings)
        try:
            sol = solver.solve()
        except BaseException as exc:
            # Rust panics (e.g. an eigendecomposition breakdown on an
            # ill-conditioned psd block) surface as pyo3 PanicException,
            # which subclasses BaseException. Report them as a failed solve
            # instead of letting a panic escape the backend abstraction.
            if type(exc).__name__ != "PanicException":
                raise
            return ConicSolution(
                status="failed",
                solve_time=time.perf_counter() - start,
                backend_name=self.name,
                raw_status=f"panic: {exc}",
            )
        elapsed = time.perf_counter() - start

        raw = str(sol.status)
        status = self._STATUS_MAP.get(raw, "failed")
        x = np.asarray(sol.x, dtype=float) if status in ("optimal", "inaccurate") else None
        objective = prog.objective_value(x) if x is not None else None
        return ConicSolution(
            status=status,
            x=x,
            objective=objective,
            solve_time=elapsed,
            backend_name=self.name,
            raw_status=raw,
        )


class ScipyHighsBackend(Backend):
    name = "scipy-highs"
    capabilities = frozenset({"lp"})

    _STATUS_MAP = {0: "optimal", 1: "failed", 2: "infeasible", 3: "unbounded", 4: "failed"}

    def solve(self, prog, *, time_limit=None, max_iter=None, verbose=False):
        from scipy.optimize import linprog

        self.check_supports(prog)
        n = prog.num_vars
        c = np.zeros(n)
        for var, coeff in prog.objective.items():
            c[var] = coeff
        bounds: list[tuple[float | None, float | None]] = [(None, None)] * n
        for var in prog.nonneg:
            bounds[var] = (0.0, None)

        a_eq = None
        b_eq = None
        if prog.eq_rows:
            rows, cols, vals = [], [], []
            for r, row in enumerate(prog.eq_rows):
                for var, coeff in row.items():
                    rows.append(r)
                    cols.append(var)
                    vals.append(coeff)
            a_eq = sp.coo_matrix((vals, (rows, cols)), shape=(len(prog.eq_rows), n)).tocsc()
            b_eq = np.array(prog.eq_rhs)

        options: dict = {}
        if time_limit is not None:
            options["time_limit"] = float(time_limit)
        start = time.perf_counter()
        res = linprog(c, A_eq=a_eq, b_eq=b_eq, bounds=bounds, method="highs", options=options)
        elapsed = time.perf_counter() - start

        status = self._STATUS_MAP.get(res.status, "failed")
        x = np.asarray(res.x, dtype=float) if status == "optimal" and res.x is not None else None
        if status == "optimal" and x is None:
            status = "failed"
        return ConicSolution(
            status=status,
            x=x,
            objective=prog.objective_value(x) if x is not None else None,
            solve_time=elapsed,
            backend_name=self.name,
            raw_status=f"highs-{res.status}",
        )


_REGISTRY: dict[str, type[Backend]] = {
    ClarabelBackend.name: ClarabelBackend,
    ScipyHighsBackend.name: ScipyHighsBackend,
}
_CONTRACT_PASSED: set[str] = set()

BACKEND_ENV_VAR = "POLYCERT_BACKEND"
DEFAULT_BACKEND = "clarabel"


def register_backend(cls: type[Backend]) -> None:
    if not cls.name:
        raise ValueError("backend class must define a name")
    _REGISTRY[cls.name] = cls


def available_backends() -> list[str]:
    return sorted(_REGISTRY)


def get_backend(name: str | Backend | None = None, validate: bool = True) -> Backend:
    """Resolve a backend by name, env override, or default.

    The first resolution of each name in a process runs the contract battery
    and raises if the adapter misbehaves on it.
    """
    if isinstance(name, Backend):
        return name
    if name is None:
        name = os.environ.get(BACKEND_ENV_VAR) or DEFAULT_BACKEND
    try:
        cls = _REGISTRY[name]
    except KeyError:
        raise ValueError(
            f"unknown backend {name!r}; available: {available_backends()}"
        ) from None
    backend = cls()
    if validate and name not in _CONTRACT_PASSED:
        from .contract import run_contract_battery

        run_contract_battery(backend, raise_on_failure=True)
        _CONTRACT_PASSED.add(name)
    return backend


def solve(
    prog: ConicProgram,
    backend: str | Backend | None = None,
    *,
    time_limit: float | None = None,
    max_iter: int | None = None,
    verbose: bool = False,
) -> ConicSolution:
    resolved = get_backend(backend)
    resolved.check_supports(prog)
    return resolved.solve(
        prog, time_limit=time_limit, max_iter=max_iter, verbose=verbose
    )
