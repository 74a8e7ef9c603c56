"""Backend contract battery.

A fixed list of tiny programs with known optima or statuses. Every backend
must pass the subset matching its declared capabilities before higher layers
may use it; for cases beyond its capabilities the adapter must refuse with
UnsupportedConeError rather than mis-solve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .program import ConicProgram, primal_residuals, required_capabilities


@dataclass(frozen=True)
class ContractCase:
    name: str
    build: Callable[[], ConicProgram]
    expected_status: str
    expected_objective: float | None = None
    tol: float = 1e-6


def _lp_min_nonneg() -> ConicProgram:
    p = ConicProgram()
    x = p.add_variable()
    p.add_nonneg(x)
    p.add_objective_term(x, 1.0)
    return p


def _lp_unconstrained_unbounded() -> ConicProgram:
    p = ConicProgram()
    x = p.add_variable()
    p.add_objective_term(x, 1.0)
    return p


def _lp_infeasible_pair() -> ConicProgram:
    p = ConicProgram()
    x, s, t = p.add_variables(3)
    p.add_nonneg([s, t])
    p.add_equality({x: 1.0, s: -1.0}, 1.0)  # x >= 1
    p.add_equality({x: 1.0, t: 1.0}, 0.0)  # x <= 0
    return p


def _lp_forced_rates() -> ConicProgram:
    p = ConicProgram()
    c1, c2 = p.add_variables(2)
    p.add_equality({c1: 1.0}, 2.561)
    p.add_equality({c2: 1.0}, 5.550)
    p.add_objective_term(c1, 1.0)
    p.add_objective_term(c2, 1.0)
    return p


def _lp_simplex_vertex() -> ConicProgram:
    p = ConicProgram()
    x, y, s1, s2 = p.add_variables(4)
    p.add_nonneg([x, y, s1, s2])
    p.add_equality({x: 1.0, y: 1.0, s1: 1.0}, 4.0)
    p.add_equality({x: 1.0, y: 3.0, s2: 1.0}, 6.0)
    p.add_objective_term(x, -1.0)
    p.add_objective_term(y, -2.0)
    return p


def _lp_zero_objective() -> ConicProgram:
    p = ConicProgram()
    x, y = p.add_variables(2)
    p.add_nonneg([x, y])
    p.add_equality({x: 1.0, y: 1.0}, 1.0)
    return p


def _lp_bounded_neg_cost() -> ConicProgram:
    p = ConicProgram()
    x, s = p.add_variables(2)
    p.add_nonneg([x, s])
    p.add_equality({x: 1.0, s: 1.0}, 1.0)
    p.add_objective_term(x, -1.0)
    return p


def _lp_equality_chain() -> ConicProgram:
    p = ConicProgram()
    x, y, z = p.add_variables(3)
    p.add_equality({x: 1.0}, 1.0)
    p.add_equality({y: 1.0, x: -1.0}, 1.0)
    p.add_equality({z: 1.0, y: -1.0}, 1.0)
    p.add_objective_term(z, 1.0)
    return p


def _lp_nonneg_binding() -> ConicProgram:
    p = ConicProgram()
    x, y = p.add_variables(2)
    p.add_nonneg([x, y])
    p.add_equality({x: 1.0, y: -1.0}, 2.0)
    p.add_objective_term(x, 1.0)
    p.add_objective_term(y, 1.0)
    return p


def _lp_unbounded_ray() -> ConicProgram:
    p = ConicProgram()
    x = p.add_variable()
    p.add_nonneg(x)
    p.add_objective_term(x, -1.0)
    return p


def _socp_rotated_amgm() -> ConicProgram:
    p = ConicProgram()
    u, v, o = p.add_variables(3)
    p.add_equality({o: 1.0}, 1.0)
    p.add_rotated_cone(u, v, [o])
    p.add_objective_term(u, 1.0)
    p.add_objective_term(v, 1.0)
    return p


def _socp_norm_bound() -> ConicProgram:
    p = ConicProgram()
    u, v, w1, w2 = p.add_variables(4)
    p.add_equality({u: 1.0, v: -1.0}, 0.0)
    p.add_equality({w1: 1.0}, 3.0)
    p.add_equality({w2: 1.0}, 4.0)
    p.add_rotated_cone(u, v, [w1, w2])
    p.add_objective_term(u, 1.0)
    p.add_objective_term(v, 1.0)
    return p


def _socp_feasibility() -> ConicProgram:
    p = ConicProgram()
    u, v, w = p.add_variables(3)
    p.add_equality({w: 1.0}, 0.0)
    p.add_equality({u: 1.0, v: 1.0}, 1.0)
    p.add_rotated_cone(u, v, [w])
    return p


def _socp_infeasible() -> ConicProgram:
    p = ConicProgram()
    u, v, w, s1, s2 = p.add_variables(5)
    p.add_nonneg([s1, s2])
    p.add_equality({u: 1.0, s1: 1.0}, 0.1)  # u <= 0.1
    p.add_equality({v: 1.0, s2: 1.0}, 0.1)  # v <= 0.1
    p.add_equality({w: 1.0}, 1.0)
    p.add_rotated_cone(u, v, [w])  # needs 2uv >= 1 but 2uv <= 0.02
    return p


def _socp_unbounded() -> ConicProgram:
    p = ConicProgram()
    u, v, w = p.add_variables(3)
    p.add_equality({v: 1.0}, 1.0)
    p.add_equality({w: 1.0}, 1.0)
    p.add_rotated_cone(u, v, [w])
    p.add_objective_term(u, -1.0)
    return p


def _socp_mixed_lp() -> ConicProgram:
    p = ConicProgram()
    x, s, u, v = p.add_variables(4)
    p.add_nonneg(s)
    p.add_equality({x: 1.0, s: -1.0}, 2.0)  # x >= 2
    p.add_rotated_cone(u, v, [x])
    for var in (x, u, v):
        p.add_objective_term(var, 1.0)
    return p


def _sdp_eig_bound() -> ConicProgram:
    p = ConicProgram()
    t, o = p.add_variables(2)
    p.add_equality({o: 1.0}, 1.0)
    p.add_psd_block([[t, o], [o, t]])
    p.add_objective_term(t, 1.0)
    return p


def _sdp_1x1() -> ConicProgram:
    p = ConicProgram()
    t = p.add_variable()
    p.add_psd_block([[t]])
    p.add_objective_term(t, 1.0)
    return p


def _sdp_infeasible() -> ConicProgram:
    p = ConicProgram()
    t, o, s = p.add_variables(3)
    p.add_nonneg(s)
    p.add_equality({o: 1.0}, 2.0)
    p.add_equality({t: 1.0, s: 1.0}, 1.0)  # t <= 1, but psd needs t >= 2
    p.add_psd_block([[t, o], [o, t]])
    return p


def _sdp_offdiag_min() -> ConicProgram:
    p = ConicProgram()
    d, t = p.add_variables(2)
    p.add_equality({d: 1.0}, 1.0)
    p.add_psd_block([[d, t], [t, d]])
    p.add_objective_term(t, 1.0)
    return p


def _sdp_mixed_lp() -> ConicProgram:
    p = ConicProgram()
    y, o, f = p.add_variables(3)
    p.add_equality({o: 1.0}, 1.0)
    p.add_equality({f: 1.0}, 4.0)
    p.add_psd_block([[y, o], [o, f]])
    p.add_objective_term(y, 1.0)
    return p


def _sdp_trace_objective() -> ConicProgram:
    p = ConicProgram()
    idx = [[p.add_variable() for _ in range(3)] for _ in range(3)]
    for i in range(3):
        for j in range(i):
            idx[i][j] = idx[j][i]
    p.add_equality({idx[0][0]: 1.0}, 1.0)
    p.add_psd_block(idx)
    for i in range(3):
        p.add_objective_term(idx[i][i], 1.0)
    return p


_SQRT2 = math.sqrt(2.0)

CONTRACT_CASES: tuple[ContractCase, ...] = (
    ContractCase("lp-min-nonneg", _lp_min_nonneg, "optimal", 0.0),
    ContractCase("lp-unconstrained-unbounded", _lp_unconstrained_unbounded, "unbounded"),
    ContractCase("lp-infeasible-pair", _lp_infeasible_pair, "infeasible"),
    ContractCase("lp-forced-rates", _lp_forced_rates, "optimal", 8.111),
    ContractCase("lp-simplex-vertex", _lp_simplex_vertex, "optimal", -5.0),
    ContractCase("lp-zero-objective", _lp_zero_objective, "optimal", 0.0),
    ContractCase("lp-bounded-neg-cost", _lp_bounded_neg_cost, "optimal", -1.0),
    ContractCase("lp-equality-chain", _lp_equality_chain, "optimal", 3.0),
    ContractCase("lp-nonneg-binding", _lp_nonneg_binding, "optimal", 2.0),
    ContractCase("lp-unbounded-ray", _lp_unbounded_ray, "unbounded"),
    ContractCase("socp-rotated-amgm", _socp_rotated_amgm, "optimal", _SQRT2),
    ContractCase("socp-norm-bound", _socp_norm_bound, "optimal", 5.0 * _SQRT2),
    ContractCase("socp-feasibility", _socp_feasibility, "optimal", 0.0),
    ContractCase("socp-infeasible", _socp_infeasible, "infeasible"),
    ContractCase("socp-unbounded", _socp_unbounded, "unbounded"),
    ContractCase("socp-mixed-lp", _socp_mixed_lp, "optimal", 2.0 + 2.0 * _SQRT2),
    ContractCase("sdp-eig-bound", _sdp_eig_bound, "optimal", 1.0),
    ContractCase("sdp-1x1", _sdp_1x1, "optimal", 0.0),
    ContractCase("sdp-infeasible", _sdp_infeasible, "infeasible"),
    ContractCase("sdp-offdiag-min", _sdp_offdiag_min, "optimal", -1.0),
    ContractCase("sdp-mixed-lp", _sdp_mixed_lp, "optimal", 0.25),
    ContractCase("sdp-trace-objective", _sdp_trace_objective, "optimal", 1.0),
)

RESIDUAL_TOL = 1e-6


def run_contract_battery(backend, raise_on_failure: bool = True) -> list[dict]:
    """Run every contract case against a backend adapter.

    Cases whose cones exceed the backend's capabilities must raise
    UnsupportedConeError; all others must report the expected status, match
    the expected objective, and satisfy primal residuals <= 1e-6 whenever
    they claim optimality.
    """
    from .backends import UnsupportedConeError

    results = []
    for case in CONTRACT_CASES:
        prog = case.build()
        needed = required_capabilities(prog)
        entry: dict = {"case": case.name, "ok": True, "detail": ""}
        if not needed <= backend.capabilities:
            try:
                backend.solve(prog)
            except UnsupportedConeError:
                entry["detail"] = "refused unsupported cone"
            except Exception as exc:  # noqa: BLE001 - contract reporting
                entry["ok"] = False
                entry["detail"] = f"wrong refusal {type(exc).__name__}: {exc}"
            else:
                entry["ok"] = False
                entry["detail"] = "solved a program it should have refused"
            results.append(entry)
            continue

        sol = backend.solve(prog)
        if sol.status != case.expected_status:
            entry["ok"] = False
            entry["detail"] = f"status {sol.status} != {case.expected_status}"
        elif case.expected_objective is not None and sol.status == "optimal":
            err = abs(sol.objective - case.expected_objective)
            residual = primal_residuals(prog, sol.x)["max"]
            if err > case.tol:
                entry["ok"] = False
                entry["detail"] = f"objective off by {err:.2e}"
            elif residual > RESIDUAL_TOL:
                entry["ok"] = False
                entry["detail"] = f"primal residual {residual:.2e}"
        results.append(entry)

    failures = [r for r in results if not r["ok"]]
    if failures and raise_on_failure:
        from .backends import SolverFailureError

        summary = "; ".join(f"{r['case']}: {r['detail']}" for r in failures)
        raise SolverFailureError(
            f"backend {backend.name!r} failed contract battery: {summary}"
        )
    return results
