"""Exact solver for 0-1 programs of the winner-determination shape.

Maximizes a linear objective over binary variables subject to set-packing
rows (0/1 coefficients, right-hand side 1) and optional >= rows with real
coefficients (per-bidder minimum values).  :func:`solve` drives the HiGHS
branch-and-bound behind scipy with the optimality gap pinned to zero, so
the returned objective is the true maximum; :func:`brute_force` provides
independent reference semantics by exhaustive enumeration.  Exhausting the
node budget raises instead of returning a silent suboptimal answer.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy import optimize, sparse

MAX_VARIABLES = 3000
BRUTE_FORCE_MAX_VARIABLES = 25
DEFAULT_NODE_BUDGET = 100_000_000
FEAS_TOL = 1e-9


class SolverBudgetError(RuntimeError):
    """Raised when the node budget is exhausted before proving optimality."""


class SolveStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class ZeroOneProgram:
    """max c.x  s.t.  sum_{j in row} x_j <= 1 per le row,
    sum coeffs.x >= rhs per ge row,  x binary."""

    objective: np.ndarray
    le_rows: tuple[tuple[int, ...], ...] = ()
    ge_rows: tuple[tuple[tuple[int, ...], tuple[float, ...], float], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "objective", np.asarray(self.objective, dtype=float)
        )
        n = len(self.objective)
        for row in self.le_rows:
            for j in row:
                if not 0 <= j < n:
                    raise ValueError(f"le row references unknown variable {j}")
        for idx, coeffs, _ in self.ge_rows:
            if len(idx) != len(coeffs):
                raise ValueError("ge row indices and coefficients differ in length")
            for j in idx:
                if not 0 <= j < n:
                    raise ValueError(f"ge row references unknown variable {j}")

    @property
    def n_variables(self) -> int:
        return len(self.objective)

    @property
    def n_rows(self) -> int:
        return len(self.le_rows) + len(self.ge_rows)


@dataclass
class SolveResult:
    status: SolveStatus
    solution: np.ndarray | None
    objective_value: float
    nodes_explored: int = 0

    @property
    def chosen(self) -> list[int]:
        if self.solution is None:
            return []
        return [int(j) for j in np.flatnonzero(self.solution)]


def check_feasible(program: ZeroOneProgram, x: np.ndarray, tol: float = FEAS_TOL) -> bool:
    """Row-by-row feasibility of a binary vector."""
    for row in program.le_rows:
        if sum(int(x[j]) for j in row) > 1:
            return False
    for idx, coeffs, rhs in program.ge_rows:
        if sum(c * x[j] for j, c in zip(idx, coeffs)) < rhs - tol:
            return False
    return True


def _constraint_matrix(program: ZeroOneProgram) -> tuple[sparse.csr_matrix, np.ndarray, np.ndarray]:
    n = program.n_variables
    data: list[float] = []
    ri: list[int] = []
    ci: list[int] = []
    lb: list[float] = []
    ub: list[float] = []
    r = 0
    for row in program.le_rows:
        for j in row:
            ri.append(r)
            ci.append(j)
            data.append(1.0)
        lb.append(-np.inf)
        ub.append(1.0)
        r += 1
    for idx, coeffs, rhs in program.ge_rows:
        for j, coeff in zip(idx, coeffs):
            ri.append(r)
            ci.append(j)
            data.append(float(coeff))
        lb.append(float(rhs))
        ub.append(np.inf)
        r += 1
    mat = sparse.csr_matrix((data, (ri, ci)), shape=(r, n))
    return mat, np.array(lb), np.array(ub)


def solve(program: ZeroOneProgram, node_budget: int = DEFAULT_NODE_BUDGET) -> SolveResult:
    """Provably optimal feasible solution of the program, or Infeasible.

    The relative and absolute MIP gaps are set to zero: the incumbent is
    only accepted once the search proves it maximal.  Deterministic for a
    fixed program (single-threaded solve, no time-based limits).
    """
    n = program.n_variables
    if n > MAX_VARIABLES:
        raise ValueError(f"program has {n} variables, cap is {MAX_VARIABLES}")
    if n == 0:
        if all(rhs <= FEAS_TOL for _, _, rhs in program.ge_rows):
            return SolveResult(SolveStatus.OPTIMAL, np.zeros(0, dtype=np.int8), 0.0, 0)
        return SolveResult(SolveStatus.INFEASIBLE, None, -np.inf, 0)
    constraints = []
    if program.n_rows:
        mat, lb, ub = _constraint_matrix(program)
        constraints.append(optimize.LinearConstraint(mat, lb, ub))
    res = optimize.milp(
        c=-program.objective,  # scipy minimizes
        constraints=constraints,
        integrality=np.ones(n),
        bounds=optimize.Bounds(0.0, 1.0),
        options={
            "mip_rel_gap": 0.0,
            "node_limit": int(node_budget),
            "presolve": True,
        },
    )
    nodes = int(getattr(res, "mip_node_count", 0) or 0)
    if res.status == 1:  # iteration/node limit reached
        raise SolverBudgetError(
            f"node budget {node_budget} exhausted before proving optimality"
        )
    if res.status == 2:  # proven infeasible
        return SolveResult(SolveStatus.INFEASIBLE, None, -np.inf, nodes)
    if res.status != 0 or res.x is None:
        raise RuntimeError(f"unexpected solver outcome: {res.status} {res.message}")
    solution = np.asarray(np.round(res.x), dtype=np.int8)
    assert check_feasible(program, solution), "solver returned an infeasible vector"
    value = float(program.objective @ solution)
    return SolveResult(SolveStatus.OPTIMAL, solution, value, nodes)


def brute_force(program: ZeroOneProgram, chunk: int = 1 << 16) -> SolveResult:
    """Exhaustive enumeration; the reference semantics for :func:`solve`."""
    n = program.n_variables
    if n > BRUTE_FORCE_MAX_VARIABLES:
        raise ValueError(
            f"brute force capped at {BRUTE_FORCE_MAX_VARIABLES} variables, got {n}"
        )
    c = np.asarray(program.objective, dtype=float)
    if n == 0:
        ok = all(rhs <= FEAS_TOL for _, _, rhs in program.ge_rows)
        if ok:
            return SolveResult(SolveStatus.OPTIMAL, np.zeros(0, dtype=np.int8), 0.0, 1)
        return SolveResult(SolveStatus.INFEASIBLE, None, -np.inf, 1)
    total = 1 << n
    bits = np.arange(n, dtype=np.uint32)
    best_val = -np.inf
    best_x: np.ndarray | None = None
    for start in range(0, total, chunk):
        codes = np.arange(start, min(start + chunk, total), dtype=np.uint32)
        X = ((codes[:, None] >> bits[None, :]) & 1).astype(np.float64)
        feas = np.ones(len(codes), dtype=bool)
        for row in program.le_rows:
            feas &= X[:, list(row)].sum(axis=1) <= 1.0
        for idx, coeffs, rhs in program.ge_rows:
            if idx:
                feas &= X[:, list(idx)] @ np.asarray(coeffs) >= rhs - FEAS_TOL
            else:
                feas &= rhs <= FEAS_TOL
        if not feas.any():
            continue
        vals = X @ c
        vals[~feas] = -np.inf
        j = int(np.argmax(vals))
        if vals[j] > best_val:
            best_val = float(vals[j])
            best_x = X[j].astype(np.int8)
    if best_x is None:
        return SolveResult(SolveStatus.INFEASIBLE, None, -np.inf, total)
    return SolveResult(SolveStatus.OPTIMAL, best_x, best_val, total)
