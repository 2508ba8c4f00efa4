"""Standard-form linear programs and dense solvers.

Every optimization in the package is lowered to an :class:`LpProblem`
(minimize ``c @ x`` subject to row-wise ``<=`` / ``=`` / ``>=`` constraints
and per-variable bounds) and handed to a solver backend.  Two backends are
bundled:

* :class:`SimplexSolver` -- a self-contained dense two-phase revised simplex
  with Bland's rule as anti-cycling fallback.  Deterministic, adequate for a
  few hundred variables.
* :class:`HighsSolver` -- a thin wrapper over ``scipy.optimize.linprog``
  (HiGHS), used as the default backend because it is much faster on the
  sample-sized programs the rest of the package generates.

The backend is swappable per call or globally (``RELINT_SOLVER=simplex``).
"""

import os
from dataclasses import dataclass

import numpy as np

from .errors import MalformedProblem, NumericalFailure

DEFAULT_TOLERANCE = 1e-8
ITERATION_CAP_FACTOR = 50

LESS_EQUAL = "<="
EQUAL = "="
GREATER_EQUAL = ">="
_SENSES = (LESS_EQUAL, EQUAL, GREATER_EQUAL)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


def _as_float_array(value, name, ndim):
    arr = np.asarray(value, dtype=float)
    if arr.ndim != ndim:
        raise MalformedProblem(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class LpProblem:
    """A linear program in general form: minimize ``objective @ x``.

    ``constraint_sense[i]`` is one of ``"<="``, ``"="``, ``">="`` and applies
    to row ``i`` of ``constraint_matrix @ x`` against ``constraint_rhs[i]``.
    Variable bounds may be ``-inf`` / ``+inf``.
    """

    objective: np.ndarray
    constraint_matrix: np.ndarray
    constraint_rhs: np.ndarray
    constraint_sense: tuple
    variable_lower_bounds: np.ndarray
    variable_upper_bounds: np.ndarray

    def __post_init__(self):
        c = _as_float_array(self.objective, "objective", 1)
        a = _as_float_array(self.constraint_matrix, "constraint_matrix", 2)
        b = _as_float_array(self.constraint_rhs, "constraint_rhs", 1)
        lo = _as_float_array(self.variable_lower_bounds, "variable_lower_bounds", 1)
        hi = _as_float_array(self.variable_upper_bounds, "variable_upper_bounds", 1)
        senses = tuple(self.constraint_sense)
        m, n = a.shape
        if c.shape[0] != n or lo.shape[0] != n or hi.shape[0] != n:
            raise MalformedProblem(
                f"column mismatch: matrix has {n} columns, objective {c.shape[0]}, "
                f"bounds {lo.shape[0]}/{hi.shape[0]}"
            )
        if b.shape[0] != m or len(senses) != m:
            raise MalformedProblem(
                f"row mismatch: matrix has {m} rows, rhs {b.shape[0]}, senses {len(senses)}"
            )
        for s in senses:
            if s not in _SENSES:
                raise MalformedProblem(f"unknown constraint sense {s!r}")
        if not np.all(np.isfinite(a)):
            raise MalformedProblem("constraint matrix entries must be finite")
        if not np.all(np.isfinite(b)):
            raise MalformedProblem("constraint rhs must be finite")
        if not np.all(np.isfinite(c)):
            raise MalformedProblem("objective coefficients must be finite")
        if np.any(lo > hi):
            raise MalformedProblem("every variable needs lower bound <= upper bound")
        for name, arr in (
            ("objective", c),
            ("constraint_matrix", a),
            ("constraint_rhs", b),
            ("variable_lower_bounds", lo),
            ("variable_upper_bounds", hi),
        ):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "constraint_sense", senses)

    @property
    def n_rows(self):
        return self.constraint_matrix.shape[0]

    @property
    def n_cols(self):
        return self.constraint_matrix.shape[1]

    def iteration_cap(self):
        return ITERATION_CAP_FACTOR * (self.n_rows + self.n_cols)


@dataclass(frozen=True)
class LpSolution:
    """Solver verdict.  ``objective_value``/``variable_values`` are set iff optimal."""

    status: str
    objective_value: float | None
    variable_values: np.ndarray | None
    iterations: int
    dual_values: np.ndarray | None = None

    @property
    def is_optimal(self):
        return self.status == OPTIMAL


class HighsSolver:
    """Backend delegating to ``scipy.optimize.linprog`` with the HiGHS engine."""

    def solve(self, problem: LpProblem, tolerance: float = DEFAULT_TOLERANCE) -> LpSolution:
        from scipy.optimize import linprog

        if tolerance <= 0:
            raise MalformedProblem("tolerance must be positive")
        senses = np.asarray(problem.constraint_sense)
        le_rows = np.flatnonzero(senses == LESS_EQUAL)
        ge_rows = np.flatnonzero(senses == GREATER_EQUAL)
        eq_rows = np.flatnonzero(senses == EQUAL)
        a = problem.constraint_matrix
        b = problem.constraint_rhs
        a_ub = b_ub = a_eq = b_eq = None
        if le_rows.size or ge_rows.size:
            a_ub = np.vstack([a[le_rows], -a[ge_rows]])
            b_ub = np.concatenate([b[le_rows], -b[ge_rows]])
        if eq_rows.size:
            a_eq = a[eq_rows]
            b_eq = b[eq_rows]
        bounds = np.column_stack([problem.variable_lower_bounds, problem.variable_upper_bounds])
        res = linprog(
            problem.objective,
            A_ub=a_ub,
            b_ub=b_ub,
            A_eq=a_eq,
            b_eq=b_eq,
            bounds=bounds,
            method="highs",
            options={
                "maxiter": problem.iteration_cap(),
                "primal_feasibility_tolerance": max(tolerance, 1e-10),
                "dual_feasibility_tolerance": max(tolerance, 1e-10),
            },
        )
        if res.status == 2:
            return LpSolution(INFEASIBLE, None, None, int(res.nit))
        if res.status == 3:
            return LpSolution(UNBOUNDED, None, None, int(res.nit))
        if res.status != 0:
            raise NumericalFailure(f"HiGHS did not converge: {res.message}")
        duals = np.zeros(problem.n_rows)
        if a_ub is not None:
            ub_marg = np.asarray(res.ineqlin.marginals)
            duals[le_rows] = ub_marg[: le_rows.size]
            duals[ge_rows] = -ub_marg[le_rows.size :]
        if a_eq is not None:
            duals[eq_rows] = np.asarray(res.eqlin.marginals)
        return LpSolution(OPTIMAL, float(res.fun), np.asarray(res.x), int(res.nit), duals)


class SimplexSolver:
    """Dense two-phase revised simplex.

    Entering variable: most negative reduced cost, lowest index on ties
    (reproducible).  If the objective stalls over many degenerate pivots the
    solver switches to Bland's rule, which guarantees termination.  The basis
    inverse is refactorized periodically to limit drift.
    """

    REFACTOR_EVERY = 100
    STALL_LIMIT = 60

    def solve(self, problem: LpProblem, tolerance: float = DEFAULT_TOLERANCE) -> LpSolution:
        if tolerance <= 0:
            raise MalformedProblem("tolerance must be positive")
        form = _StandardForm(problem)
        cap = problem.iteration_cap()
        state = _SimplexState(form.a, form.b, tolerance, cap)
        state.set_start(form.start_basis)

        # Phase 1: minimize the sum of artificial variables.
        if form.n_artificial:
            c1 = np.zeros(form.a.shape[1])
            c1[form.artificial_cols] = 1.0
            status = state.run(c1)
            if status == UNBOUNDED:  # cannot happen: phase-1 objective >= 0
                raise NumericalFailure("phase-1 reported unbounded")
            infeas = state.objective(c1)
            if infeas > tolerance * (1.0 + np.abs(form.b).sum()):
                return LpSolution(INFEASIBLE, None, None, state.iterations)
            state.drive_out_artificials(form.n_real)

        # Phase 2: original costs; artificial columns are frozen out.
        c2 = np.zeros(state.a.shape[1])
        c2[: form.n_real] = form.c
        status = state.run(c2, allowed=form.n_real)
        if status == UNBOUNDED:
            return LpSolution(UNBOUNDED, None, None, state.iterations)

        z = state.primal()
        x = form.recover(z)
        residual = _feasibility_residual(problem, x)
        if residual > 1e-6:
            raise NumericalFailure(f"solution fails feasibility check (residual {residual:.2e})")
        duals = form.recover_duals(state.duals(c2))
        value = float(problem.objective @ x)
        return LpSolution(OPTIMAL, value, x, state.iterations, duals)


def _feasibility_residual(problem: LpProblem, x: np.ndarray) -> float:
    lhs = problem.constraint_matrix @ x
    worst = 0.0
    for i, sense in enumerate(problem.constraint_sense):
        gap = lhs[i] - problem.constraint_rhs[i]
        scale = 1.0 + abs(problem.constraint_rhs[i])
        if sense == LESS_EQUAL:
            worst = max(worst, gap / scale)
        elif sense == GREATER_EQUAL:
            worst = max(worst, -gap / scale)
        else:
            worst = max(worst, abs(gap) / scale)
    worst = max(worst, np.max(problem.variable_lower_bounds - x, initial=0.0))
    worst = max(worst, np.max(x - problem.variable_upper_bounds, initial=0.0))
    return float(worst)


class _StandardForm:
    """Rewrites a general-form problem as min c@z, A z = b, z >= 0.

    Variable handling: finite lower bounds are shifted out, upper-only
    variables are mirrored, free variables are split into two nonnegative
    parts, and two-sided bounds add an explicit ``z <= u - l`` row.  Slack
    columns turn inequalities into equalities; rows are sign-normalized to
    ``b >= 0`` and artificial columns complete an identity start basis where
    no slack can serve.
    """

    def __init__(self, problem: LpProblem):
        a = problem.constraint_matrix
        c = problem.objective
        lo = problem.variable_lower_bounds
        hi = problem.variable_upper_bounds
        m0, n0 = a.shape

        cols = []
        costs = []
        self._recover_ops = []  # (kind, original index, data, z columns)
        shift = np.zeros(m0)
        extra_rows = []  # (z column index, rhs) for two-sided bounds

        for j in range(n0):
            l, u = lo[j], hi[j]
            if np.isfinite(l):
                if l != 0.0:
                    shift += a[:, j] * l
                col = len(cols)
                cols.append(a[:, j])
                costs.append(c[j])
                self._recover_ops.append(("shift", j, l, (col,)))
                if np.isfinite(u):
                    extra_rows.append((col, u - l))
            elif np.isfinite(u):
                shift += a[:, j] * u
                col = len(cols)
                cols.append(-a[:, j])
                costs.append(-c[j])
                self._recover_ops.append(("mirror", j, u, (col,)))
            else:
                col = len(cols)
                cols.append(a[:, j])
                cols.append(-a[:, j])
                costs.extend([c[j], -c[j]])
                self._recover_ops.append(("split", j, 0.0, (col, col + 1)))

        n_struct = len(cols)
        m = m0 + len(extra_rows)
        a_std = np.zeros((m, n_struct))
        if n_struct:
            a_std[:m0] = np.column_stack(cols)
        b_std = np.concatenate([problem.constraint_rhs - shift, np.zeros(len(extra_rows))])
        senses = list(problem.constraint_sense)
        for k, (col, rhs) in enumerate(extra_rows):
            a_std[m0 + k, col] = 1.0
            b_std[m0 + k] = rhs
            senses.append(LESS_EQUAL)

        slack_sign = np.zeros(m)
        n_slack = sum(1 for s in senses if s != EQUAL)
        slack_cols = np.zeros((m, n_slack))
        k = 0
        for i, s in enumerate(senses):
            if s == EQUAL:
                continue
            slack_sign[i] = 1.0 if s == LESS_EQUAL else -1.0
            slack_cols[i, k] = slack_sign[i]
            k += 1
        a_full = np.hstack([a_std, slack_cols])

        self.row_flip = np.ones(m)
        neg = b_std < 0
        a_full[neg] *= -1.0
        b_std[neg] *= -1.0
        self.row_flip[neg] = -1.0

        # Identity start: reuse slack columns that survived sign-normalization
        # with coefficient +1; all other rows get an artificial column.
        basis = np.full(m, -1, dtype=int)
        for i in range(m):
            row = a_full[i]
            for jj in range(n_struct, a_full.shape[1]):
                if row[jj] == 1.0 and np.count_nonzero(a_full[:, jj]) == 1:
                    basis[i] = jj
                    break
        need_artificial = np.flatnonzero(basis < 0)
        art = np.zeros((m, need_artificial.size))
        for k, i in enumerate(need_artificial):
            art[i, k] = 1.0
            basis[i] = a_full.shape[1] + k
        self.a = np.hstack([a_full, art])
        self.b = b_std
        self.c = np.concatenate([np.asarray(costs), np.zeros(n_slack)])
        self.n_real = a_full.shape[1]
        self.n_artificial = need_artificial.size
        self.artificial_cols = np.arange(self.n_real, self.n_real + self.n_artificial)
        self.start_basis = basis
        self.n_original_rows = m0
        self.n_original_vars = n0

    def recover(self, z: np.ndarray) -> np.ndarray:
        x = np.zeros(self.n_original_vars)
        for kind, j, data, zcols in self._recover_ops:
            if kind == "shift":
                x[j] = z[zcols[0]] + data
            elif kind == "mirror":
                x[j] = data - z[zcols[0]]
            else:
                x[j] = z[zcols[0]] - z[zcols[1]]
        return x

    def recover_duals(self, y: np.ndarray | None) -> np.ndarray | None:
        if y is None:
            return None
        return y[: self.n_original_rows] * self.row_flip[: self.n_original_rows]


class _SimplexState:
    """Revised simplex iterations over one equality system, reusable across phases."""

    def __init__(self, a, b, tolerance, iteration_cap):
        self.a = a
        self.b = b
        self.tol = tolerance
        self.cap = iteration_cap
        self.iterations = 0
        self.basis = None
        self.b_inv = None
        self._deleted_rows = []

    def _refactor(self):
        try:
            self.b_inv = np.linalg.inv(self.a[:, self.basis])
        except np.linalg.LinAlgError as exc:
            raise NumericalFailure("singular basis during refactorization") from exc

    def run(self, c, allowed=None):
        """Iterate to optimality of ``c`` over the current system.

        ``allowed`` restricts entering candidates to columns < allowed
        (used in phase 2 to freeze artificial columns out of the basis).
        """
        if self.basis is None:
            # Initial basis is set by the caller through start_basis.
            raise NumericalFailure("simplex state not initialized")
        m, n = self.a.shape
        limit0 = n if allowed is None else allowed
        if m == 0:
            return UNBOUNDED if np.min(c[:limit0], initial=0.0) < -self.tol else OPTIMAL
        bland = False
        stall = 0
        last_obj = np.inf
        limit = n if allowed is None else allowed
        while True:
            if self.iterations >= self.cap:
                raise NumericalFailure(f"iteration cap {self.cap} reached")
            x_b = self.b_inv @ self.b
            y = c[self.basis] @ self.b_inv
            reduced = c[:limit] - y @ self.a[:, :limit]
            reduced[self.basis[self.basis < limit]] = 0.0
            if bland:
                negatives = np.flatnonzero(reduced < -self.tol)
                if negatives.size == 0:
                    return OPTIMAL
                entering = int(negatives[0])
            else:
                entering = int(np.argmin(reduced))
                if reduced[entering] >= -self.tol:
                    return OPTIMAL
            direction = self.b_inv @ self.a[:, entering]
            positive = direction > self.tol
            if not positive.any():
                return UNBOUNDED
            ratios = np.full(m, np.inf)
            ratios[positive] = np.maximum(x_b[positive], 0.0) / direction[positive]
            best = ratios.min()
            ties = np.flatnonzero(ratios <= best + self.tol * (1.0 + abs(best)))
            leaving = int(ties[np.argmin(self.basis[ties])])
            self._pivot(entering, leaving, direction)
            self.iterations += 1
            if self.iterations % SimplexSolver.REFACTOR_EVERY == 0:
                self._refactor()
            obj = float(c[self.basis] @ (self.b_inv @ self.b))
            if obj < last_obj - self.tol * (1.0 + abs(obj)):
                stall = 0
            else:
                stall += 1
                if stall > SimplexSolver.STALL_LIMIT:
                    bland = True
            last_obj = obj

    def _pivot(self, entering, leaving, direction):
        pivot = direction[leaving]
        if abs(pivot) < 1e-12:
            raise NumericalFailure("vanishing pivot element")
        row = self.b_inv[leaving] / pivot
        self.b_inv -= np.outer(direction, row)
        self.b_inv[leaving] = row
        self.basis[leaving] = entering

    def set_start(self, basis):
        self.basis = np.asarray(basis, dtype=int).copy()
        if self.a.shape[0]:
            self._refactor()
        else:
            self.b_inv = np.eye(0)

    def drive_out_artificials(self, n_real):
        """Pivot zero-level artificial variables out of the basis; drop redundant rows."""
        redundant = []
        for r in range(self.a.shape[0]):
            if self.basis[r] < n_real:
                continue
            tableau_row = self.b_inv[r] @ self.a[:, :n_real]
            candidates = np.flatnonzero(np.abs(tableau_row) > self.tol * 10)
            candidates = [j for j in candidates if j not in set(self.basis.tolist())]
            if candidates:
                j = int(candidates[0])
                direction = self.b_inv @ self.a[:, j]
                self._pivot(j, r, direction)
            else:
                redundant.append(r)
        if redundant:
            keep = np.setdiff1d(np.arange(self.a.shape[0]), redundant)
            self.a = self.a[keep]
            self.b = self.b[keep]
            self.basis = self.basis[keep]
            self._deleted_rows.extend(redundant)
            self._refactor()

    def primal(self):
        n = self.a.shape[1]
        z = np.zeros(n)
        if self.a.shape[0]:
            z[self.basis] = np.maximum(self.b_inv @ self.b, 0.0)
        return z

    def duals(self, c):
        if self.a.shape[0] == 0:
            return None
        y = c[self.basis] @ self.b_inv
        if self._deleted_rows:
            full = np.zeros(self.a.shape[0] + len(self._deleted_rows))
            keep = np.setdiff1d(np.arange(full.size), self._deleted_rows)
            full[keep] = y
            return full
        return y

    def objective(self, c):
        if self.a.shape[0] == 0:
            return 0.0
        return float(c[self.basis] @ (self.b_inv @ self.b))


_DEFAULT_SOLVERS = {
    "highs": HighsSolver,
    "simplex": SimplexSolver,
}

_default_solver = None


def get_default_solver():
    """The process-wide backend; ``RELINT_SOLVER`` picks ``highs`` (default) or ``simplex``."""
    global _default_solver
    if _default_solver is None:
        name = os.environ.get("RELINT_SOLVER", "highs").lower()
        if name not in _DEFAULT_SOLVERS:
            raise MalformedProblem(f"unknown solver backend {name!r}")
        _default_solver = _DEFAULT_SOLVERS[name]()
    return _default_solver


def set_default_solver(solver):
    global _default_solver
    _default_solver = solver


def solve(problem: LpProblem, tolerance: float = DEFAULT_TOLERANCE, solver=None) -> LpSolution:
    """Solve with the given backend (default backend if None)."""
    backend = solver if solver is not None else get_default_solver()
    return backend.solve(problem, tolerance)
