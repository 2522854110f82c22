"""Linear-program container and solvers.

Two interchangeable backends sit behind ``solve``: a self-contained dense
revised simplex with Bland's anti-cycling rule (exact enough for desk-scale
models and fully deterministic), and scipy's HiGHS interface for larger
instances.  ``backend="auto"`` picks by model size.

Dual values follow one convention for both senses and backends: at an optimal
solution, sum(duals[i] * rhs[i]) equals the objective value.
"""

import re
from dataclasses import dataclass, field

import numpy as np

# builtin simplex is dense; beyond this many rows/columns switch to HiGHS
_AUTO_ROWS = 300
_AUTO_COLS = 600


class LpError(Exception):
    pass


class LpNumericalError(LpError):
    """The solver could not reach a numerically trustworthy answer."""


@dataclass
class LpModel:
    minimize: bool = True
    names: list[str] = field(default_factory=list)
    free: list[bool] = field(default_factory=list)
    obj: dict[int, float] = field(default_factory=dict)
    # each constraint: (coefficients [(var, coef), ...], relation, rhs)
    cons: list[tuple[list[tuple[int, float]], str, float]] = field(default_factory=list)

    def add_var(self, name: str, free: bool = False, obj: float = 0.0) -> int:
        idx = len(self.names)
        self.names.append(name)
        self.free.append(free)
        if obj != 0.0:
            self.obj[idx] = obj
        return idx

    def add_obj(self, var: int, coef: float) -> None:
        self.obj[var] = self.obj.get(var, 0.0) + coef

    def add_constraint(self, coeffs, rel: str, rhs: float) -> int:
        if rel not in ("<=", ">=", "="):
            raise LpError(f"unknown relation {rel!r}")
        self.cons.append((list(coeffs), rel, rhs))
        return len(self.cons) - 1

    @property
    def num_vars(self) -> int:
        return len(self.names)


@dataclass
class LpSolution:
    status: str                       # "optimal" | "infeasible" | "unbounded"
    objective: float | None = None
    x: np.ndarray | None = None
    duals: np.ndarray | None = None   # per constraint; duals @ rhs == objective

    def value(self, var: int) -> float:
        return float(self.x[var])


def solve(model: LpModel, feas_tol: float = 1e-9, opt_tol: float = 1e-9,
          backend: str = "auto") -> LpSolution:
    """Solve the model; deterministic for a fixed model and backend choice."""
    if backend == "auto":
        backend = ("builtin"
                   if len(model.cons) <= _AUTO_ROWS and model.num_vars <= _AUTO_COLS
                   else "highs")
    if backend == "builtin":
        return _solve_builtin(model, feas_tol, opt_tol)
    if backend == "highs":
        return _solve_highs(model, feas_tol, opt_tol)
    raise LpError(f"unknown backend {backend!r}")


# ---------------------------------------------------------------------------
# built-in dense revised simplex, two phases, Bland pivoting
# ---------------------------------------------------------------------------

_PIVOT_TOL = 1e-9
_RED_TOL = 1e-9


def _standard_form(model: LpModel):
    """Rewrite as min c.x, A x = b, x >= 0; returns the index bookkeeping."""
    n = model.num_vars
    col_pos = list(range(n))
    col_neg = {}
    ncols = n
    for i in range(n):
        if model.free[i]:
            col_neg[i] = ncols
            ncols += 1
    nslack = sum(1 for _, rel, _ in model.cons if rel != "=")
    m = len(model.cons)
    A = np.zeros((m, ncols + nslack))
    b = np.zeros(m)
    row_sign = np.ones(m)
    c = np.zeros(ncols + nslack)
    sense = 1.0 if model.minimize else -1.0
    for i, v in model.obj.items():
        c[col_pos[i]] = sense * v
        if i in col_neg:
            c[col_neg[i]] = -sense * v
    slack_at = ncols
    for r, (coeffs, rel, rhs) in enumerate(model.cons):
        for i, v in coeffs:
            A[r, col_pos[i]] += v
            if i in col_neg:
                A[r, col_neg[i]] -= v
        if rel == "<=":
            A[r, slack_at] = 1.0
            slack_at += 1
        elif rel == ">=":
            A[r, slack_at] = -1.0
            slack_at += 1
        b[r] = rhs
        if b[r] < 0.0:
            A[r] *= -1.0
            b[r] *= -1.0
            row_sign[r] = -1.0
    return A, b, c, row_sign, col_pos, col_neg


def _refactor(A, basis):
    B = A[:, basis]
    try:
        return np.linalg.inv(B)
    except np.linalg.LinAlgError as exc:
        raise LpNumericalError("singular basis") from exc


def _simplex_phase(A, b, c, basis, B_inv, max_pivots):
    """Bland-rule primal simplex from a feasible basis; mutates basis."""
    m, _ = A.shape
    pivots = 0
    while True:
        pivots += 1
        if pivots > max_pivots:
            raise LpNumericalError("pivot limit exceeded")
        if pivots % 200 == 0:
            B_inv = _refactor(A, basis)
        y = c[basis] @ B_inv
        red = c - y @ A
        red[basis] = 0.0
        candidates = np.nonzero(red < -_RED_TOL)[0]
        if candidates.size == 0:
            return "optimal", basis, B_inv
        enter = int(candidates[0])  # Bland: lowest index
        d = B_inv @ A[:, enter]
        rows = np.nonzero(d > _PIVOT_TOL)[0]
        if rows.size == 0:
            return "unbounded", basis, B_inv
        xB = np.maximum(B_inv @ b, 0.0)
        ratios = xB[rows] / d[rows]
        rmin = ratios.min()
        ties = rows[ratios <= rmin + 1e-10 * (1.0 + abs(rmin))]
        leave_pos = min(ties, key=lambda r: basis[r])  # Bland: lowest leaving var
        # eta update of the basis inverse
        piv = d[leave_pos]
        B_inv[leave_pos] /= piv
        for r in range(m):
            if r != leave_pos and d[r] != 0.0:
                B_inv[r] -= d[r] * B_inv[leave_pos]
        basis[leave_pos] = enter


def _solve_builtin(model: LpModel, feas_tol: float, opt_tol: float) -> LpSolution:
    A, b, c, row_sign, col_pos, col_neg = _standard_form(model)
    m, n_struct = A.shape
    max_pivots = 50000 + 100 * (m + n_struct)

    # phase 1: artificial identity basis
    A1 = np.hstack([A, np.eye(m)])
    c1 = np.concatenate([np.zeros(n_struct), np.ones(m)])
    basis = list(range(n_struct, n_struct + m))
    B_inv = np.eye(m)
    status, basis, B_inv = _simplex_phase(A1, b, c1, basis, B_inv, max_pivots)
    if status != "optimal":
        raise LpNumericalError("phase 1 did not terminate at an optimum")
    B_inv = _refactor(A1, basis)
    infeas = float(c1[basis] @ (B_inv @ b))
    if infeas > 1e-8 * (1.0 + float(np.abs(b).sum())):
        return LpSolution(status="infeasible")

    # drive artificials out of the basis; drop rows that turn out redundant
    redundant = []
    for pos in range(m):
        if basis[pos] < n_struct:
            continue
        row = B_inv[pos] @ A
        pivot_col = -1
        for j in range(n_struct):
            if abs(row[j]) > 1e-9 and j not in basis:
                pivot_col = j
                break
        if pivot_col < 0:
            redundant.append(pos)
            continue
        d = B_inv @ A1[:, pivot_col]
        piv = d[pos]
        B_inv[pos] /= piv
        for r in range(m):
            if r != pos and d[r] != 0.0:
                B_inv[r] -= d[r] * B_inv[pos]
        basis[pos] = pivot_col
    if redundant:
        keep = [r for r in range(m) if r not in set(redundant)]
        A = A[keep]
        b = b[keep]
        row_kept = keep
        basis = [basis[p] for p in range(m) if p not in set(redundant)]
        m = len(keep)
    else:
        row_kept = list(range(m))

    # phase 2 on structural columns only
    B_inv = _refactor(A, basis)
    status, basis, B_inv = _simplex_phase(A, b, c, basis, B_inv, max_pivots)
    if status == "unbounded":
        return LpSolution(status="unbounded")

    B_inv = _refactor(A, basis)
    xB = B_inv @ b
    x_std = np.zeros(n_struct)
    x_std[basis] = xB
    resid = float(np.abs(A @ x_std - b).max()) if m else 0.0
    if resid > max(feas_tol, 1e-9) * (1.0 + float(np.abs(b).max(initial=0.0))):
        raise LpNumericalError(f"feasibility residual {resid:g} too large")

    nvars = model.num_vars
    x = np.empty(nvars)
    for i in range(nvars):
        x[i] = x_std[col_pos[i]]
        if i in col_neg:
            x[i] -= x_std[col_neg[i]]
    obj_int = float(c @ x_std)
    sense = 1.0 if model.minimize else -1.0
    y = c[basis] @ B_inv
    duals = np.zeros(len(model.cons))
    for k, r in enumerate(row_kept):
        duals[r] = sense * row_sign[r] * y[k]
    return LpSolution(status="optimal", objective=sense * obj_int, x=x, duals=duals)


# ---------------------------------------------------------------------------
# HiGHS backend (scipy.optimize.linprog)
# ---------------------------------------------------------------------------

def _solve_highs(model: LpModel, feas_tol: float, opt_tol: float) -> LpSolution:
    from scipy.optimize import linprog
    from scipy.sparse import csr_matrix

    n = model.num_vars
    sense = 1.0 if model.minimize else -1.0
    c = np.zeros(n)
    for i, v in model.obj.items():
        c[i] = sense * v
    bounds = [(None, None) if f else (0.0, None) for f in model.free]

    ub_rows, ub_cols, ub_vals, ub_rhs, ub_origin = [], [], [], [], []
    eq_rows, eq_cols, eq_vals, eq_rhs, eq_origin = [], [], [], [], []
    ub_sign = []
    for ci, (coeffs, rel, rhs) in enumerate(model.cons):
        if rel == "=":
            r = len(eq_rhs)
            for i, v in coeffs:
                eq_rows.append(r)
                eq_cols.append(i)
                eq_vals.append(v)
            eq_rhs.append(rhs)
            eq_origin.append(ci)
        else:
            sgn = 1.0 if rel == "<=" else -1.0
            r = len(ub_rhs)
            for i, v in coeffs:
                ub_rows.append(r)
                ub_cols.append(i)
                ub_vals.append(sgn * v)
            ub_rhs.append(sgn * rhs)
            ub_origin.append(ci)
            ub_sign.append(sgn)

    kw = {}
    if ub_rhs:
        kw["A_ub"] = csr_matrix((ub_vals, (ub_rows, ub_cols)), shape=(len(ub_rhs), n))
        kw["b_ub"] = np.asarray(ub_rhs)
    if eq_rhs:
        kw["A_eq"] = csr_matrix((eq_vals, (eq_rows, eq_cols)), shape=(len(eq_rhs), n))
        kw["b_eq"] = np.asarray(eq_rhs)
    res = linprog(
        c, bounds=bounds, method="highs",
        options={
            "presolve": True,
            "primal_feasibility_tolerance": max(feas_tol, 1e-10),
            "dual_feasibility_tolerance": max(opt_tol, 1e-10),
        },
        **kw,
    )
    if res.status == 2:
        return LpSolution(status="infeasible")
    if res.status == 3:
        return LpSolution(status="unbounded")
    if res.status != 0:
        raise LpNumericalError(f"HiGHS failed: {res.message}")

    duals = np.zeros(len(model.cons))
    if eq_rhs:
        for r, ci in enumerate(eq_origin):
            duals[ci] = sense * float(res.eqlin.marginals[r])
    if ub_rhs:
        for r, ci in enumerate(ub_origin):
            duals[ci] = sense * ub_sign[r] * float(res.ineqlin.marginals[r])
    return LpSolution(status="optimal", objective=sense * float(res.fun),
                      x=np.asarray(res.x), duals=duals)


# ---------------------------------------------------------------------------
# LP text dump for external cross-checking
# ---------------------------------------------------------------------------

def _clean_name(name: str, idx: int) -> str:
    return f"x{idx}_" + re.sub(r"[^A-Za-z0-9_]", "_", name)[:180]


def dump_lp(model: LpModel, fh) -> None:
    """Write the model in CPLEX LP text format."""
    names = [_clean_name(nm, i) for i, nm in enumerate(model.names)]

    def terms(coeffs):
        if not coeffs:
            return f"0 {names[0]}"
        return " ".join(f"{'+' if v >= 0 else '-'} {abs(v):.17g} {names[i]}"
                        for i, v in coeffs)

    fh.write("\\ dppsolve model dump\n")
    fh.write("Minimize\n" if model.minimize else "Maximize\n")
    fh.write(" obj: " + terms(sorted(model.obj.items())) + "\n")
    fh.write("Subject To\n")
    for r, (coeffs, rel, rhs) in enumerate(model.cons):
        op = {"<=": "<=", ">=": ">=", "=": "="}[rel]
        fh.write(f" c{r}: " + terms(coeffs) + f" {op} {rhs:.17g}\n")
    free = [names[i] for i in range(model.num_vars) if model.free[i]]
    if free:
        fh.write("Bounds\n")
        for nm in free:
            fh.write(f" {nm} free\n")
    fh.write("End\n")
