"""Dense two-phase simplex for desk-scale linear programs.

Minimizes ``c @ x`` subject to rows ``a @ x (<=|=|>=) b`` with every variable
bounded below by 0 and unbounded above.  The solver is deterministic: Dantzig
pricing (most negative reduced cost, lowest index on ties) with an automatic
switch to Bland's rule while the objective stalls, which rules out cycling.
Ratio-test ties are broken by the lowest basic-variable index.

On optimal termination the basis is re-factorized from the original data,
which removes accumulated pivot drift and yields a dual vector.  The dual is
a weak-duality certificate: it is feasible for the dual program and its
objective matches the primal optimum (see :func:`certificate_errors`).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import DynflError

_STALL_LIMIT = 32
_PIVOT_TOL = 1e-9
_FEAS_TOL = 1e-7


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class Relation(str, enum.Enum):
    LE = "<="
    EQ = "="
    GE = ">="


class PivotLimitError(DynflError):
    """The simplex loop exceeded its iteration cap."""


@dataclass(frozen=True)
class LinearProgram:
    """``min c @ x`` s.t. ``A[r] @ x (senses[r]) b[r]``, ``x >= 0``."""

    c: np.ndarray
    A: np.ndarray
    senses: tuple
    b: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=np.float64)
        A = np.asarray(self.A, dtype=np.float64)
        b = np.asarray(self.b, dtype=np.float64)
        if A.ndim != 2 or A.shape != (b.size, c.size):
            raise ValueError(f"A must have shape (len(b), len(c)), got {A.shape}")
        senses = tuple(Relation(s) for s in self.senses)
        if len(senses) != b.size:
            raise ValueError("one sense per constraint row required")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise ValueError("LP coefficients must be finite")
        for name, val in (("c", c), ("A", A), ("b", b)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)
        object.__setattr__(self, "senses", senses)

    @property
    def num_vars(self) -> int:
        return self.c.size

    @property
    def num_rows(self) -> int:
        return self.b.size


@dataclass(frozen=True)
class LpSolution:
    status: LpStatus
    values: np.ndarray | None
    objective_value: float | None
    dual: np.ndarray | None = None
    iterations: int = 0


def _pivot(T: np.ndarray, p: int, q: int, obj: np.ndarray | None) -> None:
    T[p] /= T[p, q]
    factors = T[:, q].copy()
    factors[p] = 0.0
    T -= np.outer(factors, T[p])
    if obj is not None:
        obj -= obj[q] * T[p]
        obj[q] = 0.0
    T[:, q] = 0.0
    T[p, q] = 1.0


def _run_simplex(T, basis, obj, bland_only, max_iter):
    """Iterate to optimality; returns ('optimal'|'unbounded', iterations)."""
    stall = 0
    best = obj[-1]
    basis_arr = np.asarray(basis)
    for it in range(max_iter):
        red = obj[:-1]
        if bland_only or stall >= _STALL_LIMIT:
            cand = np.flatnonzero(red < -_PIVOT_TOL)
            if cand.size == 0:
                return "optimal", it
            q = int(cand[0])
        else:
            q = int(np.argmin(red))
            if red[q] >= -_PIVOT_TOL:
                return "optimal", it
        col = T[:, q]
        pos = col > _PIVOT_TOL
        if not np.any(pos):
            return "unbounded", it
        ratios = np.full(T.shape[0], np.inf)
        ratios[pos] = T[pos, -1] / col[pos]
        rmin = ratios.min()
        ties = np.flatnonzero(ratios <= rmin + 1e-9)
        basis_arr = np.asarray(basis)
        p = int(ties[np.argmin(basis_arr[ties])])
        _pivot(T, p, q, obj)
        basis[p] = q
        if obj[-1] > best + 1e-9:
            best = obj[-1]
            stall = 0
        else:
            stall += 1
    raise PivotLimitError(f"simplex did not terminate within {max_iter} pivots")


def solve_lp(lp: LinearProgram, pivot_rule: str = "dantzig-bland",
             max_iterations: int | None = None) -> LpSolution:
    """Solve to proven optimality, or report Infeasible/Unbounded.

    ``pivot_rule`` is ``"dantzig-bland"`` (default hybrid) or ``"bland"``
    (lowest-index pricing throughout).  Identical inputs yield identical
    outputs.
    """
    if pivot_rule not in ("dantzig-bland", "bland"):
        raise ValueError(f"unknown pivot rule {pivot_rule!r}")
    bland_only = pivot_rule == "bland"
    n, k = lp.num_vars, lp.num_rows
    if max_iterations is None:
        max_iterations = max(20_000, 50 * (n + 2 * k))

    A = lp.A.copy()
    b = lp.b.copy()
    senses = list(lp.senses)
    row_sign = np.ones(k)
    for r in range(k):
        if b[r] < 0:
            A[r] *= -1.0
            b[r] *= -1.0
            row_sign[r] = -1.0
            if senses[r] is Relation.LE:
                senses[r] = Relation.GE
            elif senses[r] is Relation.GE:
                senses[r] = Relation.LE

    slack_rows = [r for r in range(k) if senses[r] is not Relation.EQ]
    art_rows = [r for r in range(k) if senses[r] is not Relation.LE]
    n_slack, n_art = len(slack_rows), len(art_rows)
    total = n + n_slack + n_art

    T = np.zeros((k, total + 1))
    T[:, :n] = A
    T[:, -1] = b
    basis = [-1] * k
    for idx, r in enumerate(slack_rows):
        T[r, n + idx] = 1.0 if senses[r] is Relation.LE else -1.0
        if senses[r] is Relation.LE:
            basis[r] = n + idx
    art_start = n + n_slack
    for idx, r in enumerate(art_rows):
        T[r, art_start + idx] = 1.0
        basis[r] = art_start + idx

    iterations = 0
    if n_art:
        obj1 = np.zeros(total + 1)
        obj1[art_start:art_start + n_art] = 1.0
        for r in art_rows:
            obj1 -= T[r]
        outcome, its = _run_simplex(T, basis, obj1, bland_only, max_iterations)
        iterations += its
        if outcome == "unbounded":  # cannot happen: phase-1 objective >= 0
            raise DynflError("phase-1 simplex reported unbounded")
        scale = max(1.0, float(np.abs(b).max(initial=0.0)))
        if -obj1[-1] > _FEAS_TOL * scale:
            return LpSolution(status=LpStatus.INFEASIBLE, values=None,
                              objective_value=None, iterations=iterations)
        # Drive leftover artificials out of the basis; drop redundant rows.
        redundant = []
        for r in range(k):
            if basis[r] >= art_start:
                row = T[r, :art_start]
                nz = np.flatnonzero(np.abs(row) > _FEAS_TOL)
                if nz.size:
                    _pivot(T, r, int(nz[0]), None)
                    basis[r] = int(nz[0])
                else:
                    redundant.append(r)
        keep = [r for r in range(k) if r not in set(redundant)]
        T = T[keep]
        basis = [basis[r] for r in keep]
    else:
        keep = list(range(k))
    T = np.hstack([T[:, :art_start], T[:, -1:]])

    c_ext = np.concatenate([lp.c, np.zeros(n_slack)])
    obj2 = np.concatenate([c_ext, [0.0]])
    if T.shape[0]:
        obj2 -= c_ext[np.asarray(basis)] @ T
    outcome, its = _run_simplex(T, basis, obj2, bland_only, max_iterations)
    iterations += its
    if outcome == "unbounded":
        return LpSolution(status=LpStatus.UNBOUNDED, values=None,
                          objective_value=None, iterations=iterations)

    # Re-factorize the optimal basis from the original data: cleans pivot
    # drift and produces the dual certificate in one shot.
    A_std = np.zeros((k, n + n_slack))
    A_std[:, :n] = A
    for idx, r in enumerate(slack_rows):
        A_std[r, n + idx] = 1.0 if senses[r] is Relation.LE else -1.0
    A_work = A_std[keep]
    b_work = b[keep]
    basis_idx = np.asarray(basis, dtype=int)
    B = A_work[:, basis_idx]
    x_basic = np.linalg.solve(B, b_work)
    y_work = np.linalg.solve(B.T, c_ext[basis_idx])
    x_std = np.zeros(n + n_slack)
    x_std[basis_idx] = x_basic
    values = x_std[:n].copy()
    objective = float(lp.c @ values)

    dual = np.zeros(k)
    dual[np.asarray(keep, dtype=int)] = y_work
    dual *= row_sign  # undo row negations so duals refer to the input rows

    sol = LpSolution(status=LpStatus.OPTIMAL, values=values,
                     objective_value=objective, dual=dual, iterations=iterations)
    err = certificate_errors(lp, sol)
    scale = max(1.0, float(np.abs(lp.b).max(initial=0.0)), abs(objective))
    if max(err.primal, err.dual, err.gap) > _FEAS_TOL * scale:
        raise DynflError(
            f"optimal basis failed verification (primal={err.primal:.3g}, "
            f"dual={err.dual:.3g}, gap={err.gap:.3g})")
    return sol


@dataclass(frozen=True)
class CertificateErrors:
    """Worst-case violations of the optimality certificate.

    ``primal``: constraint/bound violation of the returned point.
    ``dual``: dual-feasibility violation of the returned dual vector
    (columnwise ``A.T @ y <= c`` plus sign conditions per relation).
    ``gap``: ``|b @ y - c @ x|``, zero at a certified optimum.
    """

    primal: float
    dual: float
    gap: float


def certificate_errors(lp: LinearProgram, sol: LpSolution) -> CertificateErrors:
    """Measure how far an Optimal solution is from a perfect certificate."""
    if sol.status is not LpStatus.OPTIMAL:
        raise ValueError("certificate is only defined for Optimal solutions")
    x, y = sol.values, sol.dual
    ax = lp.A @ x
    primal = max(0.0, float(-x.min(initial=0.0)))
    for r, sense in enumerate(lp.senses):
        resid = ax[r] - lp.b[r]
        if sense is Relation.LE:
            primal = max(primal, resid)
        elif sense is Relation.GE:
            primal = max(primal, -resid)
        else:
            primal = max(primal, abs(resid))
    reduced = lp.A.T @ y - lp.c
    dual = max(0.0, float(reduced.max(initial=0.0)))
    for r, sense in enumerate(lp.senses):
        if sense is Relation.LE:
            dual = max(dual, y[r])
        elif sense is Relation.GE:
            dual = max(dual, -y[r])
    gap = abs(float(lp.b @ y) - float(sol.objective_value))
    return CertificateErrors(primal=float(primal), dual=float(dual), gap=gap)


def lp_text(lp: LinearProgram, names: Sequence[str] | None = None) -> str:
    """Render in the common LP interchange format for external cross-checks."""
    if names is None:
        names = [f"v{i}" for i in range(lp.num_vars)]
    if len(names) != lp.num_vars:
        raise ValueError("one name per variable required")

    def terms(coeffs):
        parts = []
        for i, c in enumerate(coeffs):
            if c == 0.0:
                continue
            sign = "-" if c < 0 else "+"
            parts.append(f"{sign} {abs(c):.17g} {names[i]}")
        if not parts:
            return f"0 {names[0]}"
        first = parts[0]
        first = first[2:] if first.startswith("+ ") else "-" + first[2:]
        return " ".join([first] + parts[1:])

    lines = ["Minimize", f" obj: {terms(lp.c)}", "Subject To"]
    for r in range(lp.num_rows):
        lines.append(f" c{r}: {terms(lp.A[r])} {lp.senses[r].value} {lp.b[r]:.17g}")
    lines += ["Bounds"] + [f" 0 <= {nm}" for nm in names] + ["End", ""]
    return "\n".join(lines)


def write_lp_text(lp: LinearProgram, path, names: Sequence[str] | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(lp_text(lp, names))
