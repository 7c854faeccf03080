"""Dense two-phase simplex for small linear programs

    min c^T x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  lo <= x <= hi

Pivoting follows Bland's rule, so the method terminates on degenerate problems.
"""
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from ..exceptions import DimensionMismatchError, IterationLimitError
from ..options import SolverOptions
from ..utils import logger
from .common import Status

PIVOT_TOL = 1e-9


@dataclass
class LPResult:
    status: Status
    x: Optional[np.ndarray] = None
    value: Optional[float] = None
    iterations: int = 0
    ray: Optional[np.ndarray] = None


class _StandardForm:
    """The problem rewritten as min c^T y s.t. A y = b, y >= 0, with x = offset + T y.

    Columns of T are +e_j (finite lower bound), -e_j (only an upper bound), or a pair of
    both (free variable). Finite upper bounds of lower-bounded variables become rows.
    Inequality rows receive slack columns.
    """

    def __init__(self, c, A_ub, b_ub, A_eq, b_eq, lo, hi):
        n = len(lo)
        cols: List[Tuple[int, float]] = []
        offset = np.zeros(n)
        extra: List[Tuple[int, float]] = []
        for j in range(n):
            if np.isfinite(lo[j]):
                offset[j] = lo[j]
                cols.append((j, 1.0))
                if np.isfinite(hi[j]):
                    extra.append((len(cols) - 1, hi[j] - lo[j]))
            elif np.isfinite(hi[j]):
                offset[j] = hi[j]
                cols.append((j, -1.0))
            else:
                cols.append((j, 1.0))
                cols.append((j, -1.0))

        T = np.zeros((n, len(cols)))
        for k, (j, sign) in enumerate(cols):
            T[j, k] = sign
        self.T = T
        self.offset = offset

        A_ub = np.asarray(A_ub, dtype=float).reshape(-1, n)
        A_eq = np.asarray(A_eq, dtype=float).reshape(-1, n)
        N = len(cols)
        ub = A_ub @ T
        rhs_ub = np.asarray(b_ub, dtype=float) - A_ub @ offset
        for k, width in extra:
            row = np.zeros(N)
            row[k] = 1.0
            ub = np.vstack([ub, row])
            rhs_ub = np.append(rhs_ub, width)
        eq = A_eq @ T
        rhs_eq = np.asarray(b_eq, dtype=float) - A_eq @ offset

        r_ub, r_eq = len(rhs_ub), len(rhs_eq)
        self.num_structural = N
        self.A = np.zeros((r_ub + r_eq, N + r_ub))
        self.A[:r_ub, :N] = ub
        self.A[:r_ub, N:] = np.eye(r_ub)
        self.A[r_ub:, :N] = eq
        self.b = np.concatenate([rhs_ub, rhs_eq])
        flip = self.b < 0
        self.A[flip] *= -1
        self.b[flip] *= -1

        self.c = np.zeros(N + r_ub)
        self.constant = 0.0
        if c is not None:
            c = np.asarray(c, dtype=float)
            self.c[:N] = T.T @ c
            self.constant = float(c @ offset)

    def to_x(self, y: np.ndarray) -> np.ndarray:
        return self.offset + self.T @ y[:self.num_structural]


def _pivot(T: np.ndarray, r: int, s: int) -> None:
    T[r] /= T[r, s]
    col = T[:, s].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])


def _run(T: np.ndarray, basis: List[int], allowed: int, max_iter: int, phase: str) -> Tuple[Status, int, int]:
    """Pivots until no allowed column has a negative reduced cost.

    Returns:
        (status, iterations, entering column of an unbounded ray or -1)
    """
    for it in range(max_iter):
        reduced = T[-1, :allowed]
        candidates = np.flatnonzero(reduced < -PIVOT_TOL)
        if not len(candidates):
            return Status.OPTIMAL, it, -1
        s = int(candidates[0])
        col = T[:-1, s]
        rows = np.flatnonzero(col > PIVOT_TOL)
        if not len(rows):
            return Status.UNBOUNDED, it, s
        ratios = T[rows, -1] / col[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-12 * max(1.0, abs(best))]
        r = int(min(ties, key=lambda i: basis[i]))
        _pivot(T, r, s)
        basis[r] = s
    raise IterationLimitError('simplex %s' % phase, max_iter)


def _solve(c, A_ub, b_ub, A_eq, b_eq, lo, hi, options: SolverOptions) -> LPResult:
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    n = len(lo)
    if len(hi) != n or (c is not None and len(c) != n):
        raise DimensionMismatchError("Bounds and costs must all have length %d" % n)
    if np.any(lo > hi):
        return LPResult(Status.INFEASIBLE)

    sf = _StandardForm(c, A_ub, b_ub, A_eq, b_eq, lo, hi)
    R, C = sf.A.shape

    # Phase 1: one artificial column per row, minimize their sum
    T = np.zeros((R + 1, C + R + 1))
    T[:R, :C] = sf.A
    T[:R, C:C + R] = np.eye(R)
    T[:R, -1] = sf.b
    T[-1, :C] = -sf.A.sum(axis=0)
    T[-1, -1] = -sf.b.sum()
    basis = list(range(C, C + R))
    _, it1, _ = _run(T, basis, C + R, options.simplex_max_iter, 'phase 1')

    infeasibility = -T[-1, -1]
    if infeasibility > options.eps_feas * max(1.0, float(np.max(np.abs(sf.b), initial=0.0))):
        logger.debug("LP phase 1: infeasible (residual %.3g after %d pivots)", infeasibility, it1)
        return LPResult(Status.INFEASIBLE, iterations=it1)

    # Drive remaining artificials out of the basis; rows where that is impossible are redundant
    r = 0
    while r < len(basis):
        if basis[r] >= C:
            nz = np.flatnonzero(np.abs(T[r, :C]) > PIVOT_TOL)
            if len(nz):
                _pivot(T, r, int(nz[0]))
                basis[r] = int(nz[0])
            else:
                T = np.delete(T, r, axis=0)
                del basis[r]
                continue
        r += 1
    T = np.delete(T, np.s_[C:C + R], axis=1)

    if c is None:
        y = np.zeros(C)
        y[basis] = T[:-1, -1]
        return LPResult(Status.OPTIMAL, sf.to_x(y), 0.0, it1)

    # Phase 2
    T[-1, :] = 0.0
    T[-1, :C] = sf.c
    for r, k in enumerate(basis):
        T[-1] -= sf.c[k] * T[r]
    status, it2, s = _run(T, basis, C, options.simplex_max_iter, 'phase 2')

    y = np.zeros(C)
    y[basis] = T[:-1, -1]
    x = sf.to_x(y)
    if status is Status.UNBOUNDED:
        dy = np.zeros(C)
        dy[s] = 1.0
        for r, k in enumerate(basis):
            dy[k] = -T[r, s]
        return LPResult(Status.UNBOUNDED, x, None, it1 + it2, ray=sf.T @ dy[:sf.num_structural])
    return LPResult(Status.OPTIMAL, x, float(sf.c @ y) + sf.constant, it1 + it2)


def _defaults(n, A_ub, b_ub, A_eq, b_eq, lo, hi):
    empty = np.zeros((0, n))
    return (empty if A_ub is None else A_ub, np.zeros(0) if b_ub is None else b_ub,
            empty if A_eq is None else A_eq, np.zeros(0) if b_eq is None else b_eq,
            np.full(n, -np.inf) if lo is None else lo, np.full(n, np.inf) if hi is None else hi)


def solve_lp(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, lo=None, hi=None,
             options: Optional[SolverOptions] = None) -> LPResult:
    """Solves a linear program. Bounds default to free variables.

    Raises ``IterationLimitError`` if a phase exceeds ``options.simplex_max_iter`` pivots.
    """
    c = np.asarray(c, dtype=float)
    return _solve(c, *_defaults(len(c), A_ub, b_ub, A_eq, b_eq, lo, hi), options or SolverOptions())


def lp_phase1(n: int, A_ub=None, b_ub=None, A_eq=None, b_eq=None, lo=None, hi=None,
              options: Optional[SolverOptions] = None) -> Optional[np.ndarray]:
    "A feasible point, or None if the constraints are inconsistent"
    res = _solve(None, *_defaults(n, A_ub, b_ub, A_eq, b_eq, lo, hi), options or SolverOptions())
    return res.x if res.status is Status.OPTIMAL else None
