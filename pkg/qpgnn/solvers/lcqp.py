"""Exact-status solving of continuous instances.

The pipeline is
  1. feasibility by LP phase 1,
  2. unboundedness by an LP over the recession cone restricted to the null space of Q,
  3. one optimum x_bar by operator splitting,
  4. the minimum-norm optimum over {x feasible : Q x = Q x_bar, c^T x = c^T x_bar}, which is the
     whole optimal set since Q is PSD. Step 4 is skipped when Q is nonsingular.
"""
from typing import Optional, Tuple

import numpy as np
from scipy import optimize

from ..exceptions import InstanceError, SolverError
from ..instance import AnyInstance, LCQPInstance, Sense, constraint_violation, objective, validate
from ..options import SolverOptions
from ..utils import logger
from .admm import admm_qp
from .common import SolveResult, Status, inequality_form, stacked_constraints
from .simplex import lp_phase1, solve_lp


def _spectral_split(Q: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    "Orthonormal bases (U, N) of the range and the null space of a PSD matrix"
    lam, V = np.linalg.eigh(Q)
    tol = 1e-9 * max(1.0, float(np.max(np.abs(lam), initial=0.0)))
    return V[:, lam > tol], V[:, lam <= tol]


def recession_direction(instance: LCQPInstance, N: np.ndarray, options: SolverOptions) -> Optional[np.ndarray]:
    """A direction d = N z in the recession cone of the feasible set with c^T d < 0, if one exists.

    Directions are normalized to the box -1 <= d <= 1, which makes the LP bounded.
    """
    base = instance.base
    c_N = N.T @ base.c
    if np.linalg.norm(c_N) <= 1e-12 * (1 + np.linalg.norm(base.c)):
        return None

    A = base.A_dense @ N
    ub, eq = [], []
    for i, s in enumerate(base.senses):
        if s is Sense.LE:
            ub.append(A[i])
        elif s is Sense.GE:
            ub.append(-A[i])
        else:
            eq.append(A[i])
    for j in range(base.n):
        if np.isfinite(base.l[j]):
            ub.append(-N[j])
        if np.isfinite(base.u[j]):
            ub.append(N[j])
    k = N.shape[1]
    A_ub = np.vstack([np.array(ub).reshape(-1, k), N, -N])
    b_ub = np.concatenate([np.zeros(len(ub)), np.ones(2 * base.n)])
    A_eq = np.array(eq).reshape(-1, k)
    res = solve_lp(c_N, A_ub, b_ub, A_eq, np.zeros(len(eq)), options=options)
    if res.status is not Status.OPTIMAL:
        raise SolverError("Recession LP ended with status %s" % res.status.value)
    if res.value < -1e-9 * max(1.0, float(np.max(np.abs(base.c)))):
        return N @ res.x
    return None


def kkt_residual(instance: AnyInstance, x: np.ndarray, y: Optional[np.ndarray] = None,
                 options: Optional[SolverOptions] = None) -> float:
    """Largest violation among stationarity, primal feasibility, dual sign and complementarity.

    ``y`` holds one multiplier per row of A followed by one per variable bound, with the sign
    convention Q x + c + A^T y_A + y_B = 0. Without ``y``, multipliers are recovered from the rows
    active at x by nonnegative least squares.
    """
    options = options or SolverOptions()
    base = instance.base
    M, lo, hi = stacked_constraints(instance)
    x = np.asarray(x, dtype=float)
    g = base.Q @ x + base.c
    r = M @ x
    if y is None:
        y = _recover_duals(M, lo, hi, r, g, options)

    stationarity = float(np.max(np.abs(g + M.T @ y), initial=0.0))
    primal = constraint_violation(base, x)
    dual_sign = float(np.max(np.concatenate([
        np.where(np.isinf(lo), np.maximum(-y, 0), 0.0),
        np.where(np.isinf(hi), np.maximum(y, 0), 0.0),
    ]), initial=0.0))
    with np.errstate(invalid='ignore'):
        comp_lo = np.where(np.isfinite(lo), np.abs(np.minimum(y, 0) * (r - lo)), 0.0)
        comp_hi = np.where(np.isfinite(hi), np.abs(np.maximum(y, 0) * (hi - r)), 0.0)
    complementarity = float(np.max(np.concatenate([comp_lo, comp_hi]), initial=0.0))
    return max(stationarity, primal, dual_sign, complementarity)


def _recover_duals(M, lo, hi, r, g, options: SolverOptions) -> np.ndarray:
    tol = 10 * options.eps_feas
    at_lo = np.isfinite(lo) & (np.abs(r - lo) <= tol * (1 + np.abs(np.where(np.isfinite(lo), lo, 0))))
    at_hi = np.isfinite(hi) & (np.abs(hi - r) <= tol * (1 + np.abs(np.where(np.isfinite(hi), hi, 0))))
    # y_i >= 0 at upper bounds, y_i <= 0 at lower bounds: columns +a_i and -a_i with nonnegative weights
    cols, owners = [], []
    for i in np.flatnonzero(at_hi):
        cols.append(M[i]); owners.append((i, 1.0))
    for i in np.flatnonzero(at_lo):
        cols.append(-M[i]); owners.append((i, -1.0))
    y = np.zeros(M.shape[0])
    if not cols:
        return y
    weights, _ = optimize.nnls(np.array(cols).T, -g)
    for (i, sign), w in zip(owners, weights):
        y[i] += sign * w
    return y


def solve_lcqp(instance: AnyInstance, options: Optional[SolverOptions] = None) -> SolveResult:
    """Solves the continuous instance (integrality, if any, is ignored).

    Raises:
        InstanceError: the instance does not validate
        IterationLimitError: an iterative stage did not converge
        SolverError: the computed optimum fails its feasibility or KKT check
    """
    options = options or SolverOptions()
    base = instance.base
    report = validate(base, options.eps_psd)
    if not report.ok:
        raise InstanceError("Cannot solve an invalid instance:\n%s" % report, report)

    if lp_phase1(base.n, options=options, **inequality_form(base)) is None:
        return SolveResult(Status.INFEASIBLE)

    Q = base.Q_dense
    U, N = _spectral_split(Q)
    if N.shape[1]:
        d = recession_direction(base, N, options)
        if d is not None:
            logger.debug("Unbounded along %s", d)
            return SolveResult(Status.UNBOUNDED, certificate=d)

    M, lo, hi = stacked_constraints(base)
    stage1 = admm_qp(Q, base.c, M, lo, hi, options)
    x_bar, y = stage1.x, stage1.y

    x_star = x_bar
    if N.shape[1]:
        c_N = N @ (N.T @ base.c)
        rows = [M, U.T]
        lo2 = [lo, U.T @ x_bar]
        hi2 = [hi, U.T @ x_bar]
        if np.linalg.norm(c_N) > 1e-12 * (1 + np.linalg.norm(base.c)):
            rows.append(c_N[None, :])
            lo2.append([c_N @ x_bar])
            hi2.append([c_N @ x_bar])
        stage2 = admm_qp(np.eye(base.n), np.zeros(base.n), np.vstack(rows),
                         np.concatenate(lo2), np.concatenate(hi2), options, x0=x_bar)
        x_star = stage2.x

    residual = kkt_residual(base, x_star, y, options)
    violation = constraint_violation(base, x_star)
    if violation > options.eps_feas or residual > options.eps_kkt:
        raise SolverError("Optimum failed verification: violation %.3g, KKT residual %.3g" % (violation, residual))
    return SolveResult(Status.OPTIMAL, objective(base, x_star), x_star, residual)
