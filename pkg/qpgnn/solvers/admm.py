"""Operator splitting for convex QPs in the form

    min 1/2 x^T P x + q^T x   s.t.  lo <= A x <= hi

Each iteration solves one linear system with the fixed matrix P + sigma I + A^T diag(rho) A,
projects onto the box [lo, hi], and takes an over-relaxed dual step. Every ``polish_every``
iterations the active set is guessed from the iterates and the equality-constrained KKT system
on it is solved directly; when the result checks out it replaces the iterate and the solve ends.

Dual variables y follow the sign convention P x + q + A^T y = 0, with y_i <= 0 on rows at their
lower bound and y_i >= 0 on rows at their upper bound.
"""
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import linalg

from ..exceptions import DimensionMismatchError, IterationLimitError
from ..options import SolverOptions
from ..utils import logger

RHO_MIN = 1e-6
RHO_MAX = 1e6
RHO_EQ_SCALE = 1e3
POLISH_DELTA = 1e-7
POLISH_REFINE_ITER = 5


@dataclass
class ADMMResult:
    x: np.ndarray
    y: np.ndarray
    iterations: int
    polished: bool
    prim_res: float
    dual_res: float


def _rho_vector(lo: np.ndarray, hi: np.ndarray, rho: float) -> np.ndarray:
    r = np.full(len(lo), rho)
    r[np.isinf(lo) & np.isinf(hi)] = RHO_MIN
    r[lo == hi] = RHO_EQ_SCALE * rho
    return r


def _factor(P: np.ndarray, A: np.ndarray, rho: np.ndarray, sigma: float):
    K = P + sigma * np.eye(P.shape[0]) + A.T @ (rho[:, None] * A)
    return linalg.cho_factor(K)


def _residuals(P, q, A, x, z, y) -> Tuple[float, float, float, float]:
    Ax = A @ x
    Px = P @ x
    Aty = A.T @ y
    prim = float(np.max(np.abs(Ax - z), initial=0.0))
    dual = float(np.max(np.abs(Px + q + Aty), initial=0.0))
    prim_scale = max(float(np.max(np.abs(Ax), initial=0.0)), float(np.max(np.abs(z), initial=0.0)))
    dual_scale = max(float(np.max(np.abs(Px), initial=0.0)), float(np.max(np.abs(Aty), initial=0.0)),
                     float(np.max(np.abs(q), initial=0.0)))
    return prim, dual, prim_scale, dual_scale


def violation(A: np.ndarray, lo: np.ndarray, hi: np.ndarray, x: np.ndarray) -> float:
    Ax = A @ x
    return float(np.max(np.maximum(lo - Ax, Ax - hi), initial=0.0))


def polish(P, q, A, lo, hi, z, y, options: SolverOptions) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    """Solves the KKT system on the active set guessed from (z, y).

    Returns (x, y) if the solution is primal feasible, stationary, and has dual multipliers of the
    right sign, otherwise None.
    """
    n = P.shape[0]
    eq = lo == hi
    lower = ~eq & (z - lo < -y)
    upper = ~eq & ~lower & (hi - z < y)
    active = eq | lower | upper
    bound = np.where(upper, hi, lo)[active]
    A_act = A[active]
    k = A_act.shape[0]

    K_reg = np.block([[P + POLISH_DELTA * np.eye(n), A_act.T], [A_act, -POLISH_DELTA * np.eye(k)]])
    K = np.block([[P, A_act.T], [A_act, np.zeros((k, k))]])
    rhs = np.concatenate([-q, bound])
    lu = linalg.lu_factor(K_reg)
    sol = linalg.lu_solve(lu, rhs)
    for _ in range(POLISH_REFINE_ITER):
        sol += linalg.lu_solve(lu, rhs - K @ sol)

    x = sol[:n]
    y_full = np.zeros(len(lo))
    y_full[active] = sol[n:]

    if not np.all(np.isfinite(x)):
        return None
    tol_d = 0.1 * options.eps_kkt
    if violation(A, lo, hi, x) > 0.1 * options.eps_feas:
        return None
    if np.max(np.abs(P @ x + q + A.T @ y_full), initial=0.0) > tol_d:
        return None
    if np.any(y_full[lower] > tol_d) or np.any(y_full[upper] < -tol_d):
        return None
    return x, y_full


def admm_qp(P, q, A, lo, hi, options: Optional[SolverOptions] = None,
            x0: Optional[np.ndarray] = None, y0: Optional[np.ndarray] = None) -> ADMMResult:
    """Solves a feasible, bounded convex QP.

    Raises ``IterationLimitError`` when neither the iteration nor the polish reaches the
    tolerances within ``options.admm_max_iter`` iterations.
    """
    options = options or SolverOptions()
    P = np.asarray(P, dtype=float)
    q = np.asarray(q, dtype=float)
    A = np.asarray(A, dtype=float)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    n = len(q)
    if P.shape != (n, n) or A.shape[1] != n or len(lo) != A.shape[0] or len(hi) != A.shape[0]:
        raise DimensionMismatchError("Inconsistent QP data: P %s, q %d, A %s, bounds %d/%d"
                                     % (P.shape, n, A.shape, len(lo), len(hi)))

    sigma, alpha = options.admm_sigma, options.admm_alpha
    eps = options.gap_tol
    rho_scale = options.admm_rho
    rho = _rho_vector(lo, hi, rho_scale)
    factor = _factor(P, A, rho, sigma)

    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    z = np.clip(A @ x, lo, hi)
    y = np.zeros(A.shape[0]) if y0 is None else np.array(y0, dtype=float)

    prim = dual = np.inf
    for it in range(1, options.admm_max_iter + 1):
        x_t = linalg.cho_solve(factor, sigma * x - q + A.T @ (rho * z - y))
        z_t = A @ x_t
        x = alpha * x_t + (1 - alpha) * x
        z_relax = alpha * z_t + (1 - alpha) * z
        z_new = np.clip(z_relax + y / rho, lo, hi)
        y = y + rho * (z_relax - z_new)
        z = z_new

        prim, dual, prim_scale, dual_scale = _residuals(P, q, A, x, z, y)
        if prim <= eps * (1 + prim_scale) and dual <= eps * (1 + dual_scale):
            return ADMMResult(x, y, it, False, prim, dual)

        if it % options.polish_every == 0:
            polished = polish(P, q, A, lo, hi, z, y, options)
            if polished is not None:
                px, py = polished
                p_prim = violation(A, lo, hi, px)
                p_dual = float(np.max(np.abs(P @ px + q + A.T @ py), initial=0.0))
                return ADMMResult(px, py, it, True, p_prim, p_dual)

            # Rebalance the step size when one residual lags far behind the other
            ratio = np.sqrt((prim / max(prim_scale, 1e-12)) / max(dual / max(dual_scale, 1e-12), 1e-30))
            if ratio > 5 or ratio < 0.2:
                new_scale = float(np.clip(rho_scale * ratio, RHO_MIN, RHO_MAX))
                if new_scale != rho_scale:
                    rho_scale = new_scale
                    rho = _rho_vector(lo, hi, rho_scale)
                    factor = _factor(P, A, rho, sigma)

        if it % options.log_every == 0:
            logger.debug("ADMM iteration %d: primal residual %.3g, dual residual %.3g, rho %.3g",
                         it, prim, dual, rho_scale)

    if prim <= options.eps_feas and dual <= options.eps_kkt:
        logger.warning("ADMM reached its iteration limit (%d); accepting residuals %.3g / %.3g",
                       options.admm_max_iter, prim, dual)
        return ADMMResult(x, y, options.admm_max_iter, False, prim, dual)
    raise IterationLimitError('admm', options.admm_max_iter, max(prim, dual))
