from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from ..instance import AnyInstance, Sense
from ..utils import Serialize, decode_float


class Status(Enum):
    INFEASIBLE = 'infeasible'
    UNBOUNDED = 'unbounded'
    OPTIMAL = 'optimal'


@dataclass
class SolveResult(Serialize):
    """Outcome of a QP oracle.

    ``value`` and ``x_star`` are present iff the status is OPTIMAL. For continuous instances
    ``x_star`` is the minimum-norm optimum; for mixed-integer instances it is the optimum of
    smallest norm, ties broken lexicographically. ``certificate`` holds a recession direction
    along which an UNBOUNDED objective decreases.
    """
    status: Status
    value: Optional[float] = None
    x_star: Optional[np.ndarray] = None
    kkt_residual: float = 0.0
    certificate: Optional[np.ndarray] = None
    nodes: int = 0
    solutions: Optional[List[np.ndarray]] = None

    __serialize_fields__ = 'status', 'value', 'x_star', 'kkt_residual', 'certificate', 'nodes', 'solutions'

    def _deserialize(self):
        self.status = Status(self.status)
        if self.value is not None:
            self.value = decode_float(self.value)
        self.kkt_residual = decode_float(self.kkt_residual)
        for name in ('x_star', 'certificate'):
            v = getattr(self, name)
            if v is not None:
                setattr(self, name, np.array([decode_float(x) for x in v]))
        if self.solutions is not None:
            self.solutions = [np.array(s, dtype=float) for s in self.solutions]

    @property
    def is_optimal(self) -> bool:
        return self.status is Status.OPTIMAL


def row_bounds(instance: AnyInstance) -> Tuple[np.ndarray, np.ndarray]:
    "lo <= Ax <= hi form of the constraint rows"
    base = instance.base
    lo = np.full(base.m, -np.inf)
    hi = np.full(base.m, np.inf)
    for i, s in enumerate(base.senses):
        if s is not Sense.GE:
            hi[i] = base.b[i]
        if s is not Sense.LE:
            lo[i] = base.b[i]
    return lo, hi


def stacked_constraints(instance: AnyInstance) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """The rows of A followed by one identity row per variable bound.

    Returns:
        (M, lo, hi) with the feasible set {x : lo <= M x <= hi}
    """
    base = instance.base
    lo, hi = row_bounds(instance)
    M = np.vstack([base.A_dense, np.eye(base.n)])
    return M, np.concatenate([lo, base.l]), np.concatenate([hi, base.u])


def inequality_form(instance: AnyInstance) -> Dict[str, Any]:
    "Keyword arguments for solve_lp / lp_phase1 describing the feasible set of an instance"
    base = instance.base
    A = base.A_dense
    ub_rows, ub_rhs, eq_rows, eq_rhs = [], [], [], []
    for i, s in enumerate(base.senses):
        if s is Sense.LE:
            ub_rows.append(A[i]); ub_rhs.append(base.b[i])
        elif s is Sense.GE:
            ub_rows.append(-A[i]); ub_rhs.append(-base.b[i])
        else:
            eq_rows.append(A[i]); eq_rhs.append(base.b[i])
    n = base.n
    return dict(
        A_ub=np.array(ub_rows).reshape(-1, n), b_ub=np.array(ub_rhs),
        A_eq=np.array(eq_rows).reshape(-1, n), b_eq=np.array(eq_rhs),
        lo=np.array(base.l), hi=np.array(base.u),
    )
