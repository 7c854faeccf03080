"""Target labels (feasibility, optimal value, optimal solution) of an instance, and their
sidecar documents stored next to instance files.
"""
import json
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..instance import AnyInstance
from ..options import SolverOptions
from ..utils import FS, Serialize, decode_float, logger
from .branch_and_bound import solve_milcqp
from .common import SolveResult, Status
from .lcqp import solve_lcqp

LABEL_SUFFIX = '.label.json'


@dataclass
class TargetLabels(Serialize):
    """feas is 0 exactly when obj is +inf; sol is present exactly when obj is finite.

    Unbounded instances are feasible: they are labeled feas=1, obj=-inf.
    """
    feas: int
    obj: float
    sol: Optional[np.ndarray] = None

    __serialize_fields__ = 'feas', 'obj', 'sol'

    def __post_init__(self):
        if (self.feas == 0) != (self.obj == np.inf):
            raise ValueError("feas=%r is inconsistent with obj=%r" % (self.feas, self.obj))
        if (self.sol is not None) != bool(np.isfinite(self.obj)):
            raise ValueError("A solution is present exactly when the objective is finite")

    def _deserialize(self):
        self.obj = decode_float(self.obj)
        if self.sol is not None:
            self.sol = np.array([decode_float(v) for v in self.sol])

    @classmethod
    def from_result(cls, result: SolveResult) -> 'TargetLabels':
        if result.status is Status.INFEASIBLE:
            return cls(0, np.inf)
        if result.status is Status.UNBOUNDED:
            return cls(1, -np.inf)
        return cls(1, float(result.value), np.array(result.x_star, dtype=float))


def evaluate_targets(instance: AnyInstance, options: Optional[SolverOptions] = None) -> TargetLabels:
    "Labels from the exact oracle that fits the instance: branch-and-bound if it has integer variables"
    solve = solve_milcqp if instance.integer_set else solve_lcqp
    return TargetLabels.from_result(solve(instance, options))


def label_path(instance_path: str) -> str:
    root, ext = os.path.splitext(instance_path)
    return (root if ext == '.json' else instance_path) + LABEL_SUFFIX


def write_label(result: SolveResult, instance_path: str) -> str:
    path = label_path(instance_path)
    with FS.open(path, 'w') as f:
        f.write(result.dumps())
    logger.debug("Wrote %s label to %s", result.status.value, path)
    return path


def read_label(instance_path: str) -> Optional[SolveResult]:
    "The cached result for an instance file, or None if there is none"
    path = label_path(instance_path)
    if not FS.exists(path):
        return None
    with FS.open(path) as f:
        return SolveResult.deserialize(json.load(f))
