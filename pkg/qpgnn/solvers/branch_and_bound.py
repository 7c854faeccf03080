"""Exact mixed-integer solving by best-first branch-and-bound over continuous relaxations,
and a brute-force enumerator used as an independent reference.

Among optimal solutions, the reported one has the smallest 2-norm, then is smallest
lexicographically. Both oracles apply the same order, so their answers can be compared directly.
"""
import heapq
import itertools
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import EnumerationLimitError, InstanceError, SearchIncomplete, SolverError
from ..instance import (AnyInstance, LCQPInstance, MILCQPInstance, constraint_violation, objective,
                        validate, with_bounds)
from ..options import SolverOptions
from ..utils import logger
from .common import SolveResult, Status, inequality_form
from .lcqp import solve_lcqp
from .simplex import lp_phase1

VALUE_TOL = 1e-7
ORDER_TOL = 1e-9


def _same_value(a: float, b: float) -> bool:
    return abs(a - b) <= VALUE_TOL * max(1.0, abs(a), abs(b))


def prefer(value: float, x: np.ndarray, best_value: float, best_x: np.ndarray) -> bool:
    "True if (value, x) comes strictly before (best_value, best_x) in the solution order"
    if not _same_value(value, best_value):
        return value < best_value
    na, nb = np.linalg.norm(x), np.linalg.norm(best_x)
    if abs(na - nb) > ORDER_TOL:
        return na < nb
    for a, b in zip(x, best_x):
        if abs(a - b) > ORDER_TOL:
            return a < b
    return False


def _check_valid(instance: AnyInstance, options: SolverOptions) -> None:
    report = validate(instance, options.eps_psd)
    if not report.ok:
        raise InstanceError("Cannot solve an invalid instance:\n%s" % report, report)


def _integer_ranges(instance: MILCQPInstance, options: SolverOptions) -> Tuple[List[int], np.ndarray, np.ndarray]:
    "Integer variables with their bounds rounded inward"
    ints = sorted(instance.integer_set)
    l = np.array(instance.base.l)
    u = np.array(instance.base.u)
    l[ints] = np.ceil(l[ints] - options.int_tol)
    u[ints] = np.floor(u[ints] + options.int_tol)
    return ints, l, u


def _fixed_subproblem(instance: MILCQPInstance, ints: Sequence[int], values: np.ndarray,
                      options: SolverOptions, l: Optional[np.ndarray] = None,
                      u: Optional[np.ndarray] = None) -> SolveResult:
    """Solves the continuous problem left after fixing x[ints] = values.

    The returned x_star and value refer to the full variable vector.
    """
    base = instance.base
    l = base.l if l is None else l
    u = base.u if u is None else u
    n = base.n
    fixed = np.zeros(n, dtype=bool)
    fixed[list(ints)] = True
    free = ~fixed

    x = np.zeros(n)
    x[fixed] = values
    if not free.any():
        if constraint_violation(base, x) <= options.eps_feas:
            return SolveResult(Status.OPTIMAL, objective(base, x), x, 0.0)
        return SolveResult(Status.INFEASIBLE)

    Q = base.Q_dense
    A = base.A_dense
    x_I = x[fixed]
    reduced = LCQPInstance.create(
        Q[np.ix_(free, free)],
        base.c[free] + Q[np.ix_(free, fixed)] @ x_I,
        A[:, free],
        base.b - A[:, fixed] @ x_I,
        base.senses,
        l[free],
        u[free],
    )
    res = solve_lcqp(reduced, options)
    if res.status is Status.INFEASIBLE:
        return res
    if res.status is Status.UNBOUNDED:
        d = np.zeros(n)
        d[free] = res.certificate
        return SolveResult(Status.UNBOUNDED, certificate=d)
    x[free] = res.x_star
    return SolveResult(Status.OPTIMAL, objective(base, x), x, res.kkt_residual)


def _search(instance: MILCQPInstance, options: SolverOptions, first_feasible: bool = False) -> SolveResult:
    ints, l0, u0 = _integer_ranges(instance, options)
    if np.any(l0 > u0):
        return SolveResult(Status.INFEASIBLE)
    base = instance.base

    best: Optional[SolveResult] = None
    counter = itertools.count()
    heap = [(-np.inf, next(counter), l0, u0)]
    nodes = 0

    def accept(candidate: SolveResult) -> None:
        nonlocal best
        if candidate.status is Status.OPTIMAL and (
                best is None or prefer(candidate.value, candidate.x_star, best.value, best.x_star)):
            best = candidate
            logger.debug("B&B node %d: incumbent %.10g", nodes, best.value)

    def push(bound: float, lo: np.ndarray, hi: np.ndarray) -> None:
        heapq.heappush(heap, (bound, next(counter), lo, hi))

    def dominated(bound: float) -> bool:
        return best is not None and bound > best.value and not _same_value(bound, best.value)

    while heap:
        bound, _, lo, hi = heapq.heappop(heap)
        if dominated(bound):
            break
        if nodes >= options.node_limit:
            raise SearchIncomplete(nodes, None if best is None else best.value)
        nodes += 1

        if np.all(lo[ints] == hi[ints]):
            leaf = _fixed_subproblem(instance, ints, lo[ints], options, lo, hi)
            if leaf.status is Status.UNBOUNDED:
                leaf.nodes = nodes
                return leaf
            accept(leaf)
            if first_feasible and best is not None:
                break
            continue

        res = solve_lcqp(with_bounds(base, lo, hi), options)
        if res.status is Status.INFEASIBLE:
            continue

        if res.status is Status.UNBOUNDED:
            if not (np.all(np.isfinite(lo[ints])) and np.all(np.isfinite(hi[ints]))):
                raise SolverError("Relaxation is unbounded and an integer variable has an infinite bound; "
                                  "cannot decide unboundedness by splitting")
            j = next(j for j in ints if lo[j] < hi[j])
            mid = np.floor((lo[j] + hi[j]) / 2)
            _split(push, -np.inf, lo, hi, j, mid, mid + 1)
            continue

        if dominated(res.value):
            continue
        x = res.x_star
        frac = np.abs(x[ints] - np.round(x[ints]))
        if np.max(frac) <= options.int_tol:
            rounded = np.round(x[ints])
            accept(_fixed_subproblem(instance, ints, rounded, options, lo, hi))
            if first_feasible and best is not None:
                break
            # Other assignments in this box may tie in value; split off the one just found
            j = next(j for j in ints if lo[j] < hi[j])
            v = float(np.round(x[j]))
            lo_eq, hi_eq = lo.copy(), hi.copy()
            lo_eq[j] = hi_eq[j] = v
            push(res.value, lo_eq, hi_eq)
            if lo[j] <= v - 1:
                hi_left = hi.copy()
                hi_left[j] = v - 1
                push(res.value, lo.copy(), hi_left)
            if v + 1 <= hi[j]:
                lo_right = lo.copy()
                lo_right[j] = v + 1
                push(res.value, lo_right, hi.copy())
            continue

        k = int(np.argmax(frac * (lo[ints] < hi[ints])))
        j = ints[k]
        _split(push, res.value, lo, hi, j, np.floor(x[j]), np.ceil(x[j]))

    logger.debug("B&B finished after %d nodes", nodes)
    if best is None:
        return SolveResult(Status.INFEASIBLE, nodes=nodes)
    best.nodes = nodes
    return best


def _split(push, bound, lo, hi, j, left_hi, right_lo) -> None:
    hi_left = hi.copy()
    hi_left[j] = min(hi[j], left_hi)
    lo_right = lo.copy()
    lo_right[j] = max(lo[j], right_lo)
    if lo[j] <= hi_left[j]:
        push(bound, lo.copy(), hi_left)
    if lo_right[j] <= hi[j]:
        push(bound, lo_right, hi.copy())


def solve_milcqp(instance: AnyInstance, options: Optional[SolverOptions] = None) -> SolveResult:
    """Exact optimum of a mixed-integer instance.

    Nodes are explored best-bound first, branching on the most fractional integer variable.
    Subtrees whose bound ties the incumbent are still explored, so the reported solution is the
    first optimal one in the solution order.

    Raises:
        InstanceError: the instance does not validate
        SearchIncomplete: more than ``options.node_limit`` nodes would be needed
    """
    options = options or SolverOptions()
    if not instance.integer_set:
        return solve_lcqp(instance, options)
    _check_valid(instance, options)
    return _search(instance, options)


def _zero_objective(instance: MILCQPInstance) -> MILCQPInstance:
    base = instance.base
    n = base.n
    return MILCQPInstance(LCQPInstance.create(np.zeros((n, n)), np.zeros(n), base.A_dense, base.b,
                                              base.senses, base.l, base.u, base.meta), instance.integer_set)


def is_mi_feasible(instance: AnyInstance, options: Optional[SolverOptions] = None) -> bool:
    "Whether the constraint set contains a point that is integral on the integer variables"
    options = options or SolverOptions()
    _check_valid(instance, options)
    if not instance.integer_set:
        return lp_phase1(instance.base.n, options=options, **inequality_form(instance)) is not None
    res = _search(_zero_objective(instance), options, first_feasible=True)
    return res.status is not Status.INFEASIBLE


def brute_force_milcqp(instance: AnyInstance, options: Optional[SolverOptions] = None,
                       collect_ties: bool = False) -> SolveResult:
    """Solves every integer assignment's continuous subproblem and keeps the best.

    With ``collect_ties``, ``solutions`` lists every optimal solution (one per assignment whose
    value ties the optimum).

    Raises:
        SolverError: an integer variable has an infinite bound
        EnumerationLimitError: there are more than ``options.enum_limit`` assignments
    """
    options = options or SolverOptions()
    if not instance.integer_set:
        return solve_lcqp(instance, options)
    _check_valid(instance, options)

    ints, l, u = _integer_ranges(instance, options)
    if not (np.all(np.isfinite(l[ints])) and np.all(np.isfinite(u[ints]))):
        raise SolverError("Enumeration needs finite bounds on every integer variable")
    ranges = [range(int(l[j]), int(u[j]) + 1) for j in ints]
    count = 1
    for r in ranges:
        count *= len(r)
    if count > options.enum_limit:
        raise EnumerationLimitError(count, options.enum_limit)

    optimal: List[SolveResult] = []
    best: Optional[SolveResult] = None
    for k, values in enumerate(itertools.product(*ranges), 1):
        res = _fixed_subproblem(instance, ints, np.array(values, dtype=float), options)
        if res.status is Status.UNBOUNDED:
            res.nodes = k
            return res
        if res.status is Status.OPTIMAL:
            optimal.append(res)
            if best is None or prefer(res.value, res.x_star, best.value, best.x_star):
                best = res

    if best is None:
        return SolveResult(Status.INFEASIBLE, nodes=count)
    best.nodes = count
    if collect_ties:
        best.solutions = [r.x_star for r in optimal if _same_value(r.value, best.value)]
    return best
