"""Linearly constrained quadratic programs

    min  1/2 x^T Q x + c^T x
    s.t. A x (<=, =, >=) b,   l <= x <= u

and their mixed-integer extension, where a subset of the variables must take integer values.

Indices are 0-based throughout the package.
"""
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Any, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import sparse

from .exceptions import ConfigurationError, DimensionMismatchError
from .utils import logger


class Sense(Enum):
    LE = '<='
    EQ = '='
    GE = '>='

    @classmethod
    def from_token(cls, token: Union[str, 'Sense']) -> 'Sense':
        if isinstance(token, Sense):
            return token
        try:
            return cls(token)
        except ValueError:
            raise ConfigurationError("Unknown constraint sense %r, expected one of %s"
                                     % (token, [s.value for s in cls]))

    def __repr__(self):
        return 'Sense.%s' % self.name


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def _canonical_sparse(M: Any, shape: Tuple[int, int]) -> sparse.csr_array:
    "CSR with sorted indices and no stored zeros; row-major triplet order follows directly"
    if sparse.issparse(M):
        S = sparse.csr_array(M, dtype=float)
    else:
        S = sparse.csr_array(np.asarray(M, dtype=float).reshape(shape))
    if S.shape != shape:
        raise DimensionMismatchError("Expected a %dx%d matrix, got %dx%d" % (shape + S.shape))
    S.sum_duplicates()
    S.eliminate_zeros()
    S.sort_indices()
    return S


@dataclass(frozen=True, eq=False)
class LCQPInstance:
    """A continuous instance. Immutable after construction, safe to share across threads.

    Use ``LCQPInstance.create`` to build one from arrays or nested lists.
    """
    Q: sparse.csr_array
    c: np.ndarray
    A: sparse.csr_array
    b: np.ndarray
    senses: Tuple[Sense, ...]
    l: np.ndarray
    u: np.ndarray
    meta: Mapping[str, Any] = field(default_factory=dict)

    @classmethod
    def create(cls, Q, c, A, b, senses: Iterable[Union[str, Sense]], l=None, u=None,
               meta: Optional[Mapping[str, Any]] = None) -> 'LCQPInstance':
        c = np.array(c, dtype=float).reshape(-1)
        n = len(c)
        b = np.array(b, dtype=float).reshape(-1)
        m = len(b)
        senses = tuple(Sense.from_token(s) for s in senses)
        if len(senses) != m:
            raise DimensionMismatchError("Got %d senses for %d constraints" % (len(senses), m))
        l = np.full(n, -np.inf) if l is None else np.array(l, dtype=float).reshape(-1)
        u = np.full(n, np.inf) if u is None else np.array(u, dtype=float).reshape(-1)
        if len(l) != n or len(u) != n:
            raise DimensionMismatchError("Bounds must have length n=%d" % n)
        return cls(
            _canonical_sparse(Q, (n, n)),
            _frozen(c),
            _canonical_sparse(A if m else np.zeros((0, n)), (m, n)),
            _frozen(b),
            senses,
            _frozen(l),
            _frozen(u),
            dict(meta or {}),
        )

    @property
    def n(self) -> int:
        return len(self.c)

    @property
    def m(self) -> int:
        return len(self.b)

    @property
    def integer_set(self) -> FrozenSet[int]:
        return frozenset()

    @property
    def base(self) -> 'LCQPInstance':
        return self

    @cached_property
    def Q_dense(self) -> np.ndarray:
        return _frozen(self.Q.toarray())

    @cached_property
    def A_dense(self) -> np.ndarray:
        return _frozen(self.A.toarray())

    def q_triplets(self, upper: bool = False) -> List[Tuple[int, int, float]]:
        "Nonzeros of Q in row-major order, optionally only the upper triangle"
        Qc = self.Q.tocoo()
        return sorted((int(i), int(j), float(v)) for i, j, v in zip(Qc.row, Qc.col, Qc.data)
                      if not upper or i <= j)

    def a_triplets(self) -> List[Tuple[int, int, float]]:
        Ac = self.A.tocoo()
        return sorted((int(i), int(j), float(v)) for i, j, v in zip(Ac.row, Ac.col, Ac.data))

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, LCQPInstance) or isinstance(other, MILCQPInstance) != isinstance(self, MILCQPInstance):
            return NotImplemented
        return (self.q_triplets() == other.q_triplets()
                and self.a_triplets() == other.a_triplets()
                and np.array_equal(self.c, other.c)
                and np.array_equal(self.b, other.b)
                and self.senses == other.senses
                and np.array_equal(self.l, other.l)
                and np.array_equal(self.u, other.u))

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self):
        return '%s(m=%d, n=%d)' % (type(self).__name__, self.m, self.n)


@dataclass(frozen=True, eq=False)
class MILCQPInstance:
    """An instance whose variables in ``integer_set`` must be integral.

    Attribute access not defined here (Q, c, A, ...) is delegated to ``base``.
    """
    base: LCQPInstance
    integer_set: FrozenSet[int]

    @classmethod
    def create(cls, Q, c, A, b, senses, l=None, u=None, integer_set: Iterable[int] = (),
               meta: Optional[Mapping[str, Any]] = None) -> 'MILCQPInstance':
        return cls(LCQPInstance.create(Q, c, A, b, senses, l, u, meta), frozenset(int(j) for j in integer_set))

    def __getattr__(self, name: str) -> Any:
        if name == 'base':
            raise AttributeError(name)
        return getattr(self.base, name)

    @property
    def integer_mask(self) -> np.ndarray:
        mask = np.zeros(self.base.n, dtype=bool)
        mask[sorted(self.integer_set)] = True
        return mask

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, MILCQPInstance):
            return NotImplemented
        return self.integer_set == other.integer_set and self.base == other.base

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self):
        return 'MILCQPInstance(m=%d, n=%d, |I|=%d)' % (self.base.m, self.base.n, len(self.integer_set))


AnyInstance = Union[LCQPInstance, MILCQPInstance]


@dataclass(frozen=True)
class ValidationReport:
    violations: Tuple[Tuple[str, str], ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def rules(self) -> List[str]:
        return [rule for rule, _ in self.violations]

    def __str__(self):
        if self.ok:
            return 'ok'
        return '\n'.join('%s: %s' % v for v in self.violations)


Q_NOT_SYMMETRIC = "Q not symmetric"
Q_NOT_PSD = "Q not PSD"
BOUNDS_CROSSED = "l > u"
BAD_BOUND = "invalid bound"
NOT_FINITE = "non-finite coefficient"
DIMENSIONS = "dimension mismatch"
INTEGER_SET = "integer index out of range"


def smallest_eigenvalue(Q: np.ndarray) -> float:
    if Q.shape[0] == 0:
        return 0.0
    return float(np.linalg.eigvalsh((Q + Q.T) / 2)[0])


def validate(instance: AnyInstance, eps_psd: float = 1e-8) -> ValidationReport:
    """Checks every instance invariant. Violations are returned as data, never raised.

    Positive semidefiniteness is accepted when the smallest eigenvalue of Q is at least
    ``-eps_psd * ||Q||_F``.
    """
    base = instance.base
    n, m = base.n, base.m
    violations: List[Tuple[str, str]] = []

    if base.Q.shape != (n, n) or base.A.shape != (m, n) or len(base.senses) != m \
            or len(base.l) != n or len(base.u) != n:
        violations.append((DIMENSIONS, "Q %s, A %s, %d senses, %d/%d bounds for m=%d n=%d"
                           % (base.Q.shape, base.A.shape, len(base.senses), len(base.l), len(base.u), m, n)))
        return ValidationReport(tuple(violations))

    for name, values in (('Q', base.Q.data), ('c', base.c), ('A', base.A.data), ('b', base.b)):
        if not np.all(np.isfinite(values)):
            violations.append((NOT_FINITE, "%s contains NaN or infinite entries" % name))

    Qd = base.Q_dense
    if not np.array_equal(Qd, Qd.T):
        i, j = np.argwhere(Qd != Qd.T)[0]
        violations.append((Q_NOT_SYMMETRIC, "Q[%d,%d]=%r but Q[%d,%d]=%r" % (i, j, Qd[i, j], j, i, Qd[j, i])))
    if np.all(np.isfinite(Qd)):
        lam = smallest_eigenvalue(Qd)
        fro = float(np.linalg.norm(Qd))
        if lam < -eps_psd * fro:
            violations.append((Q_NOT_PSD, "smallest eigenvalue %.6g < -%.1g * ||Q||_F" % (lam, eps_psd)))

    if np.any(np.isnan(base.l)) or np.any(np.isnan(base.u)) or np.any(base.l == np.inf) or np.any(base.u == -np.inf):
        violations.append((BAD_BOUND, "lower bounds must be in R or -inf, upper bounds in R or +inf"))
    crossed = np.flatnonzero(base.l > base.u)
    if len(crossed):
        j = crossed[0]
        violations.append((BOUNDS_CROSSED, "l[%d]=%r > u[%d]=%r" % (j, base.l[j], j, base.u[j])))

    bad = [j for j in instance.integer_set if not 0 <= j < n]
    if bad:
        violations.append((INTEGER_SET, "indices %s not in 0..%d" % (sorted(bad), n - 1)))

    report = ValidationReport(tuple(violations))
    if not report.ok:
        logger.debug("Instance %r failed validation: %s", instance, report)
    return report


def objective(instance: AnyInstance, x: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    base = instance.base
    return float(0.5 * x @ (base.Q @ x) + base.c @ x)


def constraint_violation(instance: AnyInstance, x: np.ndarray) -> float:
    "Largest violation of a row, a bound, or (for mixed-integer instances) integrality"
    x = np.asarray(x, dtype=float)
    base = instance.base
    worst = 0.0
    if base.m:
        r = base.A @ x - base.b
        for ri, s in zip(r, base.senses):
            if s is Sense.LE:
                worst = max(worst, ri)
            elif s is Sense.GE:
                worst = max(worst, -ri)
            else:
                worst = max(worst, abs(ri))
    if base.n:
        worst = max(worst, float(np.max(base.l - x)), float(np.max(x - base.u)))
    for j in instance.integer_set:
        worst = max(worst, abs(x[j] - np.round(x[j])))
    return worst


def is_feasible(instance: AnyInstance, x: np.ndarray, tol: float = 1e-7) -> bool:
    return constraint_violation(instance, x) <= tol


def relax(instance: AnyInstance) -> LCQPInstance:
    "Drops integrality"
    return instance.base


def with_bounds(instance: AnyInstance, l: np.ndarray, u: np.ndarray) -> AnyInstance:
    base = instance.base
    new_base = LCQPInstance(base.Q, base.c, base.A, base.b, base.senses,
                            _frozen(np.array(l, dtype=float)), _frozen(np.array(u, dtype=float)), base.meta)
    if isinstance(instance, MILCQPInstance):
        return MILCQPInstance(new_base, instance.integer_set)
    return new_base


def check_permutation(sigma: Sequence[int], size: int, name: str) -> np.ndarray:
    sigma = np.asarray(sigma, dtype=int)
    if len(sigma) != size:
        raise DimensionMismatchError("%s has length %d, expected %d" % (name, len(sigma), size))
    if size and not np.array_equal(np.sort(sigma), np.arange(size)):
        raise ConfigurationError("%s is not a permutation of 0..%d" % (name, size - 1))
    return sigma


def apply_permutation(instance: AnyInstance, sigma_V: Sequence[int], sigma_W: Sequence[int]) -> AnyInstance:
    """Relabels constraint i as sigma_V[i] and variable j as sigma_W[j].
    """
    base = instance.base
    sV = check_permutation(sigma_V, base.m, 'sigma_V')
    sW = check_permutation(sigma_W, base.n, 'sigma_W')
    inv_V = np.argsort(sV)
    inv_W = np.argsort(sW)
    new_base = LCQPInstance.create(
        base.Q_dense[np.ix_(inv_W, inv_W)],
        base.c[inv_W],
        base.A_dense[np.ix_(inv_V, inv_W)],
        base.b[inv_V],
        [base.senses[i] for i in inv_V],
        base.l[inv_W],
        base.u[inv_W],
        base.meta,
    )
    if isinstance(instance, MILCQPInstance):
        return MILCQPInstance(new_base, frozenset(int(sW[j]) for j in instance.integer_set))
    return new_base
