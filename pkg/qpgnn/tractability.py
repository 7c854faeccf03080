"""MP-tractability and unfoldability of QP graphs, and the block averaging they rest on.

A graph is MP-tractable when, on its stable partition (I, J), every block of A (over I_p x J_q)
and every block of Q (over J_q x J_q') has identical entries, absent edges counting as zero.
It is unfoldable when every block of J is a singleton.
"""
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .exceptions import ConfigurationError
from .graph import QPGraph, VertexPermutation, check_same_size, disjoint_union, permute
from .options import RefineOptions
from .refinement import Partition, StablePartition, WLVariant, stable_partition, _until_stable, _halves_match
from .utils import Serialize, logger

# (matrix name, row block, column block, first entry (row, col, value), differing entry (row, col, value))
Witness = Tuple[str, int, int, Tuple[int, int, float], Tuple[int, int, float]]


@dataclass(frozen=True)
class TractabilityReport(Serialize):
    mp_tractable: bool
    unfoldable: bool
    witness: Optional[Witness]
    partition: StablePartition

    __serialize_fields__ = 'mp_tractable', 'unfoldable', 'witness', 'partition'
    __serialize_namespace__ = StablePartition,


def _nonconstant_block(M: np.ndarray, rows: Partition, cols: Partition, name: str) -> Optional[Witness]:
    for p, R in enumerate(rows):
        for q, C in enumerate(cols):
            block = M[np.ix_(R, C)]
            first = block.flat[0]
            diff = np.argwhere(block != first)
            if len(diff):
                a, b = diff[0]
                return (name, p, q, (R[0], C[0], float(first)), (R[a], C[b], float(block[a, b])))
    return None


def classify(graph: QPGraph, options: Optional[RefineOptions] = None) -> TractabilityReport:
    """Classifies a graph on its stable partition under multiset refinement.

    Entries are compared exactly.
    """
    partition = stable_partition(graph, WLVariant.MILCQP_MULTISET, options)
    A = graph.A.toarray()
    Q = graph.Q.toarray()
    witness = (_nonconstant_block(A, partition.I, partition.J, 'A')
               or _nonconstant_block(Q, partition.J, partition.J, 'Q'))
    unfoldable = len(partition.J) == graph.n
    if unfoldable and witness is not None:
        # Cannot happen for a collision-free refinement
        logger.error("Unfoldable graph %r has non-constant block %r", graph, witness)
    return TractabilityReport(witness is None, unfoldable, witness, partition)


def _check_partition(J: Sequence[Sequence[int]], n: int) -> None:
    members = sorted(j for block in J for j in block)
    if members != list(range(n)) or any(len(block) == 0 for block in J):
        raise ConfigurationError("Malformed partition: blocks must be non-empty, disjoint, and cover 0..%d" % (n - 1))


def partition_average(x: np.ndarray, J: Sequence[Sequence[int]]) -> np.ndarray:
    "Replaces every entry of x by the mean over its block of J"
    x = np.asarray(x, dtype=float)
    _check_partition(J, len(x))
    out = np.empty_like(x)
    for block in J:
        idx = list(block)
        out[idx] = np.mean(x[idx])
    return out


def partition_matrix(J: Sequence[Sequence[int]], n: int) -> np.ndarray:
    "The n x t indicator matrix of a partition"
    _check_partition(J, n)
    P = np.zeros((n, len(J)))
    for q, block in enumerate(J):
        P[list(block), q] = 1.0
    return P


def compatible_partition_matrix(n: int, J: Sequence[Sequence[int]], rng: np.random.Generator, rank: Optional[int] = None) -> np.ndarray:
    """A random PSD matrix M whose block row sums sum_{j' in J_q'} M[j, j'] are constant over j in J_q.

    M = P D P^T + Z Z^T, where P is the indicator matrix of J, D is a random PSD t x t matrix, and
    the columns of Z are random vectors with zero mean on every block, so that Z^T P = 0.
    """
    P = partition_matrix(J, n)
    t = P.shape[1]
    R = rng.standard_normal((t, t))
    D = R @ R.T
    G = rng.standard_normal((n, rank if rank is not None else n))
    projector = P @ np.linalg.solve(P.T @ P, P.T)
    Z = G - projector @ G
    M = P @ D @ P.T + Z @ Z.T
    return (M + M.T) / 2


def block_row_sums_constant(M: np.ndarray, J: Sequence[Sequence[int]], tol: float = 1e-9) -> bool:
    S = M @ partition_matrix(J, M.shape[0])
    scale = max(1.0, float(np.max(np.abs(S))))
    return all(np.all(np.abs(S[list(block)] - S[block[0]]) <= tol * scale) for block in J)


def find_isomorphism(g1: QPGraph, g2: QPGraph, options: Optional[RefineOptions] = None) -> Optional[VertexPermutation]:
    """For WL-equivalent MP-tractable graphs, the relabeling of g2 that reproduces g1.

    Vertices are matched class by class of the stable coloring of the disjoint union, in index order
    within each class. The result is checked, so a returned permutation is always an isomorphism:
    ``permute(g2, result) == g1``. Returns None when the graphs are not both MP-tractable, are told
    apart by refinement, or the matching fails the check.
    """
    check_same_size(g1, g2)
    if not (classify(g1, options).mp_tractable and classify(g2, options).mp_tractable):
        return None

    m, n = g1.m, g1.n
    colorings = _until_stable(disjoint_union(g1, g2), WLVariant.MILCQP_MULTISET, options or RefineOptions())
    if not all(_halves_match(c, m, n) for c in colorings):
        return None
    final = colorings[-1]

    def align(colors: Sequence[int], size: int) -> Tuple[int, ...]:
        sigma = [0] * size
        for color in set(colors[:size]):
            left = [k for k in range(size) if colors[k] == color]
            right = [k for k in range(size) if colors[size + k] == color]
            for a, b in zip(left, right):
                sigma[b] = a
        return tuple(sigma)

    perm = VertexPermutation(align(final.colors_V, m), align(final.colors_W, n))
    if permute(g2, perm) != g1:
        logger.debug("Class-aligned matching of %r and %r is not an isomorphism", g1, g2)
        return None
    return perm
