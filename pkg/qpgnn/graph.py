"""Weighted two-part graphs of LCQP / MI-LCQP instances.

Constraint nodes V carry (b_i, sense_i), variable nodes W carry (c_j, l_j, u_j) and, for
mixed-integer instances, the integrality flag. A-edges join V and W, Q-edges join variable
nodes (self-loops included). Senses and infinite bounds stay symbolic, so node features can
be compared exactly.
"""
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import sparse

from .exceptions import DimensionMismatchError, InstanceError
from .instance import AnyInstance, LCQPInstance, MILCQPInstance, Sense, validate, check_permutation

VFeature = Tuple[float, Sense]
WFeature = Tuple  # (c, l, u) or (c, l, u, delta)
Edge = Tuple[int, int, float]


class GraphKind(Enum):
    LCQP = 'lcqp'
    MILCQP = 'milcqp'


@dataclass(frozen=True)
class VertexPermutation:
    """Relabels constraint i as sigma_V[i] and variable j as sigma_W[j]"""
    sigma_V: Tuple[int, ...]
    sigma_W: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, 'sigma_V', tuple(int(i) for i in check_permutation(self.sigma_V, len(self.sigma_V), 'sigma_V')))
        object.__setattr__(self, 'sigma_W', tuple(int(j) for j in check_permutation(self.sigma_W, len(self.sigma_W), 'sigma_W')))

    @property
    def m(self) -> int:
        return len(self.sigma_V)

    @property
    def n(self) -> int:
        return len(self.sigma_W)

    @classmethod
    def identity(cls, m: int, n: int) -> 'VertexPermutation':
        return cls(tuple(range(m)), tuple(range(n)))

    @classmethod
    def random(cls, m: int, n: int, rng: np.random.Generator) -> 'VertexPermutation':
        return cls(tuple(rng.permutation(m)), tuple(rng.permutation(n)))

    @classmethod
    def swap_w(cls, m: int, n: int, j1: int, j2: int) -> 'VertexPermutation':
        w = list(range(n))
        w[j1], w[j2] = w[j2], w[j1]
        return cls(tuple(range(m)), tuple(w))

    def inverse(self) -> 'VertexPermutation':
        return VertexPermutation(tuple(np.argsort(self.sigma_V)), tuple(np.argsort(self.sigma_W)))

    def then(self, other: 'VertexPermutation') -> 'VertexPermutation':
        "Applies self, then other"
        return VertexPermutation(tuple(other.sigma_V[i] for i in self.sigma_V),
                                 tuple(other.sigma_W[j] for j in self.sigma_W))


@dataclass(frozen=True)
class QPGraph:
    kind: GraphKind
    v_features: Tuple[VFeature, ...]
    w_features: Tuple[WFeature, ...]
    a_edges: Tuple[Edge, ...]
    q_edges: Tuple[Edge, ...]

    @property
    def m(self) -> int:
        return len(self.v_features)

    @property
    def n(self) -> int:
        return len(self.w_features)

    @cached_property
    def A(self) -> sparse.csr_array:
        return _edge_matrix(self.a_edges, (self.m, self.n))

    @cached_property
    def Q(self) -> sparse.csr_array:
        return _edge_matrix(self.q_edges, (self.n, self.n))

    def __repr__(self):
        return 'QPGraph(%s, m=%d, n=%d, |E_A|=%d, |E_Q|=%d)' % (
            self.kind.value, self.m, self.n, len(self.a_edges), len(self.q_edges))


def _edge_matrix(edges: Sequence[Edge], shape: Tuple[int, int]) -> sparse.csr_array:
    if not edges:
        return sparse.csr_array(shape)
    rows, cols, vals = zip(*edges)
    return sparse.csr_array((vals, (rows, cols)), shape=shape)


def _encode(instance: AnyInstance, kind: GraphKind) -> QPGraph:
    report = validate(instance)
    if not report.ok:
        raise InstanceError("Cannot encode an invalid instance:\n%s" % report, report)
    base = instance.base
    v = tuple((float(b), s) for b, s in zip(base.b, base.senses))
    if kind is GraphKind.MILCQP:
        I = instance.integer_set
        w = tuple((float(c), float(l), float(u), int(j in I))
                  for j, (c, l, u) in enumerate(zip(base.c, base.l, base.u)))
    else:
        w = tuple((float(c), float(l), float(u)) for c, l, u in zip(base.c, base.l, base.u))
    return QPGraph(kind, v, w, tuple(base.a_triplets()), tuple(base.q_triplets()))


def encode_lcqp(instance: LCQPInstance) -> QPGraph:
    """Encodes a continuous instance. Integrality of a mixed-integer instance, if given, is dropped.

    Raises ``InstanceError`` if the instance does not validate.
    """
    return _encode(instance, GraphKind.LCQP)


def encode_milcqp(instance: MILCQPInstance) -> QPGraph:
    "Like encode_lcqp, with the integrality flag appended to every variable feature"
    if not isinstance(instance, MILCQPInstance):
        instance = MILCQPInstance(instance, frozenset())
    return _encode(instance, GraphKind.MILCQP)


def encode(instance: AnyInstance) -> QPGraph:
    if isinstance(instance, MILCQPInstance):
        return encode_milcqp(instance)
    return encode_lcqp(instance)


def decode(graph: QPGraph) -> AnyInstance:
    "Rebuilds the instance a graph was encoded from"
    base = LCQPInstance.create(
        graph.Q, [w[0] for w in graph.w_features], graph.A,
        [v[0] for v in graph.v_features], [v[1] for v in graph.v_features],
        [w[1] for w in graph.w_features], [w[2] for w in graph.w_features],
    )
    if graph.kind is GraphKind.MILCQP:
        return MILCQPInstance(base, frozenset(j for j, w in enumerate(graph.w_features) if w[3]))
    return base


def permute(graph: QPGraph, perm: VertexPermutation) -> QPGraph:
    if (perm.m, perm.n) != (graph.m, graph.n):
        raise DimensionMismatchError("Permutation of size (%d, %d) applied to a graph of size (%d, %d)"
                                     % (perm.m, perm.n, graph.m, graph.n))
    sV, sW = perm.sigma_V, perm.sigma_W
    v = [None] * graph.m
    for i, f in enumerate(graph.v_features):
        v[sV[i]] = f
    w = [None] * graph.n
    for j, f in enumerate(graph.w_features):
        w[sW[j]] = f
    a_edges = tuple(sorted((sV[i], sW[j], x) for i, j, x in graph.a_edges))
    q_edges = tuple(sorted((sW[i], sW[j], x) for i, j, x in graph.q_edges))
    return QPGraph(graph.kind, tuple(v), tuple(w), a_edges, q_edges)


def disjoint_union(g1: QPGraph, g2: QPGraph) -> QPGraph:
    "g1's nodes first, then g2's, each side offset by g1's node count"
    if g1.kind is not g2.kind:
        raise DimensionMismatchError("Cannot join a %s graph with a %s graph" % (g1.kind.value, g2.kind.value))
    m, n = g1.m, g1.n
    return QPGraph(
        g1.kind,
        g1.v_features + g2.v_features,
        g1.w_features + g2.w_features,
        g1.a_edges + tuple((i + m, j + n, x) for i, j, x in g2.a_edges),
        g1.q_edges + tuple((i + n, j + n, x) for i, j, x in g2.q_edges),
    )


def check_same_size(g1: QPGraph, g2: QPGraph) -> None:
    if (g1.m, g1.n) != (g2.m, g2.n):
        raise DimensionMismatchError("Graphs differ in size: (m=%d, n=%d) vs (m=%d, n=%d)" % (g1.m, g1.n, g2.m, g2.n))
    if g1.kind is not g2.kind:
        raise DimensionMismatchError("Graphs differ in kind: %s vs %s" % (g1.kind.value, g2.kind.value))
