"""Color refinement (the WL test) on QP graphs.

Hashes are replaced by exact signatures, so two vertices share a color if and only if their
refinement histories are identical. Colors of a round are the ranks of the sorted distinct
signatures, computed separately for constraint and variable nodes.
"""
import math
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .graph import QPGraph, check_same_size, disjoint_union
from .options import RefineOptions
from .utils import Serialize, blocks_from_labels, canonical_ids, classify, logger

Partition = Tuple[Tuple[int, ...], ...]


class WLVariant(Enum):
    LCQP_SUM = 'lcqp-sum'
    MILCQP_MULTISET = 'milcqp-multiset'


@dataclass(frozen=True)
class Coloring:
    colors_V: Tuple[int, ...]
    colors_W: Tuple[int, ...]
    round: int

    @property
    def num_V_classes(self) -> int:
        return len(set(self.colors_V))

    @property
    def num_W_classes(self) -> int:
        return len(set(self.colors_W))


@dataclass(frozen=True)
class StablePartition(Serialize):
    I: Partition
    J: Partition
    rounds_to_stabilize: int

    __serialize_fields__ = 'I', 'J', 'rounds_to_stabilize'

    def _deserialize(self):
        object.__setattr__(self, 'I', tuple(tuple(b) for b in self.I))
        object.__setattr__(self, 'J', tuple(tuple(b) for b in self.J))


class _Neighborhoods:
    "Adjacency lists of a graph, with values quantized once"

    def __init__(self, graph: QPGraph, quantize: Optional[int]):
        q = (lambda x: x) if quantize is None else (lambda x: round(x, quantize))
        self.v_keys = [(q(b), s.value) for b, s in graph.v_features]
        self.w_keys = [tuple(q(x) for x in f) for f in graph.w_features]
        self.v_adj: List[List[Tuple[int, float]]] = [[] for _ in range(graph.m)]
        self.w_adj: List[List[Tuple[int, float]]] = [[] for _ in range(graph.n)]
        self.q_adj: List[List[Tuple[int, float]]] = [[] for _ in range(graph.n)]
        for i, j, a in graph.a_edges:
            self.v_adj[i].append((j, q(a)))
            self.w_adj[j].append((i, q(a)))
        for j, k, x in graph.q_edges:
            self.q_adj[j].append((k, q(x)))


def _summed(adj: Sequence[Tuple[int, float]], colors: Sequence[int]) -> Tuple[Tuple[int, float], ...]:
    # fsum is exactly rounded, so the result does not depend on the order of the neighbors
    groups = classify(adj, key=lambda e: colors[e[0]], value=lambda e: e[1])
    sums = ((color, math.fsum(ws)) for color, ws in groups.items())
    return tuple(sorted((color, s) for color, s in sums if s != 0))


def _multiset(adj: Sequence[Tuple[int, float]], colors: Sequence[int]) -> Tuple[Tuple[int, float], ...]:
    return tuple(sorted((colors[k], w) for k, w in adj))


def _rounds(graph: QPGraph, variant: WLVariant, options: RefineOptions):
    "Yields the colorings of rounds 0, 1, 2, ... indefinitely"
    nb = _Neighborhoods(graph, options.quantize)
    aggregate = _summed if variant is WLVariant.LCQP_SUM else _multiset

    cV, _ = canonical_ids(nb.v_keys)
    cW, _ = canonical_ids(nb.w_keys)
    r = 0
    while True:
        yield Coloring(tuple(cV), tuple(cW), r)
        v_sigs = [(cV[i], aggregate(nb.v_adj[i], cW)) for i in range(graph.m)]
        w_sigs = [(cW[j], aggregate(nb.w_adj[j], cV), aggregate(nb.q_adj[j], cW)) for j in range(graph.n)]
        cV, _ = canonical_ids(v_sigs)
        cW, _ = canonical_ids(w_sigs)
        r += 1


def refine(graph: QPGraph, variant: WLVariant, max_rounds: int, options: Optional[RefineOptions] = None) -> List[Coloring]:
    """Runs ``max_rounds`` refinement rounds.

    Returns:
        The colorings of rounds 0..max_rounds
    """
    if max_rounds < 0:
        raise ValueError("max_rounds must be non-negative, got %d" % max_rounds)
    options = options or RefineOptions()
    colorings = []
    for coloring in _rounds(graph, variant, options):
        colorings.append(coloring)
        if coloring.round == max_rounds:
            break
    return colorings


def _same_partition(a: Coloring, b: Coloring) -> bool:
    # Every round refines the previous one, so equal class counts mean equal partitions
    return a.num_V_classes == b.num_V_classes and a.num_W_classes == b.num_W_classes


def _until_stable(graph: QPGraph, variant: WLVariant, options: RefineOptions) -> List[Coloring]:
    "Colorings up to and including the first round whose partition equals the previous one"
    limit = options.max_rounds if options.max_rounds is not None else graph.m + graph.n + 1
    colorings: List[Coloring] = []
    for coloring in _rounds(graph, variant, options):
        colorings.append(coloring)
        logger.debug("WL round %d: %d V classes, %d W classes",
                     coloring.round, coloring.num_V_classes, coloring.num_W_classes)
        if len(colorings) > 1 and _same_partition(colorings[-2], coloring):
            return colorings
        if coloring.round >= limit:
            return colorings


def color_classes(coloring: Coloring) -> Tuple[Partition, Partition]:
    return blocks_from_labels(coloring.colors_V), blocks_from_labels(coloring.colors_W)


def stable_partition(graph: QPGraph, variant: WLVariant, options: Optional[RefineOptions] = None) -> StablePartition:
    """Refines until a round leaves the partition unchanged.

    ``rounds_to_stabilize`` is the number of refinement rounds run, the last of which changed nothing.
    """
    colorings = _until_stable(graph, variant, options or RefineOptions())
    I, J = color_classes(colorings[-1])
    return StablePartition(I, J, colorings[-1].round)


def class_counts(colorings: Sequence[Coloring]) -> List[Dict[str, int]]:
    return [{'round': c.round, 'num_V_classes': c.num_V_classes, 'num_W_classes': c.num_W_classes}
            for c in colorings]


def _union_colorings(g1: QPGraph, g2: QPGraph, variant: WLVariant, options: Optional[RefineOptions]) -> List[Coloring]:
    check_same_size(g1, g2)
    return _until_stable(disjoint_union(g1, g2), variant, options or RefineOptions())


def _halves_match(coloring: Coloring, m: int, n: int) -> bool:
    cV, cW = coloring.colors_V, coloring.colors_W
    return Counter(cV[:m]) == Counter(cV[m:]) and Counter(cW[:n]) == Counter(cW[n:])


def wl_equivalent(g1: QPGraph, g2: QPGraph, variant: WLVariant, options: Optional[RefineOptions] = None) -> bool:
    """True if no number of refinement rounds tells g1 and g2 apart.

    Both graphs are refined together as one disjoint union, so that their colors are comparable.
    Rounds past the stable partition of the union carry no new information.
    """
    m, n = g1.m, g1.n
    return all(_halves_match(c, m, n) for c in _union_colorings(g1, g2, variant, options))


def wl_equivalent_W(g1: QPGraph, g2: QPGraph, variant: WLVariant, options: Optional[RefineOptions] = None) -> bool:
    "Like wl_equivalent, additionally requiring variable j of g1 and of g2 to share a color in every round"
    m, n = g1.m, g1.n
    for c in _union_colorings(g1, g2, variant, options):
        if not _halves_match(c, m, n) or c.colors_W[:n] != c.colors_W[n:]:
            return False
    return True
