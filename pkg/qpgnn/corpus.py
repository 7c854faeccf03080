"""Hand-built instance pairs that message passing cannot tell apart, and the checks that
show each pair differs in the property it was built for.

The instance documents ship with the package under ``data/``; their hashes are pinned here so a
modified corpus is reported before any of its claims are checked.
"""
import pkgutil
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .exceptions import CounterexampleFailure
from .gnn import GNNParams, forward_graph, forward_node, init_params
from .graph import encode_milcqp
from .instance import AnyInstance, MILCQPInstance, relax
from .load_instance import loads
from .options import GNNConfig, SolverOptions
from .refinement import WLVariant, wl_equivalent, wl_equivalent_W
from .solvers import brute_force_milcqp, solve_lcqp
from .utils import logger, sha256_digest

PINNED_SHA256 = {
    'objective-gap-1.json': '4991c7ae56ec4e63cfd34c92e3497049e39afa6017477a1179788b05adb97e5c',
    'objective-gap-2.json': '66411586475177ae1de961d84230144d45da8e1353b8f779bd787fd10a90e270',
    'objective-gap-flipped-2.json': 'e52900c3e212556a9783863397333c0fddd986ec00b64e47f6621259bd6888b7',
    'solution-gap-1.json': '6d135182050ba515ce2c111ffcd8e4e9b4d7e20ab7a9654c4994f5af8b4db458',
    'solution-gap-2.json': '277952e56292e423bfe310c6d3d89a31bd42e5e0c16e332de6506378c77702df',
    'tractable-folded.json': 'a8cdb1fd9c92bc1dd17505bd89ea79c844ca99d5f5c457e5346d790a025453fe',
}

GNN_DRAWS = 20
GNN_TOL = 1e-8
VALUE_TOL = 1e-6


@dataclass(frozen=True)
class PairSpec:
    """What a pair is expected to show.

    Parameters:
        files: the two instance documents
        equivalent: whether refinement should fail to separate the pair
        optima: expected exact optimal values of the two instances
        solutions: for pairs with equal optima, the expected unique optimal solutions
        relaxed_optimum: expected common optimal value of the continuous relaxations, if checked
    """
    files: Tuple[str, str]
    equivalent: bool
    optima: Tuple[float, float]
    solutions: Optional[Tuple[Tuple[float, ...], Tuple[float, ...]]] = None
    relaxed_optimum: Optional[float] = None


PAIRS: Dict[str, PairSpec] = {
    'objective-gap': PairSpec(('objective-gap-1.json', 'objective-gap-2.json'), True, (4.5, 6.0),
                              relaxed_optimum=3.75),
    'solution-gap': PairSpec(('solution-gap-1.json', 'solution-gap-2.json'), True, (24.0, 24.0),
                             solutions=((3, 3, 0, 0, 0, 0, 0), (2, 2, 2, 0, 0, 0, 0))),
    # Flipping one row of the second instance to "<=" makes the pair separable at round 0
    'objective-gap-flipped': PairSpec(('objective-gap-1.json', 'objective-gap-flipped-2.json'), False, (4.5, 4.5)),
}

SINGLES = {
    'tractable-folded': 'tractable-folded.json',
}


def read_text(filename: str) -> str:
    data = pkgutil.get_data(__name__.rsplit('.', 1)[0], 'data/' + filename)
    if data is None:
        raise FileNotFoundError(filename)
    return data.decode('utf-8')


def check_integrity() -> List[str]:
    "Names of corpus documents whose contents differ from the pinned hash"
    return [name for name, digest in sorted(PINNED_SHA256.items()) if sha256_digest(read_text(name)) != digest]


def load(filename: str) -> MILCQPInstance:
    return loads(read_text(filename), source=filename)


def load_pair(name: str) -> Tuple[MILCQPInstance, MILCQPInstance]:
    a, b = PAIRS[name].files
    return load(a), load(b)


def load_single(name: str) -> MILCQPInstance:
    return load(SINGLES[name])


@dataclass
class ClauseResult:
    pair: str
    clause: str
    passed: bool
    detail: str


@dataclass
class CounterexampleReport:
    rows: List[ClauseResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def failures(self, pair: Optional[str] = None) -> List[ClauseResult]:
        return [r for r in self.rows if not r.passed and (pair is None or r.pair == pair)]

    def add(self, pair: str, clause: str, passed: bool, detail: str) -> None:
        self.rows.append(ClauseResult(pair, clause, bool(passed), detail))
        if not passed:
            logger.info("Pair %s failed %s: %s", pair, clause, detail)


def _gnn_outputs_agree(first: AnyInstance, second: AnyInstance, head: str, draws: int) -> Tuple[bool, str]:
    g1, g2 = encode_milcqp(first), encode_milcqp(second)
    config = GNNConfig(variant='milcqp', head=head, width=8, num_layers=2)
    forward: Callable[[GNNParams, object], np.ndarray] = forward_graph if head == 'graph' else forward_node
    worst = 0.0
    for seed in range(draws):
        params = init_params(config, seed)
        y1 = np.atleast_1d(forward(params, g1))
        y2 = np.atleast_1d(forward(params, g2))
        worst = max(worst, float(np.max(np.abs(y1 - y2) / (1 + np.abs(y1)))))
    return worst <= GNN_TOL, "largest relative output gap %.3g over %d parameter draws" % (worst, draws)


def verify_pair(name: str, first: MILCQPInstance, second: MILCQPInstance, spec: PairSpec,
                report: CounterexampleReport, options: Optional[SolverOptions] = None,
                draws: int = GNN_DRAWS) -> None:
    g1, g2 = encode_milcqp(first), encode_milcqp(second)
    equivalent = wl_equivalent(g1, g2, WLVariant.MILCQP_MULTISET)
    report.add(name, 'wl-equivalent', equivalent == spec.equivalent,
               "refinement %s the pair" % ("cannot separate" if equivalent else "separates"))

    if spec.equivalent:
        ok, detail = _gnn_outputs_agree(first, second, 'graph', draws)
        report.add(name, 'gnn-graph-outputs', ok, detail)
        if spec.solutions is not None:
            w_equivalent = wl_equivalent_W(g1, g2, WLVariant.MILCQP_MULTISET)
            report.add(name, 'wl-equivalent-W', w_equivalent,
                       "variable colorings %s index by index" % ("agree" if w_equivalent else "differ"))
            ok, detail = _gnn_outputs_agree(first, second, 'node', draws)
            report.add(name, 'gnn-node-outputs', ok, detail)

    r1 = brute_force_milcqp(first, options, collect_ties=True)
    r2 = brute_force_milcqp(second, options, collect_ties=True)
    if not (r1.is_optimal and r2.is_optimal):
        report.add(name, 'optima', False, "expected both optimal, got %s / %s" % (r1.status.value, r2.status.value))
        return
    ok = all(abs(v - e) <= VALUE_TOL for v, e in zip((r1.value, r2.value), spec.optima))
    report.add(name, 'optima', ok, "optimal values %.10g and %.10g, expected %g and %g"
               % (r1.value, r2.value, spec.optima[0], spec.optima[1]))

    if spec.solutions is not None:
        s1 = {tuple(np.round(x, 6)) for x in r1.solutions}
        s2 = {tuple(np.round(x, 6)) for x in r2.solutions}
        expected = ({tuple(float(v) for v in spec.solutions[0])}, {tuple(float(v) for v in spec.solutions[1])})
        report.add(name, 'solution-sets', s1 == expected[0] and s2 == expected[1] and not (s1 & s2),
                   "optimal sets %s and %s" % (sorted(s1), sorted(s2)))

    if spec.relaxed_optimum is not None:
        c1 = solve_lcqp(relax(first), options)
        c2 = solve_lcqp(relax(second), options)
        ok = (c1.is_optimal and c2.is_optimal
              and abs(c1.value - spec.relaxed_optimum) <= VALUE_TOL
              and abs(c2.value - spec.relaxed_optimum) <= VALUE_TOL)
        report.add(name, 'relaxations', ok, "continuous optima %s and %s, expected %g"
                   % (c1.value, c2.value, spec.relaxed_optimum))


def verify_counterexamples(strict: bool = False, options: Optional[SolverOptions] = None,
                           pairs: Optional[Sequence[str]] = None, draws: int = GNN_DRAWS) -> CounterexampleReport:
    """Checks every pair of the shipped corpus.

    With ``strict``, the first failing pair raises ``CounterexampleFailure``.
    """
    report = CounterexampleReport()
    modified = check_integrity()
    report.add('corpus', 'integrity', not modified,
               "modified documents: %s" % modified if modified else "all documents match their pinned hash")
    if strict and modified:
        raise CounterexampleFailure('corpus', [('integrity', "modified documents: %s" % modified)])

    for name in pairs or sorted(PAIRS):
        first, second = load_pair(name)
        verify_pair(name, first, second, PAIRS[name], report, options, draws)
        failed = report.failures(name)
        if strict and failed:
            raise CounterexampleFailure(name, [(r.clause, r.detail) for r in failed])
    return report
