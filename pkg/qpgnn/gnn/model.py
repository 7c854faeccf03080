"""Message-passing networks on QP graphs.

Initial features are embedded by a rectified linear layer. Each of the L layers then updates

    s_i <- f_V(s_i, sum_j A_ij g_W(t_j))
    t_j <- f_W(t_j, sum_i A_ij g_V(s_i), sum_j' Q_jj' g_Q(t_j'))

for the continuous variant, while the mixed-integer variant feeds the edge weight into the
message maps instead: g_W(t_j, A_ij), summed over the neighbors of i. The graph head reads
r_1(sum_i s_i, sum_j t_j), the node head r_2(sum_i s_i, sum_j t_j, t_j).

A mini-batch of graphs is merged into one block-diagonal graph; sums in the heads run over each
graph's own nodes.
"""
import json
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import sparse

from ..exceptions import ConfigurationError, DimensionMismatchError
from ..graph import GraphKind, QPGraph
from ..instance import Sense
from ..options import GNNConfig
from ..utils import FS, Serialize, logger, rng_for
from .layers import Params, embed, embed_backward, init_linear, init_mlp, mlp, mlp_backward

SENSE_ORDER = (Sense.LE, Sense.EQ, Sense.GE)


class FeatureEncoding:
    """Numeric node features.

    Constraint nodes: (b, one-hot sense). Variable nodes: (c, l or 0, l finite, u or 0, u finite),
    followed by the integrality flag for mixed-integer graphs. Infinite bounds enter only through
    their flag, so every value stays finite.
    """
    V_WIDTH = 1 + len(SENSE_ORDER)

    @staticmethod
    def w_width(kind: GraphKind) -> int:
        return 6 if kind is GraphKind.MILCQP else 5

    @staticmethod
    def encode_v(graph: QPGraph) -> np.ndarray:
        x = np.zeros((graph.m, FeatureEncoding.V_WIDTH))
        for i, (b, sense) in enumerate(graph.v_features):
            x[i, 0] = b
            x[i, 1 + SENSE_ORDER.index(sense)] = 1.0
        return x

    @staticmethod
    def encode_w(graph: QPGraph) -> np.ndarray:
        x = np.zeros((graph.n, FeatureEncoding.w_width(graph.kind)))
        for j, f in enumerate(graph.w_features):
            c, l, u = f[:3]
            x[j, :5] = (c, l if np.isfinite(l) else 0.0, np.isfinite(l), u if np.isfinite(u) else 0.0, np.isfinite(u))
            if graph.kind is GraphKind.MILCQP:
                x[j, 5] = f[3]
        return x

    @classmethod
    def encode(cls, graph: QPGraph) -> Tuple[np.ndarray, np.ndarray]:
        return cls.encode_v(graph), cls.encode_w(graph)


def _scatter(targets: np.ndarray, size: int) -> sparse.csr_array:
    "size x E matrix summing edge rows into their target nodes"
    E = len(targets)
    return sparse.csr_array((np.ones(E), (targets, np.arange(E))), shape=(size, E))


@dataclass
class Batch:
    "One or more graphs merged block-diagonally"
    kind: GraphKind
    xV: np.ndarray
    xW: np.ndarray
    A: sparse.csr_array
    Q: sparse.csr_array
    a_rows: np.ndarray
    a_cols: np.ndarray
    a_vals: np.ndarray
    q_rows: np.ndarray
    q_cols: np.ndarray
    q_vals: np.ndarray
    pool_V: sparse.csr_array
    pool_W: sparse.csr_array
    sizes: List[Tuple[int, int]]
    w_graph: np.ndarray

    @property
    def num_graphs(self) -> int:
        return len(self.sizes)

    @classmethod
    def merge(cls, graphs: Sequence[QPGraph]) -> 'Batch':
        if not graphs:
            raise ConfigurationError("Cannot merge an empty list of graphs")
        kind = graphs[0].kind
        if any(g.kind is not kind for g in graphs):
            raise DimensionMismatchError("All graphs of a batch must be of the same kind")

        a_edges, q_edges, v_graph, w_graph = [], [], [], []
        off_m = off_n = 0
        for k, g in enumerate(graphs):
            a_edges += [(i + off_m, j + off_n, x) for i, j, x in g.a_edges]
            q_edges += [(i + off_n, j + off_n, x) for i, j, x in g.q_edges]
            v_graph += [k] * g.m
            w_graph += [k] * g.n
            off_m += g.m
            off_n += g.n

        a = np.array(a_edges, dtype=float).reshape(-1, 3)
        q = np.array(q_edges, dtype=float).reshape(-1, 3)
        a_rows, a_cols = a[:, 0].astype(int), a[:, 1].astype(int)
        q_rows, q_cols = q[:, 0].astype(int), q[:, 1].astype(int)
        G = len(graphs)
        return cls(
            kind,
            np.vstack([FeatureEncoding.encode_v(g) for g in graphs]).reshape(off_m, FeatureEncoding.V_WIDTH),
            np.vstack([FeatureEncoding.encode_w(g) for g in graphs]),
            sparse.csr_array((a[:, 2], (a_rows, a_cols)), shape=(off_m, off_n)),
            sparse.csr_array((q[:, 2], (q_rows, q_cols)), shape=(off_n, off_n)),
            a_rows, a_cols, a[:, 2],
            q_rows, q_cols, q[:, 2],
            _scatter(np.array(v_graph, dtype=int), G),
            _scatter(np.array(w_graph, dtype=int), G),
            [(g.m, g.n) for g in graphs],
            np.array(w_graph, dtype=int),
        )


@dataclass
class GNNParams(Serialize):
    config: GNNConfig
    weights: Params
    seed: int = 0

    __serialize_fields__ = 'config', 'weights', 'seed'

    def _deserialize(self):
        self.config = GNNConfig(self.config)
        self.weights = {k: np.array(v, dtype=float) for k, v in self.weights.items()}

    def copy(self) -> 'GNNParams':
        return GNNParams(self.config, {k: v.copy() for k, v in self.weights.items()}, self.seed)

    def zeros_like(self) -> Params:
        return {k: np.zeros_like(v) for k, v in self.weights.items()}


def _kind(config: GNNConfig) -> GraphKind:
    return GraphKind(config.variant)


def init_params(config: GNNConfig, seed: int = 0) -> GNNParams:
    """Orthogonal weights and zero biases, deterministic per seed"""
    rng = rng_for(seed)
    d, depth = config.width, config.mlp_depth
    kind = _kind(config)
    edge = 1 if kind is GraphKind.MILCQP else 0

    def sizes(fan_in: int, fan_out: int) -> List[int]:
        return [fan_in] + [d] * (depth - 1) + [fan_out]

    w: Params = {}
    init_linear(w, 'f0_V', FeatureEncoding.V_WIDTH, d, rng)
    init_linear(w, 'f0_W', FeatureEncoding.w_width(kind), d, rng)
    for l in range(1, config.num_layers + 1):
        init_mlp(w, 'layer%d.g_V' % l, sizes(d + edge, d), rng)
        init_mlp(w, 'layer%d.g_W' % l, sizes(d + edge, d), rng)
        init_mlp(w, 'layer%d.g_Q' % l, sizes(d + edge, d), rng)
        init_mlp(w, 'layer%d.f_V' % l, sizes(2 * d, d), rng)
        init_mlp(w, 'layer%d.f_W' % l, sizes(3 * d, d), rng)
    if config.head == 'graph':
        init_mlp(w, 'r1', sizes(2 * d, 1), rng)
    else:
        init_mlp(w, 'r2', sizes(3 * d, 1), rng)
    return GNNParams(config, w, seed)


def count_parameters(params: GNNParams) -> int:
    return int(sum(v.size for v in params.weights.values()))


def _check_kind(params: GNNParams, kind: GraphKind) -> None:
    if kind is not _kind(params.config):
        raise ConfigurationError("A %s network cannot read a %s graph" % (params.config.variant, kind.value))


def _edge_input(h: np.ndarray, index: np.ndarray, vals: np.ndarray) -> np.ndarray:
    return np.hstack([h[index], vals[:, None]])


def _layer_forward(w: Params, l: int, batch: Batch, s: np.ndarray, t: np.ndarray) -> Tuple[np.ndarray, np.ndarray, Dict[str, Any]]:
    p = 'layer%d.' % l
    c: Dict[str, Any] = {}
    if batch.kind is GraphKind.LCQP:
        gW, c['g_W'] = mlp(w, p + 'g_W', t)
        gV, c['g_V'] = mlp(w, p + 'g_V', s)
        gQ, c['g_Q'] = mlp(w, p + 'g_Q', t)
        aggV = batch.A @ gW
        aggW = batch.A.T @ gV
        aggQ = batch.Q @ gQ
    else:
        mW, c['g_W'] = mlp(w, p + 'g_W', _edge_input(t, batch.a_cols, batch.a_vals))
        mV, c['g_V'] = mlp(w, p + 'g_V', _edge_input(s, batch.a_rows, batch.a_vals))
        mQ, c['g_Q'] = mlp(w, p + 'g_Q', _edge_input(t, batch.q_cols, batch.q_vals))
        aggV = _scatter(batch.a_rows, len(s)) @ mW
        aggW = _scatter(batch.a_cols, len(t)) @ mV
        aggQ = _scatter(batch.q_rows, len(t)) @ mQ
    s_new, c['f_V'] = mlp(w, p + 'f_V', np.hstack([s, aggV]))
    t_new, c['f_W'] = mlp(w, p + 'f_W', np.hstack([t, aggW, aggQ]))
    return s_new, t_new, c


def _layer_backward(w: Params, l: int, batch: Batch, c: Dict[str, Any], ds_new: np.ndarray, dt_new: np.ndarray,
                    grads: Params) -> Tuple[np.ndarray, np.ndarray]:
    p = 'layer%d.' % l
    d = ds_new.shape[1]
    dinV = mlp_backward(w, p + 'f_V', c['f_V'], ds_new, grads)
    dinW = mlp_backward(w, p + 'f_W', c['f_W'], dt_new, grads)
    ds, daggV = dinV[:, :d], dinV[:, d:]
    dt, daggW, daggQ = dinW[:, :d], dinW[:, d:2 * d], dinW[:, 2 * d:]
    if batch.kind is GraphKind.LCQP:
        dt = dt + mlp_backward(w, p + 'g_W', c['g_W'], batch.A.T @ daggV, grads)
        ds = ds + mlp_backward(w, p + 'g_V', c['g_V'], batch.A @ daggW, grads)
        dt = dt + mlp_backward(w, p + 'g_Q', c['g_Q'], batch.Q.T @ daggQ, grads)
    else:
        to_V = _scatter(batch.a_rows, len(ds))
        to_W = _scatter(batch.a_cols, len(dt))
        from_Q = _scatter(batch.q_cols, len(dt))
        dmW = mlp_backward(w, p + 'g_W', c['g_W'], to_V.T @ daggV, grads)
        dmV = mlp_backward(w, p + 'g_V', c['g_V'], to_W.T @ daggW, grads)
        dmQ = mlp_backward(w, p + 'g_Q', c['g_Q'], _scatter(batch.q_rows, len(dt)).T @ daggQ, grads)
        dt = dt + to_W @ dmW[:, :d] + from_Q @ dmQ[:, :d]
        ds = ds + to_V @ dmV[:, :d]
    return ds, dt


@dataclass
class _Tape:
    pre_V: np.ndarray
    pre_W: np.ndarray
    layers: List[Dict[str, Any]] = field(default_factory=list)
    head: Any = None


def _forward(params: GNNParams, batch: Batch) -> Tuple[np.ndarray, _Tape]:
    _check_kind(params, batch.kind)
    w = params.weights
    s, pre_V = embed(w, 'f0_V', batch.xV)
    t, pre_W = embed(w, 'f0_W', batch.xW)
    tape = _Tape(pre_V, pre_W)
    for l in range(1, params.config.num_layers + 1):
        s, t, c = _layer_forward(w, l, batch, s, t)
        tape.layers.append(c)

    S = batch.pool_V @ s
    T = batch.pool_W @ t
    if params.config.head == 'graph':
        y, tape.head = mlp(w, 'r1', np.hstack([S, T]))
    else:
        y, tape.head = mlp(w, 'r2', np.hstack([S[batch.w_graph], T[batch.w_graph], t]))
    return y[:, 0], tape


def _backward(params: GNNParams, batch: Batch, tape: _Tape, dy: np.ndarray) -> Params:
    w = params.weights
    d = params.config.width
    grads = params.zeros_like()
    if params.config.head == 'graph':
        din = mlp_backward(w, 'r1', tape.head, dy[:, None], grads)
        dS, dT = din[:, :d], din[:, d:]
        dt = batch.pool_W.T @ dT
    else:
        din = mlp_backward(w, 'r2', tape.head, dy[:, None], grads)
        dS = batch.pool_W @ din[:, :d]
        dT = batch.pool_W @ din[:, d:2 * d]
        dt = batch.pool_W.T @ dT + din[:, 2 * d:]
    ds = batch.pool_V.T @ dS

    for l in reversed(range(1, params.config.num_layers + 1)):
        ds, dt = _layer_backward(w, l, batch, tape.layers[l - 1], ds, dt, grads)

    embed_backward(w, 'f0_V', batch.xV, tape.pre_V, ds, grads)
    embed_backward(w, 'f0_W', batch.xW, tape.pre_W, dt, grads)
    return grads


def _check_head(params: GNNParams, head: str) -> None:
    if params.config.head != head:
        raise ConfigurationError("Network has a %s head, not a %s head" % (params.config.head, head))


def forward_graph(params: GNNParams, graph: QPGraph) -> float:
    _check_head(params, 'graph')
    y, _ = _forward(params, Batch.merge([graph]))
    return float(y[0])


def forward_node(params: GNNParams, graph: QPGraph) -> np.ndarray:
    _check_head(params, 'node')
    y, _ = _forward(params, Batch.merge([graph]))
    return y


Label = Union[float, np.ndarray]


def _split(params: GNNParams, batch: Batch, y: np.ndarray) -> List[Label]:
    if params.config.head == 'graph':
        return [float(v) for v in y]
    return np.split(y, np.cumsum([n for _, n in batch.sizes])[:-1])


def predict(params: GNNParams, graphs: Sequence[QPGraph]) -> List[Label]:
    "One output per graph: a number for the graph head, an n-vector for the node head"
    batch = Batch.merge(graphs)
    y, _ = _forward(params, batch)
    return _split(params, batch, y)


def _as_instances(x: Any) -> List[np.ndarray]:
    if np.ndim(x) == 0:
        return [np.atleast_1d(np.asarray(x, dtype=float))]
    if isinstance(x, np.ndarray) and x.ndim == 1:
        return [np.atleast_1d(v) for v in x]
    return [np.atleast_1d(np.asarray(v, dtype=float)) for v in x]


def relative_errors(pred: Any, label: Any) -> np.ndarray:
    """Per-instance ||pred - label|| / max(||label||, 1).

    A bare number is one instance; a 1-d array is a batch of scalar outputs; a list holds one
    entry per instance.
    """
    P, Y = _as_instances(pred), _as_instances(label)
    if len(P) != len(Y) or any(p.shape != y.shape for p, y in zip(P, Y)):
        raise DimensionMismatchError("Predictions and labels differ in shape")
    return np.array([np.linalg.norm(p - y) / max(np.linalg.norm(y), 1.0) for p, y in zip(P, Y)])


def loss_msre(pred: Any, label: Any) -> float:
    "Mean over instances of ||pred - label||^2 / max(||label||, 1)^2"
    return float(np.mean(relative_errors(pred, label) ** 2))


def _flat_labels(params: GNNParams, labels: Sequence[Label]) -> Tuple[np.ndarray, np.ndarray]:
    "Concatenated labels and, per output, the squared normalizer of its instance"
    if params.config.head == 'graph':
        y = np.array([float(v) for v in labels])
        return y, np.maximum(np.abs(y), 1.0) ** 2
    parts = [np.asarray(v, dtype=float) for v in labels]
    den = np.concatenate([np.full(len(v), max(np.linalg.norm(v), 1.0) ** 2) for v in parts])
    return np.concatenate(parts), den


def backward(params: GNNParams, graphs: Sequence[QPGraph], labels: Sequence[Label],
             batch: Optional[Batch] = None) -> Tuple[float, Params, np.ndarray]:
    """Loss of the batch and its exact gradient with respect to every weight.

    Returns:
        (loss, gradients keyed like params.weights, per-instance relative errors)
    """
    batch = batch or Batch.merge(graphs)
    y, tape = _forward(params, batch)
    target, den = _flat_labels(params, labels)
    if y.shape != target.shape:
        raise DimensionMismatchError("Got %d labels for %d outputs" % (len(target), len(y)))
    G = batch.num_graphs
    r = y - target
    if params.config.head == 'graph':
        sq = r ** 2 / den
    else:
        sq = np.bincount(batch.w_graph, weights=r ** 2 / den, minlength=G)
    loss = float(np.mean(sq))
    grads = _backward(params, batch, tape, 2 * r / den / G)
    return loss, grads, np.sqrt(sq)


def save_checkpoint(params: GNNParams, path: str, epoch: int) -> None:
    doc = {'params': params.serialize(), 'epoch': epoch}
    with FS.open(path, 'w') as f:
        json.dump(doc, f, sort_keys=True)
    logger.debug("Saved checkpoint of epoch %d to %s", epoch, path)


def load_checkpoint(path: str) -> Tuple[GNNParams, int]:
    with FS.open(path) as f:
        doc = json.load(f)
    return GNNParams.deserialize(doc['params']), int(doc['epoch'])
