from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import TrainingDivergedError
from ..graph import QPGraph
from ..options import Schedule
from ..utils import logger, rng_for
from .layers import Params
from .model import Batch, GNNParams, Label, backward, predict, relative_errors

Dataset = Sequence[Tuple[QPGraph, Label]]

HISTORY_COLUMNS = ('epoch', 'lr', 'train_rel_err', 'best_train_rel_err', 'val_rel_err')


class Adam:
    "Adaptive moment estimation with the usual moment constants"

    def __init__(self, params: GNNParams, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.reset(params)

    def reset(self, params: GNNParams) -> None:
        self.m = params.zeros_like()
        self.v = params.zeros_like()
        self.t = 0

    def step(self, params: GNNParams, grads: Params, lr: float) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for k, g in grads.items():
            self.m[k] = b1 * self.m[k] + (1 - b1) * g
            self.v[k] = b2 * self.v[k] + (1 - b2) * g * g
            m_hat = self.m[k] / (1 - b1 ** self.t)
            v_hat = self.v[k] / (1 - b2 ** self.t)
            params.weights[k] -= lr * m_hat / (np.sqrt(v_hat) + self.eps)


@dataclass
class TrainingHistory:
    rows: List[dict] = field(default_factory=list)

    def best_errors(self) -> List[float]:
        return [r['best_train_rel_err'] for r in self.rows]

    @property
    def best(self) -> float:
        return self.rows[-1]['best_train_rel_err'] if self.rows else float('inf')


def mean_relative_error(params: GNNParams, dataset: Dataset) -> float:
    graphs = [g for g, _ in dataset]
    labels = [y for _, y in dataset]
    return float(np.mean(relative_errors(predict(params, graphs), labels)))


def train(params: GNNParams, dataset: Dataset, schedule: Optional[Schedule] = None,
          validation: Optional[Dataset] = None) -> Tuple[GNNParams, TrainingHistory]:
    """Fits ``params`` to the labeled graphs. The input parameters are not modified.

    After every epoch the mean relative error over the whole training set is measured. When it has
    not improved for ``schedule.patience`` epochs, the learning rate is halved, the best
    parameters so far are restored, and the optimizer moments are cleared.

    Returns:
        (the parameters with the lowest training error, per-epoch history)

    Raises:
        TrainingDivergedError: the loss becomes NaN or infinite
    """
    schedule = schedule or Schedule()
    if not dataset:
        raise ValueError("Cannot train on an empty dataset")
    params = params.copy()
    adam = Adam(params)
    rng = rng_for(schedule.seed)
    lr = schedule.lr
    size = min(schedule.batch_size, len(dataset))

    # Graphs are merged once per batch composition; a single full batch never changes
    full_batch = Batch.merge([g for g, _ in dataset]) if size == len(dataset) else None

    best = params.copy()
    best_err = np.inf
    since_best = 0
    last_loss: Optional[float] = None
    history = TrainingHistory()

    for epoch in range(1, schedule.epochs + 1):
        order = np.arange(len(dataset)) if full_batch is not None else rng.permutation(len(dataset))
        for start in range(0, len(dataset), size):
            idx = order[start:start + size]
            graphs = [dataset[i][0] for i in idx]
            labels = [dataset[i][1] for i in idx]
            loss, grads, _ = backward(params, graphs, labels, full_batch)
            if not np.isfinite(loss):
                raise TrainingDivergedError(epoch, last_loss)
            last_loss = loss
            adam.step(params, grads, lr)

        err = mean_relative_error(params, dataset)
        if not np.isfinite(err):
            raise TrainingDivergedError(epoch, last_loss)
        if err < best_err:
            best_err = err
            best = params.copy()
            since_best = 0
        else:
            since_best += 1
            if since_best >= schedule.patience:
                lr /= 2
                params = best.copy()
                adam.reset(params)
                since_best = 0
                logger.warning("Epoch %d: no improvement for %d epochs, learning rate halved to %.3g",
                               epoch, schedule.patience, lr)

        val_err = None
        if validation and epoch % schedule.eval_every == 0:
            val_err = mean_relative_error(params, validation)
        history.rows.append({'epoch': epoch, 'lr': lr, 'train_rel_err': err,
                             'best_train_rel_err': best_err, 'val_rel_err': val_err})
        logger.debug("Epoch %d: loss %.6g, relative error %.6g (best %.6g)", epoch, last_loss, err, best_err)

    return best, history
