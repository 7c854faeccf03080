"""Fitting and generalization experiments, and the tables they produce.

Tables are pandas frames with a fixed column order, written as CSV (or JSON records with sorted
keys) so that reruns with the same seeds produce identical files.
"""
import json
import os
from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .corpus import CounterexampleReport
from .exceptions import ConfigurationError
from .generator import load_dataset, read_manifest
from .gnn import GNNParams, count_parameters, init_params, predict, save_checkpoint, train
from .gnn.training import HISTORY_COLUMNS, Dataset, mean_relative_error
from .graph import encode_lcqp, encode_milcqp
from .instance import AnyInstance, relax
from .options import ExperimentSpec, SolverOptions
from .properties import PropertyReport
from .solvers import TargetLabels
from .utils import FS, logger

FIT_HISTORY_COLUMNS = ('width', 'seed') + HISTORY_COLUMNS
FIT_SUMMARY_COLUMNS = ('width', 'seed', 'parameters', 'best_train_rel_err', 'epochs')
GENERALIZATION_COLUMNS = ('train_size', 'seed', 'train_err', 'val_err')
GENERALIZATION_SUMMARY_COLUMNS = ('train_size', 'median_train_err', 'median_val_err')
COUNTEREXAMPLE_COLUMNS = ('pair', 'clause', 'passed', 'detail')
PROPERTY_COLUMNS = ('check', 'seed', 'passed', 'detail')

FLOAT_FORMAT = '%.10g'


def format_table(frame: pd.DataFrame, fmt: str = 'csv') -> str:
    "CSV text, or a JSON list of records with sorted keys"
    if fmt == 'csv':
        return frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
    if fmt == 'json':
        records = json.loads(frame.to_json(orient='records', double_precision=15))
        return json.dumps(records, sort_keys=True, indent=1) + '\n'
    raise ConfigurationError("Unknown table format %r, expected csv or json" % fmt)


def write_table(frame: pd.DataFrame, path: str, fmt: str = 'csv') -> str:
    text = format_table(frame, fmt)
    directory = os.path.dirname(path)
    if directory:
        FS.makedirs(directory)
    with FS.open(path, 'w') as f:
        f.write(text)
    logger.info("Wrote %d rows to %s", len(frame), path)
    return path


def counterexample_frame(report: CounterexampleReport) -> pd.DataFrame:
    return pd.DataFrame([[r.pair, r.clause, r.passed, r.detail] for r in report.rows],
                        columns=list(COUNTEREXAMPLE_COLUMNS))


def property_frame(report: PropertyReport) -> pd.DataFrame:
    return pd.DataFrame([[r.check, r.seed, r.passed, r.detail] for r in report.rows],
                        columns=list(PROPERTY_COLUMNS))


def _encode(instance: AnyInstance, problem: str):
    return encode_milcqp(instance) if problem == 'milcqp' else encode_lcqp(relax(instance))


def _target(labels: TargetLabels, task: str) -> Optional[Any]:
    if task == 'fit-feas':
        return float(labels.feas)
    if not np.isfinite(labels.obj):
        return None
    return labels.obj if task == 'fit-obj' else labels.sol


def build_dataset(pairs: Sequence[Tuple[AnyInstance, TargetLabels]], spec: ExperimentSpec) -> Dataset:
    """(graph, label) pairs for the task of ``spec``.

    Instances without a finite optimum have no value or solution label; they are left out of
    fit-obj and fit-sol with a warning.
    """
    data = []
    skipped = 0
    for instance, labels in pairs:
        y = _target(labels, spec.task)
        if y is None:
            skipped += 1
            continue
        data.append((_encode(instance, spec.problem), y))
    if skipped:
        logger.warning("Left out %d of %d instances without a finite optimum", skipped, len(pairs))
    if not data:
        raise ConfigurationError("No instance of the dataset has a %s label" % spec.task)
    return data


@dataclass
class FitResult:
    history: pd.DataFrame
    summary: pd.DataFrame
    paths: Dict[str, str]

    def best_by_width(self) -> pd.Series:
        "Median over seeds of the best training error, per width"
        return self.summary.groupby('width')['best_train_rel_err'].median()


def fit(spec: ExperimentSpec, data: Dataset, fmt: str = 'csv') -> FitResult:
    "Trains every (width, seed) of ``spec`` on ``data`` and writes history, summary and predictions"
    history_frames = []
    summary_rows = []
    best_overall = None
    for width in spec.widths:
        for seed in spec.seeds:
            params = init_params(spec.gnn_config(width), seed)
            best, history = train(params, data, spec.schedule(seed))
            frame = pd.DataFrame(history.rows, columns=list(HISTORY_COLUMNS))
            frame.insert(0, 'seed', seed)
            frame.insert(0, 'width', width)
            history_frames.append(frame)
            summary_rows.append([width, seed, count_parameters(best), history.best, len(history.rows)])
            save_checkpoint(best, os.path.join(spec.out_dir, 'checkpoints', 'width%d_seed%d.json' % (width, seed)),
                            len(history.rows))
            logger.info("Width %d, seed %d: best relative error %.4g", width, seed, history.best)
            if best_overall is None or history.best < best_overall[0]:
                best_overall = (history.best, best)

    history = pd.concat(history_frames, ignore_index=True)
    summary = pd.DataFrame(summary_rows, columns=list(FIT_SUMMARY_COLUMNS))
    ext = '.' + fmt
    paths = {
        'history': write_table(history, os.path.join(spec.out_dir, 'fit_history' + ext), fmt),
        'summary': write_table(summary, os.path.join(spec.out_dir, 'fit_summary' + ext), fmt),
        'predictions': write_table(prediction_frame(best_overall[1], data),
                                   os.path.join(spec.out_dir, 'fit_predictions' + ext), fmt),
    }
    return FitResult(history, summary, paths)


def prediction_frame(params: GNNParams, data: Dataset) -> pd.DataFrame:
    """One row per output: (instance, variable, prediction, label).

    The variable column is -1 for graph-level outputs.
    """
    rows = []
    for k, (y_hat, (_, y)) in enumerate(zip(predict(params, [g for g, _ in data]), data)):
        if params.config.head == 'graph':
            rows.append([k, -1, float(y_hat), float(y)])
        else:
            rows.extend([k, j, float(p), float(t)] for j, (p, t) in enumerate(zip(y_hat, y)))
    return pd.DataFrame(rows, columns=['instance', 'variable', 'prediction', 'label'])


def run_fit(spec: ExperimentSpec, options: Optional[SolverOptions] = None, fmt: str = 'csv') -> FitResult:
    """Trains one network per width and seed on the labeled dataset ``spec.dataset``.

    Raises:
        TrainingDivergedError: from training
    """
    if not spec.dataset:
        raise ConfigurationError("run_fit needs a dataset directory")
    return fit(spec, build_dataset(load_dataset(spec.dataset, options), spec), fmt)


def _manifest_items(directory: str) -> set:
    return {tuple(s) for s in read_manifest(directory)['seeds']}


def check_disjoint(train_dir: str, validation_dir: str) -> None:
    "Raises ConfigurationError if the two datasets share an instance"
    shared = _manifest_items(train_dir) & _manifest_items(validation_dir)
    if shared:
        raise ConfigurationError("Validation set shares %d instances with the training set, e.g. %s"
                                 % (len(shared), sorted(shared)[0]))
    if read_manifest(train_dir)['config_hash'] != read_manifest(validation_dir)['config_hash']:
        logger.warning("Training and validation sets were generated with different configurations")


@dataclass
class GeneralizationResult:
    rows: pd.DataFrame
    summary: pd.DataFrame
    improves: bool
    paths: Dict[str, str]


def generalize(spec: ExperimentSpec, data: Dataset, validation: Dataset, fmt: str = 'csv') -> GeneralizationResult:
    width = spec.widths[-1]
    if max(spec.sizes) > len(data):
        raise ConfigurationError("Largest training size %d exceeds the %d labeled instances"
                                 % (max(spec.sizes), len(data)))
    rows = []
    for size in sorted(spec.sizes):
        for seed in spec.seeds:
            best, history = train(init_params(spec.gnn_config(width), seed), data[:size], spec.schedule(seed))
            val_err = mean_relative_error(best, validation)
            rows.append([size, seed, history.best, val_err])
            logger.info("%d training instances, seed %d: train %.4g, validation %.4g", size, seed, history.best, val_err)

    frame = pd.DataFrame(rows, columns=list(GENERALIZATION_COLUMNS))
    medians = frame.groupby('train_size', sort=True)[['train_err', 'val_err']].median().reset_index()
    summary = pd.DataFrame({'train_size': medians['train_size'],
                            'median_train_err': medians['train_err'],
                            'median_val_err': medians['val_err']},
                           columns=list(GENERALIZATION_SUMMARY_COLUMNS))
    val = summary['median_val_err'].to_numpy()
    # Only the trend is checked; single steps may go up by noise
    improves = len(val) < 2 or bool(val[-1] < val[0])
    if not improves:
        logger.warning("Median validation error did not decrease from %d to %d training instances",
                       summary['train_size'].iloc[0], summary['train_size'].iloc[-1])
    ext = '.' + fmt
    paths = {
        'rows': write_table(frame, os.path.join(spec.out_dir, 'generalization' + ext), fmt),
        'summary': write_table(summary, os.path.join(spec.out_dir, 'generalization_summary' + ext), fmt),
    }
    return GeneralizationResult(frame, summary, improves, paths)


def run_generalization(spec: ExperimentSpec, options: Optional[SolverOptions] = None,
                       fmt: str = 'csv') -> GeneralizationResult:
    """Trains the last width of ``spec`` on growing prefixes of ``spec.dataset`` and measures the
    error on ``spec.validation``.
    """
    if not (spec.dataset and spec.validation):
        raise ConfigurationError("run_generalization needs a dataset and a validation directory")
    check_disjoint(spec.dataset, spec.validation)
    data = build_dataset(load_dataset(spec.dataset, options), spec)
    validation = build_dataset(load_dataset(spec.validation, options), spec)
    return generalize(spec, data, validation, fmt)
