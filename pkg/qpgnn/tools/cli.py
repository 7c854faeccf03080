"""Command-line surface: ``python -m qpgnn <command> ...``

Every command exits with 0 exactly when the checks it was asked to make pass.
"""
import json
import os
import sys
from argparse import ArgumentParser
from typing import List, Optional

import pandas as pd

from qpgnn.corpus import PAIRS, verify_counterexamples
from qpgnn.exceptions import CounterexampleFailure, QPError
from qpgnn.generator import (dataset_paths, gen_fixed_structure, gen_lcqp, gen_milcqp, gen_symmetric_lcqp,
                             label_dataset, write_dataset)
from qpgnn.graph import QPGraph, encode
from qpgnn.harness import counterexample_frame, format_table, property_frame, run_fit, run_generalization
from qpgnn.load_instance import read_instance
from qpgnn.options import ExperimentSpec, GenConfig, RefineOptions
from qpgnn.properties import CHECKS, run_property_suite
from qpgnn.refinement import WLVariant, class_counts, stable_partition, wl_equivalent, wl_equivalent_W, refine
from qpgnn.solvers import brute_force_milcqp, solve_lcqp, solve_milcqp, write_label
from qpgnn.tools import common_argparser, configure_logging, emit
from qpgnn.tractability import classify
from qpgnn.utils import FS, encode_float, logger

PRESETS = {
    'lcqp': {},
    # at most 12 integer variables keep branch and bound labeling fast
    'milcqp': {'n': 20, 'nnz_A': 40, 'max_integer': 12},
    'fixed-c': {},
    'symmetric': {'m': 4, 'n': 8, 'nnz_A': 12},
}


def _ints(text: str) -> List[int]:
    return [int(v) for v in text.split(',') if v.strip()]


def cmd_generate(ns) -> int:
    config = GenConfig(PRESETS[ns.preset], seed=ns.seed)
    if ns.m is not None:
        config = config.replace(m=ns.m, nnz_A=min(config.nnz_A, ns.m * config.n))
    if ns.n is not None:
        config = config.replace(n=ns.n, nnz_A=min(config.nnz_A, config.m * ns.n))
    indices = range(ns.start, ns.start + ns.count)
    if ns.preset == 'lcqp':
        instances = [gen_lcqp(config, k) for k in indices]
    elif ns.preset == 'milcqp':
        instances = [gen_milcqp(config, k) for k in indices]
    elif ns.preset == 'fixed-c':
        instances = gen_fixed_structure(config, ns.count, ns.start)
    else:
        instances = [gen_symmetric_lcqp(config, ns.block_size, k) for k in indices]
    out_dir = ns.out_dir or 'dataset'
    manifest = write_dataset(instances, out_dir, config, {'preset': ns.preset})
    if ns.label:
        label_dataset(dataset_paths(out_dir))
    emit(pd.DataFrame({'file': manifest['files'], 'index': [s[1] for s in manifest['seeds']]}), ns, 'generate')
    return 0


def cmd_solve(ns) -> int:
    rows = []
    for path in ns.files:
        instance = read_instance(path)
        if ns.brute_force:
            result = brute_force_milcqp(instance)
        elif instance.integer_set:
            result = solve_milcqp(instance)
        else:
            result = solve_lcqp(instance)
        if ns.write_labels:
            write_label(result, path)
        x = '' if result.x_star is None else ' '.join(repr(float(v)) for v in result.x_star)
        rows.append([path, result.status.value, result.value, result.kkt_residual, result.nodes, x])
    emit(pd.DataFrame(rows, columns=['file', 'status', 'value', 'kkt_residual', 'nodes', 'x_star']), ns, 'solve')
    return 0


def graph_document(graph: QPGraph) -> dict:
    def feature(f):
        return [v.value if hasattr(v, 'value') else encode_float(float(v)) for v in f]
    return {
        'kind': graph.kind.value,
        'm': graph.m,
        'n': graph.n,
        'v_features': [feature(f) for f in graph.v_features],
        'w_features': [feature(f) for f in graph.w_features],
        'a_edges': [[i, j, x] for i, j, x in graph.a_edges],
        'q_edges': [[i, j, x] for i, j, x in graph.q_edges],
    }


def cmd_encode(ns) -> int:
    instance = read_instance(ns.file)
    text = json.dumps(graph_document(encode(instance)), sort_keys=True, indent=1) + '\n'
    if ns.out_dir:
        FS.makedirs(ns.out_dir)
        with FS.open(os.path.join(ns.out_dir, os.path.splitext(os.path.basename(ns.file))[0] + '.graph.json'), 'w') as f:
            f.write(text)
    sys.stdout.write(text)
    return 0


def cmd_wl_compare(ns) -> int:
    variant = WLVariant(ns.variant)
    options = RefineOptions(quantize=ns.quantize)
    g1, g2 = encode(read_instance(ns.first)), encode(read_instance(ns.second))
    partitions = [stable_partition(g, variant, options) for g in (g1, g2)]
    rounds = max(p.rounds_to_stabilize for p in partitions)
    rows = []
    for label, g in (('first', g1), ('second', g2)):
        for row in class_counts(refine(g, variant, rounds, options)):
            rows.append(dict(row, graph=label))
    frame = pd.DataFrame(rows, columns=['graph', 'round', 'num_V_classes', 'num_W_classes'])
    equivalent = wl_equivalent(g1, g2, variant, options)
    node_wise = wl_equivalent_W(g1, g2, variant, options)
    emit(frame, ns, 'wl_compare')
    for label, p in zip(('first', 'second'), partitions):
        sys.stderr.write("%s: I=%s J=%s\n" % (label, list(map(list, p.I)), list(map(list, p.J))))
    sys.stderr.write("equivalent=%s node_wise=%s\n" % (equivalent, node_wise))
    if ns.expect is None:
        return 0
    return 0 if equivalent == (ns.expect == 'equivalent') else 1


def cmd_check(ns) -> int:
    rows = []
    ok = True
    for path in ns.files:
        try:
            instance = read_instance(path)
        except QPError as e:
            rows.append([path, False, str(e), None, None, None, None, None])
            ok = False
            continue
        report = classify(encode(instance))
        partition = report.partition
        rows.append([path, True, '', report.mp_tractable, report.unfoldable, partition.rounds_to_stabilize,
                     len(partition.I), len(partition.J)])
    emit(pd.DataFrame(rows, columns=['file', 'valid', 'error', 'mp_tractable', 'unfoldable',
                                     'rounds_to_stabilize', 'num_V_classes', 'num_W_classes']), ns, 'check')
    return 0 if ok else 1


def cmd_counterexamples(ns) -> int:
    try:
        report = verify_counterexamples(strict=ns.strict, pairs=ns.pair or None, draws=ns.draws)
    except CounterexampleFailure as e:
        logger.error("%s", e)
        return 1
    emit(counterexample_frame(report), ns, 'counterexamples')
    return 0 if report.passed else 1


def _experiment(ns, **extra) -> ExperimentSpec:
    return ExperimentSpec(task=ns.task, problem=ns.problem, dataset=ns.dataset, widths=_ints(ns.widths),
                          num_layers=ns.layers, epochs=ns.epochs, lr=ns.lr, seeds=_ints(ns.seeds),
                          out_dir=ns.out_dir or 'results', **extra)


def cmd_train(ns) -> int:
    result = run_fit(_experiment(ns), fmt=ns.format)
    sys.stdout.write(format_table(result.summary, ns.format))
    return 0


def cmd_generalize(ns) -> int:
    result = run_generalization(_experiment(ns, validation=ns.validation, sizes=_ints(ns.sizes)), fmt=ns.format)
    sys.stdout.write(format_table(result.summary, ns.format))
    return 0 if result.improves else 1


def cmd_suite(ns) -> int:
    report = run_property_suite(seeds=_ints(ns.seeds), scale=ns.scale, checks=ns.check or None)
    emit(property_frame(report), ns, 'suite')
    return 0 if report.passed else 1


def _experiment_arguments(p: ArgumentParser, sizes: bool = False) -> None:
    p.add_argument('--task', default='fit-obj', choices=('fit-obj', 'fit-sol', 'fit-feas'))
    p.add_argument('--problem', default='lcqp', choices=('lcqp', 'milcqp'))
    p.add_argument('--dataset', required=True, help='dataset directory written by "generate"')
    p.add_argument('--widths', default='16,32,64', help='comma-separated embedding sizes')
    p.add_argument('--layers', type=int, default=4)
    p.add_argument('--epochs', type=int, default=2000)
    p.add_argument('--lr', type=float, default=5e-4)
    p.add_argument('--seeds', default='0,1,2', help='comma-separated initialization seeds')
    if sizes:
        p.add_argument('--validation', required=True, help='held-out dataset directory')
        p.add_argument('--sizes', default='100,500,2000', help='comma-separated training-set sizes')


def build_argparser() -> ArgumentParser:
    parser = ArgumentParser(prog='python -m qpgnn', description="Expressive power of message passing on quadratic programs")
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('generate', parents=[common_argparser], help='write a random dataset')
    p.add_argument('--preset', default='lcqp', choices=sorted(PRESETS))
    p.add_argument('--count', type=int, default=100)
    p.add_argument('--start', type=int, default=0, help='index of the first instance')
    p.add_argument('-m', type=int, default=None, help='override the number of constraints')
    p.add_argument('-n', type=int, default=None, help='override the number of variables')
    p.add_argument('--block-size', type=int, default=3, help='interchangeable variables of the symmetric preset')
    p.add_argument('--label', action='store_true', help='solve every instance and write its label')
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser('solve', parents=[common_argparser], help='solve instance files')
    p.add_argument('files', nargs='+')
    p.add_argument('--brute-force', action='store_true', help='enumerate integer assignments')
    p.add_argument('--write-labels', action='store_true', help='store results next to the instances')
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser('encode', parents=[common_argparser], help='print the graph of an instance')
    p.add_argument('file')
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser('wl-compare', parents=[common_argparser], help='run color refinement on two instances')
    p.add_argument('first')
    p.add_argument('second')
    p.add_argument('--variant', default=WLVariant.MILCQP_MULTISET.value, choices=[v.value for v in WLVariant])
    p.add_argument('--quantize', type=int, default=None, help='decimal digits kept before comparing values')
    p.add_argument('--expect', choices=('equivalent', 'distinct'), default=None)
    p.set_defaults(func=cmd_wl_compare)

    p = sub.add_parser('check', parents=[common_argparser], help='validate and classify instance files')
    p.add_argument('files', nargs='+')
    p.set_defaults(func=cmd_check)

    p = sub.add_parser('counterexamples', parents=[common_argparser], help='verify the shipped instance pairs')
    p.add_argument('--pair', action='append', choices=sorted(PAIRS))
    p.add_argument('--draws', type=int, default=20, help='random parameter draws per network check')
    p.add_argument('--strict', action='store_true', help='stop at the first failing pair')
    p.set_defaults(func=cmd_counterexamples)

    p = sub.add_parser('train', parents=[common_argparser], help='fit networks of several widths')
    _experiment_arguments(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser('generalize', parents=[common_argparser], help='train on growing prefixes of a dataset')
    _experiment_arguments(p, sizes=True)
    p.set_defaults(func=cmd_generalize)

    p = sub.add_parser('suite', parents=[common_argparser], help='run the randomized property checks')
    p.add_argument('--seeds', default='1,2,3')
    p.add_argument('--scale', type=float, default=1.0, help='multiplier of every sample count')
    p.add_argument('--check', action='append', choices=sorted(CHECKS))
    p.set_defaults(func=cmd_suite)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    ns = build_argparser().parse_args(argv)
    configure_logging(ns)
    try:
        return ns.func(ns)
    except (QPError, OSError) as e:
        logger.error("%s: %s", type(e).__name__, e)
        return 2


if __name__ == '__main__':
    sys.exit(main())
