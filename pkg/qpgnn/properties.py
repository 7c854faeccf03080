"""Randomized checks of the structural facts the package relies on.

Every check takes a seed and a sample count and returns ``(passed, detail)``. ``run_property_suite``
runs all of them and collects one row per (check, seed).
"""
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import null_space

from .corpus import load_pair, load_single
from .generator import gen_lcqp, gen_milcqp, gen_symmetric_lcqp
from .gnn import GNNParams, backward, forward_graph, forward_node, init_params
from .graph import QPGraph, VertexPermutation, encode, encode_lcqp, encode_milcqp, permute
from .instance import (AnyInstance, LCQPInstance, MILCQPInstance, Sense, apply_permutation, constraint_violation,
                       relax, validate)
from .load_instance import dumps, loads
from .options import GenConfig, GNNConfig, SolverOptions
from .refinement import WLVariant, refine, stable_partition, wl_equivalent
from .solvers import Status, brute_force_milcqp, solve_lcqp, solve_milcqp
from .tractability import (block_row_sums_constant, classify, compatible_partition_matrix,
                           find_isomorphism, partition_average)
from .utils import blocks_from_labels, logger, rng_for

Outcome = Tuple[bool, str]

# Sample counts at scale 1.0
SAMPLES = {
    'averaging-inequality': 1000,
    'averaging-block-sums': 200,
    'unfoldable-implies-tractable': 500,
    'generic-unfoldable': 100,
    'refinement-monotone': 20,
    'refinement-equivariant': 20,
    'wl-equivalence-relation': 10,
    'multiset-refines-sum': 20,
    'tractable-isomorphic': 20,
    'gnn-invariance': 5,
    'symmetric-solution': 3,
    'solver-oracles-agree': 5,
    'psd-sampled': 20,
    'instance-round-trip': 100,
    'encode-permute-commute': 50,
    'solver-kkt-min-norm': 100,
    'gnn-gradient': 10,
    'node-outputs-on-classes': 10,
    'wl-equivalent-outputs': 5,
    'generator-moments': 20,
    'constant-weights-agree': 50,
}

SMALL = GenConfig(m=4, n=8, nnz_A=12, bound_sigma=3.0)
TINY_MI = GenConfig(m=2, n=4, nnz_A=5, bound_sigma=2.0, integer_prob=0.7, integer_bound=1)

# Sub-stream of the instance index that picks the variables dropped from the objective
SINGULAR_STREAM = 2


def _refines(finer: Sequence[int], coarser: Sequence[int]) -> bool:
    "Whether every class of ``finer`` lies inside a class of ``coarser``"
    return len(set(zip(finer, coarser))) == len(set(finer))


def _structured_instance(rng: np.random.Generator, m: int = 3, n: int = 5) -> MILCQPInstance:
    "Small instances with 0/1 coefficients, so that many have nontrivial symmetries"
    A = (rng.random((m, n)) < 0.5).astype(float)
    B = (rng.random((2, n)) < 0.3).astype(float)
    Q = np.diag(rng.integers(1, 3, n).astype(float)) + B.T @ B
    c = rng.integers(0, 2, n).astype(float)
    senses = [Sense.GE if s else Sense.LE for s in rng.random(m) < 0.5]
    integer = np.flatnonzero(rng.random(n) < 0.5)
    return MILCQPInstance.create(Q, c, A, np.ones(m), senses, np.zeros(n), np.ones(n), integer)


def check_averaging_inequality(seed: int, count: int) -> Outcome:
    rng = rng_for(seed)
    worst = -np.inf
    for _ in range(count):
        n = int(rng.integers(2, 13))
        J = blocks_from_labels(rng.integers(0, max(1, n // 2), n).tolist())
        M = compatible_partition_matrix(n, J, rng)
        if not block_row_sums_constant(M, J):
            return False, "constructed matrix has non-constant block row sums"
        x = rng.standard_normal(n)
        xh = partition_average(x, J)
        full = 0.5 * x @ M @ x
        gap = 0.5 * xh @ M @ xh - full
        worst = max(worst, gap)
        if gap > 1e-10 * max(1.0, abs(full)):
            return False, "averaged quadratic form exceeds the original by %.3g" % gap
    return True, "%d triples, largest increase %.3g" % (count, worst)


def check_averaging_block_sums(seed: int, count: int) -> Outcome:
    rng = rng_for(seed)
    for _ in range(count):
        n = int(rng.integers(1, 20))
        J = blocks_from_labels(rng.integers(0, 4, n).tolist())
        x = rng.standard_normal(n)
        xh = partition_average(x, J)
        for block in J:
            idx = list(block)
            if abs(xh[idx].sum() - x[idx].sum()) > 1e-12 * (1 + np.abs(x[idx]).sum()):
                return False, "block %s changed its sum" % (block,)
    return True, "%d vectors" % count


def check_unfoldable_implies_tractable(seed: int, count: int) -> Outcome:
    rng = rng_for(seed)
    unfoldable = tractable = 0
    for _ in range(count):
        report = classify(encode_milcqp(_structured_instance(rng)))
        unfoldable += report.unfoldable
        tractable += report.mp_tractable
        if report.unfoldable and not report.mp_tractable:
            return False, "unfoldable graph with non-constant block %r" % (report.witness,)
    return True, "%d graphs: %d unfoldable, %d MP-tractable" % (count, unfoldable, tractable)


def check_generic_unfoldable(seed: int, count: int) -> Outcome:
    config = GenConfig(seed=seed)
    for index in range(count):
        report = classify(encode_lcqp(gen_lcqp(config, index)))
        if not report.unfoldable:
            return False, "instance %d has %d variable classes" % (index, len(report.partition.J))
    return True, "%d generated instances, all unfoldable" % count


def check_refinement_monotone(seed: int, count: int) -> Outcome:
    config = SMALL.replace(seed=seed, integer_prob=0.5)
    rng = rng_for(seed)
    for index in range(count):
        instance = gen_milcqp(config, index) if index % 2 else _structured_instance(rng)
        graph = encode_milcqp(instance)
        bound = graph.m + graph.n + 1
        for variant in WLVariant:
            colorings = refine(graph, variant, bound + 2)
            for a, b in zip(colorings, colorings[1:]):
                if not (_refines(b.colors_V, a.colors_V) and _refines(b.colors_W, a.colors_W)):
                    return False, "round %d does not refine round %d (%s)" % (b.round, a.round, variant.value)
            sp = stable_partition(graph, variant)
            if sp.rounds_to_stabilize > bound:
                return False, "%d rounds to stabilize, more than m + n + 1 = %d" % (sp.rounds_to_stabilize, bound)
            last = colorings[-1]
            if (last.num_V_classes, last.num_W_classes) != (len(sp.I), len(sp.J)):
                return False, "partition changed after stabilizing (%s)" % variant.value
    return True, "%d graphs, both variants" % count


def check_refinement_equivariant(seed: int, count: int) -> Outcome:
    rng = rng_for(seed)
    for _ in range(count):
        graph = encode_milcqp(_structured_instance(rng))
        perm = VertexPermutation.random(graph.m, graph.n, rng)
        for variant in WLVariant:
            first = refine(graph, variant, 4)
            again = refine(graph, variant, 4)
            moved = refine(permute(graph, perm), variant, 4)
            if first != again:
                return False, "refinement is not deterministic (%s)" % variant.value
            for c1, c2 in zip(first, moved):
                if any(c2.colors_V[s] != c for s, c in zip(perm.sigma_V, c1.colors_V)) or \
                        any(c2.colors_W[s] != c for s, c in zip(perm.sigma_W, c1.colors_W)):
                    return False, "colors do not follow the relabeling at round %d (%s)" % (c1.round, variant.value)
    return True, "%d graphs" % count


def check_wl_equivalence_relation(seed: int, count: int) -> Outcome:
    rng = rng_for(seed)
    for _ in range(count):
        g = encode_milcqp(_structured_instance(rng))
        h = permute(g, VertexPermutation.random(g.m, g.n, rng))
        k = permute(h, VertexPermutation.random(g.m, g.n, rng))
        other = encode_milcqp(_structured_instance(rng))
        for variant in WLVariant:
            if not (wl_equivalent(g, g, variant) and wl_equivalent(g, h, variant) and wl_equivalent(h, g, variant)
                    and wl_equivalent(h, k, variant) and wl_equivalent(g, k, variant)):
                return False, "relabeled copies are not equivalent (%s)" % variant.value
            if wl_equivalent(g, other, variant) != wl_equivalent(other, g, variant):
                return False, "equivalence is not symmetric (%s)" % variant.value
    return True, "%d graphs and two relabelings each" % count


def check_multiset_refines_sum(seed: int, count: int) -> Outcome:
    rng = rng_for(seed)
    for _ in range(count):
        graph = encode_milcqp(_structured_instance(rng, 4, 6))
        for fine, coarse in zip(refine(graph, WLVariant.MILCQP_MULTISET, 5), refine(graph, WLVariant.LCQP_SUM, 5)):
            if not (_refines(fine.colors_V, coarse.colors_V) and _refines(fine.colors_W, coarse.colors_W)):
                return False, "multiset coloring is coarser than the summed one at round %d" % fine.round
    return True, "%d graphs" % count


def check_tractable_isomorphic(seed: int, count: int) -> Outcome:
    rng = rng_for(seed)
    constructed = encode_milcqp(load_single('tractable-folded'))
    report = classify(constructed)
    if not report.mp_tractable or report.unfoldable:
        return False, "constructed instance classified as mp_tractable=%s unfoldable=%s" % (report.mp_tractable, report.unfoldable)
    graphs = [constructed] + [encode_milcqp(_structured_instance(rng)) for _ in range(count)]
    matched = 0
    for g in graphs:
        if not classify(g).mp_tractable:
            continue
        h = permute(g, VertexPermutation.random(g.m, g.n, rng))
        perm = find_isomorphism(g, h)
        if perm is None or permute(h, perm) != g:
            return False, "no isomorphism found between a tractable graph and its relabeling"
        matched += 1
    return True, "%d tractable graphs matched to their relabelings" % matched


def check_gnn_invariance(seed: int, count: int) -> Outcome:
    rng = rng_for(seed)
    worst = 0.0
    for k in range(count):
        instance = gen_milcqp(SMALL.replace(seed=seed), k)
        for variant in ('lcqp', 'milcqp'):
            graph = encode_milcqp(instance) if variant == 'milcqp' else encode_lcqp(relax(instance))
            perm = VertexPermutation.random(graph.m, graph.n, rng)
            moved = permute(graph, perm)
            g_params = init_params(GNNConfig(variant=variant, head='graph', width=8, num_layers=2), seed + k)
            n_params = init_params(GNNConfig(variant=variant, head='node', width=8, num_layers=2), seed + k)
            y, y_moved = forward_graph(g_params, graph), forward_graph(g_params, moved)
            z, z_moved = forward_node(n_params, graph), forward_node(n_params, moved)
            worst = max(worst, abs(y - y_moved) / (1 + abs(y)),
                        float(np.max(np.abs(z_moved[list(perm.sigma_W)] - z) / (1 + np.abs(z)))))
    if worst > 1e-9:
        return False, "outputs change under relabeling by up to %.3g" % worst
    return True, "%d graphs per variant, largest gap %.3g" % (count, worst)


def check_symmetric_solution(seed: int, count: int, options: Optional[SolverOptions] = None) -> Outcome:
    rng = rng_for(seed)
    config = SMALL.replace(seed=seed, eq_prob=0.0)
    solved = 0
    for index in range(count):
        instance = gen_symmetric_lcqp(config, 3, index)
        perm = VertexPermutation.random(instance.m, instance.n, rng)
        moved = apply_permutation(instance, perm.sigma_V, perm.sigma_W)
        r1, r2 = solve_lcqp(instance, options), solve_lcqp(moved, options)
        if r1.status is not r2.status:
            return False, "relabeled instance has status %s, original %s" % (r2.status.value, r1.status.value)
        if not r1.is_optimal:
            continue
        solved += 1
        scale = 1 + abs(r1.value)
        if abs(r1.value - r2.value) > 1e-6 * scale:
            return False, "optimal values %.10g and %.10g differ" % (r1.value, r2.value)
        x, x_moved = r1.x_star, r2.x_star
        tol = 1e-5 * (1 + np.linalg.norm(x))
        if np.ptp(x[:3]) > tol:
            return False, "minimum-norm solution varies by %.3g on interchangeable variables" % np.ptp(x[:3])
        if np.max(np.abs(x_moved[list(perm.sigma_W)] - x)) > tol:
            return False, "minimum-norm solution does not follow the relabeling"

    # Relaxations of a pair that refinement cannot separate share their optimal value
    first, second = load_pair('objective-gap')
    g1, g2 = encode_lcqp(relax(first)), encode_lcqp(relax(second))
    if not wl_equivalent(g1, g2, WLVariant.LCQP_SUM):
        return False, "relaxed corpus pair is separated by refinement"
    v1, v2 = solve_lcqp(relax(first), options).value, solve_lcqp(relax(second), options).value
    if abs(v1 - v2) > 1e-6:
        return False, "relaxed corpus pair has optima %.10g and %.10g" % (v1, v2)
    return True, "%d of %d instances optimal; relaxed corpus pair agrees at %.6g" % (solved, count, v1)


def check_solver_oracles_agree(seed: int, count: int, options: Optional[SolverOptions] = None) -> Outcome:
    config = TINY_MI.replace(seed=seed)
    for index in range(count):
        instance = gen_milcqp(config, index)
        bb = solve_milcqp(instance, options)
        bf = brute_force_milcqp(instance, options)
        if bb.status is not bf.status:
            return False, "instance %d: branch-and-bound says %s, enumeration %s" % (index, bb.status.value, bf.status.value)
        if bb.status is Status.OPTIMAL and abs(bb.value - bf.value) > 1e-6 * (1 + abs(bf.value)):
            return False, "instance %d: values %.10g and %.10g" % (index, bb.value, bf.value)
    return True, "%d instances" % count


def check_psd_sampled(seed: int, count: int) -> Outcome:
    rng = rng_for(seed)
    for index in range(count):
        instance = gen_lcqp(GenConfig(seed=seed), index)
        if not validate(instance).ok:
            return False, "generated instance %d does not validate" % index
        Q = instance.Q_dense
        for x in rng.standard_normal((10, instance.n)):
            if x @ Q @ x < -1e-8 * (x @ x):
                return False, "x^T Q x negative for instance %d" % index
    return True, "%d instances, 10 directions each" % count


def singular_lcqp(config: GenConfig, index: int) -> LCQPInstance:
    """A generated instance with roughly half of its variables removed from the objective.

    Q becomes D Q D for a random 0/1 diagonal D and c is zeroed where D is, so optima are
    typically not unique and the minimum-norm rule decides.
    """
    instance = gen_lcqp(config, index)
    keep = rng_for(config.seed, index, SINGULAR_STREAM).random(instance.n) < 0.5
    D = np.diag(keep.astype(float))
    return LCQPInstance.create(D @ instance.Q_dense @ D, np.where(keep, instance.c, 0.0), instance.A_dense,
                               instance.b, instance.senses, instance.l, instance.u, instance.meta)


def minimum_norm_excess(instance: AnyInstance, x: np.ndarray, step: float = 1e-2) -> float:
    """How much shorter than ``x`` a feasible point with the same objective value can be.

    Moves ``x`` by +-step along an orthonormal basis of the null space of [Q; A_eq; c^T], which
    keeps the objective and the equality rows fixed, and keeps the moves that stay as feasible as
    ``x``. Returns the largest ||x||^2 - ||y||^2 over them, or 0 when none is shorter.
    """
    base = instance.base
    eq = [i for i, s in enumerate(base.senses) if s is Sense.EQ]
    N = null_space(np.vstack([base.Q_dense, base.A_dense[eq], base.c[None, :]]))
    slack = max(constraint_violation(instance, x), 1e-9)
    worst = 0.0
    for d in N.T:
        for t in (step, -step):
            y = x + t * d
            if constraint_violation(instance, y) <= slack:
                worst = max(worst, float(x @ x - y @ y))
    return worst


def gradient_error(params: GNNParams, graphs: Sequence[QPGraph], labels: Sequence[Any],
                   rng: np.random.Generator, per_weight: int = 1, h: float = 1e-6) -> float:
    "Largest scaled gap between backward() and central differences on sampled weight entries"
    _, grads, _ = backward(params, graphs, labels)
    worst = 0.0
    for k in sorted(params.weights):
        W = params.weights[k]
        for idx in rng.choice(W.size, size=min(per_weight, W.size), replace=False):
            old = W.flat[idx]
            W.flat[idx] = old + h
            up, _, _ = backward(params, graphs, labels)
            W.flat[idx] = old - h
            down, _, _ = backward(params, graphs, labels)
            W.flat[idx] = old
            numeric = (up - down) / (2 * h)
            worst = max(worst, abs(numeric - grads[k].flat[idx]) / max(1.0, abs(numeric)))
    return worst


def _wl_variant(variant: str) -> WLVariant:
    return WLVariant.MILCQP_MULTISET if variant == 'milcqp' else WLVariant.LCQP_SUM


def _graph_as(instance: MILCQPInstance, variant: str) -> QPGraph:
    return encode_milcqp(instance) if variant == 'milcqp' else encode_lcqp(relax(instance))


def check_instance_round_trip(seed: int, count: int) -> Outcome:
    config = SMALL.replace(seed=seed, integer_prob=0.5)
    for index in range(count):
        for instance in (gen_lcqp(config, index), gen_milcqp(config, index)):
            back = loads(dumps(instance))
            if back != instance or back.meta != instance.meta:
                return False, "instance %d changed after writing and reading back" % index
    return True, "%d instances of each kind" % count


def check_encode_permute_commute(seed: int, count: int) -> Outcome:
    rng = rng_for(seed)
    config = SMALL.replace(seed=seed, integer_prob=0.5)
    for index in range(count):
        instance = gen_milcqp(config, index)
        perm = VertexPermutation.random(instance.m, instance.n, rng)
        for inst in (instance, relax(instance)):
            moved = apply_permutation(inst, perm.sigma_V, perm.sigma_W)
            if encode(moved) != permute(encode(inst), perm):
                return False, "encoding a relabeled instance differs from relabeling its graph (instance %d)" % index
    return True, "%d instances, both encodings" % count


def check_solver_kkt_min_norm(seed: int, count: int, options: Optional[SolverOptions] = None) -> Outcome:
    options = options or SolverOptions()
    config = SMALL.replace(seed=seed)
    solved = 0
    worst = 0.0
    for index in range(count):
        instance = singular_lcqp(config, index)
        result = solve_lcqp(instance, options)
        if not result.is_optimal:
            continue
        solved += 1
        if result.kkt_residual > options.eps_kkt:
            return False, "instance %d: KKT residual %.3g" % (index, result.kkt_residual)
        excess = minimum_norm_excess(instance, result.x_star)
        worst = max(worst, excess)
        if excess > 1e-8:
            return False, "instance %d: an optimal point is shorter by %.3g" % (index, excess)
    return True, "%d of %d singular instances optimal, largest norm excess %.3g" % (solved, count, worst)


def check_gnn_gradient(seed: int, count: int) -> Outcome:
    rng = rng_for(seed)
    worst = 0.0
    for k in range(count):
        variant = str(rng.choice(['lcqp', 'milcqp']))
        head = str(rng.choice(['graph', 'node']))
        depth = int(rng.integers(1, 4))
        config = GNNConfig(variant=variant, head=head, width=4, num_layers=2, mlp_depth=depth)
        gen = SMALL.replace(m=3, n=5, nnz_A=7, seed=seed, integer_prob=0.5)
        graphs = [_graph_as(gen_milcqp(gen, k * 2 + i), variant) for i in range(2)]
        if head == 'graph':
            labels = list(rng.uniform(1.0, 3.0, 2) * rng.choice((-1.0, 1.0), 2))
        else:
            labels = [rng.uniform(0.5, 2.0, g.n) for g in graphs]
        error = gradient_error(init_params(config, seed + k), graphs, labels, rng)
        worst = max(worst, error)
        if error > 1e-4:
            return False, "%s/%s depth %d: gradient off by %.3g" % (variant, head, depth, error)
    return True, "%d configurations, largest gap %.3g" % (count, worst)


def check_node_outputs_on_classes(seed: int, count: int) -> Outcome:
    rng = rng_for(seed)
    instances = [load_pair('objective-gap')[0]] + [_structured_instance(rng) for _ in range(count)]
    for k, instance in enumerate(instances):
        for variant in ('lcqp', 'milcqp'):
            graph = _graph_as(instance, variant)
            params = init_params(GNNConfig(variant=variant, head='node', width=8, num_layers=3), seed + k)
            z = forward_node(params, graph)
            tol = 1e-9 * (1 + np.max(np.abs(z)))
            for block in stable_partition(graph, _wl_variant(variant)).J:
                if np.ptp(z[list(block)]) > tol:
                    return False, "outputs vary by %.3g on the class %s (%s)" % (np.ptp(z[list(block)]), block, variant)
    return True, "%d graphs per variant" % len(instances)


def check_wl_equivalent_outputs(seed: int, count: int) -> Outcome:
    objective_gap, solution_gap = load_pair('objective-gap'), load_pair('solution-gap')
    cases = [('milcqp', objective_gap), ('milcqp', solution_gap), ('lcqp', objective_gap)]
    worst = 0.0
    for variant, (first, second) in cases:
        g1, g2 = _graph_as(first, variant), _graph_as(second, variant)
        if not wl_equivalent(g1, g2, _wl_variant(variant)):
            return False, "corpus pair is separated by refinement (%s)" % variant
        for k in range(count):
            params = init_params(GNNConfig(variant=variant, width=8, num_layers=3), seed + k)
            node = init_params(GNNConfig(variant=variant, head='node', width=8, num_layers=3), seed + k)
            y1, y2 = forward_graph(params, g1), forward_graph(params, g2)
            z1, z2 = np.sort(forward_node(node, g1)), np.sort(forward_node(node, g2))
            worst = max(worst, abs(y1 - y2) / (1 + abs(y1)), float(np.max(np.abs(z1 - z2) / (1 + np.abs(z1)))))
    if worst > 1e-9:
        return False, "equivalent graphs get outputs differing by %.3g" % worst
    return True, "%d pairs, %d parameter draws each, largest gap %.3g" % (len(cases), count, worst)


def check_generator_moments(seed: int, count: int) -> Outcome:
    config = GenConfig(seed=seed)
    n = config.n
    densities, shares = [], []
    for index in range(count):
        instance = gen_milcqp(config, index)
        if len(instance.a_triplets()) != config.nnz_A:
            return False, "instance %d has %d nonzeros in A" % (index, len(instance.a_triplets()))
        densities.append(instance.Q.nnz / n ** 2)
        shares.append(len(instance.integer_set) / n)
    density, share = float(np.mean(densities)), float(np.mean(shares))
    if not 0.04 <= density <= 0.16:
        return False, "mean density of Q is %.3g" % density
    if not 0.3 <= share <= 0.7:
        return False, "mean share of integer variables is %.3g" % share
    return True, "%d instances, Q density %.3g, integer share %.3g" % (count, density, share)


def check_constant_weights_agree(seed: int, count: int) -> Outcome:
    rng = rng_for(seed)
    for _ in range(count):
        m, n = int(rng.integers(2, 5)), int(rng.integers(3, 8))
        A = (rng.random((m, n)) < 0.5).astype(float)
        s = (rng.random(n) < 0.5).astype(float)
        c = rng.integers(0, 2, n).astype(float)
        senses = [Sense.GE if t else Sense.LE for t in rng.random(m) < 0.5]
        instance = MILCQPInstance.create(np.outer(s, s), c, A, np.ones(m), senses, np.zeros(n), np.ones(n),
                                         np.flatnonzero(rng.random(n) < 0.5))
        graph = encode_milcqp(instance)
        summed = stable_partition(graph, WLVariant.LCQP_SUM)
        multiset = stable_partition(graph, WLVariant.MILCQP_MULTISET)
        if sorted(map(sorted, summed.I)) != sorted(map(sorted, multiset.I)) or \
                sorted(map(sorted, summed.J)) != sorted(map(sorted, multiset.J)):
            return False, "variants disagree on a graph with unit weights: %s vs %s" % (summed.J, multiset.J)
    return True, "%d graphs with unit weights" % count


CHECKS: Dict[str, Callable[..., Outcome]] = {
    'averaging-inequality': check_averaging_inequality,
    'averaging-block-sums': check_averaging_block_sums,
    'unfoldable-implies-tractable': check_unfoldable_implies_tractable,
    'generic-unfoldable': check_generic_unfoldable,
    'refinement-monotone': check_refinement_monotone,
    'refinement-equivariant': check_refinement_equivariant,
    'wl-equivalence-relation': check_wl_equivalence_relation,
    'multiset-refines-sum': check_multiset_refines_sum,
    'tractable-isomorphic': check_tractable_isomorphic,
    'gnn-invariance': check_gnn_invariance,
    'symmetric-solution': check_symmetric_solution,
    'solver-oracles-agree': check_solver_oracles_agree,
    'psd-sampled': check_psd_sampled,
    'instance-round-trip': check_instance_round_trip,
    'encode-permute-commute': check_encode_permute_commute,
    'solver-kkt-min-norm': check_solver_kkt_min_norm,
    'gnn-gradient': check_gnn_gradient,
    'node-outputs-on-classes': check_node_outputs_on_classes,
    'wl-equivalent-outputs': check_wl_equivalent_outputs,
    'generator-moments': check_generator_moments,
    'constant-weights-agree': check_constant_weights_agree,
}

_TAKES_OPTIONS = {'symmetric-solution', 'solver-oracles-agree', 'solver-kkt-min-norm'}


@dataclass
class PropertyResult:
    check: str
    seed: int
    passed: bool
    detail: str


@dataclass
class PropertyReport:
    rows: List[PropertyResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def failures(self) -> List[PropertyResult]:
        return [r for r in self.rows if not r.passed]


def run_property_suite(seeds: Sequence[int] = (1, 2, 3), scale: float = 1.0,
                       checks: Optional[Sequence[str]] = None,
                       options: Optional[SolverOptions] = None) -> PropertyReport:
    """Runs the named checks (all by default) once per seed.

    ``scale`` multiplies every sample count; each check draws at least one sample.
    Failures are report rows, never exceptions.
    """
    report = PropertyReport()
    for name in checks or list(CHECKS):
        if name not in CHECKS:
            raise KeyError("Unknown check %r. Expected one of %s" % (name, sorted(CHECKS)))
        count = max(1, int(round(SAMPLES[name] * scale)))
        for seed in seeds:
            kwargs = {'options': options} if name in _TAKES_OPTIONS else {}
            passed, detail = CHECKS[name](seed, count, **kwargs)
            logger.info("%s (seed %d): %s, %s", name, seed, 'passed' if passed else 'FAILED', detail)
            report.rows.append(PropertyResult(name, seed, passed, detail))
    return report
