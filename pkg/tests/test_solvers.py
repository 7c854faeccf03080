import json
import os
import shutil
import tempfile
from unittest import TestCase, main, mock

import numpy as np

from qpgnn import LCQPInstance, MILCQPInstance, write_instance
from qpgnn.corpus import load_pair
from qpgnn.exceptions import EnumerationLimitError, InstanceError, SearchIncomplete, SolverError
from qpgnn.generator import gen_milcqp
from qpgnn.instance import is_feasible, objective, relax
from qpgnn.options import GenConfig, SolverOptions
from qpgnn.properties import minimum_norm_excess, singular_lcqp
from qpgnn.solvers import (SolveResult, Status, TargetLabels, admm_qp, brute_force_milcqp, evaluate_targets,
                           is_mi_feasible, kkt_residual, label_path, lp_phase1, read_label, solve_lcqp, solve_lp,
                           solve_milcqp, write_label)
from qpgnn.utils import FS


def box_qp(Q, c, lo=0.0, hi=5.0):
    n = len(c)
    return LCQPInstance.create(Q, c, np.zeros((0, n)), [], [], [lo] * n, [hi] * n)


class TestSimplex(TestCase):

    def test_optimal(self):
        res = solve_lp([-1.0, -1.0], A_ub=[[1.0, 2.0], [3.0, 1.0]], b_ub=[4.0, 6.0], lo=[0.0, 0.0])
        self.assertIs(res.status, Status.OPTIMAL)
        np.testing.assert_allclose(res.x, [1.6, 1.2], atol=1e-9)
        self.assertAlmostEqual(res.value, -2.8)

    def test_unbounded(self):
        res = solve_lp([-1.0, 0.0], A_eq=[[0.0, 1.0]], b_eq=[1.0], lo=[0.0, 0.0])
        self.assertIs(res.status, Status.UNBOUNDED)
        self.assertIsNotNone(res.ray)

    def test_phase1(self):
        x = lp_phase1(2, A_ub=[[1.0, 1.0]], b_ub=[1.0], A_eq=[[1.0, -1.0]], b_eq=[0.5], lo=[0.0, 0.0])
        self.assertIsNotNone(x)
        self.assertLessEqual(x[0] + x[1], 1.0 + 1e-9)
        self.assertAlmostEqual(x[0] - x[1], 0.5)
        self.assertIsNone(lp_phase1(1, A_ub=[[1.0]], b_ub=[-1.0], lo=[0.0]))


class TestADMM(TestCase):

    def test_box_qp(self):
        res = admm_qp(2 * np.eye(2), [-2.0, -4.0], np.eye(2), [0.0, 0.0], [1.0, 1.0])
        np.testing.assert_allclose(res.x, [1.0, 1.0], atol=1e-6)
        self.assertLessEqual(res.prim_res, 1e-6)

    def test_equality(self):
        # min x0^2 + x1^2  s.t.  x0 + x1 = 2
        res = admm_qp(2 * np.eye(2), [0.0, 0.0], [[1.0, 1.0]], [2.0], [2.0])
        np.testing.assert_allclose(res.x, [1.0, 1.0], atol=1e-6)


class TestLCQP(TestCase):

    def test_interior_optimum(self):
        res = solve_lcqp(box_qp([[1.0]], [-1.0]))
        self.assertTrue(res.is_optimal)
        self.assertAlmostEqual(res.value, -0.5, places=7)
        np.testing.assert_allclose(res.x_star, [1.0], atol=1e-7)
        self.assertLessEqual(res.kkt_residual, 1e-6)

    def test_infeasible(self):
        inst = LCQPInstance.create(np.eye(1), [0.0], [[1.0], [1.0]], [0.0, 1.0], ['<=', '>='])
        res = solve_lcqp(inst)
        self.assertIs(res.status, Status.INFEASIBLE)
        self.assertIsNone(res.value)
        self.assertIsNone(res.x_star)

    def test_unbounded(self):
        inst = LCQPInstance.create(np.zeros((2, 2)), [-1.0, 0.0], [[0.0, 1.0]], [1.0], ['='], [0.0, 0.0])
        res = solve_lcqp(inst)
        self.assertIs(res.status, Status.UNBOUNDED)
        d = res.certificate
        self.assertLess(inst.c @ d, 0)
        self.assertGreaterEqual(d[0], 0)
        self.assertAlmostEqual(d[1], 0.0)

    def test_unbounded_along_null_space(self):
        # Q is singular, the objective decreases along (1, -1)
        Q = np.array([[1.0, 1.0], [1.0, 1.0]])
        inst = LCQPInstance.create(Q, [1.0, -1.0], np.zeros((0, 2)), [], [])
        self.assertIs(solve_lcqp(inst).status, Status.UNBOUNDED)

    def test_minimum_norm(self):
        inst = LCQPInstance.create(np.zeros((2, 2)), [0.0, 0.0], [[1.0, 1.0]], [2.0], ['='])
        res = solve_lcqp(inst)
        self.assertTrue(res.is_optimal)
        self.assertAlmostEqual(res.value, 0.0)
        np.testing.assert_allclose(res.x_star, [1.0, 1.0], atol=1e-6)

    def test_minimum_norm_random(self):
        # no feasible move along the null space of [Q; A_eq; c^T] shortens the returned optimum
        config = GenConfig(m=4, n=8, nnz_A=12, bound_sigma=3.0)
        solved = 0
        for k in range(100):
            inst = singular_lcqp(config, k)
            res = solve_lcqp(inst)
            if not res.is_optimal:
                continue
            solved += 1
            self.assertLessEqual(res.kkt_residual, 1e-6, k)
            self.assertLessEqual(minimum_norm_excess(inst, res.x_star), 1e-8, k)
        self.assertGreater(solved, 5)

    def test_minimum_norm_excess(self):
        inst = LCQPInstance.create(np.zeros((2, 2)), [0.0, 0.0], [[1.0, 1.0]], [2.0], ['='])
        self.assertEqual(minimum_norm_excess(inst, np.array([1.0, 1.0])), 0.0)
        self.assertGreater(minimum_norm_excess(inst, np.array([1.5, 0.5])), 0.0)

    def test_kkt(self):
        inst = box_qp([[2.0, 0.0], [0.0, 2.0]], [-2.0, -4.0], hi=1.0)
        res = solve_lcqp(inst)
        np.testing.assert_allclose(res.x_star, [1.0, 1.0], atol=1e-7)
        self.assertLessEqual(kkt_residual(inst, res.x_star), 1e-6)
        # an interior point is not stationary
        self.assertGreater(kkt_residual(inst, [0.5, 0.5]), 0.5)

    def test_invalid(self):
        inst = box_qp([[1.0, 2.0], [2.0, 1.0]], [0.0, 0.0])
        self.assertRaises(InstanceError, solve_lcqp, inst)

    def test_relaxations_of_counterexample(self):
        for inst in load_pair('objective-gap'):
            res = solve_lcqp(relax(inst))
            self.assertAlmostEqual(res.value, 3.75, places=6)
            np.testing.assert_allclose(res.x_star, [0.5] * 6, atol=1e-6)

    def test_generated(self):
        for k in range(10):
            inst = relax(gen_milcqp(GenConfig(m=4, n=8, nnz_A=12), k))
            res = solve_lcqp(inst)
            if res.is_optimal:
                self.assertTrue(is_feasible(inst, res.x_star, 1e-6))
                self.assertAlmostEqual(objective(inst, res.x_star), res.value, places=6)
                self.assertLessEqual(res.kkt_residual, 1e-6)


class TestMixedInteger(TestCase):

    def test_counterexample_optima(self):
        first, second = load_pair('objective-gap')
        res = solve_milcqp(first)
        self.assertAlmostEqual(res.value, 4.5, places=6)
        # the two covers of the 6-cycle tie; the lexicographically smaller one is reported
        np.testing.assert_allclose(res.x_star, [0, 1, 0, 1, 0, 1], atol=1e-6)
        self.assertAlmostEqual(solve_milcqp(second).value, 6.0, places=6)

        ties = brute_force_milcqp(first, collect_ties=True)
        self.assertEqual(len(ties.solutions), 2)
        np.testing.assert_allclose(ties.x_star, res.x_star, atol=1e-6)

    def test_unique_solutions(self):
        first, second = load_pair('solution-gap')
        for inst, expected in ((first, [3, 3, 0, 0, 0, 0, 0]), (second, [2, 2, 2, 0, 0, 0, 0])):
            res = brute_force_milcqp(inst, collect_ties=True)
            self.assertAlmostEqual(res.value, 24.0, places=6)
            self.assertEqual(len(res.solutions), 1)
            np.testing.assert_allclose(res.x_star, expected, atol=1e-6)
            np.testing.assert_allclose(solve_milcqp(inst).x_star, expected, atol=1e-6)

    def test_against_brute_force(self):
        config = GenConfig(m=2, n=4, nnz_A=5, bound_sigma=2.0, integer_prob=0.7, integer_bound=1)
        for k in range(15):
            inst = gen_milcqp(config, k)
            bb = solve_milcqp(inst)
            bf = brute_force_milcqp(inst)
            self.assertIs(bb.status, bf.status)
            if bb.is_optimal:
                self.assertAlmostEqual(bb.value, bf.value, places=6)
                np.testing.assert_allclose(bb.x_star, bf.x_star, atol=1e-5)
            self.assertEqual(is_mi_feasible(inst), bb.status is not Status.INFEASIBLE)

    def test_integer_infeasible(self):
        # 2 x0 = 1 has only a fractional solution
        inst = MILCQPInstance.create(np.eye(1), [0.0], [[2.0]], [1.0], ['='], [0.0], [3.0], [0])
        self.assertTrue(solve_lcqp(inst).is_optimal)
        self.assertIs(solve_milcqp(inst).status, Status.INFEASIBLE)
        self.assertIs(brute_force_milcqp(inst).status, Status.INFEASIBLE)
        self.assertFalse(is_mi_feasible(inst))

    def test_continuous_delegates(self):
        inst = box_qp([[1.0]], [-1.0])
        self.assertAlmostEqual(solve_milcqp(inst).value, -0.5, places=7)
        self.assertAlmostEqual(brute_force_milcqp(inst).value, -0.5, places=7)

    def test_limits(self):
        first, _ = load_pair('objective-gap')
        self.assertRaises(SearchIncomplete, solve_milcqp, first, SolverOptions(node_limit=1))
        self.assertRaises(EnumerationLimitError, brute_force_milcqp, first, SolverOptions(enum_limit=10))
        unbounded = MILCQPInstance.create(np.eye(1), [0.0], np.zeros((0, 1)), [], [], [0.0], [np.inf], [0])
        self.assertRaises(SolverError, brute_force_milcqp, unbounded)


class TestTargets(TestCase):

    def setUp(self):
        self.dir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.dir)

    def test_labels(self):
        infeasible = TargetLabels.from_result(SolveResult(Status.INFEASIBLE))
        self.assertEqual((infeasible.feas, infeasible.obj, infeasible.sol), (0, np.inf, None))
        unbounded = TargetLabels.from_result(SolveResult(Status.UNBOUNDED))
        self.assertEqual((unbounded.feas, unbounded.obj, unbounded.sol), (1, -np.inf, None))
        labels = evaluate_targets(load_pair('objective-gap')[1])
        self.assertEqual(labels.feas, 1)
        self.assertAlmostEqual(labels.obj, 6.0, places=6)
        self.assertEqual(len(labels.sol), 6)
        self.assertRaises(ValueError, TargetLabels, 0, 1.0)
        self.assertRaises(ValueError, TargetLabels, 1, 1.0)

    def test_label_sidecar(self):
        path = os.path.join(self.dir, 'inst.json')
        inst = box_qp([[1.0]], [-1.0])
        write_instance(inst, path)
        self.assertIsNone(read_label(path))
        result = solve_lcqp(inst)
        self.assertEqual(write_label(result, path), label_path(path))
        self.assertEqual(label_path(path), os.path.join(self.dir, 'inst.label.json'))
        with mock.patch.object(FS, 'open', wraps=FS.open) as opened:
            back = read_label(path)
        opened.assert_called_once_with(label_path(path))
        self.assertIs(back.status, Status.OPTIMAL)
        self.assertEqual(back.value, result.value)
        np.testing.assert_array_equal(back.x_star, result.x_star)
        with open(label_path(path)) as f:
            self.assertEqual(json.load(f)['status'], 'optimal')

    def test_unbounded_sidecar(self):
        path = os.path.join(self.dir, 'ray.json')
        inst = LCQPInstance.create(np.zeros((1, 1)), [-1.0], np.zeros((0, 1)), [], [], [0.0])
        write_label(solve_lcqp(inst), path)
        back = read_label(path)
        self.assertIs(back.status, Status.UNBOUNDED)
        self.assertGreater(back.certificate[0], 0)


if __name__ == '__main__':
    main()
