"""End-to-end runs at full size. These take hours; set QPGNN_SLOW_TESTS to enable them."""
import os
import shutil
import tempfile
from unittest import TestCase, main, skipUnless

import numpy as np

from qpgnn.generator import gen_fixed_structure, gen_lcqp, gen_milcqp, label_dataset, dataset_paths, write_dataset
from qpgnn.harness import run_fit, run_generalization
from qpgnn.options import ExperimentSpec, GenConfig
from qpgnn.properties import minimum_norm_excess, singular_lcqp
from qpgnn.solvers import brute_force_milcqp, solve_lcqp, solve_milcqp

SLOW = os.environ.get('QPGNN_SLOW_TESTS')


@skipUnless(SLOW, "set QPGNN_SLOW_TESTS to run the acceptance experiments")
class TestAcceptance(TestCase):

    def setUp(self):
        self.dir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.dir)

    def test_lcqp_optimality(self):
        config = GenConfig(m=10, n=20, nnz_A=40)
        for k in range(50):
            res = solve_lcqp(gen_lcqp(config, k))
            if res.is_optimal:
                self.assertLessEqual(res.kkt_residual, 1e-6, k)
            inst = singular_lcqp(config, k)
            res = solve_lcqp(inst)
            if res.is_optimal:
                self.assertLessEqual(res.kkt_residual, 1e-6, k)
                self.assertLessEqual(minimum_norm_excess(inst, res.x_star), 1e-8, k)

    def test_milcqp_oracles(self):
        config = GenConfig(m=3, n=6, nnz_A=8, integer_bound=2)
        for k in range(50):
            inst = gen_milcqp(config, k)
            fast, exact = solve_milcqp(inst), brute_force_milcqp(inst)
            self.assertEqual(fast.status, exact.status, k)
            if exact.is_optimal:
                self.assertAlmostEqual(fast.value, exact.value, places=6)
                np.testing.assert_allclose(fast.x_star, exact.x_star, atol=1e-6)

    def test_fit_objective(self):
        config = GenConfig(m=10, n=50)
        data = os.path.join(self.dir, 'data')
        write_dataset([gen_lcqp(config, k) for k in range(100)], data, config)
        label_dataset(dataset_paths(data))
        result = run_fit(ExperimentSpec(dataset=data, out_dir=os.path.join(self.dir, 'fit')))
        best = result.best_by_width()
        self.assertTrue(best[16] >= best[32] >= best[64], best.to_dict())
        self.assertLess(best[64], 0.05)

    def test_generalization(self):
        config = GenConfig(m=10, n=50)
        train_dir, val_dir = os.path.join(self.dir, 'train'), os.path.join(self.dir, 'val')
        write_dataset(gen_fixed_structure(config, 2000), train_dir, config)
        write_dataset(gen_fixed_structure(config, 200, start=2000), val_dir, config)
        result = run_generalization(ExperimentSpec(dataset=train_dir, validation=val_dir,
                                                   out_dir=os.path.join(self.dir, 'gen')))
        self.assertTrue(result.improves, result.summary.to_dict('records'))


if __name__ == '__main__':
    main()
