import json
import os
import shutil
import tempfile
from unittest import TestCase, main

import numpy as np

from qpgnn import VertexPermutation, encode, permute, validate
from qpgnn.exceptions import ConfigurationError
from qpgnn.generator import (MANIFEST, dataset_paths, gen_fixed_structure, gen_lcqp, gen_milcqp, gen_symmetric_lcqp,
                             label_dataset, load_dataset, make_sparse_spd, read_manifest, write_dataset)
from qpgnn.options import GenConfig
from qpgnn.solvers import label_path


class TestGenerator(TestCase):

    def test_sparse_spd(self):
        np.testing.assert_array_equal(make_sparse_spd(6, 1.0, 0).toarray(), np.eye(6))
        M = make_sparse_spd(20, 0.5, 3).toarray()
        np.testing.assert_array_equal(M, M.T)
        self.assertGreater(np.linalg.eigvalsh(M).min(), 0)
        # the unit-diagonal factor keeps the determinant at 1
        self.assertAlmostEqual(np.linalg.det(M), 1.0, places=6)

    def test_spd_density(self):
        for seed in range(20):
            M = make_sparse_spd(50, 0.95, seed)
            density = M.nnz / 2500
            self.assertTrue(0.04 <= density <= 0.16, density)
            self.assertGreaterEqual(np.linalg.eigvalsh(M.toarray()).min(), -1e-10)

    def test_integer_share(self):
        shares = [len(gen_milcqp(GenConfig(), k).integer_set) / 50 for k in range(20)]
        self.assertTrue(0.3 <= np.mean(shares) <= 0.7)

    def test_density(self):
        config = GenConfig(m=10, n=40, nnz_A=100)
        inst = gen_lcqp(config, 0)
        self.assertEqual(len(inst.a_triplets()), 100)
        self.assertTrue(validate(inst).ok)
        self.assertTrue(all(l <= u for l, u in zip(inst.l, inst.u)))
        self.assertEqual({s.value for s in inst.senses} - {'<=', '='}, set())

    def test_sparsity_moments(self):
        config = GenConfig(m=10, n=50, nnz_A=100, alpha=0.95, seed=12)
        densities = []
        for k in range(30):
            inst = gen_lcqp(config, k)
            self.assertEqual(inst.A.nnz, 100)
            densities.append(inst.Q.nnz / 2500)
        self.assertTrue(0.04 <= np.mean(densities) <= 0.16, np.mean(densities))
        sparser = [gen_lcqp(config.replace(alpha=0.99), k).Q.nnz / 2500 for k in range(30)]
        self.assertLess(np.mean(sparser), np.mean(densities))
        dense = gen_lcqp(GenConfig(m=10, n=20, nnz_A=200, alpha=0.0), 0)
        self.assertEqual(dense.A.nnz, 200)
        self.assertEqual(dense.Q.nnz, 400)

    def test_max_integer(self):
        config = GenConfig(m=4, n=20, nnz_A=40, integer_prob=1.0)
        for k in range(5):
            self.assertEqual(len(gen_milcqp(config.replace(max_integer=12), k).integer_set), 12)
        self.assertEqual(len(gen_milcqp(config.replace(integer_prob=0.2, max_integer=12), 0).integer_set),
                         len(gen_milcqp(config.replace(integer_prob=0.2), 0).integer_set))
        self.assertRaises(ConfigurationError, GenConfig, max_integer=-1)

    def test_deterministic(self):
        config = GenConfig(m=4, n=10, nnz_A=12, seed=7)
        self.assertEqual(gen_lcqp(config, 3), gen_lcqp(config, 3))
        self.assertNotEqual(gen_lcqp(config, 3), gen_lcqp(config, 4))
        self.assertNotEqual(gen_lcqp(config, 3), gen_lcqp(config.replace(seed=8), 3))
        self.assertEqual(gen_milcqp(config, 2), gen_milcqp(config, 2))

    def test_integer_prob(self):
        config = GenConfig(m=3, n=12, nnz_A=10)
        self.assertEqual(gen_milcqp(config.replace(integer_prob=0.0), 0).integer_set, frozenset())
        full = gen_milcqp(config.replace(integer_prob=1.0, integer_bound=2), 0)
        self.assertEqual(full.integer_set, frozenset(range(12)))
        self.assertTrue(np.all(np.abs(full.l) <= 2) and np.all(np.abs(full.u) <= 2))

    def test_fixed_structure(self):
        config = GenConfig(m=3, n=8, nnz_A=10)
        five = gen_fixed_structure(config, 5)
        two = gen_fixed_structure(config, 2, start=3)
        self.assertEqual(five[3:], two)
        self.assertEqual(five[0].A_dense.tolist(), five[4].A_dense.tolist())
        np.testing.assert_array_equal(five[0].Q_dense, five[1].Q_dense)
        self.assertFalse(np.array_equal(five[0].c, five[1].c))
        self.assertRaises(ValueError, gen_fixed_structure, config, 0)

    def test_symmetric(self):
        config = GenConfig(m=4, n=8, nnz_A=12)
        inst = gen_symmetric_lcqp(config, 3, 1)
        self.assertEqual(inst.n, 8)
        self.assertTrue(validate(inst).ok)
        g = encode(inst)
        for a, b in ((0, 1), (1, 2), (0, 2)):
            self.assertEqual(permute(g, VertexPermutation.swap_w(4, 8, a, b)), g)
        self.assertRaises(ValueError, gen_symmetric_lcqp, config, 1)


class TestDataset(TestCase):

    def setUp(self):
        self.dir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.dir)

    def test_write_and_label(self):
        config = GenConfig(m=2, n=4, nnz_A=4)
        instances = [gen_lcqp(config, k) for k in range(3)]
        manifest = write_dataset(instances, self.dir, config, {'preset': 'test'})
        self.assertEqual(manifest['files'], ['instance_00000.json', 'instance_00001.json', 'instance_00002.json'])
        self.assertEqual(manifest['seeds'], [[0, 0], [0, 1], [0, 2]])
        self.assertEqual(read_manifest(self.dir), manifest)
        self.assertEqual(manifest['config_hash'], config.config_hash())
        with open(os.path.join(self.dir, MANIFEST)) as f:
            self.assertEqual(json.load(f)['preset'], 'test')

        paths = dataset_paths(self.dir)
        labels = label_dataset(paths)
        self.assertEqual(len(labels), 3)
        self.assertTrue(all(os.path.exists(label_path(p)) for p in paths))

        loaded = load_dataset(self.dir)
        self.assertEqual([inst for inst, _ in loaded], instances)
        for (_, y), z in zip(loaded, labels):
            self.assertEqual((y.feas, y.obj), (z.feas, z.obj))

    def test_cached_labels(self):
        config = GenConfig(m=2, n=4, nnz_A=4)
        write_dataset([gen_lcqp(config, 0)], self.dir, config)
        path = dataset_paths(self.dir)[0]
        label_dataset([path])
        with open(label_path(path)) as f:
            first = f.read()
        label_dataset([path])
        with open(label_path(path)) as f:
            self.assertEqual(f.read(), first)


if __name__ == '__main__':
    main()
