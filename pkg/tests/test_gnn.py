import os
import shutil
import tempfile
from unittest import TestCase, main, mock

import numpy as np

from qpgnn import VertexPermutation, encode, permute
from qpgnn.corpus import load_pair
from qpgnn.exceptions import ConfigurationError, DimensionMismatchError
from qpgnn.generator import gen_lcqp, gen_milcqp
from qpgnn.gnn import (Batch, backward, count_parameters, forward_graph, forward_node, init_params, load_checkpoint,
                       loss_msre, predict, relative_errors, save_checkpoint)
from qpgnn.options import GenConfig, GNNConfig
from qpgnn.refinement import WLVariant, stable_partition
from qpgnn.utils import FS, rng_for

SMALL = GenConfig(m=3, n=5, nnz_A=7)


def graphs(kind, count, config=SMALL):
    gen = gen_milcqp if kind == 'milcqp' else gen_lcqp
    return [encode(gen(config, k)) for k in range(count)]


class TestGNN(TestCase):

    def test_shapes(self):
        g = graphs('lcqp', 1)[0]
        params = init_params(GNNConfig(width=8, num_layers=2))
        self.assertIsInstance(forward_graph(params, g), float)
        node = init_params(GNNConfig(width=8, num_layers=2, head='node'))
        self.assertEqual(forward_node(node, g).shape, (5,))
        outputs = predict(node, graphs('lcqp', 3))
        self.assertEqual([len(y) for y in outputs], [5, 5, 5])

    def test_count_parameters(self):
        params = init_params(GNNConfig(width=8, num_layers=1, mlp_depth=2))
        # embeddings 40 + 48, messages 3 * 144, updates 208 + 272, head 145
        self.assertEqual(count_parameters(params), 1145)

    def test_deterministic_init(self):
        a = init_params(GNNConfig(width=4, num_layers=1), seed=3)
        b = init_params(GNNConfig(width=4, num_layers=1), seed=3)
        c = init_params(GNNConfig(width=4, num_layers=1), seed=4)
        for k in a.weights:
            np.testing.assert_array_equal(a.weights[k], b.weights[k])
        self.assertFalse(all(np.array_equal(a.weights[k], c.weights[k]) for k in a.weights))

    def test_head_and_kind_mismatch(self):
        g = graphs('lcqp', 1)[0]
        params = init_params(GNNConfig(width=4, num_layers=1))
        self.assertRaises(ConfigurationError, forward_node, params, g)
        mi = init_params(GNNConfig(width=4, num_layers=1, variant='milcqp'))
        self.assertRaises(ConfigurationError, forward_graph, mi, g)
        self.assertRaises(ConfigurationError, GNNConfig, head='edge')
        self.assertRaises(ConfigurationError, GNNConfig, width=0)

    def test_batch_matches_single_graphs(self):
        gs = graphs('milcqp', 4)
        params = init_params(GNNConfig(width=8, num_layers=2, variant='milcqp'))
        batched = predict(params, gs)
        for g, y in zip(gs, batched):
            self.assertAlmostEqual(forward_graph(params, g), y, places=10)
        self.assertRaises(DimensionMismatchError, Batch.merge, [gs[0], graphs('lcqp', 1)[0]])

    def test_invariance(self):
        rng = rng_for(11)
        for variant in ('lcqp', 'milcqp'):
            for g in graphs(variant, 3):
                perm = VertexPermutation.random(g.m, g.n, rng)
                h = permute(g, perm)
                params = init_params(GNNConfig(width=8, num_layers=3, variant=variant), seed=1)
                self.assertAlmostEqual(forward_graph(params, g), forward_graph(params, h), delta=1e-8)
                node = init_params(GNNConfig(width=8, num_layers=3, variant=variant, head='node'), seed=1)
                y, z = forward_node(node, g), forward_node(node, h)
                np.testing.assert_allclose(z[list(perm.sigma_W)], y, atol=1e-8)

    def _check_gradient(self, config, gs, labels):
        params = init_params(config, seed=2)
        loss, grads, _ = backward(params, gs, labels)
        rng = rng_for(0)
        h = 1e-6
        for k in sorted(params.weights):
            W = params.weights[k]
            for idx in rng.choice(W.size, size=min(3, W.size), replace=False):
                old = W.flat[idx]
                W.flat[idx] = old + h
                up, _, _ = backward(params, gs, labels)
                W.flat[idx] = old - h
                down, _, _ = backward(params, gs, labels)
                W.flat[idx] = old
                numeric = (up - down) / (2 * h)
                self.assertLess(abs(numeric - grads[k].flat[idx]), 1e-4 * max(1.0, abs(numeric)), k)

    def test_gradient_graph_head(self):
        gs = graphs('lcqp', 3)
        self._check_gradient(GNNConfig(width=6, num_layers=2), gs, [1.0, -2.0, 0.5])

    def test_gradient_node_head(self):
        gs = graphs('milcqp', 2)
        labels = [np.arange(5, dtype=float), -np.ones(5)]
        self._check_gradient(GNNConfig(width=6, num_layers=2, variant='milcqp', head='node'), gs, labels)

    def test_gradient_random_configs(self):
        rng = rng_for(21)
        for _ in range(10):
            kind, head = str(rng.choice(['lcqp', 'milcqp'])), str(rng.choice(['graph', 'node']))
            depth = int(rng.integers(1, 4))
            gs = graphs(kind, 2)
            labels = list(rng.uniform(1.0, 3.0, 2)) if head == 'graph' else [rng.uniform(0.5, 2.0, 5) for _ in gs]
            with self.subTest(kind=kind, head=head, depth=depth):
                self._check_gradient(GNNConfig(width=4, num_layers=2, variant=kind, head=head, mlp_depth=depth),
                                     gs, labels)

    def test_gradient_equivariant(self):
        rng = rng_for(5)
        for kind in ('lcqp', 'milcqp'):
            g = graphs(kind, 1)[0]
            perm = VertexPermutation.random(g.m, g.n, rng)
            h = permute(g, perm)
            params = init_params(GNNConfig(width=6, num_layers=2, variant=kind), seed=3)
            _, grads, _ = backward(params, [g], [2.5])
            _, moved, _ = backward(params, [h], [2.5])
            for k in grads:
                np.testing.assert_allclose(moved[k], grads[k], rtol=1e-7, atol=1e-10, err_msg=k)

            node = init_params(GNNConfig(width=6, num_layers=2, variant=kind, head='node'), seed=3)
            y = np.linspace(1.0, 2.0, g.n)
            y_moved = np.empty(g.n)
            y_moved[list(perm.sigma_W)] = y
            _, grads, _ = backward(node, [g], [y])
            _, moved, _ = backward(node, [h], [y_moved])
            for k in grads:
                np.testing.assert_allclose(moved[k], grads[k], rtol=1e-7, atol=1e-10, err_msg=k)

    def test_orthogonal_init(self):
        params = init_params(GNNConfig(width=8, num_layers=2, mlp_depth=3, head='node'), seed=4)
        for k, W in params.weights.items():
            if k.endswith('.b'):
                np.testing.assert_array_equal(W, 0.0)
                continue
            a, b = W.shape
            gram = W.T @ W if a >= b else W @ W.T
            np.testing.assert_allclose(gram, np.eye(min(a, b)), atol=1e-12, err_msg=k)

    def test_node_outputs_constant_on_classes(self):
        g = encode(load_pair('objective-gap')[0])
        partition = stable_partition(g, WLVariant.MILCQP_MULTISET)
        self.assertEqual(partition.J, ((0, 1, 2, 3, 4, 5),))
        for seed in range(3):
            params = init_params(GNNConfig(width=8, num_layers=3, variant='milcqp', head='node'), seed=seed)
            y = forward_node(params, g)
            self.assertLess(np.ptp(y), 1e-10 * (1 + np.abs(y).max()))

    def test_relative_errors(self):
        np.testing.assert_allclose(relative_errors([1.0, 3.0], [0.5, 2.0]), [0.5, 0.5])
        np.testing.assert_allclose(relative_errors([np.array([3.0, 4.0])], [np.zeros(2)]), [5.0])
        self.assertAlmostEqual(loss_msre(2.0, 4.0), 0.25)
        self.assertRaises(DimensionMismatchError, relative_errors, [1.0], [1.0, 2.0])

    def test_loss_matches_backward(self):
        gs = graphs('lcqp', 3)
        labels = [1.0, -2.0, 10.0]
        params = init_params(GNNConfig(width=4, num_layers=1))
        loss, _, errs = backward(params, gs, labels)
        self.assertAlmostEqual(loss, loss_msre(predict(params, gs), labels))
        np.testing.assert_allclose(errs, relative_errors(predict(params, gs), labels))
        self.assertRaises(DimensionMismatchError, backward, params, gs, labels[:2])


class TestCheckpoint(TestCase):

    def setUp(self):
        self.dir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.dir)

    def test_round_trip(self):
        g = graphs('milcqp', 1)[0]
        params = init_params(GNNConfig(width=5, num_layers=2, variant='milcqp', head='node'), seed=9)
        path = os.path.join(self.dir, 'ckpt.json')
        save_checkpoint(params, path, 17)
        with mock.patch.object(FS, 'open', wraps=FS.open) as opened:
            back, epoch = load_checkpoint(path)
        opened.assert_called_once_with(path)
        self.assertEqual(epoch, 17)
        self.assertEqual(back.config, params.config)
        self.assertEqual(back.seed, 9)
        np.testing.assert_array_equal(forward_node(back, g), forward_node(params, g))


if __name__ == '__main__':
    main()
