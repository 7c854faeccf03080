from unittest import TestCase, main

import numpy as np

from qpgnn import LCQPInstance, MILCQPInstance, Sense, VertexPermutation, encode, encode_lcqp, encode_milcqp, permute
from qpgnn.corpus import load_pair
from qpgnn.exceptions import ConfigurationError, DimensionMismatchError, InstanceError
from qpgnn.generator import gen_milcqp
from qpgnn.graph import GraphKind, decode, disjoint_union
from qpgnn.instance import apply_permutation, relax
from qpgnn.options import GenConfig
from qpgnn.utils import rng_for


class TestGraph(TestCase):

    def setUp(self):
        self.inst = MILCQPInstance.create([[2.0, 1.0], [1.0, 2.0]], [1.0, -1.0], [[1.0, 0.0], [1.0, 3.0]],
                                          [1.0, 2.0], ['<=', '>='], [0.0, -np.inf], [1.0, 4.0], [0])

    def test_encode_lcqp(self):
        g = encode_lcqp(relax(self.inst))
        self.assertIs(g.kind, GraphKind.LCQP)
        self.assertEqual((g.m, g.n), (2, 2))
        self.assertEqual(g.v_features, ((1.0, Sense.LE), (2.0, Sense.GE)))
        self.assertEqual(g.w_features[1], (-1.0, -np.inf, 4.0))
        self.assertEqual(g.a_edges, ((0, 0, 1.0), (1, 0, 1.0), (1, 1, 3.0)))
        # self-loops and both directions of Q
        self.assertEqual(len(g.q_edges), 4)

    def test_encode_milcqp(self):
        g = encode_milcqp(self.inst)
        self.assertIs(g.kind, GraphKind.MILCQP)
        self.assertEqual([w[3] for w in g.w_features], [1, 0])
        self.assertIs(encode(self.inst).kind, GraphKind.MILCQP)
        self.assertIs(encode(relax(self.inst)).kind, GraphKind.LCQP)
        # a continuous instance encodes with every flag off
        self.assertEqual([w[3] for w in encode_milcqp(relax(self.inst)).w_features], [0, 0])

    def test_invalid_instance(self):
        bad = LCQPInstance.create([[1.0, 2.0], [2.0, 1.0]], [0, 0], np.zeros((0, 2)), [], [])
        with self.assertRaises(InstanceError) as cm:
            encode(bad)
        self.assertFalse(cm.exception.report.ok)

    def test_decode(self):
        self.assertEqual(decode(encode(self.inst)), self.inst)
        self.assertEqual(decode(encode(relax(self.inst))), relax(self.inst))
        for k in range(5):
            inst = gen_milcqp(GenConfig(m=3, n=6, nnz_A=8), k)
            self.assertEqual(decode(encode(inst)), inst)

    def test_distinct_instances_distinct_graphs(self):
        first, second = load_pair('objective-gap')
        self.assertNotEqual(encode(first), encode(second))

    def test_permute_matches_instance_relabeling(self):
        rng = rng_for(7)
        for k in range(10):
            inst = gen_milcqp(GenConfig(m=4, n=7, nnz_A=10), k)
            perm = VertexPermutation.random(4, 7, rng)
            self.assertEqual(permute(encode(inst), perm),
                             encode(apply_permutation(inst, perm.sigma_V, perm.sigma_W)))

    def test_permutation_algebra(self):
        rng = rng_for(1)
        p = VertexPermutation.random(3, 5, rng)
        q = VertexPermutation.random(3, 5, rng)
        g = encode(self.inst)
        ident = VertexPermutation.identity(2, 2)
        self.assertEqual(permute(g, ident), g)
        swap = VertexPermutation.swap_w(2, 2, 0, 1)
        self.assertEqual(permute(permute(g, swap), swap.inverse()), g)
        self.assertEqual(p.then(p.inverse()), VertexPermutation.identity(3, 5))
        composed = p.then(q)
        self.assertEqual(composed.sigma_W, tuple(q.sigma_W[j] for j in p.sigma_W))

    def test_bad_permutation(self):
        self.assertRaises(ConfigurationError, VertexPermutation, (0, 0), (0,))
        g = encode(self.inst)
        self.assertRaises(DimensionMismatchError, permute, g, VertexPermutation.identity(3, 2))

    def test_disjoint_union(self):
        g = encode(self.inst)
        u = disjoint_union(g, g)
        self.assertEqual((u.m, u.n), (4, 4))
        self.assertIn((3, 3, 3.0), u.a_edges)
        self.assertRaises(DimensionMismatchError, disjoint_union, g, encode(relax(self.inst)))

    def test_matrices(self):
        g = encode(self.inst)
        np.testing.assert_array_equal(g.A.toarray(), self.inst.A_dense)
        np.testing.assert_array_equal(g.Q.toarray(), self.inst.Q_dense)


if __name__ == '__main__':
    main()
