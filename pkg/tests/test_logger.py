import logging
from contextlib import contextmanager
from io import StringIO
from unittest import TestCase, main

import numpy as np

from qpgnn import GenConfig, logger
from qpgnn.generator import gen_milcqp
from qpgnn.refinement import WLVariant, stable_partition
from qpgnn.graph import encode_milcqp


@contextmanager
def capture_log():
    stream = StringIO()
    orig_handler = logger.handlers[0]
    del logger.handlers[:]
    logger.addHandler(logging.StreamHandler(stream))
    yield stream
    del logger.handlers[:]
    logger.addHandler(orig_handler)


class Testlogger(TestCase):

    def setUp(self):
        self.level = logger.level

    def tearDown(self):
        logger.setLevel(self.level)

    def test_debug(self):
        logger.setLevel(logging.DEBUG)
        graph = encode_milcqp(gen_milcqp(GenConfig(m=3, n=6, nnz_A=6)))
        with capture_log() as log:
            stable_partition(graph, WLVariant.MILCQP_MULTISET)
        # every round reports its class counts
        self.assertIn("WL round 0", log.getvalue())

    def test_non_debug(self):
        logger.setLevel(logging.WARNING)
        graph = encode_milcqp(gen_milcqp(GenConfig(m=3, n=6, nnz_A=6, bound_sigma=0.1)))
        with capture_log() as log:
            stable_partition(graph, WLVariant.MILCQP_MULTISET)
        self.assertEqual(log.getvalue(), "")

    def test_warning_on_clamped_bounds(self):
        logger.setLevel(logging.WARNING)
        config = GenConfig(m=2, n=6, nnz_A=4, bound_sigma=100.0, integer_prob=1.0, integer_bound=2)
        with capture_log() as log:
            instance = gen_milcqp(config)
        self.assertIn("clamped", log.getvalue())
        self.assertTrue(np.all(np.abs(instance.l) <= 2))

    def test_loglevel_higher(self):
        logger.setLevel(logging.ERROR)
        config = GenConfig(m=2, n=6, nnz_A=4, bound_sigma=100.0, integer_prob=1.0, integer_bound=2)
        with capture_log() as log:
            gen_milcqp(config)
        self.assertEqual(len(log.getvalue()), 0)


if __name__ == '__main__':
    main()
