import os
from unittest import TestCase, main, skipUnless

from qpgnn.harness import PROPERTY_COLUMNS, property_frame
from qpgnn.properties import (CHECKS, SAMPLES, check_averaging_inequality, check_constant_weights_agree,
                              check_encode_permute_commute, check_generator_moments, check_gnn_gradient,
                              check_instance_round_trip, check_node_outputs_on_classes, check_solver_kkt_min_norm,
                              check_tractable_isomorphic, check_wl_equivalent_outputs, run_property_suite)


class TestProperties(TestCase):

    def test_registry(self):
        self.assertEqual(set(CHECKS), set(SAMPLES))

    def test_single_checks(self):
        passed, detail = check_averaging_inequality(1, 50)
        self.assertTrue(passed, detail)
        self.assertIn("50 triples", detail)
        passed, detail = check_tractable_isomorphic(2, 5)
        self.assertTrue(passed, detail)

    def test_round_trip_and_relabeling_checks(self):
        for check in (check_instance_round_trip, check_encode_permute_commute, check_constant_weights_agree):
            passed, detail = check(3, 10)
            self.assertTrue(passed, detail)

    def test_solver_and_generator_checks(self):
        passed, detail = check_solver_kkt_min_norm(1, 20)
        self.assertTrue(passed, detail)
        self.assertIn("singular instances optimal", detail)
        passed, detail = check_generator_moments(2, 5)
        self.assertTrue(passed, detail)

    def test_gnn_checks(self):
        passed, detail = check_gnn_gradient(5, 3)
        self.assertTrue(passed, detail)
        self.assertIn("3 configurations", detail)
        for check in (check_node_outputs_on_classes, check_wl_equivalent_outputs):
            passed, detail = check(1, 2)
            self.assertTrue(passed, detail)

    def test_small_suite(self):
        report = run_property_suite(seeds=(1,), scale=0.05)
        self.assertTrue(report.passed, report.failures())
        self.assertEqual([r.check for r in report.rows], list(CHECKS))
        frame = property_frame(report)
        self.assertEqual(tuple(frame.columns), PROPERTY_COLUMNS)
        self.assertEqual(len(frame), len(CHECKS))

    def test_selected_checks(self):
        report = run_property_suite(seeds=(4, 5), checks=['psd-sampled'], scale=0.5)
        self.assertEqual([(r.check, r.seed) for r in report.rows], [('psd-sampled', 4), ('psd-sampled', 5)])
        self.assertRaises(KeyError, run_property_suite, checks=['no-such-check'])

    @skipUnless(os.environ.get('QPGNN_SLOW_TESTS'), "set QPGNN_SLOW_TESTS to run the full suite")
    def test_full_suite(self):
        report = run_property_suite()
        self.assertTrue(report.passed, report.failures())


if __name__ == '__main__':
    main()
