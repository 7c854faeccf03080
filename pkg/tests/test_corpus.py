from dataclasses import replace
from unittest import TestCase, main, mock

from qpgnn import corpus
from qpgnn.corpus import (PAIRS, CounterexampleReport, check_integrity, load_pair, load_single, read_text,
                          verify_counterexamples, verify_pair)
from qpgnn.exceptions import CounterexampleFailure
from qpgnn.utils import sha256_digest


class TestCorpus(TestCase):

    def test_integrity(self):
        self.assertEqual(check_integrity(), [])
        for name, digest in corpus.PINNED_SHA256.items():
            self.assertEqual(sha256_digest(read_text(name)), digest)

    def test_integrity_detects_changes(self):
        pinned = dict(corpus.PINNED_SHA256, **{'tractable-folded.json': '0' * 64})
        with mock.patch.dict(corpus.PINNED_SHA256, pinned):
            self.assertEqual(check_integrity(), ['tractable-folded.json'])
            report = verify_counterexamples(pairs=['objective-gap-flipped'], draws=1)
            self.assertFalse(report.passed)
            self.assertRaises(CounterexampleFailure, verify_counterexamples, strict=True,
                              pairs=['objective-gap-flipped'], draws=1)

    def test_loaders(self):
        first, second = load_pair('solution-gap')
        self.assertEqual((first.m, first.n), (8, 7))
        self.assertEqual(len(second.integer_set), 7)
        self.assertEqual(load_single('tractable-folded').meta['name'], 'tractable-folded')
        self.assertRaises(FileNotFoundError, read_text, 'missing.json')

    def test_entry_names(self):
        self.assertEqual(sorted(PAIRS), ['objective-gap', 'objective-gap-flipped', 'solution-gap'])
        self.assertEqual(sorted(corpus.SINGLES), ['tractable-folded'])
        files = {f for spec in PAIRS.values() for f in spec.files} | set(corpus.SINGLES.values())
        self.assertEqual(files, set(corpus.PINNED_SHA256))

    def test_verify_counterexamples(self):
        report = verify_counterexamples(draws=3)
        self.assertTrue(report.passed, report.failures())
        clauses = {(r.pair, r.clause) for r in report.rows}
        self.assertIn(('objective-gap', 'relaxations'), clauses)
        self.assertIn(('solution-gap', 'solution-sets'), clauses)
        self.assertIn(('solution-gap', 'gnn-node-outputs'), clauses)
        # refinement separates the flipped pair, so no network clause is made for it
        self.assertNotIn(('objective-gap-flipped', 'gnn-graph-outputs'), clauses)

    def test_wrong_expectation_fails(self):
        report = CounterexampleReport()
        first, second = load_pair('objective-gap')
        verify_pair('objective-gap', first, second, replace(PAIRS['objective-gap'], optima=(4.5, 4.5)),
                    report, draws=1)
        self.assertEqual([r.clause for r in report.failures()], ['optima'])

        wrong = replace(PAIRS['objective-gap-flipped'], equivalent=True)
        with mock.patch.dict(PAIRS, {'objective-gap-flipped': wrong}):
            with self.assertRaises(CounterexampleFailure) as cm:
                verify_counterexamples(strict=True, pairs=['objective-gap-flipped'], draws=1)
        self.assertEqual(cm.exception.pair, 'objective-gap-flipped')
        self.assertIn('wl-equivalent', [clause for clause, _ in cm.exception.failures])


if __name__ == '__main__':
    main()
