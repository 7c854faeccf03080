import json
import os
import shutil
import tempfile
from contextlib import redirect_stderr, redirect_stdout
from io import StringIO
from unittest import TestCase, main, mock

import pandas as pd

from qpgnn import logger, read_instance
from qpgnn.corpus import read_text
from qpgnn.solvers import label_path
from qpgnn.tools.cli import PRESETS, main as cli_main
from qpgnn.utils import FS


class TestCli(TestCase):

    def setUp(self):
        self.dir = tempfile.mkdtemp()
        self.level = logger.level
        self.pair = []
        for name in ('objective-gap-1.json', 'objective-gap-2.json', 'objective-gap-flipped-2.json'):
            path = os.path.join(self.dir, name)
            with open(path, 'w') as f:
                f.write(read_text(name))
            self.pair.append(path)

    def tearDown(self):
        logger.setLevel(self.level)
        shutil.rmtree(self.dir)

    def run_cli(self, *argv):
        out, err = StringIO(), StringIO()
        with redirect_stdout(out), redirect_stderr(err):
            code = cli_main(list(argv))
        return code, out.getvalue(), err.getvalue()

    def test_generate(self):
        target = os.path.join(self.dir, 'data')
        code, out, _ = self.run_cli('generate', '--preset', 'milcqp', '--count', '3', '-n', '6', '-m', '2',
                                    '--label', '--out-dir', target)
        self.assertEqual(code, 0)
        self.assertTrue(out.startswith('file,index\n'))
        with open(os.path.join(target, 'manifest.json')) as f:
            manifest = json.load(f)
        self.assertEqual(manifest['preset'], 'milcqp')
        self.assertEqual(len(manifest['files']), 3)
        self.assertTrue(os.path.exists(label_path(os.path.join(target, manifest['files'][0]))))
        self.assertTrue(os.path.exists(os.path.join(target, 'generate.csv')))

    def test_generate_caps_integers(self):
        self.assertEqual(PRESETS['milcqp']['max_integer'], 12)
        target = os.path.join(self.dir, 'mi')
        code, _, _ = self.run_cli('generate', '--preset', 'milcqp', '--count', '10', '--out-dir', target)
        self.assertEqual(code, 0)
        with open(os.path.join(target, 'manifest.json')) as f:
            files = json.load(f)['files']
        counts = [len(read_instance(os.path.join(target, name)).integer_set) for name in files]
        self.assertEqual(len(counts), 10)
        self.assertLessEqual(max(counts), 12)

    def test_solve(self):
        code, out, _ = self.run_cli('solve', self.pair[0], '--format', 'json')
        self.assertEqual(code, 0)
        (row,) = json.loads(out)
        self.assertEqual(row['status'], 'optimal')
        self.assertAlmostEqual(row['value'], 4.5, places=6)

        code, out, _ = self.run_cli('solve', '--brute-force', '--write-labels', self.pair[1])
        self.assertEqual(code, 0)
        self.assertTrue(os.path.exists(label_path(self.pair[1])))

    def test_encode(self):
        code, out, _ = self.run_cli('encode', self.pair[0])
        self.assertEqual(code, 0)
        doc = json.loads(out)
        self.assertEqual(doc['kind'], 'milcqp')
        self.assertEqual(len(doc['a_edges']), 12)

        target = os.path.join(self.dir, 'graphs')
        with mock.patch.object(FS, 'open', wraps=FS.open) as opened:
            code, out, _ = self.run_cli('encode', self.pair[0], '--out-dir', target)
        self.assertEqual(code, 0)
        opened.assert_any_call(os.path.join(target, 'objective-gap-1.graph.json'), 'w')
        with open(os.path.join(target, 'objective-gap-1.graph.json')) as f:
            self.assertEqual(f.read(), out)

    def test_wl_compare(self):
        code, out, err = self.run_cli('wl-compare', self.pair[0], self.pair[1], '--expect', 'equivalent')
        self.assertEqual(code, 0)
        self.assertIn('equivalent=True', err)
        self.assertIn('first: I=', err)
        self.assertIn('J=[[0, 1, 2, 3, 4, 5]]', err)
        self.assertLess(err.index('second: I='), err.index('equivalent=True'))
        self.assertTrue(out.startswith('graph,round,num_V_classes,num_W_classes\n'))

        code, _, err = self.run_cli('wl-compare', self.pair[0], self.pair[2], '--expect', 'equivalent')
        self.assertEqual(code, 1)
        self.assertIn('equivalent=False', err)

    def test_check(self):
        bad = os.path.join(self.dir, 'bad.json')
        with open(bad, 'w') as f:
            f.write('{"version": 1}\n')
        code, out, _ = self.run_cli('check', self.pair[0], bad)
        self.assertEqual(code, 1)
        table = pd.read_csv(StringIO(out))
        self.assertEqual(list(table['valid']), [True, False])
        self.assertTrue(table['mp_tractable'].isna().iloc[1])
        self.assertIn('rounds_to_stabilize', table.columns)
        self.assertEqual(table['rounds_to_stabilize'].iloc[0], 1)
        self.assertTrue(table['rounds_to_stabilize'].isna().iloc[1])

        code, _, _ = self.run_cli('check', self.pair[0])
        self.assertEqual(code, 0)

    def test_missing_file(self):
        code, _, _ = self.run_cli('solve', os.path.join(self.dir, 'nope.json'))
        self.assertEqual(code, 2)

    def test_counterexamples(self):
        code, out, _ = self.run_cli('counterexamples', '--pair', 'objective-gap', '--draws', '2')
        self.assertEqual(code, 0)
        self.assertIn('objective-gap,optima,True', out)

    def test_suite(self):
        code, out, _ = self.run_cli('suite', '--seeds', '1', '--scale', '0.05', '--check', 'psd-sampled',
                                    '--check', 'generic-unfoldable')
        self.assertEqual(code, 0)
        self.assertEqual(len(out.splitlines()), 3)

    def test_train(self):
        target = os.path.join(self.dir, 'data')
        self.run_cli('generate', '--count', '4', '-n', '4', '-m', '2', '--out-dir', target)
        results = os.path.join(self.dir, 'results')
        code, out, _ = self.run_cli('train', '--dataset', target, '--task', 'fit-feas', '--widths', '2',
                                    '--layers', '1', '--epochs', '2', '--seeds', '0', '--out-dir', results)
        self.assertEqual(code, 0)
        self.assertTrue(out.startswith('width,seed,parameters,best_train_rel_err,epochs\n'))
        self.assertTrue(os.path.exists(os.path.join(results, 'fit_summary.csv')))


if __name__ == '__main__':
    main()
