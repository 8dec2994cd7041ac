"""
Test commands
"""
import csv
import io
import json
import tempfile
from pathlib import Path
from unittest.mock import MagicMock, patch

import numpy as np

from django.core.management import call_command
from django.test import SimpleTestCase

from core.cli import run_cli
from core.exceptions import Diverged
from core.matrixfile import read_matrix
from core.tracefile import read_trace
from unmixing.config import Solver

SMALL_PROBLEM = ['--seed', '7', '--bands', '12', '--signatures', '8',
                 '--n-r', '6', '--n-c', '6', '--q', '2', '--snr', '30']


def gen_problem(out, *extra):
    """Generate a small synthetic problem into `out`."""
    call_command('gen_data', '--out', str(out), *SMALL_PROBLEM, *extra,
                 stdout=io.StringIO())
    return Path(out)


def problem_args(problem):
    """Return the unmix/sweep input flags for a generated problem."""
    return ['--library', str(problem / 'library.hsum'),
            '--cube', str(problem / 'cube.hsum'),
            '--truth', str(problem / 'truth.hsum')]


class CommandTest(SimpleTestCase):
    """Test commands"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def write_config(self, text):
        path = self.dir / 'run.cfg'
        path.write_text(text)
        return str(path)

    def test_gen_data_writes_problem(self):
        """Test gen_data writes the matrices and metadata."""
        problem = gen_problem(self.dir / 'p')

        A = read_matrix(problem / 'library.hsum')
        X = read_matrix(problem / 'truth.hsum')
        Y = read_matrix(problem / 'cube.hsum')
        self.assertEqual(A.shape, (12, 8))
        self.assertEqual(X.shape, (8, 36))
        self.assertEqual(Y.shape, (12, 36))
        np.testing.assert_allclose(X.sum(axis=0), 1.0, atol=1e-12)
        meta = (problem / 'metadata.txt').read_text()
        self.assertIn('grid.n_r = 6', meta)
        self.assertIn('active = ', meta)

    def test_gen_data_deterministic(self):
        """Test the same seed gives byte-identical files."""
        first = gen_problem(self.dir / 'a')
        second = gen_problem(self.dir / 'b')

        for name in ('library.hsum', 'truth.hsum', 'clean.hsum',
                     'cube.hsum', 'metadata.txt'):
            self.assertEqual((first / name).read_bytes(),
                             (second / name).read_bytes(), name)

    def test_unmix_writes_estimates_and_trace(self):
        """Test unmix writes raw and projected estimates and a trace."""
        problem = gen_problem(self.dir / 'p')
        config = self.write_config('lambda = 0.001\nlambda_tv = 0.001\n'
                                   'max_iter = 15\nboundary = periodic\n')
        out = self.dir / 'run'

        call_command('unmix', '--config', config, *problem_args(problem),
                     '--out', str(out), stdout=io.StringIO())

        raw = read_matrix(out / 'xhat_raw.hsum')
        projected = read_matrix(out / 'xhat.hsum')
        np.testing.assert_array_equal(projected, np.maximum(raw, 0.0))
        rows = read_trace(out / 'trace.csv')
        self.assertGreater(len(rows), 0)
        self.assertLessEqual(len(rows), 15)
        self.assertEqual([r['iter'] for r in rows],
                         list(range(1, len(rows) + 1)))
        self.assertIn('ref_error', rows[0])

    def test_unmix_dual_records_inexactness(self):
        """Test the dual trace carries the V3 residual norms."""
        problem = gen_problem(self.dir / 'p')
        out = self.dir / 'run'

        call_command('unmix', *problem_args(problem)[:4], '--out', str(out),
                     '--solver', 'dual-sgs', stdout=io.StringIO())

        rows = read_trace(out / 'trace.csv')
        self.assertLessEqual(len(rows), 50)
        self.assertIn('delta_hat', rows[0])
        self.assertNotIn('ref_error', rows[0])

    def test_unmix_outputs_deterministic(self):
        """Test two identical runs give identical estimates."""
        problem = gen_problem(self.dir / 'p')
        config = self.write_config('max_iter = 10\nlambda = 0.01\n')
        for name in ('one', 'two'):
            call_command('unmix', '--config', config,
                         *problem_args(problem)[:4],
                         '--out', str(self.dir / name), stdout=io.StringIO())

        for name in ('xhat.hsum', 'xhat_raw.hsum'):
            self.assertEqual((self.dir / 'one' / name).read_bytes(),
                             (self.dir / 'two' / name).read_bytes())
        one = read_trace(self.dir / 'one' / 'trace.csv')
        two = read_trace(self.dir / 'two' / 'trace.csv')
        for a, b in zip(one, two):
            a.pop('elapsed')
            b.pop('elapsed')
            self.assertEqual(a, b)

    def test_unmix_records_settings_and_seed(self):
        """Test the resolved settings, seed included, replay the run."""
        problem = gen_problem(self.dir / 'p')
        config = self.write_config('lambda = 0.01\nmax_iter = 10\n')
        first = self.dir / 'first'
        call_command('unmix', '--config', config, *problem_args(problem),
                     '--seed', '11', '--out', str(first),
                     stdout=io.StringIO())

        recorded = (first / 'settings.txt').read_text()
        self.assertIn('seed = 11', recorded)
        self.assertIn('lambda = 0.01', recorded)
        self.assertIn('grid.n_r = 6', recorded)

        second = self.dir / 'second'
        call_command('unmix', '--config', str(first / 'settings.txt'),
                     '--library', str(problem / 'library.hsum'),
                     '--cube', str(problem / 'cube.hsum'),
                     '--out', str(second), stdout=io.StringIO())

        self.assertEqual((second / 'settings.txt').read_text(), recorded)
        self.assertEqual((first / 'xhat.hsum').read_bytes(),
                         (second / 'xhat.hsum').read_bytes())

    def test_sweep_records_default_seed(self):
        """Test a sweep without --seed records the default seed 0."""
        problem = gen_problem(self.dir / 'p')
        config = self.write_config('max_iter = 2\n')
        out = self.dir / 'sweep'

        call_command('sweep', '--config', config, *problem_args(problem),
                     '--values', '0.01', '--out', str(out),
                     stdout=io.StringIO())

        self.assertIn('seed = 0', (out / 'settings.txt').read_text())

    def test_evaluate_prints_text_and_json(self):
        """Test evaluate reports per-run and aggregate metrics."""
        problem = gen_problem(self.dir / 'p')
        truth = str(problem / 'truth.hsum')
        out = io.StringIO()

        call_command('evaluate', '--truth', truth, '--estimate', truth,
                     '--truth', truth, '--estimate', truth, stdout=out)

        lines = out.getvalue().strip().splitlines()
        self.assertIn('p_s = 1.0000', lines[0])
        self.assertIn('mean (std) over 2 runs', lines[2])
        summary = json.loads(lines[-1])
        self.assertIsNone(summary['sre_db_mean'])
        self.assertEqual(summary['p_s_mean'], 1.0)
        self.assertEqual(summary['threshold'], 0.316)
        self.assertEqual(len(summary['runs']), 2)

    def test_sweep_grid(self):
        """Test the full 10-value sweep on a 10x10 toy instance."""
        problem = gen_problem(self.dir / 'p', '--n-r', '10', '--n-c', '10')
        config = self.write_config('solver = dual-sgs\nmax_iter = 3\n')
        out = self.dir / 'sweep'

        call_command('sweep', '--config', config, *problem_args(problem),
                     '--out', str(out), stdout=io.StringIO())

        with open(out / 'sweep.csv') as fh:
            rows = list(csv.DictReader(fh))
        self.assertEqual(len(rows), 100)
        sre = [float(r['sre_db']) for r in rows]
        best = rows[int(np.argmax(sre))]
        self.assertEqual(float(best['sre_db']), max(sre))

    def test_sweep_parallel_matches_sequential(self):
        """Test --parallel keeps the row order and values."""
        problem = gen_problem(self.dir / 'p')
        config = self.write_config('max_iter = 4\n')
        args = ['--config', config, *problem_args(problem),
                '--values', '0.1', '0.01', '0.001']
        call_command('sweep', *args, '--out', str(self.dir / 'seq'),
                     stdout=io.StringIO())
        call_command('sweep', *args, '--parallel',
                     '--out', str(self.dir / 'par'), stdout=io.StringIO())

        self.assertEqual((self.dir / 'seq' / 'sweep.csv').read_text(),
                         (self.dir / 'par' / 'sweep.csv').read_text())

    def test_sweep_tv_improves_sre(self):
        """Test the best pair with TV beats the best pair without it."""
        config = self.write_config('solver = dual-sgs\n')
        wins = 0
        for seed in ('1', '2', '3'):
            problem = self.dir / f'p{seed}'
            call_command('gen_data', '--out', str(problem), '--seed', seed,
                         '--snr', '20', stdout=io.StringIO())
            out = self.dir / f'sweep{seed}'
            call_command('sweep', '--config', config, *problem_args(problem),
                         '--values', '0.01', '0.001', '0.0',
                         '--parallel', '--out', str(out),
                         stdout=io.StringIO())

            with open(out / 'sweep.csv') as fh:
                rows = list(csv.DictReader(fh))
            with_tv = max(float(r['sre_db']) for r in rows
                          if float(r['lambda_tv']) > 0)
            without_tv = max(float(r['sre_db']) for r in rows
                             if float(r['lambda_tv']) == 0)
            wins += with_tv > without_tv

        self.assertGreaterEqual(wins, 2)


class RunCliTests(SimpleTestCase):
    """Test exit codes of the command-line entry point."""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)
        self.err = io.StringIO()

    def tearDown(self):
        self.tmp.cleanup()

    def cli(self, *argv):
        return run_cli(list(argv), stdout=io.StringIO(), stderr=self.err)

    def test_unknown_subcommand(self):
        """Test an unknown subcommand is a usage error."""
        self.assertEqual(self.cli('frobnicate'), 2)
        self.assertIn('usage', self.err.getvalue())

    def test_missing_required_flag(self):
        """Test argparse failures map to exit code 2."""
        self.assertEqual(self.cli('unmix', '--cube', 'x.hsum'), 2)

    def test_bad_tau_names_key(self):
        """Test an out-of-range tau exits with 2 and names the key."""
        problem = gen_problem(self.dir / 'p')
        config = self.dir / 'bad.cfg'
        config.write_text('tau = 1.7\n')

        code = self.cli('unmix', '--config', str(config),
                        *problem_args(problem), '--out', str(self.dir / 'o'))

        self.assertEqual(code, 2)
        self.assertIn('tau', self.err.getvalue())

    def test_bad_matrix_is_data_error(self):
        """Test an unreadable cube exits with 3."""
        problem = gen_problem(self.dir / 'p')
        (problem / 'cube.hsum').write_bytes(b'XXXXXXXX' + b'\0' * 24)

        code = self.cli('unmix', *problem_args(problem),
                        '--out', str(self.dir / 'o'))

        self.assertEqual(code, 3)

    def test_malformed_csv_is_data_error(self):
        """Test a non-numeric CSV cell exits with 3 and names the file."""
        bad = self.dir / 'bad.csv'
        bad.write_text('1,2\n3,abc\n')

        code = self.cli('eval', '--truth', str(bad), '--estimate', str(bad))

        self.assertEqual(code, 3)
        self.assertIn('bad.csv', self.err.getvalue())

    def test_gen_data_via_cli(self):
        """Test the public gen-data name maps onto the command."""
        self.assertEqual(self.cli('gen-data', '--out', str(self.dir / 'g'),
                                  *SMALL_PROBLEM), 0)
        self.assertTrue((self.dir / 'g' / 'cube.hsum').exists())

    @patch.dict('core.runs.SOLVERS', {
        Solver.PRIMAL: MagicMock(side_effect=Diverged('NaN at iteration 3')),
    })
    def test_diverged_exit_code(self):
        """Test a diverging solver exits with 4."""
        problem = gen_problem(self.dir / 'p')

        code = self.cli('unmix', *problem_args(problem),
                        '--out', str(self.dir / 'o'))

        self.assertEqual(code, 4)
        self.assertIn('NaN', self.err.getvalue())
