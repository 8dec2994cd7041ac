"""
Django command to grid-search the regularization weights.
"""
import csv
import dataclasses
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from django.conf import settings as django_settings

from core.exceptions import ConfigError, Diverged
from core.management.base import HsuCommand
from core.runs import (
    SETTINGS_NAME, load_problem, load_settings, run_solver, write_settings
)
from evaluation.metrics import evaluate
from unmixing.config import Solver, Termination

PARAMETER_GRID = (0.5, 0.1, 0.05, 0.01, 0.005, 0.001, 0.0005, 0.0001,
                  0.00005, 0.00001)


def _score(run_settings, problem, lam, lam_tv):
    cfg = dataclasses.replace(run_settings.config, lam=lam, lam_tv=lam_tv)
    try:
        report = run_solver(run_settings, problem, cfg)
    except Diverged as exc:
        return {'lambda': lam, 'lambda_tv': lam_tv, 'sre_db': math.nan,
                'p_s': math.nan,
                'iterations': exc.report.iterations if exc.report else 0,
                'termination': Termination.DIVERGED.value}
    result = evaluate(problem.truth, report.x_projected)
    return {'lambda': lam, 'lambda_tv': lam_tv, 'sre_db': result.sre_db,
            'p_s': result.p_s, 'iterations': report.iterations,
            'termination': report.termination.value}


def best_row(rows):
    """First row with the largest finite SRE, or None."""
    best = None
    for row in rows:
        if math.isnan(row['sre_db']):
            continue
        if best is None or row['sre_db'] > best['sre_db']:
            best = row
    return best


class Command(HsuCommand):
    """Solve every (lambda, lambda_tv) pair and report the best SRE."""
    help = 'Sweep lambda and lambda_tv over a grid, scoring SRE per pair.'

    def add_arguments(self, parser):
        parser.add_argument('--config')
        parser.add_argument('--library', required=True)
        parser.add_argument('--cube', required=True)
        parser.add_argument('--truth', required=True)
        parser.add_argument('--out', required=True)
        parser.add_argument('--solver', choices=[s.value for s in Solver])
        parser.add_argument('--seed', type=int)
        parser.add_argument('--values', type=float, nargs='+',
                            default=list(PARAMETER_GRID))
        parser.add_argument('--parallel', action='store_true')

    def run(self, *args, **options):
        run_settings = load_settings(options['config'],
                                     solver=options['solver'],
                                     seed=options['seed'])
        problem = load_problem(run_settings, options['library'],
                               options['cube'], options['truth'])
        values = options['values']
        if any(v < 0 for v in values):
            raise ConfigError('Sweep values must be >= 0.')
        pairs = list(itertools.product(values, values))

        if options['parallel']:
            workers = int(getattr(django_settings, 'HSU_THREADS', 0)) or None
            with ThreadPoolExecutor(max_workers=workers) as pool:
                rows = list(pool.map(
                    lambda p: _score(run_settings, problem, *p), pairs))
        else:
            rows = [_score(run_settings, problem, *p) for p in pairs]

        out = Path(options['out'])
        out.mkdir(parents=True, exist_ok=True)
        write_settings(out / SETTINGS_NAME, run_settings,
                       problem.cube.grid)
        columns = ['lambda', 'lambda_tv', 'sre_db', 'p_s', 'iterations',
                   'termination']
        with open(out / 'sweep.csv', 'w', newline='') as fh:
            writer = csv.DictWriter(fh, fieldnames=columns,
                                    lineterminator='\n')
            writer.writeheader()
            for row in rows:
                writer.writerow({
                    **row,
                    'lambda': repr(row['lambda']),
                    'lambda_tv': repr(row['lambda_tv']),
                    'sre_db': repr(float(row['sre_db'])),
                    'p_s': repr(float(row['p_s'])),
                })

        best = best_row(rows)
        if best is None:
            self.stdout.write(self.style.WARNING(
                'Every run diverged; no best pair.'))
            return
        self.stdout.write(self.style.SUCCESS(
            f'Best SRE {best["sre_db"]:.4f} dB at lambda={best["lambda"]!r}, '
            f'lambda_tv={best["lambda_tv"]!r} ({len(rows)} runs, '
            f'{out / "sweep.csv"})'
        ))
