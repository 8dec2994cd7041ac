"""
Django command to unmix a hyperspectral cube.
"""
from pathlib import Path

from core.exceptions import Diverged
from core.management.base import HsuCommand
from core.matrixfile import write_matrix
from core.runs import (
    SETTINGS_NAME, load_problem, load_settings, run_solver, write_settings
)
from core.tracefile import write_trace
from unmixing.config import Solver


class Command(HsuCommand):
    """Run the configured solver and write estimates and the trace."""
    help = 'Estimate abundances for a cube against a spectral library.'

    def add_arguments(self, parser):
        parser.add_argument('--config')
        parser.add_argument('--library', required=True)
        parser.add_argument('--cube', required=True)
        parser.add_argument('--truth')
        parser.add_argument('--out', required=True)
        parser.add_argument('--solver', choices=[s.value for s in Solver])
        parser.add_argument('--seed', type=int)

    def run(self, *args, **options):
        settings = load_settings(options['config'],
                                 solver=options['solver'],
                                 seed=options['seed'])
        problem = load_problem(settings, options['library'],
                               options['cube'], options['truth'])
        out = Path(options['out'])
        out.mkdir(parents=True, exist_ok=True)
        write_settings(out / SETTINGS_NAME, settings, problem.cube.grid)

        try:
            report = run_solver(settings, problem)
        except Diverged as exc:
            if exc.report is not None:
                write_trace(out / 'trace.csv', exc.report.trace)
            raise

        write_matrix(out / 'xhat_raw.hsum', report.x_hat.X)
        write_matrix(out / 'xhat.hsum', report.x_projected.X)
        write_trace(out / 'trace.csv', report.trace)
        self.stdout.write(self.style.SUCCESS(
            f'{report.model} via {report.solver.value}: '
            f'{report.termination.value} after {report.iterations} '
            f'iterations ({report.elapsed:.3f}s). Results in {out}'
        ))
