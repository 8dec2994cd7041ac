"""
Django command to score abundance estimates against ground truth.
"""
import numpy as np
from rest_framework.renderers import JSONRenderer

from core.datamodel import AbundanceMap, SpatialGrid
from core.exceptions import ConfigError
from core.management.base import HsuCommand
from core.matrixfile import read_matrix
from core.serializers import EvaluationSummarySerializer
from core.tracefile import read_trace
from evaluation.metrics import SUCCESS_THRESHOLD, evaluate


def _as_map(M):
    return AbundanceMap(M, SpatialGrid(1, M.shape[1]))


class Command(HsuCommand):
    """Print SRE and p_s per run and across runs, as text and JSON."""
    help = 'Compute SRE (dB) and probability of success.'

    def add_arguments(self, parser):
        parser.add_argument('--truth', action='append', required=True)
        parser.add_argument('--estimate', action='append', required=True)
        parser.add_argument('--trace', action='append', default=[])
        parser.add_argument('--threshold', type=float,
                            default=SUCCESS_THRESHOLD)

    def run(self, *args, **options):
        truths, estimates = options['truth'], options['estimate']
        traces = options['trace']
        if len(truths) != len(estimates):
            raise ConfigError('Give one --estimate per --truth.')
        if traces and len(traces) != len(truths):
            raise ConfigError('Give one --trace per --truth, or none.')

        runs = []
        for i, (truth, estimate) in enumerate(zip(truths, estimates)):
            result = evaluate(_as_map(read_matrix(truth)),
                              _as_map(read_matrix(estimate)),
                              options['threshold'])
            run = {'truth': truth, 'estimate': estimate,
                   'sre_db': result.sre_db, 'p_s': result.p_s}
            if traces:
                rows = read_trace(traces[i])
                run['iterations'] = len(rows)
                run['runtime_s'] = rows[-1]['elapsed'] if rows else 0.0
            runs.append(run)

        sre = np.array([r['sre_db'] for r in runs])
        p_s = np.array([r['p_s'] for r in runs])
        summary = {
            'threshold': options['threshold'],
            'runs': runs,
            'sre_db_mean': float(np.mean(sre)),
            'sre_db_std': float(np.std(sre)) if np.all(np.isfinite(sre))
            else float('nan'),
            'p_s_mean': float(np.mean(p_s)),
            'p_s_std': float(np.std(p_s)),
        }

        for run in runs:
            line = (f'{run["estimate"]}: SRE = {run["sre_db"]:.4f} dB, '
                    f'p_s = {run["p_s"]:.4f}')
            if 'iterations' in run:
                line += (f', {run["iterations"]} iterations in '
                         f'{run["runtime_s"]:.3f}s')
            self.stdout.write(line)
        if len(runs) > 1:
            self.stdout.write(
                f'mean (std) over {len(runs)} runs: SRE = '
                f'{summary["sre_db_mean"]:.4f} ({summary["sre_db_std"]:.4f}) '
                f'dB, p_s = {summary["p_s_mean"]:.4f} '
                f'({summary["p_s_std"]:.4f})'
            )
        data = EvaluationSummarySerializer(summary).data
        self.stdout.write(JSONRenderer().render(data).decode())
