"""
Django command to generate a synthetic unmixing problem.
"""
import math
from pathlib import Path

import numpy as np

from core.datamodel import HyperCube, SpatialGrid, SpectralLibrary
from core.management.base import HsuCommand
from core.matrixfile import read_matrix, write_matrix
from evaluation.datagen import (
    NoiseKind, NoiseSpec, add_noise, gen_abundances_dc1,
    gen_abundances_smooth, gen_library,
)
from evaluation.metrics import mutual_coherence


class Command(HsuCommand):
    """Write library, clean cube, noisy cube, truth and metadata."""
    help = 'Generate a synthetic library, abundance map and noisy cube.'

    def add_arguments(self, parser):
        parser.add_argument('--out', required=True)
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument('--bands', type=int, default=50)
        parser.add_argument('--signatures', type=int, default=60)
        parser.add_argument('--n-r', type=int, default=20)
        parser.add_argument('--n-c', type=int, default=20)
        parser.add_argument('--q', type=int, default=5)
        parser.add_argument('--coherence', type=float, default=0.9)
        parser.add_argument('--snr', type=float, default=30.0,
                            help='SNR in dB; "inf" for a noise-free cube.')
        parser.add_argument('--noise', choices=[k.value for k in NoiseKind],
                            default=NoiseKind.WHITE.value)
        parser.add_argument('--cutoff', type=float, default=None)
        parser.add_argument('--field', choices=['dc1', 'smooth'],
                            default='dc1')
        parser.add_argument('--correlation-length', type=float, default=4.0)
        parser.add_argument('--library', default=None,
                            help='Use this library instead of generating one.')

    def run(self, *args, **options):
        out = Path(options['out'])
        out.mkdir(parents=True, exist_ok=True)
        seed = options['seed']
        lib_seed, field_seed, noise_seed = np.random.SeedSequence(
            seed).spawn(3)
        grid = SpatialGrid(options['n_r'], options['n_c'])

        if options['library']:
            A = SpectralLibrary(read_matrix(options['library']))
        else:
            A = gen_library(options['bands'], options['signatures'],
                            options['coherence'], lib_seed)

        if options['field'] == 'dc1':
            X, active = gen_abundances_dc1(grid, A, options['q'], field_seed)
        else:
            X = gen_abundances_smooth(grid, A, options['q'],
                                      options['correlation_length'],
                                      field_seed)
            active = np.flatnonzero(X.X.any(axis=1))

        clean = HyperCube(A.A @ X.X, grid)
        spec = NoiseSpec(NoiseKind(options['noise']), options['snr'],
                         options['cutoff'], noise_seed)
        noisy = add_noise(clean, spec)

        write_matrix(out / 'library.hsum', A.A)
        write_matrix(out / 'truth.hsum', X.X)
        write_matrix(out / 'clean.hsum', clean.Y)
        write_matrix(out / 'cube.hsum', noisy.Y)
        snr = 'inf' if math.isinf(options['snr']) else repr(options['snr'])
        metadata = [
            '# synthetic unmixing problem',
            f'grid.n_r = {grid.n_r}',
            f'grid.n_c = {grid.n_c}',
            f'seed = {seed}',
            f'bands = {A.bands}',
            f'signatures = {A.signatures}',
            f'coherence = {mutual_coherence(A):.12g}',
            f'field = {options["field"]}',
            f'noise = {options["noise"]}',
            f'snr_db = {snr}',
            f'active = {" ".join(str(int(j)) for j in active)}',
        ]
        (out / 'metadata.txt').write_text('\n'.join(metadata) + '\n')

        self.stdout.write(self.style.SUCCESS(
            f'Wrote {grid.n_r}x{grid.n_c} problem with {A.bands} bands and '
            f'{A.signatures} signatures to {out}'
        ))
