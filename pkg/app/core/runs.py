"""
Loading of run inputs shared by the unmix and sweep commands.
"""
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from core.datamodel import (
    AbundanceMap, HyperCube, SpectralLibrary, cube_from_matrix
)
from core.exceptions import ConfigError
from core.matrixfile import read_matrix
from core.runconfig import parse_run_config, read_run_config
from core.serializers import RunConfigSerializer, format_errors
from unmixing.config import Solver, SolverConfig
from unmixing.dual import dual_sgs_admm
from unmixing.primal import primal_admm

METADATA_NAME = 'metadata.txt'
SETTINGS_NAME = 'settings.txt'

SOLVERS = {
    Solver.PRIMAL: primal_admm,
    Solver.DUAL_SGS: dual_sgs_admm,
}


@dataclass(frozen=True)
class RunSettings:
    solver: Solver
    config: SolverConfig
    seed: int
    grid_n_r: Optional[int]
    grid_n_c: Optional[int]


def load_settings(config_path=None, **overrides):
    """Parse and validate the config file; non-None overrides win."""
    raw = read_run_config(config_path) if config_path else {}
    for key, value in overrides.items():
        if value is not None:
            raw[key] = str(value)
    serializer = RunConfigSerializer(data=raw)
    if not serializer.is_valid():
        raise ConfigError(
            'Invalid configuration:\n' + format_errors(serializer.errors)
        )
    data = serializer.validated_data
    return RunSettings(
        solver=Solver(data['solver']),
        config=serializer.solver_config().validate(),
        seed=data['seed'],
        grid_n_r=data.get('grid_n_r'),
        grid_n_c=data.get('grid_n_c'),
    )


def _grid_from_metadata(cube_path):
    meta = Path(cube_path).with_name(METADATA_NAME)
    if not meta.exists():
        return None, None
    values = parse_run_config(meta.read_text(), source=str(meta))
    try:
        return int(values['grid.n_r']), int(values['grid.n_c'])
    except (KeyError, ValueError) as exc:
        raise ConfigError(f'{meta} does not define the grid.') from exc


@dataclass(frozen=True)
class Problem:
    library: SpectralLibrary
    cube: HyperCube
    truth: Optional[AbundanceMap]


def load_problem(settings, library_path, cube_path, truth_path=None):
    """Read library, cube and optional truth; the grid comes from the
    config or, failing that, from metadata.txt beside the cube."""
    n_r, n_c = settings.grid_n_r, settings.grid_n_c
    if n_r is None or n_c is None:
        n_r, n_c = _grid_from_metadata(cube_path)
    if n_r is None:
        raise ConfigError(
            'grid.n_r and grid.n_c are required: set them in the config '
            f'or place {METADATA_NAME} next to the cube.'
        )
    library = SpectralLibrary(read_matrix(library_path))
    cube = cube_from_matrix(read_matrix(cube_path), n_r, n_c)
    truth = None
    if truth_path:
        truth = AbundanceMap(read_matrix(truth_path), cube.grid)
    return Problem(library, cube, truth)


def write_settings(path, settings, grid):
    """Write the resolved run configuration in config-file syntax.

    The file can be passed back through --config to repeat the run.
    """
    cfg = settings.config
    lines = [
        f'solver = {settings.solver.value}',
        f'rho = {cfg.rho.value}',
        f'lambda = {cfg.lam!r}',
        f'lambda_tv = {cfg.lam_tv!r}',
        f'sigma = {cfg.sigma!r}',
        f'tau = {cfg.tau!r}',
        f'tol1 = {cfg.tol1!r}',
        f'tol2 = {cfg.tol2!r}',
    ]
    if cfg.max_iter is not None:
        lines.append(f'max_iter = {cfg.max_iter}')
    lines += [
        f'boundary = {cfg.boundary.value}',
        f'inexact_tol = {cfg.inexact_tol!r}',
        f'seed = {settings.seed}',
        f'grid.n_r = {grid.n_r}',
        f'grid.n_c = {grid.n_c}',
    ]
    Path(path).write_text('\n'.join(lines) + '\n')


def run_solver(settings, problem, config=None):
    solve = SOLVERS[settings.solver]
    return solve(problem.cube, problem.library, config or settings.config,
                 reference=problem.truth)
