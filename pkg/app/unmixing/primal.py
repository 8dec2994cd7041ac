"""
Two-block primal ADMM for TV-regularized sparse unmixing.

Splitting: D1 = A Dt, D2 = Dt, D3 = Dt, D4 = D D3, D5 = Dt, with the
blocks M = (D1, D2, D3, D5) and N = (Dt, D4). D is the stacked
difference operator of the configured boundary.
"""
import dataclasses
import logging
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from core.exceptions import DimensionMismatch, Diverged
from unmixing.config import (
    Solver, Termination, IterationRecord, all_finite, build_report,
    check_reference, reference_error, relative_change, termination_for,
)
from unmixing.linsolve import (
    factor_primal_gram, solve_factored, solve_shifted_laplacian
)
from unmixing.objective import objective
from unmixing.prox import (
    Rho, group_shrink_rows, project_nonnegative, soft_threshold
)
from unmixing.spatial_ops import (
    difference, difference_adjoint, difference_shape
)

logger = logging.getLogger(__name__)


@dataclass
class PrimalState:
    D_tilde: np.ndarray
    D1: np.ndarray
    D2: np.ndarray
    D3: np.ndarray
    D4: np.ndarray
    D5: np.ndarray
    Lambda1: np.ndarray
    Lambda2: np.ndarray
    Lambda3: np.ndarray
    Lambda4: np.ndarray
    Lambda5: np.ndarray
    iter: int = 0
    D_tilde_prev: Optional[np.ndarray] = None

    @classmethod
    def zeros(cls, L, m, grid, boundary):
        n = grid.n
        d4 = difference_shape(m, grid, boundary)
        return cls(
            D_tilde=np.zeros((m, n)), D1=np.zeros((L, n)),
            D2=np.zeros((m, n)), D3=np.zeros((m, n)), D4=np.zeros(d4),
            D5=np.zeros((m, n)),
            Lambda1=np.zeros((L, n)), Lambda2=np.zeros((m, n)),
            Lambda3=np.zeros((m, n)), Lambda4=np.zeros(d4),
            Lambda5=np.zeros((m, n)),
        )

    def arrays(self):
        return (self.D_tilde, self.D1, self.D2, self.D3, self.D4, self.D5,
                self.Lambda1, self.Lambda2, self.Lambda3, self.Lambda4,
                self.Lambda5)

    def check_shapes(self, L, m, grid, boundary):
        n = grid.n
        expected = {
            'D_tilde': (m, n), 'D1': (L, n), 'D2': (m, n), 'D3': (m, n),
            'D4': difference_shape(m, grid, boundary), 'D5': (m, n),
            'Lambda1': (L, n), 'Lambda2': (m, n), 'Lambda3': (m, n),
            'Lambda4': difference_shape(m, grid, boundary),
            'Lambda5': (m, n),
        }
        for name, shape in expected.items():
            if getattr(self, name).shape != shape:
                raise DimensionMismatch(
                    f'{name} has shape {getattr(self, name).shape}, '
                    f'expected {shape}.'
                )


@dataclass(frozen=True)
class PrimalProblem:
    """Data and cached factorizations for one primal run."""
    Y: np.ndarray
    A: np.ndarray
    grid: object
    cfg: object
    gram: object

    @classmethod
    def build(cls, Y, A, cfg):
        if Y.bands != A.bands:
            raise DimensionMismatch(
                f'Cube has {Y.bands} bands, library has {A.bands}.'
            )
        return cls(Y.Y, A.A, Y.grid, cfg, factor_primal_gram(A))


def _shrink(M, kappa, rho):
    if rho is Rho.L21:
        return group_shrink_rows(M, kappa)
    return soft_threshold(M, kappa)


def primal_sweep(state, problem):
    """One M-step, N-step and multiplier update. Returns a new state."""
    Y, A, grid, cfg = problem.Y, problem.A, problem.grid, problem.cfg
    boundary = cfg.boundary
    sigma = cfg.sigma
    s = state

    # M-step: D1, D2, D3, D5 given (Dt, D4)
    D1 = (Y + sigma * (A @ s.D_tilde - s.Lambda1 / sigma)) / (1.0 + sigma)
    D2 = _shrink(s.D_tilde - s.Lambda2 / sigma, cfg.lam / sigma, cfg.rho)
    rhs3 = s.D_tilde - s.Lambda3 / sigma + difference_adjoint(
        s.D4 - s.Lambda4 / sigma, grid, boundary)
    D3 = solve_shifted_laplacian(rhs3, grid, boundary)
    D5 = project_nonnegative(s.D_tilde - s.Lambda5 / sigma)

    # N-step: Dt, D4 given M
    rhs = (A.T @ (D1 + s.Lambda1 / sigma) + (D2 + s.Lambda2 / sigma)
           + (D3 + s.Lambda3 / sigma) + (D5 + s.Lambda5 / sigma))
    D_tilde = solve_factored(problem.gram, rhs)
    HD3 = difference(D3, grid, boundary)
    D4 = soft_threshold(HD3 + s.Lambda4 / sigma, cfg.lam_tv / sigma)

    step = cfg.tau * sigma
    return dataclasses.replace(
        s,
        D_tilde=D_tilde, D1=D1, D2=D2, D3=D3, D4=D4, D5=D5,
        Lambda1=s.Lambda1 - step * (A @ D_tilde - D1),
        Lambda2=s.Lambda2 - step * (D_tilde - D2),
        Lambda3=s.Lambda3 - step * (D_tilde - D3),
        Lambda4=s.Lambda4 - step * (D4 - HD3),
        Lambda5=s.Lambda5 - step * (D_tilde - D5),
        iter=s.iter + 1,
        D_tilde_prev=s.D_tilde,
    )


def primal_kkt_residuals(state, A, grid, boundary):
    """Relative primal/dual KKT residuals and the successive change."""
    A = A.A
    s = state
    scale = 1.0 + np.linalg.norm(A)
    norm = np.linalg.norm
    r_p = (norm(s.D1 - A @ s.D_tilde) + norm(s.D2 - s.D_tilde)
           + norm(s.D3 - s.D_tilde)
           + norm(s.D4 - difference(s.D3, grid, boundary))
           + norm(s.D5 - s.D_tilde)) / scale
    r_d = (norm(A.T @ s.Lambda1 + s.Lambda2 + s.Lambda3 + s.Lambda5)
           + norm(s.Lambda3 + difference_adjoint(s.Lambda4, grid, boundary))
           ) / scale
    prev = s.D_tilde_prev if s.D_tilde_prev is not None \
        else np.zeros_like(s.D_tilde)
    return float(r_p), float(r_d), relative_change(s.D_tilde, prev)


def primal_admm(Y, A, cfg, reference=None, initial_state=None):
    """Run the primal ADMM from a zero (or given) state.

    Returns an UnmixReport whose x_hat is Dt of the last iterate. Raises
    Diverged, carrying the report up to the last finite iterate, when
    NaN/Inf shows up.
    """
    cfg.validate()
    problem = PrimalProblem.build(Y, A, cfg)
    grid = Y.grid
    L, m = A.A.shape
    reference = check_reference(reference, (m, grid.n))
    state = initial_state or PrimalState.zeros(L, m, grid, cfg.boundary)
    state.check_shapes(L, m, grid, cfg.boundary)
    cap = cfg.iteration_cap(Solver.PRIMAL)

    logger.info('Primal ADMM: %d bands, %d signatures, %dx%d grid, '
                'lambda=%g, lambda_tv=%g, sigma=%g, %s boundary.',
                L, m, grid.n_r, grid.n_c, cfg.lam, cfg.lam_tv, cfg.sigma,
                cfg.boundary.value)
    trace = []
    termination = None
    start = time.perf_counter()
    while termination is None:
        new_state = primal_sweep(state, problem)
        if not all_finite(*new_state.arrays()):
            report = build_report(
                state.D_tilde, grid, trace, Termination.DIVERGED,
                time.perf_counter() - start, Solver.PRIMAL, cfg,
            )
            logger.error('Primal ADMM diverged at iteration %d.',
                         len(trace) + 1)
            raise Diverged(
                f'Primal ADMM produced NaN/Inf at iteration '
                f'{len(trace) + 1}.', report
            )
        state = new_state
        r_p, r_d, error = primal_kkt_residuals(state, A, grid, cfg.boundary)
        X = state.D_tilde
        trace.append(IterationRecord(
            iteration=len(trace) + 1,
            r_p=r_p, r_d=r_d, error=error,
            objective=objective(project_nonnegative(X), Y, A, cfg.lam,
                                cfg.lam_tv, cfg.rho, cfg.boundary),
            elapsed=time.perf_counter() - start,
            ref_error=reference_error(X, reference),
        ))
        logger.debug('iter %d: R_P=%.3e R_D=%.3e Error=%.3e', len(trace),
                     r_p, r_d, error)
        termination = termination_for(r_p, r_d, error, len(trace), cap, cfg)

    elapsed = time.perf_counter() - start
    logger.info('Primal ADMM stopped (%s) after %d iterations, %.3fs.',
                termination.value, len(trace), elapsed)
    return build_report(state.D_tilde, grid, trace, termination, elapsed,
                        Solver.PRIMAL, cfg)
