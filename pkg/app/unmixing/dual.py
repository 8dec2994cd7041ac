"""
Dual symmetric Gauss-Seidel ADMM.

Works on the dual of the reflexive-boundary problem with blocks
V1 (sparsity + nonnegativity + vertical TV), V2 (horizontal TV) and
V3 (data fit). Each sweep solves the smooth V3 block twice around V1,
then updates V2 and the multiplier X, which is the abundance estimate.
"""
import dataclasses
import logging
import time
from dataclasses import dataclass
from functools import partial
from typing import Optional

import numpy as np

from core.exceptions import DimensionMismatch, Diverged
from unmixing.config import (
    Solver, Termination, IterationRecord, all_finite, build_report,
    check_reference, reference_error, relative_change, termination_for,
)
from unmixing.linsolve import factor_dual_gram, solve_factored
from unmixing.objective import objective
from unmixing.prox import (
    ProxSpec, project_nonnegative, prox_conjugate, prox_horizontal_tv, prox_p
)
from unmixing.spatial_ops import Boundary

logger = logging.getLogger(__name__)


@dataclass
class DualState:
    V1: np.ndarray
    V2: np.ndarray
    V3: np.ndarray
    X: np.ndarray
    iter: int = 0
    delta_hat_norm: float = 0.0
    delta_norm: float = 0.0
    X_prev: Optional[np.ndarray] = None

    @classmethod
    def zeros(cls, L, m, grid):
        n = grid.n
        return cls(V1=np.zeros((m, n)), V2=np.zeros((m, n)),
                   V3=np.zeros((L, n)), X=np.zeros((m, n)))

    def arrays(self):
        return (self.V1, self.V2, self.V3, self.X)


@dataclass(frozen=True)
class DualProblem:
    Y: np.ndarray
    A: np.ndarray
    grid: object
    cfg: object
    gram: object
    spec: ProxSpec

    @classmethod
    def build(cls, Y, A, cfg):
        if Y.bands != A.bands:
            raise DimensionMismatch(
                f'Cube has {Y.bands} bands, library has {A.bands}.'
            )
        spec = ProxSpec(cfg.lam, cfg.lam_tv, cfg.rho, cfg.sigma)
        return cls(Y.Y, A.A, Y.grid, cfg, factor_dual_gram(A, cfg.sigma),
                   spec)


def _solve_v3(problem, V1, V2, X):
    """Exact V3 solve; returns (V3, ||delta||_F, ||rhs||_F)."""
    A, sigma = problem.A, problem.cfg.sigma
    rhs = problem.Y - sigma * (A @ (V1 + V2)) - A @ X
    V3 = solve_factored(problem.gram, rhs)
    delta = V3 + sigma * (A @ (A.T @ V3)) - rhs
    return V3, float(np.linalg.norm(delta)), float(np.linalg.norm(rhs))


def _check_inexactness(problem, which, delta_norm, rhs_norm, iteration):
    budget = problem.cfg.inexact_tol * (1.0 + rhs_norm)
    if delta_norm > budget:
        logger.warning('Iteration %d: %s residual %.3e exceeds %.3e.',
                       iteration, which, delta_norm, budget)


def dual_sweep(state, problem):
    """V3-hat, V1, V3, V2, then X. Returns a new state."""
    A, grid, cfg = problem.A, problem.grid, problem.cfg
    sigma = cfg.sigma
    s = state
    k = s.iter + 1

    V3_hat, d_hat, rhs_norm = _solve_v3(problem, s.V1, s.V2, s.X)
    _check_inexactness(problem, 'delta_hat', d_hat, rhs_norm, k)

    C1 = s.V2 + A.T @ V3_hat + s.X / sigma
    prox_sigma_p = partial(prox_p, spec=problem.spec, grid=grid)
    V1 = -prox_conjugate(prox_sigma_p, C1, sigma)

    V3, d, rhs_norm = _solve_v3(problem, V1, s.V2, s.X)
    _check_inexactness(problem, 'delta', d, rhs_norm, k)

    AtV3 = A.T @ V3
    C2 = V1 + AtV3 + s.X / sigma
    V2 = prox_horizontal_tv(sigma * C2, sigma * cfg.lam_tv, grid) / sigma - C2

    X = s.X - cfg.tau * sigma * (-V1 - V2 - AtV3)
    return dataclasses.replace(
        s, V1=V1, V2=V2, V3=V3, X=X, iter=k,
        delta_hat_norm=d_hat, delta_norm=d, X_prev=s.X,
    )


def dual_kkt_residuals(state, A, Y):
    """(R_P2, R_D2, Error2); the primal slack is taken as U3 = -V3."""
    A, Yv = A.A, Y.Y
    s = state
    r_p = np.linalg.norm(A @ s.X - Yv + s.V3) / (1.0 + np.linalg.norm(Yv))
    r_d = np.linalg.norm(s.V1 + s.V2 + A.T @ s.V3) / (1.0 + np.linalg.norm(A))
    prev = s.X_prev if s.X_prev is not None else np.zeros_like(s.X)
    return float(r_p), float(r_d), relative_change(s.X, prev)


def dual_sgs_admm(Y, A, cfg, reference=None, initial_state=None):
    """Run the dual sGS-ADMM. x_hat is the raw multiplier X."""
    cfg.validate()
    problem = DualProblem.build(Y, A, cfg)
    grid = Y.grid
    L, m = A.A.shape
    reference = check_reference(reference, (m, grid.n))
    state = initial_state or DualState.zeros(L, m, grid)
    for name, shape in (('V1', (m, grid.n)), ('V2', (m, grid.n)),
                        ('V3', (L, grid.n)), ('X', (m, grid.n))):
        if getattr(state, name).shape != shape:
            raise DimensionMismatch(f'{name} must have shape {shape}.')
    cap = cfg.iteration_cap(Solver.DUAL_SGS)

    logger.info('Dual sGS-ADMM: %d bands, %d signatures, %dx%d grid, '
                'lambda=%g, lambda_tv=%g, sigma=%g.',
                L, m, grid.n_r, grid.n_c, cfg.lam, cfg.lam_tv, cfg.sigma)
    trace = []
    termination = None
    start = time.perf_counter()
    while termination is None:
        new_state = dual_sweep(state, problem)
        if not all_finite(*new_state.arrays()):
            report = build_report(
                state.X, grid, trace, Termination.DIVERGED,
                time.perf_counter() - start, Solver.DUAL_SGS, cfg,
            )
            logger.error('Dual sGS-ADMM diverged at iteration %d.',
                         len(trace) + 1)
            raise Diverged(
                f'Dual sGS-ADMM produced NaN/Inf at iteration '
                f'{len(trace) + 1}.', report
            )
        state = new_state
        r_p, r_d, error = dual_kkt_residuals(state, A, Y)
        trace.append(IterationRecord(
            iteration=len(trace) + 1,
            r_p=r_p, r_d=r_d, error=error,
            objective=objective(project_nonnegative(state.X), Y, A, cfg.lam,
                                cfg.lam_tv, cfg.rho, Boundary.REFLEXIVE),
            elapsed=time.perf_counter() - start,
            ref_error=reference_error(state.X, reference),
            delta_hat_norm=state.delta_hat_norm,
            delta_norm=state.delta_norm,
        ))
        logger.debug('iter %d: R_P=%.3e R_D=%.3e Error=%.3e', len(trace),
                     r_p, r_d, error)
        termination = termination_for(r_p, r_d, error, len(trace), cap, cfg)

    elapsed = time.perf_counter() - start
    logger.info('Dual sGS-ADMM stopped (%s) after %d iterations, %.3fs.',
                termination.value, len(trace), elapsed)
    return build_report(state.X, grid, trace, termination, elapsed,
                        Solver.DUAL_SGS, cfg)
