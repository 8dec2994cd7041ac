"""
Solver configuration, iteration records and the run report.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from core.datamodel import AbundanceMap
from core.exceptions import ConfigError, DimensionMismatch, ZeroReference
from unmixing.prox import Rho
from unmixing.spatial_ops import Boundary

GOLDEN_RATIO = (1.0 + math.sqrt(5.0)) / 2.0

PRIMAL_MAX_ITER = 200
DUAL_MAX_ITER = 50


class Solver(enum.Enum):
    PRIMAL = 'primal'
    DUAL_SGS = 'dual-sgs'


class Termination(enum.Enum):
    KKT_TOL = 'KktTol'
    CHANGE_TOL = 'ChangeTol'
    MAX_ITER = 'MaxIter'
    DIVERGED = 'Diverged'


@dataclass(frozen=True)
class SolverConfig:
    """Parameters shared by both solvers.

    max_iter=None picks the per-solver cap (200 primal, 50 dual).
    The dual solver ignores `boundary`: it always works reflexively.
    """
    lam: float = 0.0
    lam_tv: float = 0.0
    rho: Rho = Rho.L1
    sigma: float = 0.05
    tau: float = 1.0
    tol1: float = 1e-3
    tol2: float = 1e-4
    max_iter: Optional[int] = None
    boundary: Boundary = Boundary.PERIODIC
    inexact_tol: float = 1e-8

    def validate(self):
        checks = [
            ('lambda', self.lam >= 0, 'must be >= 0'),
            ('lambda_tv', self.lam_tv >= 0, 'must be >= 0'),
            ('sigma', self.sigma > 0, 'must be > 0'),
            ('tau', 0 < self.tau < GOLDEN_RATIO,
             f'must lie in (0, {GOLDEN_RATIO:.10f})'),
            ('tol1', self.tol1 > 0, 'must be > 0'),
            ('tol2', self.tol2 > 0, 'must be > 0'),
            ('inexact_tol', self.inexact_tol >= 0, 'must be >= 0'),
            ('max_iter', self.max_iter is None or self.max_iter >= 1,
             'must be >= 1'),
            ('rho', isinstance(self.rho, Rho), 'must be l1 or l21'),
            ('boundary', isinstance(self.boundary, Boundary),
             'must be periodic or reflexive'),
        ]
        for key, ok, message in checks:
            if not ok:
                value = getattr(self, {'lambda': 'lam',
                                       'lambda_tv': 'lam_tv'}.get(key, key))
                raise ConfigError(f'{key}={value!r} {message}.')
        return self

    def iteration_cap(self, solver):
        if self.max_iter is not None:
            return int(self.max_iter)
        return PRIMAL_MAX_ITER if solver is Solver.PRIMAL else DUAL_MAX_ITER


def model_label(cfg):
    """SUn / CLSUn, with a TV suffix when lambda_tv > 0."""
    base = 'CLSUn' if cfg.rho is Rho.L21 else 'SUn'
    return base + 'TV' if cfg.lam_tv > 0 else base


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    r_p: float
    r_d: float
    error: float
    objective: float
    elapsed: float
    ref_error: Optional[float] = None
    delta_hat_norm: Optional[float] = None
    delta_norm: Optional[float] = None


@dataclass(frozen=True)
class UnmixReport:
    x_hat: AbundanceMap
    x_projected: AbundanceMap
    trace: tuple
    termination: Termination
    iterations: int
    elapsed: float
    solver: Solver
    model: str
    config: SolverConfig = field(repr=False, default=None)

    @property
    def final(self):
        return self.trace[-1] if self.trace else None


def relative_change(new, old):
    """||new - old||_F / ||new||_F, or 0 when new is the zero matrix."""
    denom = np.linalg.norm(new)
    if denom == 0:
        return 0.0
    return float(np.linalg.norm(new - old) / denom)


def check_reference(reference, shape):
    """Validate an optional ground-truth map used for error tracking."""
    if reference is None:
        return None
    if reference.X.shape != shape:
        raise DimensionMismatch(
            f'Reference has shape {reference.X.shape}, expected {shape}.'
        )
    if not np.any(reference.X):
        raise ZeroReference('Reference abundances are all zero.')
    return reference


def reference_error(X, reference):
    if reference is None:
        return None
    ref = reference.X
    return float(np.linalg.norm(X - ref) / np.linalg.norm(ref))


def termination_for(r_p, r_d, error, iteration, cap, cfg):
    """Stopping rule shared by both solvers; None means keep going."""
    if r_p < cfg.tol1 and r_d < cfg.tol1:
        return Termination.KKT_TOL
    if error < cfg.tol2:
        return Termination.CHANGE_TOL
    if iteration >= cap:
        return Termination.MAX_ITER
    return None


def all_finite(*arrays):
    return all(np.all(np.isfinite(a)) for a in arrays)


def build_report(X, grid, trace, termination, elapsed, solver, cfg):
    X = np.asarray(X, dtype=np.float64)
    return UnmixReport(
        x_hat=AbundanceMap(X, grid),
        x_projected=AbundanceMap(np.maximum(X, 0.0) + 0.0, grid),
        trace=tuple(trace),
        termination=termination,
        iterations=len(trace),
        elapsed=elapsed,
        solver=solver,
        model=model_label(cfg),
        config=cfg,
    )
