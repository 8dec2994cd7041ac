"""
Objective of the TV-regularized sparse unmixing problem.
"""
import numpy as np

from core.datamodel import AbundanceMap
from unmixing.prox import Rho
from unmixing.spatial_ops import Boundary, tv_norm

FEASIBILITY_SLACK = 1e-12


def sparsity_norm(X, rho):
    """||X||_{1,1} or the row-group norm sum_i ||X[i, :]||_2."""
    if rho is Rho.L21:
        return float(np.linalg.norm(X, axis=1).sum())
    return float(np.abs(X).sum())


def objective(X, Y, A, lam, lam_tv, rho=Rho.L1,
              boundary=Boundary.REFLEXIVE):
    """0.5||AX - Y||^2 + lam ||X||_{rho,1} + lam_tv ||D X||_1 + d_+(X).

    Returns +inf when X has an entry below -1e-12; smaller negatives are
    clamped to zero first.
    """
    X = X.X if isinstance(X, AbundanceMap) else np.asarray(X, dtype=float)
    grid = Y.grid
    A = A.A
    if X.size and X.min() < -FEASIBILITY_SLACK:
        return float('inf')
    X = np.maximum(X, 0.0)
    fit = 0.5 * float(np.linalg.norm(A @ X - Y.Y) ** 2)
    value = fit + lam * sparsity_norm(X, rho)
    if lam_tv:
        value += lam_tv * tv_norm(X, grid, boundary)
    return value
