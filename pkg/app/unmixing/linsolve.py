"""
Structured linear solvers shared by the unmixing iterations.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from django.conf import settings
from scipy import fft, linalg

from core.exceptions import (
    DimensionMismatch, GridTooLargeForDense, NotPositiveDefinite, TooLarge
)
from unmixing.spatial_ops import Boundary, difference, difference_adjoint

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SpdFactorization:
    """Cholesky factor of a symmetric positive-definite matrix."""
    matrix_id: str
    dimension: int
    factor: tuple

    def matvec(self, B):
        """K @ B, rebuilt from the stored upper factor."""
        U = np.triu(self.factor[0])
        return U.T @ (U @ B)


def _factor(K, matrix_id):
    if not np.all(np.isfinite(K)):
        raise NotPositiveDefinite(f'{matrix_id} has non-finite entries.')
    try:
        c = linalg.cho_factor(K, lower=False, check_finite=False)
    except linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f'{matrix_id}: {exc}') from exc
    logger.debug('Factored %s (%d x %d).', matrix_id, *K.shape)
    return SpdFactorization(matrix_id, K.shape[0], c)


def factor_dual_gram(A, sigma):
    """Factor I + sigma A A^T (L x L)."""
    if not sigma > 0:
        raise NotPositiveDefinite(f'sigma must be > 0, got {sigma}.')
    A = A.A
    K = np.eye(A.shape[0]) + sigma * (A @ A.T)
    return _factor(K, f'I+{sigma:g}AAt')


def factor_primal_gram(A):
    """Factor A^T A + 3I (m x m)."""
    A = A.A
    K = A.T @ A + 3.0 * np.eye(A.shape[1])
    return _factor(K, 'AtA+3I')


def solve_factored(F, B):
    B = np.asarray(B, dtype=np.float64)
    if B.shape[0] != F.dimension:
        raise DimensionMismatch(
            f'Right-hand side has {B.shape[0]} rows, {F.matrix_id} '
            f'needs {F.dimension}.'
        )
    return linalg.cho_solve(F.factor, B, check_finite=False)


@dataclass(frozen=True)
class FreqKernel:
    """Eigenvalues of I + H^T H, flat index k2 * n_r + k1."""
    grid: object
    eigenvalues: np.ndarray

    def as_image(self):
        return self.eigenvalues.reshape(self.grid.n_c, self.grid.n_r)


@lru_cache(maxsize=32)
def build_freq_kernel(grid):
    k1 = np.arange(grid.n_r)
    k2 = np.arange(grid.n_c)
    # |1 - exp(-i w)|^2 == 4 sin^2(w / 2)
    ev_r = 4.0 * np.sin(np.pi * k1 / grid.n_r) ** 2
    ev_c = 4.0 * np.sin(np.pi * k2 / grid.n_c) ** 2
    eig = 1.0 + ev_c[:, None] + ev_r[None, :]
    eig.setflags(write=False)
    return FreqKernel(grid, eig.reshape(-1))


def _dense_cap():
    return int(getattr(settings, 'HSU_DENSE_GRID_CAP', 4096))


@lru_cache(maxsize=8)
def _dense_laplacian_factor(grid, boundary):
    n = grid.n
    eye = np.eye(n)
    # rows of the identity are n one-hot "bands", so this is I + D^T D
    K = eye + difference_adjoint(difference(eye, grid, boundary),
                                 grid, boundary)
    logger.info('Building dense (I + D^T D) for a %dx%d grid (%s).',
                grid.n_r, grid.n_c, boundary.value)
    return linalg.cho_factor(K, lower=False, check_finite=False)


def _solve_periodic(B, grid):
    m = B.shape[0]
    cube = B.reshape(m, grid.n_c, grid.n_r)
    eig = build_freq_kernel(grid).as_image()
    out = fft.ifft2(fft.fft2(cube, axes=(1, 2)) / eig, axes=(1, 2))
    residue = np.abs(out.imag).max() if out.size else 0.0
    scale = 1.0 + (np.abs(B).max() if B.size else 0.0)
    assert residue <= 1e-10 * scale, f'imaginary residue {residue:.3e}'
    return np.ascontiguousarray(out.real).reshape(m, grid.n)


def solve_shifted_laplacian(B, grid, boundary, dense=False):
    """Solve X (I + D^T D) = B band by band.

    Periodic boundaries go through the 2D FFT unless `dense` is set;
    reflexive boundaries always use a cached dense Cholesky factor of the
    n x n matrix, limited to settings.HSU_DENSE_GRID_CAP pixels.
    """
    B = np.asarray(B, dtype=np.float64)
    if B.ndim != 2 or B.shape[1] != grid.n:
        raise DimensionMismatch(
            f'Expected {grid.n} pixel columns, got shape {B.shape}.'
        )
    if boundary is Boundary.PERIODIC and not dense:
        return _solve_periodic(B, grid)
    cap = _dense_cap()
    if grid.n > cap:
        raise GridTooLargeForDense(
            f'Grid {grid.n_r}x{grid.n_c} has {grid.n} pixels; the dense '
            f'solver is limited to {cap}.'
        )
    c = _dense_laplacian_factor(grid, boundary)
    return linalg.cho_solve(c, B.T, check_finite=False).T


def check_S_posdef(A, sigma):
    """Smallest eigenvalue of the convergence matrix S.

    S = (I/sigma + AA^T) - A [I + A^T (I/sigma + AA^T)^-1 A]^-1 A^T,
    a diagnostic only: nothing gates on it.
    """
    A = A.A
    L, m = A.shape
    cap = int(getattr(settings, 'HSU_DIAGNOSTIC_BAND_CAP', 2048))
    if L > cap:
        raise TooLarge(f'{L} bands exceed the diagnostic cap of {cap}.')
    G = np.eye(L) / sigma + A @ A.T
    inner = np.eye(m) + A.T @ linalg.solve(G, A, assume_a='pos')
    S = G - A @ linalg.solve(inner, A.T, assume_a='pos')
    S = 0.5 * (S + S.T)
    return float(linalg.eigvalsh(S)[0])
