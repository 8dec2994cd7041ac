"""
Finite-difference operators on abundance matrices and their adjoints.

Every operator acts on the pixel axis (columns) of an m x n matrix and
treats each band independently. Internally a matrix is viewed as an
(m, n_c, n_r) array, so axis 1 walks image columns and axis 2 walks
pixel rows inside one image column.
"""
import enum

import numpy as np

from core.exceptions import DimensionMismatch


class DiffOpKind(enum.Enum):
    REFLEXIVE_ACROSS_COLUMNS = 'reflexive_across_columns'   # H^_v
    REFLEXIVE_WITHIN_COLUMNS = 'reflexive_within_columns'   # H^_h
    PERIODIC_HORIZONTAL = 'periodic_horizontal'             # H_h
    PERIODIC_VERTICAL = 'periodic_vertical'                 # H_v
    PERIODIC_STACKED = 'periodic_stacked'                   # H


class Boundary(enum.Enum):
    PERIODIC = 'periodic'
    REFLEXIVE = 'reflexive'


def output_shape(op, m, grid):
    """Shape of apply_diff(op, X) for an m x n input."""
    n = grid.n
    if op is DiffOpKind.REFLEXIVE_ACROSS_COLUMNS:
        return (m, n - grid.n_r)
    if op is DiffOpKind.REFLEXIVE_WITHIN_COLUMNS:
        return (m, n - grid.n_c)
    if op is DiffOpKind.PERIODIC_STACKED:
        return (2 * m, n)
    return (m, n)


def _cube(X, grid):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != grid.n:
        raise DimensionMismatch(
            f'Expected {grid.n} pixel columns, got shape {X.shape}.'
        )
    return X.reshape(X.shape[0], grid.n_c, grid.n_r)


def apply_diff(op, X, grid):
    """Apply one difference operator to the m x n matrix X."""
    if op is DiffOpKind.REFLEXIVE_ACROSS_COLUMNS:
        _cube(X, grid)
        X = np.asarray(X, dtype=np.float64)
        return X[:, grid.n_r:] - X[:, :grid.n - grid.n_r]
    Xc = _cube(X, grid)
    m = Xc.shape[0]
    if op is DiffOpKind.REFLEXIVE_WITHIN_COLUMNS:
        return (Xc[:, :, 1:] - Xc[:, :, :-1]).reshape(m, -1)
    if op is DiffOpKind.PERIODIC_HORIZONTAL:
        return (Xc - np.roll(Xc, -1, axis=1)).reshape(m, -1)
    if op is DiffOpKind.PERIODIC_VERTICAL:
        return (Xc - np.roll(Xc, -1, axis=2)).reshape(m, -1)
    if op is DiffOpKind.PERIODIC_STACKED:
        return np.vstack([
            apply_diff(DiffOpKind.PERIODIC_HORIZONTAL, X, grid),
            apply_diff(DiffOpKind.PERIODIC_VERTICAL, X, grid),
        ])
    raise ValueError(f'Unknown difference operator {op!r}.')


def apply_diff_adjoint(op, V, grid):
    """Exact adjoint of apply_diff: returns an m x n matrix."""
    V = np.asarray(V, dtype=np.float64)
    if V.ndim != 2:
        raise DimensionMismatch(f'Expected a matrix, got shape {V.shape}.')
    rows = V.shape[0] // 2 if op is DiffOpKind.PERIODIC_STACKED else V.shape[0]
    if V.shape != output_shape(op, rows, grid):
        raise DimensionMismatch(
            f'{op.name} adjoint expects shape '
            f'{output_shape(op, rows, grid)}, got {V.shape}.'
        )
    m, n = rows, grid.n
    if op is DiffOpKind.REFLEXIVE_ACROSS_COLUMNS:
        out = np.zeros((m, n))
        out[:, grid.n_r:] += V
        out[:, :n - grid.n_r] -= V
        return out
    if op is DiffOpKind.REFLEXIVE_WITHIN_COLUMNS:
        Vc = V.reshape(m, grid.n_c, grid.n_r - 1)
        out = np.zeros((m, grid.n_c, grid.n_r))
        out[:, :, 1:] += Vc
        out[:, :, :-1] -= Vc
        return out.reshape(m, n)
    if op is DiffOpKind.PERIODIC_HORIZONTAL:
        Vc = V.reshape(m, grid.n_c, grid.n_r)
        return (Vc - np.roll(Vc, 1, axis=1)).reshape(m, n)
    if op is DiffOpKind.PERIODIC_VERTICAL:
        Vc = V.reshape(m, grid.n_c, grid.n_r)
        return (Vc - np.roll(Vc, 1, axis=2)).reshape(m, n)
    if op is DiffOpKind.PERIODIC_STACKED:
        horizontal = DiffOpKind.PERIODIC_HORIZONTAL
        vertical = DiffOpKind.PERIODIC_VERTICAL
        return (apply_diff_adjoint(horizontal, V[:m], grid)
                + apply_diff_adjoint(vertical, V[m:], grid))
    raise ValueError(f'Unknown difference operator {op!r}.')


def difference(X, grid, boundary):
    """Full TV difference operator D for a boundary convention.

    Periodic: H X, shape 2m x n. Reflexive: [H^_v X, H^_h X] side by
    side, shape m x (2n - n_r - n_c).
    """
    if boundary is Boundary.PERIODIC:
        return apply_diff(DiffOpKind.PERIODIC_STACKED, X, grid)
    return np.hstack([
        apply_diff(DiffOpKind.REFLEXIVE_ACROSS_COLUMNS, X, grid),
        apply_diff(DiffOpKind.REFLEXIVE_WITHIN_COLUMNS, X, grid),
    ])


def difference_adjoint(V, grid, boundary):
    """Adjoint of difference()."""
    if boundary is Boundary.PERIODIC:
        return apply_diff_adjoint(DiffOpKind.PERIODIC_STACKED, V, grid)
    split = grid.n - grid.n_r
    V = np.asarray(V, dtype=np.float64)
    if V.ndim != 2 or V.shape[1] != 2 * grid.n - grid.n_r - grid.n_c:
        raise DimensionMismatch(
            f'Reflexive difference adjoint got shape {V.shape}.'
        )
    return (apply_diff_adjoint(DiffOpKind.REFLEXIVE_ACROSS_COLUMNS,
                               V[:, :split], grid)
            + apply_diff_adjoint(DiffOpKind.REFLEXIVE_WITHIN_COLUMNS,
                                 V[:, split:], grid))


def difference_shape(m, grid, boundary):
    if boundary is Boundary.PERIODIC:
        return (2 * m, grid.n)
    return (m, 2 * grid.n - grid.n_r - grid.n_c)


def tv_norm(X, grid, boundary):
    """Anisotropic total variation ||D X||_1 under a boundary convention."""
    return float(np.abs(difference(X, grid, boundary)).sum())
