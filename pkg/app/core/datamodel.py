"""
Core data types for hyperspectral unmixing problems.

Pixels are stored column-major: pixel (r, c) of an n_r x n_c image is
column (c - 1) * n_r + r of every L x n or m x n matrix (1-based).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from core.exceptions import DimensionMismatch, NonFiniteInput, OutOfRange

NDArrayF = npt.NDArray[np.float64]


def as_real_matrix(M, name='matrix'):
    """Return M as a 2-D float64 array, rejecting NaN/Inf."""
    arr = np.array(M, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise DimensionMismatch(f'{name} must be 2-D, got {arr.ndim}-D.')
    if not np.all(np.isfinite(arr)):
        raise NonFiniteInput(f'{name} contains NaN or Inf entries.')
    return arr


@dataclass(frozen=True)
class SpatialGrid:
    """Image geometry: n_r pixel rows by n_c pixel columns."""
    n_r: int
    n_c: int

    def __post_init__(self):
        if int(self.n_r) < 1 or int(self.n_c) < 1:
            raise DimensionMismatch(
                f'Grid dimensions must be positive, got {self.n_r}x{self.n_c}.'
            )
        object.__setattr__(self, 'n_r', int(self.n_r))
        object.__setattr__(self, 'n_c', int(self.n_c))

    @property
    def n(self) -> int:
        return self.n_r * self.n_c

    @property
    def shape(self):
        return (self.n_r, self.n_c)

    def check_columns(self, M, name='matrix'):
        if M.shape[1] != self.n:
            raise DimensionMismatch(
                f'{name} has {M.shape[1]} columns, grid '
                f'{self.n_r}x{self.n_c} needs {self.n}.'
            )

    def to_image(self, row):
        """Reshape a length-n pixel vector into an n_r x n_c image."""
        return np.asarray(row).reshape(self.n_c, self.n_r).T

    def from_image(self, image):
        """Flatten an n_r x n_c image into column-major pixel order."""
        return np.asarray(image).T.reshape(-1)


@dataclass(frozen=True)
class SpectralLibrary:
    """The L x m library A; each column is a candidate signature."""
    A: NDArrayF

    def __post_init__(self):
        arr = as_real_matrix(self.A, 'library')
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DimensionMismatch('Library must have at least one band '
                                    'and one signature.')
        arr.setflags(write=False)
        object.__setattr__(self, 'A', arr)

    @property
    def bands(self) -> int:
        return self.A.shape[0]

    @property
    def signatures(self) -> int:
        return self.A.shape[1]


@dataclass(frozen=True)
class HyperCube:
    """Observed data Y (L x n) bound to its spatial grid."""
    Y: NDArrayF
    grid: SpatialGrid

    def __post_init__(self):
        arr = as_real_matrix(self.Y, 'cube')
        self.grid.check_columns(arr, 'cube')
        arr.setflags(write=False)
        object.__setattr__(self, 'Y', arr)

    @property
    def bands(self) -> int:
        return self.Y.shape[0]


@dataclass(frozen=True)
class AbundanceMap:
    """Abundances X (m x n) over a spatial grid. May hold negatives."""
    X: NDArrayF
    grid: SpatialGrid

    def __post_init__(self):
        arr = as_real_matrix(self.X, 'abundances')
        self.grid.check_columns(arr, 'abundances')
        arr.setflags(write=False)
        object.__setattr__(self, 'X', arr)

    @property
    def signatures(self) -> int:
        return self.X.shape[0]


def cube_from_matrix(Y, n_r, n_c) -> HyperCube:
    """Bind an L x n matrix to an n_r x n_c grid."""
    arr = np.array(Y, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != int(n_r) * int(n_c):
        cols = arr.shape[1] if arr.ndim == 2 else arr.size
        raise DimensionMismatch(
            f'Grid {n_r}x{n_c} needs {int(n_r) * int(n_c)} pixels, '
            f'matrix has {cols} columns.'
        )
    return HyperCube(arr, SpatialGrid(n_r, n_c))


def pixel_index(r, c, grid: SpatialGrid) -> int:
    """1-based flat index of pixel (r, c)."""
    if not (1 <= r <= grid.n_r and 1 <= c <= grid.n_c):
        raise OutOfRange(
            f'Pixel ({r}, {c}) outside grid {grid.n_r}x{grid.n_c}.'
        )
    return (c - 1) * grid.n_r + r


def pixel_coords(p, grid: SpatialGrid):
    """Inverse of pixel_index: (r, c) for a 1-based flat index."""
    if not 1 <= p <= grid.n:
        raise OutOfRange(f'Pixel index {p} outside 1..{grid.n}.')
    c, r = divmod(p - 1, grid.n_r)
    return r + 1, c + 1
