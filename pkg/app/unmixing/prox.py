"""
Proximal operators used by the unmixing solvers.

The 1D total-variation prox is an exact linear-time scan (the
linearized taut string of proxTV, equivalent to Condat's direct
algorithm). It is compiled with numba when available; the independent row
problems of the vertical/horizontal TV proxes then run in a parallel
region of width settings.HSU_THREADS.
"""
import enum
import threading
from dataclasses import dataclass

import numpy as np

from core.exceptions import (
    DimensionMismatch, EmptySignal, NegativeThreshold
)

NUMBA_AVAILABLE = True
try:
    import numba as nb
except ImportError:
    NUMBA_AVAILABLE = False


class Rho(enum.Enum):
    L1 = 'l1'
    L21 = 'l21'


@dataclass(frozen=True)
class ProxSpec:
    """Weights of p(X) = lam ||X||_{rho,1} + lam_tv ||H^_v X||_1 + d_+(X)."""
    lam: float
    lam_tv: float
    rho: Rho = Rho.L1
    sigma: float = 1.0

    def __post_init__(self):
        if self.lam < 0 or self.lam_tv < 0:
            raise NegativeThreshold(
                f'Regularization weights must be >= 0, got lam={self.lam}, '
                f'lam_tv={self.lam_tv}.'
            )
        if not self.sigma > 0:
            raise NegativeThreshold(f'sigma must be > 0, got {self.sigma}.')


def _check_kappa(kappa):
    if kappa < 0:
        raise NegativeThreshold(f'Threshold must be >= 0, got {kappa}.')


def soft_threshold(M, kappa):
    """Entrywise sign(M) * max(|M| - kappa, 0)."""
    _check_kappa(kappa)
    M = np.asarray(M, dtype=np.float64)
    if kappa == 0:
        return M.copy()
    return np.sign(M) * np.maximum(np.abs(M) - kappa, 0.0)


def group_shrink_rows(M, kappa):
    """Scale each row by max(||row|| - kappa, 0) / ||row||."""
    _check_kappa(kappa)
    M = np.asarray(M, dtype=np.float64)
    if kappa == 0:
        return M.copy()
    norms = np.linalg.norm(M, axis=1, keepdims=True)
    excess = np.maximum(norms - kappa, 0.0)
    alpha = excess / (excess + kappa)
    return alpha * M


def project_nonnegative(M):
    # + 0.0 turns -0.0 into 0.0
    return np.maximum(np.asarray(M, dtype=np.float64), 0.0) + 0.0


def _tv1d_scan(y, lam, out):
    # Linearized taut string: the lower (lo) and upper (hi) strings hold
    # the running segment levels, their heights track the signed area
    # swept since the last committed knot.
    n = y.shape[0]
    i = 0
    lo_height = 0.0
    hi_height = 0.0
    lo = y[0] - lam
    hi = y[0] + lam
    last = -1
    lo_knot = 0
    hi_knot = 0
    while i < n:
        while i < n - 1:
            lo_height += lo - y[i]
            if lo_height > lam:
                i = lo_knot + 1
                out[last + 1:lo_knot + 1] = lo
                last = lo_knot
                lo = y[i]
                hi = lo + 2.0 * lam
                hi_height = lam
                lo_height = -lam
                lo_knot = i
                hi_knot = i
                i += 1
                continue
            hi_height += hi - y[i]
            if hi_height < -lam:
                i = hi_knot + 1
                out[last + 1:hi_knot + 1] = hi
                last = hi_knot
                hi = y[i]
                lo = hi - 2.0 * lam
                lo_height = lam
                hi_height = -lam
                lo_knot = i
                hi_knot = i
                i += 1
                continue
            if hi_height > lam:
                hi += (lam - hi_height) / (i - last)
                hi_height = lam
                hi_knot = i
            if lo_height <= -lam:
                lo += (-lam - lo_height) / (i - last)
                lo_height = -lam
                lo_knot = i
            i += 1
        # last sample: both strings must end at zero height
        lo_height += lo - y[i]
        if lo_height > 0.0:
            i = lo_knot + 1
            out[last + 1:lo_knot + 1] = lo
            last = lo_knot
            lo = y[i]
            hi = lo + 2.0 * lam
            lo_height = -lam
            hi_height = -lam
            lo_knot = i
            hi_knot = i
            continue
        hi_height += hi - y[i]
        if hi_height < 0.0:
            i = hi_knot + 1
            out[last + 1:hi_knot + 1] = hi
            last = hi_knot
            hi = y[i]
            lo = hi - 2.0 * lam
            lo_height = lam
            hi_height = lam
            lo_knot = i
            hi_knot = i
            continue
        if lo_height <= 0.0:
            lo -= lo_height / (i - last)
        i += 1
    out[last + 1:] = lo
    return out


def _tv1d_rows(Y, lam, out):
    for i in prange(Y.shape[0]):
        _tv1d_scan(Y[i], lam, out[i])
    return out


if NUMBA_AVAILABLE:
    _tv1d_scan = nb.njit(_tv1d_scan)
    prange = nb.prange
    _tv1d_rows = nb.njit(parallel=True)(_tv1d_rows)
else:
    prange = range

# numba's default workqueue layer rejects concurrent parallel launches
_PARALLEL_LOCK = threading.Lock()


def tv1d(y, kappa):
    """argmin_z kappa * sum |z[k+1] - z[k]| + 0.5 ||z - y||^2."""
    _check_kappa(kappa)
    y = np.asarray(y, dtype=np.float64).ravel()
    if y.size == 0:
        raise EmptySignal('tv1d needs at least one sample.')
    if kappa == 0 or y.size == 1:
        return y.copy()
    return _tv1d_scan(np.ascontiguousarray(y), float(kappa), np.empty_like(y))


def tv1d_rows(Y, kappa):
    """tv1d applied independently to every row of a 2-D array."""
    _check_kappa(kappa)
    Y = np.ascontiguousarray(Y, dtype=np.float64)
    if kappa == 0 or Y.shape[1] <= 1 or Y.shape[0] == 0:
        return Y.copy()
    with _PARALLEL_LOCK:
        return _tv1d_rows(Y, float(kappa), np.empty_like(Y))


def _check_grid(M, grid):
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[1] != grid.n:
        raise DimensionMismatch(
            f'Expected {grid.n} pixel columns, got shape {M.shape}.'
        )
    return M


def prox_vertical_tv(M, kappa, grid):
    """Prox of kappa ||H^_v(.)||_1: 1D TV along each pixel row of the image.

    One length-n_c problem per (band, pixel row), m * n_r in total.
    """
    M = _check_grid(M, grid)
    _check_kappa(kappa)
    m = M.shape[0]
    # (m, n_c, n_r) -> rows indexed by (band, pixel row), samples by column
    rows = M.reshape(m, grid.n_c, grid.n_r).transpose(0, 2, 1)
    rows = rows.reshape(m * grid.n_r, grid.n_c)
    Z = tv1d_rows(rows, kappa)
    return Z.reshape(m, grid.n_r, grid.n_c).transpose(0, 2, 1).reshape(m, -1)


def prox_horizontal_tv(M, kappa, grid):
    """Prox of kappa ||H^_h(.)||_1: 1D TV down each image column.

    One length-n_r problem per (band, image column), m * n_c in total.
    """
    M = _check_grid(M, grid)
    _check_kappa(kappa)
    m = M.shape[0]
    Z = tv1d_rows(M.reshape(m * grid.n_c, grid.n_r), kappa)
    return Z.reshape(m, -1)


def prox_p(V, spec: ProxSpec, grid):
    """Prox of sigma * p at V, composed as shrink o project o vertical TV."""
    Z = prox_vertical_tv(V, spec.sigma * spec.lam_tv, grid)
    Z = project_nonnegative(Z)
    if spec.rho is Rho.L21:
        return group_shrink_rows(Z, spec.sigma * spec.lam)
    return soft_threshold(Z, spec.sigma * spec.lam)


def prox_conjugate(prox_of_sigma_f, v, sigma):
    """Prox of f*/sigma at v via the Moreau identity."""
    v = np.asarray(v, dtype=np.float64)
    return v - prox_of_sigma_f(sigma * v) / sigma
