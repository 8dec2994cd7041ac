"""
Synthetic unmixing problems: libraries, abundance fields and noise.

Every generator is a deterministic function of its seed.
"""
import enum
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import fft, ndimage

from core.datamodel import AbundanceMap, HyperCube, SpectralLibrary
from core.exceptions import (
    DimensionMismatch, OutOfRange, TooManyEndmembers, UnreachableCoherence,
    ZeroSignal,
)
from evaluation.metrics import mutual_coherence

logger = logging.getLogger(__name__)

BISECTION_STEPS = 50
SOFTMAX_TEMPERATURE = 3.0


def _bumps(rng, t, count):
    """Sum of `count` positive Gaussian bumps sampled on t."""
    centers = rng.uniform(0.0, 1.0, count)
    widths = rng.uniform(0.05, 0.3, count)
    heights = rng.uniform(0.2, 1.0, count)
    return (heights[:, None]
            * np.exp(-0.5 * ((t[None, :] - centers[:, None])
                             / widths[:, None]) ** 2)).sum(axis=0)


def gen_library(L, m, coherence_target, seed):
    """Smooth nonnegative library with mutual coherence >= target.

    Column j is (1 - w) * base + w * perturbation_j; w is the largest
    mixing weight (found by bisection) that still meets the target.
    """
    if L < 1 or m < 1:
        raise DimensionMismatch(f'Library needs L, m >= 1, got {L}x{m}.')
    if not 0 <= coherence_target < 1:
        raise UnreachableCoherence(
            f'Coherence target must lie in [0, 1), got {coherence_target}.'
        )
    rng = np.random.default_rng(seed)
    t = np.linspace(0.0, 1.0, L)
    base = 0.1 + _bumps(rng, t, 3)
    pert = np.stack([0.05 + _bumps(rng, t, 4) for _ in range(m)], axis=1)

    def library(w):
        return SpectralLibrary((1.0 - w) * base[:, None] + w * pert)

    def coherence(w):
        return mutual_coherence(library(w))

    if m == 1 or coherence(1.0) >= coherence_target:
        A = library(1.0)
    else:
        lo, hi = 0.0, 1.0
        for _ in range(BISECTION_STEPS):
            mid = 0.5 * (lo + hi)
            if coherence(mid) >= coherence_target:
                lo = mid
            else:
                hi = mid
        A = library(lo)
    logger.info('Generated %dx%d library (seed %s), coherence %.6f.',
                L, m, seed, mutual_coherence(A))
    return A


def _check_q(q, A):
    if q < 1:
        raise OutOfRange(f'Need at least one endmember, got q={q}.')
    if q > A.signatures:
        raise TooManyEndmembers(
            f'q={q} exceeds the {A.signatures} library signatures.'
        )


def _to_abundances(S, grid, A, active):
    """Stack q n_r x n_c fields into the rows `active` of an m x n map."""
    S = S / S.sum(axis=0, keepdims=True)
    X = np.zeros((A.signatures, grid.n))
    for k, j in enumerate(active):
        X[j] = grid.from_image(S[k])
    return AbundanceMap(X, grid)


def gen_abundances_dc1(grid, A, q, seed):
    """Piecewise-constant field: mixed background plus square patches.

    Each active endmember gets one pure patch and one patch mixing it
    50/50 with the next endmember. Patches that do not fit the grid are
    skipped.
    """
    _check_q(q, A)
    rng = np.random.default_rng(seed)
    active = np.sort(rng.choice(A.signatures, size=q, replace=False))
    bg = rng.dirichlet(np.ones(q), size=grid.n)
    S = np.stack([grid.to_image(bg[:, k]) for k in range(q)])

    ps = max(1, min(grid.n_r // (2 * q + 1), grid.n_c // 5))
    for k in range(q):
        r0 = (2 * k + 1) * ps
        if r0 + ps > grid.n_r:
            continue
        pure = np.zeros(q)
        pure[k] = 1.0
        mixed = np.zeros(q)
        mixed[k] += 0.5
        mixed[(k + 1) % q] += 0.5
        for c0, mix in ((ps, pure), (3 * ps, mixed)):
            if c0 + ps > grid.n_c:
                continue
            S[:, r0:r0 + ps, c0:c0 + ps] = mix[:, None, None]
    X = _to_abundances(S, grid, A, active)
    logger.info('DC1 abundances on %dx%d grid (seed %s), endmembers %s.',
                grid.n_r, grid.n_c, seed, active.tolist())
    return X, active


def gen_abundances_smooth(grid, A, q, correlation_length, seed):
    """Spatially smooth abundances from low-pass filtered Gaussian noise.

    Fields are blurred with a periodic Gaussian of width
    `correlation_length`, standardized and mapped onto the simplex with
    a softmax across endmembers.
    """
    _check_q(q, A)
    if correlation_length < 0:
        raise OutOfRange('correlation_length must be >= 0.')
    rng = np.random.default_rng(seed)
    active = np.sort(rng.choice(A.signatures, size=q, replace=False))
    fields = rng.standard_normal((q, grid.n_r, grid.n_c))
    if correlation_length > 0:
        fields = ndimage.gaussian_filter(
            fields, sigma=(0, correlation_length, correlation_length),
            mode='wrap',
        )
    fields = fields - fields.mean(axis=(1, 2), keepdims=True)
    std = fields.std(axis=(1, 2), keepdims=True)
    fields = np.divide(fields, std, out=np.zeros_like(fields),
                       where=std > 0)
    z = SOFTMAX_TEMPERATURE * fields
    S = np.exp(z - z.max(axis=0, keepdims=True))
    return _to_abundances(S, grid, A, active)


class NoiseKind(enum.Enum):
    WHITE = 'white'
    CORRELATED = 'correlated'


@dataclass(frozen=True)
class NoiseSpec:
    """snr_db=inf means no noise; cutoff=None means 5*pi/L."""
    kind: NoiseKind
    snr_db: float
    cutoff: Optional[float] = None
    seed: int = 0

    def __post_init__(self):
        if math.isnan(self.snr_db) or self.snr_db == -math.inf:
            raise OutOfRange(f'Invalid SNR {self.snr_db}.')
        if self.cutoff is not None and not 0 < self.cutoff <= math.pi:
            raise OutOfRange(
                f'Cutoff must lie in (0, pi], got {self.cutoff}.'
            )


def _lowpass_bands(N, cutoff):
    L = N.shape[0]
    F = fft.rfft(N, axis=0)
    omega = 2.0 * np.pi * np.arange(F.shape[0]) / L
    F[omega > cutoff] = 0.0
    return fft.irfft(F, n=L, axis=0)


def add_noise(clean, spec):
    """Gaussian noise rescaled to hit spec.snr_db exactly."""
    if spec.snr_db == math.inf:
        return clean
    Y = clean.Y
    signal = float(np.sum(Y ** 2))
    if signal == 0:
        raise ZeroSignal('Cannot set an SNR on an all-zero cube.')
    rng = np.random.default_rng(spec.seed)
    N = rng.standard_normal(Y.shape)
    if spec.kind is NoiseKind.CORRELATED:
        cutoff = spec.cutoff or 5.0 * np.pi / Y.shape[0]
        N = _lowpass_bands(N, cutoff)
    N *= np.sqrt(signal / (10.0 ** (spec.snr_db / 10.0) * np.sum(N ** 2)))
    logger.info('Added %s noise at %.2f dB (seed %s).', spec.kind.value,
                10.0 * np.log10(signal / np.sum(N ** 2)), spec.seed)
    return HyperCube(Y + N, clean.grid)
