"""
Quality measures for abundance estimates and spectral libraries.
"""
from dataclasses import dataclass

import numpy as np

from core.exceptions import DimensionMismatch, ZeroColumn, ZeroReference

SUCCESS_THRESHOLD = 0.316


@dataclass(frozen=True)
class EvalResult:
    sre_db: float
    p_s: float
    per_pixel_relative_error: np.ndarray
    threshold: float = SUCCESS_THRESHOLD


def _pair(X_true, X_hat):
    T, H = X_true.X, X_hat.X
    if T.shape != H.shape:
        raise DimensionMismatch(
            f'Truth has shape {T.shape}, estimate has {H.shape}.'
        )
    return T, H


def sre_db(X_true, X_hat):
    """Signal-to-reconstruction error in dB over all pixels."""
    T, H = _pair(X_true, X_hat)
    signal = float(np.sum(T ** 2))
    if signal == 0:
        raise ZeroReference('True abundances are all zero.')
    error = float(np.sum((T - H) ** 2))
    if error == 0:
        return float('inf')
    return 10.0 * np.log10(signal / error)


def per_pixel_relative_error(X_true, X_hat):
    """||x_hat_i - x_i||^2 / ||x_i||^2; zero-truth pixels give 0 or inf."""
    T, H = _pair(X_true, X_hat)
    num = np.sum((H - T) ** 2, axis=0)
    den = np.sum(T ** 2, axis=0)
    out = np.full(T.shape[1], np.inf)
    nz = den > 0
    out[nz] = num[nz] / den[nz]
    out[~nz & (num == 0)] = 0.0
    return out


def success_probability(X_true, X_hat, threshold=SUCCESS_THRESHOLD):
    rel = per_pixel_relative_error(X_true, X_hat)
    return float(np.mean(rel <= threshold))


def evaluate(X_true, X_hat, threshold=SUCCESS_THRESHOLD):
    rel = per_pixel_relative_error(X_true, X_hat)
    return EvalResult(
        sre_db=sre_db(X_true, X_hat),
        p_s=float(np.mean(rel <= threshold)),
        per_pixel_relative_error=rel,
        threshold=threshold,
    )


def mutual_coherence(A):
    """Largest absolute cosine between two distinct library columns."""
    A = A.A
    norms = np.linalg.norm(A, axis=0)
    if np.any(norms == 0):
        raise ZeroColumn(
            f'Library column {int(np.argmin(norms))} is all zeros.'
        )
    if A.shape[1] == 1:
        return 0.0
    An = A / norms
    G = np.abs(An.T @ An)
    np.fill_diagonal(G, 0.0)
    return float(min(G.max(), 1.0))
