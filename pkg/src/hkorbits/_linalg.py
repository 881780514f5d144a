from __future__ import annotations

import numpy as np

from .errors import NumericalToleranceError

RANK_RTOL = 1e-9
RANK_MIN_GAP = 1e3


def _decide_rank(s: np.ndarray, rtol: float, min_gap: float) -> int:
    if s.size == 0 or s[0] == 0.0:
        return 0
    rank = int(np.count_nonzero(s > rtol * s[0]))
    if rank < s.size:
        below = s[rank]
        gap = np.inf if below == 0.0 else s[rank - 1] / below
        if gap < min_gap:
            raise NumericalToleranceError(
                f"ambiguous numerical rank {rank}: singular value gap {gap:.3g} < {min_gap:.3g}",
                singular_values=s,
                gap=float(gap),
            )
    return rank


def numerical_rank(m: np.ndarray, rtol: float = RANK_RTOL, min_gap: float = RANK_MIN_GAP) -> int:
    """Rank of ``m``; singular values below ``rtol * s_max`` count as zero.

    Raises NumericalToleranceError when the retained/discarded ratio is below
    ``min_gap``.
    """
    s = np.linalg.svd(np.atleast_2d(m), compute_uv=False)
    return _decide_rank(s, rtol, min_gap)


def column_space(m: np.ndarray, rtol: float = RANK_RTOL, min_gap: float = RANK_MIN_GAP):
    """Return ``(rank, u, s, vh)`` of the SVD of ``m`` truncated to its numerical rank."""
    u, s, vh = np.linalg.svd(m)
    r = _decide_rank(s, rtol, min_gap)
    return r, u[:, :r], s[:r], vh[:r]


def realify(z: np.ndarray) -> np.ndarray:
    """Stack real and imaginary parts along the last axis."""
    return np.concatenate([z.real, z.imag], axis=-1)
