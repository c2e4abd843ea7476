"""Phase-space embedding: window-length selection, Hankel trajectory matrices
and their diagonal-averaging inverse."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .signals import TimeSeries, dominant_frequency, periodogram


class SignalTooShortError(ValueError):
    """Signal too short to build a usable embedding."""


@dataclass(frozen=True, eq=False)
class TrajectoryMatrix:
    """L x K Hankel embedding of a series: row i is ``x[i : i + K]``.

    L = N - K + 1 windows of length K at unit delay, so every anti-diagonal
    is constant.
    """

    data: np.ndarray
    n_samples: int
    embedding_dim: int
    delay: int = 1

    def __post_init__(self):
        d = np.array(self.data, dtype=np.float64)
        d.setflags(write=False)
        object.__setattr__(self, "data", d)
        L, K = d.shape
        if K != self.embedding_dim or L != self.n_samples - K + 1:
            raise ValueError("shape inconsistent with n_samples/embedding_dim")
        if L < 2 or K < 2:
            raise ValueError("trajectory matrix needs L >= 2 and K >= 2")
        if self.delay != 1:
            raise ValueError("only delay 1 is supported")

    @property
    def n_windows(self) -> int:
        return self.data.shape[0]


MIN_EMBEDDING_DIM = 4


def embedding_dim_from_peak(f_max: float | None, sample_rate: float, n: int) -> int:
    """Window length from the dominant frequency: about 1.2 sample periods.

    With no usable peak (absent, or below 1e-3 of the sample rate) the
    fallback is N/3.  The result is clamped to [4, floor(N/3)].
    """
    upper = n // 3
    if f_max is None or f_max / sample_rate < 1e-3:
        k = upper
    else:
        k = int(math.floor(1.2 * sample_rate / f_max + 0.5))
    return min(max(k, MIN_EMBEDDING_DIM), upper)


def select_embedding_dimension(x: TimeSeries) -> int:
    """Pick the embedding dimension for a series from its spectral peak."""
    n = len(x)
    if n < 12:
        raise SignalTooShortError(
            f"need at least 12 samples to choose an embedding dimension, got {n}"
        )
    f_max = dominant_frequency(periodogram(x))
    return embedding_dim_from_peak(f_max, x.sample_rate, n)


def build_trajectory_matrix(x: TimeSeries, K: int) -> TrajectoryMatrix:
    """Stack the N - K + 1 length-K sliding windows of the signal as rows."""
    n = len(x)
    if not 2 <= K <= n - 1:
        raise ValueError(f"embedding dimension must satisfy 2 <= K <= N-1, got K={K}, N={n}")
    data = sliding_window_view(x.samples, K)
    return TrajectoryMatrix(data=data, n_samples=n, embedding_dim=K)


def diagonal_average(m: np.ndarray, n_samples: int) -> np.ndarray:
    """Average the anti-diagonals of an L x K matrix back into a series.

    Anti-diagonal k (i + j = k) has min(k+1, L, K, N-k) entries; its mean
    becomes output sample k.  The map is linear and inverts the Hankel
    embedding exactly.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    L, K = m.shape
    if L + K - 1 != n_samples:
        raise ValueError(f"shape {L}x{K} does not flatten to {n_samples} samples")
    idx = (np.arange(L)[:, None] + np.arange(K)[None, :]).ravel()
    sums = np.zeros(n_samples)
    np.add.at(sums, idx, m.ravel())
    counts = np.bincount(idx, minlength=n_samples)
    return sums / counts
