"""Regularized spectral core.

The decomposition rests on the symmetric-definite generalized eigenproblem
``G v = gamma (I + alpha R) v`` where G is the trajectory Gram matrix and
R = D^T D penalizes rough eigenvectors through a finite-difference stencil D.
Solved by Cholesky reduction to a standard symmetric problem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .embedding import TrajectoryMatrix


class EigenSolverError(RuntimeError):
    """Numerical failure inside the generalized eigensolver."""


@dataclass(frozen=True, eq=False)
class DifferenceOperator:
    """First- or second-order finite-difference stencil matrix.

    Order 1 rows are [-1, 1] shifts, order 2 rows are [1, -2, 1]; every row
    sums to zero, so constants (and affine vectors, for order 2) are
    annihilated.
    """

    order: int
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.float64)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]


@dataclass(frozen=True, eq=False)
class GramMatrix:
    """Symmetric positive semi-definite K x K Gram matrix X^T X."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("Gram matrix must be square")
        scale = float(np.abs(m).max()) or 1.0
        if np.abs(m - m.T).max() > 1e-10 * scale:
            raise ValueError("Gram matrix must be symmetric")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class AugmentedMatrix:
    """M = I + alpha * R: the symmetric positive-definite right-hand matrix.

    R is positive semi-definite, so the smallest eigenvalue of M is >= 1
    for every alpha >= 0.
    """

    matrix: np.ndarray
    alpha: float

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.float64)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class EigenPair:
    """One generalized eigenpair plus its derived quantities.

    gamma        generalized eigenvalue
    vector       eigenvector, rescaled to unit Euclidean norm
    mu           roughness quadratic v^T R v (clamped at 0)
    energy       v^T G v; equals gamma * (1 + alpha * mu)
    shrink_weight 1 / (1 + alpha * mu), the optional reconstruction gain
    negligible   True when gamma falls below the numerical floor
    """

    gamma: float
    vector: np.ndarray
    mu: float
    energy: float
    shrink_weight: float
    negligible: bool

    def __post_init__(self):
        v = np.array(self.vector, dtype=np.float64)
        v.setflags(write=False)
        object.__setattr__(self, "vector", v)


@dataclass(frozen=True, eq=False)
class EigenBasis:
    """All K generalized eigenpairs, sorted by descending eigenvalue."""

    pairs: tuple[EigenPair, ...]
    alpha: float

    def __len__(self) -> int:
        return len(self.pairs)

    @property
    def gammas(self) -> np.ndarray:
        return np.array([p.gamma for p in self.pairs])

    @property
    def vectors(self) -> np.ndarray:
        """Eigenvectors as columns, in sorted order."""
        return np.column_stack([p.vector for p in self.pairs])


def gram(X: TrajectoryMatrix) -> GramMatrix:
    """X^T X, symmetrized as (G + G^T) / 2 to kill rounding asymmetry."""
    g = X.data.T @ X.data
    return GramMatrix((g + g.T) / 2.0)


def diff_operator(order: int, K: int) -> DifferenceOperator:
    """The (K - order) x K finite-difference stencil matrix."""
    if order not in (1, 2):
        raise ValueError("difference order must be 1 or 2")
    if K < order + 1:
        raise ValueError(f"need K >= {order + 1} for order {order}, got K={K}")
    rows = K - order
    D = np.zeros((rows, K))
    if order == 1:
        idx = np.arange(rows)
        D[idx, idx] = -1.0
        D[idx, idx + 1] = 1.0
    else:
        idx = np.arange(rows)
        D[idx, idx] = 1.0
        D[idx, idx + 1] = -2.0
        D[idx, idx + 2] = 1.0
    return DifferenceOperator(order=order, matrix=D)


def smoothing_matrix(D: DifferenceOperator) -> np.ndarray:
    """R = D^T D, the positive semi-definite roughness quadratic form."""
    return D.matrix.T @ D.matrix


def augmented(R: np.ndarray, alpha: float) -> AugmentedMatrix:
    """M = I + alpha * R.  alpha = 0 yields the identity exactly."""
    if not math.isfinite(alpha) or alpha < 0:
        raise ValueError("alpha must be finite and >= 0")
    R = np.asarray(R, dtype=np.float64)
    if alpha == 0.0:
        M = np.eye(R.shape[0])
    else:
        M = np.eye(R.shape[0]) + alpha * R
    return AugmentedMatrix(matrix=M, alpha=alpha)


EIGEN_FLOOR_DEFAULT = 1e-12


def solve_generalized(
    G: GramMatrix,
    M: AugmentedMatrix,
    R: np.ndarray,
    eigen_floor: float = EIGEN_FLOOR_DEFAULT,
) -> EigenBasis:
    """Solve ``G v = gamma M v`` for the full eigenbasis.

    M = L L^T is Cholesky-factored, the standard symmetric problem
    ``L^-1 G L^-T y = gamma y`` is solved, and the eigenvectors are mapped
    back through v = L^-T y.  Each vector is rescaled to unit Euclidean norm
    (reconstruction assumes v^T v = 1); pairs come back sorted by descending
    gamma, ties kept in solver order.

    Eigenvalues below ``eigen_floor * max(gamma)`` are flagged negligible;
    downstream they route to the residual instead of seeding modes.
    """
    K = G.dim
    if M.dim != K or np.asarray(R).shape != (K, K):
        raise ValueError("G, M and R must share one dimension")
    try:
        L = sla.cholesky(M.matrix, lower=True)
    except sla.LinAlgError as exc:
        raise EigenSolverError(f"augmented matrix is not positive definite: {exc}") from exc
    half = sla.solve_triangular(L, G.matrix, lower=True)
    A = sla.solve_triangular(L, half.T, lower=True).T
    A = (A + A.T) / 2.0
    try:
        w, Y = np.linalg.eigh(A)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(f"symmetric eigensolver failed to converge: {exc}") from exc
    V = sla.solve_triangular(L.T, Y, lower=False)

    order = np.argsort(-w, kind="stable")
    w = w[order]
    V = V[:, order] / np.linalg.norm(V[:, order], axis=0, keepdims=True)

    gmax = float(w[0])
    floor = eigen_floor * gmax if gmax > 0 else math.inf
    Rm = np.asarray(R, dtype=np.float64)
    mus = np.maximum(np.einsum("ki,ki->i", V, Rm @ V), 0.0)  # R is PSD
    energies = np.einsum("ki,ki->i", V, G.matrix @ V)
    pairs = []
    for i in range(K):
        mu = float(mus[i])
        pairs.append(
            EigenPair(
                gamma=float(w[i]),
                vector=V[:, i],
                mu=mu,
                energy=float(energies[i]),
                shrink_weight=1.0 / (1.0 + M.alpha * mu),
                negligible=bool(w[i] < floor),
            )
        )
    return EigenBasis(pairs=tuple(pairs), alpha=M.alpha)
