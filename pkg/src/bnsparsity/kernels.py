"""Dense matrix primitives: vec, Kronecker product, commutation and
diagonalization matrices, the diagonal selector, the scaled Frobenius norm,
and a deterministic symmetric eigensolver.

Matrices are plain 2-D float64 numpy arrays. All vectorized (p^2-dimensional)
objects in this package use column-major stacking, so that
``vec(A @ B @ C) == kron(C.T, A) @ vec(B)`` holds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, InputError

# K, D and J are materialized densely; p^2 x p^2 storage is capped here.
MAX_DIMENSION = 128

_EIGEN_REL_TOL = 1e-12
_SWEEPS_PER_DIMENSION = 64


def vec(a: np.ndarray) -> np.ndarray:
    """Stack the columns of ``a`` into one vector (column-major)."""
    return np.asarray(a, dtype=float).reshape(-1, order="F")


def unvec(v: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """Inverse of :func:`vec` for a known shape."""
    return np.asarray(v, dtype=float).reshape((rows, cols), order="F")


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product; block (i, j) equals ``a[i, j] * b``."""
    return np.kron(np.asarray(a, dtype=float), np.asarray(b, dtype=float))


def _check_dimension(p: int) -> int:
    p = int(p)
    if p < 1:
        raise InputError(f"dimension must be >= 1, got {p}")
    if p > MAX_DIMENSION:
        raise InputError(
            f"dimension {p} exceeds the dense-construction cap {MAX_DIMENSION}"
        )
    return p


def commutation_indices(p: int) -> np.ndarray:
    """Row permutation ``idx`` with ``commutation_matrix(p) @ v == v[idx]``.

    Lets callers apply K to large matrices without a p^2 x p^2 product:
    ``K @ M == M[idx]`` and ``M @ K == M[:, idx]``.
    """
    p = _check_dimension(p)
    # position r + p*c of vec(A.T) holds A[c, r] = vec(A)[c + p*r]
    cols, rows = np.divmod(np.arange(p * p), p)
    return cols + p * rows


def commutation_matrix(p: int) -> np.ndarray:
    """Permutation matrix K with ``K @ vec(A) == vec(A.T)`` for p x p A."""
    idx = commutation_indices(p)
    k = np.zeros((p * p, p * p))
    k[np.arange(p * p), idx] = 1.0
    return k


def diagonal_indices(p: int) -> np.ndarray:
    """Positions of the diagonal entries of a p x p matrix inside vec."""
    p = _check_dimension(p)
    return np.arange(p) * (p + 1)


def diagonalization_matrix(p: int) -> np.ndarray:
    """Projector D with ``D @ vec(A) == vec(dg(A))`` (off-diagonal zeroed)."""
    d = np.zeros((p * p, p * p))
    idx = diagonal_indices(p)
    d[idx, idx] = 1.0
    return d


def selector_matrix(p: int) -> np.ndarray:
    """p^2 x p matrix whose i-th column is ``e_i (x) e_i``."""
    j = np.zeros((p * p, p))
    j[diagonal_indices(p), np.arange(p)] = 1.0
    return j


def scaled_frobenius_sq(a: np.ndarray) -> float:
    """tr(A.T A) / p for square A."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputError(f"scaled Frobenius norm needs a square matrix, got {a.shape}")
    return float(np.sum(a * a) / a.shape[0])


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues (descending) and orthonormal eigenvectors of a symmetric matrix.

    ``vectors[:, i]`` is the unit eigenvector for ``values[i]``; the sign is
    fixed so the largest-magnitude entry of each eigenvector is positive.
    """

    values: np.ndarray
    vectors: np.ndarray

    @property
    def p(self) -> int:
        return self.values.size


def _off_diagonal_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.linalg.norm(off))


def symmetric_eigen(a: np.ndarray) -> EigenSystem:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Converges when the off-diagonal Frobenius norm falls below
    ``1e-12 * ||A||_F``; raises :class:`ConvergenceError` naming the sweep
    budget (``64 * p`` sweeps) otherwise. Output is deterministic for a fixed
    input.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputError(f"eigensolver needs a square matrix, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InputError("eigensolver input has non-finite entries")
    p = a.shape[0]
    amax = float(np.abs(a).max()) if a.size else 0.0
    if amax > 0 and float(np.abs(a - a.T).max()) > 1e-10 * amax:
        raise InputError("matrix is not symmetric within 1e-10 relative tolerance")

    work = 0.5 * (a + a.T)
    vectors = np.eye(p)
    fro = float(np.linalg.norm(work))
    budget = _SWEEPS_PER_DIMENSION * p

    if p > 1 and fro > 0.0:
        for _ in range(budget):
            if _off_diagonal_norm(work) <= _EIGEN_REL_TOL * fro:
                break
            for i in range(p - 1):
                for j in range(i + 1, p):
                    apq = work[i, j]
                    if apq == 0.0:
                        continue
                    diff = work[j, j] - work[i, i]
                    if abs(apq) < abs(diff) * 5e-151:
                        # rotation angle below machine resolution; zeroing
                        # the pivot is exact to working precision
                        work[i, j] = 0.0
                        work[j, i] = 0.0
                        continue
                    theta = diff / (2.0 * apq)
                    t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                    c = 1.0 / np.sqrt(t * t + 1.0)
                    s = t * c
                    gi = work[:, i].copy()
                    gj = work[:, j].copy()
                    work[:, i] = c * gi - s * gj
                    work[:, j] = s * gi + c * gj
                    gi = work[i, :].copy()
                    gj = work[j, :].copy()
                    work[i, :] = c * gi - s * gj
                    work[j, :] = s * gi + c * gj
                    work[i, j] = 0.0
                    work[j, i] = 0.0
                    gi = vectors[:, i].copy()
                    gj = vectors[:, j].copy()
                    vectors[:, i] = c * gi - s * gj
                    vectors[:, j] = s * gi + c * gj
        else:
            if _off_diagonal_norm(work) > _EIGEN_REL_TOL * fro:
                raise ConvergenceError(
                    f"Jacobi eigensolver did not converge within {budget} sweeps"
                )

    values = np.diag(work).copy()
    order = np.argsort(-values, kind="stable")
    values = values[order]
    vectors = vectors[:, order]
    for k in range(p):
        col = vectors[:, k]
        if col[np.argmax(np.abs(col))] < 0.0:
            vectors[:, k] = -col
    return EigenSystem(values=values, vectors=vectors)
