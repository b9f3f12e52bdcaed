"""Small dense complex linear algebra.

Everything here works on plain ``numpy`` arrays. Matrices in this project are
tiny (at most 32x32), so the Hermitian eigensolver is a cyclic Jacobi sweep
rather than a LAPACK call.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

HERMITIAN_TOL = 1e-12
JACOBI_TOL = 1e-12
RANK_TOL = 1e-10


class LinalgError(ValueError):
    """Base class for input errors raised by this module."""


class DimensionError(LinalgError):
    pass


class NotHermitianError(LinalgError):
    pass


class RankDeficientError(LinalgError):
    pass


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues sorted in descending order with aligned eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.conj().T


def _as_square(r) -> np.ndarray:
    r = np.asarray(r, dtype=complex)
    if r.ndim != 2 or r.shape[0] != r.shape[1] or r.shape[0] < 1:
        raise DimensionError(f"expected a non-empty square matrix, got shape {r.shape}")
    return r


def is_hermitian(r, tol: float = HERMITIAN_TOL) -> bool:
    r = np.asarray(r)
    scale = np.max(np.abs(r)) if r.size else 0.0
    return bool(np.max(np.abs(r - r.conj().T), initial=0.0) <= tol * max(scale, np.finfo(float).tiny))


def _jacobi_rotation(app: float, aqq: float, apq: complex):
    """Return (c, s) of the unitary [[c, s], [-conj(s), c]] that zeroes ``apq``."""
    r = abs(apq)
    phase = apq / r
    tau = (aqq - app) / (2.0 * r)
    t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
    c = 1.0 / np.sqrt(1.0 + t * t)
    return c, t * c * phase


def hermitian_eigendecompose(r, max_sweeps: int = 100) -> EigenDecomposition:
    """Cyclic Jacobi eigendecomposition of a Hermitian matrix.

    Sweeps over all (p, q) pairs until the off-diagonal Frobenius norm drops
    below ``1e-12 * ||R||_F``. Eigenvalues come back sorted in descending
    order (stable for ties).

    Raises
    ------
    DimensionError
        If ``r`` is not square.
    NotHermitianError
        If ``max|R - R^H| > 1e-12 * max|R|``.
    """
    a = _as_square(r)
    if not is_hermitian(a):
        raise NotHermitianError("matrix is not Hermitian within tolerance")
    n = a.shape[0]
    a = 0.5 * (a + a.conj().T)
    v = np.eye(n, dtype=complex)
    norm = np.linalg.norm(a)
    threshold = JACOBI_TOL * norm

    for _ in range(max_sweeps):
        if np.linalg.norm(a - np.diag(np.diag(a))) <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300 or abs(apq) < 1e-18 * norm:
                    continue
                c, s = _jacobi_rotation(a[p, p].real, a[q, q].real, apq)
                # columns: A <- A J, rows: A <- J^H A, with J = [[c, s], [-s*, c]]
                ap = a[:, p].copy()
                aq = a[:, q]
                a[:, p] = c * ap - np.conj(s) * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :]
                a[p, :] = c * ap - s * aq
                a[q, :] = np.conj(s) * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q]
                v[:, p] = c * vp - np.conj(s) * vq
                v[:, q] = s * vp + c * vq
    else:
        raise LinalgError("Jacobi iteration did not converge")

    w = np.diag(a).real.copy()
    order = np.argsort(-w, kind="stable")
    return EigenDecomposition(eigenvalues=w[order], eigenvectors=v[:, order])


def least_squares_solve(a, y) -> np.ndarray:
    """Solve ``min ||A x - y||`` through a Cholesky factorization of ``A^H A``.

    ``y`` may be a vector or a matrix of right-hand sides (one per column).
    A rank guard rejects ``A`` whose Gram matrix has an eigenvalue ratio
    below ``1e-10``.
    """
    a = np.asarray(a, dtype=complex)
    y = np.asarray(y, dtype=complex)
    if a.ndim != 2:
        raise DimensionError("A must be a matrix")
    m, n = a.shape
    if m < n:
        raise DimensionError(f"A must be tall, got {m}x{n}")
    if y.shape[0] != m:
        raise DimensionError(f"y has {y.shape[0]} rows, A has {m}")
    gram = a.conj().T @ a
    gram = 0.5 * (gram + gram.conj().T)
    lam = hermitian_eigendecompose(gram).eigenvalues
    if lam[-1] <= RANK_TOL * lam[0]:
        raise RankDeficientError(
            f"A^H A is numerically singular (eigenvalue ratio {lam[-1] / lam[0]:.3g})"
        )
    factor = cho_factor(gram, lower=True)
    return cho_solve(factor, a.conj().T @ y)


def hadamard(x, y) -> np.ndarray:
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape:
        raise DimensionError(f"shape mismatch {x.shape} vs {y.shape}")
    return x * y
