"""Small dense Hermitian matrix helpers.

Matrices are numpy arrays with ``h[i, j] = h_{i jbar}``.  A vector ``X``
has squared length ``sum_ij h[i, j] X[i] conj(X[j])``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HERMITIAN_TOL = 1e-10
PIVOT_TOL = 1e-12


class SingularMetricError(np.linalg.LinAlgError):
    """Matrix is not (numerically) positive definite."""


@dataclass(frozen=True)
class PDReport:
    hermitian_defect: float
    min_eigenvalue_sign: int  # +1, 0 or -1
    pivots: tuple[float, ...]

    @property
    def positive_definite(self) -> bool:
        return self.min_eigenvalue_sign > 0


def hermitian_defect(h: np.ndarray) -> float:
    h = np.asarray(h, dtype=complex)
    return float(np.max(np.abs(h - h.conj().T))) if h.size else 0.0


def pivoted_cholesky_pivots(h: np.ndarray, tol: float = PIVOT_TOL) -> tuple[list[float], int]:
    """Diagonal-pivoted Cholesky of the Hermitian part of ``h``.

    Returns the pivots in elimination order and the sign of the smallest
    eigenvalue as seen by the factorisation: -1 if a pivot is clearly
    negative, 0 if the remaining Schur complement is numerically zero.
    """
    a = np.array(h, dtype=complex)
    a = 0.5 * (a + a.conj().T)
    n = a.shape[0]
    scale = max(1.0, float(np.max(np.abs(a)))) if n else 1.0
    pivots: list[float] = []
    for k in range(n):
        diag = a.diagonal().real[k:]
        j = k + int(np.argmax(diag))
        if j != k:
            a[[k, j]] = a[[j, k]]
            a[:, [k, j]] = a[:, [j, k]]
        piv = float(a[k, k].real)
        pivots.append(piv)
        if piv <= tol * scale:
            # largest remaining diagonal is not positive: either a zero
            # block (semidefinite) or an indefinite remainder
            rest = a[k:, k:]
            if np.min(np.linalg.eigvalsh(rest)) < -tol * scale:
                return pivots, -1
            return pivots, 0
        col = a[k + 1 :, k] / piv
        a[k + 1 :, k + 1 :] -= np.outer(col, a[k, k + 1 :])
    return pivots, 1


def check_hermitian_pd(h: np.ndarray) -> PDReport:
    pivots, sign = pivoted_cholesky_pivots(h)
    return PDReport(hermitian_defect(h), sign, tuple(pivots))


def _cholesky(h: np.ndarray) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    if hermitian_defect(h) > HERMITIAN_TOL * max(1.0, float(np.max(np.abs(h)))):
        raise SingularMetricError("matrix is not Hermitian")
    try:
        low = np.linalg.cholesky(h)
    except np.linalg.LinAlgError:
        raise SingularMetricError("matrix is not positive definite") from None
    pivots = np.abs(np.diagonal(low)) ** 2
    if pivots.size and pivots.min() < PIVOT_TOL:
        raise SingularMetricError(f"factorisation pivot {pivots.min():.3e} below {PIVOT_TOL}")
    return low


def invert_hermitian(h: np.ndarray) -> np.ndarray:
    """Inverse of a positive definite Hermitian matrix, exactly Hermitian."""
    low = _cholesky(h)
    linv = np.linalg.solve(low, np.eye(low.shape[0], dtype=complex))
    inv = linv.conj().T @ linv
    return 0.5 * (inv + inv.conj().T)


def unitary_frame(g: np.ndarray) -> np.ndarray:
    """Columns ``e_a = sum_i E[i, a] d/dz^i`` orthonormal for ``g``.

    Orthonormality reads ``sum_ij E[i,a] conj(E[j,b]) g[i,j] = delta_ab``,
    i.e. ``E.T @ g @ E.conj() = I``.  Built from the Cholesky factor of
    ``g.T`` so the result is upper triangular and deterministic.
    """
    g = np.asarray(g, dtype=complex)
    low = _cholesky(g.T)
    return np.linalg.solve(low, np.eye(low.shape[0], dtype=complex)).conj().T


def frame_gram(g: np.ndarray, frame: np.ndarray) -> np.ndarray:
    """``g(e_a, conj e_b)`` for the frame columns."""
    return frame.T @ np.asarray(g) @ frame.conj()


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar-distributed unitary via QR with the phase fix."""
    a = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(a)
    d = np.diagonal(r)
    return q * (d / np.abs(d))
