"""Dense complex Hermitian kernel: cyclic Jacobi eigensolver, PSD test, rank.

Every matrix handled by the rest of the package (fiber adjacency blocks,
matrix units, Krein matrices) is small and dense, so a plain cyclic Jacobi
iteration is accurate and fast enough.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_TOL = 1e-10
MAX_SWEEPS = 60


class NotHermitianError(ValueError):
    """Raised when a matrix is not Hermitian within tolerance."""


@dataclass(frozen=True)
class EigDecomposition:
    """Eigenvalues in ascending order with orthonormal eigenvector columns."""

    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.conj().T


def _as_cmatrix(H) -> np.ndarray:
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {H.shape}")
    if not np.all(np.isfinite(H)):
        raise ValueError("matrix has non-finite entries")
    return H


def spectral_scale(H: np.ndarray) -> float:
    """Frobenius norm; cheap upper bound on the spectral norm."""
    return float(np.linalg.norm(H))


def _hermitian_part(H: np.ndarray, tol: float) -> np.ndarray:
    if H.shape[0] != H.shape[1]:
        raise NotHermitianError(f"matrix is not square: {H.shape}")
    if H.shape[0] == 0:
        raise ValueError("matrix has dimension 0")
    scale = spectral_scale(H)
    skew = np.max(np.abs(H - H.conj().T)) if H.size else 0.0
    if skew > tol * max(scale, 1.0) * 10:
        raise NotHermitianError(
            f"matrix is not Hermitian: max |H - H*| = {skew:.3e}"
        )
    return (H + H.conj().T) / 2


def _off_norm(H: np.ndarray) -> float:
    # direct sum; total minus diagonal cancels catastrophically near convergence
    mask = ~np.eye(H.shape[0], dtype=bool)
    return float(np.linalg.norm(H[mask]))


def hermitian_eig(H, tol: float = DEFAULT_TOL) -> EigDecomposition:
    """Eigendecomposition of a complex Hermitian matrix by cyclic Jacobi sweeps.

    Each rotation first removes the phase of the pivot ``H[p, q]`` and then
    applies a real Givens rotation that annihilates it.  Sweeps continue down
    to roundoff level; failing to reach ``tol * ||H||`` off-diagonal Frobenius
    norm within the sweep budget is an error.

    Parameters
    ----------
    H : array_like
        Square matrix, Hermitian up to ``tol`` (it is symmetrized first).
    tol : float
        Relative tolerance for convergence and for the Hermitian check.

    Returns
    -------
    EigDecomposition
        Ascending real eigenvalues and a unitary matrix of eigenvectors.
    """
    A = _hermitian_part(_as_cmatrix(H), tol)
    n = A.shape[0]
    V = np.eye(n, dtype=complex)
    scale = spectral_scale(A)
    target = tol * scale
    floor = 4 * np.finfo(float).eps * n * scale

    if n > 1 and scale > 0:
        for _ in range(MAX_SWEEPS):
            if _off_norm(A) <= floor:
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = A[p, q]
                    mag = abs(apq)
                    if mag <= 1e-300 or mag <= 1e-17 * scale:
                        continue
                    phase = apq / mag
                    app = A[p, p].real
                    aqq = A[q, q].real
                    theta = (aqq - app) / (2.0 * mag)
                    t = np.copysign(1.0, theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                    c = 1.0 / np.sqrt(t * t + 1.0)
                    s = t * c
                    # columns p, q of the rotation: (c, -s/phase), (s, c/phase)
                    g = np.array([[c, s], [-s / phase, c / phase]], dtype=complex)
                    idx = [p, q]
                    A[:, idx] = A[:, idx] @ g
                    A[idx, :] = g.conj().T @ A[idx, :]
                    A[p, q] = A[q, p] = 0.0
                    V[:, idx] = V[:, idx] @ g
        else:
            if _off_norm(A) > target:
                raise RuntimeError("Jacobi iteration did not converge")

    values = np.real(np.diag(A)).copy()
    order = np.argsort(values, kind="stable")
    return EigDecomposition(values[order], V[:, order])


def eigvalsh(H, tol: float = DEFAULT_TOL) -> np.ndarray:
    return hermitian_eig(H, tol).values


def min_eigenvalue(H, tol: float = DEFAULT_TOL) -> float:
    return float(hermitian_eig(H, tol).values[0])


def psd(H, tol: float = 1e-8) -> bool:
    """True when the smallest eigenvalue is at least ``-tol * max(1, ||H||)``."""
    H = _as_cmatrix(H)
    return min_eigenvalue(H) >= -tol * max(1.0, spectral_scale(H))


def singular_values(M, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Singular values in descending order.

    Hermitian input uses ``|eigenvalues|`` directly, which keeps small singular
    values at full relative accuracy; anything else goes through ``M* M``.
    """
    M = _as_cmatrix(M)
    if M.size == 0:
        return np.zeros(0)
    scale = spectral_scale(M)
    if M.shape[0] == M.shape[1] and np.max(np.abs(M - M.conj().T)) <= tol * max(scale, 1.0):
        sv = np.abs(eigvalsh(M, tol))
    else:
        gram = M.conj().T @ M if M.shape[0] >= M.shape[1] else M @ M.conj().T
        sv = np.sqrt(np.clip(eigvalsh(gram, tol), 0.0, None))
    return np.sort(sv)[::-1]


def numeric_rank(M, tol: float = 1e-8, atol: float = 0.0) -> int:
    """Number of singular values above ``max(tol * sigma_max, atol)``.

    ``atol`` lets callers declare roundoff-sized matrices to be zero; with the
    default of 0 only an exactly zero matrix has rank 0.
    """
    sv = singular_values(M)
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    return int(np.sum(sv > max(tol * sv[0], atol)))
