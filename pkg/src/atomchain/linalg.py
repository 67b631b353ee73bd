"""Small dense linear-algebra helpers for real antisymmetric matrices."""
import numpy as np


def pfaffian(A: np.ndarray) -> float:
    """Pfaffian of a real antisymmetric matrix (Parlett-Reid with pivoting).

    Uses the skew-symmetric LTL^T decomposition; O(n^3), no square root of
    the determinant, so the sign is exact.
    """
    A = np.array(A, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("pfaffian needs a square matrix")
    if n % 2:
        return 0.0
    pf = 1.0
    for k in range(0, n - 1, 2):
        kp = k + 1 + int(np.abs(A[k + 1:, k]).argmax())
        if kp != k + 1:
            A[[k + 1, kp], :] = A[[kp, k + 1], :]
            A[:, [k + 1, kp]] = A[:, [kp, k + 1]]
            pf = -pf
        if A[k + 1, k] == 0.0:
            return 0.0
        pf *= A[k, k + 1]
        if k + 2 < n:
            tau = A[k, k + 2:] / A[k, k + 1]
            col = A[k + 2:, k + 1]
            A[k + 2:, k + 2:] += np.outer(tau, col) - np.outer(col, tau)
    return pf


def reorthogonalize(O: np.ndarray) -> np.ndarray:
    """Nearest-in-QR-sense orthogonal matrix; keeps det(O) unchanged."""
    q, r = np.linalg.qr(O)
    return q * np.sign(np.diag(r))


def antisymmetry_error(A: np.ndarray) -> float:
    return float(np.max(np.abs(A + A.T), initial=0.0))
