"""Small dense symmetric eigensolver (cyclic Jacobi) and PSD square root."""

from __future__ import annotations

import math

import numpy as np

__all__ = ["NumericError", "NotPSDError", "sym_eig", "sqrt_psd"]

SYM_TOL = 1e-12
PSD_TOL = 1e-10
MAX_SWEEPS = 50
OFF_TOL = 1e-13


class NumericError(ArithmeticError):
    """Raised when a numerical routine fails to converge or meets bad input."""


class NotPSDError(NumericError):
    pass


def _as_symmetric(a) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"expected a nonempty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NumericError("matrix has non-finite entries")
    asym = np.max(np.abs(a - a.T))
    if asym > SYM_TOL:
        raise ValueError(f"matrix is not symmetric (max |A - A^T| = {asym:.3e})")
    return 0.5 * (a + a.T)


def _off_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.linalg.norm(off))


def sym_eig(a) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a real symmetric matrix by cyclic Jacobi rotations.

    Pivots are visited row by row (p < q) in a fixed order, so results are
    reproducible bit for bit. Iteration stops once the off-diagonal Frobenius
    norm falls below ``1e-13 * ||A||_F``.

    Returns
    -------
    eigenvalues : ndarray, shape (n,)
        Sorted in descending order.
    eigenvectors : ndarray, shape (n, n)
        Orthonormal columns, ``A @ V[:, j] == w[j] * V[:, j]``.

    Raises
    ------
    NumericError
        If 50 sweeps do not reach the tolerance.
    """
    a = _as_symmetric(a)
    n = a.shape[0]
    v = np.eye(n)
    scale = float(np.linalg.norm(a))
    target = OFF_TOL * scale

    sweeps = 0
    off = _off_norm(a)
    while off > target:
        if sweeps == MAX_SWEEPS:
            raise NumericError(
                f"Jacobi did not converge in {MAX_SWEEPS} sweeps "
                f"(off-diagonal norm {off:.3e}, target {target:.3e})"
            )
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = float(a[p, q])
                if apq == 0.0:
                    continue
                gap = float(a[q, q] - a[p, p])
                if abs(gap) > 1e150 * abs(apq):
                    # rotation angle underflows; t ~ apq / gap
                    t = apq / gap
                else:
                    tau = gap / (2.0 * apq)
                    t = math.copysign(1.0, tau) / (abs(tau) + math.hypot(1.0, tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                rot = np.array([[c, s], [-s, c]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ rot
                a[idx, :] = rot.T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                v[:, idx] = v[:, idx] @ rot
        sweeps += 1
        off = _off_norm(a)

    w = np.diag(a).copy()
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order]


def sqrt_psd(a) -> np.ndarray:
    """Principal square root of a positive semidefinite matrix.

    Eigenvalues in ``[-1e-10, 0)`` are treated as roundoff and set to zero;
    anything more negative raises :class:`NotPSDError`.
    """
    w, v = sym_eig(a)
    if w[-1] < -PSD_TOL:
        raise NotPSDError(f"matrix is not positive semidefinite (min eigenvalue {w[-1]:.3e})")
    root = v @ np.diag(np.sqrt(np.clip(w, 0.0, None))) @ v.T
    return 0.5 * (root + root.T)
