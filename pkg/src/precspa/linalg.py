"""Small dense linear-algebra kernels.

Everything downstream of the dimensionality reduction works with matrices
that have at most a few hundred rows, so the decompositions here favour
simplicity over generality:

* symmetric eigenproblems are solved with cyclic Jacobi rotations;
* the truncated SVD goes through the Gram matrix of the short side.

The Gram route squares the condition number, so singular vectors belonging
to singular values below roughly ``1e-8 * sigma_max`` are not resolved
accurately (the values themselves are recomputed as ``||M.T u_i||`` and do
reach roundoff level on rank-deficient input). That is fine for
the well-posed reductions used here (the rank-``r`` part of the data is
well separated from the noise) but this is not a general-purpose SVD.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    NoConvergence,
    NotPositiveDefinite,
    NotSymmetric,
    RankDeficientWarning,
    ZeroVector,
)

TINY = 1e-300


def as_matrix(M, name="M"):
    """Return ``M`` as a 2-D float64 array, rejecting NaN/Inf entries."""
    A = np.asarray(M, dtype=float)
    if A.ndim == 1:
        A = A[:, None]
    if A.ndim != 2 or A.shape[0] == 0 or A.shape[1] == 0:
        raise ValueError(f"{name} must be a non-empty 2-D array, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} contains NaN or Inf entries")
    return A


@dataclass(frozen=True)
class SymEigResult:
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # orthonormal columns, same order


def gram(M):
    """``M @ M.T``, symmetrized so the result is exactly symmetric."""
    M = as_matrix(M)
    G = M @ M.T
    return 0.5 * (G + G.T)


def _check_symmetric(S, tol=1e-10):
    scale = max(np.abs(S).max(), TINY)
    asym = np.abs(S - S.T).max()
    if asym > tol * scale:
        raise NotSymmetric(f"asymmetry {asym:.3e} exceeds {tol:g} relative to max entry {scale:.3e}")


def sym_eig(S, tol=1e-12, max_sweeps=100):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps over all off-diagonal pairs until the off-diagonal Frobenius
    mass drops below ``tol * ||S||_F``.

    Returns
    -------
    SymEigResult
        Eigenvalues sorted in descending order with matching orthonormal
        eigenvectors, so that ``S = V diag(w) V.T``.
    """
    S = as_matrix(S, "S")
    n = S.shape[0]
    if S.shape[1] != n:
        raise NotSymmetric(f"matrix must be square, got {S.shape}")
    _check_symmetric(S)
    A = 0.5 * (S + S.T)
    V = np.eye(n)
    fro = np.linalg.norm(A)
    if fro <= TINY:
        return SymEigResult(np.zeros(n), V)

    target = tol * fro
    for _ in range(max_sweeps):
        off = _off_norm(A)
        if off <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= TINY:
                    continue
                tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                if abs(tau) > 1e150:
                    t = 0.5 / tau
                else:
                    t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                cp = A[:, p].copy()
                cq = A[:, q]
                A[:, p] = c * cp - s * cq
                A[:, q] = s * cp + c * cq
                rp = A[p, :].copy()
                rq = A[q, :]
                A[p, :] = c * rp - s * rq
                A[q, :] = s * rp + c * rq
                A[p, q] = A[q, p] = 0.0
                vp = V[:, p].copy()
                vq = V[:, q]
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    else:
        off = _off_norm(A)
        if off > target:
            raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps (off={off:.3e})")

    w = np.diag(A).copy()
    order = np.argsort(-w, kind="stable")
    return SymEigResult(w[order], V[:, order])


def _off_norm(A):
    return float(np.linalg.norm(A - np.diag(np.diag(A))))


def truncated_svd(M, r):
    """Rank-``r`` truncated SVD ``M ~ U diag(sigma) V.T`` via the Gram matrix.

    Returns
    -------
    U : (m, r) array with orthonormal columns
    sigma : (r,) array, nonnegative and descending
    V : (n, r) array
    """
    M = as_matrix(M)
    m, n = M.shape
    if not 1 <= r <= min(m, n):
        raise ValueError(f"r must lie in [1, {min(m, n)}], got {r}")

    # sigma_i = ||M.T u_i|| rather than sqrt(lambda_i): null directions then
    # come out at roundoff level instead of sqrt(eps) * sigma_1
    if m <= n:
        U = sym_eig(gram(M)).eigenvectors[:, :r]
        B = M.T @ U
        sigma = np.linalg.norm(B, axis=0)
        V = _scaled_columns(B, sigma)
    else:
        V = sym_eig(gram(M.T)).eigenvectors[:, :r]
        B = M @ V
        sigma = np.linalg.norm(B, axis=0)
        U = _scaled_columns(B, sigma)
    order = np.argsort(-sigma, kind="stable")
    U, sigma, V = U[:, order], sigma[order], V[:, order]

    if sigma[-1] <= 1e-12 * max(sigma[0], TINY):
        warnings.warn(
            f"sigma_r = {sigma[-1]:.3e} is negligible relative to sigma_1 = {sigma[0]:.3e}",
            RankDeficientWarning,
            stacklevel=2,
        )
    return U, sigma, V


def _scaled_columns(B, sigma):
    out = np.zeros_like(B)
    ok = sigma > 1e-12 * max(sigma[0], TINY)
    out[:, ok] = B[:, ok] / sigma[ok]
    return out


def cholesky(A):
    """Upper-triangular ``R`` with ``A = R.T @ R``.

    No jitter is added: a pivot at or below ``1e-14 * max|A|`` raises
    :class:`NotPositiveDefinite` and the caller decides what to do.
    """
    A = as_matrix(A, "A")
    n = A.shape[0]
    if A.shape[1] != n:
        raise NotSymmetric(f"matrix must be square, got {A.shape}")
    _check_symmetric(A)
    scale = max(np.abs(A).max(), TINY)
    R = np.zeros_like(A)
    for k in range(n):
        col = R[:k, k]
        d = A[k, k] - col @ col
        if d <= 1e-14 * scale:
            raise NotPositiveDefinite(f"pivot {k} is {d:.3e} (scale {scale:.3e})")
        R[k, k] = np.sqrt(d)
        R[k, k + 1:] = (A[k, k + 1:] - col @ R[:k, k + 1:]) / R[k, k]
    return R


def project_out(R, u):
    """Project every column of ``R`` onto the orthogonal complement of ``u``."""
    R = as_matrix(R, "R")
    u = np.asarray(u, dtype=float).ravel()
    nu2 = u @ u
    if np.sqrt(nu2) <= TINY:
        raise ZeroVector("cannot project out a zero vector")
    return R - np.outer(u, (u @ R) / nu2)


def extreme_singular_values(M):
    """Largest and smallest singular value of ``M`` (``min(m, n)`` of them)."""
    M = as_matrix(M)
    short = M if M.shape[0] <= M.shape[1] else M.T
    V = sym_eig(gram(short)).eigenvectors
    return float(np.linalg.norm(short.T @ V[:, 0])), float(np.linalg.norm(short.T @ V[:, -1]))


def condition_number(M):
    smax, smin = extreme_singular_values(M)
    return smax / smin if smin > 0 else np.inf
