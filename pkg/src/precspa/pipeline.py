"""Preconditioned SPA: dimensionality reduction, preconditioner, extraction.

The data are first reduced to ``r`` rows with the truncated SVD
(``Mr = U.T M``), then premultiplied by a preconditioner ``Q`` and handed
to SPA. Two preconditioners are available:

``sdp``
    ``Q`` is the Cholesky factor of the shape matrix ``A = Q.T Q`` of the
    minimum-volume centred ellipsoid enclosing the columns of ``Mr``. For
    noiseless separable data ``A = (W W.T)^{-1}`` and ``QW`` is perfectly
    conditioned.
``svd-heuristic``
    ``Q = diag(sigma)^{-1}``, i.e. prewhitening with the same truncated SVD.

Any factor of ``A`` differing by a left orthonormal transform gives the
same SPA output, so the (cheapest) Cholesky factor is used.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RankDeficient
from .linalg import TINY, as_matrix, cholesky, sym_eig, truncated_svd
from .mvee import EllipsoidSolution, mvee_active_set
from .spa import spa, spa_post_process

MODES = ("sdp", "svd-heuristic")


@dataclass
class Preconditioner:
    Q: np.ndarray
    basis_U: np.ndarray
    provenance: str  # "sdp", "svd-heuristic" or "identity"
    diagnostics: EllipsoidSolution | None = None

    def apply(self, M):
        """Map the original ``m x n`` data to the preconditioned ``r x n`` data."""
        return self.Q @ (self.basis_U.T @ as_matrix(M))


def reduce_dimension(M, r):
    """Project the columns of ``M`` on its top-``r`` left singular subspace.

    Returns ``(Mr, U)`` with ``Mr = U.T @ M``.
    """
    M = as_matrix(M)
    U, _, _ = truncated_svd(M, r)
    return U.T @ M, U


def sdp_preconditioner(Mr, opts=None, basis_U=None):
    """Cholesky factor of the MVEE shape matrix of the columns of ``Mr``."""
    Mr = as_matrix(Mr, "Mr")
    r = Mr.shape[0]
    sol = mvee_active_set(Mr, r, opts)
    Q = cholesky(sol.A)
    U = np.eye(r) if basis_U is None else basis_U
    return Preconditioner(Q=Q, basis_U=U, provenance="sdp", diagnostics=sol)


def svd_heuristic_preconditioner(M, r):
    """Prewhitening ``diag(sigma)^{-1} U.T`` from the rank-``r`` truncated SVD."""
    M = as_matrix(M)
    U, sigma, _ = truncated_svd(M, r)
    if not sigma[-1] > 1e-12 * max(sigma[0], TINY):
        raise RankDeficient(f"sigma_r = {sigma[-1]:.3e} is negligible, cannot whiten")
    return Preconditioner(Q=np.diag(1.0 / sigma), basis_U=U, provenance="svd-heuristic")


def identity_preconditioner(M, r):
    M = as_matrix(M)
    _, U = reduce_dimension(M, r)
    return Preconditioner(Q=np.eye(r), basis_U=U, provenance="identity")


def build_preconditioner(M, r, mode="sdp", opts=None):
    M = as_matrix(M)
    if mode == "sdp":
        Mr, U = reduce_dimension(M, r)
        return sdp_preconditioner(Mr, opts, basis_U=U)
    if mode == "svd-heuristic":
        return svd_heuristic_preconditioner(M, r)
    raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")


def prec_spa(M, r, mode="sdp", opts=None, spa_opts=None, post_process=False):
    """Preconditioned SPA.

    Returns
    -------
    K : list of int
        Extracted column indices of the original ``M``.
    P : Preconditioner
    """
    M = as_matrix(M)
    if not 1 <= r <= min(M.shape):
        raise ValueError(f"r must lie in [1, {min(M.shape)}], got {r}")
    P = build_preconditioner(M, r, mode, opts)
    data = P.apply(M)
    K = spa(data, r, spa_opts)
    if post_process:
        K = spa_post_process(data, K)
    return K, P


def conditioning_report(W, A):
    """Spectral statistics of ``C = W.T A W``.

    Returns ``(kappa, lambda_max, lambda_min, det)``.
    """
    W = as_matrix(W, "W")
    A = as_matrix(A, "A")
    C = W.T @ A @ W
    C = 0.5 * (C + C.T)
    lam = sym_eig(C).eigenvalues
    lmax, lmin = float(lam[0]), float(lam[-1])
    kappa = lmax / lmin if lmin > 0 else np.inf
    return kappa, lmax, lmin, float(np.prod(lam))


def beta_measure(W):
    """Largest column norm of ``W`` divided by its smallest singular value."""
    W = as_matrix(W, "W")
    if W.shape[0] < W.shape[1]:
        raise RankDeficient("W must have at least as many rows as columns")
    lam = sym_eig(W.T @ W).eigenvalues
    smin = np.sqrt(max(lam[-1], 0.0))
    if not smin > 1e-12 * np.sqrt(max(lam[0], TINY)):
        raise RankDeficient("W is numerically rank-deficient")
    return float(np.linalg.norm(W, axis=0).max() / smin)


def run_algorithm(name, M, r, opts=None, spa_opts=None):
    """Run one of the named extraction algorithms on ``M``.

    ``name`` is one of ``spa``, ``post-spa``, ``prec-spa``, ``heur-spa`` and
    ``post-prec-spa``. Returns ``(K, diagnostics)`` where ``diagnostics`` is
    the ellipsoid solution for the SDP-based variants and ``None`` otherwise.
    """
    if name == "spa":
        return spa(M, r, spa_opts), None
    if name == "post-spa":
        return spa_post_process(M, spa(M, r, spa_opts)), None
    if name in ("prec-spa", "post-prec-spa"):
        K, P = prec_spa(M, r, "sdp", opts, spa_opts, post_process=name == "post-prec-spa")
        return K, P.diagnostics
    if name == "heur-spa":
        return prec_spa(M, r, "svd-heuristic", spa_opts=spa_opts)[0], None
    raise ValueError(f"unknown algorithm {name!r}; expected one of {ALGORITHMS}")


ALGORITHMS = ("spa", "post-spa", "prec-spa", "heur-spa", "post-prec-spa")
