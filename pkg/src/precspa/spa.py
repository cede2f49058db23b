"""Successive projection algorithm and its companions.

Indices are 0-based and returned as plain lists of ``int`` in extraction
order. Ties in the selection step go to the smallest column index, where
scores within ``tie_tol_rel`` (relative) of the maximum count as ties. The
window keeps the choice deterministic when exact ties are blurred by
roundoff or by the finite accuracy of an upstream solver.

The affine-hull variant (FastAnchorWords) is equivalent to SPA once the
origin is added to the data and forced to be extracted first; it is not
provided separately.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateBasis, InsufficientColumns, RankDeficient
from .linalg import TINY, as_matrix


@dataclass(frozen=True)
class SpaOptions:
    selection_p: float = 2.0
    zero_tol_rel: float = 1e-12
    # scores within this relative distance of the maximum count as tied
    tie_tol_rel: float = 1e-6

    def __post_init__(self):
        if not 1.0 < self.selection_p <= 2.0:
            raise ValueError(f"selection_p must lie in (1, 2], got {self.selection_p}")
        if not self.zero_tol_rel > 0:
            raise ValueError("zero_tol_rel must be positive")
        if not 0 <= self.tie_tol_rel < 1:
            raise ValueError("tie_tol_rel must lie in [0, 1)")


def _column_scores(R, p):
    if p == 2.0:
        return np.einsum("ij,ij->j", R, R)
    return np.sum(np.abs(R) ** p, axis=0)


def select_max(scores, tie_tol_rel):
    """Index of the largest score; near-ties go to the smallest index."""
    best = scores.max()
    return int(np.flatnonzero(scores >= best - tie_tol_rel * abs(best))[0])


def _spa(M, r, opts, strict):
    R = M.copy()
    norms2 = np.einsum("ij,ij->j", R, R)
    floor = (opts.zero_tol_rel * np.sqrt(norms2.max())) ** 2
    K = []
    for k in range(r):
        if norms2.max() <= floor:
            if strict:
                raise RankDeficient(
                    f"residual vanished after {k} of {r} extractions"
                )
            break
        scores = _column_scores(R, opts.selection_p)
        j = select_max(scores, opts.tie_tol_rel)
        u = R[:, j].copy()
        R -= np.outer(u, (u @ R) / (u @ u))
        norms2 = np.einsum("ij,ij->j", R, R)
        K.append(j)
    return K


def spa(M, r, opts=None):
    """Extract ``r`` columns of ``M`` by successive projection.

    At each step the column of the residual with the largest (l_p) norm is
    selected and every column is projected onto the orthogonal complement
    of it.

    Raises
    ------
    RankDeficient
        If the residual becomes numerically zero before ``r`` columns have
        been extracted.
    """
    M = as_matrix(M)
    opts = opts or SpaOptions()
    if not 1 <= r <= min(M.shape):
        raise ValueError(f"r must lie in [1, {min(M.shape)}], got {r}")
    return _spa(M, r, opts, strict=True)


def spa_post_process(M, K, tie_tol_rel=SpaOptions.tie_tol_rel):
    """One pass of the swap post-processing over the SPA index set ``K``.

    For each position ``k``, every column is projected onto the orthogonal
    complement of the other selected columns and ``K[k]`` is replaced by the
    column with the largest projected norm. A candidate already retained in
    ``K`` is skipped in favour of the next-largest norm.
    """
    M = as_matrix(M)
    K = [int(i) for i in K]
    r = len(K)
    if r == 0 or len(set(K)) != r:
        raise ValueError("K must be a non-empty set of distinct indices")
    for k in range(r):
        others = K[:k] + K[k + 1:]
        if others:
            Qb, Rb = np.linalg.qr(M[:, others])
            diag = np.abs(np.diag(Rb))
            if diag.min() <= 1e-10 * max(diag.max(), TINY):
                raise DegenerateBasis(
                    f"retained columns {others} are numerically rank-deficient"
                )
            P = M - Qb @ (Qb.T @ M)
        else:
            P = M
        scores = np.einsum("ij,ij->j", P, P)
        scores[others] = -np.inf
        K[k] = select_max(scores, tie_tol_rel)
    return K


def repeated_spa_init(M, K_target, opts=None):
    """Collect ``K_target`` indices by restarting SPA on the unused columns.

    SPA yields at most ``min(m, n)`` indices per pass; after each pass the
    extracted columns are zeroed and SPA is rerun until enough indices have
    been gathered.
    """
    M = as_matrix(M)
    m, n = M.shape
    if not 1 <= K_target <= n:
        raise ValueError(f"K_target must lie in [1, {n}], got {K_target}")
    opts = opts or SpaOptions()
    R = M.copy()
    scale = np.sqrt(np.einsum("ij,ij->j", M, M).max())
    K = []
    while len(K) < K_target:
        remaining = K_target - len(K)
        live = np.einsum("ij,ij->j", R, R) > (opts.zero_tol_rel * scale) ** 2
        if not live.any():
            raise InsufficientColumns(
                f"only {len(K)} nonzero columns available, {K_target} requested"
            )
        batch = _spa(R, min(m, remaining), opts, strict=False)
        if not batch:
            raise InsufficientColumns(f"SPA restart made no progress after {len(K)} indices")
        K.extend(batch)
        R[:, batch] = 0.0
    return K


def l1_normalize_columns(M):
    """Scale each nonzero column to unit l1 norm; zero columns stay zero."""
    M = as_matrix(M)
    s = np.abs(M).sum(axis=0)
    out = M.copy()
    nz = s > 0
    out[:, nz] /= s[nz]
    return out
