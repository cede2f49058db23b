"""Minimum-volume origin-centred enclosing ellipsoid.

The ellipsoid ``{x : x.T A x <= 1}`` of least volume containing the columns
``m_i`` of an ``r x n`` matrix solves::

    min  -log det A   s.t.  m_i.T A m_i <= 1,  A positive definite.

Its Lagrangian dual is ``max_{y >= 0} log det(sum_i y_i m_i m_i.T) - sum(y) + r``.
At the optimum ``sum(y) = r``, so with ``u = y / r`` the dual becomes the
D-optimal design problem::

    max_{u in simplex} log det X(u),   X(u) = sum_i u_i m_i m_i.T,

and the primal solution is recovered as ``A = X(u)^{-1} / r``. The design
problem is solved here with Frank-Wolfe plus Wolfe away-steps (the
Khachiyan / Todd-Yildirim scheme). Writing ``k_i = m_i.T X(u)^{-1} m_i``,
the exact line search along ``u <- (1 - a) u + a e_j`` gives::

    a = (k_j - r) / (r (k_j - 1)),

a toward step for the largest ``k_j`` (``a > 0``) and an away step for the
smallest ``k_j`` on the support (``a < 0``, clipped so that ``u_j`` stays
nonnegative; a clipped step drops ``j`` from the support). Optimality is
certified by ``max_i k_i <= r (1 + gap_tol)``; away steps additionally drive
``min_{u_i > 0} k_i >= r (1 - gap_tol)``.

For large ``n`` the problem is wrapped in an active-set loop that solves it
on a working set of columns and swaps in violated constraints.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NoConvergence, NotPositiveDefinite, RankDeficientInput, SingularAggregate
from .linalg import as_matrix, cholesky, extreme_singular_values
from .spa import repeated_spa_init, spa

_REFRESH_EVERY = 25


@dataclass(frozen=True)
class MveeOptions:
    delta: float = 1e-6
    gap_tol: float = 1e-7
    max_fw_iters: int = 50_000
    eta: int | None = None  # defaults to r(r+1)/2 + r
    max_outer_rounds: int = 100

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError("delta must be nonnegative")
        if not self.gap_tol > 0:
            raise ValueError("gap_tol must be positive")
        if self.max_fw_iters < 1 or self.max_outer_rounds < 1:
            raise ValueError("iteration caps must be positive")

    def resolved_eta(self, r):
        eta = r * (r + 1) // 2 + r if self.eta is None else int(self.eta)
        if eta <= r * (r + 1) // 2:
            raise ValueError(f"eta must exceed r(r+1)/2 = {r * (r + 1) // 2}, got {eta}")
        return eta


@dataclass
class EllipsoidSolution:
    A: np.ndarray
    y: np.ndarray
    margin: float
    gap: float
    iterations: int
    active_set: list = field(default_factory=list)
    outer_rounds: int = 0
    objective_trace: list | None = None

    @property
    def log_det_gap(self):
        """Primal minus dual objective, ``r log(1 + gap)``."""
        return self.A.shape[0] * np.log1p(self.gap)


def feasibility_margin(A, M):
    """Return ``max_i m_i.T A m_i`` and the (smallest) index attaining it."""
    values = _quad_forms(np.asarray(A, dtype=float), as_matrix(M))
    j = int(np.argmax(values))
    return float(values[j]), j


def _quad_forms(A, M):
    return np.einsum("ij,ij->j", M, A @ M)


def _logdet_spd(X):
    try:
        R = cholesky(X)
    except NotPositiveDefinite as exc:
        raise SingularAggregate(str(exc)) from exc
    return 2.0 * float(np.sum(np.log(np.diag(R))))


def dual_objective(y, M):
    """``log det(sum_i y_i m_i m_i.T) - sum(y) + r``."""
    M = as_matrix(M)
    y = np.asarray(y, dtype=float).ravel()
    if y.shape[0] != M.shape[1]:
        raise ValueError("y must have one entry per column of M")
    if np.any(y < 0):
        raise ValueError("y must be nonnegative")
    X = (M * y) @ M.T
    X = 0.5 * (X + X.T)
    return _logdet_spd(X) - float(y.sum()) + M.shape[0]


def _check_full_rank(M):
    r, n = M.shape
    if n < r:
        raise RankDeficientInput(f"need at least r={r} columns, got {n}")
    smax, smin = extreme_singular_values(M)
    if not smin > 1e-10 * smax:
        raise RankDeficientInput(
            f"input is numerically rank-deficient (sigma_min={smin:.3e}, sigma_max={smax:.3e}); "
            "reduce the dimension first"
        )


def _inverse_and_kappa(M, u):
    X = (M * u) @ M.T
    X = 0.5 * (X + X.T)
    Xinv = np.linalg.inv(X)
    Xinv = 0.5 * (Xinv + Xinv.T)
    return X, Xinv, _quad_forms(Xinv, M)


def mvee_dual_ascent(M, opts=None, record=False):
    """Solve the centred MVEE problem for the columns of a full-row-rank ``M``.

    Parameters
    ----------
    M : (r, n) array of rank ``r``.
    opts : MveeOptions, optional
        Only ``gap_tol`` and ``max_fw_iters`` are used here.
    record : bool
        Store the dual objective after every iteration in
        ``objective_trace`` (costs one extra ``O(n r^2)`` per iteration).

    Returns
    -------
    EllipsoidSolution
        ``A = X(u)^{-1} / max_i k_i`` so that the margin is exactly 1 over the
        columns of ``M``; ``y = r u``.

    Raises
    ------
    RankDeficientInput
    NoConvergence
        With the last iterate attached as ``best``.
    """
    M = as_matrix(M)
    opts = opts or MveeOptions()
    r, n = M.shape
    _check_full_rank(M)

    if r == 1:
        j = int(np.argmax(np.abs(M[0])))
        y = np.zeros(n)
        y[j] = 1.0
        A = np.array([[1.0 / M[0, j] ** 2]])
        return EllipsoidSolution(A, y, 1.0, 0.0, 0, list(range(n)), 0,
                                 [dual_objective(y, M)] if record else None)

    tol = opts.gap_tol
    u = np.full(n, 1.0 / n)
    X, Xinv, kappa = _inverse_and_kappa(M, u)
    trace = [dual_objective(r * u, M)] if record else None

    converged = False
    it = 0
    while True:
        j_plus = int(np.argmax(kappa))
        k_plus = kappa[j_plus]
        support = u > 0
        masked = np.where(support, kappa, np.inf)
        j_minus = int(np.argmin(masked))
        k_minus = masked[j_minus]
        eps_plus = k_plus / r - 1.0
        eps_minus = 1.0 - k_minus / r
        if eps_plus <= tol and eps_minus <= tol:
            converged = True
            break
        if it >= opts.max_fw_iters:
            break
        it += 1

        if eps_plus >= eps_minus:
            j, kj = j_plus, k_plus
            alpha = (kj - r) / (r * (kj - 1.0))
            drop = False
        else:
            j, kj = j_minus, k_minus
            bound = -u[j] / (1.0 - u[j])
            alpha = bound if kj <= 1.0 else max((kj - r) / (r * (kj - 1.0)), bound)
            drop = alpha == bound

        g = Xinv @ M[:, j]
        a = alpha / (1.0 - alpha)
        denom = 1.0 + a * kj
        mg = g @ M
        kappa = (kappa - (a / denom) * mg * mg) / (1.0 - alpha)
        Xinv = (Xinv - (a / denom) * np.outer(g, g)) / (1.0 - alpha)
        u *= 1.0 - alpha
        u[j] += alpha
        if drop:
            u[j] = 0.0
        np.clip(u, 0.0, None, out=u)

        if it % _REFRESH_EVERY == 0:
            u /= u.sum()
            X, Xinv, kappa = _inverse_and_kappa(M, u)
        if record:
            trace.append(dual_objective(r * u, M))

    u /= u.sum()
    X, Xinv, kappa = _inverse_and_kappa(M, u)
    k_max = float(kappa.max())
    A = Xinv / k_max
    A = 0.5 * (A + A.T)
    sol = EllipsoidSolution(
        A=A,
        y=r * u,
        margin=float(_quad_forms(A, M).max()),
        gap=max(k_max / r - 1.0, 0.0),
        iterations=it,
        active_set=list(range(n)),
        outer_rounds=0,
        objective_trace=trace,
    )
    if not converged and sol.gap > tol:
        raise NoConvergence(
            f"Frank-Wolfe stopped after {it} iterations with gap {sol.gap:.3e}", best=sol
        )
    return sol


def _top_by_margin(candidates, margins, count):
    """``count`` members of ``candidates`` with the largest margins (ties: smaller index)."""
    candidates = np.asarray(candidates, dtype=np.intp)
    if count <= 0 or candidates.size == 0:
        return []
    order = np.lexsort((candidates, -margins[candidates]))
    return [int(i) for i in candidates[order[:count]]]


def mvee_active_set(M, r=None, opts=None):
    """Centred MVEE of all columns of ``M`` through an active-set loop.

    The working set is seeded with ``eta`` columns found by repeated SPA. After
    each solve the inactive constraints are dropped, the set is trimmed to
    ``r(r+1)/2`` members (the ``r`` SPA columns plus the largest margins) when
    too large, and refilled to ``eta`` with the most violated outside columns.
    The loop stops once every column satisfies ``m_i.T A m_i < 1 + delta``.
    """
    M = as_matrix(M)
    opts = opts or MveeOptions()
    if r is None:
        r = M.shape[0]
    if M.shape[0] != r:
        raise ValueError(f"M must have r={r} rows, got {M.shape[0]}")
    n = M.shape[1]
    _check_full_rank(M)
    eta = opts.resolved_eta(r)
    john = r * (r + 1) // 2
    drop_below = 1.0 - 10.0 * max(opts.delta, opts.gap_tol)

    if n <= eta:
        sol = mvee_dual_ascent(M, opts)
        sol.outer_rounds = 1
        return sol

    S = repeated_spa_init(M, eta)
    total_iters = 0
    rounds = 0
    while True:
        rounds += 1
        if rounds > opts.max_outer_rounds:
            raise NoConvergence(f"active set did not settle in {opts.max_outer_rounds} rounds", best=sol)
        sub = mvee_dual_ascent(M[:, S], opts)
        total_iters += sub.iterations
        margins = _quad_forms(sub.A, M)
        y = np.zeros(n)
        y[S] = sub.y
        sol = EllipsoidSolution(
            A=sub.A,
            y=y,
            margin=float(margins.max()),
            gap=sub.gap,
            iterations=total_iters,
            active_set=list(S),
            outer_rounds=rounds,
        )
        if sol.margin < 1.0 + opts.delta:
            return sol

        S = [i for i in S if margins[i] >= drop_below]
        if len(S) > john:
            keep = [S[i] for i in spa(M[:, S], r)]
            rest = sorted(set(S) - set(keep))
            S = keep + _top_by_margin(rest, margins, john - r)
        inside = np.zeros(n, dtype=bool)
        inside[S] = True
        S = S + _top_by_margin(np.flatnonzero(~inside), margins, eta - len(S))
