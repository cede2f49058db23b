"""Synthetic near-separable instances, recovery metrics and robustness sweeps.

Randomness comes from numpy's PCG64 generator. A sweep derives one 64-bit
seed per (noise level, trial) pair by hashing ``(base_seed, eps_index,
trial)`` through :class:`numpy.random.SeedSequence`, so every algorithm sees
the same instances and results do not depend on scheduling.
"""
from __future__ import annotations

import itertools
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment, nnls

from .errors import ConstantVector, DegenerateBasis, PrecSpaError
from .linalg import TINY, as_matrix, extreme_singular_values
from .pipeline import ALGORITHMS, run_algorithm

KINDS = ("middle-points", "middle-points-gaussian")


@dataclass
class SyntheticInstance:
    M_noisy: np.ndarray
    W: np.ndarray
    H: np.ndarray
    true_indices: list
    epsilon: float
    kind: str
    seed: int
    sigma_min_W: float = field(default=float("nan"))

    @property
    def r(self):
        return self.W.shape[1]

    def metadata(self):
        m, n = self.M_noisy.shape
        return {
            "kind": self.kind,
            "m": m,
            "n": n,
            "r": self.r,
            "epsilon": self.epsilon,
            "seed": self.seed,
            "true_indices": list(self.true_indices),
            "sigma_min_W": self.sigma_min_W,
        }


@dataclass
class BenchmarkRecord:
    algorithm: str
    epsilon: float
    trial: int
    recovery: float
    runtime_seconds: float


def middle_point_weights(r):
    """``[I_r, H']`` where each column of ``H'`` is 0.5 on one pair of rows."""
    pairs = list(itertools.combinations(range(r), 2))
    Hp = np.zeros((r, len(pairs)))
    for k, (a, b) in enumerate(pairs):
        Hp[a, k] = Hp[b, k] = 0.5
    return np.hstack([np.eye(r), Hp])


def _middle_points(m, r, epsilon, seed, gaussian):
    if r < 2 or m < r:
        raise ValueError(f"need m >= r >= 2, got m={m}, r={r}")
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    rng = np.random.default_rng(seed)
    W = rng.random((m, r))
    H = middle_point_weights(r)
    M = W @ H
    w_bar = W.mean(axis=1, keepdims=True)
    outward = np.hstack([np.zeros((m, r)), M[:, r:] - w_bar])
    if gaussian:
        Z = rng.standard_normal(M.shape)
        N = 0.9 * epsilon * outward + 0.1 * epsilon * Z
    else:
        N = epsilon * outward
    return SyntheticInstance(
        M_noisy=M + N,
        W=W,
        H=H,
        true_indices=list(range(r)),
        epsilon=float(epsilon),
        kind="middle-points-gaussian" if gaussian else "middle-points",
        seed=int(seed),
        sigma_min_W=extreme_singular_values(W)[1],
    )


def gen_middle_points(r, epsilon, seed):
    """``r x (r + r(r-1)/2)`` instance: vertices plus all pairwise midpoints.

    ``W`` is uniform on [0, 1]. The vertices are left untouched and every
    midpoint ``M[:, j]`` is pushed outwards to ``M[:, j] + eps (M[:, j] - w_bar)``
    where ``w_bar`` is the mean of the columns of ``W``.
    """
    return _middle_points(r, r, epsilon, seed, gaussian=False)


def gen_middle_points_gaussian(m, r, epsilon, seed):
    """Middle-points instance with ``m`` rows and mixed noise.

    ``N = 0.9 eps [0, M_mid - w_bar] + 0.1 eps Z`` with ``Z`` standard normal
    on every entry, the vertex columns included.
    """
    return _middle_points(m, r, epsilon, seed, gaussian=True)


def generate(kind, m, r, epsilon, seed):
    if kind == "middle-points":
        if m is not None and m != r:
            raise ValueError("middle-points instances have m = r")
        return gen_middle_points(r, epsilon, seed)
    if kind == "middle-points-gaussian":
        return gen_middle_points_gaussian(m if m is not None else r, r, epsilon, seed)
    raise ValueError(f"unknown kind {kind!r}; expected one of {KINDS}")


def recovery_fraction(K, truth):
    if len(K) != len(truth):
        raise ValueError("K and truth must have the same size")
    return len(set(K) & set(truth)) / len(truth)


def trial_seed(base_seed, eps_index, trial):
    ss = np.random.SeedSequence([int(base_seed), int(eps_index), int(trial)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def robustness(records, eps_grid, threshold):
    """First-crossing robustness of one algorithm's records.

    The largest grid value reached before the mean recovery first drops
    below ``threshold``; ``nan`` if the first grid value already fails.
    """
    by_eps = {}
    for rec in records:
        by_eps.setdefault(rec.epsilon, []).append(rec.recovery)
    best = float("nan")
    for eps in eps_grid:
        vals = by_eps.get(float(eps))
        if not vals or np.mean(vals) < threshold - 1e-12:
            break
        best = float(eps)
    return best


def _run_trial(job):
    kind, m, r, eps, eps_index, trial, base_seed, algorithms, opts = job
    inst = generate(kind, m, r, eps, trial_seed(base_seed, eps_index, trial))
    out = []
    for name in algorithms:
        t0 = time.perf_counter()
        try:
            K, _ = run_algorithm(name, inst.M_noisy, r, opts)
            rec = recovery_fraction(K, inst.true_indices)
        except PrecSpaError:
            K, rec = [], 0.0
        out.append((BenchmarkRecord(name, float(eps), trial, rec, time.perf_counter() - t0), K))
    return out


def robustness_sweep(algorithms, eps_grid, trials, base_seed=0, kind="middle-points",
                     m=None, r=20, opts=None, workers=1, return_indices=False):
    """Run every algorithm on paired instances across a noise grid.

    Returns
    -------
    records : list of BenchmarkRecord
    summary : dict
        ``algorithm -> (rob100, rob95)``.
    indices : dict, only if ``return_indices``
        ``(algorithm, eps, trial) -> extracted index list``.
    """
    eps_grid = [float(e) for e in eps_grid]
    if any(b < a for a, b in zip(eps_grid, eps_grid[1:])):
        raise ValueError("eps_grid must be sorted ascending")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    for name in algorithms:
        if name not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {name!r}; expected one of {ALGORITHMS}")
    jobs = [
        (kind, m, r, eps, i, t, base_seed, tuple(algorithms), opts)
        for i, eps in enumerate(eps_grid)
        for t in range(trials)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_trial, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        results = [_run_trial(job) for job in jobs]

    records, indices = [], {}
    for res in results:
        for rec, K in res:
            records.append(rec)
            indices[(rec.algorithm, rec.epsilon, rec.trial)] = K
    summary = {}
    for name in algorithms:
        mine = [rec for rec in records if rec.algorithm == name]
        summary[name] = (robustness(mine, eps_grid, 1.0), robustness(mine, eps_grid, 0.95))
    if return_indices:
        return records, summary, indices
    return records, summary


def mrsa(x, y):
    """Mean-removed spectral angle between two signatures, in [0, 100]."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape or x.size < 2:
        raise ValueError("x and y must have the same length >= 2")
    xc = x - x.mean()
    yc = y - y.mean()
    nx, ny = np.linalg.norm(xc), np.linalg.norm(yc)
    if nx <= TINY or ny <= TINY:
        raise ConstantVector("mean-removed signature has zero norm")
    c = np.clip((xc @ yc) / (nx * ny), -1.0, 1.0)
    return float(100.0 / np.pi * np.arccos(c))


def match_endmembers(W_true, W_est):
    """Pair estimated with true endmembers minimizing the average MRSA.

    Returns ``(assignment, avg)`` where ``W_est[:, assignment[k]]`` is matched
    to ``W_true[:, k]``.
    """
    W_true = as_matrix(W_true, "W_true")
    W_est = as_matrix(W_est, "W_est")
    if W_true.shape[1] != W_est.shape[1]:
        raise ValueError("W_true and W_est must have the same number of columns")
    r = W_true.shape[1]
    cost = np.array([[mrsa(W_true[:, i], W_est[:, j]) for j in range(r)] for i in range(r)])
    return assign_min_cost(cost)


def assign_min_cost(cost):
    """Hungarian assignment on a square cost matrix: ``(permutation, mean cost)``."""
    cost = np.asarray(cost, dtype=float)
    rows, cols = linear_sum_assignment(cost)
    perm = [int(c) for _, c in sorted(zip(rows, cols))]
    return perm, float(cost[rows, cols].mean())


def nnls_abundances(M, K):
    """Column-wise ``argmin_{X >= 0} ||M - M[:, K] X||_F``.

    Raises
    ------
    DegenerateBasis
        If the selected columns are numerically dependent.
    """
    M = as_matrix(M)
    B = M[:, list(K)]
    _, Rb = np.linalg.qr(B)
    diag = np.abs(np.diag(Rb))
    if diag.min() <= 1e-10 * max(diag.max(), TINY):
        raise DegenerateBasis("selected columns are numerically rank-deficient")
    H = np.empty((B.shape[1], M.shape[1]))
    for j in range(M.shape[1]):
        H[:, j], _ = nnls(B, M[:, j])
    return H


def kkt_residual(B, b, x):
    """Largest violation of the NNLS optimality conditions at ``x``."""
    g = B.T @ (B @ x - b)
    return float(max(np.abs(g[x > 0]).max(initial=0.0), (-g[x == 0]).max(initial=0.0), 0.0))


def appendix_gap(r):
    """``(r-1)(1 + 1/(8r))^(-2r/(r-1)) - 4^(1/(r-1)) (r-3)``; positive for all r >= 2."""
    if r < 2:
        raise ValueError("r must be >= 2")
    r = float(r)
    return (r - 1.0) * (1.0 + 1.0 / (8.0 * r)) ** (-2.0 * r / (r - 1.0)) - 4.0 ** (1.0 / (r - 1.0)) * (r - 3.0)
