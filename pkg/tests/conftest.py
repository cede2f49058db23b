import numpy as np
import pytest


def separable_instance(rng, r, n, m=None, noise=0.0, shuffle=False):
    """``M = W [I, H'] (+ noise)`` with uniform ``W`` and ``H'`` columns summing to at most one.

    Returns ``(M, W, truth)`` where ``truth`` lists the columns equal to ``W``.
    """
    m = r if m is None else m
    W = rng.random((m, r))
    Hp = rng.dirichlet(np.ones(r), size=n - r).T * rng.random(n - r)
    M = W @ np.hstack([np.eye(r), Hp])
    if noise:
        N = rng.standard_normal(M.shape)
        M = M + noise * N / np.linalg.norm(N, axis=0)
    truth = list(range(r))
    if shuffle:
        perm = rng.permutation(n)
        M = M[:, perm]
        inv = np.argsort(perm)
        truth = sorted(int(inv[k]) for k in truth)
    return M, W, truth


@pytest.fixture
def rng():
    return np.random.default_rng(20140301)


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
