import numpy as np
import pytest

# one line per acceptance criterion, echoed after the run (see
# pytest_terminal_summary below, which escapes pytest's output capture)
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def brute_force_auc(scores, labels):
    """O(n^2) pairwise AUC oracle: wins + half-ties over all pos/neg pairs."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    diff = pos[:, None] - neg[None, :]
    wins = np.count_nonzero(diff > 0)
    ties = np.count_nonzero(diff == 0)
    return (wins + 0.5 * ties) / (pos.size * neg.size)


def random_simplex_rows(rng, n, k, floor=0.0):
    """Dirichlet rows, optionally pushed away from the boundary."""
    p = rng.dirichlet(np.ones(k), size=n)
    if floor:
        p = np.maximum(p, floor)
        p /= p.sum(axis=1, keepdims=True)
    return p


def quadratic_vertex(objective, hi):
    """Exact vertex of a 1-d quadratic from three function values.

    Independent numerical minimizer used to check closed-form correction
    weights: evaluates the objective at 0, hi/2, hi and solves the
    interpolating parabola.
    """
    g0 = objective(0.0)
    g1 = objective(hi / 2.0)
    g2 = objective(hi)
    denom = g0 - 2.0 * g1 + g2
    if denom <= 0.0:
        raise ValueError("objective is not strictly convex on the probe grid")
    return (hi / 2.0) * (3.0 * g0 - 4.0 * g1 + g2) / (2.0 * denom)
