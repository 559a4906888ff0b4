import itertools

import numpy as np
import pytest

import levelset as ls


def gram_space_quadform(arms, cu, cv, weights, gamma):
    """Independent oracle for <u, (A + gamma I)^{-1} v>, built in the span of
    the features: coordinates psi_i = Lambda^{1/2} Q^T e_i from the Gram
    eigendecomposition."""
    vals, vecs = np.linalg.eigh(arms.gram)
    vals = np.maximum(vals, 0.0)
    psi = np.sqrt(vals)[:, None] * vecs.T
    n = arms.n_arms
    a_mat = psi @ (np.asarray(weights)[:, None] * psi.T) + gamma * np.eye(n)
    u = psi @ np.asarray(cu)
    v = psi @ np.asarray(cv)
    return float(u @ np.linalg.solve(a_mat, v))


def simplex_grid(n, step):
    """All designs on the n-simplex with coordinates that are multiples of step."""
    ticks = int(round(1.0 / step))
    for combo in itertools.combinations_with_replacement(range(n), ticks):
        w = np.zeros(n)
        for c in combo:
            w[c] += step
        yield w


def random_combo(rng, n, max_terms=3):
    support = rng.choice(n, size=rng.integers(1, min(max_terms, n) + 1), replace=False)
    coeffs = {}
    for i in support:
        c = float(rng.normal())
        if c == 0.0:
            c = 1.0
        coeffs[int(i)] = c
    return ls.FeatureCombo(coeffs)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
