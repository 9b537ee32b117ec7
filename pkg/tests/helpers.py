"""Shared random-instance generators for the test suite."""

import math

import numpy as np


def gram_matrix(rng, n, r=None):
    """Random PSD matrix as a Gram product; full rank when r >= n."""
    r = n if r is None else r
    basis = rng.normal(size=(n, r))
    return basis @ basis.T / r


def correlation_matrix(rng, n):
    """Random PSD matrix with unit diagonal."""
    m = gram_matrix(rng, n)
    dinv = 1.0 / np.sqrt(np.diagonal(m))
    return m * dinv[:, None] * dinv[None, :]


def diagonal_entries(rng, n, lo=0.2, hi=3.0, margin=0.05):
    """Random positive diagonals, kept away from 1.

    Entries within `margin` of 1 create flat coordinates where the
    maximizer is not unique, which makes x-hat comparisons between the
    closed form and the iterative solver ill-posed.
    """
    out = np.empty(n)
    for i in range(n):
        while True:
            v = math.exp(rng.uniform(math.log(lo), math.log(hi)))
            if abs(v - 1.0) >= margin:
                out[i] = v
                break
    return out


def random_pd_2x2(rng):
    b = rng.normal(size=(2, 2))
    c = b @ b.T + 0.05 * np.eye(2)
    return float(c[0, 0]), float(c[1, 1]), float(c[0, 1])
