"""Shared random-input builders for the test suite."""

import numpy as np

from gammalab.joint_spectrum import MatrixTuple


def rand_complex(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def matrix_poly(coeffs, m):
    """``sum_j coeffs[j] m^j`` by Horner's rule."""
    out = np.zeros_like(m)
    eye = np.eye(m.shape[0])
    for c in coeffs[::-1]:
        out = out @ m + c * eye
    return out


def base_matrix(rng, order, degenerate=False):
    """A random matrix; with ``degenerate`` it has repeated eigenvalues and a Jordan block."""
    if not degenerate:
        return rand_complex(rng, order, order) / np.sqrt(order)
    lam = rand_complex(rng, (order + 1) // 2)
    j = np.diag(np.repeat(lam, 2)[:order])
    j[0, 1] = 1.0  # one Jordan block; later repeats stay semisimple
    w = np.eye(order) + 0.3 * rand_complex(rng, order, order) / np.sqrt(order)
    return w @ j @ np.linalg.inv(w)


def commuting_tuple(seed, degenerate=False):
    """Polynomials (degree <= 3) in one random matrix, with the oracle points.

    Returns ``(MatrixTuple, expected)`` where ``expected`` maps each
    eigenvalue of the base matrix through the polynomials.
    """
    rng = np.random.default_rng(seed)
    order = int(rng.integers(2, 7))
    k = int(rng.integers(1, 5))
    m = base_matrix(rng, order, degenerate)
    polys = [rand_complex(rng, 4) for _ in range(k)]
    mats = [matrix_poly(c, m) for c in polys]
    mu = np.linalg.eigvals(m)
    expected = np.array([[np.polyval(c[::-1], u) for c in polys] for u in mu])
    return MatrixTuple(mats), expected
