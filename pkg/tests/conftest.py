"""Shared oracles kept independent of the library's evaluation paths."""

import numpy as np
import pytest


def cheb_monomial_table(d):
    """Monomial coefficients of T_0..T_d via the recurrence, (d+1, d+1)."""
    table = np.zeros((d + 1, d + 1))
    table[0, 0] = 1.0
    if d >= 1:
        table[1, 1] = 1.0
    for k in range(1, d):
        table[k + 1, 1:] = 2.0 * table[k, :-1]
        table[k + 1] -= table[k - 1]
    return table


def tensor_cheb_to_monomial(coeffs):
    """Convert a tensor Chebyshev coefficient array to the monomial basis."""
    c = np.asarray(coeffs, dtype=float)
    d = c.shape[0] - 1
    table = cheb_monomial_table(d)
    for axis in range(c.ndim):
        c = np.tensordot(c, table, axes=([axis], [0]))
        c = np.moveaxis(c, -1, axis)
    return c


def horner_eval(mono, x):
    """Evaluate a dense monomial tensor at one point by nested Horner."""
    c = np.asarray(mono, dtype=float)
    for xi in reversed(x):
        acc = c[..., -1]
        for k in range(c.shape[-1] - 2, -1, -1):
            acc = acc * xi + c[..., k]
        c = acc
    return float(c)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
