"""Shared brute-force oracles for the test suite.

Everything here is deliberately naive: dense matrices built by kron, operator
matrices recovered column by column, posterior moments by huge-sample
rejection sampling.  Slow but independent of the library's own shortcuts.
"""

import numpy as np

_P1 = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def kron_pauli(pauli: str) -> np.ndarray:
    """Dense matrix of a Pauli string, qubit 0 as the most significant factor."""
    out = np.array([[1.0 + 0.0j]])
    for ch in pauli:
        out = np.kron(out, _P1[ch])
    return out


def dense_operator(apply_fn, dim: int) -> np.ndarray:
    """Recover the matrix of a linear map by applying it to every basis vector."""
    mat = np.zeros((dim, dim), dtype=complex)
    for j in range(dim):
        basis = np.zeros(dim, dtype=complex)
        basis[j] = 1.0
        mat[:, j] = apply_fn(basis)
    return mat


def brute_posterior_moments(mu, sigma, e, m, theta, n=200_000, seed=0):
    """Posterior mean/std by massive rejection sampling straight from the model."""
    rng = np.random.default_rng(seed)
    cand = rng.normal(mu, sigma, n)
    sign = 1.0 if e == 0 else -1.0
    lik = 0.5 * (1.0 + sign * np.cos(m * (cand - theta)))
    kept = cand[rng.random(n) < lik]
    return float(kept.mean()), float(kept.std(ddof=1))
