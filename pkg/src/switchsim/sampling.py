"""Random states, unitaries and isometries, all driven by a ``numpy`` Generator."""
from __future__ import annotations

import numpy as np


def as_generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def haar_state(dim: int, rng) -> np.ndarray:
    """Haar-random pure state: a normalised complex Gaussian vector."""
    rng = as_generator(rng)
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_density_matrix(dim: int, rng, rank: int | None = None) -> np.ndarray:
    """Random mixed state from a Ginibre matrix (Hilbert-Schmidt measure for full rank)."""
    rng = as_generator(rng)
    g = rng.normal(size=(dim, rank or dim)) + 1j * rng.normal(size=(dim, rank or dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_isometry(rows: int, cols: int, rng) -> np.ndarray:
    """``rows x cols`` matrix with orthonormal columns, from QR of a complex Gaussian."""
    if rows < cols:
        raise ValueError("an isometry needs rows >= cols")
    rng = as_generator(rng)
    g = rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))
    q, r = np.linalg.qr(g)
    # fix column phases so the distribution is Haar rather than QR-biased
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_unitary(dim: int, rng) -> np.ndarray:
    return random_isometry(dim, dim, rng)
