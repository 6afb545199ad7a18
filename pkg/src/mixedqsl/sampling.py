"""Random unitaries, observables, states and projectors for tests and sweeps."""

from __future__ import annotations

import numpy as np
from scipy.stats import unitary_group

from .states import DensityOperator


def _rng(rng) -> np.random.Generator:
    return rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)


def random_unitary(N: int, rng=None) -> np.ndarray:
    """Haar-random unitary."""
    return unitary_group.rvs(N, random_state=_rng(rng)) if N > 1 else np.exp(
        2j * np.pi * _rng(rng).random()
    ).reshape(1, 1)


def random_hermitian(N: int, rng=None, scale: float = 1.0) -> np.ndarray:
    rng = _rng(rng)
    Z = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    return scale * 0.5 * (Z + Z.conj().T)


def random_spectrum(N: int, rank: int | None = None, rng=None) -> np.ndarray:
    """Descending probability vector with ``rank`` nonzero entries (flat Dirichlet)."""
    rng = _rng(rng)
    rank = N if rank is None else rank
    p = np.zeros(N)
    p[:rank] = rng.dirichlet(np.ones(rank))
    return np.sort(p)[::-1]


def state_with_spectrum(p, U: np.ndarray) -> DensityOperator:
    M = (U * np.asarray(p, dtype=float)) @ U.conj().T
    return DensityOperator(0.5 * (M + M.conj().T))


def random_density(N: int, rank: int | None = None, rng=None) -> DensityOperator:
    rng = _rng(rng)
    return state_with_spectrum(random_spectrum(N, rank, rng), random_unitary(N, rng))


def random_isospectral_pair(N: int, rank: int | None = None, rng=None):
    rng = _rng(rng)
    p = random_spectrum(N, rank, rng)
    return state_with_spectrum(p, random_unitary(N, rng)), state_with_spectrum(p, random_unitary(N, rng))


def random_projector(N: int, n: int, rng=None) -> np.ndarray:
    F = random_unitary(N, rng)[:, :n]
    return F @ F.conj().T
