"""Dense linear-algebra primitives for small complex matrices.

Spectral decomposition with eigenvalue clustering, spectral calculus, the
polar absolute value and midpoint time-ordered exponentials. Everything here
is a pure function of its arguments.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DimensionMismatch, NotHermitian, NotPSD

EPS = np.finfo(float).eps
HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-10


def as_square(A) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def hermitize(A, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Return ``(A + A^dagger) / 2`` after checking that A is Hermitian.

    The tolerance is relative: ``||A - A^dagger||_F <= tol * max(1, ||A||_F)``.
    """
    A = as_square(A)
    defect = np.linalg.norm(A - A.conj().T)
    if defect > tol * max(1.0, np.linalg.norm(A)):
        raise NotHermitian(f"matrix is not Hermitian (||A - A^+||_F = {defect:.3g})")
    return 0.5 * (A + A.conj().T)


def dagger(A: np.ndarray) -> np.ndarray:
    return A.conj().T


def commutator(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return A @ B - B @ A


def anticommutator(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return A @ B + B @ A


@dataclass(frozen=True)
class SpectralDecomposition:
    """Distinct eigenvalues (descending) with their eigenspace projectors.

    ``frames[j]`` holds orthonormal eigenvector columns spanning the range of
    ``projectors[j]``.
    """

    eigenvalues: np.ndarray
    projectors: tuple
    multiplicities: tuple
    frames: tuple

    def __len__(self) -> int:
        return len(self.eigenvalues)

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]

    def reconstruct(self) -> np.ndarray:
        return sum(lam * P for lam, P in zip(self.eigenvalues, self.projectors))


def cluster_sorted(values: np.ndarray, tol: float) -> list[list[int]]:
    """Single-linkage clustering of descending values: neighbours closer than tol merge."""
    groups: list[list[int]] = []
    for i, v in enumerate(values):
        if groups and values[groups[-1][-1]] - v <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def default_cluster_tol(A: np.ndarray) -> float:
    return 1e-9 * max(1.0, np.linalg.norm(A, 2))


def spectral_decompose(A, cluster_tol: float | None = None) -> SpectralDecomposition:
    """Decompose a Hermitian matrix into distinct eigenvalues and eigenprojectors.

    Eigenvalues within ``cluster_tol`` of their neighbour are merged into one
    eigenspace whose eigenvalue is the cluster mean.

    Raises:
        NotHermitian: if ``A`` is not Hermitian within tolerance.
    """
    A = hermitize(A)
    if cluster_tol is None:
        cluster_tol = default_cluster_tol(A)
    w, V = np.linalg.eigh(A)
    order = np.argsort(w)[::-1]
    w, V = w[order], V[:, order]
    values, projectors, mults, frames = [], [], [], []
    for group in cluster_sorted(w, cluster_tol):
        F = V[:, group]
        values.append(float(np.mean(w[group])))
        projectors.append(F @ F.conj().T)
        mults.append(len(group))
        frames.append(F)
    return SpectralDecomposition(
        eigenvalues=np.array(values),
        projectors=tuple(projectors),
        multiplicities=tuple(mults),
        frames=tuple(frames),
    )


def operator_function(A, f: Callable[[np.ndarray], np.ndarray], tol: float = PSD_TOL) -> np.ndarray:
    """Apply a scalar function to a positive semidefinite matrix by spectral calculus.

    Eigenvalues in ``(-tol, 0)`` are clamped to zero before ``f`` is applied.

    Raises:
        NotPSD: if an eigenvalue lies below ``-tol``.
    """
    A = hermitize(A)
    w, V = np.linalg.eigh(A)
    if w[0] < -tol:
        raise NotPSD(f"matrix has eigenvalue {w[0]:.3g} < 0")
    w = np.clip(w, 0.0, None)
    fw = np.asarray(f(w), dtype=complex)
    return (V * fw) @ V.conj().T


def psd_sqrt(A, tol: float = PSD_TOL) -> np.ndarray:
    return operator_function(A, np.sqrt, tol)


def singular_values(A) -> np.ndarray:
    return np.linalg.svd(np.asarray(A, dtype=complex), compute_uv=False)


def polar_absolute(A) -> np.ndarray:
    """``|A| = sqrt(A A^dagger)``, computed from the SVD of A."""
    U, s, _ = np.linalg.svd(as_square(A))
    return (U * s) @ U.conj().T


def clamped_arccos(x):
    return np.arccos(np.clip(x, -1.0, 1.0))


def unitary_exp(H: np.ndarray, t: float) -> np.ndarray:
    """``exp(-i H t)`` for Hermitian ``H``; exactly unitary up to rounding."""
    w, V = np.linalg.eigh(0.5 * (H + H.conj().T))
    return (V * np.exp(-1j * w * t)) @ V.conj().T


def skew_exp(K: np.ndarray, t: float) -> np.ndarray:
    """``exp(K t)`` for skew-Hermitian ``K``."""
    return unitary_exp(1j * K, t)


def time_ordered_exponential(
    generator: Callable[[float], np.ndarray],
    t0: float,
    t1: float,
    steps: int,
) -> np.ndarray:
    """Midpoint approximation of ``T exp(int_{t0}^{t1} K(t) dt)`` for skew-Hermitian K.

    Later times multiply from the left. Each factor is an exact unitary, so the
    product stays unitary to rounding error; the scheme is second order in the
    step size.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if t1 < t0:
        raise ValueError("t1 must be >= t0")
    dt = (t1 - t0) / steps
    U = None
    for k in range(steps):
        step = skew_exp(np.asarray(generator(t0 + (k + 0.5) * dt), dtype=complex), dt)
        U = step if U is None else step @ U
    return U
