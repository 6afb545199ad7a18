"""Distances between states and between equal-rank projectors.

Covers the Fubini-Study distance, the Grassmann distance with its principal
angles and explicit geodesics, the eigenvalue-weighted product of Grassmann
distances, the Pluecker (determinant) distance, and the fidelity family:
square-root fidelity, Bures angle, affinity and Wigner-Yanase distance.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, NamedTuple

import numpy as np

from .errors import DimensionMismatch, NotIsospectral, NotProjector, NotPure, RankMismatch
from .operator_core import as_square, hermitize, singular_values, unitary_exp
from .states import DensityOperator

ISOSPECTRAL_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class Projector:
    """Orthogonal projector of rank n on an N-dimensional space."""

    matrix: np.ndarray
    rank: int

    @cached_property
    def frame(self) -> np.ndarray:
        """Orthonormal columns spanning the range (N x n)."""
        w, V = np.linalg.eigh(self.matrix)
        return V[:, np.argsort(w)[::-1][: self.rank]]

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def complement(self) -> "Projector":
        return Projector(np.eye(self.dim) - self.matrix, self.dim - self.rank)


def make_projector(M, tol: float = 1e-10) -> Projector:
    """Validate an idempotent Hermitian matrix and wrap it.

    Raises:
        NotHermitian, NotProjector
    """
    M = hermitize(M)
    if np.linalg.norm(M @ M - M) > tol * max(1.0, np.linalg.norm(M)):
        raise NotProjector("matrix is not idempotent")
    tr = float(np.trace(M).real)
    n = int(round(tr))
    if abs(tr - n) > 1e-8:
        raise NotProjector(f"trace {tr} is not an integer")
    return Projector(M, n)


def projector_from_frame(F) -> Projector:
    F = np.asarray(F, dtype=complex)
    if F.ndim == 1:
        F = F[:, None]
    Q, _ = np.linalg.qr(F)
    return Projector(Q @ Q.conj().T, F.shape[1])


def _as_projector(P) -> Projector:
    return P if isinstance(P, Projector) else make_projector(P)


def _pair(P0, P1) -> tuple[Projector, Projector]:
    P0, P1 = _as_projector(P0), _as_projector(P1)
    if P0.dim != P1.dim:
        raise DimensionMismatch(f"dimensions {P0.dim} and {P1.dim} differ")
    if P0.rank != P1.rank:
        raise RankMismatch(f"ranks {P0.rank} and {P1.rank} differ")
    return P0, P1


def _chord_angle(chord: float) -> float:
    """Great-circle angle on the unit sphere subtending a chord of the given length.

    Equal to ``arccos(1 - chord^2 / 2)`` but accurate when the chord is tiny.
    """
    return float(2.0 * np.arcsin(min(chord / 2.0, 1.0)))


def _aligned_chord(X: np.ndarray, Y: np.ndarray) -> float:
    """``min_U ||X - Y U||_F`` over unitaries, for unit-norm amplitudes X and Y."""
    n = max(X.shape[1], Y.shape[1])
    X = np.pad(X, ((0, 0), (0, n - X.shape[1])))
    Y = np.pad(Y, ((0, 0), (0, n - Y.shape[1])))
    U, _, Vh = np.linalg.svd(X.conj().T @ Y)
    return float(np.linalg.norm(X - Y @ (Vh.conj().T @ U.conj().T)))


def fs_distance_pure(rho0: DensityOperator, rho1: DensityOperator) -> float:
    """``arccos sqrt(tr rho0 rho1)`` between two pure states."""
    if not (rho0.is_pure and rho1.is_pure):
        raise NotPure("Fubini-Study distance needs rank-1 states")
    if rho0.dim != rho1.dim:
        raise DimensionMismatch("states act on different spaces")
    # the phase-aligned chord keeps accuracy near zero distance
    return _chord_angle(_aligned_chord(rho0.nonzero[0][2], rho1.nonzero[0][2]))


def _angles_from_cos_sin(c: np.ndarray, s: np.ndarray, n: int) -> np.ndarray:
    """Angles from the n largest cosines (descending) and n largest sines (ascending).

    ``arccos`` alone loses about sqrt(eps) of absolute accuracy near zero
    angle; pairing each cosine with its sine and using atan2 does not.
    """
    c = np.sort(np.clip(c, 0.0, 1.0))[::-1][:n]
    s = np.sort(np.clip(s, 0.0, 1.0))[::-1][:n][::-1]
    return np.arctan2(s, c)


def grassmann_distance(P0, P1) -> float:
    """Geodesic distance on the Grassmannian of rank-n projectors.

    The spectral form ``sqrt(tr arccos^2 |P0 P1| - (pi^2/4)(N - n))``: the n
    largest singular values of ``P0 P1`` are the principal cosines and the
    remaining N - n vanish, each contributing ``(pi/2)^2``, which the shift
    removes. The cosines are paired with the singular values of
    ``(1 - P0) P1`` (the sines) so that small angles stay accurate.
    """
    P0, P1 = _pair(P0, P1)
    n = P0.rank
    c = singular_values(P0.matrix @ P1.matrix)
    s = singular_values((np.eye(P0.dim) - P0.matrix) @ P1.matrix)
    return float(np.linalg.norm(_angles_from_cos_sin(c, s, n)))


def grassmann_distance_frames(F0, F1) -> float:
    """``sqrt(tr arccos^2 |F0^dagger F1|)`` for orthonormal frames."""
    F0, F1 = np.asarray(F0), np.asarray(F1)
    M = F0.conj().T @ F1
    c = singular_values(M)
    s = singular_values(F1 - F0 @ M)
    return float(np.linalg.norm(_angles_from_cos_sin(c, s, F1.shape[1])))


class _PrincipalData(NamedTuple):
    angles: np.ndarray  # ascending order, aligned with the columns below
    A: np.ndarray  # principal vectors in range(P0)
    B: np.ndarray  # principal vectors in range(P1)
    C: np.ndarray  # unit directions in range(1 - P0), columns with angle 0 are zero


def _principal_data(P0: Projector, P1: Projector) -> _PrincipalData:
    F0, F1 = P0.frame, P1.frame
    U, s, Vh = np.linalg.svd(F0.conj().T @ F1)
    A = F0 @ U
    B = F1 @ Vh.conj().T
    R = B - A * s  # component of each b_k orthogonal to range(P0)
    r = np.linalg.norm(R, axis=0)
    angles = np.arctan2(r, np.clip(s, 0.0, None))
    C = np.zeros_like(R)
    nz = r > 1e-14
    C[:, nz] = R[:, nz] / r[nz]
    return _PrincipalData(angles, A, B, C)


def principal_angles(P0, P1) -> np.ndarray:
    """Principal angles between the ranges of two equal-rank projectors, descending.

    The cosines are the singular values of ``F0^dagger F1``. Angles are taken
    as ``atan2(sin, cos)`` so that small angles keep full relative accuracy.
    """
    P0, P1 = _pair(P0, P1)
    return np.sort(_principal_data(P0, P1).angles)[::-1]


class GrassmannGeodesic(NamedTuple):
    hamiltonian: np.ndarray
    curve: Callable[[float], np.ndarray]


def grassmann_geodesic(P0, P1) -> GrassmannGeodesic:
    """Shortest geodesic ``t -> exp(-iHt) P0 exp(iHt)`` with ``curve(1) = P1``.

    H is block off-diagonal with respect to P0 and rotates each principal
    vector of P0 onto its partner in P1 by its principal angle. Directions
    shared by both ranges (angle 0) and by both kernels are left alone, which
    is the common-invariant-subspace reduction needed when 2n > N.
    """
    P0, P1 = _pair(P0, P1)
    data = _principal_data(P0, P1)
    H = np.zeros((P0.dim, P0.dim), dtype=complex)
    for k, xi in enumerate(data.angles):
        if xi <= 1e-15:
            continue
        a, c = data.A[:, k], data.C[:, k]
        # exp(-iHt) a = cos(xi t) a + sin(xi t) c
        H += 1j * xi * (np.outer(c, a.conj()) - np.outer(a, c.conj()))
    P0m = P0.matrix

    def curve(t: float) -> np.ndarray:
        U = unitary_exp(H, t)
        return U @ P0m @ U.conj().T

    return GrassmannGeodesic(H, curve)


def plucker_distance(P0, P1) -> float:
    """``arccos |det F0^dagger F1|``: Fubini-Study distance of the Pluecker images."""
    P0, P1 = _pair(P0, P1)
    # 1 - prod cos^2 via expm1/log1p, so that small angles are not lost against 1
    theta = _principal_data(P0, P1).angles
    with np.errstate(divide="ignore"):
        sin2 = -np.expm1(np.sum(np.log1p(-np.sin(theta) ** 2)))
    return float(np.arctan2(np.sqrt(max(sin2, 0.0)), np.prod(np.cos(theta))))


def check_isospectral(rho0: DensityOperator, rho1: DensityOperator, tol: float = ISOSPECTRAL_TOL) -> None:
    """Raise NotIsospectral unless both states share eigenvalues and multiplicities."""
    if rho0.dim != rho1.dim:
        raise DimensionMismatch("states act on different spaces")
    if rho0.multiplicities != rho1.multiplicities or np.any(
        np.abs(rho0.eigenvalues - rho1.eigenvalues) > tol
    ):
        raise NotIsospectral(
            f"spectra differ: {rho0.full_eigenvalues()} vs {rho1.full_eigenvalues()}"
        )


def is_isospectral(rho0: DensityOperator, rho1: DensityOperator, tol: float = ISOSPECTRAL_TOL) -> bool:
    try:
        check_isospectral(rho0, rho1, tol)
    except (NotIsospectral, DimensionMismatch):
        return False
    return True


def eigenspace_pairs(rho0: DensityOperator, rho1: DensityOperator):
    """``(p_j, P_{j;0}, P_{j;1})`` for the nonzero eigenvalues of an isospectral pair."""
    check_isospectral(rho0, rho1)
    return [
        (p, Projector(a, m), Projector(b, m))
        for (p, a, b, m) in zip(
            rho0.eigenvalues, rho0.projectors, rho1.projectors, rho0.multiplicities
        )
        if p > 0
    ]


def product_grassmann_distance(rho0: DensityOperator, rho1: DensityOperator) -> float:
    """``sqrt(sum_j p_j dist_G(P_{j;0}, P_{j;1})^2)`` over nonzero eigenvalues, via principal angles."""
    total = sum(p * np.sum(_principal_data(A, B).angles ** 2) for p, A, B in eigenspace_pairs(rho0, rho1))
    return float(np.sqrt(total))


def product_plucker_distance(rho0: DensityOperator, rho1: DensityOperator) -> float:
    total = sum(p * plucker_distance(A, B) ** 2 for p, A, B in eigenspace_pairs(rho0, rho1))
    return float(np.sqrt(total))


def _same_dim(rho0: DensityOperator, rho1: DensityOperator) -> None:
    if rho0.dim != rho1.dim:
        raise DimensionMismatch(f"dimensions {rho0.dim} and {rho1.dim} differ")


def _support_amplitude(rho: DensityOperator) -> np.ndarray:
    return np.hstack([F * np.sqrt(p) for p, _, F in rho.nonzero])


def fidelity_sqrt(rho0: DensityOperator, rho1: DensityOperator) -> float:
    """Square root of the fidelity, ``tr|sqrt(rho0) sqrt(rho1)|``.

    Evaluated as the sum of singular values of ``W0^dagger W1`` for the
    support amplitudes ``W = F sqrt(p)``. Singular values are perturbed only
    by rounding of order eps, whereas ``tr sqrt(sqrt(rho0) rho1 sqrt(rho0))``
    takes square roots of near-zero eigenvalues for rank-deficient states.
    """
    _same_dim(rho0, rho1)
    M = _support_amplitude(rho0).conj().T @ _support_amplitude(rho1)
    return float(np.clip(np.sum(singular_values(M)), 0.0, 1.0))


def bures_angle(rho0: DensityOperator, rho1: DensityOperator) -> float:
    """``arccos tr|sqrt(rho0) sqrt(rho1)|``, from the Bures chord between aligned amplitudes."""
    _same_dim(rho0, rho1)
    return _chord_angle(_aligned_chord(_support_amplitude(rho0), _support_amplitude(rho1)))


def affinity(rho0: DensityOperator, rho1: DensityOperator) -> float:
    """``tr(sqrt(rho0) sqrt(rho1))``."""
    _same_dim(rho0, rho1)
    return float(np.clip(np.trace(rho0.sqrt @ rho1.sqrt).real, 0.0, 1.0))


def wy_distance(rho0: DensityOperator, rho1: DensityOperator) -> float:
    """Wigner-Yanase distance ``arccos tr(sqrt(rho0) sqrt(rho1))``."""
    _same_dim(rho0, rho1)
    return _chord_angle(float(np.linalg.norm(rho0.sqrt - rho1.sqrt)))


def as_projector(P) -> Projector:
    """Public coercion of a matrix or Projector into a validated Projector."""
    return _as_projector(as_square(P) if not isinstance(P, Projector) else P)
