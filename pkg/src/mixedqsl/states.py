"""Density operators and the information functionals of an observable.

A :class:`DensityOperator` caches its clustered spectral decomposition. The
functionals (variance, skew information, J, quantum Fisher information) all
take a Hermitian observable as a plain ``ndarray``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatch, NotPSD, TraceNotOne
from .operator_core import (
    PSD_TOL,
    SpectralDecomposition,
    as_square,
    hermitize,
    spectral_decompose,
)

ZERO_REL_TOL = 1e-12
NEG_CLAMP = 1e-12


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """A positive unit-trace matrix with its eigenspace structure.

    Build instances through :func:`validate_density`; the bare constructor
    trusts its input (it is used internally for states produced by unitary
    propagation of an already validated state).
    """

    matrix: np.ndarray

    @cached_property
    def spectrum(self) -> SpectralDecomposition:
        spec = spectral_decompose(self.matrix)
        # eigenvalues below the zero threshold are reported as exactly 0
        pmax = spec.eigenvalues[0]
        vals = np.where(spec.eigenvalues < ZERO_REL_TOL * pmax, 0.0, spec.eigenvalues)
        if np.count_nonzero(vals == 0.0) > 1:
            # several near-zero clusters: fold them into one kernel
            keep = [i for i, v in enumerate(vals) if v > 0.0]
            zero = [i for i, v in enumerate(vals) if v == 0.0]
            F0 = np.hstack([spec.frames[i] for i in zero])
            frames = [spec.frames[i] for i in keep] + [F0]
            return SpectralDecomposition(
                eigenvalues=np.append(vals[keep], 0.0),
                projectors=tuple(F @ F.conj().T for F in frames),
                multiplicities=tuple(F.shape[1] for F in frames),
                frames=tuple(frames),
            )
        return SpectralDecomposition(vals, spec.projectors, spec.multiplicities, spec.frames)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def eigenvalues(self) -> np.ndarray:
        """Distinct eigenvalues, descending."""
        return self.spectrum.eigenvalues

    @property
    def projectors(self) -> tuple:
        return self.spectrum.projectors

    @property
    def multiplicities(self) -> tuple:
        return self.spectrum.multiplicities

    @cached_property
    def rank(self) -> int:
        return int(sum(m for p, m in zip(self.eigenvalues, self.multiplicities) if p > 0))

    @property
    def nonzero(self) -> list[tuple[float, np.ndarray, np.ndarray]]:
        """``(p_j, P_j, F_j)`` for every eigenspace with nonzero eigenvalue."""
        s = self.spectrum
        return [
            (p, P, F)
            for p, P, F in zip(s.eigenvalues, s.projectors, s.frames)
            if p > 0
        ]

    @property
    def is_pure(self) -> bool:
        return self.rank == 1

    @property
    def is_faithful(self) -> bool:
        return self.rank == self.dim

    @cached_property
    def support_projector(self) -> np.ndarray:
        return sum(P for _, P, _ in self.nonzero)

    @cached_property
    def support_frame(self) -> np.ndarray:
        return np.hstack([F for _, _, F in self.nonzero])

    @cached_property
    def kernel_frame(self) -> np.ndarray:
        s = self.spectrum
        if s.eigenvalues[-1] == 0.0:
            return s.frames[-1]
        return np.zeros((self.dim, 0), dtype=complex)

    @cached_property
    def sqrt(self) -> np.ndarray:
        # built from the snapped spectrum so kernel round-off does not leak in as sqrt(eps)
        return sum(np.sqrt(p) * P for p, P, _ in self.nonzero)

    def full_eigenvalues(self) -> np.ndarray:
        """All N eigenvalues (with multiplicity), descending."""
        return np.repeat(self.eigenvalues, self.multiplicities)


def validate_density(M, tol: float = PSD_TOL) -> DensityOperator:
    """Check that M is a density matrix and wrap it.

    Raises:
        NotHermitian, NotPSD, TraceNotOne
    """
    M = hermitize(as_square(M))
    w = np.linalg.eigvalsh(M)
    if w[0] < -tol:
        raise NotPSD(f"density matrix has eigenvalue {w[0]:.3g} < 0")
    tr = float(np.trace(M).real)
    if abs(tr - 1.0) > tol:
        raise TraceNotOne(f"trace is {tr!r}, expected 1")
    return DensityOperator(M)


def pure_state(psi) -> DensityOperator:
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return DensityOperator(np.outer(psi, psi.conj()))


def diagonal_state(p) -> DensityOperator:
    return validate_density(np.diag(np.asarray(p, dtype=float)))


def _check_dims(A: np.ndarray, rho: DensityOperator) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    if A.shape != rho.matrix.shape:
        raise DimensionMismatch(f"observable shape {A.shape} vs state shape {rho.matrix.shape}")
    return A


def _clamp(x: float) -> float:
    # tiny negative values are rounding noise
    if -NEG_CLAMP < x < 0.0:
        return 0.0
    return x


def expectation(A, rho: DensityOperator) -> float:
    A = _check_dims(A, rho)
    return float(np.trace(A @ rho.matrix).real)


class ObservableSplit(NamedTuple):
    horizontal: np.ndarray
    vertical: np.ndarray


def split_observable(A, rho: DensityOperator) -> ObservableSplit:
    """Split A into the part that moves rho and the part that rotates within eigenspaces.

    ``vertical = sum_j P_j A P_j`` over every eigenspace of rho (kernel included);
    ``horizontal = A - vertical``.
    """
    A = _check_dims(A, rho)
    vertical = sum(P @ A @ P for P in rho.projectors)
    return ObservableSplit(A - vertical, vertical)


def horizontal_part(A, rho: DensityOperator) -> np.ndarray:
    return split_observable(A, rho).horizontal


def variance(A, rho: DensityOperator) -> float:
    """``tr(A^2 rho) - tr(A rho)^2``."""
    A = _check_dims(A, rho)
    Ar = A @ rho.matrix
    return _clamp(float(np.trace(A @ Ar).real - np.trace(Ar).real ** 2))


def uncertainty(A, rho: DensityOperator) -> float:
    return float(np.sqrt(max(variance(A, rho), 0.0)))


def skew_information(A, rho: DensityOperator) -> float:
    """Wigner-Yanase skew information ``tr(A^2 rho) - tr(A sqrt(rho) A sqrt(rho))``.

    Evaluated as ``sum_{j<k} (sqrt(p_j) - sqrt(p_k))^2 tr(A P_j A P_k)`` so that
    a commuting A gives exactly zero instead of a rounding residue.
    """
    A = _check_dims(A, rho)
    s = np.sqrt(np.clip(rho.eigenvalues, 0.0, None))
    APs = [A @ P for P in rho.projectors]
    total = 0.0
    for j in range(len(s)):
        for k in range(j + 1, len(s)):
            total += (s[j] - s[k]) ** 2 * np.trace(APs[j] @ APs[k]).real
    return _clamp(float(total))


def skew_information_projector(A, P) -> float:
    """``tr(A^2 P) - tr(A P A P)`` for an orthogonal projector P."""
    A = np.asarray(A, dtype=complex)
    P = np.asarray(P, dtype=complex)
    if A.shape != P.shape:
        raise DimensionMismatch(f"observable shape {A.shape} vs projector shape {P.shape}")
    AP = A @ P
    return _clamp(float(np.trace(A @ AP).real - np.trace(AP @ AP).real))


def j_functional(A, rho: DensityOperator) -> float:
    """Eigenvalue-weighted sum of projector skew informations.

    Only nonzero eigenvalues contribute. Equals the variance of the horizontal
    part of A at rho.
    """
    A = _check_dims(A, rho)
    return _clamp(sum(p * skew_information_projector(A, P) for p, P, _ in rho.nonzero))


def quantum_fisher_information(A, rho: DensityOperator) -> float:
    """``2 sum_{j,k} (p_j - p_k)^2 / (p_j + p_k) tr(A P_j A P_k)``.

    Pairs with ``p_j == p_k`` contribute nothing and are skipped, which also
    avoids 0/0 on the kernel.
    """
    A = _check_dims(A, rho)
    p = rho.eigenvalues
    Ps = rho.projectors
    APs = [A @ P for P in Ps]
    total = 0.0
    for j in range(len(p)):
        for k in range(j + 1, len(p)):
            # the (j,k) and (k,j) terms are equal
            w = (p[j] - p[k]) ** 2 / (p[j] + p[k])
            total += 2.0 * w * np.trace(APs[j] @ APs[k]).real
    return _clamp(2.0 * float(total))
