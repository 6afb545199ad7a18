"""Uhlmann amplitude bundle: amplitudes, the connection, horizontal lifts, Bures speed.

An amplitude for a rank-n state rho is an N x n matrix W with ``W W^dagger = rho``.
Velocities ``Wdot`` split into a vertical part ``W X`` (X skew-Hermitian, the
connection value) and a horizontal remainder.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatch, QSLError, RankTooLarge, SingularGram
from .operator_core import unitary_exp, skew_exp
from .states import DensityOperator, quantum_fisher_information, variance

GRAM_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class Amplitude:
    """N x n matrix W with full-rank, unit-trace Gram matrix ``W^dagger W``."""

    matrix: np.ndarray

    @property
    def reference_rank(self) -> int:
        return self.matrix.shape[1]

    @property
    def gram(self) -> np.ndarray:
        return self.matrix.conj().T @ self.matrix

    def density(self) -> DensityOperator:
        W = self.matrix
        M = W @ W.conj().T
        return DensityOperator(0.5 * (M + M.conj().T))


def make_amplitude(W, tol: float = 1e-10) -> Amplitude:
    W = np.asarray(W, dtype=complex)
    if W.ndim == 1:
        W = W[:, None]
    G = W.conj().T @ W
    if abs(np.trace(G).real - 1.0) > tol:
        raise QSLError("amplitude Gram matrix must have unit trace")
    if np.linalg.eigvalsh(G)[0] < GRAM_FLOOR:
        raise SingularGram("amplitude Gram matrix is rank deficient")
    return Amplitude(W)


def amplitude_of(rho: DensityOperator) -> Amplitude:
    """Canonical amplitude: eigenvectors of the support scaled by ``sqrt(p)``.

    This is ``sqrt(rho)`` composed with an isometry from the n-dimensional
    reference space onto the support of rho, so ``W^dagger W = diag(p)``.
    """
    cols = [F * np.sqrt(p) for p, _, F in rho.nonzero]
    return Amplitude(np.hstack(cols))


def _as_matrix(W) -> np.ndarray:
    return W.matrix if isinstance(W, Amplitude) else np.asarray(W, dtype=complex)


def horizontality_residual(W, Wdot) -> float:
    """``||Wdot^dagger W - W^dagger Wdot||_F``."""
    W, Wdot = _as_matrix(W), np.asarray(Wdot, dtype=complex)
    if W.shape != Wdot.shape:
        raise DimensionMismatch(f"shapes {W.shape} and {Wdot.shape} differ")
    M = Wdot.conj().T @ W
    return float(np.linalg.norm(M - M.conj().T))


def is_horizontal(W, Wdot, tol: float = 1e-9) -> tuple[bool, float]:
    r = horizontality_residual(W, Wdot)
    return r < tol, r


def connection_solve(W, Wdot) -> np.ndarray:
    """Connection value X of a velocity: ``W^+ Wdot - Wdot^+ W = {X, W^+ W}``.

    Solved entrywise in the eigenbasis of the Gram matrix,
    ``X_ab = M_ab / (lambda_a + lambda_b)``.

    Raises:
        SingularGram: if ``W^dagger W`` is (numerically) singular.
    """
    W, Wdot = _as_matrix(W), np.asarray(Wdot, dtype=complex)
    if W.shape != Wdot.shape:
        raise DimensionMismatch(f"shapes {W.shape} and {Wdot.shape} differ")
    G = W.conj().T @ W
    lam, Q = np.linalg.eigh(0.5 * (G + G.conj().T))
    if lam[0] < GRAM_FLOOR:
        raise SingularGram(f"smallest Gram eigenvalue {lam[0]:.3g}")
    M = W.conj().T @ Wdot - Wdot.conj().T @ W
    Mt = Q.conj().T @ M @ Q
    Xt = Mt / (lam[:, None] + lam[None, :])
    X = Q @ Xt @ Q.conj().T
    return 0.5 * (X - X.conj().T)


def bures_speed(H, rho: DensityOperator) -> float:
    """Bures speed of ``-i[H, rho]``, i.e. ``sqrt(F(H, rho) / 4)``."""
    return float(np.sqrt(quantum_fisher_information(H, rho) / 4.0))


class DispersionSplit(NamedTuple):
    variance: float
    bures_speed_sq: float
    vertical_excess_sq: float  # ||W Y||^2, the traceless part of the connection term
    connection: np.ndarray


def dispersion_decomposition(H, rho: DensityOperator) -> DispersionSplit:
    """Split the energy variance into squared Bures speed plus ``||W Y||^2``.

    X is the connection value of ``-i H W``; Y is X with its component along the
    phase direction ``-i * 1`` removed. ``||W X||^2 = tr(X^dagger W^dagger W X)``
    and ``||W Y||^2 = ||W X||^2 - tr(H rho)^2``.
    """
    H = np.asarray(H, dtype=complex)
    if H.shape != rho.matrix.shape:
        raise DimensionMismatch("Hamiltonian and state shapes differ")
    W = amplitude_of(rho).matrix
    X = connection_solve(W, -1j * H @ W)
    G = W.conj().T @ W
    wx2 = float(np.trace(X.conj().T @ G @ X).real)
    mean = float(np.trace(H @ rho.matrix).real)
    wy2 = wx2 - mean**2
    var = variance(H, rho)
    return DispersionSplit(var, var - wy2, wy2, X)


def horizontal_lift(trajectory, schedule, W0: Amplitude | None = None) -> list[Amplitude]:
    """Horizontal lift of a trajectory produced by ``dynamics.evolve``.

    The Schroedinger lift ``W_{k+1} = U_k W_k`` (same midpoint propagators as
    the trajectory) is corrected on the right by ``G_k``, where
    ``G_{k+1} = exp(-X_mid dt) G_k`` and ``X_mid`` is the connection value of
    ``-i H W`` at the step midpoint.
    """
    times = np.asarray(trajectory.times)
    W = (W0 or amplitude_of(trajectory.states[0])).matrix
    n = W.shape[1]
    G = np.eye(n, dtype=complex)
    out = [Amplitude(W.copy())]
    for k in range(len(times) - 1):
        dt = times[k + 1] - times[k]
        Hm = np.asarray(schedule(times[k] + 0.5 * dt), dtype=complex)
        Wm = unitary_exp(Hm, 0.5 * dt) @ W
        X = connection_solve(Wm, -1j * Hm @ Wm)
        W = unitary_exp(Hm, dt) @ W
        G = skew_exp(-X, dt) @ G
        out.append(Amplitude(W @ G))
    return out


def bures_geodesic_hamiltonian(rho0: DensityOperator, beta: float = 1.0) -> np.ndarray:
    """Time-independent H that drives rho0 along a Bures geodesic.

    ``H = sqrt(beta) (K F^dagger + F K^dagger)`` where F frames the support of
    rho0 and K holds the first n kernel eigenvectors, so that H is block
    off-diagonal for the support projector and ``Pi H (1-Pi) H Pi = beta Pi``.

    Raises:
        RankTooLarge: if twice the rank exceeds the dimension.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    n, N = rho0.rank, rho0.dim
    if 2 * n > N:
        raise RankTooLarge(f"rank {n} exceeds half the dimension {N}")
    F = rho0.support_frame
    K = rho0.kernel_frame[:, :n]
    return np.sqrt(beta) * (K @ F.conj().T + F @ K.conj().T)


@dataclass
class TightnessReport:
    max_deviation: float
    saturable: bool
    alphas: np.ndarray
    deviations: np.ndarray


def uhlmann_tightness_check(schedule, trajectory, tol: float = 1e-9) -> TightnessReport:
    """Distance of ``Pi_t H_t Pi_t`` from a scalar multiple of ``Pi_t`` along a trajectory.

    ``Pi_t`` is the support projector of the state at each sample; ``alpha_t``
    is the best scalar ``tr(Pi H Pi) / rank``. A trajectory can saturate the
    Uhlmann bound only where the deviation vanishes.
    """
    alphas, devs = [], []
    for t, rho in zip(trajectory.times, trajectory.states):
        H = np.asarray(schedule(t), dtype=complex)
        Pi = rho.support_projector
        B = Pi @ H @ Pi
        alpha = float(np.trace(B).real) / rho.rank
        alphas.append(alpha)
        devs.append(float(np.linalg.norm(B - alpha * Pi)))
    devs_a = np.array(devs)
    worst = float(devs_a.max()) if devs else 0.0
    return TightnessReport(worst, worst < tol, np.array(alphas), devs_a)
