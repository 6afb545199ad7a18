"""Von Neumann evolution, trajectory functionals and geodesics of the isospectral metric.

Evolution uses fixed-step midpoint unitaries, so the spectrum of the state is
preserved to rounding error. Geodesics of the metric whose speed is the
uncertainty of the horizontal Hamiltonian are integrated in the Heisenberg
picture and matched to a target state by shooting.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import linalg, optimize

from .errors import (
    Degenerate,
    EmptyTrajectory,
    NotHorizontal,
    NotInvolution,
    NotPure,
    QSLError,
    UnknownMetric,
)
from .geometry import check_isospectral, product_grassmann_distance
from .operator_core import hermitize, unitary_exp
from .states import (
    DensityOperator,
    horizontal_part,
    j_functional,
    quantum_fisher_information,
    skew_information,
    uncertainty,
)

log = logging.getLogger(__name__)

METRICS = ("fs", "grassmann", "bures", "wy", "gp")


@dataclass
class HamiltonianSchedule:
    """Time-dependent Hermitian generator ``t -> H_t``."""

    evaluator: Callable[[float], np.ndarray]
    kind: str = "closed-form"

    def __call__(self, t: float) -> np.ndarray:
        return np.asarray(self.evaluator(t), dtype=complex)

    @classmethod
    def constant(cls, H) -> "HamiltonianSchedule":
        H = hermitize(H)
        return cls(lambda t: H, "constant")

    @classmethod
    def piecewise(cls, knots: Sequence[float], hamiltonians: Sequence) -> "HamiltonianSchedule":
        """Hold ``hamiltonians[k]`` on ``[knots[k], knots[k+1])``; the last one holds onward."""
        knots = np.asarray(knots, dtype=float)
        if len(knots) != len(hamiltonians) or len(knots) == 0:
            raise ValueError("need one Hamiltonian per knot")
        if np.any(np.diff(knots) <= 0):
            raise ValueError("knots must be strictly increasing")
        mats = [hermitize(H) for H in hamiltonians]

        def evaluator(t: float) -> np.ndarray:
            k = int(np.searchsorted(knots, t, side="right")) - 1
            return mats[min(max(k, 0), len(mats) - 1)]

        return cls(evaluator, "piecewise")


@dataclass
class Trajectory:
    times: np.ndarray
    states: list
    hamiltonians: list
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def duration(self) -> float:
        return float(self.times[-1] - self.times[0])

    @property
    def final(self) -> DensityOperator:
        return self.states[-1]


def _propagate(rho: np.ndarray, U: np.ndarray) -> np.ndarray:
    M = U @ rho @ U.conj().T
    return 0.5 * (M + M.conj().T)


def evolve(
    rho0: DensityOperator,
    schedule: HamiltonianSchedule | Callable[[float], np.ndarray],
    t0: float,
    t1: float,
    steps: int = 4096,
) -> Trajectory:
    """Integrate ``rho' = -i[H_t, rho]`` with midpoint unitaries ``exp(-i H_mid dt)``."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    times = np.linspace(t0, t1, steps + 1)
    dt = (t1 - t0) / steps
    rho = rho0.matrix
    states = [rho0]
    hams = [np.asarray(schedule(times[0]), dtype=complex)]
    for k in range(steps):
        U = unitary_exp(np.asarray(schedule(times[k] + 0.5 * dt), dtype=complex), dt)
        rho = _propagate(rho, U)
        states.append(DensityOperator(rho))
        hams.append(np.asarray(schedule(times[k + 1]), dtype=complex))
    return Trajectory(times, states, hams)


def _trapezoid_mean(times: np.ndarray, values: np.ndarray) -> float:
    if len(times) == 1:
        return float(values[0])
    return float(np.trapezoid(values, times) / (times[-1] - times[0]))


def average_energy_uncertainty(traj: Trajectory) -> float:
    """Time average of ``Delta(H_t, rho_t)`` by the trapezoidal rule."""
    if len(traj) == 0:
        raise EmptyTrajectory("trajectory has no samples")
    vals = np.array([uncertainty(H, r) for H, r in zip(traj.hamiltonians, traj.states)])
    return _trapezoid_mean(np.asarray(traj.times), vals)


def average_sqrt_qfi(traj: Trajectory) -> float:
    """Time average of ``sqrt(F(H_t, rho_t))``."""
    if len(traj) == 0:
        raise EmptyTrajectory("trajectory has no samples")
    vals = np.array(
        [np.sqrt(quantum_fisher_information(H, r)) for H, r in zip(traj.hamiltonians, traj.states)]
    )
    return _trapezoid_mean(np.asarray(traj.times), vals)


def metric_speed(rho: DensityOperator, H, metric: str) -> float:
    """Speed of ``-i[H, rho]`` under one of the metrics.

    ``fs``: Fubini-Study on pure states, ``Delta(H, rho)``.
    ``grassmann``: weighted product of Grassmann metrics, ``sqrt(J(H, rho))``.
    ``bures``: ``sqrt(F / 4)``.
    ``wy``: Wigner-Yanase on faithful states, ``sqrt(2 I(H, rho))``.
    ``gp``: isospectral metric, ``Delta(H^h, rho)``.
    """
    if metric == "fs":
        if not rho.is_pure:
            raise NotPure("Fubini-Study speed needs a pure state")
        return uncertainty(H, rho)
    if metric == "grassmann":
        return float(np.sqrt(j_functional(H, rho)))
    if metric == "bures":
        return float(np.sqrt(quantum_fisher_information(H, rho) / 4.0))
    if metric == "wy":
        if not rho.is_faithful:
            raise QSLError("Wigner-Yanase speed needs a faithful state")
        return float(np.sqrt(2.0 * skew_information(H, rho)))
    if metric == "gp":
        return uncertainty(horizontal_part(H, rho), rho)
    raise UnknownMetric(f"unknown metric {metric!r}; choose from {METRICS}")


def curve_length(traj: Trajectory, metric: str) -> float:
    """Trapezoidal integral of ``metric_speed`` along the trajectory."""
    if len(traj) < 2:
        return 0.0
    v = np.array([metric_speed(r, H, metric) for r, H in zip(traj.states, traj.hamiltonians)])
    return float(np.trapezoid(v, traj.times))


def involution_hamiltonian(rho0: DensityOperator, sigma: Sequence[int]) -> np.ndarray:
    """Hamiltonian swapping the eigenvectors of rho0 paired by an involution.

    ``sigma`` permutes the eigenvector indices ``0..N-1`` (eigenvalues in
    descending order). One term ``i(|u_s><u_j| - |u_j><u_s|)`` is added per
    2-cycle ``(j, s)``; evolving for ``pi/2`` applies the permutation.
    """
    sigma = list(sigma)
    N = rho0.dim
    if sorted(sigma) != list(range(N)):
        raise NotInvolution("sigma is not a permutation of 0..N-1")
    if any(sigma[sigma[j]] != j for j in range(N)):
        raise NotInvolution("sigma squared is not the identity")
    if any(m != 1 for m in rho0.multiplicities):
        raise Degenerate("rho0 must be nondegenerate")
    u = np.hstack(rho0.spectrum.frames)
    H = np.zeros((N, N), dtype=complex)
    for j, s in enumerate(sigma):
        if j < s:
            H += 1j * (np.outer(u[:, s], u[:, j].conj()) - np.outer(u[:, j], u[:, s].conj()))
    return H


def parallel_transport_projection(
    schedule: HamiltonianSchedule, trajectory: Trajectory
) -> HamiltonianSchedule:
    """Replace ``H_t`` by its horizontal part relative to the state it drives.

    Off-grid times use the state propagated from the preceding sample.
    """
    times = np.asarray(trajectory.times)
    states = trajectory.states

    def state_at(t: float) -> DensityOperator:
        k = int(np.clip(np.searchsorted(times, t, side="right") - 1, 0, len(times) - 1))
        if t == times[k]:
            return states[k]
        dt = t - times[k]
        U = unitary_exp(schedule(times[k] + 0.5 * dt), dt)
        return DensityOperator(_propagate(states[k].matrix, U))

    def evaluator(t: float) -> np.ndarray:
        return horizontal_part(schedule(t), state_at(t))

    return HamiltonianSchedule(evaluator, "parallel-transporting")


# -- geodesics of the isospectral metric ---------------------------------------------


class _EigenFrame:
    """Eigenbasis of rho0 with the block structure used by the Heisenberg geodesic equation."""

    def __init__(self, rho0: DensityOperator):
        spec = rho0.spectrum
        self.rho0 = rho0
        self.V = np.hstack(spec.frames)
        self.p = np.repeat(spec.eigenvalues, spec.multiplicities)
        labels = np.repeat(np.arange(len(spec.eigenvalues)), spec.multiplicities)
        self.offblock = labels[:, None] != labels[None, :]
        pj, pk = self.p[:, None], self.p[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            coef = 1j * (pk - pj) / (pk + pj)
        self.coef = np.where(self.offblock, coef, 0.0)
        iu = np.triu_indices(len(self.p), 1)
        keep = self.offblock[iu]
        self.param_rows, self.param_cols = iu[0][keep], iu[1][keep]

    @property
    def n_params(self) -> int:
        return 2 * len(self.param_rows)

    def to_eigen(self, A: np.ndarray) -> np.ndarray:
        return self.V.conj().T @ A @ self.V

    def from_eigen(self, At: np.ndarray) -> np.ndarray:
        return self.V @ At @ self.V.conj().T

    def pack(self, At: np.ndarray) -> np.ndarray:
        z = At[self.param_rows, self.param_cols]
        return np.concatenate([z.real, z.imag])

    def unpack(self, x: np.ndarray) -> np.ndarray:
        m = len(self.param_rows)
        At = np.zeros(self.offblock.shape, dtype=complex)
        At[self.param_rows, self.param_cols] = x[:m] + 1j * x[m:]
        return At + At.conj().T

    def rhs(self, Ht: np.ndarray) -> np.ndarray:
        return self.coef * (Ht @ Ht)

    def speed(self, Ht: np.ndarray) -> float:
        # Delta of a horizontal operator: its mean vanishes
        return float(np.sqrt(max(np.sum(self.p * np.sum(np.abs(Ht) ** 2, axis=1)), 0.0)))


def _nearest_unitary(U: np.ndarray) -> np.ndarray:
    u, _, vh = np.linalg.svd(U)
    return u @ vh


def _integrate_heisenberg(frame: _EigenFrame, H0t: np.ndarray, T: float, steps: int, keep_path: bool):
    """Joint RK4 for the Heisenberg Hamiltonian and its propagator ``dU/dt = -i U H``.

    Works in the eigenbasis of rho0. Vertical blocks are re-zeroed after each
    step; U is projected back onto the unitaries at every stored sample and at
    the end. Returns ``U_T``, the trapezoidal length (only when ``keep_path``)
    and, optionally, the samples ``(U_k, H_k)``.
    """
    dt = T / steps
    H = H0t.copy()
    U = np.eye(len(frame.p), dtype=complex)
    path = [(U.copy(), H.copy())] if keep_path else None
    speeds = [frame.speed(H)] if keep_path else None
    mask = frame.offblock
    coef = frame.coef
    for _ in range(steps):
        a1 = coef * (H @ H)
        b1 = -1j * (U @ H)
        Ha = H + 0.5 * dt * a1
        a2 = coef * (Ha @ Ha)
        b2 = -1j * ((U + 0.5 * dt * b1) @ Ha)
        Hb = H + 0.5 * dt * a2
        a3 = coef * (Hb @ Hb)
        b3 = -1j * ((U + 0.5 * dt * b2) @ Hb)
        Hc = H + dt * a3
        a4 = coef * (Hc @ Hc)
        b4 = -1j * ((U + dt * b3) @ Hc)
        H = H + (dt / 6.0) * (a1 + 2 * a2 + 2 * a3 + a4)
        H = 0.5 * (H + H.conj().T) * mask
        U = U + (dt / 6.0) * (b1 + 2 * b2 + 2 * b3 + b4)
        if keep_path:
            U = _nearest_unitary(U)
            path.append((U.copy(), H.copy()))
            speeds.append(frame.speed(H))
    U = _nearest_unitary(U)
    length = float(np.trapezoid(speeds, dx=dt)) if keep_path else float("nan")
    return U, length, path


def gp_geodesic_shoot(
    rho0: DensityOperator,
    A0,
    T: float,
    steps: int = 4096,
    tol: float = 1e-9,
) -> Trajectory:
    """Geodesic of the isospectral metric leaving rho0 with horizontal velocity ``-i[A0, rho0]``.

    In the eigenbasis of rho0 the horizontal Heisenberg Hamiltonian obeys
    ``dH_jk/dt = i (p_k - p_j)/(p_k + p_j) (H^2)_jk`` on off-diagonal blocks;
    then ``dU/dt = -i U H`` and the Schroedinger Hamiltonian is ``U H U^dagger``.

    Raises:
        NotHorizontal: if A0 has a vertical part larger than ``tol``.
    """
    frame = _EigenFrame(rho0)
    A0t = frame.to_eigen(hermitize(A0))
    vert = np.linalg.norm(A0t * ~frame.offblock)
    if vert > tol * max(1.0, np.linalg.norm(A0t)):
        raise NotHorizontal(f"initial Hamiltonian has vertical part of norm {vert:.3g}")
    A0t = A0t * frame.offblock
    _, length, path = _integrate_heisenberg(frame, A0t, T, steps, keep_path=True)
    times = np.linspace(0.0, T, steps + 1)
    rho0t = np.diag(frame.p).astype(complex)
    states, hams = [], []
    for U, Ht in path:
        Us = frame.V @ U
        states.append(DensityOperator(_propagate(rho0t, Us)))
        hams.append(frame.from_eigen(U @ Ht @ U.conj().T))
    return Trajectory(times, states, hams, meta={"length": length, "speed": frame.speed(A0t)})


def geodesic_residual(traj: Trajectory) -> np.ndarray:
    """Norm of ``(H' - iH^2) rho + rho (H' + iH^2)`` at interior samples (central differences)."""
    t, Hs = np.asarray(traj.times), traj.hamiltonians
    out = []
    for k in range(1, len(t) - 1):
        Hd = (Hs[k + 1] - Hs[k - 1]) / (t[k + 1] - t[k - 1])
        H2 = Hs[k] @ Hs[k]
        rho = traj.states[k].matrix
        out.append(np.linalg.norm((Hd - 1j * H2) @ rho + rho @ (Hd + 1j * H2)))
    return np.array(out)


@dataclass
class GeodesicSearch:
    lower: float
    upper: float
    converged: bool
    defect: float
    best_T: float
    hamiltonian0: np.ndarray | None
    trajectory: Trajectory | None
    lengths: list = field(default_factory=list)


def _aligned_unitary(rho0: DensityOperator, rho1: DensityOperator) -> np.ndarray:
    """Unitary V with ``V rho0 V^dagger = rho1``, each eigenframe rotated as little as possible."""
    N = rho0.dim
    V = np.zeros((N, N), dtype=complex)
    for F0, F1 in zip(rho0.spectrum.frames, rho1.spectrum.frames):
        M = F0.conj().T @ F1
        u, s, vh = np.linalg.svd(M)
        R = vh.conj().T @ u.conj().T
        V += F1 @ R @ F0.conj().T
    u, _, vh = np.linalg.svd(V)
    return u @ vh


def _log_hamiltonian(V: np.ndarray) -> np.ndarray:
    """Hermitian H with ``exp(-iH) = V`` and spectrum in ``(-pi, pi]``."""
    T, Q = linalg.schur(V, output="complex")  # V is normal, so T is diagonal
    theta = -np.angle(np.diag(T))
    H = (Q * theta) @ Q.conj().T
    return 0.5 * (H + H.conj().T)


def connecting_path_length(rho0: DensityOperator, rho1: DensityOperator, steps: int = 512) -> float:
    """Isospectral-metric length of the constant-Hamiltonian path ``exp(-iH)`` from rho0 to rho1.

    Any connecting curve is an upper bound for the geodesic distance; this one
    is cheap and always available.
    """
    H = _log_hamiltonian(_aligned_unitary(rho0, rho1))
    traj = evolve(rho0, HamiltonianSchedule.constant(H), 0.0, 1.0, steps)
    return curve_length(traj, "gp")


def gp_distance_numeric(
    rho0: DensityOperator,
    rho1: DensityOperator,
    restarts: int = 8,
    steps: int = 128,
    max_iter: int = 200,
    seed: int = 0,
    endpoint_tol: float = 1e-6,
    trajectory_steps: int = 2048,
) -> GeodesicSearch:
    """Bracket the isospectral-metric distance between two states.

    ``lower`` is the product Grassmann distance. ``upper`` is the shortest
    geodesic found by shooting from rho0 (Levenberg-Marquardt on the endpoint
    defect over the initial horizontal Hamiltonian, with a simplex search as
    fallback when it stalls), or the length
    of the constant-Hamiltonian connecting path when that is shorter or no
    shot reaches rho1 within ``endpoint_tol``.
    """
    check_isospectral(rho0, rho1)
    lower = product_grassmann_distance(rho0, rho1)
    fallback = connecting_path_length(rho0, rho1)
    if np.linalg.norm(rho0.matrix - rho1.matrix) < endpoint_tol or fallback == 0.0:
        return GeodesicSearch(lower, max(fallback, lower), True, 0.0, 0.0, None, None, [])

    frame = _EigenFrame(rho0)
    rho0t = np.diag(frame.p).astype(complex)
    target = frame.to_eigen(rho1.matrix)

    def residual(x: np.ndarray, nsteps: int = steps) -> np.ndarray:
        U, _, _ = _integrate_heisenberg(frame, frame.unpack(x), 1.0, nsteps, keep_path=False)
        D = _propagate(rho0t, U) - target
        iu = np.triu_indices(len(frame.p))
        return np.concatenate([D[iu].real, D[iu].imag])

    rng = np.random.default_rng(seed)
    x_aligned = frame.pack(frame.to_eigen(_log_hamiltonian(_aligned_unitary(rho0, rho1))))
    scale = max(np.linalg.norm(x_aligned), 1.0) / np.sqrt(max(frame.n_params, 1))
    seeds = [x_aligned]
    for r in range(1, restarts):
        if r % 2:
            seeds.append(x_aligned + 0.5 * scale * rng.standard_normal(frame.n_params))
        else:
            seeds.append(scale * rng.standard_normal(frame.n_params))

    best = None
    lengths = []
    def polish(x):
        return optimize.least_squares(residual, x, method="lm", xtol=1e-14, ftol=1e-14, gtol=1e-14).x

    for x0 in seeds:
        x = x0
        if np.linalg.norm(residual(x0)) > endpoint_tol:
            x = polish(x0)
        if np.linalg.norm(residual(x)) > endpoint_tol:
            # Levenberg-Marquardt stalled: fall back to a simplex search from the seed
            res = optimize.minimize(
                lambda z: float(np.sum(residual(z) ** 2)),
                x0,
                method="Nelder-Mead",
                options={"maxiter": max_iter, "xatol": 1e-6, "fatol": 1e-10},
            )
            x = polish(res.x)
        # the endpoint is checked on a finer grid than the search used
        defect = float(np.linalg.norm(residual(x, 4 * steps)))
        length = frame.speed(frame.unpack(x))  # geodesic speed is conserved and T = 1
        lengths.append((length, defect))
        log.debug("shot: length %.8f defect %.2e", length, defect)
        if defect <= endpoint_tol and (best is None or length < best[0]):
            best = (length, defect, x)

    if best is None:
        log.warning("no shot reached the target; reporting the connecting-path bound")
        best_defect = min(d for _, d in lengths)
        return GeodesicSearch(lower, max(fallback, lower), False, best_defect, fallback, None, None, lengths)

    length, defect, x = best
    # on ties keep the shot, which comes with a geodesic trajectory
    if fallback < length - 1e-9 * max(1.0, length):
        return GeodesicSearch(lower, max(fallback, lower), True, 0.0, fallback, None, None, lengths)
    # rescale to unit speed so the duration equals the length
    A0 = frame.from_eigen(frame.unpack(x))
    speed = frame.speed(frame.unpack(x))
    traj = gp_geodesic_shoot(rho0, A0 / speed, length, steps=trajectory_steps) if speed > 0 else None
    return GeodesicSearch(lower, max(length, lower), True, defect, length, A0 / speed, traj, lengths)
