"""Quantum speed limits: lower bounds on the time to evolve rho0 into rho1.

Each ``tau_*`` function divides a distance between the endpoints by an
average energy uncertainty (or, for the Froewis bound, by the average square
root of the quantum Fisher information). Units have hbar = 1.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np

from .dynamics import connecting_path_length, gp_distance_numeric
from .errors import DimensionMismatch, NonpositiveUncertainty
from .geometry import (
    Projector,
    bures_angle,
    check_isospectral,
    fs_distance_pure,
    grassmann_distance,
    is_isospectral,
    product_grassmann_distance,
    product_plucker_distance,
    wy_distance,
)
from .states import DensityOperator

log = logging.getLogger(__name__)

WY_GATE_SLACK = 1e-12
ORDER_TOL = 1e-8
PERMUTATION_TOL = 1e-9


def _check_delta(delta_e: float) -> float:
    if not delta_e > 0:
        raise NonpositiveUncertainty(f"energy uncertainty must be positive, got {delta_e!r}")
    return float(delta_e)


def tau_mt(rho0: DensityOperator, rho1: DensityOperator, delta_e: float) -> float:
    """Mandelstam-Tamm bound for pure states."""
    return fs_distance_pure(rho0, rho1) / _check_delta(delta_e)


def tau_g(rho0: DensityOperator, rho1: DensityOperator, delta_e: float) -> float:
    """Product-Grassmann bound for isospectral states."""
    return product_grassmann_distance(rho0, rho1) / _check_delta(delta_e)


def tau_fs(rho0: DensityOperator, rho1: DensityOperator, delta_e: float) -> float:
    """Bound from the Fubini-Study distance of the Pluecker-embedded eigenspaces."""
    return product_plucker_distance(rho0, rho1) / _check_delta(delta_e)


def tau_u(rho0: DensityOperator, rho1: DensityOperator, delta_e: float) -> float:
    """Uhlmann bound, Bures angle over energy uncertainty.

    Defined for any pair of states of equal dimension; a warning is logged
    when the spectra differ, since then no unitary evolution connects them.
    """
    delta_e = _check_delta(delta_e)
    if rho0.dim != rho1.dim:
        raise DimensionMismatch(f"dimensions {rho0.dim} and {rho1.dim} differ")
    if not is_isospectral(rho0, rho1):
        log.warning("states are not isospectral: no unitary evolution connects them")
    return bures_angle(rho0, rho1) / delta_e


def tau_frowis(rho0: DensityOperator, rho1: DensityOperator, sqrt_qfi_avg: float) -> float:
    """``2 * BuresAngle / <sqrt(F)>`` with the trajectory average of ``sqrt(F)`` supplied."""
    if not sqrt_qfi_avg > 0:
        raise NonpositiveUncertainty(f"average sqrt(QFI) must be positive, got {sqrt_qfi_avg!r}")
    return 2.0 * bures_angle(rho0, rho1) / sqrt_qfi_avg


class WYBound(NamedTuple):
    value: float
    valid: bool
    reason: str


def wy_gate(rho0: DensityOperator) -> tuple[bool, str]:
    """Whether the Wigner-Yanase estimate is a speed limit from rho0.

    Needs a faithful state whose spectral width is at most three times its
    smallest eigenvalue.
    """
    if not rho0.is_faithful:
        return False, "not-faithful"
    p = rho0.eigenvalues
    if p[0] - p[-1] > 3.0 * p[-1] + WY_GATE_SLACK:
        return False, "spectral-width"
    return True, "ok"


def tau_wy(rho0: DensityOperator, rho1: DensityOperator, delta_e: float) -> WYBound:
    """Wigner-Yanase estimate; the value is returned even when it is not a valid bound."""
    delta_e = _check_delta(delta_e)
    if rho0.dim != rho1.dim:
        raise DimensionMismatch(f"dimensions {rho0.dim} and {rho1.dim} differ")
    valid, reason = wy_gate(rho0)
    return WYBound(wy_distance(rho0, rho1) / delta_e, valid, reason)


class TauP(NamedTuple):
    lower: float
    upper: float
    exact: float | None


def _involution_exact(rho0: DensityOperator, rho1: DensityOperator) -> float | None:
    """Distance for commuting nondegenerate states related by an involution of eigenvectors."""
    if any(m != 1 for m in rho0.multiplicities):
        return None
    U0 = np.hstack(rho0.spectrum.frames)
    U1 = np.hstack(rho1.spectrum.frames)
    O = np.abs(U0.conj().T @ U1)  # O[k, j] = |<u_k|v_j>|
    sigma = np.argmax(O, axis=0)
    if np.any(np.abs(O[sigma, np.arange(len(sigma))] - 1.0) > PERMUTATION_TOL):
        return None
    if np.any(sigma[sigma] != np.arange(len(sigma))):
        return None
    p = rho0.eigenvalues
    moved = sigma != np.arange(len(sigma))
    return float(0.5 * np.pi * np.sqrt(np.sum(p[moved])))


def gp_exact_distance(rho0: DensityOperator, rho1: DensityOperator) -> float | None:
    """Closed-form isospectral-metric distance where one is known, else None.

    Known cases: two distinct eigenvalues (zero counts as one), orthogonal
    supports, and commuting nondegenerate states permuted by an involution.
    """
    check_isospectral(rho0, rho1)
    spec0, spec1 = rho0.spectrum, rho1.spectrum
    if len(spec0.eigenvalues) == 1:
        return 0.0
    if len(spec0.eigenvalues) == 2:
        p1, p2 = spec0.eigenvalues
        m = spec0.multiplicities[0]
        d = grassmann_distance(Projector(spec0.projectors[0], m), Projector(spec1.projectors[0], m))
        return float(np.sqrt(p1 + p2) * d)
    if np.linalg.norm(rho0.support_projector @ rho1.support_projector) < PERMUTATION_TOL:
        return 0.5 * np.pi
    return _involution_exact(rho0, rho1)


def tau_p(
    rho0: DensityOperator,
    rho1: DensityOperator,
    delta_e: float,
    shoot: bool = False,
    restarts: int = 8,
    seed: int = 0,
) -> TauP:
    """Bracket of the speed limit from the isospectral metric.

    ``lower`` is the product-Grassmann bound. ``upper`` is the length of a
    connecting curve: a shooting geodesic if ``shoot``, else the
    constant-Hamiltonian path. Where a closed form exists it is reported as
    ``exact`` and also used as ``upper``.
    """
    delta_e = _check_delta(delta_e)
    check_isospectral(rho0, rho1)
    lower = product_grassmann_distance(rho0, rho1)
    exact = gp_exact_distance(rho0, rho1)
    if exact is not None and not shoot:
        upper = exact
    elif shoot:
        upper = gp_distance_numeric(rho0, rho1, restarts=restarts, seed=seed).upper
    else:
        upper = max(connecting_path_length(rho0, rho1), lower)
    return TauP(
        lower / delta_e,
        upper / delta_e,
        None if exact is None else exact / delta_e,
    )


class OrderingViolation(RuntimeError):
    """An internal ordering between bounds failed; indicates a numerical bug."""


@dataclass
class BoundReport:
    delta_e: float
    tau_u: float
    tau_wy: WYBound
    tau_mt: float | None = None
    tau_g: float | None = None
    tau_fs: float | None = None
    tau_frowis: float | None = None
    tau_p: TauP | None = None
    isospectral: bool = True
    warnings: list = field(default_factory=list)
    checks: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["tau_wy"] = self.tau_wy._asdict()
        d["tau_p"] = None if self.tau_p is None else self.tau_p._asdict()
        return d


def compare_bounds(
    rho0: DensityOperator,
    rho1: DensityOperator,
    delta_e: float,
    sqrt_qfi_avg: float | None = None,
    shoot: bool = False,
    seed: int = 0,
) -> BoundReport:
    """Evaluate every applicable bound and check the orderings between them.

    Raises:
        OrderingViolation: if a proven ordering fails beyond ``ORDER_TOL``.
    """
    delta_e = _check_delta(delta_e)
    if rho0.dim != rho1.dim:
        raise DimensionMismatch(f"dimensions {rho0.dim} and {rho1.dim} differ")
    iso = is_isospectral(rho0, rho1)
    rep = BoundReport(
        delta_e=delta_e,
        tau_u=bures_angle(rho0, rho1) / delta_e,
        tau_wy=tau_wy(rho0, rho1, delta_e),
        isospectral=iso,
    )
    if not iso:
        rep.warnings.append("not-isospectral: no unitary connects the states; tau_g, tau_fs, tau_p omitted")
    if rho0.is_pure and rho1.is_pure:
        rep.tau_mt = tau_mt(rho0, rho1, delta_e)
    if iso:
        rep.tau_g = tau_g(rho0, rho1, delta_e)
        rep.tau_fs = tau_fs(rho0, rho1, delta_e)
        rep.tau_p = tau_p(rho0, rho1, delta_e, shoot=shoot, seed=seed)
    if sqrt_qfi_avg is not None:
        rep.tau_frowis = tau_frowis(rho0, rho1, sqrt_qfi_avg)
    if not rep.tau_wy.valid:
        rep.warnings.append(f"tau_wy is not a speed limit here ({rep.tau_wy.reason})")

    checks = rep.checks
    if iso:
        checks["fs<=g"] = rep.tau_fs <= rep.tau_g + ORDER_TOL
        checks["g<=p.upper"] = rep.tau_g <= rep.tau_p.upper + ORDER_TOL
        checks["p.lower<=p.upper"] = rep.tau_p.lower <= rep.tau_p.upper + ORDER_TOL
    if rep.tau_mt is not None and iso:
        checks["pure-collapse"] = abs(rep.tau_g - rep.tau_mt) <= ORDER_TOL
    if rep.tau_frowis is not None and sqrt_qfi_avg <= 2.0 * delta_e:
        checks["u<=frowis"] = rep.tau_u <= rep.tau_frowis + ORDER_TOL
    failed = [k for k, ok in checks.items() if not ok]
    if failed:
        raise OrderingViolation(f"bound ordering violated: {failed}")
    return rep


__all__ = [
    "BoundReport",
    "OrderingViolation",
    "TauP",
    "WYBound",
    "compare_bounds",
    "gp_exact_distance",
    "tau_fs",
    "tau_frowis",
    "tau_g",
    "tau_mt",
    "tau_p",
    "tau_u",
    "tau_wy",
    "wy_gate",
]
