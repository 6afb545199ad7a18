import logging

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mixedqsl.bounds import (
    BoundReport,
    compare_bounds,
    gp_exact_distance,
    tau_fs,
    tau_frowis,
    tau_g,
    tau_mt,
    tau_p,
    tau_u,
    tau_wy,
    wy_gate,
)
from mixedqsl.dynamics import HamiltonianSchedule, average_energy_uncertainty, average_sqrt_qfi, evolve
from mixedqsl.errors import DimensionMismatch, NonpositiveUncertainty, NotIsospectral, NotPure
from mixedqsl.states import DensityOperator, diagonal_state, pure_state
import oracles as ora

H2 = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
KET0 = np.array([1.0, 0.0])
KET1 = np.array([0.0, 1.0])
PLUS = np.array([1.0, 1.0]) / np.sqrt(2)


def hadamard_pair(p):
    r0 = diagonal_state([p, 1 - p])
    return r0, DensityOperator(H2 @ r0.matrix @ H2)


def rotated_eigenspace_pair(theta):
    """Half-weight projectors onto span(e0, e1) and a copy rotated by principal angles (theta, theta)."""
    c, s = np.cos(theta), np.sin(theta)
    F0 = np.eye(4)[:, :2]
    F1 = np.array([[c, 0], [0, c], [s, 0], [0, s]])
    return DensityOperator(ora.proj(F0) / 2), DensityOperator(ora.proj(F1) / 2)


def test_tau_mt_examples():
    a, b = pure_state(KET0), pure_state(KET1)
    assert tau_mt(a, b, 1.0) == pytest.approx(np.pi / 2)
    assert tau_mt(a, a, 1.0) == pytest.approx(0.0, abs=1e-14)
    assert tau_mt(a, pure_state(PLUS), 1.0) == pytest.approx(np.pi / 4)
    assert tau_mt(a, pure_state(PLUS), 2.0) == pytest.approx(np.pi / 8)
    with pytest.raises(NotPure):
        tau_mt(diagonal_state([0.5, 0.5]), a, 1.0)
    with pytest.raises(NonpositiveUncertainty):
        tau_mt(a, b, 0.0)


def test_tau_g_examples():
    r0 = diagonal_state([0.6, 0.4, 0.0, 0.0])
    r1 = diagonal_state([0.0, 0.0, 0.6, 0.4])
    assert tau_g(r0, r1, 1.0) == pytest.approx(np.pi / 2, abs=1e-12)
    p = np.array([0.4, 0.3, 0.2, 0.1])
    r0, r1 = diagonal_state(p), diagonal_state(p[[1, 0, 2, 3]])
    assert tau_g(r0, r1, 2.0) == pytest.approx(np.pi / 4 * np.sqrt(0.7), abs=1e-12)
    assert tau_g(r0, r0, 1.0) == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(NotIsospectral):
        tau_g(r0, diagonal_state([0.25] * 4), 1.0)


def test_tau_fs_examples():
    rng = np.random.default_rng(0)
    r0 = DensityOperator(ora.rand_rho(4, 4, rng))
    U = ora.rand_unitary(4, rng)
    r1 = DensityOperator(U @ r0.matrix @ U.conj().T)
    assert tau_fs(r0, r1, 1.0) == pytest.approx(tau_g(r0, r1, 1.0), abs=1e-10)
    assert tau_fs(r0, r0, 1.0) == pytest.approx(0.0, abs=1e-14)
    a, b = rotated_eigenspace_pair(np.pi / 4)
    # eigenvalue 1/2 weights the single nonzero eigenspace
    assert tau_fs(a, b, 1.0) == pytest.approx(np.sqrt(0.5) * np.pi / 3, abs=1e-12)
    assert tau_g(a, b, 1.0) == pytest.approx(np.sqrt(0.5) * np.pi * np.sqrt(2) / 4, abs=1e-12)
    assert tau_fs(a, b, 1.0) < tau_g(a, b, 1.0)


def test_tau_u_examples(caplog):
    r0 = diagonal_state([0.8, 0.2])
    r1 = diagonal_state([0.2, 0.8])
    assert tau_u(r0, r1, 1.0) == pytest.approx(np.arccos(0.8), abs=1e-12)
    assert tau_u(r0, r1, 1.0) < tau_g(r0, r1, 1.0)
    assert tau_u(r0, r0, 1.0) == pytest.approx(0.0, abs=1e-14)
    assert tau_u(diagonal_state([1, 0, 0]), diagonal_state([0, 0.5, 0.5]), 1.0) == pytest.approx(np.pi / 2)
    with caplog.at_level(logging.WARNING):
        tau_u(r0, diagonal_state([0.5, 0.5]), 1.0)
    assert "not isospectral" in caplog.text
    with pytest.raises(DimensionMismatch):
        tau_u(r0, diagonal_state([1, 0, 0]), 1.0)


def test_tau_frowis_examples():
    rng = np.random.default_rng(1)
    psi, phi = rng.normal(size=3) + 1j * rng.normal(size=3), rng.normal(size=3) + 1j * rng.normal(size=3)
    a, b = pure_state(psi), pure_state(phi)
    # pure states: sqrt(F) = 2 Delta
    assert tau_frowis(a, b, 2.0 * 0.7) == pytest.approx(tau_u(a, b, 0.7), abs=1e-12)
    assert tau_frowis(a, b, 2.0 * 0.7) == pytest.approx(tau_mt(a, b, 0.7), abs=1e-12)
    r0, r1 = hadamard_pair(0.8)
    assert tau_frowis(r0, r0, 1.0) == pytest.approx(0.0, abs=1e-14)
    # sigma_x on diag(0.8, 0.2): sqrt(F)/2 = 0.6 < Delta = 1
    assert tau_frowis(r0, r1, 1.2) > tau_u(r0, r1, 1.0)
    with pytest.raises(NonpositiveUncertainty):
        tau_frowis(r0, r1, 0.0)


def test_tau_wy_examples():
    r0, r1 = hadamard_pair(0.8)
    w = tau_wy(r0, r1, 1.0)
    assert w.valid and w.reason == "ok"
    assert w.value == pytest.approx(np.arccos(0.9), abs=1e-9)
    assert w.value > tau_u(r0, r1, 1.0)
    r0, r1 = hadamard_pair(0.97)
    w = tau_wy(r0, r1, 1.0)
    assert not w.valid and w.reason == "spectral-width"
    assert w.value == pytest.approx(np.arccos(0.5 + np.sqrt(0.0291)), abs=1e-9)
    assert w.value > np.pi / 4
    w = tau_wy(r0, r0, 1.0)
    assert w.value == pytest.approx(0.0, abs=1e-14)
    assert wy_gate(diagonal_state([0.5, 0.5, 0.0])) == (False, "not-faithful")
    assert wy_gate(diagonal_state([1 / 3] * 3)) == (True, "ok")


def test_tau_p_examples():
    r0, r1 = hadamard_pair(0.8)
    t = tau_p(r0, r1, 2.0)
    assert t.exact == pytest.approx(np.pi / 8, abs=1e-12)
    assert t.lower == pytest.approx(np.pi / 8, abs=1e-12)
    r0 = diagonal_state([0.5, 0.3, 0.2, 0.0, 0.0, 0.0])
    r1 = diagonal_state([0.0, 0.0, 0.0, 0.5, 0.3, 0.2])
    t = tau_p(r0, r1, 1.0)
    assert t.exact == pytest.approx(np.pi / 2, abs=1e-12)
    assert t.upper == t.exact
    p = np.array([0.5, 0.3, 0.2])
    t = tau_p(diagonal_state(p), diagonal_state(p[[2, 1, 0]]), 1.0)
    assert t.exact == pytest.approx(np.pi / 2 * np.sqrt(0.7), abs=1e-12)
    with pytest.raises(NotIsospectral):
        tau_p(diagonal_state(p), diagonal_state([0.4, 0.4, 0.2]), 1.0)


def test_tau_p_three_cycle_has_no_closed_form():
    p = np.array([0.5, 0.3, 0.2])
    r0, r1 = diagonal_state(p), diagonal_state(p[[1, 2, 0]])
    assert gp_exact_distance(r0, r1) is None
    t = tau_p(r0, r1, 1.0)
    assert t.exact is None
    assert t.lower == pytest.approx(np.pi / 2, abs=1e-12)
    assert t.upper >= t.lower


def test_gp_exact_two_eigenvalues_with_degeneracy():
    rng = np.random.default_rng(2)
    U0, U1 = ora.rand_unitary(5, rng), ora.rand_unitary(5, rng)
    p = np.array([0.45, 0.45, 0.1, 0.0, 0.0])
    r0 = DensityOperator(U0 @ np.diag(p) @ U0.conj().T)
    r1 = DensityOperator(U1 @ np.diag(p) @ U1.conj().T)
    assert gp_exact_distance(r0, r1) is None  # three distinct values including zero
    p = np.array([0.25, 0.25, 0.25, 0.25, 0.0])
    r0 = DensityOperator(U0 @ np.diag(p) @ U0.conj().T)
    r1 = DensityOperator(U1 @ np.diag(p) @ U1.conj().T)
    d = ora.grassmann_from_angles(U0[:, :4], U1[:, :4])
    assert gp_exact_distance(r0, r1) == pytest.approx(np.sqrt(0.25) * d, abs=1e-10)


def test_pure_state_collapse():
    rng = np.random.default_rng(3)
    for N in (2, 3, 5):
        a = pure_state(rng.normal(size=N) + 1j * rng.normal(size=N))
        b = pure_state(rng.normal(size=N) + 1j * rng.normal(size=N))
        ref = tau_mt(a, b, 1.3)
        for v in (tau_g(a, b, 1.3), tau_fs(a, b, 1.3), tau_u(a, b, 1.3)):
            assert v == pytest.approx(ref, abs=1e-10)
        t = tau_p(a, b, 1.3)
        assert t.exact == pytest.approx(ref, abs=1e-10)
        assert t.lower == pytest.approx(ref, abs=1e-10)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 6), st.data())
def test_ordering_on_random_isospectral_pairs(N, data):
    rank = data.draw(st.integers(1, N))
    rng = np.random.default_rng(data.draw(st.integers(0, 2**31)))
    M = ora.rand_rho(N, rank, rng)
    U = ora.rand_unitary(N, rng)
    r0, r1 = DensityOperator(M), DensityOperator(U @ M @ U.conj().T)
    fs, g = tau_fs(r0, r1, 1.0), tau_g(r0, r1, 1.0)
    t = tau_p(r0, r1, 1.0)
    assert fs <= g + 1e-8
    assert g <= t.upper + 1e-8
    assert t.lower <= t.upper + 1e-8


def test_compare_bounds_reports():
    r0, r1 = hadamard_pair(0.8)
    rep = compare_bounds(r0, r1, 1.0, sqrt_qfi_avg=1.2)
    assert isinstance(rep, BoundReport)
    assert rep.tau_mt is None
    assert rep.tau_wy.valid
    assert all(rep.checks.values()) and "u<=frowis" in rep.checks
    d = rep.to_dict()
    assert d["tau_p"]["exact"] == pytest.approx(np.pi / 4)
    assert d["tau_wy"]["reason"] == "ok"

    r0, r1 = hadamard_pair(0.97)
    rep = compare_bounds(r0, r1, 1.0)
    assert any("tau_wy" in w for w in rep.warnings)

    a, b = pure_state(KET0), pure_state(PLUS)
    rep = compare_bounds(a, b, 1.0)
    assert rep.tau_mt == pytest.approx(np.pi / 4)
    assert rep.checks["pure-collapse"]

    rep = compare_bounds(diagonal_state([0.7, 0.3]), diagonal_state([0.6, 0.4]), 1.0)
    assert not rep.isospectral
    assert rep.tau_g is None and rep.tau_p is None
    assert rep.tau_u > 0
    assert any("not-isospectral" in w for w in rep.warnings)


def test_tau_g_vs_tau_u_harness():
    # no ordering is asserted between these two; only that the comparison runs
    rng = np.random.default_rng(4)
    for _ in range(20):
        M = ora.rand_rho(3, 3, rng)
        U = ora.rand_unitary(3, rng)
        rep = compare_bounds(DensityOperator(M), DensityOperator(U @ M @ U.conj().T), 1.0)
        assert rep.tau_g >= 0 and rep.tau_u >= 0


def test_bounds_dominated_by_transit_time():
    rng = np.random.default_rng(5)
    for _ in range(15):
        N = int(rng.integers(2, 5))
        r0 = DensityOperator(ora.rand_rho(N, int(rng.integers(1, N + 1)), rng))
        A, B = ora.rand_herm(N, rng), ora.rand_herm(N, rng)
        T = rng.uniform(0.1, 2.0)
        traj = evolve(r0, HamiltonianSchedule(lambda t: A + np.sin(3 * t) * B), 0, T, 400)
        dE = average_energy_uncertainty(traj)
        rep = compare_bounds(r0, traj.final, dE, sqrt_qfi_avg=average_sqrt_qfi(traj))
        values = [rep.tau_u, rep.tau_g, rep.tau_fs, rep.tau_p.lower, rep.tau_frowis]
        if rep.tau_mt is not None:
            values.append(rep.tau_mt)
        if rep.tau_wy.valid:
            values.append(rep.tau_wy.value)
        assert max(values) <= T + 1e-6
