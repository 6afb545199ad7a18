import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mixedqsl.errors import DimensionMismatch, NotHermitian, NotPSD, TraceNotOne
from mixedqsl.states import (
    DensityOperator,
    diagonal_state,
    j_functional,
    pure_state,
    quantum_fisher_information,
    skew_information,
    skew_information_projector,
    split_observable,
    uncertainty,
    validate_density,
    variance,
)
import oracles as ora

SX = np.array([[0, 1], [1, 0]], complex)
SZ = np.diag([1.0, -1.0]).astype(complex)
Y_ROT = 1j * np.array([[0, -1], [1, 0]])  # i(|1><0| - |0><1|)


def test_validate_density_examples():
    r = validate_density(np.eye(3) / 3)
    assert r.rank == 3
    np.testing.assert_allclose(r.eigenvalues, [1 / 3])
    r = validate_density(np.diag([0.8, 0.2]))
    assert r.rank == 2
    np.testing.assert_allclose(r.eigenvalues, [0.8, 0.2])
    with pytest.raises(NotPSD):
        validate_density(np.diag([1.1, -0.1]))
    with pytest.raises(TraceNotOne):
        validate_density(np.diag([0.5, 0.4]))
    with pytest.raises(NotHermitian):
        validate_density(np.array([[0.5, 0.3], [0.1, 0.5]]))


def test_rank_and_kernel():
    r = diagonal_state([0.5, 0.5, 0, 0])
    assert r.rank == 2 and not r.is_faithful and not r.is_pure
    assert r.multiplicities == (2, 2)
    assert r.kernel_frame.shape == (4, 2)
    # tiny eigenvalues count as zero
    r = DensityOperator(np.diag([1 - 1e-14, 1e-14]).astype(complex))
    assert r.is_pure


def test_variance_examples():
    r = diagonal_state([0.8, 0.2])
    assert variance(np.eye(2), r) == 0.0
    assert variance(SZ, r) == pytest.approx(0.64, abs=1e-14)
    for p in (0.8, 0.97):
        assert variance(Y_ROT, diagonal_state([p, 1 - p])) == pytest.approx(1.0, abs=1e-14)


def test_skew_information_examples():
    r = diagonal_state([0.8, 0.2])
    assert skew_information(SX, r) == pytest.approx(0.2, abs=1e-14)
    assert skew_information(SZ, r) == pytest.approx(0.0, abs=1e-14)
    psi = pure_state([1, 1j])
    assert skew_information(SZ, psi) == pytest.approx(variance(SZ, psi), abs=1e-14)
    P0 = np.diag([1.0, 0.0])
    assert skew_information_projector(SX, P0) == pytest.approx(1.0)
    assert skew_information_projector(SZ, P0) == pytest.approx(0.0)


def test_qfi_qubit_sigma_x():
    # 2 * sum over ordered pairs (0.6^2 / 1) * |<0|sx|1>|^2 = 2 * 2 * 0.36
    r = diagonal_state([0.8, 0.2])
    F = quantum_fisher_information(SX, r)
    assert F == pytest.approx(1.44, abs=1e-12)
    assert F == pytest.approx(ora.qfi_sld(SX, r.matrix), abs=1e-12)


def test_qfi_pure_is_four_variance():
    rng = np.random.default_rng(0)
    psi = rng.normal(size=4) + 1j * rng.normal(size=4)
    r = pure_state(psi)
    A = ora.rand_herm(4, rng)
    assert quantum_fisher_information(A, r) == pytest.approx(4 * variance(A, r), rel=1e-12)


def test_qfi_matches_sld_oracle_faithful():
    rng = np.random.default_rng(1)
    for N in range(2, 7):
        r = DensityOperator(ora.rand_rho(N, N, rng))
        A = ora.rand_herm(N, rng)
        assert quantum_fisher_information(A, r) == pytest.approx(ora.qfi_sld(A, r.matrix), rel=1e-8)


def test_functionals_match_oracles():
    rng = np.random.default_rng(2)
    for N in range(1, 7):
        for rank in range(1, N + 1):
            M = ora.rand_rho(N, rank, rng)
            r = validate_density(M)
            A = ora.rand_herm(N, rng)
            assert variance(A, r) == pytest.approx(ora.variance(A, M), abs=1e-12)
            assert skew_information(A, r) == pytest.approx(ora.skew_info(A, M), abs=1e-10)


def test_split_observable_diagonal_state():
    rng = np.random.default_rng(3)
    r = diagonal_state([0.5, 0.3, 0.2])
    A = ora.rand_herm(3, rng)
    h, v = split_observable(A, r)
    np.testing.assert_allclose(v, np.diag(np.diag(A)), atol=1e-14)
    np.testing.assert_allclose(h + v, A, atol=1e-14)
    assert variance(A, r) == pytest.approx(variance(h, r) + variance(v, r), abs=1e-12)


def test_split_commuting_observable_is_vertical():
    r = diagonal_state([0.5, 0.3, 0.2])
    h, _ = split_observable(np.diag([1.0, 2.0, 3.0]), r)
    assert np.linalg.norm(h) == 0.0


def test_j_equals_horizontal_variance():
    rng = np.random.default_rng(4)
    r = diagonal_state([0.5, 0.3, 0.2])
    A = ora.rand_herm(3, rng)
    h, _ = split_observable(A, r)
    assert j_functional(A, r) == pytest.approx(variance(h, r), abs=1e-12)


def test_uncertainty_equals_horizontal_iff_vertical_scalar_on_support():
    r = diagonal_state([0.6, 0.4, 0.0])
    # vertical part scalar on the support, arbitrary on the kernel
    A = np.array([[1, 0.3, 0], [0.3, 1, 0], [0, 0, 5]], complex)
    h, _ = split_observable(A, r)
    assert uncertainty(A, r) == pytest.approx(uncertainty(h, r), abs=1e-12)
    B = A + np.diag([0.2, 0, 0])
    hb, _ = split_observable(B, r)
    assert uncertainty(B, r) > uncertainty(hb, r) + 1e-3


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        variance(np.eye(3), diagonal_state([0.5, 0.5]))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8), st.data())
def test_split_properties(N, data):
    rng = np.random.default_rng(data.draw(st.integers(0, 2**31)))
    rank = data.draw(st.integers(1, N))
    r = validate_density(ora.rand_rho(N, rank, rng))
    A = ora.rand_herm(N, rng)
    h, v = split_observable(A, r)
    for P in r.projectors:
        assert np.linalg.norm(P @ h @ P) < 1e-12
    comm = lambda X: X @ r.matrix - r.matrix @ X
    assert np.linalg.norm(comm(A) - comm(h)) < 1e-12
    assert variance(A, r) == pytest.approx(variance(h, r) + variance(v, r), abs=1e-10)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 8), st.data())
def test_inequality_chain(N, data):
    rng = np.random.default_rng(data.draw(st.integers(0, 2**31)))
    rank = data.draw(st.integers(1, N))
    r = validate_density(ora.rand_rho(N, rank, rng))
    A = ora.rand_herm(N, rng)
    I, J, V, F = (
        skew_information(A, r),
        j_functional(A, r),
        variance(A, r),
        quantum_fisher_information(A, r),
    )
    assert J - I >= -1e-10
    assert V - J >= -1e-10
    assert J - F / 4 >= -1e-10
