import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from resmon import linalg as la
from resmon.errors import DomainError
from resmon.objects import PAULI, max_entangled
from resmon.randomgen import random_psd, random_state

X, Y, Z = PAULI["X"], PAULI["Y"], PAULI["Z"]
PLUS = np.full((2, 2), 0.5)


@pytest.mark.parametrize(
    "H, expected",
    [(np.eye(2), [1, 1]), (np.diag([0.25, 0.75]), [0.25, 0.75]), (X, [-1, 1])],
)
def test_eigh_known_spectra(H, expected):
    w, V = la.eigh(H)
    np.testing.assert_allclose(w, expected, atol=1e-12)
    np.testing.assert_allclose(V.conj().T @ V, np.eye(2), atol=1e-12)


def test_as_hermitian_rejects_non_hermitian_and_nonfinite():
    with pytest.raises(DomainError):
        la.as_hermitian(np.array([[0, 1], [0, 0]]))
    with pytest.raises(DomainError):
        la.as_hermitian(np.array([[np.nan, 0], [0, 1]]))
    with pytest.raises(DomainError):
        la.as_hermitian(np.ones((2, 3)))


def test_as_hermitian_symmetrises_within_tolerance():
    M = np.array([[1, 1e-12], [0, 1]], dtype=complex)
    H = la.as_hermitian(M)
    assert np.array_equal(H, H.conj().T)


@pytest.mark.parametrize(
    "H, ok",
    [(np.eye(2), True), (np.diag([1, -0.5]), False), (np.zeros((3, 3)), True)],
)
def test_is_psd_examples(H, ok):
    assert la.is_psd(H, 1e-9) is ok


def test_is_psd_tolerance_is_relative_to_norm():
    H = np.diag([1e6, -1e-2])
    assert la.is_psd(H, 1e-9) is False
    assert la.is_psd(H, 1e-7) is True
    assert la.is_psd(np.diag([1e6, -1e-4]), 1e-9) is True
    with pytest.raises(DomainError):
        la.is_psd(H, -1.0)


@pytest.mark.parametrize(
    "H, P",
    [
        (np.diag([0.7, 0.3]), np.eye(2)),
        (np.diag([1.0, 0.0]), np.diag([1.0, 0.0])),
        (PLUS, PLUS),
    ],
)
def test_support_projector_examples(H, P):
    np.testing.assert_allclose(la.support_projector(H), P, atol=1e-12)


def test_support_projector_rejects_non_psd():
    with pytest.raises(DomainError):
        la.support_projector(np.diag([1.0, -0.5]))


@pytest.mark.parametrize(
    "H, expected",
    [
        (np.eye(2), np.eye(2)),
        (np.diag([4.0, 0.0]), np.diag([0.5, 0.0])),
        (np.diag([0.25, 1.0]), np.diag([2.0, 1.0])),
    ],
)
def test_pinv_sqrt_examples(H, expected):
    S = la.pinv_sqrt(H)
    np.testing.assert_allclose(S, expected, atol=1e-12)
    np.testing.assert_allclose(S @ H @ S, la.support_projector(H), atol=1e-9)


@pytest.mark.parametrize(
    "ops, expected",
    [
        ((np.eye(2), np.eye(2)), np.eye(4)),
        ((np.diag([1, 0]), np.diag([0, 1])), np.diag([0, 1, 0, 0])),
        ((Z, Z), np.diag([1, -1, -1, 1])),
    ],
)
def test_kron_examples(ops, expected):
    np.testing.assert_allclose(la.kron(*ops), expected)


def test_partial_trace_examples():
    rng = np.random.default_rng(0)
    rho, sigma = random_state(2, rng), random_psd(3, rng)
    np.testing.assert_allclose(la.partial_trace(np.kron(rho, sigma), (2, 3), 0), np.trace(sigma) * rho, atol=1e-12)
    np.testing.assert_allclose(la.partial_trace(max_entangled(2), (2, 2), 1), np.eye(2), atol=1e-12)
    np.testing.assert_allclose(la.partial_trace(np.eye(4), (2, 2), 0), 2 * np.eye(2), atol=1e-12)
    with pytest.raises(DomainError):
        la.partial_trace(np.eye(4), (2, 3), 0)
    with pytest.raises(DomainError):
        la.partial_trace(np.eye(4), (2, 2), 2)


@pytest.mark.parametrize(
    "rho, sigma, F",
    [
        (np.diag([0.3, 0.7]), np.diag([0.3, 0.7]), 1.0),
        (np.diag([1.0, 0.0]), np.diag([0.0, 1.0]), 0.0),
        (np.diag([1.0, 0.0]), np.eye(2) / 2, 0.5),
    ],
)
def test_fidelity_examples(rho, sigma, F):
    assert la.fidelity(rho, sigma) == pytest.approx(F, abs=1e-12)


def test_fidelity_rejects_unnormalised():
    with pytest.raises(DomainError):
        la.fidelity(np.eye(2), np.eye(2) / 2)


def test_herm_basis_is_orthonormal_and_coords_roundtrip():
    for d in (1, 2, 3, 4):
        B = la.herm_basis(d)
        gram = np.einsum("kij,lji->kl", B, B).real
        np.testing.assert_allclose(gram, np.eye(d * d), atol=1e-12)
    H = random_psd(3, np.random.default_rng(1)) + 1j * 0
    np.testing.assert_allclose(la.from_coords(la.to_coords(H), 3), H, atol=1e-12)


def test_matrix_json_roundtrip_and_validation():
    M = np.array([[1 + 2j, 3], [4, 5j]])
    assert np.array_equal(la.matrix_from_json(la.matrix_to_json(M)), M)
    with pytest.raises(DomainError):
        la.matrix_from_json({"rows": 2, "cols": 2, "data": [[0, 0]]})
    with pytest.raises(DomainError):
        la.matrix_from_json({"rows": 1})


# --- properties -------------------------------------------------------------

seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.integers(min_value=1, max_value=5)


def _random_hermitian(d, rng):
    G = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (G + G.conj().T) / 2


@settings(max_examples=50, deadline=None)
@given(seeds, dims)
def test_eigh_reconstruction(seed, d):
    H = _random_hermitian(d, np.random.default_rng(seed))
    w, V = la.eigh(H)
    assert np.all(np.diff(w) >= 0)
    assert np.linalg.norm(V @ np.diag(w) @ V.conj().T - H) <= 1e-10 * max(1.0, np.linalg.norm(H))


@settings(max_examples=50, deadline=None)
@given(seeds, dims, st.integers(min_value=1, max_value=5))
def test_support_projector_idempotent_and_commuting(seed, d, rank):
    H = random_psd(d, np.random.default_rng(seed), min(rank, d))
    P = la.support_projector(H)
    np.testing.assert_allclose(P @ P, P, atol=1e-9)
    np.testing.assert_allclose(P @ H, H @ P, atol=1e-9 * max(1.0, la.opnorm(H)))
    assert round(np.trace(P).real) == np.linalg.matrix_rank(H, tol=1e-9 * la.opnorm(H))


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(1, 3), st.integers(1, 3), st.floats(-2, 2))
def test_partial_trace_trace_preserving_and_linear(seed, dA, dB, c):
    rng = np.random.default_rng(seed)
    H1, H2 = _random_hermitian(dA * dB, rng), _random_hermitian(dA * dB, rng)
    for keep in (0, 1):
        lhs = la.partial_trace(H1 + c * H2, (dA, dB), keep)
        rhs = la.partial_trace(H1, (dA, dB), keep) + c * la.partial_trace(H2, (dA, dB), keep)
        np.testing.assert_allclose(lhs, rhs, atol=1e-10)
        assert np.trace(la.partial_trace(H1, (dA, dB), keep)) == pytest.approx(np.trace(H1), abs=1e-10)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(1, 4))
def test_fidelity_range_symmetry_and_identity(seed, d):
    rng = np.random.default_rng(seed)
    rho, sigma = random_state(d, rng), random_state(d, rng)
    F = la.fidelity(rho, sigma)
    assert 0.0 <= F <= 1.0
    assert F == pytest.approx(la.fidelity(sigma, rho), abs=1e-9)
    assert la.fidelity(rho, rho) == pytest.approx(1.0, abs=1e-8)
    if d > 1:
        assert F < 1 - 1e-8
