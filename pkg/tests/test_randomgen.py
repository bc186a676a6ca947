import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from resmon import linalg as la
from resmon.errors import DomainError
from resmon.freesets import incoherent_state_cone
from resmon.randomgen import (
    haar_unitary,
    random_channel,
    random_ensemble_arrays,
    random_incoherent_channel,
    random_povm_effects,
    random_povm_set,
    random_psd,
    random_pure_state,
    random_state,
    random_stochastic,
    rng_from,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def test_seeded_generation_is_reproducible():
    a = random_channel(2, 2, np.random.default_rng(42)).choi
    b = random_channel(2, 2, np.random.default_rng(42)).choi
    assert np.array_equal(a, b)
    g = np.random.default_rng(1)
    assert rng_from(g) is g


def test_random_povm_set_validation():
    with pytest.raises(DomainError):
        random_povm_set(2, 1, 3, np.random.default_rng(0))
    with pytest.raises(DomainError):
        random_state(0, np.random.default_rng(0))


@settings(max_examples=25, deadline=None)
@given(seeds, st.integers(1, 4), st.integers(1, 4))
def test_states_and_psd(seed, d, rank):
    rng = np.random.default_rng(seed)
    r = min(rank, d)
    P = random_psd(d, rng, r)
    assert la.is_psd(P) and np.linalg.matrix_rank(P, tol=1e-9 * la.opnorm(P)) == r
    rho = random_state(d, rng)
    assert la.is_psd(rho) and np.trace(rho).real == pytest.approx(1.0)
    psi = random_pure_state(d, rng)
    assert np.trace(psi @ psi).real == pytest.approx(1.0)
    U = haar_unitary(d, rng)
    np.testing.assert_allclose(U @ U.conj().T, np.eye(d), atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(seeds, st.integers(1, 3), st.integers(1, 3))
def test_channels_are_cptp(seed, d_in, d_out):
    ch = random_channel(d_in, d_out, np.random.default_rng(seed))
    assert la.is_psd(ch.choi)
    np.testing.assert_allclose(la.partial_trace(ch.choi, (d_in, d_out), 0), np.eye(d_in), atol=1e-10)


@settings(max_examples=20, deadline=None)
@given(seeds, st.integers(2, 3))
def test_incoherent_channel_preserves_diagonal_states(seed, d):
    rng = np.random.default_rng(seed)
    ch = random_incoherent_channel(d, rng)
    sigma = np.diag(rng.dirichlet(np.ones(d)))
    out = ch(sigma)
    assert incoherent_state_cone(d).contains(out)
    np.testing.assert_allclose(out - np.diag(np.diag(out)), 0, atol=1e-10)


@settings(max_examples=20, deadline=None)
@given(seeds, st.integers(2, 4), st.integers(1, 3), st.integers(1, 4))
def test_povms_ensembles_and_stochastic(seed, d, m, n):
    rng = np.random.default_rng(seed)
    n = min(n, d)
    ms = random_povm_set(d, m, n, rng)
    np.testing.assert_allclose(ms.effects.sum(axis=1), np.array([np.eye(d)] * m), atol=1e-10)
    M = random_povm_effects(d, n, rng)
    assert all(np.linalg.eigvalsh(E)[0] > 0 for E in M.components())
    p, states = random_ensemble_arrays(d, n, rng)
    assert p.sum() == pytest.approx(1.0) and len(states) == n
    P = random_stochastic(n, d, rng)
    np.testing.assert_allclose(P.sum(axis=0), 1.0)
    assert (P > 0).all()
