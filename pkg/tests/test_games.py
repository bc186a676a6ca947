import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from resmon.errors import DomainError, IllPosedError
from resmon.freesets import incoherent_state_cone, replacement_channel_cone, trivial_povm_cone
from resmon.games import (
    channel_advantage_ratio,
    choi_game_operator,
    ensemble_from_operators,
    ensembles_from_dual,
    measurement_advantage_ratio,
    p_succ,
    verify_theorem5,
    verify_theorem7,
    witness_povms_from_dual,
)
from resmon.objects import (
    Ensemble,
    depolarizing,
    identity_channel,
    noisy_pauli_povm,
    povm,
    replacement_channel,
)
from resmon.randomgen import random_channel, random_ensemble_arrays, random_povm_effects, random_state

KET0, KET1 = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
BASIS = Ensemble(np.array([0.5, 0.5]), np.array([KET0, KET1]))
Z = noisy_pauli_povm("Z", 1.0)
TRIV = povm([np.eye(2) / 2, np.eye(2) / 2])
REP2 = replacement_channel_cone(incoherent_state_cone(2), 2)


@pytest.mark.parametrize(
    "M, ch, expected",
    [
        (Z, None, 1.0),
        (TRIV, None, 0.5),
        (Z, identity_channel(2), 1.0),
        (Z, depolarizing(2, 0.5), 0.75),
        (Z, replacement_channel(KET0, 2), 0.5),
    ],
)
def test_p_succ_examples(M, ch, expected):
    assert p_succ(BASIS, M, ch) == pytest.approx(expected, abs=1e-12)


def test_p_succ_shape_errors():
    with pytest.raises(DomainError):
        p_succ(BASIS, povm([np.eye(2)]))
    with pytest.raises(DomainError):
        p_succ(BASIS, povm([np.eye(3) / 2, np.eye(3) / 2]))


def test_choi_game_operator_is_linear_functional():
    rng = np.random.default_rng(0)
    ens = Ensemble(*random_ensemble_arrays(4, 2, rng))
    M = random_povm_effects(4, 2, rng)
    F = choi_game_operator(ens, M, 2, 2)
    for _ in range(3):
        ch = random_channel(2, 2, rng)
        assert np.trace(F @ ch.choi).real == pytest.approx(p_succ(ens, M, ch), abs=1e-10)


def test_witness_povms_from_dual():
    mD, mE = witness_povms_from_dual(np.diag([2.0, 0.0]), np.diag([1.0, 0.5]))
    np.testing.assert_allclose(mD.effects[0, 0], KET0, atol=1e-12)
    np.testing.assert_allclose(mE.effects[0, 0], np.diag([1.0, 0.5]), atol=1e-12)
    np.testing.assert_allclose(mE.effects[0].sum(axis=0), np.eye(2), atol=1e-12)
    with pytest.raises(DomainError):
        witness_povms_from_dual(np.zeros((2, 2)), np.eye(2))
    with pytest.raises(DomainError):
        witness_povms_from_dual(np.diag([1.0, -1.0]), np.eye(2))


def test_ensembles_from_operators():
    ens = ensemble_from_operators([np.diag([1.0, 0.0]), np.diag([0.0, 3.0])])
    np.testing.assert_allclose(ens.probs, [0.25, 0.75])
    np.testing.assert_allclose(ens.states[1], KET1, atol=1e-12)
    ens = ensemble_from_operators([np.zeros((2, 2)), np.eye(2)])
    np.testing.assert_allclose(ens.probs, [0.0, 1.0])
    np.testing.assert_allclose(ens.states[0], np.eye(2) / 2)
    a, b = ensembles_from_dual([KET0, KET1], [np.eye(2), np.eye(2)])
    np.testing.assert_allclose(b.probs, [0.5, 0.5])
    with pytest.raises(DomainError):
        ensemble_from_operators([np.zeros((2, 2))])


def test_measurement_ratio_of_free_povm_is_at_most_one():
    rng = np.random.default_rng(3)
    cone = trivial_povm_cone(2, 2)
    ensD = Ensemble(*random_ensemble_arrays(2, 2, rng))
    ensE = Ensemble(*random_ensemble_arrays(2, 2, rng))
    r = measurement_advantage_ratio(povm([0.3 * np.eye(2), 0.7 * np.eye(2)]), cone, ensD, ensE)
    assert r["ratio"] <= 1 + 1e-7


def test_same_povm_gives_unit_ratio():
    rng = np.random.default_rng(5)
    ens = Ensemble(*random_ensemble_arrays(4, 2, rng))
    M = random_povm_effects(4, 2, rng)
    r = channel_advantage_ratio(random_channel(2, 2, rng), REP2, ens, M, M)
    assert r["ratio"] == pytest.approx(1.0, abs=1e-7)


def test_vanishing_exclusion_probability_is_ill_posed():
    ens = Ensemble(np.array([1.0, 0.0]), np.array([KET0, KET1]))
    with pytest.raises(IllPosedError):
        measurement_advantage_ratio(Z, trivial_povm_cone(2, 2), ens, Ensemble(np.array([0.0, 1.0]), np.array([KET0, KET0])))


@pytest.mark.parametrize("seed", range(3))
def test_channel_witness_game_reaches_omega(seed):
    rng = np.random.default_rng(seed)
    ch = replacement_channel(random_state(2, rng), 2) if seed % 2 else random_channel(2, 2, rng)
    rep = verify_theorem5(ch, REP2, trials=3, seed=seed)
    assert rep["ok"], rep
    assert rep["omega"] * (1 - 1e-3) <= rep["achieved"] <= rep["omega"] * (1 + 1e-6)
    assert rep["upper_chain_worst_slack"] <= 1e-7


@pytest.mark.parametrize("d, n", [(2, 2), (3, 2), (3, 3)])
def test_measurement_witness_game_reaches_omega(d, n):
    M = random_povm_effects(d, n, np.random.default_rng(d + n))
    rep = verify_theorem7(M, trivial_povm_cone(d, n), trials=3, seed=1)
    assert rep["ok"], rep
    assert rep["omega"] * (1 - 1e-3) <= rep["achieved"] <= rep["omega"] * (1 + 1e-6)


def test_channel_witness_skips_infinite():
    rep = verify_theorem5(replacement_channel(np.full((2, 2), 0.5), 2), REP2)
    assert rep["skipped"] and rep["ok"]


# --- properties -------------------------------------------------------------

seeds = st.integers(min_value=0, max_value=2**32 - 1)


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_free_channel_never_beats_free_optimum(seed):
    rng = np.random.default_rng(seed)
    free = replacement_channel(np.diag(rng.dirichlet(np.ones(2))), 2)
    ens = Ensemble(*random_ensemble_arrays(4, 2, rng))
    r = channel_advantage_ratio(free, REP2, ens, random_povm_effects(4, 2, rng), random_povm_effects(4, 2, rng))
    assert r["ratio"] <= 1 + 1e-7


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_p_succ_is_a_probability(seed):
    rng = np.random.default_rng(seed)
    ens = Ensemble(*random_ensemble_arrays(4, 3, rng))
    p = p_succ(ens, random_povm_effects(4, 3, rng), random_channel(2, 2, rng))
    assert -1e-12 <= p <= 1 + 1e-12
