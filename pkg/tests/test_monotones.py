import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from resmon.errors import DomainError
from resmon.freesets import incoherent_state_cone, replacement_channel_cone, trivial_povm_cone
from resmon.monotones import (
    bounds_report,
    gen_robustness,
    number_json,
    proj_robustness,
    proj_robustness_channel,
    proj_robustness_incompatibility,
    proj_robustness_measurement,
    proj_robustness_state,
    projective_result_json,
    prop2_check,
    robustness_result_json,
    weight,
)
from resmon.objects import identity_channel, noisy_pauli_povm, noisy_zx_pair, replacement_channel
from resmon.randomgen import haar_unitary, random_channel, random_state

RHO = np.array([[0.5, 0.25], [0.25, 0.5]])
PLUS = np.full((2, 2), 0.5)
INC2 = incoherent_state_cone(2)
REP2 = replacement_channel_cone(INC2, 2)


def test_analytic_state_bounds_are_tight():
    rep = bounds_report(RHO, INC2)
    assert rep["omega"] == pytest.approx(3.0, abs=1e-6)
    assert rep["robustness"] == pytest.approx(1.5, abs=1e-7)
    assert rep["weight"] == pytest.approx(0.5, abs=1e-7)
    assert rep["lower"] == pytest.approx(3.0, abs=1e-6)
    assert rep["ok"]
    assert rep["lower"] <= rep["omega"] + 1e-6 <= min(rep["upper1"], rep["upper2"]) + 2e-6


def test_pure_coherent_state_bounds():
    rep = bounds_report(PLUS, INC2)
    assert math.isinf(rep["omega"]) and math.isinf(rep["lower"])
    assert rep["weight"] == pytest.approx(0.0, abs=1e-7)
    assert rep["robustness"] == pytest.approx(2.0, abs=1e-6)
    assert rep["ok"]


@pytest.mark.parametrize("eta", [0.25, 0.5, 0.8])
def test_noisy_z_against_trivial(eta):
    sol = proj_robustness_measurement(noisy_pauli_povm("Z", eta), trivial_povm_cone(2, 2))
    assert sol.value == pytest.approx((1 + eta) / (1 - eta), rel=1e-6)


def test_noisy_z_robustness_and_weight():
    M, cone = noisy_pauli_povm("Z", 0.5), trivial_povm_cone(2, 2)
    assert gen_robustness(M, cone).value == pytest.approx(1.5, abs=1e-7)
    assert 1 / weight(M, cone).value == pytest.approx(2.0, abs=1e-6)


def test_incompatibility_examples():
    assert proj_robustness_incompatibility(noisy_zx_pair(0.5)).value == pytest.approx(1.0, abs=1e-6)
    assert math.isinf(proj_robustness_incompatibility(noisy_zx_pair(1.0)).value)
    mid = proj_robustness_incompatibility(noisy_zx_pair(0.9)).value
    assert 1.0 + 1e-3 < mid < math.inf


def test_kind_checks():
    with pytest.raises(DomainError):
        proj_robustness_state(RHO, REP2)
    with pytest.raises(DomainError):
        proj_robustness_channel(RHO, REP2)
    with pytest.raises(DomainError):
        proj_robustness_channel(identity_channel(3), REP2)
    with pytest.raises(DomainError):
        proj_robustness_measurement(noisy_zx_pair(0.5), trivial_povm_cone(2, 2))


def test_replacement_channel_matches_its_output_state():
    omega = random_state(2, np.random.default_rng(4))
    a = proj_robustness_channel(replacement_channel(omega, 2), REP2).value
    b = proj_robustness_state(omega, INC2).value
    assert a == pytest.approx(b, abs=1e-6)


@pytest.mark.parametrize("eta", [0.75, 0.85, 0.95])
def test_incompatibility_equals_embedded_channel(eta):
    rep = prop2_check(noisy_zx_pair(eta, haar_unitary(2, np.random.default_rng(1))))
    assert rep["ok"]
    assert rep["diff"] <= 1e-5


def test_sharp_pair_is_infinite_on_both_sides():
    rep = prop2_check(noisy_zx_pair(1.0))
    assert math.isinf(rep["omega_incompat"]) and math.isinf(rep["omega_channel"])
    assert rep["diff"] == 0.0


def test_result_json_shapes():
    out = projective_result_json(proj_robustness(RHO, INC2))
    assert out["value"] == pytest.approx(3.0, abs=1e-6)
    assert out["dual"]["source"] in ("independent", "primal_multipliers")
    assert {"optimizer", "lambda", "mu", "gap", "tolerances"} <= set(out)
    inf = projective_result_json(proj_robustness(PLUS, INC2))
    assert inf["value"] == "inf" and inf["reason"] == "support"
    assert "optimizer" not in inf
    rob = robustness_result_json(gen_robustness(RHO, INC2), "robustness")
    assert rob["value"] == pytest.approx(1.5, abs=1e-7)
    assert number_json(-math.inf) == "-inf"


# --- properties -------------------------------------------------------------

seeds = st.integers(min_value=0, max_value=2**32 - 1)


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_bounds_sandwich_random_channels(seed):
    rep = bounds_report(random_channel(2, 2, np.random.default_rng(seed)), REP2)
    assert rep["ok"], rep


@settings(max_examples=10, deadline=None)
@given(seeds, st.integers(2, 3))
def test_weight_and_robustness_ranges(seed, d):
    rho = random_state(d, np.random.default_rng(seed))
    cone = incoherent_state_cone(d)
    R, W = gen_robustness(rho, cone).value, weight(rho, cone).value
    assert R >= 1 - 1e-9
    assert -1e-9 <= W <= 1 + 1e-9
    assert proj_robustness_state(rho, cone).value >= R / W - 1e-6 * R / W
