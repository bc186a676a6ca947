import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from resmon.distillation import (
    check_pure_to_pure,
    conversion_error,
    error_bound,
    free_overlap_channel,
    free_overlap_state,
    overhead_bound,
    submultiplicativity_check,
    worst_case_fidelity,
)
from resmon.errors import ConfigurationError, DomainError
from resmon.freesets import incoherent_state_cone, replacement_channel_cone
from resmon.monotones import proj_robustness_channel
from resmon.objects import dephasing, depolarizing, identity_channel, replacement_channel
from resmon.randomgen import random_pure_state, random_state

PLUS = np.full((2, 2), 0.5)
INC2 = incoherent_state_cone(2)
REP2 = replacement_channel_cone(INC2, 2)
REP4 = replacement_channel_cone(incoherent_state_cone(4), 4)
RHO = np.array([[0.5, 0.25], [0.25, 0.5]])


def _pure(a):
    v = np.array([np.sqrt(a), np.sqrt(1 - a)])
    return np.outer(v, v)


@pytest.mark.parametrize("phi, overlap", [(PLUS, 0.5), (_pure(0.75), 0.75), (np.diag([1.0, 0.0]), 1.0)])
def test_free_overlap_state(phi, overlap):
    assert free_overlap_state(phi, INC2) == pytest.approx(overlap, abs=1e-7)


def test_free_overlap_requires_pure_state():
    with pytest.raises(DomainError):
        free_overlap_state(np.eye(2) / 2, INC2)


def test_free_overlap_channel_exact_and_heuristic():
    F, how = free_overlap_channel(replacement_channel(PLUS, 2), REP2)
    assert how == "exact" and F == pytest.approx(0.5, abs=1e-7)
    F, how = free_overlap_channel(identity_channel(2), REP2, mode="heuristic", samples=8)
    assert how == "heuristic" and 0 <= F <= 1
    with pytest.raises(ConfigurationError):
        free_overlap_channel(identity_channel(2), REP2)


@pytest.mark.parametrize(
    "omega, overlap, expected",
    [(3.0, 0.5, 0.25), (1.0, 0.5, 0.5), (3.0, 0.75, 1 / 10), (math.inf, 0.5, 0.0), (5.0, 1.0, 0.0)],
)
def test_error_bound_values(omega, overlap, expected):
    assert error_bound(omega, overlap) == pytest.approx(expected, abs=1e-15)


def test_error_bound_domain():
    # solver round-off just below 1 counts as a free resource
    assert error_bound(1 - 1e-9, 0.5) == pytest.approx(0.5)
    with pytest.raises(DomainError):
        error_bound(0.5, 0.5)
    with pytest.raises(DomainError):
        error_bound(2.0, 0.0)


@pytest.mark.parametrize("omega", [3.0, 9.0])
def test_overhead_bound_values(omega):
    assert overhead_bound(omega, 0.5, 0.01) == pytest.approx(math.log(99) / math.log(omega), rel=1e-14)


def test_overhead_bound_reference_numbers():
    # log_3 99 and log_9 99 to five places
    assert overhead_bound(3.0, 0.5, 0.01) == pytest.approx(4.18266, abs=5e-6)
    assert overhead_bound(9.0, 0.5, 0.01) == pytest.approx(2.09133, abs=5e-6)


def test_overhead_bound_domain():
    assert overhead_bound(math.inf, 0.5, 0.01) == 0.0
    with pytest.raises(DomainError):
        overhead_bound(1.0, 0.5, 0.01)
    with pytest.raises(DomainError):
        overhead_bound(1 + 1e-9, 0.5, 0.01)
    with pytest.raises(DomainError):
        overhead_bound(3.0, 0.5, 0.0)


def test_analytic_distillation_chain():
    omega = proj_robustness_channel(replacement_channel(RHO, 2), REP2).value
    F, _ = free_overlap_channel(replacement_channel(PLUS, 2), REP2)
    assert error_bound(omega, F) == pytest.approx(0.25, abs=1e-6)
    assert overhead_bound(omega, F, 0.01) == pytest.approx(math.log(99) / math.log(3), abs=1e-5)


def test_worst_case_fidelity_modes():
    a, b = replacement_channel(np.diag([1.0, 0.0]), 2), replacement_channel(np.eye(2) / 2, 2)
    assert worst_case_fidelity(a, b) == (pytest.approx(0.5), "exact")
    F, how = worst_case_fidelity(identity_channel(2), dephasing(2), "sampled", samples=16)
    assert how == "sampled_upper_bound"
    assert F <= 0.5 + 1e-9
    with pytest.raises(ConfigurationError):
        worst_case_fidelity(identity_channel(2), dephasing(2))
    with pytest.raises(ConfigurationError):
        worst_case_fidelity(a, b, "guess")


def test_pure_to_pure():
    assert check_pure_to_pure(identity_channel(2))
    assert check_pure_to_pure(replacement_channel(PLUS, 2))
    assert not check_pure_to_pure(depolarizing(2, 0.3))


def test_submultiplicativity_analytic_pair():
    E = replacement_channel(RHO, 2)
    for mode, cone in (("tensor", REP4), ("compose", REP2)):
        rep = submultiplicativity_check(E, E, REP2, cone, mode)
        assert rep["ok"]
        assert rep["rhs"] == pytest.approx(9.0, abs=1e-5)
        assert rep["lhs"] <= 9.0 * (1 + 1e-6)
    with pytest.raises(ConfigurationError):
        submultiplicativity_check(E, E, REP2, REP2, "braid")


def test_conversion_error():
    assert conversion_error(replacement_channel(PLUS, 2), replacement_channel(PLUS, 2)) == pytest.approx(0.0, abs=1e-12)
    assert conversion_error(replacement_channel(np.diag([1.0, 0]), 2), replacement_channel(PLUS, 2)) == pytest.approx(0.5)


# --- properties -------------------------------------------------------------

seeds = st.integers(min_value=0, max_value=2**32 - 1)


@settings(max_examples=10, deadline=None)
@given(seeds, st.floats(0.02, 0.98))
def test_noisy_preparations_respect_error_bound(seed, delta):
    rng = np.random.default_rng(seed)
    phi = random_pure_state(2, rng)
    F, _ = free_overlap_channel(replacement_channel(phi, 2), REP2)
    rho = (1 - delta) * phi + delta * np.eye(2) / 2
    omega = proj_robustness_channel(replacement_channel(rho, 2), REP2).value
    eps = conversion_error(replacement_channel(rho, 2), replacement_channel(phi, 2))
    assert eps >= error_bound(omega, F) - 1e-7


@settings(max_examples=8, deadline=None)
@given(seeds)
def test_submultiplicativity_random_replacements(seed):
    rng = np.random.default_rng(seed)
    E = replacement_channel(random_state(2, rng), 2)
    F = replacement_channel(random_state(2, rng), 2)
    assert submultiplicativity_check(E, F, REP2, REP4, "tensor")["ok"]
    assert submultiplicativity_check(E, F, REP2, REP2, "compose")["ok"]


@settings(max_examples=20, deadline=None)
@given(st.floats(1.0, 1e6), st.floats(0.01, 0.99))
def test_error_bound_decreasing_in_omega(omega, overlap):
    assert error_bound(omega * 2, overlap) <= error_bound(omega, overlap) + 1e-15
