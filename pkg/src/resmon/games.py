"""Simultaneous discrimination and exclusion games.

A channel game fixes one ensemble ``{p_i, σ_i}`` on (reference ⊗ channel
input) and two POVMs; its figure of merit is the ratio of the two success
probabilities after ``id ⊗ Λ``, divided by the best such ratio any free
channel achieves.  A measurement game fixes two ensembles and compares the
success probabilities of one measurement.  Both figures of merit are
linear-fractional in the free object, so the free optimum is a conic LP.
"""
import math

import numpy as np

from . import linalg as la
from .errors import DomainError, IllPosedError
from .monotones import proj_robustness_channel, proj_robustness_measurement
from .objects import Ensemble, PovmSet, max_entangled, povm
from .programs import DENOMINATOR_TOL, solve_linear_fractional
from .randomgen import random_ensemble_arrays, random_povm_effects, rng_from

UPPER_SLACK = 1e-7
ACHIEVE_REL_TOL = 1e-4
OMEGA_REL_SLACK = 1e-6


def _check_game_shape(ens, M):
    if not isinstance(M, PovmSet) or M.m != 1:
        raise DomainError("a game needs a single POVM (m = 1)")
    if M.n != len(ens):
        raise DomainError(f"POVM has {M.n} outcomes but the ensemble has {len(ens)} states")


def _channel_outputs(ens, J, d_in, d_out):
    if ens.dim % d_in:
        raise DomainError(f"ensemble dimension {ens.dim} is not a multiple of the channel input {d_in}")
    r = ens.dim // d_in
    T = np.asarray(J).reshape(d_in, d_out, d_in, d_out)
    outs = []
    for s in ens.states:
        S = s.reshape(r, d_in, r, d_in)
        outs.append(np.einsum("rasc,abcd->rbsd", S, T).reshape(r * d_out, r * d_out))
    return outs


def p_succ(ens, M, ch=None):
    """``Σ_i p_i <(id ⊗ Λ)(σ_i), M_i>``; without a channel the states are measured directly."""
    _check_game_shape(ens, M)
    if ch is None:
        states = list(ens.states)
    else:
        states = _channel_outputs(ens, ch.choi, ch.dim_in, ch.dim_out)
    if states[0].shape[0] != M.dim:
        raise DomainError("POVM dimension does not match the (output) states")
    val = sum(p * np.trace(s @ E).real for p, s, E in zip(ens.probs, states, M.components()))
    return float(val)


def choi_game_operator(ens, M, d_in, d_out):
    """Hermitian ``F`` with ``p_succ(ens, M, Λ) = <F, J_Λ>`` for every linear map ``Λ``."""
    _check_game_shape(ens, M)
    effects = M.components()

    def fn(J):
        outs = _channel_outputs(ens, J, d_in, d_out)
        return sum(p * np.trace(s @ E) for p, s, E in zip(ens.probs, outs, effects))

    return la.functional_operator(fn, d_in * d_out)


def witness_povms_from_dual(A, B):
    """Two-outcome POVMs ``{A/‖A‖, I - A/‖A‖}`` and ``{B/‖B‖, I - B/‖B‖}``."""
    out = []
    for name, X in (("A", A), ("B", B)):
        X = la.as_hermitian(X, herm_tol=1e-8)
        if not la.is_psd(X, 1e-8):
            raise DomainError(f"{name} is not PSD")
        nrm = la.opnorm(X)
        if nrm == 0:
            raise DomainError(f"{name} is the zero operator")
        w, V = la.eigh(X / nrm)
        E = (V * np.clip(w, 0, 1)) @ V.conj().T
        out.append(povm([E, np.eye(X.shape[0]) - E]))
    return tuple(out)


def ensemble_from_operators(ops):
    """``p_i ∝ Tr A_i`` and ``σ_i = A_i / Tr A_i``; zero-trace members get ``p_i = 0`` and ``σ_i = I/d``."""
    ops = [la.as_hermitian(X, herm_tol=1e-8) for X in ops]
    d = ops[0].shape[0]
    traces = np.array([max(np.trace(X).real, 0.0) for X in ops])
    total = traces.sum()
    if total <= 0:
        raise DomainError("all operators have zero trace")
    probs, states = [], []
    for X, t in zip(ops, traces):
        if t <= DENOMINATOR_TOL * total:
            probs.append(0.0)
            states.append(np.eye(d) / d)
        else:
            w, V = la.eigh(X / t)
            S = (V * np.clip(w, 0, None)) @ V.conj().T
            probs.append(t / total)
            states.append(S / np.trace(S).real)
    p = np.array(probs)
    return Ensemble(p / p.sum(), np.array(states))


def ensembles_from_dual(Ai, Bi):
    return ensemble_from_operators(Ai), ensemble_from_operators(Bi)


def channel_advantage_ratio(ch, cone, ens, mD, mE):
    """``[p_D(Λ)/p_E(Λ)] / max_free [p_D(Ξ)/p_E(Ξ)]`` with the free maximum solved exactly."""
    pD, pE = p_succ(ens, mD, ch), p_succ(ens, mE, ch)
    if pE <= DENOMINATOR_TOL:
        raise IllPosedError("exclusion success probability vanishes for the given channel")
    FD = choi_game_operator(ens, mD, ch.dim_in, ch.dim_out)
    FE = choi_game_operator(ens, mE, ch.dim_in, ch.dim_out)
    free = solve_linear_fractional([FD], [FE], cone, "max")
    num = pD / pE
    return {"num": num, "denom_opt": free.value, "ratio": num / free.value, "free_optimizer": free.primal["optimizer"]}


def measurement_advantage_ratio(M, cone, ensD, ensE):
    """``[p(ensD, M)/p(ensE, M)] / max_free [p(ensD, N)/p(ensE, N)]``."""
    pD, pE = p_succ(ensD, M), p_succ(ensE, M)
    if pE <= DENOMINATOR_TOL:
        raise IllPosedError("success probability of the second ensemble vanishes")
    num_ops = [p * s for p, s in zip(ensD.probs, ensD.states)]
    den_ops = [q * t for q, t in zip(ensE.probs, ensE.states)]
    free = solve_linear_fractional(num_ops, den_ops, cone, "max")
    num = pD / pE
    return {"num": num, "denom_opt": free.value, "ratio": num / free.value, "free_optimizer": free.primal["optimizer"]}


def _random_channel_game(d_in, d_out, rng):
    k = int(rng.integers(2, 4))
    p, states = random_ensemble_arrays(d_in * d_in, k, rng)
    ens = Ensemble(p, states)
    return ens, random_povm_effects(d_in * d_out, k, rng), random_povm_effects(d_in * d_out, k, rng)


def _sandwich(omega, achieved, rel_tol):
    return omega * (1 - rel_tol) <= achieved <= omega * (1 + OMEGA_REL_SLACK)


def verify_theorem5(ch, cone, trials=20, seed=0, rel_tol=ACHIEVE_REL_TOL):
    """Witness game reaches ``Ω``; random games never beat ``Ω`` times the free optimum.

    The witness uses the maximally entangled input with probability one and
    the two POVMs built from the dual certificate ``(A, B)``.
    """
    sol = proj_robustness_channel(ch, cone)
    if not sol.finite:
        return {"omega": math.inf, "skipped": True, "reason": "projective robustness is infinite", "ok": True}
    mD, mE = witness_povms_from_dual(sol.A[0], sol.B[0])
    d = ch.dim_in
    ens = Ensemble(np.array([1.0, 0.0]), np.array([max_entangled(d) / d, np.eye(d * d) / (d * d)]))
    achieved = channel_advantage_ratio(ch, cone, ens, mD, mE)["ratio"]
    rng = rng_from(seed)
    worst = -math.inf
    for _ in range(trials):
        g = _random_channel_game(ch.dim_in, ch.dim_out, rng)
        r = channel_advantage_ratio(ch, cone, *g)
        worst = max(worst, r["num"] - sol.value * r["denom_opt"])
    ok = _sandwich(sol.value, achieved, rel_tol) and worst <= UPPER_SLACK
    return {
        "omega": sol.value,
        "achieved": achieved,
        "gap": sol.value - achieved,
        "upper_chain_worst_slack": worst,
        "trials": trials,
        "ok": ok,
    }


def verify_theorem7(M, cone, trials=20, seed=0, rel_tol=ACHIEVE_REL_TOL):
    """Measurement analogue of :func:`verify_theorem5` using ensembles built from ``{A_i}, {B_i}``."""
    sol = proj_robustness_measurement(M, cone)
    if not sol.finite:
        return {"omega": math.inf, "skipped": True, "reason": "projective robustness is infinite", "ok": True}
    ensA, ensB = ensembles_from_dual(sol.A, sol.B)
    achieved = measurement_advantage_ratio(M, cone, ensA, ensB)["ratio"]
    rng = rng_from(seed)
    worst = -math.inf
    for _ in range(trials):
        ensD = Ensemble(*random_ensemble_arrays(M.dim, M.n, rng))
        ensE = Ensemble(*random_ensemble_arrays(M.dim, M.n, rng))
        r = measurement_advantage_ratio(M, cone, ensD, ensE)
        worst = max(worst, r["num"] - sol.value * r["denom_opt"])
    ok = _sandwich(sol.value, achieved, rel_tol) and worst <= UPPER_SLACK
    return {
        "omega": sol.value,
        "achieved": achieved,
        "gap": sol.value - achieved,
        "upper_chain_worst_slack": worst,
        "trials": trials,
        "ok": ok,
    }
