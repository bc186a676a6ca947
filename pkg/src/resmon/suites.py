"""Seeded property suites behind ``resmon verify``.

Each suite is a function ``instance(index, rng) -> dict`` that returns the
values it computed and a mapping ``checks`` from check name to a *violation*
(how far the inequality is from holding; ``<= 0`` means it holds exactly).
A check passes when its violation is within that check's tolerance.  Trials
use independent generators derived from ``(seed, index)`` so the report does
not depend on scheduling.
"""
import math
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import linalg as la
from .distillation import (
    error_bound,
    free_overlap_channel,
    submultiplicativity_check,
    worst_case_fidelity,
)
from .errors import ResmonError
from .freesets import dual_cone_check, incoherent_state_cone, jointly_measurable_cone, replacement_channel_cone, trivial_povm_cone
from .games import verify_theorem5, verify_theorem7
from .monotones import bounds_report, prop2_check, proj_robustness_channel, proj_robustness_state
from .objects import (
    PovmSet,
    compose_channels,
    mix_channels,
    noisy_zx_pair,
    replacement_channel,
)
from .programs import solve_projective
from .randomgen import (
    haar_unitary,
    random_channel,
    random_incoherent_channel,
    random_povm_set,
    random_pure_state,
    random_state,
    random_stochastic,
)

TOL_ABS = 1e-6
TOL_EMBEDDING = 1e-5
TOL_GAME = 1e-7
TOL_DUALITY = 1e-6
TOL_BOUND = 1e-7


def _viol(lhs, rhs):
    """Violation of ``lhs <= rhs`` with infinite values handled."""
    if math.isinf(rhs) and rhs > 0:
        return 0.0
    if math.isinf(lhs):
        return math.inf
    return lhs - rhs


def _abs_diff(a, b):
    if math.isinf(a) and math.isinf(b):
        return 0.0
    return abs(a - b)


def _qubit_channel_cone():
    return replacement_channel_cone(incoherent_state_cone(2), 2)


def _monotone_properties(index, rng):
    cone = _qubit_channel_cone()
    E, F = random_channel(2, 2, rng), random_channel(2, 2, rng)
    oE = proj_robustness_channel(E, cone).value
    oF = proj_robustness_channel(F, cone).value
    checks = {}
    for k in (0.5, 2.0):
        checks[f"scaling_{k}"] = _abs_diff(solve_projective([k * E.choi], cone).value, oE)
    for t in (0.25, 0.5, 0.75):
        mixed = proj_robustness_channel(mix_channels([t, 1 - t], [E, F]), cone).value
        checks[f"quasiconvex_{t}"] = _viol(mixed, max(oE, oF))
    pre, post = random_channel(2, 2, rng), random_incoherent_channel(2, rng)
    theta = compose_channels(post, compose_channels(E, pre))
    checks["monotone"] = _viol(proj_robustness_channel(theta, cone).value, oE)
    rep = bounds_report(E, cone)
    checks["lower_bound"] = _viol(rep["lower"], rep["omega"])
    checks["upper_bound"] = _viol(rep["omega"], min(rep["upper1"], rep["upper2"]))
    return {"values": {"omega_E": oE, "omega_F": oF, **{k: rep[k] for k in ("lower", "upper1", "upper2")}},
            "checks": checks}


def _replacement_equals_state(index, rng):
    base = incoherent_state_cone(2)
    cone = replacement_channel_cone(base, 2)
    omega = random_state(2, rng)
    a = proj_robustness_channel(replacement_channel(omega, 2), cone).value
    b = proj_robustness_state(omega, base).value
    pure = random_pure_state(2, rng)
    pa = proj_robustness_channel(replacement_channel(pure, 2), cone).value
    pb = proj_robustness_state(pure, base).value
    return {
        "values": {"channel": a, "state": b, "pure_channel": pa, "pure_state": pb},
        "checks": {
            "equality": _abs_diff(a, b),
            "pure_infinite": 0.0 if math.isinf(pa) and math.isinf(pb) else math.inf,
        },
    }


def _incompatibility_embedding(index, rng):
    eta = rng.uniform(1 / np.sqrt(2) + 0.01, 0.99)
    ms = noisy_zx_pair(eta, haar_unitary(2, rng))
    rep = prop2_check(ms)
    sharp = prop2_check(noisy_zx_pair(1.0, haar_unitary(2, rng)))
    return {
        "values": {"eta": eta, **{k: rep[k] for k in ("omega_incompat", "omega_channel")}},
        "checks": {
            "equality": rep["diff"],
            "sharp_infinite": 0.0 if math.isinf(sharp["omega_incompat"]) and math.isinf(sharp["omega_channel"]) else math.inf,
        },
    }


def _distillation_error(index, rng):
    """Noisy preparations of a random pure target, post-processed by random incoherent maps."""
    base = incoherent_state_cone(2)
    cone = replacement_channel_cone(base, 2)
    phi = random_pure_state(2, rng)
    target = replacement_channel(phi, 2)
    overlap, _ = free_overlap_channel(target, cone)
    post = random_incoherent_channel(2, rng)
    worst30, worst35 = -math.inf, -math.inf
    rows = []
    for delta in np.linspace(0.05, 0.95, 20):
        rho = (1 - delta) * phi + delta * np.eye(2) / 2
        sol = proj_robustness_channel(replacement_channel(rho, 2), cone)
        for proto in (None, post):
            out = replacement_channel(rho if proto is None else proto(rho), 2)
            eps = 1 - worst_case_fidelity(out, target, "exact_replacement")[0]
            bound = error_bound(sol.value, overlap)
            worst30 = max(worst30, bound - eps)
            if proto is None and 0 < eps < 1 and overlap < 1:
                need = (1 - eps) * (1 - overlap) / (eps * overlap)
                worst35 = max(worst35, (need - sol.lam * sol.mu) / max(1.0, need))
            rows.append({"delta": float(delta), "eps": eps, "bound": bound})
    return {"values": {"overlap": overlap, "grid": rows}, "checks": {"error_bound": worst30, "lambda_mu_chain": worst35}}


def _submultiplicativity(index, rng):
    cone = _qubit_channel_cone()
    cone4 = replacement_channel_cone(incoherent_state_cone(4), 4)
    E = replacement_channel(random_state(2, rng), 2)
    F = replacement_channel(random_state(2, rng), 2)
    t = submultiplicativity_check(E, F, cone, cone4, "tensor")
    c = submultiplicativity_check(E, F, cone, cone, "compose")
    return {
        "values": {"tensor": [t["lhs"], t["rhs"]], "compose": [c["lhs"], c["rhs"]]},
        "checks": {
            "tensor": _viol(t["lhs"], t["rhs"]) / max(1.0, t["rhs"]),
            "compose": _viol(c["lhs"], c["rhs"]) / max(1.0, c["rhs"]),
        },
    }


def _channel_witness(index, rng):
    cone = _qubit_channel_cone()
    ch = replacement_channel(random_state(2, rng), 2) if index % 2 == 0 else random_channel(2, 2, rng)
    rep = verify_theorem5(ch, cone, trials=2, seed=rng)
    return {
        "values": {k: rep[k] for k in ("omega", "achieved")},
        "checks": {
            "achieved_low": (rep["omega"] * (1 - 1e-3) - rep["achieved"]) / rep["omega"],
            "achieved_high": (rep["achieved"] - rep["omega"]) / rep["omega"],
            "upper_chain": rep["upper_chain_worst_slack"],
        },
    }


def _measurement_witness(index, rng):
    d = int(rng.integers(2, 4))
    n = int(rng.integers(2, d + 1))
    M = random_povm_set(d, 1, n, rng)
    rep = verify_theorem7(M, trivial_povm_cone(d, n), trials=2, seed=rng)
    return {
        "values": {"d": d, "n": n, **{k: rep[k] for k in ("omega", "achieved")}},
        "checks": {
            "achieved_low": (rep["omega"] * (1 - 1e-3) - rep["achieved"]) / rep["omega"],
            "achieved_high": (rep["achieved"] - rep["omega"]) / rep["omega"],
            "upper_chain": rep["upper_chain_worst_slack"],
        },
    }


def post_process(M, P):
    """Relabel outcomes classically: ``N_b = Σ_a P(b|a) M_a``."""
    return PovmSet(np.einsum("ba,xaij->xbij", P, M.effects))


def conjugate(M, U):
    return PovmSet(np.einsum("ij,xajk,lk->xail", U, M.effects, U.conj()))


def _measurement_properties(index, rng):
    d = int(rng.integers(2, 4))
    n = int(rng.integers(2, d + 1))
    cone = trivial_povm_cone(d, n)
    M, N = random_povm_set(d, 1, n, rng), random_povm_set(d, 1, n, rng)
    sM = solve_projective(M.components(), cone)
    sN = solve_projective(N.components(), cone)
    checks = {"duality_gap": max(sM.gap, sN.gap)}
    for k in (0.5, 2.0):
        checks[f"scaling_{k}"] = _abs_diff(solve_projective([k * E for E in M.components()], cone).value, sM.value)
    for t in (0.25, 0.5, 0.75):
        mix = PovmSet(t * M.effects + (1 - t) * N.effects)
        checks[f"quasiconvex_{t}"] = _viol(solve_projective(mix.components(), cone).value, max(sM.value, sN.value))
    n_out = int(rng.integers(2, n + 1))
    relabelled = post_process(M, random_stochastic(n_out, n, rng))
    rotated = conjugate(M, haar_unitary(d, rng))
    checks["monotone_postprocess"] = _viol(
        solve_projective(relabelled.components(), trivial_povm_cone(d, n_out)).value, sM.value
    )
    checks["monotone_unitary"] = _viol(solve_projective(rotated.components(), cone).value, sM.value)
    rep = bounds_report(M, cone)
    checks["lower_bound"] = _viol(rep["lower"], rep["omega"])
    checks["upper_bound"] = _viol(rep["omega"], min(rep["upper1"], rep["upper2"]))
    return {"values": {"d": d, "n": n, "omega": sM.value, "dual": sM.dual_value}, "checks": checks}


def _duality(index, rng):
    """Independent primal and dual solves agree; certificates are valid."""
    kind = index % 4
    if kind == 0:
        d = int(rng.integers(2, 5))
        cone, T = incoherent_state_cone(d), [random_state(d, rng)]
    elif kind == 1:
        cone, T = _qubit_channel_cone(), [random_channel(2, 2, rng).choi]
    elif kind == 2:
        d = int(rng.integers(2, 4))
        n = int(rng.integers(2, d + 1))
        cone, T = trivial_povm_cone(d, n), random_povm_set(d, 1, n, rng).components()
    else:
        cone = jointly_measurable_cone(2, 2, 2)
        T = random_povm_set(2, 2, 2, rng, eta=rng.uniform(0.5, 0.95)).components()
    sol = solve_projective(T, cone)
    if not sol.finite:
        return {"values": {"kind": kind, "omega": math.inf}, "checks": {}}
    cert_psd = max(-np.linalg.eigvalsh(X)[0] / max(1.0, la.opnorm(X)) for X in sol.A + sol.B)
    norm = abs(sum(np.trace(B @ t).real for B, t in zip(sol.B, T)) - 1)
    W = [b - a for a, b in zip(sol.A, sol.B)]
    if sol.Z is not None:
        W = [w - z for w, z in zip(W, sol.Z)]
    dual_margin = dual_cone_check(cone, W).min_inner_product
    scale = max(1.0, max(la.opnorm(w) for w in W))
    return {
        "values": {"kind": kind, "omega": sol.value, "dual": sol.dual_value},
        "checks": {
            "gap": sol.gap,
            "certificate_psd": cert_psd - 1e-8,
            "certificate_normalization": norm - 1e-8,
            "certificate_dual_cone": -dual_margin / scale - 1e-7,
        },
    }


SUITES = {
    "theorem1": (_monotone_properties, 50, {"default": TOL_ABS}),
    "prop1": (_replacement_equals_state, 20, {"default": TOL_ABS}),
    "prop2": (_incompatibility_embedding, 10, {"default": TOL_EMBEDDING}),
    "theorem2": (_distillation_error, 5, {"default": TOL_BOUND}),
    "corollary2": (_submultiplicativity, 10, {"default": TOL_ABS}),
    "theorem5": (_channel_witness, 10, {"default": 0.0, "upper_chain": TOL_GAME, "achieved_high": TOL_ABS}),
    "theorem7": (_measurement_witness, 10, {"default": 0.0, "upper_chain": TOL_GAME, "achieved_high": TOL_ABS}),
    "appendixA": (_measurement_properties, 50, {"default": TOL_ABS}),
    "duality": (_duality, 100, {"default": 0.0, "gap": TOL_DUALITY}),
}


def thread_count():
    try:
        return max(1, int(os.environ.get("RESMON_THREADS", "1")))
    except ValueError:
        return 1


def _run_one(fn, tols, index, seed):
    rng = np.random.default_rng([seed, index])
    try:
        out = fn(index, rng)
    except ResmonError as exc:
        return {"index": index, "ok": False, "error": f"{type(exc).__name__}: {exc}", "checks": {}, "values": {}}
    passed = {k: v <= tols.get(k, tols["default"]) for k, v in out["checks"].items()}
    return {"index": index, "ok": all(passed.values()), **out}


def run_suite(name, trials=None, seed=0, threads=None):
    """Run a named suite and return its report (instances sorted by index)."""
    if name not in SUITES:
        raise KeyError(name)
    fn, default_trials, tols = SUITES[name]
    trials = default_trials if trials is None else int(trials)
    threads = thread_count() if threads is None else threads
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda i: _run_one(fn, tols, i, seed), range(trials)))
    else:
        results = [_run_one(fn, tols, i, seed) for i in range(trials)]
    results.sort(key=lambda r: r["index"])
    worst = {}
    for r in results:
        for k, v in r["checks"].items():
            worst[k] = max(worst.get(k, -math.inf), v)
    return {
        "suite": name,
        "trials": trials,
        "seed": seed,
        "tolerances": tols,
        "worst_violation": worst,
        "pass": all(r["ok"] for r in results),
        "instances": results,
    }
