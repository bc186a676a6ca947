"""User-facing resource monotones: projective robustness, generalized robustness and weight."""
import math

import numpy as np

from . import linalg as la
from .divergence import rmax_components
from .errors import DomainError
from .freesets import as_components, embedded_jm_channel_cone, jointly_measurable_cone
from .objects import Channel, PovmSet, density, embed_povmset_channel
from .programs import solve_projective, solve_robustness

BOUND_TOL = 1e-6
EMBEDDING_TOL = 1e-5
# Weights below the solver's feasibility accuracy are indistinguishable from 0.
WEIGHT_ZERO_TOL = 1e-8


def _check_kind(cone, kind):
    if cone.object_kind != kind:
        raise DomainError(f"expected a {kind} cone, got a {cone.object_kind} cone ({cone.kind})")


def proj_robustness(obj, cone, **tols):
    """Projective robustness of any object against a matching cone; see :func:`solve_projective`."""
    return solve_projective(as_components(obj), cone, **tols)


def proj_robustness_state(rho, cone, **tols):
    _check_kind(cone, "state")
    return solve_projective([density(rho)], cone, **tols)


def proj_robustness_channel(ch, cone, **tols):
    _check_kind(cone, "channel")
    if not isinstance(ch, Channel):
        raise DomainError("expected a Channel")
    if (ch.dim_in, ch.dim_out) != (cone.shape["dim_in"], cone.shape["dim_out"]):
        raise DomainError("channel dimensions do not match the free cone")
    return solve_projective([ch.choi], cone, **tols)


def proj_robustness_measurement(ms, cone, **tols):
    _check_kind(cone, "povm")
    if not isinstance(ms, PovmSet) or ms.m != 1:
        raise DomainError("expected a single POVM (a PovmSet with m = 1)")
    return solve_projective(ms.components(), cone, **tols)


def proj_robustness_incompatibility(ms, **tols):
    """Projective robustness against the jointly measurable cone of matching shape."""
    cone = jointly_measurable_cone(ms.dim, ms.m, ms.n)
    return solve_projective(ms.components(), cone, **tols)


def gen_robustness(obj, cone, rank_tol=la.RANK_TOL):
    return solve_robustness(as_components(obj), cone, "generalized", rank_tol)


def weight(obj, cone, rank_tol=la.RANK_TOL):
    return solve_robustness(as_components(obj), cone, "weight", rank_tol)


def _close_le(a, b, tol):
    if math.isinf(b):
        return True
    if math.isinf(a):
        return False
    return a <= b + tol * max(1.0, abs(b))


def bounds_report(obj, cone, rank_tol=la.RANK_TOL, tol=BOUND_TOL):
    """Sandwich ``R / W <= Ω <= min(R · R_max(N_R‖T), R_max(T‖N_W) / W)``.

    ``N_R`` and ``N_W`` are the optimal free objects of the generalized
    robustness and weight programs.  Infinite quantities propagate.
    """
    T = as_components(obj)
    omega = solve_projective(T, cone, rank_tol=rank_tol).value
    R = gen_robustness(T, cone, rank_tol)
    W = weight(T, cone, rank_tol)
    w_inv = math.inf if W.value <= WEIGHT_ZERO_TOL else 1.0 / W.value
    lower = R.value * w_inv if not math.isinf(w_inv) else math.inf
    upper1 = math.inf if R.free_object is None else R.value * rmax_components(R.free_object, T, rank_tol)
    upper2 = math.inf if W.free_object is None else w_inv * rmax_components(T, W.free_object, rank_tol)
    ok = _close_le(lower, omega, tol) and _close_le(omega, min(upper1, upper2), tol)
    return {
        "lower": lower,
        "omega": omega,
        "upper1": upper1,
        "upper2": upper2,
        "robustness": R.value,
        "weight": W.value,
        "ok": ok,
        "tol": tol,
    }


def prop2_check(ms, tol=EMBEDDING_TOL, **tols):
    """Compare incompatibility robustness with that of the embedding channel against embedded parents."""
    a = proj_robustness_incompatibility(ms, **tols).value
    cone = embedded_jm_channel_cone(ms.dim, ms.m, ms.n)
    b = proj_robustness_channel(embed_povmset_channel(ms), cone, **tols).value
    if math.isinf(a) and math.isinf(b):
        diff = 0.0
    elif math.isinf(a) or math.isinf(b):
        diff = math.inf
    else:
        diff = abs(a - b)
    return {"omega_incompat": a, "omega_channel": b, "diff": diff, "ok": diff <= tol}


# --- JSON ---------------------------------------------------------------------

def number_json(x):
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(x)


def _mats(ms):
    return None if ms is None else [la.matrix_to_json(np.asarray(m)) for m in ms]


def projective_result_json(sol, name="omega"):
    out = {"monotone": name, "value": number_json(sol.value), "status": sol.status}
    if sol.status == "support_infinite":
        out["reason"] = "support"
        out["support_margin"] = sol.support_margin
    else:
        out["optimizer"] = _mats(sol.optimizer)
        out["lambda"] = sol.lam
        out["mu"] = sol.mu
        out["dual"] = {"A": _mats(sol.A), "B": _mats(sol.B)}
        if sol.Z is not None:
            out["dual"]["Z"] = _mats(sol.Z)
        out["gap"] = sol.gap
        out["dual"]["source"] = sol.dual_source
    out["tolerances"] = sol.tolerances
    return out


def robustness_result_json(sol, name):
    return {
        "monotone": name,
        "value": number_json(sol.value),
        "status": sol.status,
        "optimizer": _mats(sol.free_object),
        "gap": sol.gap,
    }
