"""Limits on deterministic resource distillation.

Channel fidelities, overlaps with the free set, the error and overhead
bounds implied by projective robustness, and submultiplicativity checks for
tensor products and compositions.
"""
import math

import numpy as np
from scipy.optimize import minimize

from . import linalg as la
from .conic import ConicProgram, solve
from .errors import ConfigurationError, DomainError, NumericalFailure
from .freesets import cone_from_registry
from .monotones import proj_robustness_channel
from .objects import Channel, apply_on_second, compose_channels, density, replacement_output, tensor_channels
from .randomgen import rng_from

PURE_TOL = 1e-8
# Ω within this relative distance of 1 is treated as exactly 1 (free); solver
# values are only accurate to about this level.
OMEGA_ONE_TOL = 1e-6
SUBMULT_REL_TOL = 1e-6


def _check_pure(phi):
    phi = density(phi)
    purity = np.trace(phi @ phi).real
    if abs(purity - 1) > PURE_TOL:
        raise DomainError(f"state is not pure (purity {purity:.10f})")
    return phi


def free_overlap_state(phi, cone):
    """``max <φ, σ>`` over free density operators (a conic LP over the unit slice)."""
    if cone.object_kind != "state":
        raise DomainError("free overlap of a state needs a state cone")
    phi = _check_pure(phi)
    prog = ConicProgram("free-overlap")
    (X,) = cone.add_to(prog)
    prog.add_eq(cone.normalizer_expr([X]) - 1, "slice")
    prog.maximize(X.inner(phi))
    res = solve(prog)
    if res.status == "infeasible":
        raise DomainError("the free set is empty")
    if not res.ok:
        raise NumericalFailure(f"free-overlap program failed ({res.status})")
    return float(min(max(res.value, 0.0), 1.0))


def _pure_input(params, d):
    v = params[: d] + 1j * params[d:]
    n = np.linalg.norm(v)
    v = v / n if n > 0 else np.eye(d)[0]
    return np.outer(v, v.conj())


def _input_fidelity(e, f, psi):
    """Fidelity of the two outputs on a pure input, without re-validating them.

    Both outputs are density operators by construction, and this runs inside
    the optimiser loop, where the checks in :func:`linalg.fidelity` dominate.
    """
    d = e.dim_in
    rho, sigma = apply_on_second(e, psi, d), apply_on_second(f, psi, d)
    w, V = np.linalg.eigh((rho + rho.conj().T) / 2)
    s = (V * np.sqrt(np.clip(w, 0, None))) @ V.conj().T
    ev = np.linalg.eigvalsh(s @ sigma @ s)
    return min(float(np.sum(np.sqrt(np.clip(ev, 0, None))) ** 2), 1.0)


def worst_case_fidelity(e, f, mode="exact_replacement", samples=64, seed=0):
    """``min_ψ F((id⊗E)(ψ), (id⊗F)(ψ))`` with a flag saying how it was obtained.

    ``exact_replacement`` requires both channels to be replacement channels
    and returns the exact value ``F(ω, τ)``.  ``sampled`` minimises over a
    seeded net of pure inputs (including the maximally entangled one) with a
    Nelder-Mead refinement of the best candidates; the result can only
    overestimate the true minimum, so it is flagged as an upper bound.
    """
    if (e.dim_in, e.dim_out) != (f.dim_in, f.dim_out):
        raise DomainError("channels have different dimensions")
    if mode == "exact_replacement":
        w, t = replacement_output(e), replacement_output(f)
        if w is None or t is None:
            raise ConfigurationError("exact mode needs two replacement channels")
        return la.fidelity(w, t), "exact"
    if mode != "sampled":
        raise ConfigurationError(f"unknown fidelity mode {mode!r}")
    d = e.dim_in
    D = d * d
    rng = rng_from(seed)
    phi = np.eye(d).reshape(-1) / np.sqrt(d)
    starts = [np.concatenate([phi.real, phi.imag])]
    starts += [np.concatenate([np.eye(D)[k], np.zeros(D)]) for k in range(D)]
    starts += [rng.standard_normal(2 * D) for _ in range(samples)]
    scored = sorted(((_input_fidelity(e, f, _pure_input(p, D)), i) for i, p in enumerate(starts)))
    best = scored[0][0]
    for _, i in scored[:3]:
        opt = minimize(lambda p: _input_fidelity(e, f, _pure_input(p, D)), starts[i], method="Nelder-Mead",
                       options={"xatol": 1e-9, "fatol": 1e-12, "maxfev": 3000})
        best = min(best, float(opt.fun))
    return best, "sampled_upper_bound"


def free_overlap_channel(target, cone, mode="exact_replacement", samples=64, seed=0):
    """Largest worst-case fidelity between ``target`` and a free channel.

    Replacement targets over replacement cones collapse exactly to the state
    overlap of the output.  Anything else uses a heuristic: the candidate free
    channels are the cone elements maximising ``<J_T, J>`` and the interior
    point, and their worst-case fidelity is sampled.
    """
    if cone.object_kind != "channel":
        raise DomainError("free overlap of a channel needs a channel cone")
    phi = replacement_output(target)
    if mode == "exact_replacement":
        if cone.kind != "replacement" or phi is None:
            raise ConfigurationError("exact mode needs a replacement target and a replacement cone")
        base = cone_from_registry(cone.params["base"], phi)
        return free_overlap_state(phi, base), "exact"
    prog = ConicProgram("channel-overlap")
    (X,) = cone.add_to(prog)
    prog.add_eq(cone.normalizer_expr([X]) - 1, "slice")
    prog.maximize(X.inner(target.choi))
    res = solve(prog)
    if not res.ok:
        raise NumericalFailure(f"candidate search failed ({res.status})")
    cands = [cone.assemble({b.name: res.primal[f"free.{b.name}"] for b in cone.blocks})[0]]
    if cone.interior is not None:
        cands.append(cone.interior_components()[0])
    best = 0.0
    for J in cands:
        J = J / (np.trace(J).real / target.dim_in)
        ch = Channel(target.dim_in, target.dim_out, J)
        best = max(best, worst_case_fidelity(target, ch, "sampled", samples, seed)[0])
    return best, "heuristic"


def error_bound(omega, overlap):
    """Lower bound ``(F/(1-F) · Ω + 1)^{-1}`` on the error of any free conversion."""
    if not (0 < overlap <= 1):
        raise DomainError("overlap must lie in (0, 1]")
    if omega < 1 - OMEGA_ONE_TOL:
        raise DomainError("projective robustness is at least 1")
    omega = max(omega, 1.0)
    if overlap == 1 or math.isinf(omega):
        return 0.0
    return 1.0 / (overlap / (1 - overlap) * omega + 1)


def overhead_bound(omega, overlap, eps):
    """Least ``n`` allowed by ``Ω^n >= (1-ε)(1-F)/(εF)``, as a real number (callers round up)."""
    if not (0 < eps < 1) or not (0 < overlap < 1):
        raise DomainError("need 0 < eps < 1 and 0 < overlap < 1")
    arg = (1 - eps) * (1 - overlap) / (eps * overlap)
    if omega <= 1 + OMEGA_ONE_TOL:
        if arg > 1:
            raise DomainError(
                "Ω = 1 cannot reach the target at this error: the bound is infinite"
            )
        raise DomainError("the overhead bound is undefined for Ω = 1")
    if math.isinf(omega):
        return 0.0
    return math.log(arg) / math.log(omega)


def check_pure_to_pure(ch, samples=32, seed=0, tol=PURE_TOL):
    """True when the channel maps every sampled pure input to a pure output."""
    rng = rng_from(seed)
    for _ in range(samples):
        v = rng.standard_normal(ch.dim_in) + 1j * rng.standard_normal(ch.dim_in)
        v /= np.linalg.norm(v)
        out = ch(np.outer(v, v.conj()))
        if abs(np.trace(out @ out).real - 1) > tol:
            return False
    return True


def _combine(e, f, mode):
    if mode == "tensor":
        return tensor_channels(e, f)
    if mode == "compose":
        return compose_channels(e, f)
    raise ConfigurationError(f"unknown combination mode {mode!r}")


def submultiplicativity_check(e, f, cone, cone_product, mode, tol=SUBMULT_REL_TOL):
    """``Ω(E ⋆ F) <= Ω(E) Ω(F)`` for ``⋆`` a tensor product or composition.

    The product cone must contain the combination of free elements; this is
    checked on the stored interior points first.
    """
    dims = (cone.shape["dim_in"], cone.shape["dim_out"])
    if (e.dim_in, e.dim_out) != dims or (f.dim_in, f.dim_out) != dims:
        raise ConfigurationError("both channels must match the dimensions of the free cone")
    free = cone.interior_components()
    if free is not None:
        J = free[0] / (np.trace(free[0]).real / cone.shape["dim_in"])
        Xi = Channel(cone.shape["dim_in"], cone.shape["dim_out"], J)
        if not cone_product.contains(_combine(Xi, Xi, mode)):
            raise ConfigurationError("product cone is not closed under the requested operation")
    lhs = proj_robustness_channel(_combine(e, f, mode), cone_product).value
    rhs = proj_robustness_channel(e, cone).value * proj_robustness_channel(f, cone).value
    ok = math.isinf(rhs) or lhs <= rhs * (1 + tol)
    return {"lhs": lhs, "rhs": rhs, "ok": ok, "mode": mode}


def conversion_error(output, target):
    """Infidelity ``1 - F`` between two replacement channels (exact)."""
    F, _ = worst_case_fidelity(output, target, "exact_replacement")
    return 1 - F

