"""Conic programs for projective robustness, generalized robustness, weight and ratios.

All programs take a target given as a list of Hermitian components (a state or
Choi matrix is a one-element list, a POVM set is its list of effects) and a
:class:`~resmon.freesets.ConeSpec`.

The projective robustness program is jointly linear in ``(γ, X)``::

    minimize γ   subject to   T ⪯ X ⪯ γ T  (componentwise),   X ∈ cone

Both sandwich constraints are compressed (and whitened) to the support of each target
component, and ``X`` is forced to vanish off that support.  This keeps the
program strictly feasible when the target is rank deficient; a separate
support pre-check decides whether any cone element has exactly the target's
support, and returns ``support_infinite`` otherwise.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg as la
from .conic import ConicProgram, psum, solve
from .errors import DomainError, IllPosedError, NumericalFailure
from .freesets import dual_cone_check

log = logging.getLogger(__name__)

SUPPORT_TOL = 1e-7
DENOMINATOR_TOL = 1e-12
# The denominator floor comes from a conic solve, so its sign is only known
# to about the solver's feasibility accuracy (relative to the coefficients).
FLOOR_TOL = 1e-8
# Independent primal and dual solves must agree to this relative accuracy.
CROSS_GAP_TOL = 1e-6


@dataclass
class ProjectiveSolution:
    """Outcome of a projective robustness computation.

    ``optimizer`` is the optimal cone element ``X`` (the unnormalised free
    object), ``lam * mu == value`` splits it as ``X = lam * N`` with ``N`` on
    the cone's unit slice, and ``A``/``B`` are the dual witnesses normalised
    by ``<B, T> = 1``.
    """

    status: str
    value: float
    optimizer: list = None
    lam: float = math.nan
    mu: float = math.nan
    A: list = None
    B: list = None
    Z: list = None
    dual_value: float = math.nan
    gap: float = math.nan
    support_margin: float = math.nan
    dual_source: str = None
    tolerances: dict = field(default_factory=dict)

    @property
    def finite(self):
        return self.status == "optimal"

    @property
    def free_object(self):
        """Optimizer rescaled onto the unit slice of the cone."""
        if self.optimizer is None:
            return None
        return [x / self.lam for x in self.optimizer]


@dataclass
class RobustnessSolution:
    status: str
    value: float
    free_object: list = None
    gap: float = math.nan


class _Support:
    """Compression maps onto the support of one target component.

    ``isometry`` is ``E -> V^† E V`` for an orthonormal support basis ``V``;
    ``whiten`` is ``E -> S E S^†`` with ``S = T_supp^{-1/2} V^†``, which sends
    the target to the identity.  Sandwich constraints are imposed after
    whitening, which is an equivalent (congruence) form that keeps the
    interior-point iterations well conditioned when ``T`` has small
    eigenvalues.
    """

    def __init__(self, T, rank_tol):
        self.T = T
        self.dim = T.shape[0]
        w, U = la.eigh(T)
        top = float(w[-1]) if w.size else 0.0
        keep = w > rank_tol * top if top > 0 else np.zeros_like(w, dtype=bool)
        V = U[:, keep]
        self.V = V
        self.rank = V.shape[1]
        P = V @ V.conj().T
        S = (V / np.sqrt(w[keep])).conj().T
        self.S = S
        self.isometry = self.whiten = None
        if self.rank:
            self.isometry = la.map_matrix(lambda E: V.conj().T @ E @ V, self.dim, self.rank)
            self.whiten = la.map_matrix(lambda E: S @ E @ S.conj().T, self.dim, self.rank)
        self.off = None
        if self.rank < self.dim:
            self.off = la.map_matrix(lambda E: E - P @ E @ P, self.dim, self.dim)


def _prepare(target, cone, rank_tol):
    comps = [la.as_hermitian(c, herm_tol=1e-8) for c in cone.components_of(target)]
    for c in comps:
        if not la.is_psd(c, max(rank_tol, la.PSD_TOL)):
            raise DomainError("target components must be PSD")
    sup = [_Support(c, rank_tol) for c in comps]
    if all(s.rank == 0 for s in sup):
        raise DomainError("target is zero")
    return comps, sup


def _restrict(prog, X, sup, tag):
    """Force each cone component to vanish off the corresponding target support."""
    for k, (x, s) in enumerate(zip(X, sup)):
        if s.off is not None:
            prog.add_eq(x.map(s.off, s.dim), f"{tag}.off{k}")


def build_support_check(target, cone, rank_tol=la.RANK_TOL):
    """Maximise the least eigenvalue of a cone element on the target's support."""
    _, sup = _prepare(target, cone, rank_tol)
    prog = ConicProgram("support-check")
    t = prog.scalar("t")
    X = cone.add_to(prog)
    _restrict(prog, X, sup, "X")
    for k, (x, s) in enumerate(zip(X, sup)):
        if s.rank:
            prog.add_psd(x.map(s.isometry, s.rank) - t.times(np.eye(s.rank)), f"eig{k}")
    prog.add_psd(1 - cone.normalizer_expr(X), "slice")
    prog.maximize(t)
    return prog


def build_projective_primal(target, cone, rank_tol=la.RANK_TOL):
    comps, sup = _prepare(target, cone, rank_tol)
    prog = ConicProgram("projective-primal")
    g = prog.scalar("gamma")
    X = cone.add_to(prog)
    _restrict(prog, X, sup, "X")
    for k, (x, T, s) in enumerate(zip(X, comps, sup)):
        if s.rank:
            prog.add_psd(x.map(s.whiten, s.rank) - np.eye(s.rank), f"lower{k}")
            prog.add_psd(g.times(np.eye(s.rank)) - x.map(s.whiten, s.rank), f"upper{k}")
    prog.minimize(g)
    return prog


def _dual_parts(prog, comps, sup):
    A, B, W = [], [], []
    for k, (T, s) in enumerate(zip(comps, sup)):
        if s.rank:
            a = prog.block(f"a{k}", s.rank, psd=True).map(s.isometry.T, s.dim)
            b = prog.block(f"b{k}", s.rank, psd=True).map(s.isometry.T, s.dim)
        else:
            a = b = None
        w = (b - a) if s.rank else None
        if s.off is not None:
            z = prog.block(f"z{k}", s.dim).map(s.off.T, s.dim)
            w = -z if w is None else w - z
        A.append(a)
        B.append(b)
        W.append(w)
    return A, B, W


def build_projective_dual(target, cone, rank_tol=la.RANK_TOL):
    """``max <A,T>`` s.t. ``<B,T> = 1``, ``A, B ⪰ 0`` on supp T, ``B - A - Z ∈ cone*``.

    ``Z`` is a multiplier living off the target's support; it is absent
    (identically zero) when every target component has full rank.
    """
    comps, sup = _prepare(target, cone, rank_tol)
    prog = ConicProgram("projective-dual")
    A, B, W = _dual_parts(prog, comps, sup)
    cone.add_dual_membership(prog, W)
    prog.add_eq(psum([b.inner(T) for b, T in zip(B, comps) if b is not None]) - 1, "normalization")
    prog.maximize(psum([a.inner(T) for a, T in zip(A, comps) if a is not None]))
    return prog


def _lift(res, comps, sup, name):
    out = []
    for k, s in enumerate(sup):
        key = f"{name}{k}"
        if key in res.primal:
            v = res.primal[key]
            out.append(s.V @ v @ s.V.conj().T if name in "ab" else v - _project(v, s))
        else:
            out.append(np.zeros_like(comps[k]))
    return out


def _project(v, s):
    P = s.V @ s.V.conj().T
    return P @ v @ P


def support_margin(target, cone, rank_tol=la.RANK_TOL):
    res = solve(build_support_check(target, cone, rank_tol))
    if res.status == "infeasible":
        return 0.0
    if not res.ok:
        raise NumericalFailure(f"support pre-check failed ({res.status})")
    return max(res.value, 0.0)


def solve_projective(
    target, cone, rank_tol=la.RANK_TOL, gap_tol=1e-7, feas_tol=1e-8, support_tol=SUPPORT_TOL, cross_gap_tol=CROSS_GAP_TOL
):
    """Projective robustness with optimizer, ``(λ, μ)`` split and dual witnesses.

    The primal and the dual programs are solved independently; ``gap`` is the
    relative difference of their optimal values and must not exceed
    ``cross_gap_tol``.  Each program is certified on its own at ``gap_tol``.
    Both programs only see the target rescaled to unit total trace (the value
    is scale invariant); optimizer and witnesses are scaled back afterwards.
    """
    comps, _ = _prepare(target, cone, rank_tol)
    scale = sum(np.trace(c).real for c in comps)
    comps, sup = _prepare([c / scale for c in comps], cone, rank_tol)
    tols = {"rank_tol": rank_tol, "gap_tol": gap_tol, "feas_tol": feas_tol, "support_tol": support_tol,
            "cross_gap_tol": cross_gap_tol}
    margin = support_margin(comps, cone, rank_tol)
    if margin <= support_tol:
        return ProjectiveSolution("support_infinite", math.inf, support_margin=margin, tolerances=tols)

    primal = solve(build_projective_primal(comps, cone, rank_tol), gap_tol, feas_tol)
    if not primal.ok:
        raise NumericalFailure(f"projective program not certified (primal {primal.status})")
    gamma = primal.value
    dual = solve(build_projective_dual(comps, cone, rank_tol), gap_tol, feas_tol)
    cert, source = None, "independent"
    if dual.ok and abs(gamma - dual.value) / max(1.0, abs(gamma)) <= cross_gap_tol:
        Z = _lift(dual, comps, sup, "z") if any(s.off is not None for s in sup) else None
        cert = (_lift(dual, comps, sup, "a"), _lift(dual, comps, sup, "b"), Z, dual.value)
    else:
        # Badly conditioned targets can leave the independent dual solve a
        # little less accurate than the whitened primal; the primal's own
        # multipliers then give a certificate, accepted only after it is
        # verified from scratch.
        log.info("independent dual rejected (%s); using primal multipliers", dual.status)
        cert = _certificate_from_multipliers(primal, comps, sup, cone, feas_tol)
        source = "primal_multipliers"
    if cert is None:
        raise NumericalFailure(
            f"no verified dual certificate (independent dual {dual.status}, value {dual.value!r}, primal {gamma!r})"
        )
    A, B, Z, dual_value = cert
    gap = abs(gamma - dual_value) / max(1.0, abs(gamma))
    if gap > cross_gap_tol:
        raise NumericalFailure(f"primal {gamma!r} and dual {dual_value!r} disagree (relative gap {gap:.2e})")
    blocks = {b.name: primal.primal[f"free.{b.name}"] for b in cone.blocks}
    X = [x * scale for x in cone.assemble(blocks)]
    lam = cone.normalizer(X)
    return ProjectiveSolution(
        status="optimal",
        value=gamma,
        optimizer=X,
        lam=lam,
        mu=gamma / lam,
        A=[a / scale for a in A],
        B=[b / scale for b in B],
        Z=None if Z is None else [z / scale for z in Z],
        dual_value=dual_value,
        gap=gap,
        support_margin=margin,
        dual_source=source,
        tolerances=tols,
    )


def _certificate_from_multipliers(primal, comps, sup, cone, feas_tol):
    """Dual witnesses ``A = S^† Y_lo S``, ``B = S^† Y_up S`` from the whitened sandwich multipliers.

    Returns ``None`` unless ``A, B ⪰ 0``, ``<B, T> = 1`` and ``B - A - Z`` lies
    in the dual cone, all to ``10 * feas_tol``.
    """
    A, B, Z = [], [], []
    for k, (T, s) in enumerate(zip(comps, sup)):
        if s.rank:
            A.append(s.S.conj().T @ primal.dual[f"lower{k}"] @ s.S)
            B.append(s.S.conj().T @ primal.dual[f"upper{k}"] @ s.S)
        else:
            A.append(np.zeros_like(T))
            B.append(np.zeros_like(T))
        if s.off is not None:
            nu = la.from_coords(primal.dual[f"X.off{k}"], s.dim)
            Z.append(_project(nu, s) - nu)
        else:
            Z.append(np.zeros_like(T))
    tol = 10 * feas_tol
    if not all(la.is_psd(X, tol) for X in A + B):
        return None
    if abs(sum(np.trace(b @ t).real for b, t in zip(B, comps)) - 1) > tol:
        return None
    W = [b - a - z for a, b, z in zip(A, B, Z)]
    scale = max(1.0, max(la.opnorm(w) for w in W))
    if dual_cone_check(cone, W).min_inner_product < -tol * scale:
        return None
    value = sum(np.trace(a @ t).real for a, t in zip(A, comps))
    has_off = any(s.off is not None for s in sup)
    return A, B, (Z if has_off else None), value


def build_robustness_program(target, cone, which, rank_tol=la.RANK_TOL):
    """Generalized robustness (``min λ : T ⪯ λ N``) or weight (``max μ : μ N ⪯ T``), N on the unit slice."""
    comps, sup = _prepare(target, cone, rank_tol)
    prog = ConicProgram(f"{which}-robustness")
    X = cone.add_to(prog)
    if which == "generalized":
        lam = prog.scalar("value")
        for k, (x, T) in enumerate(zip(X, comps)):
            prog.add_psd(x - T, f"dominate{k}")
        prog.add_eq(cone.normalizer_expr(X) - lam, "slice")
        prog.minimize(lam)
    elif which == "weight":
        mu = prog.scalar("value")
        _restrict(prog, X, sup, "X")
        for k, (x, T, s) in enumerate(zip(X, comps, sup)):
            if s.rank:
                prog.add_psd(np.eye(s.rank) - x.map(s.whiten, s.rank), f"dominated{k}")
        prog.add_eq(cone.normalizer_expr(X) - mu, "slice")
        prog.maximize(mu)
    else:
        raise DomainError(f"unknown robustness kind {which!r}")
    return prog


def solve_robustness(target, cone, which, rank_tol=la.RANK_TOL, gap_tol=1e-7, feas_tol=1e-8):
    res = solve(build_robustness_program(target, cone, which, rank_tol), gap_tol, feas_tol)
    if res.status == "infeasible" and which == "generalized":
        return RobustnessSolution("infeasible", math.inf)
    if not res.ok:
        raise NumericalFailure(f"{which} robustness program failed ({res.status})")
    X = cone.assemble({b.name: res.primal[f"free.{b.name}"] for b in cone.blocks})
    # cone components are PSD; drop the solver's residual negative eigenvalues
    N = [la.psd_part(x / res.value) for x in X] if res.value > 0 else None
    return RobustnessSolution("optimal", res.value, N, res.gap)


def solve_linear_fractional(numerator, denominator, cone, direction="max", gap_tol=1e-7, feas_tol=1e-8):
    """Optimise ``<num, X> / <den, X>`` over nonzero cone elements (Charnes-Cooper).

    ``numerator`` and ``denominator`` are lists of Hermitian coefficient
    operators, one per cone component.  The denominator must be nonnegative
    on the free set and the ratio must stay bounded where it vanishes;
    otherwise it is ill-posed.
    """
    num = [la.as_hermitian(w, herm_tol=1e-8) for w in numerator]
    den = [la.as_hermitian(w, herm_tol=1e-8) for w in denominator]
    floor = dual_cone_check(cone, den).min_inner_product
    if floor < -FLOOR_TOL * max(1.0, max(la.opnorm(w) for w in den)):
        raise IllPosedError(f"denominator reaches {floor:.3e} on the free set; the ratio is not well defined")
    prog = ConicProgram("linear-fractional")
    Y = cone.add_to(prog)
    prog.add_eq(psum([y.inner(w) for y, w in zip(Y, den)]) - 1, "denominator")
    obj = psum([y.inner(w) for y, w in zip(Y, num)])
    if direction == "max":
        prog.maximize(obj)
    elif direction == "min":
        prog.minimize(obj)
    else:
        raise DomainError(f"direction must be 'max' or 'min', got {direction!r}")
    res = solve(prog, gap_tol, feas_tol)
    if res.status == "unbounded":
        raise IllPosedError("the ratio is unbounded on the free set")
    if not res.ok:
        raise NumericalFailure(f"linear-fractional program failed ({res.status})")
    Yv = cone.assemble({b.name: res.primal[f"free.{b.name}"] for b in cone.blocks})
    s = cone.normalizer(Yv)
    res.primal = {"optimizer": [y / s for y in Yv], "denominator_floor": floor}
    return res
