"""Small dense conic programs over Hermitian matrix variables.

A :class:`ConicProgram` is written in terms of :class:`Affine` expressions:
real-affine maps from the program variables to Hermitian operators, stored in
the real coordinates of :func:`resmon.linalg.herm_basis`.  Constraints are
``expr ⪰ 0`` and ``expr == 0``; the objective is a scalar expression.

:func:`solve` hands the program to the Clarabel interior-point solver (the
Hermitian PSD cone is mapped to the real symmetric cone through the standard
``[[Re, -Im], [Im, Re]]`` embedding) and then re-checks the returned point
itself.  ``status == "optimal"`` is only reported when primal residuals and
the primal-dual gap are within the requested tolerances.
"""
import json
import logging
from dataclasses import dataclass, field
from functools import lru_cache

import clarabel
import numpy as np
import scipy.sparse as sp

from . import linalg as la
from .errors import DomainError

log = logging.getLogger(__name__)

GAP_TOL = 1e-7
FEAS_TOL = 1e-8
MAX_ITER = 200


class Affine:
    """Affine map ``variables -> Hermitian(dim)`` in Hermitian coordinates.

    ``const`` has length ``dim**2``; ``terms[name]`` is a ``(dim**2, size)``
    matrix acting on the coordinates of variable ``name``.
    """

    __slots__ = ("dim", "const", "terms")
    __array_ufunc__ = None  # make ``ndarray - Affine`` defer to Affine.__rsub__

    def __init__(self, dim, const=None, terms=None):
        self.dim = int(dim)
        n = self.dim * self.dim
        self.const = np.zeros(n) if const is None else np.asarray(const, dtype=float).reshape(n)
        self.terms = dict(terms or {})

    @classmethod
    def constant(cls, H):
        H = np.atleast_2d(np.asarray(H, dtype=complex))
        return cls(H.shape[0], la.to_coords(H))

    def _coerce(self, other):
        if isinstance(other, Affine):
            if other.dim != self.dim:
                raise DomainError(f"dimension mismatch {self.dim} vs {other.dim}")
            return other
        if np.isscalar(other):
            if self.dim != 1:
                raise DomainError("scalar added to a matrix-valued expression")
            return Affine(1, [float(np.real(other))])
        return Affine.constant(other)

    def __add__(self, other):
        other = self._coerce(other)
        terms = dict(self.terms)
        for k, v in other.terms.items():
            terms[k] = terms[k] + v if k in terms else v
        return Affine(self.dim, self.const + other.const, terms)

    __radd__ = __add__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, s):
        s = float(s)
        return Affine(self.dim, s * self.const, {k: s * v for k, v in self.terms.items()})

    __rmul__ = __mul__

    def map(self, L, dim_out):
        """Apply a linear map given by its real coordinate matrix ``(dim_out**2, dim**2)``."""
        L = np.asarray(L, dtype=float)
        return Affine(dim_out, L @ self.const, {k: L @ v for k, v in self.terms.items()})

    def inner(self, W):
        """Scalar expression ``<W, self>`` for a constant Hermitian ``W``."""
        w = la.to_coords(W)[None, :]
        return self.map(w, 1)

    def times(self, T):
        """For a scalar expression ``s``, the matrix expression ``s * T``."""
        if self.dim != 1:
            raise DomainError("times() needs a scalar expression")
        t = la.to_coords(T)[:, None]
        T = np.atleast_2d(T)
        return Affine(T.shape[0], (t * self.const[0]).ravel(), {k: t @ v for k, v in self.terms.items()})

    def value(self, values):
        """Coordinates of the expression at a variable assignment (coordinates per variable)."""
        out = self.const.copy()
        for k, v in self.terms.items():
            out = out + v @ values[k]
        return out

    def to_json(self):
        return {"dim": self.dim, "const": self.const.tolist(), "terms": {k: v.tolist() for k, v in self.terms.items()}}

    @classmethod
    def from_json(cls, obj):
        return cls(obj["dim"], obj["const"], {k: np.array(v, dtype=float) for k, v in obj["terms"].items()})


def psum(exprs, dim=None):
    exprs = list(exprs)
    if not exprs:
        return Affine(dim or 1)
    out = exprs[0]
    for e in exprs[1:]:
        out = out + e
    return out


@dataclass
class SolveResult:
    status: str
    value: float
    primal: dict = field(default_factory=dict)
    dual: dict = field(default_factory=dict)
    gap: float = float("nan")
    residuals: dict = field(default_factory=dict)
    info: dict = field(default_factory=dict)

    @property
    def ok(self):
        return self.status == "optimal"


class ConicProgram:
    """Declarative conic program; see module docstring."""

    def __init__(self, name=""):
        self.name = name
        self.variables = {}
        self.psd = []
        self.equalities = []
        self.sense = "min"
        self.objective = Affine(1)

    def _add_var(self, name, kind, dim):
        if name in self.variables:
            raise DomainError(f"duplicate variable {name!r}")
        self.variables[name] = (kind, int(dim))
        n = dim * dim
        return Affine(dim, np.zeros(n), {name: np.eye(n)})

    def scalar(self, name, nonneg=False):
        x = self._add_var(name, "scalar", 1)
        if nonneg:
            self.add_psd(x, f"{name}>=0")
        return x

    def block(self, name, dim, psd=False):
        X = self._add_var(name, "block", dim)
        if psd:
            self.add_psd(X, f"{name}>>0")
        return X

    def add_psd(self, expr, label=None):
        for k in expr.terms:
            if k not in self.variables:
                raise DomainError(f"unknown variable {k!r} in constraint")
        self.psd.append((label or f"psd{len(self.psd)}", expr))

    def add_eq(self, expr, label=None):
        for k in expr.terms:
            if k not in self.variables:
                raise DomainError(f"unknown variable {k!r} in constraint")
        self.equalities.append((label or f"eq{len(self.equalities)}", expr))

    def minimize(self, expr):
        self.sense, self.objective = "min", expr

    def maximize(self, expr):
        self.sense, self.objective = "max", expr

    def offsets(self):
        out, pos = {}, 0
        for name, (_, dim) in self.variables.items():
            out[name] = slice(pos, pos + dim * dim)
            pos += dim * dim
        return out, pos

    def to_json(self):
        return {
            "name": self.name,
            "variables": [{"name": k, "kind": kind, "dim": d} for k, (kind, d) in self.variables.items()],
            "psd": [{"label": lab, "expr": e.to_json()} for lab, e in self.psd],
            "equalities": [{"label": lab, "expr": e.to_json()} for lab, e in self.equalities],
            "objective": {"sense": self.sense, "expr": self.objective.to_json()},
        }

    def dumps(self):
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, obj):
        prog = cls(obj.get("name", ""))
        for v in obj["variables"]:
            prog.variables[v["name"]] = (v["kind"], int(v["dim"]))
        prog.psd = [(c["label"], Affine.from_json(c["expr"])) for c in obj["psd"]]
        prog.equalities = [(c["label"], Affine.from_json(c["expr"])) for c in obj["equalities"]]
        prog.sense = obj["objective"]["sense"]
        prog.objective = Affine.from_json(obj["objective"]["expr"])
        return prog

    @classmethod
    def loads(cls, text):
        return cls.from_json(json.loads(text))


# --- translation to Clarabel ----------------------------------------------

@lru_cache(maxsize=None)
def _embed_matrix(d):
    """Matrix sending Hermitian coordinates to the scaled upper-triangle vector of the real embedding."""
    n = 2 * d
    idx = [(i, j) for j in range(n) for i in range(j + 1)]
    scale = np.array([1.0 if i == j else np.sqrt(2) for i, j in idx])
    rows = []
    for B in la.herm_basis(d):
        R, I = B.real, B.imag
        S = np.block([[R, -I], [I, R]])
        rows.append(np.array([S[i, j] for i, j in idx]) * scale)
    M = np.array(rows).T
    M.setflags(write=False)
    return M


def _dense_terms(expr, offsets, nvar):
    F = np.zeros((expr.dim * expr.dim, nvar))
    for k, v in expr.terms.items():
        F[:, offsets[k]] += v
    return F


def _term_scale(expr, values):
    """Magnitude of the largest term of an affine expression (at least 1), for relative residuals."""
    scale = max(1.0, float(np.max(np.abs(expr.const))) if expr.const.size else 1.0)
    for k, F in expr.terms.items():
        scale = max(scale, float(np.max(np.abs(F @ values[k]))))
    return scale


def solve(prog, gap_tol=GAP_TOL, feas_tol=FEAS_TOL, max_iter=MAX_ITER, verbose=False):
    """Solve ``prog`` and certify the result; never raises on solver trouble."""
    offsets, nvar = prog.offsets()
    A_blocks, b_blocks, cones, cone_meta = [], [], [], []

    if prog.equalities:
        Fs = [_dense_terms(e, offsets, nvar) for _, e in prog.equalities]
        cs = [e.const for _, e in prog.equalities]
        A_blocks.append(np.vstack(Fs))
        b_blocks.append(-np.concatenate(cs))
        cones.append(clarabel.ZeroConeT(sum(len(c) for c in cs)))
        cone_meta.append(("eq", None))

    for label, e in prog.psd:
        F = _dense_terms(e, offsets, nvar)
        if e.dim == 1:
            A_blocks.append(-F)
            b_blocks.append(e.const.copy())
            cones.append(clarabel.NonnegativeConeT(1))
        else:
            E = _embed_matrix(e.dim)
            A_blocks.append(-(E @ F))
            b_blocks.append(E @ e.const)
            cones.append(clarabel.PSDTriangleConeT(2 * e.dim))
        cone_meta.append(("psd", label))

    c = _dense_terms(prog.objective, offsets, nvar)[0]
    sign = 1.0 if prog.sense == "min" else -1.0
    A = sp.csc_matrix(np.vstack(A_blocks)) if A_blocks else sp.csc_matrix((0, nvar))
    b = np.concatenate(b_blocks) if b_blocks else np.zeros(0)
    P = sp.csc_matrix((nvar, nvar))

    attempts = []
    for tweak in _RETRY_SETTINGS:
        res = _solve_once(prog, P, sign, c, A, b, cones, cone_meta, offsets, tweak, gap_tol, feas_tol, max_iter, verbose)
        if res.status in ("optimal", "infeasible", "unbounded"):
            return res
        attempts.append(res)
    res = attempts[0]
    log.warning(
        "program %r not certified: status=%s gap=%.2e residuals=%s",
        prog.name, res.info.get("solver_status"), res.gap, res.residuals,
    )
    return res


# Equilibration occasionally drives Clarabel into InsufficientProgress on
# degenerate spectra; a fresh solve without it (or with stronger static
# regularisation) recovers in every case seen so far.
_RETRY_SETTINGS = (
    {},
    {"equilibrate_enable": False},
    {"static_regularization_constant": 1e-7},
)


def _solve_once(prog, P, sign, c, A, b, cones, cone_meta, offsets, tweak, gap_tol, feas_tol, max_iter, verbose):
    settings = clarabel.DefaultSettings()
    settings.verbose = verbose
    settings.max_iter = max_iter
    settings.tol_gap_abs = 1e-10
    settings.tol_gap_rel = 1e-10
    settings.tol_feas = 1e-10
    settings.tol_ktratio = 1e-8
    settings.presolve_enable = False
    for key, val in tweak.items():
        setattr(settings, key, val)
    try:
        sol = clarabel.DefaultSolver(P, sign * c, A, b, cones, settings).solve()
    except BaseException as exc:  # clarabel raises PanicException from Rust
        if isinstance(exc, (KeyboardInterrupt, SystemExit)):
            raise
        log.info("solver raised %s", exc)
        return SolveResult("numerical_failure", float("nan"), info={"error": str(exc), "solver_status": "panic"})

    status = str(sol.status)
    info = {"solver_status": status, "iterations": int(sol.iterations), "solve_time": float(sol.solve_time)}
    if status == "PrimalInfeasible":
        value = float("inf") if prog.sense == "min" else float("-inf")
        return SolveResult("infeasible", value, info=info)
    if status == "DualInfeasible":
        value = float("-inf") if prog.sense == "min" else float("inf")
        return SolveResult("unbounded", value, info=info)

    x = np.asarray(sol.x, dtype=float)
    values = {k: x[s] for k, s in offsets.items()}
    primal = {}
    for k, (kind, d) in prog.variables.items():
        primal[k] = float(values[k][0]) if kind == "scalar" else la.from_coords(values[k], d)

    z = np.asarray(sol.z, dtype=float)
    dual, pos = {}, 0
    for (kind, label), cone in zip(cone_meta, cones):
        if kind == "eq":
            size = sum(len(e.const) for _, e in prog.equalities)
            zz = z[pos : pos + size]
            off = 0
            for lab, e in prog.equalities:
                n = len(e.const)
                dual[lab] = zz[off : off + n] if e.dim > 1 else float(zz[off])
                off += n
            pos += size
        else:
            e = dict(prog.psd)[label]
            if e.dim == 1:
                dual[label] = float(z[pos])
                pos += 1
            else:
                n = 2 * e.dim
                size = n * (n + 1) // 2
                dual[label] = la.from_coords(_embed_matrix(e.dim).T @ z[pos : pos + size], e.dim)
                pos += size

    obj = float(prog.objective.value(values)[0])
    dual_obj = sign * float(sol.obj_val_dual) + prog.objective.const[0]
    gap = abs(obj - dual_obj) / max(1.0, abs(obj))

    worst_psd, worst_eq = 0.0, 0.0
    for _, e in prog.psd:
        v = e.value(values)
        scale = _term_scale(e, values)
        lo = float(np.linalg.eigvalsh(la.from_coords(v, e.dim))[0]) if e.dim > 1 else float(v[0])
        worst_psd = max(worst_psd, -lo / scale)
    for _, e in prog.equalities:
        v = e.value(values)
        scale = _term_scale(e, values)
        worst_eq = max(worst_eq, float(np.max(np.abs(v))) / scale)
    residuals = {"psd": worst_psd, "eq": worst_eq}

    ok = status in ("Solved", "AlmostSolved") and gap <= gap_tol and worst_psd <= feas_tol and worst_eq <= feas_tol
    return SolveResult("optimal" if ok else "numerical_failure", obj, primal, dual, gap, residuals, info)
