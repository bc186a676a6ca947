"""Closed convex cones of free objects.

A :class:`ConeSpec` describes ``cone(F)`` as the image of a linear
``assembly`` map applied to Hermitian block variables, where designated blocks
are PSD and the blocks satisfy homogeneous linear ``equalities``.  The conic
engine only needs these three ingredients: primal membership is written
directly, and the dual cone follows from the transposed coordinate matrices::

    W ∈ K*  <=>  ∃ y :  Σ_c A_{b,c}^T W_c - Σ_k E_{k,b}^T y_k  ⪰ 0   (PSD blocks b)
                                                        = 0   (free blocks b)

which is exact whenever the stored interior point is strictly feasible.
"""
import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from . import linalg as la
from .conic import Affine, ConicProgram, psum, solve
from .errors import DomainError, NumericalFailure, SizeError
from .objects import Channel, PovmSet, embedding_choi

MEMBERSHIP_TOL = 1e-7
DUAL_TOL = 1e-7
MAX_STRATEGIES = 64


@dataclass(frozen=True)
class Block:
    name: str
    dim: int
    psd: bool = True


@dataclass(frozen=True, eq=False)
class ConeSpec:
    """Declarative description of a cone of free objects (see module docstring)."""

    kind: str
    object_kind: str
    shape: dict
    blocks: tuple
    assembly: Callable
    out_dims: tuple
    normalizer_weights: tuple
    equalities: Optional[Callable] = None
    eq_dims: tuple = ()
    interior: Optional[dict] = None
    params: dict = field(default_factory=dict)

    # --- numeric views ----------------------------------------------------
    def zero_blocks(self):
        return {b.name: np.zeros((b.dim, b.dim), dtype=complex) for b in self.blocks}

    def assemble(self, values):
        """Free object components for numeric block values."""
        vals = self.zero_blocks()
        vals.update(values)
        return [np.asarray(c, dtype=complex) for c in self.assembly(vals)]

    def equality_residuals(self, values):
        if self.equalities is None:
            return []
        vals = self.zero_blocks()
        vals.update(values)
        return [np.atleast_2d(np.asarray(e, dtype=complex)) for e in self.equalities(vals)]

    def _block_matrices(self, fn, dims):
        out = {}
        for b in self.blocks:
            cols = []
            for E in la.herm_basis(b.dim):
                vals = self.zero_blocks()
                vals[b.name] = E
                cols.append(np.concatenate([la.to_coords(np.atleast_2d(c)) for c in fn(vals)]))
            M = np.array(cols).T
            pos = 0
            for k, d in enumerate(dims):
                out[(k, b.name)] = M[pos : pos + d * d]
                pos += d * d
        return out

    @cached_property
    def assembly_matrices(self):
        """``{(component, block): coordinate matrix}`` of the assembly map."""
        return self._block_matrices(self.assembly, self.out_dims)

    @cached_property
    def equality_matrices(self):
        if self.equalities is None:
            return {}
        return self._block_matrices(self.equalities, self.eq_dims)

    def normalizer(self, components):
        """Linear functional equal to 1 on the free set itself (the cone's unit slice)."""
        return float(sum(w * np.trace(c).real for w, c in zip(self.normalizer_weights, components)))

    def interior_components(self):
        return None if self.interior is None else self.assemble(self.interior)

    # --- program building -------------------------------------------------
    def add_to(self, prog, prefix="free", psd_shift=None):
        """Declare cone variables in ``prog``; return the assembled component expressions.

        With ``psd_shift`` (a scalar expression ``s``) the PSD blocks are only
        required to satisfy ``G - s I ⪰ 0``; used for membership margins.
        """
        ex = {}
        for b in self.blocks:
            X = prog.block(f"{prefix}.{b.name}", b.dim, psd=b.psd and psd_shift is None)
            if b.psd and psd_shift is not None:
                prog.add_psd(X - psd_shift.times(np.eye(b.dim)), f"{prefix}.{b.name}>>s")
            ex[b.name] = X
        for k, d in enumerate(self.eq_dims):
            terms = [ex[b.name].map(self.equality_matrices[(k, b.name)], d) for b in self.blocks]
            prog.add_eq(psum(terms), f"{prefix}.eq{k}")
        comps = []
        for c, d in enumerate(self.out_dims):
            comps.append(psum([ex[b.name].map(self.assembly_matrices[(c, b.name)], d) for b in self.blocks], d))
        return comps

    def normalizer_expr(self, comps):
        return psum([c.inner(w * np.eye(c.dim)) for w, c in zip(self.normalizer_weights, comps)])

    def add_dual_membership(self, prog, W, prefix="dual"):
        """Constrain the component expressions ``W`` to lie in the dual cone."""
        if len(W) != len(self.out_dims):
            raise DomainError("dual witness has the wrong number of components")
        ys = [prog.block(f"{prefix}.y{k}", d) for k, d in enumerate(self.eq_dims)]
        for b in self.blocks:
            terms = [w.map(self.assembly_matrices[(c, b.name)].T, b.dim) for c, w in enumerate(W)]
            terms += [-y.map(self.equality_matrices[(k, b.name)].T, b.dim) for k, y in enumerate(ys)]
            expr = psum(terms, b.dim)
            if b.psd:
                prog.add_psd(expr, f"{prefix}.{b.name}")
            else:
                prog.add_eq(expr, f"{prefix}.{b.name}")

    # --- queries ----------------------------------------------------------
    def components_of(self, obj):
        comps = as_components(obj)
        if len(comps) != len(self.out_dims) or any(c.shape[0] != d for c, d in zip(comps, self.out_dims)):
            raise DomainError(f"object does not match the shape of the {self.kind} cone")
        return comps

    def membership_margin(self, obj):
        """Largest ``s`` with the object assembled from blocks ``⪰ s I``; ``-inf`` if not representable."""
        comps = self.components_of(obj)
        prog = ConicProgram(f"{self.kind}-membership")
        s = prog.scalar("s")
        exprs = self.add_to(prog, psd_shift=s)
        for k, (e, c) in enumerate(zip(exprs, comps)):
            prog.add_eq(e - c, f"match{k}")
        scale = max(1.0, max(la.opnorm(c) for c in comps))
        prog.add_psd(scale - s, "s<=scale")
        prog.maximize(s)
        res = solve(prog)
        if res.status == "infeasible":
            return float("-inf")
        if not res.ok:
            raise NumericalFailure(f"membership program for {self.kind} cone failed ({res.status})")
        return res.value

    def contains(self, obj, tol=MEMBERSHIP_TOL):
        comps = self.components_of(obj)
        scale = max(1.0, max(la.opnorm(c) for c in comps))
        return self.membership_margin(comps) >= -tol * scale

    def to_json(self):
        return {"kind": self.kind, **self.params}


@dataclass
class DualConeCertificate:
    witness: list
    min_inner_product: float
    minimizer: list
    member: bool


def as_components(obj):
    """Canonical Hermitian components of a state, channel, POVM set, or component list."""
    if isinstance(obj, Channel):
        return [np.asarray(obj.choi)]
    if isinstance(obj, PovmSet):
        return obj.components()
    if isinstance(obj, np.ndarray) and obj.ndim == 2:
        return [obj]
    if isinstance(obj, (list, tuple)):
        return [np.asarray(c, dtype=complex) for c in obj]
    arr = np.asarray(obj, dtype=complex)
    if arr.ndim == 2:
        return [arr]
    if arr.ndim == 3:
        return list(arr)
    raise DomainError(f"cannot interpret object of shape {arr.shape}")


def dual_cone_check(spec, W, tol=DUAL_TOL):
    """Minimise ``<W, X>`` over the cone's unit slice; nonnegative iff ``W ∈ K*``."""
    W = [la.as_hermitian(w, herm_tol=1e-8) for w in as_components(W)]
    if len(W) != len(spec.out_dims) or any(w.shape[0] != d for w, d in zip(W, spec.out_dims)):
        raise DomainError("witness shape does not match the cone")
    prog = ConicProgram(f"{spec.kind}-dual-check")
    comps = spec.add_to(prog)
    prog.add_eq(spec.normalizer_expr(comps) - 1, "slice")
    prog.minimize(psum([c.inner(w) for c, w in zip(comps, W)]))
    res = solve(prog)
    if not res.ok:
        raise NumericalFailure(f"dual-cone check failed ({res.status})")
    blocks = {b.name: res.primal[f"free.{b.name}"] for b in spec.blocks}
    scale = max(1.0, max(la.opnorm(w) for w in W))
    return DualConeCertificate(W, res.value, spec.assemble(blocks), res.value >= -tol * scale)


# --- built-in cones ---------------------------------------------------------

def incoherent_state_cone(d):
    """PSD operators diagonal in the computational basis."""
    if d < 2:
        raise DomainError("dimension must be at least 2")
    return ConeSpec(
        kind="incoherent",
        object_kind="state",
        shape={"d": d},
        blocks=(Block("X", d),),
        assembly=lambda v: [v["X"]],
        out_dims=(d,),
        normalizer_weights=(1.0,),
        equalities=lambda v: [v["X"] - np.diag(np.diag(v["X"]))],
        eq_dims=(d,),
        interior={"X": np.eye(d) / d},
        params={"dim": d},
    )


def custom_state_cone(d, equality_ops, interior=None):
    """``{X ⪰ 0 : <E_k, X> = 0}`` for user-supplied Hermitian ``E_k``."""
    ops = [la.as_hermitian(E) for E in equality_ops]
    if any(E.shape != (d, d) for E in ops):
        raise DomainError("equality operators must be d x d")
    return ConeSpec(
        kind="custom",
        object_kind="state",
        shape={"d": d},
        blocks=(Block("X", d),),
        assembly=lambda v: [v["X"]],
        out_dims=(d,),
        normalizer_weights=(1.0,),
        equalities=(lambda v: [np.array([[np.trace(E @ v["X"])]]) for E in ops]) if ops else None,
        eq_dims=(1,) * len(ops),
        interior=None if interior is None else {"X": np.asarray(interior)},
        params={"object_kind": "state", "dim": d, "equalities": [la.matrix_to_json(E) for E in ops]},
    )


def replacement_channel_cone(f, dim_in):
    """Choi matrices ``I_{dim_in} ⊗ σ`` with ``σ`` in the state cone ``f``."""
    if f.object_kind != "state":
        raise DomainError("replacement cone needs a state cone")
    d = f.out_dims[0]
    return ConeSpec(
        kind="replacement",
        object_kind="channel",
        shape={"dim_in": dim_in, "dim_out": d},
        blocks=f.blocks,
        assembly=lambda v: [np.kron(np.eye(dim_in), f.assembly(v)[0])],
        out_dims=(dim_in * d,),
        normalizer_weights=(1.0 / dim_in,),
        equalities=f.equalities,
        eq_dims=f.eq_dims,
        interior=f.interior,
        params={"dim_in": dim_in, "base": f.to_json()},
    )


def trivial_povm_cone(d, n):
    """POVM-like tuples ``(q_1 I, ..., q_n I)`` with ``q_i >= 0``."""
    return ConeSpec(
        kind="trivial_povm",
        object_kind="povm",
        shape={"d": d, "m": 1, "n": n},
        blocks=tuple(Block(f"q{i}", 1) for i in range(n)),
        assembly=lambda v: [v[f"q{i}"][0, 0] * np.eye(d) for i in range(n)],
        out_dims=(d,) * n,
        normalizer_weights=(1.0 / d,) * n,
        interior={f"q{i}": np.array([[1.0 / n]]) for i in range(n)},
        params={"dim": d, "n": n},
    )


def strategies(m, n):
    """Deterministic response functions ``settings -> outcomes`` as tuples."""
    if n**m > MAX_STRATEGIES:
        raise SizeError(f"n^m = {n**m} exceeds the guard {MAX_STRATEGIES}")
    return list(itertools.product(range(n), repeat=m))


def _parent_blocks(d, m, n):
    lams = strategies(m, n)
    blocks = tuple(Block("G" + "".join(map(str, lam)), d) for lam in lams)

    def effects(v):
        return [
            sum(v[b.name] for b, lam in zip(blocks, lams) if lam[x] == a)
            for x in range(m)
            for a in range(n)
        ]

    def parent_sum_is_scalar(v):
        S = sum(v[b.name] for b in blocks)
        return [S - np.trace(S) / d * np.eye(d)]

    interior = {b.name: np.eye(d) / len(lams) for b in blocks}
    return blocks, effects, parent_sum_is_scalar, interior


def jointly_measurable_cone(d, m, n):
    """Effect grids ``M_{a|x} = Σ_{λ: λ(x)=a} G_λ`` with ``G_λ ⪰ 0`` and ``Σ_λ G_λ ∝ I``."""
    blocks, effects, eq, interior = _parent_blocks(d, m, n)
    return ConeSpec(
        kind="jointly_measurable",
        object_kind="povm_set",
        shape={"d": d, "m": m, "n": n},
        blocks=blocks,
        assembly=effects,
        out_dims=(d,) * (m * n),
        normalizer_weights=(1.0 / (d * m),) * (m * n),
        equalities=eq,
        eq_dims=(d,),
        interior=interior,
        params={"dim": d, "m": m, "n": n},
    )


def embedded_jm_channel_cone(d, m, n):
    """Choi matrices of the classical-quantum channels built from jointly measurable sets."""
    blocks, effects, eq, interior = _parent_blocks(d, m, n)
    return ConeSpec(
        kind="embedded_jointly_measurable",
        object_kind="channel",
        shape={"dim_in": m * d, "dim_out": n},
        blocks=blocks,
        assembly=lambda v: [embedding_choi(effects(v), m, n, d)],
        out_dims=(m * d * n,),
        normalizer_weights=(1.0 / (m * d),),
        equalities=eq,
        eq_dims=(d,),
        interior=interior,
        params={"dim": d, "m": m, "n": n},
    )


# --- registry ----------------------------------------------------------------

def _infer(obj):
    if isinstance(obj, Channel):
        return {"dim_in": obj.dim_in, "dim_out": obj.dim_out}
    if isinstance(obj, PovmSet):
        return {"dim": obj.dim, "m": obj.m, "n": obj.n}
    if obj is not None:
        return {"dim": np.shape(obj)[0]}
    return {}


def cone_from_registry(spec, obj=None):
    """Build a cone from ``{"kind": ..., params...}``; missing dimensions are inferred from ``obj``."""
    if isinstance(spec, str):
        spec = {"kind": spec}
    spec = dict(spec)
    kind = spec.pop("kind", None)
    hint = _infer(obj)
    try:
        if kind == "incoherent":
            return incoherent_state_cone(int(spec.get("dim", hint.get("dim", hint.get("dim_out", 0)))))
        if kind == "replacement":
            dim_in = int(spec.get("dim_in", hint.get("dim_in", 0)))
            base = spec.get("base", {"kind": "incoherent"})
            base_hint = np.eye(int(hint["dim_out"])) if "dim_out" in hint else None
            return replacement_channel_cone(cone_from_registry(base, base_hint), dim_in)
        if kind == "trivial_povm":
            return trivial_povm_cone(int(spec.get("dim", hint.get("dim"))), int(spec.get("n", hint.get("n"))))
        if kind == "jointly_measurable":
            return jointly_measurable_cone(*(int(spec.get(k, hint.get(k))) for k in ("dim", "m", "n")))
        if kind == "embedded_jointly_measurable":
            return embedded_jm_channel_cone(*(int(spec[k]) for k in ("dim", "m", "n")))
        if kind == "custom":
            if spec.get("object_kind", "state") != "state":
                raise DomainError("custom cones are supported for states only")
            d = int(spec.get("dim", hint.get("dim")))
            ops = [la.matrix_from_json(E) for E in spec.get("equalities", [])]
            interior = spec.get("interior")
            return custom_state_cone(d, ops, None if interior is None else la.matrix_from_json(interior))
    except (KeyError, TypeError) as exc:
        raise DomainError(f"incomplete free-set spec for kind {kind!r}: {exc}") from exc
    raise DomainError(f"unknown free-set kind {kind!r}")
