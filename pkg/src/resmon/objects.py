"""States, channels (in Choi form), POVM sets and state ensembles.

Choi convention: ``J = (id ⊗ E)(Φ⁺)`` with subsystem order (input copy R,
output B) and ``Φ⁺ = Σ_ij |ii⟩⟨jj|`` unnormalised.  Trace preservation is
``Tr_B J = I_R``.
"""
from dataclasses import dataclass

import numpy as np

from . import linalg as la
from .errors import DomainError

CP_TOL = 1e-9
TP_TOL = 1e-8

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def density(rho):
    """Validate and return a density operator (PSD within 1e-9, unit trace within 1e-8)."""
    return la.check_density(rho, trace_tol=TP_TOL, psd_tol=CP_TOL)


def max_entangled(d):
    """Unnormalised maximally entangled operator ``Σ_ij |ii⟩⟨jj|`` on ``C^d ⊗ C^d``."""
    if d < 1:
        raise DomainError("dimension must be positive")
    v = np.eye(d, dtype=complex).reshape(-1)
    return np.outer(v, v)


@dataclass(frozen=True, eq=False)
class Channel:
    """A CPTP map stored as its Choi matrix."""

    dim_in: int
    dim_out: int
    choi: np.ndarray

    def __post_init__(self):
        J = la.as_hermitian(self.choi, herm_tol=1e-9)
        D = self.dim_in * self.dim_out
        if J.shape != (D, D):
            raise DomainError(f"Choi of shape {J.shape} does not match {self.dim_in}->{self.dim_out}")
        if not la.is_psd(J, CP_TOL):
            raise DomainError("Choi matrix is not PSD (map is not completely positive)")
        marg = la.partial_trace(J, (self.dim_in, self.dim_out), keep=0)
        if np.max(np.abs(marg - np.eye(self.dim_in))) > TP_TOL:
            raise DomainError("Choi matrix does not trace out to the identity (map is not TP)")
        J.setflags(write=False)
        object.__setattr__(self, "choi", J)

    @property
    def normalized_choi(self):
        return self.choi / self.dim_in

    def __call__(self, rho):
        return apply_channel(self, rho)


def choi_from_kraus(kraus, dims=None):
    """Choi matrix of ``X -> Σ K X K^dagger``; ``dims=(dim_in, dim_out)`` is inferred when omitted."""
    kraus = [np.asarray(K, dtype=complex) for K in kraus]
    if not kraus:
        raise DomainError("empty Kraus set")
    d_out, d_in = kraus[0].shape
    if dims is not None and tuple(dims) != (d_in, d_out):
        raise DomainError(f"Kraus operators of shape {kraus[0].shape} do not match dims {dims}")
    if any(K.shape != (d_out, d_in) for K in kraus):
        raise DomainError("Kraus operators have inconsistent shapes")
    tp = sum(K.conj().T @ K for K in kraus)
    if np.max(np.abs(tp - np.eye(d_in))) > TP_TOL:
        raise DomainError("Kraus operators are not trace preserving")
    J = np.zeros((d_in * d_out, d_in * d_out), dtype=complex)
    for K in kraus:
        v = K.T.reshape(-1)
        J += np.outer(v, v.conj())
    return Channel(d_in, d_out, J)


def apply_kraus(kraus, rho):
    return sum(K @ rho @ K.conj().T for K in kraus)


def _choi_action(J, d_in, d_out, X):
    T = J.reshape(d_in, d_out, d_in, d_out)
    return np.einsum("ac,abcd->bd", X, T)


def apply_channel(ch, rho):
    """``E(rho) = Tr_R[(rho^T ⊗ I) J]`` for a density operator ``rho``."""
    rho = density(rho)
    if rho.shape[0] != ch.dim_in:
        raise DomainError(f"state of dimension {rho.shape[0]} does not match channel input {ch.dim_in}")
    return la.as_hermitian(_choi_action(ch.choi, ch.dim_in, ch.dim_out, rho), herm_tol=1e-8)


def apply_map(J, d_in, d_out, X):
    """Action of the (not necessarily CPTP) map with Choi ``J`` on an arbitrary operator."""
    return _choi_action(np.asarray(J), d_in, d_out, np.asarray(X, dtype=complex))


def apply_on_second(ch, sigma, dim_ref):
    """``(id_R ⊗ E)(sigma)`` for an operator on ``C^dim_ref ⊗ C^dim_in``."""
    sigma = np.asarray(sigma, dtype=complex)
    if sigma.shape != (dim_ref * ch.dim_in,) * 2:
        raise DomainError("bipartite input does not match reference and channel input dimensions")
    S = sigma.reshape(dim_ref, ch.dim_in, dim_ref, ch.dim_in)
    T = ch.choi.reshape(ch.dim_in, ch.dim_out, ch.dim_in, ch.dim_out)
    out = np.einsum("rasc,abcd->rbsd", S, T)
    D = dim_ref * ch.dim_out
    return out.reshape(D, D)


def identity_channel(d):
    return Channel(d, d, max_entangled(d))


def replacement_channel(omega, dim_in):
    """``R_ω(X) = Tr(X) ω`` with Choi ``I ⊗ ω``."""
    omega = density(omega)
    return Channel(dim_in, omega.shape[0], np.kron(np.eye(dim_in), omega))


def replacement_output(ch, tol=1e-8):
    """Return ω if ``ch`` is a replacement channel ``R_ω``, else ``None``."""
    omega = ch.choi[: ch.dim_out, : ch.dim_out]
    if np.max(np.abs(ch.choi - np.kron(np.eye(ch.dim_in), omega))) > tol:
        return None
    return omega


def depolarizing(d, p):
    """``X -> (1-p) X + p Tr(X) I/d``."""
    J = (1 - p) * max_entangled(d) + p * np.eye(d * d) / d
    return Channel(d, d, J)


def dephasing(d, p=1.0):
    """``X -> (1-p) X + p diag(X)`` in the computational basis."""
    diag = sum(np.kron(la.proj(la.ket(i, d)), la.proj(la.ket(i, d))) for i in range(d))
    return Channel(d, d, (1 - p) * max_entangled(d) + p * diag)


def unitary_channel(U):
    return choi_from_kraus([U])


def tensor_channels(a, b):
    """Choi of ``a ⊗ b`` in the (inputs, outputs) order ``(R_a, R_b, B_a, B_b)``."""
    J = la.permute_systems(np.kron(a.choi, b.choi), (a.dim_in, a.dim_out, b.dim_in, b.dim_out), (0, 2, 1, 3))
    return Channel(a.dim_in * b.dim_in, a.dim_out * b.dim_out, J)


def compose_channels(a, b):
    """Choi of ``a ∘ b`` (apply ``b`` first) via the link product."""
    if b.dim_out != a.dim_in:
        raise DomainError(f"cannot compose: output {b.dim_out} of inner channel vs input {a.dim_in}")
    Jb = b.choi.reshape(b.dim_in, b.dim_out, b.dim_in, b.dim_out)
    Ja = a.choi.reshape(a.dim_in, a.dim_out, a.dim_in, a.dim_out)
    Jc = np.einsum("xycv,yzvw->xzcw", Jb, Ja)
    D = b.dim_in * a.dim_out
    return Channel(b.dim_in, a.dim_out, Jc.reshape(D, D))


def mix_channels(weights, channels):
    J = sum(w * ch.choi for w, ch in zip(weights, channels))
    c0 = channels[0]
    return Channel(c0.dim_in, c0.dim_out, J)


@dataclass(frozen=True, eq=False)
class PovmSet:
    """``m`` measurement settings with ``n`` outcomes each; ``effects[x, a]`` is ``M_{a|x}``."""

    effects: np.ndarray

    def __post_init__(self):
        E = np.asarray(self.effects, dtype=complex)
        if E.ndim != 4 or E.shape[2] != E.shape[3]:
            raise DomainError(f"effects must have shape (m, n, d, d), got {E.shape}")
        E = np.array([[la.as_hermitian(M, herm_tol=1e-9) for M in row] for row in E])
        d = E.shape[2]
        for x in range(E.shape[0]):
            for a in range(E.shape[1]):
                if not la.is_psd(E[x, a], CP_TOL):
                    raise DomainError(f"effect ({a}|{x}) is not PSD")
            if np.max(np.abs(E[x].sum(axis=0) - np.eye(d))) > TP_TOL:
                raise DomainError(f"effects of setting {x} do not sum to the identity")
        E.setflags(write=False)
        object.__setattr__(self, "effects", E)

    @property
    def m(self):
        return self.effects.shape[0]

    @property
    def n(self):
        return self.effects.shape[1]

    @property
    def dim(self):
        return self.effects.shape[2]

    def components(self):
        """Effects flattened setting-major: ``[M_{0|0}, ..., M_{n-1|0}, M_{0|1}, ...]``."""
        return list(self.effects.reshape(-1, self.dim, self.dim))

    def setting(self, x):
        return PovmSet(self.effects[x : x + 1])


def povm(effects):
    """Single POVM (``m = 1``) from a list of effects."""
    return PovmSet(np.asarray(effects, dtype=complex)[None])


def noisy_pauli_povm(axis, eta):
    """Two-outcome qubit POVM ``{(I ± η σ_axis)/2}``."""
    P = PAULI[axis]
    return povm([(np.eye(2) + eta * P) / 2, (np.eye(2) - eta * P) / 2])


def noisy_zx_pair(eta, U=None):
    """Noisy Z and X measurements (m=2, n=2, d=2), optionally conjugated by a unitary."""
    E = np.array([noisy_pauli_povm("Z", eta).effects[0], noisy_pauli_povm("X", eta).effects[0]])
    if U is not None:
        E = np.einsum("ij,xajk,lk->xail", U, E, U.conj())
    return PovmSet(E)


def trivial_povm(q, d):
    return povm([qi * np.eye(d) for qi in q])


def embed_povmset_channel(ms):
    """Classical-quantum channel ``σ⊗ρ -> Σ_{x,a} ⟨x|σ|x⟩ ⟨M_{a|x}, ρ⟩ |a⟩⟨a|``.

    Input is (setting register of dim m) ⊗ (system of dim d); output has dim n.
    """
    m, n, d = ms.m, ms.n, ms.dim
    J = sum(
        la.kron(la.proj(la.ket(x, m)), ms.effects[x, a].T, la.proj(la.ket(a, n)))
        for x in range(m)
        for a in range(n)
    )
    return Channel(m * d, n, J)


def embedding_choi(effects, m, n, d):
    """Linear part of :func:`embed_povmset_channel` for arbitrary Hermitian effect grids."""
    effects = np.asarray(effects).reshape(m, n, d, d)
    return sum(
        la.kron(la.proj(la.ket(x, m)), effects[x, a].T, la.proj(la.ket(a, n)))
        for x in range(m)
        for a in range(n)
    )


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Finite state ensemble ``{p_i, σ_i}``."""

    probs: np.ndarray
    states: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        S = np.asarray(self.states, dtype=complex)
        if p.ndim != 1 or S.ndim != 3 or len(p) != len(S):
            raise DomainError("ensemble probabilities and states have mismatched lengths")
        if np.any(p < -1e-12) or abs(p.sum() - 1) > TP_TOL:
            raise DomainError("ensemble probabilities are not a distribution")
        S = np.array([density(s) for s in S])
        p = np.clip(p, 0, None)
        p.setflags(write=False)
        S.setflags(write=False)
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "states", S)

    def __len__(self):
        return len(self.probs)

    @property
    def dim(self):
        return self.states.shape[1]
