"""Dense Hermitian linear algebra used throughout resmon.

Operators are plain complex ``numpy`` arrays.  Functions that need a
Hermitian argument call :func:`as_hermitian`, which validates and returns
the exact Hermitian part ``(M + M^dagger) / 2``.

Besides the usual toolkit (eigendecomposition, PSD tests, supports, partial
traces, fidelity) this module fixes the real coordinate system in which the
conic engine works: a Hermitian ``d x d`` operator is identified with its
``d**2`` coordinates in an orthonormal basis of Hermitian matrices, so that
``<X, Y> = Tr(X Y)`` is the Euclidean inner product of coordinate vectors.
"""
from functools import lru_cache

import numpy as np

from .errors import DomainError, NumericalFailure

HERM_TOL = 1e-10
RANK_TOL = 1e-9
PSD_TOL = 1e-9


def as_hermitian(M, herm_tol=HERM_TOL):
    """Validate ``M`` as a finite square Hermitian matrix and return ``(M + M^dagger)/2``."""
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise DomainError("matrix has non-finite entries")
    if M.size and np.max(np.abs(M - M.conj().T)) > herm_tol * max(1.0, np.max(np.abs(M))):
        raise DomainError("matrix is not Hermitian")
    return (M + M.conj().T) / 2


def eigh(H):
    """Eigenvalues (ascending) and unitary eigenvectors of a Hermitian operator."""
    H = as_hermitian(H)
    try:
        w, V = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigensolver failed: {exc}") from exc
    return w, V


def opnorm(H):
    """Operator (spectral) norm of a Hermitian operator."""
    H = np.asarray(H)
    if H.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvalsh((H + H.conj().T) / 2))))


def is_psd(H, tol=PSD_TOL):
    """True iff the minimum eigenvalue is at least ``-tol * max(1, ||H||_op)``."""
    if tol < 0:
        raise DomainError("tol must be non-negative")
    w, _ = eigh(H)
    scale = max(1.0, float(np.max(np.abs(w))))
    return bool(w[0] >= -tol * scale)


def psd_leq(X, Y, tol=PSD_TOL):
    """Loewner order ``X <= Y`` with the package-wide tolerance convention."""
    return is_psd(np.asarray(Y) - np.asarray(X), tol)


def _check_psd(H, rank_tol):
    w, V = eigh(H)
    top = max(float(np.max(np.abs(w))), 0.0)
    if w[0] < -max(rank_tol, PSD_TOL) * max(1.0, top):
        raise DomainError(f"operator is not PSD (min eigenvalue {w[0]:.3e})")
    return w, V


def support_basis(H, rank_tol=RANK_TOL):
    """Orthonormal columns spanning the support of a PSD operator."""
    w, V = _check_psd(H, rank_tol)
    top = float(w[-1]) if w.size else 0.0
    if top <= 0:
        return V[:, :0]
    return V[:, w > rank_tol * top]


def support_projector(H, rank_tol=RANK_TOL):
    """Orthogonal projector onto eigenvectors with eigenvalue > ``rank_tol * max eigenvalue``."""
    V = support_basis(H, rank_tol)
    return V @ V.conj().T


def pinv_sqrt(H, rank_tol=RANK_TOL):
    """``H^{-1/2}`` on the support of ``H`` and zero on its kernel."""
    w, V = _check_psd(H, rank_tol)
    top = float(w[-1]) if w.size else 0.0
    keep = w > rank_tol * top if top > 0 else np.zeros_like(w, dtype=bool)
    inv = np.zeros_like(w)
    inv[keep] = 1.0 / np.sqrt(w[keep])
    return (V * inv) @ V.conj().T


def psd_part(H):
    """Positive part of a Hermitian operator (negative eigenvalues set to zero)."""
    w, V = eigh(H)
    return (V * np.clip(w, 0, None)) @ V.conj().T


def psd_sqrt(H):
    """Principal square root of a PSD operator (negative rounding noise clipped)."""
    w, V = eigh(H)
    return (V * np.sqrt(np.clip(w, 0, None))) @ V.conj().T


def kron(*ops):
    """Kronecker product of any number of operators."""
    out = np.array([[1.0 + 0j]])
    for op in ops:
        out = np.kron(out, np.asarray(op, dtype=complex))
    return out


def partial_trace(H, dims, keep):
    """Partial trace of a bipartite operator.

    ``dims = (dA, dB)``; ``keep`` is 0 to keep subsystem A (trace out B) or
    1 to keep subsystem B (trace out A).
    """
    H = np.asarray(H, dtype=complex)
    dA, dB = dims
    if H.shape != (dA * dB, dA * dB):
        raise DomainError(f"operator of shape {H.shape} does not match dims {dims}")
    T = H.reshape(dA, dB, dA, dB)
    if keep in (0, "A"):
        return np.einsum("ijkj->ik", T)
    if keep in (1, "B"):
        return np.einsum("ijil->jl", T)
    raise DomainError(f"keep must be 0 or 1, got {keep!r}")


def permute_systems(H, dims, perm):
    """Reorder the tensor factors of ``H``; factor ``perm[k]`` becomes factor ``k``."""
    H = np.asarray(H)
    n = len(dims)
    T = H.reshape(tuple(dims) * 2)
    axes = list(perm) + [p + n for p in perm]
    D = int(np.prod(dims))
    return T.transpose(axes).reshape(D, D)


def check_density(rho, trace_tol=1e-8, psd_tol=PSD_TOL):
    """Validate a density operator and return its Hermitian part."""
    rho = as_hermitian(rho)
    if abs(np.trace(rho).real - 1) > trace_tol:
        raise DomainError(f"density operator has trace {np.trace(rho).real:.10g}")
    if not is_psd(rho, psd_tol):
        raise DomainError("density operator is not PSD")
    return rho


def fidelity(rho, sigma):
    """Uhlmann fidelity ``(Tr sqrt(sqrt(rho) sigma sqrt(rho)))**2`` of two density operators."""
    rho = check_density(rho)
    sigma = check_density(sigma)
    s = psd_sqrt(rho)
    w = np.linalg.eigvalsh(s @ sigma @ s)
    F = float(np.sum(np.sqrt(np.clip(w, 0, None))) ** 2)
    return min(max(F, 0.0), 1.0)


def ket(index, dim):
    v = np.zeros(dim, dtype=complex)
    v[index] = 1
    return v


def proj(v):
    v = np.asarray(v, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())


# --- real Hermitian coordinates -------------------------------------------

@lru_cache(maxsize=None)
def herm_basis(d):
    """Orthonormal basis of d x d Hermitian matrices, shape ``(d*d, d, d)``."""
    basis = []
    for i in range(d):
        E = np.zeros((d, d), dtype=complex)
        E[i, i] = 1
        basis.append(E)
    r = 1 / np.sqrt(2)
    for i in range(d):
        for j in range(i + 1, d):
            E = np.zeros((d, d), dtype=complex)
            E[i, j] = E[j, i] = r
            basis.append(E)
            E = np.zeros((d, d), dtype=complex)
            E[i, j] = 1j * r
            E[j, i] = -1j * r
            basis.append(E)
    B = np.array(basis)
    B.setflags(write=False)
    return B


def to_coords(H):
    """Coordinates of a Hermitian operator in :func:`herm_basis`."""
    H = np.asarray(H, dtype=complex)
    B = herm_basis(H.shape[0])
    return np.einsum("kij,ji->k", B, H).real


def from_coords(c, d):
    """Hermitian operator with coordinates ``c``."""
    return np.einsum("k,kij->ij", np.asarray(c, dtype=float), herm_basis(d))


def map_matrix(fn, d_in, d_out):
    """Real matrix of a Hermitian-preserving linear map in Hermitian coordinates."""
    cols = [to_coords(fn(E)) for E in herm_basis(d_in)]
    if not cols:
        return np.zeros((d_out * d_out, 0))
    return np.array(cols).T.reshape(d_out * d_out, d_in * d_in)


def functional_operator(fn, d):
    """Hermitian ``W`` with ``fn(X) = <W, X>`` for a real-linear functional on Hermitian X."""
    return from_coords([float(np.real(fn(E))) for E in herm_basis(d)], d)


# --- JSON encoding ----------------------------------------------------------

def matrix_to_json(M):
    """``{"rows", "cols", "data": [[re, im], ...]}`` in row-major order."""
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2:
        raise DomainError("only 2-D matrices can be encoded")
    return {
        "rows": int(M.shape[0]),
        "cols": int(M.shape[1]),
        "data": [[float(z.real), float(z.imag)] for z in M.reshape(-1)],
    }


def matrix_from_json(obj):
    try:
        rows, cols, data = int(obj["rows"]), int(obj["cols"]), obj["data"]
    except (KeyError, TypeError) as exc:
        raise DomainError(f"malformed matrix JSON: {exc}") from exc
    if len(data) != rows * cols:
        raise DomainError(f"matrix JSON has {len(data)} entries, expected {rows * cols}")
    arr = np.array([complex(float(re), float(im)) for re, im in data], dtype=complex)
    if not np.all(np.isfinite(arr)):
        raise DomainError("matrix JSON has non-finite entries")
    return arr.reshape(rows, cols)
