"""Max-relative entropy ``R_max(ρ‖σ) = inf{λ : ρ <= λσ}`` and its logarithm ``D_max``."""
import math

import numpy as np

from . import linalg as la
from .errors import DomainError
from .objects import Channel, PovmSet


def support_included(rho, sigma, rank_tol=la.RANK_TOL):
    """``supp(rho) ⊆ supp(sigma)``, decided by the weight of ``rho`` outside ``supp(sigma)``."""
    P = la.support_projector(sigma, rank_tol)
    Q = np.eye(P.shape[0]) - P
    return la.opnorm(Q @ rho @ Q) <= rank_tol * la.opnorm(rho)


def rmax_states(rho, sigma, rank_tol=la.RANK_TOL):
    """Closed form: largest eigenvalue of ``σ^{-1/2} ρ σ^{-1/2}``, or ``inf`` on support mismatch."""
    rho = la.as_hermitian(rho, herm_tol=1e-9)
    sigma = la.as_hermitian(sigma, herm_tol=1e-9)
    if rho.shape != sigma.shape:
        raise DomainError(f"shape mismatch {rho.shape} vs {sigma.shape}")
    for name, op in (("rho", rho), ("sigma", sigma)):
        if not la.is_psd(op, max(rank_tol, la.PSD_TOL)):
            raise DomainError(f"{name} is not PSD")
    if la.opnorm(rho) == 0:
        return 0.0
    if not support_included(rho, sigma, rank_tol):
        return math.inf
    S = la.pinv_sqrt(sigma, rank_tol)
    return max(float(np.linalg.eigvalsh(S @ rho @ S)[-1]), 0.0)


def dmax_states(rho, sigma, rank_tol=la.RANK_TOL):
    r = rmax_states(rho, sigma, rank_tol)
    if r == 0:
        return -math.inf
    return math.log2(r)


def rmax_channels(e, f, rank_tol=la.RANK_TOL):
    """CP-order ``R_max(E‖F)``, which equals ``R_max`` of the Choi matrices."""
    if isinstance(e, Channel) and isinstance(f, Channel):
        if (e.dim_in, e.dim_out) != (f.dim_in, f.dim_out):
            raise DomainError("channels have different dimensions")
        return rmax_states(e.choi, f.choi, rank_tol)
    return rmax_states(np.asarray(e), np.asarray(f), rank_tol)


def rmax_povms(a, b, rank_tol=la.RANK_TOL):
    """``inf{λ : M_{a|x} <= λ N_{a|x} for all a, x}``."""
    A = a.components() if isinstance(a, PovmSet) else list(a)
    B = b.components() if isinstance(b, PovmSet) else list(b)
    if len(A) != len(B) or any(np.shape(x) != np.shape(y) for x, y in zip(A, B)):
        raise DomainError("POVM sets have different shapes")
    return max(rmax_states(x, y, rank_tol) for x, y in zip(A, B))


def rmax_components(A, B, rank_tol=la.RANK_TOL):
    """``R_max`` for lists of PSD components (a state or channel is a one-element list)."""
    return rmax_povms(A, B, rank_tol)
