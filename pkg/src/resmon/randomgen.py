"""Seeded random instances: states, PSD operators, channels, POVM sets and free maps."""
import numpy as np
from scipy.stats import unitary_group

from .errors import DomainError
from .objects import PovmSet, choi_from_kraus, mix_channels


def rng_from(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def ginibre(rows, cols, rng):
    rng = rng_from(rng)
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def haar_unitary(d, rng):
    return unitary_group.rvs(d, random_state=rng_from(rng)) if d > 1 else np.eye(1, dtype=complex)


def random_psd(d, rng, rank=None):
    """Random PSD operator of the given rank (full rank by default), unnormalised."""
    G = ginibre(d, rank or d, rng)
    return G @ G.conj().T


def random_state(d, rng, rank=None):
    """Density operator from the induced (Hilbert-Schmidt for full rank) measure."""
    if d < 1:
        raise DomainError("dimension must be positive")
    P = random_psd(d, rng, rank)
    return P / np.trace(P).real


def random_pure_state(d, rng):
    v = ginibre(d, 1, rng)[:, 0]
    v /= np.linalg.norm(v)
    return np.outer(v, v.conj())


def random_channel(d_in, d_out, rng, kraus_rank=None):
    """CPTP map from a Haar-random Stinespring isometry (full Kraus rank by default)."""
    r = kraus_rank or d_in * d_out
    U = haar_unitary(d_out * r, rng)
    V = U[:, :d_in]
    kraus = [V[k * d_out : (k + 1) * d_out, :] for k in range(r)]
    return choi_from_kraus(kraus)


def random_povm_set(d, m, n, rng, eta=None):
    """``m`` Haar-rotated noisy projective measurements with ``n <= d`` outcomes.

    Each setting groups the rotated basis vectors into ``n`` projectors ``P_a``
    and uses effects ``η P_a + (1-η) Tr(P_a)/d I``; ``η`` is drawn from
    ``[0.3, 0.9]`` unless given.
    """
    rng = rng_from(rng)
    if n > d or n < 1:
        raise DomainError(f"need 1 <= n <= d for projective POVMs, got n={n}, d={d}")
    groups = np.array_split(np.arange(d), n)
    effects = []
    for _ in range(m):
        e = rng.uniform(0.3, 0.9) if eta is None else eta
        U = haar_unitary(d, rng)
        row = []
        for g in groups:
            P = U[:, g] @ U[:, g].conj().T
            row.append(e * P + (1 - e) * len(g) / d * np.eye(d))
        effects.append(row)
    return PovmSet(np.array(effects))


def random_povm_effects(d, n, rng):
    """Generic full-rank ``n``-outcome POVM (square-root normalised random PSD operators)."""
    Ps = [random_psd(d, rng) for _ in range(n)]
    S = sum(Ps)
    w, V = np.linalg.eigh(S)
    Sm = (V / np.sqrt(w)) @ V.conj().T
    return PovmSet(np.array([[Sm @ P @ Sm for P in Ps]]))


def random_ensemble_arrays(d, k, rng):
    rng = rng_from(rng)
    p = rng.dirichlet(np.ones(k))
    return p, np.array([random_state(d, rng) for _ in range(k)])


def random_stochastic(n_out, n_in, rng):
    """Column-stochastic matrix ``P[b, a] = P(b|a)``."""
    P = rng_from(rng).random((n_out, n_in)) + 0.05
    return P / P.sum(axis=0, keepdims=True)


def random_incoherent_channel(d, rng):
    """Random map sending diagonal operators to diagonal operators.

    Convex mixture of a permuted diagonal-phase unitary, a classical
    stochastic channel and complete dephasing.
    """
    rng = rng_from(rng)
    perm = np.eye(d)[rng.permutation(d)]
    phases = np.diag(np.exp(2j * np.pi * rng.random(d)))
    unitary = choi_from_kraus([perm @ phases])
    P = random_stochastic(d, d, rng)
    classical = choi_from_kraus(
        [np.sqrt(P[i, j]) * np.outer(np.eye(d)[i], np.eye(d)[j]) for i in range(d) for j in range(d)]
    )
    dephase = choi_from_kraus([np.diag(np.eye(d)[i]) for i in range(d)])
    w = rng.dirichlet(np.ones(3))
    return mix_channels(w, [unitary, classical, dephase])


def random_replacement_output(d, rng):
    """Full-rank state suitable as a replacement-channel output."""
    return random_state(d, rng)

