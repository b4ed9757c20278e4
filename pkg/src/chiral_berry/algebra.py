"""Complex 3-vector products and the Levi-Civita identities they rest on."""

import numpy as np

# Signed Levi-Civita symbol; EPSILON[i, j, k] stores the value for the
# 1-based index triple (i+1, j+1, k+1).
EPSILON = np.zeros((3, 3, 3))
EPSILON[0, 1, 2] = EPSILON[1, 2, 0] = EPSILON[2, 0, 1] = 1.0
EPSILON[0, 2, 1] = EPSILON[2, 1, 0] = EPSILON[1, 0, 2] = -1.0
EPSILON.setflags(write=False)

ABS_EPSILON = np.abs(EPSILON)
ABS_EPSILON.setflags(write=False)

_DELTA = np.eye(3)


def levi_civita(i, j, k):
    """Value of the antisymmetric symbol for 1-based indices in {1, 2, 3}."""
    if not all(n in (1, 2, 3) for n in (i, j, k)):
        raise ValueError(f"indices must lie in {{1, 2, 3}}, got {(i, j, k)}")
    return float(EPSILON[i - 1, j - 1, k - 1])


def vec3(x, y, z):
    """Complex 3-vector from components."""
    return np.array([x, y, z], dtype=complex)


def cross(a, b):
    """(a x b)_l = eps_lij a_i b_j, bilinear with no complex conjugation."""
    return np.cross(a, b)


def diamond(a, b):
    """(a <> b)_i = |eps_ilm| a_l b_m, the symmetric off-diagonal pair product."""
    return np.einsum("ilm,...l,...m->...i", ABS_EPSILON, np.asarray(a), np.asarray(b))


def odot(a, b):
    """(a . b)_i = a_i b_i, the diagonal (Hadamard) product."""
    return np.asarray(a) * np.asarray(b)


def norm_sq(v):
    """Sum of squared component magnitudes."""
    return np.sum(np.abs(np.asarray(v)) ** 2, axis=-1)


def symmetrized_levi_civita_identity_check():
    """Exhaustively verify |eps_nij||eps_nlm| = (1 - d_ij)(d_il d_jm + d_im d_jl).

    All 81 index tuples (i, j, l, m) are enumerated with the implicit sum
    over n; comparison is exact (integer-valued arrays).
    """
    lhs = np.einsum("nij,nlm->ijlm", ABS_EPSILON, ABS_EPSILON)
    rhs = (1.0 - _DELTA)[:, :, None, None] * (
        _DELTA[:, None, :, None] * _DELTA[None, :, None, :]
        + _DELTA[:, None, None, :] * _DELTA[None, :, :, None]
    )
    return bool(np.array_equal(lhs, rhs))


def signed_contraction_identity_check():
    """Exhaustively verify eps_nij eps_nlm = d_il d_jm - d_im d_jl."""
    lhs = np.einsum("nij,nlm->ijlm", EPSILON, EPSILON)
    rhs = (
        _DELTA[:, None, :, None] * _DELTA[None, :, None, :]
        - _DELTA[:, None, None, :] * _DELTA[None, :, :, None]
    )
    return bool(np.array_equal(lhs, rhs))


def contraction_identity_residual(trials=100, seed=0):
    """Worst deviation of T_ij K_ij = 1/2 eps_nij eps_nlm T_ij K_lm.

    T is drawn antisymmetric and K arbitrary (both complex-valued); the
    identity is exact, so the residual is pure floating round-off.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        g = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        t = g - g.T
        k = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        lhs = np.einsum("ij,ij->", t, k)
        rhs = 0.5 * np.einsum("nij,nlm,ij,lm->", EPSILON, EPSILON, t, k)
        worst = max(worst, abs(lhs - rhs))
    return worst


def contraction_identity_check(trials=100, seed=0, tol=1e-12):
    """True iff the antisymmetric-contraction identity holds on random trials."""
    return contraction_identity_residual(trials=trials, seed=seed) < tol
