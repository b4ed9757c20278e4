"""Synthetic continuum-dipole fields, photoelectron-sphere quadrature and the
molecular tensors built from them."""

import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.special import sph_harm_y

from .algebra import EPSILON, cross
from .errors import NotOrthogonal, QuadratureUnderResolved

ORTHOGONALITY_TOL = 1e-12


def unit_vector(theta, phi):
    """Cartesian unit vector(s) for polar/azimuthal angles, shape (..., 3)."""
    theta, phi = np.broadcast_arrays(
        np.asarray(theta, dtype=float), np.asarray(phi, dtype=float)
    )
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def angles_from_unit(khat):
    """Inverse of unit_vector; khat must have unit rows."""
    khat = np.asarray(khat, dtype=float)
    theta = np.arccos(np.clip(khat[..., 2], -1.0, 1.0))
    phi = np.mod(np.arctan2(khat[..., 1], khat[..., 0]), 2.0 * np.pi)
    return theta, phi


@dataclass(frozen=True, eq=False)
class HarmonicDipoleModel:
    """Continuum dipole field with spherical-harmonic component expansions.

    coefficients[j, l, m + l_max] multiplies Y_lm in Cartesian component j;
    e_tilde is the complex spectral amplitude of the driving field at the
    transition frequency.
    """

    coefficients: np.ndarray
    e_tilde: complex = 1.0 + 0.0j

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=complex)
        if c.ndim != 3 or c.shape[0] != 3 or c.shape[2] != 2 * c.shape[1] - 1:
            raise ValueError(
                "coefficients must have shape (3, l_max + 1, 2 l_max + 1), "
                f"got {c.shape}"
            )
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "coefficients", c)

    @property
    def l_max(self):
        return self.coefficients.shape[1] - 1

    @classmethod
    def from_entries(cls, entries, e_tilde=1.0 + 0.0j):
        """Build from an iterable of (component, l, m, value) entries.

        component is 'x' | 'y' | 'z' or an index 0..2; duplicate entries
        accumulate.
        """
        entries = list(entries)
        l_max = max((int(l) for _, l, _, _ in entries), default=0)
        coeffs = np.zeros((3, l_max + 1, 2 * l_max + 1), dtype=complex)
        axis = {"x": 0, "y": 1, "z": 2}
        for component, l, m, value in entries:
            j = axis.get(component, component)
            l, m = int(l), int(m)
            if not 0 <= l <= l_max or abs(m) > l:
                raise ValueError(f"invalid harmonic indices (l={l}, m={m})")
            coeffs[j, l, m + l_max] += complex(value)
        return cls(coefficients=coeffs, e_tilde=complex(e_tilde))

    def evaluate(self, theta, phi):
        """Dipole vector D(theta, phi) with Cartesian components on the last axis."""
        theta, phi = np.broadcast_arrays(
            np.asarray(theta, dtype=float), np.asarray(phi, dtype=float)
        )
        out = np.zeros(theta.shape + (3,), dtype=complex)
        l_max = self.l_max
        for l in range(l_max + 1):
            for m in range(-l, l + 1):
                col = self.coefficients[:, l, m + l_max]
                if not np.any(col):
                    continue
                out += col * np.asarray(sph_harm_y(l, m, theta, phi))[..., None]
        return out

    def evaluate_unit(self, khat):
        return self.evaluate(*angles_from_unit(khat))


@dataclass(frozen=True, eq=False)
class SampledDipoleModel:
    """Dipole field given by a direct evaluator khat -> D(khat).

    transform, when set, records the outermost orthogonal matrix already
    folded into the evaluator (kept for pseudo-tensor bookkeeping).
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    e_tilde: complex = 1.0 + 0.0j
    transform: Optional[np.ndarray] = None

    def evaluate(self, theta, phi):
        return self.evaluate_unit(unit_vector(theta, phi))

    def evaluate_unit(self, khat):
        return np.asarray(self.evaluator(np.asarray(khat, dtype=float)), dtype=complex)


def evaluate_dipole(model, khat):
    """Dipole vector at unit direction(s) khat; caller guarantees |khat| = 1."""
    return model.evaluate_unit(khat)


def transform_model(model, matrix):
    """Conjugate a dipole field by an orthogonal matrix: D'(k) = M D(M^T k)."""
    m = np.asarray(matrix, dtype=float)
    if m.shape != (3, 3):
        raise NotOrthogonal(f"expected a 3x3 matrix, got shape {m.shape}")
    if np.max(np.abs(m.T @ m - np.eye(3))) > ORTHOGONALITY_TOL:
        raise NotOrthogonal("matrix is not orthogonal to 1e-12")

    def evaluator(khat):
        return model.evaluate_unit(khat @ m) @ m.T

    return SampledDipoleModel(evaluator=evaluator, e_tilde=model.e_tilde, transform=m)


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes and solid-angle weights on the photoelectron sphere.

    degree is the largest combined spherical-harmonic degree whose products
    the rule integrates exactly.
    """

    theta: np.ndarray
    phi: np.ndarray
    weights: np.ndarray
    degree: int

    def __post_init__(self):
        if not (len(self.theta) == len(self.phi) == len(self.weights)):
            raise ValueError("node and weight arrays must have equal length")

    @classmethod
    def gauss_product(cls, degree):
        """Gauss-Legendre in cos(theta) crossed with uniform trapezoid in phi."""
        degree = int(degree)
        if degree < 0:
            raise ValueError("degree must be non-negative")
        n_theta = degree // 2 + 1
        n_phi = degree + 1
        x, w = np.polynomial.legendre.leggauss(n_theta)
        thetas = np.arccos(x)
        phis = np.linspace(0.0, 2.0 * np.pi, n_phi, endpoint=False)
        theta = np.repeat(thetas, n_phi)
        phi = np.tile(phis, n_theta)
        weights = np.repeat(w, n_phi) * (2.0 * np.pi / n_phi)
        return cls(theta=theta, phi=phi, weights=weights, degree=degree)


def default_rule(model):
    """Quadrature rule at the default degree 2 l_max + 2 for the model."""
    l_max = getattr(model, "l_max", None)
    if l_max is None:
        raise ValueError("default_rule needs a model with a known l_max")
    return QuadratureRule.gauss_product(2 * l_max + 2)


def _warn_if_underresolved(model, rule):
    l_max = getattr(model, "l_max", None)
    if l_max is not None and rule.degree < 2 * l_max + 1:
        warnings.warn(
            f"rule degree {rule.degree} is below the exactness bound "
            f"{2 * l_max + 1} for l_max={l_max}",
            QuadratureUnderResolved,
            stacklevel=3,
        )


def gram_tensor(model, rule):
    """Field-weighted dipole Gram tensor by quadrature.

    Q_ij = |e_tilde|^2 * integral of conj(D_i) D_j over the sphere.
    Hermitian and positive semidefinite for every model.
    """
    _warn_if_underresolved(model, rule)
    d = model.evaluate(rule.theta, rule.phi)
    scale = abs(model.e_tilde) ** 2
    return scale * np.einsum("k,ki,kj->ij", rule.weights, np.conj(d), d)


def harmonic_gram_exact(model):
    """Closed-form Gram tensor from harmonic orthonormality.

    Q_ij = |e_tilde|^2 sum_lm conj(c_ilm) c_jlm; this is the independent
    oracle for the quadrature path.
    """
    c = model.coefficients
    return abs(model.e_tilde) ** 2 * np.einsum("ilm,jlm->ij", np.conj(c), c)


def propensity_vector(model, rule):
    """Net propensity pseudovector i |e_tilde|^2 * integral of D* x D.

    Real-valued up to round-off; equal to the antisymmetric channel
    contraction of the Gram tensor (see propensity_from_gram).
    """
    _warn_if_underresolved(model, rule)
    d = model.evaluate(rule.theta, rule.phi)
    scale = abs(model.e_tilde) ** 2
    return 1j * scale * np.einsum("k,kl->l", rule.weights, cross(np.conj(d), d))


def propensity_from_gram(gram):
    """Antisymmetric-channel contraction i eps_lij Q_ij of a Gram tensor."""
    return 1j * np.einsum("lij,ij->l", EPSILON, np.asarray(gram, dtype=complex))


def zero_model(e_tilde=1.0 + 0.0j):
    """Continuum dipole that vanishes identically."""
    return HarmonicDipoleModel(np.zeros((3, 1, 1), dtype=complex), e_tilde=e_tilde)


def isotropic_model(q=1.0, e_tilde=1.0 + 0.0j):
    """Model whose Gram tensor is exactly q times the identity.

    The three Cartesian components sit on mutually orthonormal harmonics,
    so off-diagonal overlaps vanish and the connection/curvature admit
    closed forms (A_phi = sigma q cos theta etc. for |e_tilde| = 1).
    """
    root_q = np.sqrt(float(q))
    return HarmonicDipoleModel.from_entries(
        [("x", 0, 0, root_q), ("y", 1, 0, root_q), ("z", 1, 1, root_q)],
        e_tilde=e_tilde,
    )


def uniform_circular_model(e_tilde=1.0 + 0.0j):
    """Direction-independent dipole D = Y_00 (x_hat + i y_hat).

    Gram tensor [[1, i, 0], [-i, 1, 0], [0, 0, 0]] and propensity vector
    (0, 0, -2) for |e_tilde| = 1.
    """
    return HarmonicDipoleModel.from_entries(
        [("x", 0, 0, 1.0), ("y", 0, 0, 1.0j)], e_tilde=e_tilde
    )


def chiral_demo_model(e_tilde=1.0 + 0.0j):
    """Built-in demo dipole with every curvature channel active.

    Extends the uniform circular pair with l = 1 structure chosen so the
    propensity vector stays at (0, 0, -2) while the symmetric off-diagonal
    and diagonal channels become nontrivial.
    """
    return HarmonicDipoleModel.from_entries(
        [
            ("x", 0, 0, 1.0),
            ("y", 0, 0, 1.0j),
            ("x", 1, 0, 0.5),
            ("y", 1, 0, 0.6),
            ("z", 1, 1, 0.7j),
        ],
        e_tilde=e_tilde,
    )


def random_harmonic_model(seed, l_max=2, e_tilde=1.0 + 0.0j):
    """Seeded random model with coefficients normalized to unit Gram trace."""
    rng = np.random.default_rng(seed)
    shape = (3, l_max + 1, 2 * l_max + 1)
    coeffs = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    mask = np.zeros(shape)
    for l in range(l_max + 1):
        mask[:, l, l_max - l : l_max + l + 1] = 1.0
    coeffs = coeffs * mask
    coeffs /= np.sqrt(np.sum(np.abs(coeffs) ** 2))
    return HarmonicDipoleModel(coeffs, e_tilde=complex(e_tilde))
