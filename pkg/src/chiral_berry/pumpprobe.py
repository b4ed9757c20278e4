"""Two-field (circular + linear) parameter manifold: split connection, the
orbital-antisymmetric curvature blocks, and a factorized two-photon amplitude
model that realizes them.

The shipped amplitude is a(k; e, eps) = -G (D(k) . e)(d . eps) for the
circular-acting-second ordering (roles swapped otherwise): the simplest
amplitude bilinear in both fields, making every block analytically checkable.
Any provider with the same amplitude/grad_e/grad_eps surface can be swapped
in.
"""

from dataclasses import dataclass

import numpy as np

from .algebra import EPSILON, cross
from .berry import curvature_tensor
from .polarization import (
    DEFAULT_POLE_MARGIN,
    CircularPolarization,
    LinearPolarization,
)


@dataclass(frozen=True)
class TwoFieldConfiguration:
    """Circular and linear polarizations anchored at one molecular orientation.

    spectral_factor is the product of the two fields' complex spectral
    amplitudes at their transition frequencies.
    """

    circular: CircularPolarization
    linear: LinearPolarization
    spectral_factor: complex = 1.0 + 0.0j

    def __post_init__(self):
        if self.circular.point != self.linear.point:
            raise ValueError("both polarizations must share one orientation point")


@dataclass(frozen=True, eq=False)
class TwoPhotonAmplitudeModel:
    """Factorized two-photon amplitude: continuum dipole times bound dipole.

    circular_first swaps which polarization couples to which dipole (the
    first photon drives the bound-bound transition).
    """

    dipole: object
    bound_dipole: np.ndarray
    circular_first: bool = False

    def __post_init__(self):
        object.__setattr__(
            self, "bound_dipole", np.asarray(self.bound_dipole, dtype=complex)
        )
        if self.bound_dipole.shape != (3,):
            raise ValueError("bound_dipole must be a 3-vector")

    def _couplings(self, theta_k, phi_k, e, eps):
        d = self.dipole.evaluate(theta_k, phi_k)
        e = np.asarray(e, dtype=complex)
        eps = np.asarray(eps, dtype=complex)
        if self.circular_first:
            return d, d @ eps, self.bound_dipole @ e
        return d, d @ e, self.bound_dipole @ eps

    def amplitude(self, theta_k, phi_k, e, eps, g=1.0):
        _, continuum, bound = self._couplings(theta_k, phi_k, e, eps)
        return -g * continuum * bound

    def grad_e(self, theta_k, phi_k, e, eps, g=1.0):
        d, continuum, bound = self._couplings(theta_k, phi_k, e, eps)
        if self.circular_first:
            return -g * np.multiply.outer(continuum, self.bound_dipole)
        return -g * bound * d

    def grad_eps(self, theta_k, phi_k, e, eps, g=1.0):
        d, continuum, bound = self._couplings(theta_k, phi_k, e, eps)
        if self.circular_first:
            return -g * bound * d
        return -g * np.multiply.outer(continuum, self.bound_dipole)


def _gradients(model, rule, config, pole_margin):
    e = config.circular.vector(pole_margin)
    eps = config.linear.vector(pole_margin)
    g = config.spectral_factor
    grad_e = model.grad_e(rule.theta, rule.phi, e, eps, g)
    grad_eps = model.grad_eps(rule.theta, rule.phi, e, eps, g)
    return e, eps, grad_e, grad_eps


def split_connection(model, rule, config, pole_margin=DEFAULT_POLE_MARGIN):
    """Circular- and linear-field parts of the connection, A = A_e + A_eps.

    A_e_i = i <psi | d psi / d e_i> and A_eps_j = i <psi | d psi / d eps_j>,
    evaluated by quadrature over the photoelectron sphere.
    """
    e, eps, grad_e, grad_eps = _gradients(model, rule, config, pole_margin)
    a = model.amplitude(rule.theta, rule.phi, e, eps, config.spectral_factor)
    a_e = 1j * np.einsum("k,k,ki->i", rule.weights, np.conj(a), grad_e)
    a_eps = 1j * np.einsum("k,k,ki->i", rule.weights, np.conj(a), grad_eps)
    return a_e, a_eps


def split_pullback(model, rule, config, pole_margin=DEFAULT_POLE_MARGIN):
    """(theta, phi) pullback of the two connection parts at the configuration
    point, with alpha held fixed. Returns ((Ae_t, Ae_p), (Aeps_t, Aeps_p))."""
    a_e, a_eps = split_connection(model, rule, config, pole_margin)
    de_dt, de_dp = config.circular.derivatives(pole_margin)
    deps_dt, deps_dp, _ = config.linear.derivatives(pole_margin)
    return (
        (complex(a_e @ de_dt), complex(a_e @ de_dp)),
        (complex(a_eps @ deps_dt), complex(a_eps @ deps_dp)),
    )


@dataclass(frozen=True, eq=False)
class CurvatureBlocks:
    """Orbital-antisymmetric curvature blocks of the two-field manifold.

    circular_block = i <grad_e psi| x |grad_e psi>
    linear_block   = i <grad_eps psi| x |grad_eps psi>
    cross_tensor   = <d psi/d eps_i | d psi/d e_j>  (raw mixed block)
    cross_vector   = eps_lij contraction of cross_tensor
    """

    circular_block: np.ndarray
    linear_block: np.ndarray
    cross_tensor: np.ndarray
    cross_vector: np.ndarray


def curvature_blocks(model, rule, config, pole_margin=DEFAULT_POLE_MARGIN):
    """The three orbital-antisymmetric curvature contributions by quadrature.

    The mixed contribution has no Euler-angle pullback here; it is exposed as
    the raw tensor plus its antisymmetrized contraction.
    """
    _, _, grad_e, grad_eps = _gradients(model, rule, config, pole_margin)
    w = rule.weights
    circular_block = 1j * np.einsum("k,kl->l", w, cross(np.conj(grad_e), grad_e))
    linear_block = 1j * np.einsum("k,kl->l", w, cross(np.conj(grad_eps), grad_eps))
    cross_tensor = np.einsum("k,ki,kj->ij", w, np.conj(grad_eps), grad_e)
    cross_vector = np.einsum("lij,ij->l", EPSILON, cross_tensor)
    return CurvatureBlocks(
        circular_block=circular_block,
        linear_block=linear_block,
        cross_tensor=cross_tensor,
        cross_vector=cross_vector,
    )


def one_field_reduction_check(
    model,
    rule,
    cp,
    alpha=0.0,
    spectral_factor=1.0 + 0.0j,
    pole_margin=DEFAULT_POLE_MARGIN,
):
    """Residual of the reduction of the circular block to the one-field result.

    For the factorized amplitude with the circular field acting second, the
    circular block is the one-field antisymmetric vector times the constant
    linear coupling |G|^2 |d . eps|^2 / |e_tilde|^2.
    """
    if model.circular_first:
        raise ValueError("reduction check requires the circular field acting second")
    config = TwoFieldConfiguration(
        circular=cp,
        linear=LinearPolarization(cp.point, float(alpha)),
        spectral_factor=complex(spectral_factor),
    )
    eps = config.linear.vector(pole_margin)
    coupling = (
        abs(config.spectral_factor) ** 2
        * abs(model.bound_dipole @ eps) ** 2
        / abs(model.dipole.e_tilde) ** 2
    )
    if coupling == 0.0:
        raise ValueError("linear coupling vanishes; reduction is undefined")
    blocks = curvature_blocks(model, rule, config, pole_margin)
    one_field = curvature_tensor(model.dipole, rule).antisym_vector
    return float(np.max(np.abs(blocks.circular_block / coupling - one_field)))
