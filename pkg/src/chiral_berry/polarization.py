"""Spherical frames, polarization vectors and their 2-form densities on the
orientation sphere.

All angle arguments broadcast like numpy arrays; vector-valued results carry
the Cartesian components on the last axis. The tangent frame (theta_hat,
phi_hat) is coordinate-singular at the poles, so every frame-dependent
operation excludes caps of configurable angular radius around theta = 0 and
theta = pi.
"""

from dataclasses import dataclass

import numpy as np

from .algebra import cross, diamond
from .errors import PoleSingularity

DEFAULT_POLE_MARGIN = 1e-3

_SQRT2 = np.sqrt(2.0)


def require_off_pole(theta, pole_margin=DEFAULT_POLE_MARGIN):
    """Raise PoleSingularity unless all theta lie strictly inside the caps."""
    theta = np.asarray(theta, dtype=float)
    if np.any((theta <= pole_margin) | (theta >= np.pi - pole_margin)):
        raise PoleSingularity(
            f"theta must lie strictly inside ({pole_margin}, pi - {pole_margin})"
        )


def spherical_frame(theta, phi, pole_margin=DEFAULT_POLE_MARGIN):
    """Right-handed orthonormal triad (r_hat, theta_hat, phi_hat).

    r_hat     = (sin t cos p, sin t sin p, cos t)
    theta_hat = (cos t cos p, cos t sin p, -sin t)
    phi_hat   = (-sin p, cos p, 0)

    satisfying theta_hat x phi_hat = r_hat.
    """
    theta, phi = np.broadcast_arrays(
        np.asarray(theta, dtype=float), np.asarray(phi, dtype=float)
    )
    require_off_pole(theta, pole_margin)
    st, ct = np.sin(theta), np.cos(theta)
    sp, cp = np.sin(phi), np.cos(phi)
    r_hat = np.stack([st * cp, st * sp, ct], axis=-1)
    theta_hat = np.stack([ct * cp, ct * sp, -st], axis=-1)
    phi_hat = np.stack([-sp, cp, np.zeros_like(sp)], axis=-1)
    return r_hat, theta_hat, phi_hat


def circular_vector(theta, phi, sigma=1, pole_margin=DEFAULT_POLE_MARGIN):
    """Unit circular polarization (theta_hat + i sigma phi_hat) / sqrt(2)."""
    _check_sigma(sigma)
    _, theta_hat, phi_hat = spherical_frame(theta, phi, pole_margin)
    return (theta_hat + 1j * sigma * phi_hat) / _SQRT2


def circular_vector_derivatives(theta, phi, sigma=1, pole_margin=DEFAULT_POLE_MARGIN):
    """Analytic partials (d/dtheta, d/dphi) of the circular vector.

    Uses the frame-derivative identities
        d theta_hat / d theta = -r_hat,          d phi_hat / d theta = 0,
        d theta_hat / d phi   = cos t phi_hat,   d phi_hat / d phi = -(sin t r_hat + cos t theta_hat),
    giving
        de/dtheta = -r_hat / sqrt(2)
        de/dphi   = (cos t phi_hat - i s sin t r_hat - i s cos t theta_hat) / sqrt(2).
    """
    _check_sigma(sigma)
    theta, phi = np.broadcast_arrays(
        np.asarray(theta, dtype=float), np.asarray(phi, dtype=float)
    )
    r_hat, theta_hat, phi_hat = spherical_frame(theta, phi, pole_margin)
    ct = np.cos(theta)[..., None]
    st = np.sin(theta)[..., None]
    de_dtheta = -r_hat / _SQRT2 + 0j
    de_dphi = (ct * phi_hat - 1j * sigma * st * r_hat - 1j * sigma * ct * theta_hat) / _SQRT2
    return de_dtheta, de_dphi


def linear_vector(theta, phi, alpha, pole_margin=DEFAULT_POLE_MARGIN):
    """Linear polarization cos(a) theta_hat + sin(a) phi_hat (real-valued)."""
    _, theta_hat, phi_hat = spherical_frame(theta, phi, pole_margin)
    return np.cos(alpha) * theta_hat + np.sin(alpha) * phi_hat


def linear_vector_derivatives(theta, phi, alpha, pole_margin=DEFAULT_POLE_MARGIN):
    """Analytic partials (d/dtheta, d/dphi, d/dalpha) of the linear vector."""
    theta, phi = np.broadcast_arrays(
        np.asarray(theta, dtype=float), np.asarray(phi, dtype=float)
    )
    r_hat, theta_hat, phi_hat = spherical_frame(theta, phi, pole_margin)
    ca, sa = np.cos(alpha), np.sin(alpha)
    ct = np.cos(theta)[..., None]
    st = np.sin(theta)[..., None]
    d_dtheta = -ca * r_hat
    d_dphi = ca * ct * phi_hat - sa * (st * r_hat + ct * theta_hat)
    d_dalpha = -sa * theta_hat + ca * phi_hat
    return d_dtheta, d_dphi, d_dalpha


def projection_map(e):
    """Map a polarization vector to (1/2i) e* x e.

    For the circular vector this lands on (sigma/2) r_hat; for any real
    (linear) vector it vanishes. The result is always real-valued.
    """
    e = np.asarray(e, dtype=complex)
    return -0.5j * cross(np.conj(e), e)


def projection_map_normalized(e):
    """projection_map rescaled to the unit sphere."""
    p = projection_map(e)
    norm = np.linalg.norm(np.real(p), axis=-1, keepdims=True)
    return np.real(p) / norm


def xi_density(theta, phi, sigma=1, pole_margin=DEFAULT_POLE_MARGIN):
    """Antisymmetric-channel 2-form coefficient Re[de*/dt x de/dp].

    This is the vector multiplying dtheta ^ dphi; it evaluates to
    (cos theta / 2) theta_hat independently of sigma.
    """
    de_dt, de_dp = circular_vector_derivatives(theta, phi, sigma, pole_margin)
    return np.real(cross(np.conj(de_dt), de_dp))


def zeta_density(theta, phi, sigma=1, pole_margin=DEFAULT_POLE_MARGIN):
    """Symmetric off-diagonal channel coefficient i Im[de*/dt <> de/dp]."""
    de_dt, de_dp = circular_vector_derivatives(theta, phi, sigma, pole_margin)
    return 1j * np.imag(diamond(np.conj(de_dt), de_dp))


def chi_density(theta, phi, sigma=1, pole_margin=DEFAULT_POLE_MARGIN):
    """Diagonal channel coefficient 2i Im[de*/dt . de/dp] (componentwise)."""
    de_dt, de_dp = circular_vector_derivatives(theta, phi, sigma, pole_margin)
    return 2j * np.imag(np.conj(de_dt) * de_dp)


def wedge_coefficient(theta, phi, sigma=1, pole_margin=DEFAULT_POLE_MARGIN):
    """Full wedge coefficient W_ij = de*_i/dt de_j/dp - de*_i/dp de_j/dt.

    The xi/zeta/chi densities are exactly its antisymmetric, symmetric
    off-diagonal and diagonal index-class extractions.
    """
    de_dt, de_dp = circular_vector_derivatives(theta, phi, sigma, pole_margin)
    return (
        np.conj(de_dt)[..., :, None] * de_dp[..., None, :]
        - np.conj(de_dp)[..., :, None] * de_dt[..., None, :]
    )


def _check_sigma(sigma):
    if sigma not in (-1, 1):
        raise ValueError(f"sigma must be +1 or -1, got {sigma!r}")


@dataclass(frozen=True)
class OrientationPoint:
    """Point (theta, phi) on the orientation sphere, angles in radians."""

    theta: float
    phi: float

    def frame(self, pole_margin=DEFAULT_POLE_MARGIN):
        return spherical_frame(self.theta, self.phi, pole_margin)


@dataclass(frozen=True)
class CircularPolarization:
    """Circular polarization anchored at a point, rotation sense sigma = +-1."""

    point: OrientationPoint
    sigma: int = 1

    def __post_init__(self):
        _check_sigma(self.sigma)

    def vector(self, pole_margin=DEFAULT_POLE_MARGIN):
        return circular_vector(self.point.theta, self.point.phi, self.sigma, pole_margin)

    def derivatives(self, pole_margin=DEFAULT_POLE_MARGIN):
        return circular_vector_derivatives(
            self.point.theta, self.point.phi, self.sigma, pole_margin
        )


@dataclass(frozen=True)
class LinearPolarization:
    """Linear polarization at angle alpha in the (theta_hat, phi_hat) plane."""

    point: OrientationPoint
    alpha: float = 0.0

    def vector(self, pole_margin=DEFAULT_POLE_MARGIN):
        return linear_vector(self.point.theta, self.point.phi, self.alpha, pole_margin)

    def derivatives(self, pole_margin=DEFAULT_POLE_MARGIN):
        return linear_vector_derivatives(
            self.point.theta, self.point.phi, self.alpha, pole_margin
        )


_FORM_FUNCTIONS = {"xi": xi_density, "zeta": zeta_density, "chi": chi_density}


@dataclass(frozen=True, eq=False)
class FormDensityGrid:
    """Form-density samples on a rectangular (theta, phi) grid.

    values has shape (n_theta, n_phi, 3) for vector densities or
    (n_theta, n_phi) for scalar ones.
    """

    thetas: np.ndarray
    phis: np.ndarray
    values: np.ndarray
    form: str
    sigma: int

    def __post_init__(self):
        require_off_pole(self.thetas)
        if self.values.shape[:2] != (len(self.thetas), len(self.phis)):
            raise ValueError("values shape does not match the grid axes")


def uniform_grid(n_theta, n_phi, pole_margin=DEFAULT_POLE_MARGIN):
    """Cell-centered visualization grid, uniform in theta and phi."""
    if n_theta < 1 or n_phi < 1:
        raise ValueError("grid resolutions must be positive")
    span = np.pi - 2.0 * pole_margin
    thetas = pole_margin + span * (np.arange(n_theta) + 0.5) / n_theta
    phis = 2.0 * np.pi * (np.arange(n_phi) + 0.5) / n_phi
    return thetas, phis


def form_density_grid(form, sigma, n_theta, n_phi, pole_margin=DEFAULT_POLE_MARGIN):
    """Sample one of the xi/zeta/chi vector densities on a uniform grid."""
    if form not in _FORM_FUNCTIONS:
        raise ValueError(f"unknown form {form!r}; expected one of {sorted(_FORM_FUNCTIONS)}")
    thetas, phis = uniform_grid(n_theta, n_phi, pole_margin)
    values = _FORM_FUNCTIONS[form](thetas[:, None], phis[None, :], sigma, pole_margin)
    return FormDensityGrid(thetas=thetas, phis=phis, values=values, form=form, sigma=sigma)
