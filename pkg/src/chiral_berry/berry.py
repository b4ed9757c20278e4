"""Connection 1-form, curvature tensor with its channel decomposition, loop
phases and the Stokes / exterior-derivative consistency checks.

The driven state is the first-order perturbative wavefunction, kept
unnormalized; it is holomorphic in the polarization components, so the
connection pullback uses only the holomorphic differentials. Everything here
depends on the dipole model only through its Gram tensor, computed once per
call by quadrature.
"""

from dataclasses import dataclass

import numpy as np

from .algebra import ABS_EPSILON, EPSILON
from .errors import OpenPath
from .molecule import gram_tensor, propensity_from_gram
from .polarization import (
    DEFAULT_POLE_MARGIN,
    OrientationPoint,
    circular_vector,
    circular_vector_derivatives,
    chi_density,
    wedge_coefficient,
    xi_density,
    zeta_density,
)

TWO_PI = 2.0 * np.pi


def _point_angles(point):
    if isinstance(point, OrientationPoint):
        return point.theta, point.phi
    theta, phi = point
    return float(theta), float(phi)


@dataclass(frozen=True, eq=False)
class ConnectionSample:
    """Connection at one orientation: ambient vector and (theta, phi) pullback."""

    point: OrientationPoint
    sigma: int
    a_vec: np.ndarray
    a_theta: complex
    a_phi: complex


def connection_pullback(gram, theta, phi, sigma=1, pole_margin=DEFAULT_POLE_MARGIN):
    """Pullback components (A_theta, A_phi) of the connection on the sphere.

    The ambient components are A_j = i sum_i conj(e_i) Q_ij; the pullback
    contracts them with the analytic polarization derivatives. Broadcasts
    over theta/phi arrays.
    """
    e = circular_vector(theta, phi, sigma, pole_margin)
    de_dt, de_dp = circular_vector_derivatives(theta, phi, sigma, pole_margin)
    a_vec = 1j * np.einsum("...i,ij->...j", np.conj(e), gram)
    a_theta = np.einsum("...j,...j->...", a_vec, de_dt)
    a_phi = np.einsum("...j,...j->...", a_vec, de_dp)
    return a_theta, a_phi


def connection_at(model, rule, cp, pole_margin=DEFAULT_POLE_MARGIN):
    """Sample the Berry connection for a circular polarization binding."""
    gram = gram_tensor(model, rule)
    e = cp.vector(pole_margin)
    de_dt, de_dp = cp.derivatives(pole_margin)
    a_vec = 1j * np.einsum("i,ij->j", np.conj(e), gram)
    return ConnectionSample(
        point=cp.point,
        sigma=cp.sigma,
        a_vec=a_vec,
        a_theta=complex(a_vec @ de_dt),
        a_phi=complex(a_vec @ de_dp),
    )


@dataclass(frozen=True, eq=False)
class CurvatureTensor:
    """Gram tensor Q_ij = <d_i psi | d_j psi> and its three wedge channels.

    antisym_vector  = i eps_lij Q_ij   (equals the propensity vector)
    diamond_vector  = i |eps_lij| Q_ij (symmetric off-diagonal channel)
    diagonal_vector = i Q_ll           (diagonal channel)
    """

    gram: np.ndarray
    antisym_vector: np.ndarray
    diamond_vector: np.ndarray
    diagonal_vector: np.ndarray

    def reconstruct(self):
        """Reassemble i Q_ij from the three channel vectors."""
        anti = 0.5 * np.einsum("l,lij->ij", self.antisym_vector, EPSILON)
        sym = 0.5 * np.einsum("l,lij->ij", self.diamond_vector, ABS_EPSILON)
        return anti + sym + np.diag(self.diagonal_vector)


def curvature_from_gram(gram):
    """Channel decomposition of a precomputed Gram tensor."""
    gram = np.asarray(gram, dtype=complex)
    return CurvatureTensor(
        gram=gram,
        antisym_vector=propensity_from_gram(gram),
        diamond_vector=1j * np.einsum("lij,ij->l", ABS_EPSILON, gram),
        diagonal_vector=1j * np.diagonal(gram).copy(),
    )


def curvature_tensor(model, rule):
    """Curvature tensor of the one-photon driven state, with decomposition."""
    return curvature_from_gram(gram_tensor(model, rule))


def channel_densities(curv, theta, phi, sigma=1, pole_margin=DEFAULT_POLE_MARGIN):
    """Scalar contributions of the xi, zeta and chi channels to the curvature
    density (coefficient of dtheta ^ dphi). Broadcasts over theta/phi."""
    xi = xi_density(theta, phi, sigma, pole_margin)
    zeta = zeta_density(theta, phi, sigma, pole_margin)
    chi = chi_density(theta, phi, sigma, pole_margin)
    return (
        np.einsum("l,...l->...", curv.antisym_vector, xi),
        np.einsum("l,...l->...", curv.diamond_vector, zeta),
        np.einsum("l,...l->...", curv.diagonal_vector, chi),
    )


def density_from_channels(curv, theta, phi, sigma=1, pole_margin=DEFAULT_POLE_MARGIN):
    """Curvature density assembled from the three channel contractions."""
    part_xi, part_zeta, part_chi = channel_densities(curv, theta, phi, sigma, pole_margin)
    return part_xi + part_zeta + part_chi


def density_from_wedge(curv, theta, phi, sigma=1, pole_margin=DEFAULT_POLE_MARGIN):
    """Curvature density by direct contraction i Q_ij W_ij with the full wedge
    coefficient; independent assembly path used to cross-check the channels."""
    w = wedge_coefficient(theta, phi, sigma, pole_margin)
    return 1j * np.einsum("ij,...ij->...", curv.gram, w)


def curvature_density(model, rule, point, sigma=1, pole_margin=DEFAULT_POLE_MARGIN):
    """Curvature density at a single orientation point."""
    theta, phi = _point_angles(point)
    curv = curvature_tensor(model, rule)
    return complex(density_from_channels(curv, theta, phi, sigma, pole_margin))


def exterior_derivative_check(
    model, rule, point, sigma=1, fd_step=1e-4, pole_margin=DEFAULT_POLE_MARGIN
):
    """Residual |d_theta A_phi - d_phi A_theta - density| by central differences.

    Second-order accurate in fd_step until the round-off floor; the stencil
    must stay inside the pole margin.
    """
    theta, phi = _point_angles(point)
    gram = gram_tensor(model, rule)
    h = float(fd_step)
    _, a_phi_pair = connection_pullback(
        gram, np.array([theta - h, theta + h]), np.array([phi, phi]), sigma, pole_margin
    )
    a_theta_pair, _ = connection_pullback(
        gram, np.array([theta, theta]), np.array([phi - h, phi + h]), sigma, pole_margin
    )
    d_theta_a_phi = (a_phi_pair[1] - a_phi_pair[0]) / (2.0 * h)
    d_phi_a_theta = (a_theta_pair[1] - a_theta_pair[0]) / (2.0 * h)
    density = density_from_channels(
        curvature_from_gram(gram), theta, phi, sigma, pole_margin
    )
    return float(abs((d_theta_a_phi - d_phi_a_theta) - density))


@dataclass(frozen=True, eq=False)
class LoopPath:
    """Closed polyline on the sphere, rows (theta, phi); first point must equal
    the last up to a 2 pi shift in phi."""

    points: np.ndarray
    latitude: bool = False

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise OpenPath(f"path must have shape (n, 2), got {pts.shape}")
        d_theta = abs(pts[-1, 0] - pts[0, 0])
        d_phi = np.mod(pts[-1, 1] - pts[0, 1], TWO_PI)
        d_phi = min(d_phi, TWO_PI - d_phi)
        if d_theta > 1e-9 or d_phi > 1e-9:
            raise OpenPath("first and last path points differ")
        object.__setattr__(self, "points", pts)

    @classmethod
    def latitude_circle(cls, theta0, segments=720):
        """Closed positively-oriented circle of constant theta."""
        phis = np.linspace(0.0, TWO_PI, int(segments) + 1)
        pts = np.column_stack([np.full_like(phis, float(theta0)), phis])
        return cls(points=pts, latitude=True)

    def reverse(self):
        return LoopPath(points=self.points[::-1].copy(), latitude=self.latitude)


@dataclass(frozen=True)
class LoopPhase:
    """Geometric phase of a closed loop: raw value and principal branch."""

    raw: float
    principal: float
    imag_residual: float


def _principal_branch(raw):
    p = np.mod(raw, TWO_PI)
    if p > np.pi:
        p -= TWO_PI
    return float(p)


def connection_line_integral(model, rule, points, sigma=1, pole_margin=DEFAULT_POLE_MARGIN):
    """Composite-trapezoid line integral of A_theta dtheta + A_phi dphi along a
    polyline (not necessarily closed)."""
    gram = gram_tensor(model, rule)
    return _line_integral(gram, np.atleast_2d(np.asarray(points, float)), sigma, pole_margin)


def _line_integral(gram, pts, sigma, pole_margin):
    a_theta, a_phi = connection_pullback(gram, pts[:, 0], pts[:, 1], sigma, pole_margin)
    if pts.shape[0] < 2:
        return 0.0 + 0.0j
    d_theta = np.diff(pts[:, 0])
    d_phi = np.diff(pts[:, 1])
    return complex(
        np.sum(0.5 * (a_theta[:-1] + a_theta[1:]) * d_theta)
        + np.sum(0.5 * (a_phi[:-1] + a_phi[1:]) * d_phi)
    )


def loop_phase(model, rule, path, sigma=1, pole_margin=DEFAULT_POLE_MARGIN):
    """Geometric phase around a closed path.

    The imaginary part of the integral stems from the norm drift of the
    unnormalized state and cancels around closed loops; its residual is
    reported for diagnostics.
    """
    gram = gram_tensor(model, rule)
    integral = _line_integral(gram, path.points, sigma, pole_margin)
    raw = float(integral.real)
    return LoopPhase(
        raw=raw, principal=_principal_branch(raw), imag_residual=abs(integral.imag)
    )


def stokes_parts(
    model,
    rule,
    theta1,
    theta2,
    sigma=1,
    loop_segments=720,
    surface_nodes=(256, 256),
    pole_margin=DEFAULT_POLE_MARGIN,
):
    """Both sides of the Stokes identity on the latitude annulus [theta1, theta2].

    Returns (inner_phase, outer_phase, surface_integral) where the surface
    term integrates the curvature density with Gauss-Legendre nodes in theta
    and a periodic trapezoid in phi.
    """
    theta1, theta2 = float(theta1), float(theta2)
    if theta1 > theta2:
        raise ValueError("theta1 must not exceed theta2")
    gram = gram_tensor(model, rule)
    curv = curvature_from_gram(gram)
    inner = _line_integral(
        gram, LoopPath.latitude_circle(theta1, loop_segments).points, sigma, pole_margin
    )
    outer = _line_integral(
        gram, LoopPath.latitude_circle(theta2, loop_segments).points, sigma, pole_margin
    )
    if theta2 > theta1:
        n_theta, n_phi = surface_nodes
        x, w = np.polynomial.legendre.leggauss(int(n_theta))
        th = 0.5 * (theta1 + theta2) + 0.5 * (theta2 - theta1) * x
        w_th = 0.5 * (theta2 - theta1) * w
        ph = np.linspace(0.0, TWO_PI, int(n_phi), endpoint=False)
        dens = density_from_channels(curv, th[:, None], ph[None, :], sigma, pole_margin)
        surface = (TWO_PI / n_phi) * float(np.sum(w_th[:, None] * np.real(dens)))
    else:
        surface = 0.0
    return float(inner.real), float(outer.real), surface


def stokes_check(
    model,
    rule,
    theta1,
    theta2,
    sigma=1,
    loop_segments=720,
    surface_nodes=(256, 256),
    pole_margin=DEFAULT_POLE_MARGIN,
):
    """Residual |loop(theta2) - loop(theta1) - surface integral| on the annulus."""
    inner, outer, surface = stokes_parts(
        model, rule, theta1, theta2, sigma, loop_segments, surface_nodes, pole_margin
    )
    return float(abs((outer - inner) - surface))


@dataclass(frozen=True, eq=False)
class AmplitudeField:
    """Continuum amplitude a(k, e) = -e_tilde (D(k) . e) with its gradients.

    The amplitude is linear in the polarization components, hence exactly
    holomorphic; anti_holomorphic swaps in conj(e) as a negative control for
    the holomorphy diagnostics.
    """

    model: object
    anti_holomorphic: bool = False

    def amplitude(self, theta_k, phi_k, e):
        d = self.model.evaluate(theta_k, phi_k)
        pol = np.conj(e) if self.anti_holomorphic else np.asarray(e, dtype=complex)
        return -self.model.e_tilde * (d @ pol)

    def grad_e(self, theta_k, phi_k):
        d = self.model.evaluate(theta_k, phi_k)
        if self.anti_holomorphic:
            return np.zeros_like(d)
        return -self.model.e_tilde * d

    def grad_estar(self, theta_k, phi_k):
        d = self.model.evaluate(theta_k, phi_k)
        if self.anti_holomorphic:
            return -self.model.e_tilde * d
        return np.zeros_like(d)


def _fibonacci_directions(n):
    i = np.arange(n)
    z = 1.0 - (2.0 * i + 1.0) / n
    theta = np.arccos(z)
    phi = np.mod(i * np.pi * (3.0 - np.sqrt(5.0)), TWO_PI)
    return theta, phi


def holomorphy_check(
    model,
    point,
    sigma=1,
    fd_step=1e-6,
    anti_holomorphic=False,
    directions=32,
    pole_margin=DEFAULT_POLE_MARGIN,
):
    """Finite-difference residual of the conjugate Wirtinger derivative.

    Evaluates max over components and sampled photoelectron directions of
    |(d/dRe e_i + i d/dIm e_i) a / 2| at the circular polarization of the
    given point. Near zero certifies a holomorphic amplitude; order |D|
    flags an anti-holomorphic one.
    """
    theta, phi = _point_angles(point)
    field = AmplitudeField(model=model, anti_holomorphic=anti_holomorphic)
    theta_k, phi_k = _fibonacci_directions(int(directions))
    e0 = circular_vector(theta, phi, sigma, pole_margin)
    h = float(fd_step)
    worst = 0.0
    for i in range(3):
        step = np.zeros(3, dtype=complex)
        step[i] = h
        d_re = (
            field.amplitude(theta_k, phi_k, e0 + step)
            - field.amplitude(theta_k, phi_k, e0 - step)
        ) / (2.0 * h)
        d_im = (
            field.amplitude(theta_k, phi_k, e0 + 1j * step)
            - field.amplitude(theta_k, phi_k, e0 - 1j * step)
        ) / (2.0 * h)
        wirtinger_conj = 0.5 * (d_re + 1j * d_im)
        worst = max(worst, float(np.max(np.abs(wirtinger_conj))))
    return worst
