"""Real spherical harmonics and tangent-field calculus on the unit-area sphere.

Tangent vector fields are stored by their ambient Cartesian components, which
are polynomials restricted to the sphere whenever the field is band limited.
That keeps every quantity smooth at the poles; the Gauss-Legendre nodes never
sit on them anyway.
"""

from __future__ import annotations

import math

import numpy as np

# radius of the sphere with total area 1
RADIUS = 1.0 / math.sqrt(4.0 * math.pi)


def mode_list(lmax, lmin=0):
    """All (l, m) with lmin <= l <= lmax in (l, m) order."""
    return [(l, m) for l in range(lmin, lmax + 1) for m in range(-l, l + 1)]


def _legendre_table(lmax, x):
    """Orthonormal associated Legendre functions and their theta derivatives.

    Returns arrays ``q[l, m]`` and ``dq[l, m]`` (m >= 0) such that
    ``q[l, m] * exp(i m phi)`` is orthonormal on the unit sphere; no
    Condon-Shortley phase.  ``x = cos(theta)`` must avoid the poles.
    """
    x = np.asarray(x, dtype=float)
    s = np.sqrt(1.0 - x * x)
    q = np.zeros((lmax + 1, lmax + 1) + x.shape)
    q[0, 0] = math.sqrt(1.0 / (4.0 * math.pi))
    for m in range(1, lmax + 1):
        q[m, m] = math.sqrt((2 * m + 1) / (2.0 * m)) * s * q[m - 1, m - 1]
    for m in range(0, lmax):
        q[m + 1, m] = math.sqrt(2 * m + 3) * x * q[m, m]
    for m in range(0, lmax + 1):
        for l in range(m + 2, lmax + 1):
            a = math.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            b = math.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
            q[l, m] = a * (x * q[l - 1, m] - b * q[l - 2, m])
    dq = np.zeros_like(q)
    with np.errstate(divide="ignore", invalid="ignore"):
        _fill_theta_derivative(q, dq, x, s, lmax)
    return q, dq


def _fill_theta_derivative(q, dq, x, s, lmax):
    for l in range(1, lmax + 1):
        for m in range(0, l + 1):
            c = math.sqrt((2 * l + 1) / (2 * l - 1) * (l * l - m * m))
            lower = q[l - 1, m] if m <= l - 1 else 0.0
            dq[l, m] = (l * x * q[l, m] - c * lower) / s


def real_harmonics(modes, theta, phi):
    """Unit-area real harmonics with their theta and (phi / sin theta) derivatives.

    Each returned array has shape ``(len(modes),) + theta.shape``.  The
    harmonics are orthonormal for the area measure of the unit-area sphere.
    Coordinate derivatives are undefined (nan) exactly at the poles.
    """
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    lmax = max(l for l, _ in modes) if modes else 0
    x = np.cos(theta)
    sin_t = np.sin(theta)
    q, dq = _legendre_table(lmax, x)
    scale = math.sqrt(4.0 * math.pi)
    shape = (len(modes),) + theta.shape
    val = np.empty(shape)
    d_theta = np.empty(shape)
    d_phi_s = np.empty(shape)  # (1 / sin theta) d/dphi
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_sin = 1.0 / sin_t
    for n, (l, m) in enumerate(modes):
        am = abs(m)
        if m == 0:
            trig, dtrig, norm = np.ones_like(phi), np.zeros_like(phi), 1.0
        elif m > 0:
            trig, dtrig, norm = np.cos(m * phi), -m * np.sin(m * phi), math.sqrt(2.0)
        else:
            trig, dtrig, norm = np.sin(am * phi), am * np.cos(am * phi), math.sqrt(2.0)
        val[n] = scale * norm * q[l, am] * trig
        d_theta[n] = scale * norm * dq[l, am] * trig
        with np.errstate(invalid="ignore"):
            d_phi_s[n] = scale * norm * q[l, am] * dtrig * inv_sin
    return val, d_theta, d_phi_s


def frame(theta, phi):
    """Ambient unit vectors (r_hat, e_theta, e_phi), each of shape (3, ...)."""
    st, ct = np.sin(theta), np.cos(theta)
    sp, cp = np.sin(phi), np.cos(phi)
    r_hat = np.stack([st * cp, st * sp, ct])
    e_theta = np.stack([ct * cp, ct * sp, -st])
    e_phi = np.stack([-sp, cp, np.zeros_like(phi)])
    return r_hat, e_theta, e_phi


class SphereCalculus:
    """Spectral vector calculus on a Gauss-Legendre x uniform-azimuth grid.

    Functions of polynomial degree up to ``analysis_band`` are transformed
    exactly; derivatives are synthesized from analytic harmonic gradients.
    """

    dim = 3

    def __init__(self, analysis_band):
        self.analysis_band = int(analysis_band)
        n_theta = self.analysis_band + 1
        n_phi = 2 * self.analysis_band + 2
        x, w = np.polynomial.legendre.leggauss(n_theta)
        theta = np.arccos(x)[::-1]
        w = w[::-1]
        phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
        self.theta, self.phi = np.meshgrid(theta, phi, indexing="ij")
        self.shape = self.theta.shape
        self.rho = RADIUS**2 * np.sin(self.theta)
        # coordinate measure d(theta) d(phi): dtheta = dx / sin(theta)
        self.weights = (w[:, None] / np.sin(theta)[:, None]) * (2.0 * np.pi / n_phi) * np.ones(self.shape)
        self.measure = self.weights * self.rho
        self.r_hat, self.e_theta, self.e_phi = frame(self.theta, self.phi)
        self.position = RADIUS * self.r_hat
        self._modes = mode_list(self.analysis_band)
        val, dth, dph = real_harmonics(self._modes, self.theta, self.phi)
        self._val = val
        self._grad = self.ambient_gradient(dth, dph)
        self._analysis = val * self.measure

    def ambient_gradient(self, d_theta, d_phi_s):
        """Surface gradient as an ambient vector from coordinate derivatives."""
        g = (d_theta[..., None, :, :] * self.e_theta + d_phi_s[..., None, :, :] * self.e_phi) / RADIUS
        return g

    def integrate(self, f):
        return np.sum(f * self.measure, axis=(-2, -1))

    def analyse(self, f):
        """Harmonic coefficients (l <= analysis_band) of grid functions."""
        return np.tensordot(f, self._analysis, axes=([-2, -1], [-2, -1]))

    def gradient(self, f):
        """Surface gradient of band-limited grid function(s); shape (..., 3, *grid)."""
        a = self.analyse(f)
        return np.tensordot(a, self._grad, axes=([-1], [0]))

    def derivative(self, X, f):
        return np.sum(X * self.gradient(f), axis=-3)

    def dot(self, X, Y):
        return np.sum(X * Y, axis=-3)

    def cross(self, X, Y):
        """Area form applied to (X, Y), positive for (e_theta, e_phi)."""
        return np.sum(self.r_hat * np.cross(X, Y, axis=-3), axis=-3)

    def rotate(self, X):
        """Quarter turn J with cross(X, Y) == dot(J X, Y)."""
        return np.cross(self.r_hat, X, axis=-3)

    def div(self, X):
        # tangential trace of the component gradients
        G = self.gradient(X)  # (..., 3 comps, 3 dirs, grid)
        return np.einsum("...iikl->...kl", G)

    def curl(self, X):
        return -self.div(self.rotate(X))

    def lie_bracket(self, X, Y):
        GX = self.gradient(X)
        GY = self.gradient(Y)
        return np.einsum("...jkl,...ijkl->...ikl", X, GY) - np.einsum("...jkl,...ijkl->...ikl", Y, GX)
