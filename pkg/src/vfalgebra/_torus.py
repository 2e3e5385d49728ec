"""Fourier machinery on the unit-volume torus [0, 1)^2 with metric rho * delta.

Eigenfunctions are trigonometric polynomials held as complex coefficient
windows ``c[k1 + K, k2 + K]``; grid fields are plain N x N arrays and vector
fields carry their coordinate components on a leading axis of length 2.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import linalg

TWO_PI = 2.0 * math.pi


def half_lattice(max_norm2):
    """Canonical half-lattice vectors with 0 < |k|^2 <= max_norm2."""
    r = int(math.isqrt(max_norm2))
    out = []
    for k1 in range(0, r + 1):
        for k2 in range(-r, r + 1):
            if k1 == 0 and k2 <= 0:
                continue
            if k1 * k1 + k2 * k2 <= max_norm2:
                out.append((k1, k2))
    return out


def canonical(k):
    """Representative of +-k on the canonical half-lattice (None for k = 0)."""
    k1, k2 = k
    if k1 > 0 or (k1 == 0 and k2 > 0):
        return (k1, k2)
    if k1 == 0 and k2 == 0:
        return None
    return (-k1, -k2)


def plane_wave_coeffs(k, parity, K):
    """Coefficient window of sqrt(2) cos / sin (2 pi k.phi)."""
    c = np.zeros((2 * K + 1, 2 * K + 1), dtype=complex)
    k1, k2 = k
    s = 1.0 / math.sqrt(2.0)
    if parity == "c":
        c[k1 + K, k2 + K] += s
        c[-k1 + K, -k2 + K] += s
    else:
        c[k1 + K, k2 + K] += -1j * s
        c[-k1 + K, -k2 + K] += 1j * s
    return c


def window_order(coeffs):
    """Half-width K of a coefficient window."""
    return (coeffs.shape[-1] - 1) // 2


def synthesize(coeffs, n):
    """Grid values of trigonometric polynomial(s) on the uniform n x n grid."""
    K = window_order(coeffs)
    if 2 * K >= n:
        raise ValueError(f"grid of size {n} cannot resolve frequency {K}")
    spec = np.zeros(coeffs.shape[:-2] + (n, n), dtype=complex)
    idx = np.arange(-K, K + 1) % n
    spec[..., idx[:, None], idx[None, :]] = coeffs
    return np.real(np.fft.ifft2(spec) * n * n)


def gradient_coeffs(coeffs):
    """Coefficient windows of (d/dphi1, d/dphi2)."""
    K = window_order(coeffs)
    k = np.arange(-K, K + 1)
    d1 = coeffs * (1j * TWO_PI * k)[:, None]
    d2 = coeffs * (1j * TWO_PI * k)[None, :]
    return np.stack([d1, d2], axis=-3)


def evaluate(coeffs, points):
    """Direct evaluation at arbitrary points of shape (..., 2)."""
    points = np.asarray(points, dtype=float)
    K = window_order(coeffs)
    k = np.arange(-K, K + 1)
    e1 = np.exp(1j * TWO_PI * points[..., 0, None] * k)
    e2 = np.exp(1j * TWO_PI * points[..., 1, None] * k)
    return np.real(np.einsum("...i,...j,ij->...", e1, e2, coeffs))


class TorusCalculus:
    """Spectral vector calculus for the conformally flat metric rho * delta."""

    dim = 2

    def __init__(self, n, rho):
        self.n = int(n)
        self.shape = (self.n, self.n)
        axis = np.arange(self.n) / self.n
        self.phi1, self.phi2 = np.meshgrid(axis, axis, indexing="ij")
        self.rho = np.asarray(rho, dtype=float) * np.ones(self.shape)
        self.weights = np.full(self.shape, 1.0 / (self.n * self.n))
        self.measure = self.weights * self.rho
        freq = np.fft.fftfreq(self.n, d=1.0 / self.n)
        ik = 1j * TWO_PI * freq
        if self.n % 2 == 0:
            ik[self.n // 2] = 0.0
        self._ik1 = ik[:, None]
        self._ik2 = ik[None, :]
        self._high = (np.abs(freq)[:, None] > self.n / 3) | (np.abs(freq)[None, :] > self.n / 3)

    def integrate(self, f):
        return np.sum(f * self.measure, axis=(-2, -1))

    def partials(self, f):
        F = np.fft.fft2(f)
        return np.stack([np.real(np.fft.ifft2(self._ik1 * F)), np.real(np.fft.ifft2(self._ik2 * F))], axis=-3)

    def gradient(self, f):
        """Contravariant gradient g^{ab} d_b f."""
        return self.partials(f) / self.rho

    def derivative(self, X, f):
        return np.sum(X * self.partials(f), axis=-3)

    def dot(self, X, Y):
        return self.rho * np.sum(X * Y, axis=-3)

    def cross(self, X, Y):
        """Area form applied to (X, Y), positive on (d/dphi1, d/dphi2)."""
        return self.rho * (X[..., 0, :, :] * Y[..., 1, :, :] - X[..., 1, :, :] * Y[..., 0, :, :])

    def rotate(self, X):
        return np.stack([-X[..., 1, :, :], X[..., 0, :, :]], axis=-3)

    def div(self, X):
        P = self.partials(self.rho * X)
        return (P[..., 0, 0, :, :] + P[..., 1, 1, :, :]) / self.rho

    def curl(self, X):
        return -self.div(self.rotate(X))

    def lie_bracket(self, X, Y, return_scale=False):
        PX = self.partials(X)  # (..., comp a, direction b, grid)
        PY = self.partials(Y)
        xy = np.einsum("...bkl,...abkl->...akl", X, PY)
        yx = np.einsum("...bkl,...abkl->...akl", Y, PX)
        if return_scale:
            scale = np.abs(X).max() * np.abs(PY).max() + np.abs(Y).max() * np.abs(PX).max()
            return xy - yx, scale
        return xy - yx

    def tail_fraction(self, f, scale=None):
        """Largest Fourier magnitude above n/3 relative to ``scale`` (default: largest overall).

        ``scale`` is a grid-value magnitude; it is converted to the FFT
        normalization.
        """
        F = np.abs(np.fft.fft2(f))
        top = F.max() if scale is None else scale * self.n * self.n
        if top == 0.0:
            return 0.0
        return float(F[..., self._high].max() / top)


def real_fourier_basis(K):
    """Real orthonormal trig basis with |k|_inf <= K: constant first, then (k, parity)."""
    labels = [None]
    for k1 in range(0, K + 1):
        for k2 in range(-K, K + 1):
            if k1 == 0 and k2 <= 0:
                continue
            labels.append(((k1, k2), "c"))
            labels.append(((k1, k2), "s"))
    return labels


def galerkin_eigenpairs(rho_fn, K, n_pairs, n_quad):
    """Lowest eigenpairs of -Delta_flat y = mu rho y in the real trig basis of order K.

    Returns eigenvalues, M-orthonormal coefficient vectors (columns), and the
    basis labels.  ``rho_fn`` maps (phi1, phi2) grids to the density.
    """
    labels = real_fourier_basis(K)
    axis = np.arange(n_quad) / n_quad
    x, y = np.meshgrid(axis, axis, indexing="ij")
    rho = rho_fn(x, y)
    B = np.empty((len(labels), n_quad * n_quad))
    stiff = np.zeros(len(labels))
    B[0] = 1.0
    for j, lab in enumerate(labels[1:], start=1):
        (k1, k2), par = lab
        arg = TWO_PI * (k1 * x + k2 * y)
        B[j] = (math.sqrt(2.0) * (np.cos(arg) if par == "c" else np.sin(arg))).ravel()
        stiff[j] = TWO_PI**2 * (k1 * k1 + k2 * k2)
    M = (B * (rho.ravel() / rho.size)) @ B.T
    M = 0.5 * (M + M.T)
    mu, vec = linalg.eigh(np.diag(stiff), M, subset_by_index=[0, n_pairs - 1])
    return mu, vec, labels


def coeffs_from_real(vec, labels, K):
    """Complex coefficient window of sum_j vec[j] * basis_j."""
    c = np.zeros((2 * K + 1, 2 * K + 1), dtype=complex)
    c[K, K] += vec[0]
    for v, lab in zip(vec[1:], labels[1:]):
        k, par = lab
        c += v * plane_wave_coeffs(k, par, K)
    return c
