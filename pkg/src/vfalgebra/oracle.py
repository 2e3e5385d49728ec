"""Brute-force route to the structure constants.

Each generator is realized as a vector field on the grid, brackets are plain
coordinate Lie brackets [X, Y] = X(Y) - Y(X), and the result is split by
Hodge projection:

    L-coefficient of mode e     = -int div(V) Y_e
    phi-coefficient of mode e   = -(1/mu_e) int curl(V) Y_e
    H-coefficient of field r    =  int <V, h_r>

with curl(V) = eps_hat^{ab} nabla_a V_b.  The generator fields are
L_a = grad(Y_a) / mu_a, phi_a = J grad(Y_a) (J the quarter turn, so
phi_a^i = -eps_hat^{ij} d_j Y_a) and H_r = h_r.  With these choices
[phi_a, phi_b] = +g_{abe} phi_e, which fixes the one free overall sign.
Nothing here refers to the closed-form theorems.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import Basis, ModeId
from .theorems import generator

# relative Fourier tail (above n/3) tolerated before a torus bracket counts as aliased
TAIL_TOLERANCE = 1e-11


class BandOverflowError(RuntimeError):
    """A bracket left the band that the grid represents exactly."""


class DecompositionError(RuntimeError):
    """Hodge reconstruction residual above tolerance."""


@dataclass
class SpectralVectorField:
    """Grid samples of a vector field with optional exact coefficients.

    ``components`` has shape (dim, *grid): coordinate components on the
    tori, ambient Cartesian components on the sphere.  ``degree`` bounds the
    polynomial degree of the components on the sphere (None elsewhere).
    ``magnitude`` is the size the field would have without cancellation; it
    sets the roundoff floor of the torus aliasing test.
    """

    basis: Basis = field(repr=False)
    components: np.ndarray
    l_coeffs: np.ndarray | None = None
    phi_coeffs: np.ndarray | None = None
    h_coeffs: np.ndarray | None = None
    degree: int | None = None
    magnitude: float | None = None

    def __post_init__(self):
        if self.magnitude is None:
            self.magnitude = float(np.abs(self.components).max()) if self.components.size else 0.0

    def __add__(self, other):
        return SpectralVectorField(
            self.basis, self.components + other.components, degree=_max_degree(self, other), magnitude=_magnitude(self, other)
        )

    def __sub__(self, other):
        return SpectralVectorField(
            self.basis, self.components - other.components, degree=_max_degree(self, other), magnitude=_magnitude(self, other)
        )

    def __mul__(self, scalar):
        return replace(
            self,
            components=self.components * scalar,
            l_coeffs=None if self.l_coeffs is None else self.l_coeffs * scalar,
            phi_coeffs=None if self.phi_coeffs is None else self.phi_coeffs * scalar,
            h_coeffs=None if self.h_coeffs is None else self.h_coeffs * scalar,
            magnitude=self.magnitude * abs(scalar),
        )

    __rmul__ = __mul__

    def norm(self):
        """rho-weighted L2 norm."""
        calc = self.basis.calculus
        return float(np.sqrt(calc.integrate(calc.dot(self.components, self.components))))

    def max_abs(self):
        return float(np.abs(self.components).max())

    def synthesize(self):
        """Field rebuilt from its coefficient blocks."""
        return synthesize(self.basis, self.l_coeffs, self.phi_coeffs, self.h_coeffs)


def _magnitude(a, b):
    return max(a.magnitude, b.magnitude, float(np.abs(a.components + b.components).max()))


def _max_degree(*fields):
    degs = [f.degree for f in fields]
    return None if any(d is None for d in degs) else max(degs)


@dataclass
class HodgeParts:
    gradient: SpectralVectorField
    curl: SpectralVectorField
    harmonic: SpectralVectorField
    residual: float

    @property
    def l_coeffs(self):
        return self.gradient.l_coeffs

    @property
    def phi_coeffs(self):
        return self.curl.phi_coeffs

    @property
    def h_coeffs(self):
        return self.harmonic.h_coeffs


@dataclass
class BracketCoefficients:
    """Projection of one bracket onto every generator of the basis."""

    l: np.ndarray
    phi: np.ndarray
    h: np.ndarray

    def block(self, kind):
        return {"L": self.l, "phi": self.phi, "H": self.h}[kind]

    def __neg__(self):
        return BracketCoefficients(-self.l, -self.phi, -self.h)


def _harmonic_array(basis):
    if not basis.harmonic_fields:
        return np.zeros((0, basis.calculus.dim) + basis.grid.shape)
    return np.stack([h.samples for h in basis.harmonic_fields])


def _mode_degree(basis, pos):
    if basis.spec.is_torus:
        return None
    return basis.modes[pos].i + 1


def synthesize(basis, l_coeffs=None, phi_coeffs=None, h_coeffs=None):
    n, nh = len(basis), len(basis.harmonic_fields)
    l = np.zeros(n) if l_coeffs is None else np.asarray(l_coeffs, dtype=float)
    p = np.zeros(n) if phi_coeffs is None else np.asarray(phi_coeffs, dtype=float)
    h = np.zeros(nh) if h_coeffs is None else np.asarray(h_coeffs, dtype=float)
    calc = basis.calculus
    G = basis.gradients
    comps = np.tensordot(l / basis.eigenvalues, G, axes=1)
    comps = comps + calc.rotate(np.tensordot(p, G, axes=1))
    if nh:
        comps = comps + np.tensordot(h, _harmonic_array(basis), axes=1)
    used = np.nonzero((l != 0) | (p != 0))[0]
    degree = None if basis.spec.is_torus else max((_mode_degree(basis, i) for i in used), default=0)
    return SpectralVectorField(basis, comps, l, p, h, degree)


def generator_field(basis: Basis, kind: str, index) -> SpectralVectorField:
    """Vector field of L_index, phi_index or H_index."""
    kind, mode = generator(kind, index)
    n, nh = len(basis), len(basis.harmonic_fields)
    l, p, h = np.zeros(n), np.zeros(n), np.zeros(nh)
    if kind == "H":
        if basis.genus == 0:
            raise ValueError("no harmonic fields on a genus-0 surface")
        if not 1 <= mode.i <= nh:
            raise KeyError(f"harmonic index {mode.i} out of range 1..{nh}")
        h[mode.i - 1] = 1.0
    else:
        pos = basis.position(mode)
        (l if kind == "L" else p)[pos] = 1.0
    return synthesize(basis, l, p, h)


def lie_bracket(X: SpectralVectorField, Y: SpectralVectorField) -> SpectralVectorField:
    """[X, Y]^a = X^b d_b Y^a - Y^b d_b X^a, refusing to alias."""
    if X.basis is not Y.basis:
        raise ValueError("fields live on different bases")
    basis = X.basis
    calc = basis.calculus
    degree = None
    magnitude = None
    if not basis.spec.is_torus:
        degree = X.degree + Y.degree + 1
        if degree > basis.max_field_degree:
            raise BandOverflowError(
                f"bracket degree {degree} exceeds the grid's differentiable degree {basis.max_field_degree}"
            )
    if basis.spec.is_torus:
        comps, scale = calc.lie_bracket(X.components, Y.components, return_scale=True)
        # roundoff in a cancelled input differentiates to at most ~ magnitude * pi * n
        floor = X.magnitude * Y.magnitude * np.pi * calc.n
        magnitude = max(scale, X.magnitude * Y.magnitude)
        tail = calc.tail_fraction(comps, max(scale, floor))
        if tail > TAIL_TOLERANCE:
            raise BandOverflowError(f"bracket spectrum reaches the top third of the grid (tail {tail:.2e})")
    else:
        comps = calc.lie_bracket(X.components, Y.components)
    return SpectralVectorField(basis, comps, degree=degree, magnitude=magnitude)


def project(X: SpectralVectorField, basis: Basis | None = None) -> BracketCoefficients:
    """Exact projections of X onto every L, phi and H generator of the basis."""
    basis = basis or X.basis
    calc = basis.calculus
    W = basis.values * basis.grid.measure
    l = -np.tensordot(W, calc.div(X.components), axes=([-2, -1], [-2, -1]))
    p = -np.tensordot(W, calc.curl(X.components), axes=([-2, -1], [-2, -1])) / basis.eigenvalues
    H = _harmonic_array(basis)
    h = calc.integrate(calc.dot(H, X.components[None])) if len(H) else np.zeros(0)
    return BracketCoefficients(l, p, h)


def hodge_decompose(X: SpectralVectorField, basis: Basis | None = None, tol=1e-10, strict=True) -> HodgeParts:
    """Gradient + curl + harmonic split of X in the modes of ``basis``.

    The residual is the rho-weighted L2 norm of what the three parts miss,
    relative to the size of X: the larger of its norm and its nominal
    magnitude, so that brackets which cancel to roundoff are not judged
    against their own noise.  With ``strict`` a residual above ``tol``
    raises, since that means X is not inside the basis band.
    """
    basis = basis or X.basis
    c = project(X, basis)
    n, nh = len(basis), len(basis.harmonic_fields)
    grad_part = synthesize(basis, l_coeffs=c.l)
    curl_part = synthesize(basis, phi_coeffs=c.phi)
    harm_part = synthesize(basis, h_coeffs=c.h)
    rest = X.components - grad_part.components - curl_part.components - harm_part.components
    calc = basis.calculus
    scale = max(X.norm(), X.magnitude or 0.0, 1e-300)
    residual = float(np.sqrt(calc.integrate(calc.dot(rest, rest)))) / scale
    if strict and residual > tol:
        raise DecompositionError(f"Hodge residual {residual:.3e} above {tol:g}: field exceeds the basis band")
    return HodgeParts(grad_part, curl_part, harm_part, residual)


def apply_projector(X: SpectralVectorField, basis: Basis | None = None, tol=1e-10, strict=True) -> SpectralVectorField:
    """Divergence-free part of X: X minus its gradient part."""
    parts = hodge_decompose(X, basis, tol=tol, strict=strict)
    out = X - parts.gradient
    out.l_coeffs = np.zeros_like(parts.l_coeffs)
    out.phi_coeffs = parts.phi_coeffs
    out.h_coeffs = parts.h_coeffs
    return out


def extract_constants(basis: Basis, kind_a, idx_a, kind_b, idx_b) -> BracketCoefficients:
    """Oracle coefficients of [A, B] on every basis generator."""
    A = generator_field(basis, kind_a, idx_a)
    B = generator_field(basis, kind_b, idx_b)
    return project(lie_bracket(A, B), basis)


def generators(basis: Basis):
    """All generators of the basis as (kind, ModeId), L first, then phi, then H."""
    out = [("L", m) for m in basis.modes] + [("phi", m) for m in basis.modes]
    out += [("H", ModeId("h", h.index)) for h in basis.harmonic_fields]
    return out
