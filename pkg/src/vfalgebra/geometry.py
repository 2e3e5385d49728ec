"""Supported surfaces, their Laplace eigenbases, harmonic fields and grids.

Every metric is normalized to unit total area and the density is tied to it
by ``sqrt(det g) = rho``, so rho-weighted integrals are plain area integrals.
Coordinates: (phi1, phi2) in [0, 1)^2 on the tori, (theta, azimuth) on the
sphere; the area form is positive on the coordinate frame in that order.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import _sphere, _torus


class GeometryError(ValueError):
    """Invalid manifold configuration or a failed eigenbasis check."""


class ManifoldKind(str, enum.Enum):
    FLAT_TORUS = "torus"
    ROUND_SPHERE = "sphere"
    CONFORMAL_TORUS = "ctorus"


GENUS = {
    ManifoldKind.FLAT_TORUS: 1,
    ManifoldKind.CONFORMAL_TORUS: 1,
    ManifoldKind.ROUND_SPHERE: 0,
}


@dataclass(frozen=True, order=True)
class ModeId:
    """Label of a scalar eigenfunction or of a harmonic field.

    ``family`` is ``"c"``/``"s"`` (torus cos/sin with lattice vector (i, j)),
    ``"sph"`` (real harmonic of degree i, order j) or ``"h"`` (harmonic
    field number i).
    """

    family: str
    i: int
    j: int = 0

    _PATTERN = re.compile(r"^(c|s|sph):(-?\d+),(-?\d+)$|^h:(\d+)$")

    def __post_init__(self):
        if self.family in ("c", "s"):
            if _torus.canonical((self.i, self.j)) != (self.i, self.j):
                raise GeometryError(f"lattice vector {(self.i, self.j)} is not on the canonical half-lattice")
        elif self.family == "sph":
            if self.i < 1 or abs(self.j) > self.i:
                raise GeometryError(f"invalid spherical label l={self.i}, m={self.j}")
        elif self.family == "h":
            if self.i < 1:
                raise GeometryError("harmonic indices start at 1")
        else:
            raise GeometryError(f"unknown mode family {self.family!r}")

    @property
    def label(self):
        if self.family == "h":
            return f"h:{self.i}"
        return f"{self.family}:{self.i},{self.j}"

    def __str__(self):
        return self.label

    @classmethod
    def parse(cls, text):
        m = cls._PATTERN.match(text.strip())
        if not m:
            raise GeometryError(f"cannot parse mode label {text!r}")
        if m.group(4) is not None:
            return cls("h", int(m.group(4)))
        return cls(m.group(1), int(m.group(2)), int(m.group(3)))

    @property
    def lattice(self):
        return (self.i, self.j)

    def sort_key(self):
        """Canonical order: |k|^2 / l first, then the label fields."""
        if self.family in ("c", "s"):
            return (self.i**2 + self.j**2, self.i, self.j, self.family)
        return (self.i, self.j, 0, self.family)


@dataclass(frozen=True)
class ManifoldSpec:
    """Which surface, how many modes, and (for the conformal torus) which metric.

    ``band`` is the largest |k|^2 on the tori and the largest degree l on
    the sphere.  ``conformal_coefficients`` maps torus mode labels (e.g.
    ``"c:1,0"``) to amplitudes of the flat orthonormal modes making up u;
    the metric is ``exp(2u) * delta`` rescaled to unit area.
    """

    kind: ManifoldKind
    band: int
    conformal_coefficients: Mapping[str, float] = field(default_factory=dict)
    grid_size: int | None = None
    galerkin_order: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", ManifoldKind(self.kind))
        object.__setattr__(self, "conformal_coefficients", dict(self.conformal_coefficients))
        if self.band < 1:
            raise GeometryError("band must be at least 1")
        for lab in self.conformal_coefficients:
            mode = ModeId.parse(lab)
            if mode.family not in ("c", "s"):
                raise GeometryError(f"conformal coefficient {lab!r} is not a torus mode")
        if self.kind is ManifoldKind.CONFORMAL_TORUS and not self.conformal_coefficients:
            raise GeometryError("ConformalTorus needs conformal coefficients")

    def __hash__(self):
        return hash((self.kind, self.band, tuple(sorted(self.conformal_coefficients.items())), self.grid_size, self.galerkin_order))

    @property
    def genus(self):
        return GENUS[self.kind]

    @property
    def is_torus(self):
        return self.kind is not ManifoldKind.ROUND_SPHERE


@dataclass(frozen=True)
class QuadratureGrid:
    """Grid nodes with coordinate weights and density.

    ``sum(weights * rho * f)`` is the rho-weighted integral of f.  For the
    tori the nodes are (phi1, phi2) on a uniform product grid; for the
    sphere (theta, azimuth) with Gauss-Legendre nodes in cos(theta).
    """

    nodes: tuple
    weights: np.ndarray
    rho: np.ndarray

    @property
    def shape(self):
        return self.weights.shape

    @property
    def measure(self):
        return self.weights * self.rho

    def integrate(self, f):
        return np.sum(f * self.measure, axis=(-2, -1))


@dataclass(frozen=True)
class HarmonicField:
    """Divergence- and curl-free field h_(r).

    On the tori ``covector`` holds the constant covector c with
    ``h^a = delta^{ab} c_b / rho``; ``samples`` are the grid values of h^a.
    """

    index: int
    covector: tuple
    samples: np.ndarray


class _ConformalFactor:
    """u(phi) from the mode amplitudes, shifted so the area is exactly 1."""

    def __init__(self, coefficients):
        self.terms = []
        for lab, amp in sorted(coefficients.items()):
            mode = ModeId.parse(lab)
            self.terms.append((mode.lattice, mode.family, float(amp)))
        n = 4 * (max((abs(k[0]) + abs(k[1]) for k, _, _ in self.terms), default=1)) * 16
        axis = np.arange(n) / n
        x, y = np.meshgrid(axis, axis, indexing="ij")
        self.shift = -0.5 * math.log(np.mean(np.exp(2.0 * self.raw(x, y))))

    def raw(self, x, y):
        u = np.zeros(np.broadcast(x, y).shape)
        for (k1, k2), par, amp in self.terms:
            arg = _torus.TWO_PI * (k1 * x + k2 * y)
            u = u + amp * math.sqrt(2.0) * (np.cos(arg) if par == "c" else np.sin(arg))
        return u

    def __call__(self, x, y):
        return self.raw(x, y) + self.shift

    def flat_laplacian(self, x, y):
        out = np.zeros(np.broadcast(x, y).shape)
        for (k1, k2), par, amp in self.terms:
            arg = _torus.TWO_PI * (k1 * x + k2 * y)
            lam = _torus.TWO_PI**2 * (k1 * k1 + k2 * k2)
            out = out - lam * amp * math.sqrt(2.0) * (np.cos(arg) if par == "c" else np.sin(arg))
        return out

    def density(self, x, y):
        return np.exp(2.0 * self(x, y))


@dataclass(frozen=True, eq=False)
class Basis:
    """Truncated orthonormal eigenbasis plus harmonic fields on one grid.

    ``values[n]`` and ``gradients[n]`` hold Y_n and its contravariant
    gradient on the grid; on the sphere vectors are ambient 3-vectors, on
    the tori coordinate components.
    """

    spec: ManifoldSpec
    modes: tuple
    eigenvalues: np.ndarray
    harmonic_fields: tuple
    grid: QuadratureGrid
    values: np.ndarray
    gradients: np.ndarray
    calculus: object
    coefficients: np.ndarray | None = None  # torus coefficient windows
    max_field_degree: int | None = None  # sphere: largest differentiable polynomial degree

    def __len__(self):
        return len(self.modes)

    @cached_property
    def index(self):
        return {m: n for n, m in enumerate(self.modes)}

    def position(self, mode):
        if isinstance(mode, str):
            mode = ModeId.parse(mode)
        try:
            return self.index[mode]
        except KeyError:
            raise KeyError(f"mode {mode} is not in the basis") from None

    @property
    def genus(self):
        return self.spec.genus

    @property
    def labels(self):
        return [m.label for m in self.modes]

    def to_json(self):
        return {
            "manifold": self.spec.kind.value,
            "band": self.spec.band,
            "modes": self.labels,
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "harmonic_fields": len(self.harmonic_fields),
        }


def _freeze(*arrays):
    for a in arrays:
        if isinstance(a, np.ndarray):
            a.setflags(write=False)


def _torus_grid_size(spec):
    kmax = math.isqrt(spec.band)
    n = max(4 * spec.band + 2, 6 * kmax + 6)
    return n + (n % 2)


def build_basis(spec: ManifoldSpec) -> Basis:
    """Eigenbasis with every mode of the configured band, sorted by (mu, label)."""
    if spec.kind is ManifoldKind.ROUND_SPHERE:
        return _sphere_basis(spec)
    if spec.kind is ManifoldKind.FLAT_TORUS:
        return _flat_torus_basis(spec)
    return _conformal_torus_basis(spec)


def _flat_torus_basis(spec):
    ks = _torus.half_lattice(spec.band)
    modes = sorted((ModeId(p, *k) for k in ks for p in ("c", "s")), key=ModeId.sort_key)
    K = max(max(abs(m.i), abs(m.j)) for m in modes)
    coeffs = np.stack([_torus.plane_wave_coeffs(m.lattice, m.family, K) for m in modes])
    mu = np.array([_torus.TWO_PI**2 * (m.i**2 + m.j**2) for m in modes])
    n = spec.grid_size or _torus_grid_size(spec)
    calc = _torus.TorusCalculus(n, 1.0)
    return _torus_basis(spec, tuple(modes), mu, coeffs, calc)


def _conformal_torus_basis(spec, residual_tol=1e-8):
    u = _ConformalFactor(spec.conformal_coefficients)
    kmax = math.isqrt(spec.band)
    K = spec.galerkin_order or max(2 * kmax + 12, math.isqrt(2 * spec.band) + 1)
    n = spec.grid_size or max(128, _torus_grid_size(spec))
    calc = _torus.TorusCalculus(n, u.density(*np.meshgrid(np.arange(n) / n, np.arange(n) / n, indexing="ij")))
    if not np.all(calc.rho > 0) or not np.all(np.isfinite(calc.rho)):
        raise GeometryError("conformal factor is not positive on the grid")

    flat = sorted((ModeId(p, *k) for k in _torus.half_lattice(spec.band) for p in ("c", "s")), key=ModeId.sort_key)
    n_want = len(flat)
    mu, vec, labels = _torus.galerkin_eigenpairs(u.density, K, n_want + 9, n_quad=4 * K + 32)
    if abs(mu[0]) > 1e-8 * mu[1]:
        raise GeometryError("lowest Galerkin eigenvalue is not the constant mode")
    mu, vec = mu[1:], vec[:, 1:]
    gap = mu[n_want] - mu[n_want - 1]
    if gap <= 1e-6 * mu[n_want]:
        raise GeometryError("band cutoff splits a degenerate eigenvalue cluster; choose another band")
    mu, vec = mu[:n_want], vec[:, :n_want]

    # overlap with the flat modes of the band (rows follow `flat`)
    label_pos = {lab: j for j, lab in enumerate(labels)}
    rows = [label_pos[(m.lattice, m.family)] for m in flat]
    vec = _align_clusters(mu, vec, rows)
    overlap = vec[rows, :]
    r_ind, c_ind = linear_sum_assignment(-np.abs(overlap))
    assigned = dict(zip(c_ind, r_ind))
    modes, cols = [], []
    for col in range(n_want):
        row = assigned[col]
        sign = 1.0 if overlap[row, col] >= 0 else -1.0
        vec[:, col] *= sign
        modes.append(flat[row])
        cols.append(col)
    order = sorted(range(n_want), key=lambda c: (round(mu[c], 9), modes[c].sort_key()))
    modes = tuple(modes[c] for c in order)
    mu = mu[order]
    coeffs = np.stack([_torus.coeffs_from_real(vec[:, c], labels, K) for c in order])
    basis = _torus_basis(spec, modes, mu, coeffs, calc)
    res = eigen_residuals(basis)
    if res.max() > residual_tol:
        raise GeometryError(f"eigensolver residual {res.max():.3e} above tolerance {residual_tol:g}")
    return basis


def _align_clusters(mu, vec, rows):
    """Rotate each degenerate eigenspace towards the flat modes it overlaps most."""
    vec = vec.copy()
    start = 0
    while start < len(mu):
        stop = start + 1
        while stop < len(mu) and mu[stop] - mu[start] <= 1e-9 * mu[start]:
            stop += 1
        if stop - start > 1:
            block = vec[:, start:stop]
            S = block[rows, :]  # flat-mode overlaps
            # keep the flat modes with the largest weight in this eigenspace
            weight = np.sum(S**2, axis=1)
            keep = np.sort(np.argsort(-weight)[: stop - start])
            U, _, Vt = np.linalg.svd(S[keep, :].T)
            vec[:, start:stop] = block @ (U @ Vt)
        start = stop
    return vec


def _torus_basis(spec, modes, mu, coeffs, calc):
    values = _torus.synthesize(coeffs, calc.n)
    grads = _torus.synthesize(_torus.gradient_coeffs(coeffs), calc.n) / calc.rho
    grid = QuadratureGrid((calc.phi1, calc.phi2), calc.weights, calc.rho)
    harmonics = []
    for r, c in ((1, (1.0, 0.0)), (2, (0.0, 1.0))):
        samples = np.stack([np.full(calc.shape, c[0]), np.full(calc.shape, c[1])]) / calc.rho
        _freeze(samples)
        harmonics.append(HarmonicField(r, c, samples))
    _freeze(mu, values, grads, coeffs, grid.weights, grid.rho)
    return Basis(spec, modes, mu, tuple(harmonics), grid, values, grads, calc, coefficients=coeffs)


def _sphere_basis(spec):
    L = spec.band
    analysis = spec.grid_size or max(2 * L + 4, L + 6)
    calc = _sphere.SphereCalculus(analysis)
    lm = _sphere.mode_list(L, lmin=1)
    modes = tuple(ModeId("sph", l, m) for l, m in lm)
    mu = np.array([4.0 * math.pi * l * (l + 1) for l, _ in lm])
    val, dth, dph = _sphere.real_harmonics(lm, calc.theta, calc.phi)
    grads = calc.ambient_gradient(dth, dph)
    grid = QuadratureGrid((calc.theta, calc.phi), calc.weights, calc.rho)
    _freeze(mu, val, grads)
    return Basis(spec, modes, mu, (), grid, val, grads, calc, max_field_degree=analysis - 1)


def _as_mode(basis, mode):
    pos = basis.position(mode)
    return basis.modes[pos], pos


def eval_scalar(basis: Basis, mode, points):
    """Y_mode at points of shape (..., 2) in the manifold's coordinates."""
    mode, pos = _as_mode(basis, mode)
    points = np.asarray(points, dtype=float)
    if basis.spec.is_torus:
        return _torus.evaluate(basis.coefficients[pos], points)
    val, _, _ = _sphere.real_harmonics([(mode.i, mode.j)], points[..., 0], points[..., 1])
    return val[0]


def grad_scalar(basis: Basis, mode, points, raise_index=False):
    """Coordinate partials d_a Y (or g^{ab} d_b Y) at points; shape (..., 2)."""
    mode, pos = _as_mode(basis, mode)
    points = np.asarray(points, dtype=float)
    if basis.spec.is_torus:
        d = _torus.gradient_coeffs(basis.coefficients[pos])
        out = np.stack([_torus.evaluate(d[0], points), _torus.evaluate(d[1], points)], axis=-1)
        if raise_index:
            out = out / _density(basis.spec, points)[..., None]
        return out
    theta = points[..., 0]
    _, dth, dph = _sphere.real_harmonics([(mode.i, mode.j)], theta, points[..., 1])
    out = np.stack([dth[0], dph[0] * np.sin(theta)], axis=-1)
    if raise_index:
        R2 = _sphere.RADIUS**2
        out = out / np.stack([np.full_like(theta, R2), R2 * np.sin(theta) ** 2], axis=-1)
    return out


def _density(spec, points):
    points = np.asarray(points, dtype=float)
    if spec.kind is ManifoldKind.CONFORMAL_TORUS:
        return _ConformalFactor(spec.conformal_coefficients).density(points[..., 0], points[..., 1])
    if spec.kind is ManifoldKind.FLAT_TORUS:
        return np.ones(points.shape[:-1])
    return _sphere.RADIUS**2 * np.sin(points[..., 0])


def density(spec: ManifoldSpec, points):
    """rho = sqrt(det g) at points of shape (..., 2)."""
    return _density(spec, points)


def harmonic_basis(basis: Basis):
    """The 2g orthonormal harmonic fields (empty on the sphere)."""
    return list(basis.harmonic_fields)


def gaussian_curvature(spec: ManifoldSpec, points):
    points = np.asarray(points, dtype=float)
    shape = points.shape[:-1]
    if spec.kind is ManifoldKind.FLAT_TORUS:
        return np.zeros(shape)
    if spec.kind is ManifoldKind.ROUND_SPHERE:
        return np.full(shape, 1.0 / _sphere.RADIUS**2)
    u = _ConformalFactor(spec.conformal_coefficients)
    x, y = points[..., 0], points[..., 1]
    return -np.exp(-2.0 * u(x, y)) * u.flat_laplacian(x, y)


def grid_points(basis: Basis):
    """Grid nodes stacked as (..., 2) coordinates."""
    return np.stack(basis.grid.nodes, axis=-1)


def gram_matrix(basis: Basis):
    V = basis.values.reshape(len(basis), -1)
    return (V * basis.grid.measure.ravel()) @ V.T


def eigen_residuals(basis: Basis):
    """rho-weighted L2 norms of Delta Y + mu Y for every mode."""
    calc = basis.calculus
    lap = calc.div(basis.gradients)
    r = lap + basis.eigenvalues[:, None, None] * basis.values
    return np.sqrt(calc.integrate(r * r))
