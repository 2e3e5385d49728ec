import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vfalgebra import oracle
from vfalgebra.geometry import ManifoldSpec, ModeId, build_basis
from vfalgebra.tensors import compute_d, compute_e
from vfalgebra.theorems import compute_e_anti


@pytest.mark.parametrize("name,tol", [("flat2", 1e-10), ("sphere3", 1e-10), ("ctorus2", 1e-8)])
def test_generator_fields(request, name, tol):
    basis = request.getfixturevalue(name)
    calc = basis.calculus
    for n, m in enumerate(basis.modes):
        L = oracle.generator_field(basis, "L", m)
        P = oracle.generator_field(basis, "phi", m)
        assert np.abs(calc.div(L.components) + basis.values[n]).max() <= tol * basis.eigenvalues[n]
        assert np.abs(calc.div(P.components)).max() <= tol * basis.eigenvalues[n]
        # curl of the Hamiltonian field is the Laplacian of its generator
        assert np.abs(calc.curl(P.components) + basis.eigenvalues[n] * basis.values[n]).max() <= (
            tol * basis.eigenvalues[n] ** 2
        )
    for h in basis.harmonic_fields:
        H = oracle.generator_field(basis, "H", h.index)
        assert H.norm() == pytest.approx(1.0, abs=1e-12)


def test_harmonic_generator_on_sphere_rejected(sphere3):
    with pytest.raises(ValueError):
        oracle.generator_field(sphere3, "H", 1)
    with pytest.raises(KeyError):
        oracle.generator_field(sphere3, "L", "c:1,0")
    with pytest.raises(ValueError):
        oracle.generator_field(sphere3, "X", "sph:1,0")


@pytest.mark.parametrize("name", ["flat2", "sphere3", "ctorus2"])
def test_self_bracket_vanishes(request, name):
    basis = request.getfixturevalue(name)
    for kind, mode in oracle.generators(basis)[::4]:
        X = oracle.generator_field(basis, kind, mode)
        assert oracle.lie_bracket(X, X).max_abs() <= 1e-12 * max(1.0, X.max_abs() ** 2)


def test_constant_fields_commute(flat2):
    H1 = oracle.generator_field(flat2, "H", 1)
    H2 = oracle.generator_field(flat2, "H", 2)
    assert oracle.lie_bracket(H1, H2).max_abs() == 0.0


def test_phi_phi_bracket_reproduces_g(flat2, table_flat2):
    c = oracle.extract_constants(flat2, "phi", "c:1,0", "phi", "c:0,1")
    for n, m in enumerate(flat2.modes):
        assert c.phi[n] == pytest.approx(table_flat2.g["c:1,0", "c:0,1", m], abs=1e-10)
    assert np.abs(c.l).max() <= 1e-10 and np.abs(c.h).max() <= 1e-10


def test_l_phi_l_part_on_sphere(sphere3, table_sphere3):
    for a, b in itertools.product(sphere3.modes[:8], repeat=2):
        c = oracle.extract_constants(sphere3, "L", a, "phi", b)
        ref = np.array([table_sphere3.g[a, b, e] for e in sphere3.modes])
        assert np.abs(c.l - ref).max() <= 1e-10 * max(1.0, np.abs(ref).max())


@pytest.mark.parametrize("a,b,nonzero", [("c:1,0", "c:0,1", False), ("c:1,0", "c:2,0", True)])
def test_l_l_l_part_is_antisymmetrized_e(flat4, a, b, nonzero):
    e_anti = compute_e_anti(flat4, compute_e(flat4, compute_d(flat4)))
    c = oracle.extract_constants(flat4, "L", a, "L", b)
    ref = np.array([e_anti[a, b, m] for m in flat4.modes])
    # equal eigenvalues make the antisymmetrized e vanish identically
    assert (np.abs(ref).max() > 0.1) == nonzero
    assert np.abs(c.l - ref).max() <= 1e-10


def test_hodge_of_generators(flat2, sphere3, ctorus2):
    for basis in (flat2, sphere3, ctorus2):
        n = len(basis)
        for pos in (0, n // 2, n - 1):
            L = oracle.generator_field(basis, "L", basis.modes[pos])
            parts = oracle.hodge_decompose(L, tol=1e-8)
            assert np.abs(parts.l_coeffs - np.eye(n)[pos]).max() <= 1e-10
            assert np.abs(parts.phi_coeffs).max() <= 1e-10
            P = oracle.generator_field(basis, "phi", basis.modes[pos])
            parts = oracle.hodge_decompose(P, tol=1e-8)
            assert np.abs(parts.l_coeffs).max() <= 1e-10
            assert parts.gradient.max_abs() <= 1e-10 * P.max_abs()
            if len(parts.h_coeffs):
                assert np.abs(parts.h_coeffs).max() <= 1e-10


def test_constant_field_is_harmonic(flat2):
    X = oracle.SpectralVectorField(flat2, np.stack([np.full(flat2.grid.shape, 0.3), np.full(flat2.grid.shape, -2.0)]))
    parts = oracle.hodge_decompose(X)
    assert np.allclose(parts.h_coeffs, [0.3, -2.0], atol=1e-14)
    assert parts.gradient.max_abs() <= 1e-14 and parts.curl.max_abs() <= 1e-14


def test_projector(sphere3, flat2):
    for basis in (sphere3, flat2):
        for m in basis.modes:
            L = oracle.generator_field(basis, "L", m)
            assert oracle.apply_projector(L).max_abs() <= 1e-12 * L.max_abs()
        X = oracle.synthesize(basis, np.arange(len(basis)) % 3 - 1.0, np.arange(len(basis)) % 2 + 0.5)
        P1 = oracle.apply_projector(X)
        P2 = oracle.apply_projector(P1)
        assert np.abs(P2.components - P1.components).max() <= 1e-12 * X.max_abs()


def test_non_band_limited_field_raises(flat2):
    x = flat2.grid.nodes[0]
    comps = np.stack([np.cos(2 * np.pi * 2 * x), np.zeros_like(x)])  # mode (2,0) is outside |k|^2 <= 2
    with pytest.raises(oracle.DecompositionError):
        oracle.hodge_decompose(oracle.SpectralVectorField(flat2, comps))


def test_band_overflow_torus():
    basis = build_basis(ManifoldSpec("torus", 4, grid_size=8))
    X = oracle.generator_field(basis, "phi", "c:2,0")
    Y = oracle.generator_field(basis, "phi", "s:1,1")  # products reach frequency (3, 1); 3 > 8/3
    with pytest.raises(oracle.BandOverflowError):
        oracle.lie_bracket(X, Y)


def test_band_overflow_sphere():
    basis = build_basis(ManifoldSpec("sphere", 1))
    X = oracle.generator_field(basis, "phi", "sph:1,0")
    Y = oracle.generator_field(basis, "phi", "sph:1,1")
    B = oracle.lie_bracket(X, Y)
    with pytest.raises(oracle.BandOverflowError):
        oracle.lie_bracket(X, oracle.lie_bracket(B, Y))


def test_bracket_closure_band():
    # brackets of |k|^2 <= 2 generators decompose exactly in the |k|^2 <= 8 basis
    big = build_basis(ManifoldSpec("torus", 8))
    small = [m for m in big.modes if m.i**2 + m.j**2 <= 2]
    for a, b in itertools.combinations(small, 2):
        for ka, kb in (("L", "L"), ("L", "phi"), ("phi", "phi")):
            B = oracle.lie_bracket(oracle.generator_field(big, ka, a), oracle.generator_field(big, kb, b))
            assert oracle.hodge_decompose(B, strict=False).residual <= 1e-10
    sphere = build_basis(ManifoldSpec("sphere", 4))
    low = [m for m in sphere.modes if m.i <= 2]
    for a, b in itertools.combinations(low, 2):
        B = oracle.lie_bracket(oracle.generator_field(sphere, "L", a), oracle.generator_field(sphere, "phi", b))
        assert oracle.hodge_decompose(B, strict=False).residual <= 1e-10


def test_spectral_field_arithmetic(flat2):
    X = oracle.generator_field(flat2, "L", "c:1,0")
    Y = oracle.generator_field(flat2, "phi", "s:1,1")
    Z = 2.0 * X - Y
    assert np.allclose(Z.components, 2 * X.components - Y.components)
    assert np.allclose((X * 3.0).l_coeffs, 3 * X.l_coeffs)
    assert np.allclose(X.synthesize().components, X.components)


def _random_coeffs(basis, data):
    n, nh = len(basis), len(basis.harmonic_fields)
    floats = st.floats(-2, 2, allow_nan=False)
    l = np.array(data.draw(st.lists(floats, min_size=n, max_size=n)))
    p = np.array(data.draw(st.lists(floats, min_size=n, max_size=n)))
    h = np.array(data.draw(st.lists(floats, min_size=nh, max_size=nh)))
    return l, p, h


@settings(max_examples=30, deadline=None)
@given(data=st.data())
def test_decomposition_recovers_coefficients(flat2, sphere3, ctorus2, data):
    basis = data.draw(st.sampled_from([flat2, sphere3, ctorus2]))
    l, p, h = _random_coeffs(basis, data)
    X = oracle.synthesize(basis, l, p, h)
    parts = oracle.hodge_decompose(oracle.SpectralVectorField(basis, X.components), tol=1e-8)
    assert np.abs(parts.l_coeffs - l).max() <= 1e-9
    assert np.abs(parts.phi_coeffs - p).max() <= 1e-9
    if len(h):
        assert np.abs(parts.h_coeffs - h).max() <= 1e-9
    # the three parts are mutually orthogonal
    calc = basis.calculus
    g, c, hp = parts.gradient.components, parts.curl.components, parts.harmonic.components
    scale = max(1.0, X.norm() ** 2)
    for u, v in ((g, c), (g, hp), (c, hp)):
        assert abs(calc.integrate(calc.dot(u, v))) <= 1e-9 * scale


@settings(max_examples=20, deadline=None)
@given(i=st.integers(0, 7), j=st.integers(0, 7), ki=st.sampled_from(["L", "phi"]), kj=st.sampled_from(["L", "phi", "H"]))
def test_swap_negates_extraction(flat2, i, j, ki, kj):
    b = flat2
    a_idx = b.modes[i]
    b_idx = ModeId("h", 1 + j % 2) if kj == "H" else b.modes[j]
    fwd = oracle.extract_constants(b, ki, a_idx, kj, b_idx)
    back = oracle.extract_constants(b, kj, b_idx, ki, a_idx)
    for kind in ("L", "phi", "H"):
        assert np.abs(fwd.block(kind) + back.block(kind)).max() <= 1e-12 * max(1.0, np.abs(fwd.block(kind)).max())
