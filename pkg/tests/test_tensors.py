import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vfalgebra.geometry import ModeId
from vfalgebra.tensors import (
    ZERO_THRESHOLD,
    SparseRank3,
    compute_d,
    compute_d_closed_form,
    compute_d_quadrature,
    compute_e,
    compute_g,
    compute_g_closed_form,
    compute_g_quadrature,
)


def _brute_torus_integral(fn, n=24):
    """Uniform-grid quadrature, exact for trig polynomials of degree < n."""
    x, y = np.meshgrid(np.arange(n) / n, np.arange(n) / n, indexing="ij")
    return float(np.mean(fn(x, y)))


def _mode(par, k1, k2):
    def f(x, y):
        arg = 2 * math.pi * (k1 * x + k2 * y)
        return math.sqrt(2) * (np.cos(arg) if par == "c" else np.sin(arg))

    def grad(x, y):
        arg = 2 * math.pi * (k1 * x + k2 * y)
        d = math.sqrt(2) * 2 * math.pi * (-np.sin(arg) if par == "c" else np.cos(arg))
        return d * k1, d * k2

    return f, grad


def test_g_spot_value(flat2):
    g = compute_g(flat2)
    a, _ = _mode("c", 1, 1)
    _, gb = _mode("c", 1, 0)
    _, gc = _mode("c", 0, 1)

    def integrand(x, y):
        b1, b2 = gb(x, y)
        c1, c2 = gc(x, y)
        return a(x, y) * (b1 * c2 - b2 * c1)

    oracle = _brute_torus_integral(integrand)
    assert oracle == pytest.approx(-2 * math.sqrt(2) * math.pi**2, abs=1e-10)
    assert g["c:1,1", "c:1,0", "c:0,1"] == pytest.approx(oracle, abs=1e-10)


def test_d_spot_values(flat4):
    d = compute_d(flat4)
    c10, _ = _mode("c", 1, 0)
    c20, _ = _mode("c", 2, 0)
    assert _brute_torus_integral(lambda x, y: c10(x, y) ** 2 * c20(x, y)) == pytest.approx(1 / math.sqrt(2), abs=1e-13)
    assert d["c:1,0", "c:1,0", "c:2,0"] == pytest.approx(1 / math.sqrt(2), abs=1e-13)
    assert d["c:1,0", "c:1,0", "c:1,0"] == 0.0


def test_e_spot_value_and_definition(flat4):
    d = compute_d(flat4)
    e = compute_e(flat4, d)
    assert e["c:1,0", "c:1,0", "c:2,0"] == pytest.approx(-3 / math.sqrt(2), abs=1e-12)
    mu = dict(zip(flat4.modes, flat4.eigenvalues))
    for (a, b, c), v in d.entries.items():
        assert mu[a] * e[a, b, c] == pytest.approx((mu[b] - mu[c]) * v, abs=1e-9)
    for a, b in itertools.product(flat4.modes, repeat=2):
        assert e[a, b, b] == 0.0


@pytest.mark.parametrize("name", ["flat4", "sphere4", "ctorus2"])
def test_g_antisymmetric_d_symmetric(request, name):
    basis = request.getfixturevalue(name)
    g = compute_g(basis)
    d = compute_d(basis)
    for perm in ((1, 0, 2), (0, 2, 1), (2, 1, 0)):
        assert g.permutation_violation(perm, -1)[0] <= 1e-10
        assert d.permutation_violation(perm, +1)[0] <= 1e-10
    for a, b in itertools.product(basis.modes, repeat=2):
        assert g[a, b, b] == 0.0


def test_closed_form_matches_quadrature(flat4):
    assert compute_g_closed_form(flat4).difference(compute_g_quadrature(flat4))[0] <= 1e-12
    assert compute_d_closed_form(flat4).difference(compute_d_quadrature(flat4))[0] <= 1e-12


def test_closed_form_entries_are_half_integer_multiples(flat4):
    unit = math.sqrt(2) * math.pi**2
    for v in compute_g(flat4).entries.values():
        assert 2 * v / unit == pytest.approx(round(2 * v / unit), abs=1e-12)


def test_torus_lattice_selection_rule(flat4):
    g = compute_g_quadrature(flat4)
    for a, b, c in g.entries:
        ka, kb, kc = (np.array(m.lattice) for m in (a, b, c))
        sums = [ka + sb * kb + sc * kc for sb, sc in itertools.product((1, -1), repeat=2)]
        assert any(not s.any() for s in sums), (a, b, c)


def test_sphere_selection_rule(sphere3):
    g = compute_g(sphere3)
    assert len(g) > 0
    for a, b, c in g.entries:
        la, lb, lc = a.i, b.i, c.i
        assert abs(lb - lc) <= la <= lb + lc
        # nonzero Poisson-bracket overlaps need an odd degree sum
        assert (la + lb + lc) % 2 == 1


def test_threshold_drops_small_entries():
    m = ModeId.parse("c:1,0")
    t = SparseRank3("g", {(m, m, m): 0.5 * ZERO_THRESHOLD})
    assert len(t) == 0
    with pytest.raises(ValueError):
        SparseRank3("nope")


def test_json_csv_round_trip(flat2):
    g = compute_g(flat2)
    back = SparseRank3.from_records("g", json.loads(g.to_json()))
    assert back.difference(g)[0] == 0.0
    rows = g.to_csv().splitlines()
    assert rows[0] == "i,j,k,v"
    assert len(rows) == len(g) + 1
    keys = [k for k, _ in g.sorted_items()]
    assert keys == sorted(keys, key=lambda k: tuple(m.sort_key() for m in k))


@settings(max_examples=30, deadline=None)
@given(st.dictionaries(st.tuples(st.integers(0, 3), st.integers(0, 3), st.integers(0, 3)),
                       st.floats(-1e3, 1e3, allow_nan=False), max_size=20))
def test_sparse_dense_round_trip(raw):
    keys = [ModeId("c", 1, j) for j in range(4)]
    entries = {(keys[a], keys[b], keys[c]): v for (a, b, c), v in raw.items()}
    t = SparseRank3("d", entries)
    dense = t.dense(keys, keys, keys)
    back = SparseRank3.from_dense("d", dense, keys, keys, keys)
    assert back.entries == t.entries
    assert all(abs(v) >= ZERO_THRESHOLD for v in t.entries.values())
