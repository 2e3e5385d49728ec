import dataclasses
import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from vfalgebra.geometry import ManifoldSpec, ModeId, build_basis
from vfalgebra.tensors import SparseRank3
from vfalgebra.theorems import assemble_bracket_table
from vfalgebra import verify


def test_symmetry_suite_flat(table_flat2):
    report = verify.check_symmetries(table_flat2)
    assert report.passed
    assert all(r.max_abs_error <= 1e-10 for r in report.records)
    assert report.tolerance == 1e-10


def test_symmetry_negative_control(table_flat2):
    g = dict(table_flat2.g.entries)
    (a, b, c), v = sorted(g.items(), key=lambda kv: tuple(m.sort_key() for m in kv[0]))[0]
    g[(b, a, c)] = v  # transpose one entry without the sign flip
    bad = dataclasses.replace(table_flat2, g=SparseRank3("g", g))
    report = verify.check_symmetries(bad, two_route=False)
    assert not report.passed
    failed = [r for r in report.records if not r.passed]
    assert failed[0].identifier.startswith("g ")
    assert any(a.label in r.detail and b.label in r.detail for r in failed)
    assert "FAIL" in report.to_text()


def test_symmetry_sphere_harmonic_checks_vacuous(table_sphere3):
    report = verify.check_symmetries(table_sphere3)
    assert report.passed
    for fam in ("k", "y", "g_rr", "g_ar"):
        rec = next(r for r in report.records if r.identifier.startswith(fam + " "))
        assert rec.max_abs_error == 0.0 and "empty" in rec.detail


def _gen(kind, label):
    return kind, (ModeId("h", label) if kind == "H" else ModeId.parse(label))


def test_jacobi_named_triples():
    basis = build_basis(ManifoldSpec("torus", 8))
    table = assemble_bracket_table(basis)
    for triple in (
        [("phi", "c:1,0"), ("phi", "c:0,1"), ("phi", "c:1,1")],
        [("L", "c:1,0"), ("phi", "c:0,1"), ("H", 1)],
    ):
        gens = [_gen(*t) for t in triple]
        assert verify.admissible(basis, *gens)
        rf, rc = verify.jacobi_residuals(basis, table, *gens)
        assert rf <= 1e-9 and rc <= 1e-9
    x, y = _gen("L", "s:1,1"), _gen("phi", "c:1,0")
    rf, rc = verify.jacobi_residuals(basis, table, x, x, y)
    assert rf <= 1e-14 and rc <= 1e-14


def test_jacobi_no_admissible_triple():
    report = verify.jacobi_closed_triples(build_basis(ManifoldSpec("sphere", 1)))
    assert report.passed and report.records == []
    assert "no admissible triple" in report.status


def test_jacobi_conformal_has_no_closure_predicate(ctorus2):
    report = verify.jacobi_closed_triples(ctorus2)
    assert "no admissible triple" in report.status


def test_admissibility_is_conservative(flat2):
    g = [_gen("phi", "c:1,0"), _gen("phi", "c:0,1"), _gen("phi", "c:1,1")]
    # (1,0)+(0,1)+(1,1) = (2,2) leaves |k|^2 <= 2
    assert not verify.admissible(flat2, *g)


def test_cross_validate_flat(flat2, table_flat2):
    report = verify.cross_validate(flat2, table_flat2)
    assert report.passed
    swap = [r for r in report.records if r.identifier.startswith("swap")]
    assert len(swap) == 1 and int(swap[0].identifier.split()[3]) >= 20


def test_cross_validate_dump(flat2, table_flat2):
    dump = []
    verify.cross_validate(flat2, table_flat2, dump=dump)
    assert dump and set(dump[0]) == {"pair", "block", "index", "formula_value", "oracle_value", "abs_error"}
    spot = [d for d in dump if d["pair"] == ["phi:c:1,0", "phi:c:1,1"] and d["index"] == "c:0,1" and d["block"] == "phi"]
    assert spot and spot[0]["formula_value"] == pytest.approx(2 * math.sqrt(2) * math.pi**2)


def test_cross_validate_reports_overflow():
    basis = build_basis(ManifoldSpec("torus", 4, grid_size=8))
    report = verify.cross_validate(basis)
    assert not report.passed
    assert any("band overflow" in r.detail for r in report.records)


def test_projector_suite_flat(flat2):
    report = verify.projector_suite(flat2, n_random=20)
    assert report.passed and len(report.records) == 4


def test_report_serialization(table_flat2):
    report = verify.check_symmetries(table_flat2)
    data = json.loads(report.to_json())
    assert data["suite"] == "symmetry" and data["manifold"] == "torus" and data["band"] == 2
    assert data["passed"] is True and len(data["records"]) == len(report.records)


@given(st.lists(st.tuples(st.floats(0, 1e-9), st.floats(1e-12, 1e-9)), max_size=10))
def test_global_pass_iff_all_records_pass(errors):
    report = verify.VerificationReport("x", "torus", 1, 1.0)
    for err, tol in errors:
        report.add("check", err, tol=tol)
    assert report.passed == all(err <= tol for err, tol in errors)
