"""Verification suites: symmetry classes, Jacobi, formula-vs-oracle, projector."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import oracle
from .geometry import Basis, ManifoldKind, ModeId
from .tensors import ZERO_THRESHOLD
from .theorems import BracketTable, assemble_bracket_table, compute_e_tilde_direct

DEFAULT_TOLERANCE = {
    ManifoldKind.FLAT_TORUS: 1e-10,
    ManifoldKind.ROUND_SPHERE: 1e-8,
    ManifoldKind.CONFORMAL_TORUS: 1e-7,
}
JACOBI_TOLERANCE = 1e-9


@dataclass
class CheckRecord:
    identifier: str
    max_abs_error: float
    passed: bool
    detail: str = ""


@dataclass
class VerificationReport:
    suite: str
    manifold: str
    band: int
    tolerance: float
    records: list = field(default_factory=list)
    status: str = ""

    @property
    def passed(self):
        return all(r.passed for r in self.records)

    def add(self, identifier, error, tol=None, detail=""):
        tol = self.tolerance if tol is None else tol
        error = float(error)
        rec = CheckRecord(identifier, error, bool(error <= tol), detail)
        self.records.append(rec)
        return rec

    def to_dict(self):
        return {
            "suite": self.suite,
            "manifold": self.manifold,
            "band": self.band,
            "tolerance": self.tolerance,
            "status": self.status,
            "passed": self.passed,
            "records": [asdict(r) for r in self.records],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=1)

    def to_text(self):
        lines = [f"suite {self.suite} on {self.manifold} (band {self.band}, tol {self.tolerance:g})"]
        if self.status:
            lines.append(f"  status: {self.status}")
        for r in self.records:
            flag = "PASS" if r.passed else "FAIL"
            extra = f"  {r.detail}" if r.detail else ""
            lines.append(f"  [{flag}] {r.identifier}: max error {r.max_abs_error:.3e}{extra}")
        lines.append(f"  overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def _report(suite, basis, tol):
    tol = DEFAULT_TOLERANCE[basis.spec.kind] if tol is None else tol
    return VerificationReport(suite, basis.spec.kind.value, basis.spec.band, tol)


def _fmt_key(key):
    return "(" + ", ".join(m.label for m in key) + ")" if key else "-"


# (family, permutation, sign, description)
SYMMETRY_CLASSES = [
    ("g", (1, 0, 2), -1, "antisymmetric in slots 1,2"),
    ("g", (0, 2, 1), -1, "antisymmetric in slots 2,3"),
    ("d", (1, 0, 2), +1, "symmetric in slots 1,2"),
    ("d", (0, 2, 1), +1, "symmetric in slots 2,3"),
    ("e", (0, 2, 1), -1, "antisymmetric in last two"),
    ("g_tilde", (1, 0, 2), -1, "antisymmetric in first two"),
    ("k", (1, 0, 2), -1, "antisymmetric in first two"),
    ("y", (0, 2, 1), +1, "symmetric in (r, r')"),
    ("g_rr", (1, 0, 2), -1, "antisymmetric in (r, r')"),
    ("g_ar", (2, 1, 0), -1, "antisymmetric in (alpha, epsilon)"),
]


def check_symmetries(table: BracketTable, tol=None, two_route=True) -> VerificationReport:
    """Symmetry class of every family, plus the two routes to e_tilde."""
    report = _report("symmetry", table.basis, tol)
    for family, perm, sign, what in SYMMETRY_CLASSES:
        tensor = table.family(family)
        err, where = tensor.permutation_violation(perm, sign)
        detail = f"{len(tensor)} entries" if not tensor.entries else f"worst at {_fmt_key(where)}"
        if tensor.status:
            detail = f"empty: {tensor.status}"
        report.add(f"{family} {what}", err, detail=detail)
    if two_route:
        direct = compute_e_tilde_direct(table.basis)
        err, where = table.e_tilde.difference(direct)
        report.add("e_tilde formula vs gradient-overlap integral", err, detail=f"worst at {_fmt_key(where)}")
    return report


# --- formula vs oracle --------------------------------------------------

BLOCK_FAMILY = {
    ("phi", "phi"): {"phi": "g", "L": None, "H": None},
    ("H", "H"): {"phi": "g_rr", "L": None, "H": None},
    ("phi", "H"): {"phi": "g_ar", "L": None, "H": None},
    ("L", "L"): {"L": "e_anti", "phi": "g_tilde", "H": "k"},
    ("L", "phi"): {"L": "g", "phi": "e_tilde", "H": "c"},
    ("L", "H"): {"L": "g_ar", "phi": "c_tilde", "H": "y"},
}
_KIND_ORDER = {"L": 0, "phi": 1, "H": 2}


def _block_name(pair, out_kind):
    fam = BLOCK_FAMILY[pair][out_kind]
    rel = f"[{pair[0]},{pair[1]}] {out_kind}-part"
    return f"{fam} ({rel})" if fam else f"zero ({rel})"


def _targets(basis, kind):
    if kind == "H":
        return [ModeId("h", h.index) for h in basis.harmonic_fields]
    return list(basis.modes)


def cross_validate(
    basis: Basis, table: BracketTable | None = None, tol=None, antisymmetry_samples=24, dump=None
) -> VerificationReport:
    """Compare every block of every generator pair against the oracle.

    If ``dump`` is a list, one record per nonzero (pair, block, index) is
    appended to it with the formula value, oracle value and their difference.
    """
    report = _report("cross", basis, tol)
    table = table or assemble_bracket_table(basis)
    gens = oracle.generators(basis)
    worst = {}
    largest = {}
    computed = {}
    for x, y in itertools.combinations_with_replacement(gens, 2):
        if _KIND_ORDER[x[0]] > _KIND_ORDER[y[0]]:
            x, y = y, x
        try:
            got = oracle.extract_constants(basis, *x, *y)
        except oracle.BandOverflowError as exc:
            report.add(f"bracket {x[0]}:{x[1]} , {y[0]}:{y[1]}", math.inf, detail=f"band overflow: {exc}")
            continue
        computed[(x, y)] = got
        predicted = table.bracket(x, y)
        pair = (x[0], y[0])
        for out_kind in ("L", "phi", "H"):
            name = _block_name(pair, out_kind)
            values = got.block(out_kind)
            for n, t in enumerate(_targets(basis, out_kind)):
                ref = predicted.get((out_kind, t), 0.0)
                err = abs(values[n] - ref)
                if dump is not None and max(abs(values[n]), abs(ref)) >= ZERO_THRESHOLD:
                    dump.append({
                        "pair": [f"{x[0]}:{x[1].label}", f"{y[0]}:{y[1].label}"],
                        "block": out_kind,
                        "index": t.label,
                        "formula_value": float(ref),
                        "oracle_value": float(values[n]),
                        "abs_error": float(err),
                    })
                largest[name] = max(largest.get(name, 0.0), abs(ref))
                if err >= worst.get(name, (-1.0,))[0]:
                    worst[name] = (err, (x, y, t))
    for name in sorted(worst):
        err, (x, y, t) = worst[name]
        report.add(name, err, detail=f"max |formula| {largest[name]:.3e}; worst [{x[0]} {x[1]}, {y[0]} {y[1]}] -> {t}")

    # bracket antisymmetry on a deterministic sample of pairs
    pairs = [p for p in computed if p[0] != p[1]]
    step = max(1, len(pairs) // antisymmetry_samples)
    sample = pairs[::step][:antisymmetry_samples]
    err = 0.0
    for x, y in sample:
        swapped = oracle.extract_constants(basis, *y, *x)
        fwd = computed[(x, y)]
        for kind in ("L", "phi", "H"):
            a, b = fwd.block(kind), swapped.block(kind)
            if a.size:
                err = max(err, float(np.abs(a + b).max()))
    report.add(f"swap antisymmetry over {len(sample)} pairs", err)
    return report


# --- Jacobi -------------------------------------------------------------

def _lattice(gen):
    kind, mode = gen
    return (0, 0) if kind == "H" else (mode.i, mode.j)


def admissible(basis: Basis, x, y, z) -> bool:
    """Conservative closure test: every iterated bracket stays inside the band."""
    kind = basis.spec.kind
    if kind is ManifoldKind.FLAT_TORUS:
        a, b, c = (_lattice(g) for g in (x, y, z))
        for sb, sc in itertools.product((1, -1), repeat=2):
            k = (a[0] + sb * b[0] + sc * c[0], a[1] + sb * b[1] + sc * c[1])
            if k[0] ** 2 + k[1] ** 2 > basis.spec.band:
                return False
        return True
    if kind is ManifoldKind.ROUND_SPHERE:
        return sum(g[1].i for g in (x, y, z)) <= basis.spec.band
    return False


def _field_residual(terms):
    total = terms[0] + terms[1] + terms[2]
    scale = max(1.0, max(float(np.abs(t).max()) for t in terms))
    return float(np.abs(total).max()) / scale


def _contract(table, x, inner):
    out = {}
    for w, cw in inner.items():
        for v, cv in table.bracket(x, w).items():
            out[v] = out.get(v, 0.0) + cw * cv
    return out


def jacobi_residuals(basis, table, x, y, z, cache=None):
    """Relative cyclic-sum residuals (oracle fields, structure-constant contraction)."""
    cache = {} if cache is None else cache

    def field(g):
        if g not in cache:
            cache[g] = oracle.generator_field(basis, *g)
        return cache[g]

    def bracket(p, q):
        key = (p, q)
        if key not in cache:
            cache[key] = oracle.lie_bracket(field(p), field(q))
        return cache[key]

    terms = [
        oracle.lie_bracket(field(x), bracket(y, z)).components,
        oracle.lie_bracket(field(y), bracket(z, x)).components,
        oracle.lie_bracket(field(z), bracket(x, y)).components,
    ]
    r_field = _field_residual(terms)

    parts = [
        _contract(table, x, table.bracket(y, z)),
        _contract(table, y, table.bracket(z, x)),
        _contract(table, z, table.bracket(x, y)),
    ]
    keys = set().union(*parts)
    if not keys:
        return r_field, 0.0
    total = max(abs(sum(p.get(k, 0.0) for p in parts)) for k in keys)
    scale = max(1.0, max(abs(v) for p in parts for v in p.values()))
    return r_field, total / scale


def jacobi_closed_triples(basis: Basis, table: BracketTable | None = None, tol=JACOBI_TOLERANCE) -> VerificationReport:
    """Jacobi identity on every truncation-closed triple of distinct generators."""
    report = VerificationReport("jacobi", basis.spec.kind.value, basis.spec.band, tol)
    gens = oracle.generators(basis)
    triples = [t for t in itertools.combinations(gens, 3) if admissible(basis, *t)]
    if not triples:
        report.status = "no admissible triple at this band"
        return report
    table = table or assemble_bracket_table(basis)
    cache = {}
    worst_f, worst_c = (0.0, None), (0.0, None)
    for t in triples:
        rf, rc = jacobi_residuals(basis, table, *t, cache=cache)
        if rf >= worst_f[0]:
            worst_f = (rf, t)
        if rc >= worst_c[0]:
            worst_c = (rc, t)

    def show(t):
        return ", ".join(f"{k} {m}" for k, m in t) if t else "-"

    report.status = f"{len(triples)} admissible triples"
    report.add("cyclic sum via oracle brackets (relative)", worst_f[0], detail=f"worst ({show(worst_f[1])})")
    report.add("cyclic sum via structure constants (relative)", worst_c[0], detail=f"worst ({show(worst_c[1])})")
    return report


# --- projector ----------------------------------------------------------

def random_band_limited_field(basis: Basis, rng) -> oracle.SpectralVectorField:
    """Random field whose Hodge parts lie inside the basis band.

    Tori: random trigonometric components over the band's lattice vectors
    plus a constant.  Sphere: tangential part of a random ambient field whose
    Cartesian components are harmonics of degree < band.
    """
    calc = basis.calculus
    if basis.spec.kind is ManifoldKind.FLAT_TORUS:
        comps = rng.normal(size=(2, 1, 1)) * np.ones((2,) + basis.grid.shape)
        for n in range(len(basis)):
            comps = comps + rng.normal(size=(2, 1, 1)) * basis.values[n]
        return oracle.SpectralVectorField(basis, comps)
    if basis.spec.kind is ManifoldKind.ROUND_SPHERE:
        lower = [n for n, m in enumerate(basis.modes) if m.i < basis.spec.band]
        amb = rng.normal(size=(3, 1, 1)) * np.ones((3,) + basis.grid.shape)
        for n in lower:
            amb = amb + rng.normal(size=(3, 1, 1)) * basis.values[n]
        r_hat = calc.r_hat
        tangent = amb - r_hat * np.sum(amb * r_hat, axis=0)
        return oracle.SpectralVectorField(basis, tangent, degree=basis.spec.band + 1)
    raise ValueError("random band-limited fields need a closed-form geometry")


def projector_suite(basis: Basis, n_random=100, seed=0, tol=1e-10) -> VerificationReport:
    """Idempotence, gradient annihilation and completeness of the Hodge split."""
    report = VerificationReport("projector", basis.spec.kind.value, basis.spec.band, tol)
    if basis.spec.kind is ManifoldKind.CONFORMAL_TORUS:
        report.status = "skipped: the truncated conformal eigenbasis is not closed under band-limited fields"
        return report
    calc = basis.calculus
    rng = np.random.default_rng(seed)
    idem = recon = div_err = 0.0
    for _ in range(n_random):
        X = random_band_limited_field(basis, rng)
        parts = oracle.hodge_decompose(X, strict=False)
        recon = max(recon, parts.residual)
        P = oracle.apply_projector(X, strict=False)
        PP = oracle.apply_projector(P, strict=False)
        idem = max(idem, float(np.abs(PP.components - P.components).max()) / max(1.0, P.max_abs()))
        div_in = float(np.abs(calc.div(X.components)).max())
        div_err = max(div_err, float(np.abs(calc.div(P.components)).max()) / max(1.0, div_in))
    report.add(f"completeness: relative reconstruction residual over {n_random} random fields", recon)
    report.add("idempotence P(P(X)) = P(X) (relative)", idem)
    report.add("projector output is divergence free (relative)", div_err)
    annihilate = 0.0
    for mode in basis.modes:
        L = oracle.generator_field(basis, "L", mode)
        annihilate = max(annihilate, oracle.apply_projector(L).max_abs() / L.max_abs())
    report.add("gradient generators are annihilated (relative)", annihilate)
    return report


SUITES = {
    "symmetry": lambda basis, table, tol: check_symmetries(table, tol),
    "cross": lambda basis, table, tol: cross_validate(basis, table, tol),
    "jacobi": lambda basis, table, tol: jacobi_closed_triples(basis, table, JACOBI_TOLERANCE if tol is None else tol),
    "projector": lambda basis, table, tol: projector_suite(basis, tol=1e-10 if tol is None else tol),
}
