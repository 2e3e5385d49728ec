"""Sparse rank-3 tensors and the base families g, d, e.

    g_{abc} = int Y_a eps^{ij} d_i Y_b d_j Y_c  d^2phi
    d_{abc} = int Y_a Y_b Y_c rho d^2phi
    e_{abc} = (mu_b - mu_c) / mu_a * d_{abc}
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import _torus
from .geometry import Basis, ManifoldKind, ModeId

ZERO_THRESHOLD = 1e-12

MODE, HARMONIC = "mode", "harmonic"

FAMILY_SLOTS = {
    "g": (MODE, MODE, MODE),
    "d": (MODE, MODE, MODE),
    "e": (MODE, MODE, MODE),
    "e_anti": (MODE, MODE, MODE),
    "g_tilde": (MODE, MODE, MODE),
    "e_tilde": (MODE, MODE, MODE),
    "g_rr": (HARMONIC, HARMONIC, MODE),
    "g_ar": (MODE, HARMONIC, MODE),
    "k": (MODE, MODE, HARMONIC),
    "c": (MODE, MODE, HARMONIC),
    "c_tilde": (MODE, HARMONIC, MODE),
    "y": (MODE, HARMONIC, HARMONIC),
}


@dataclass
class SparseRank3:
    """Entries (i, j, k) -> value of one structure-constant family.

    Keys are ModeId triples; harmonic slots use ``ModeId("h", r)``.  Values
    with magnitude below ``threshold`` are never stored.  ``status`` carries
    an explanation when a family is empty by construction (genus 0).
    """

    family: str
    entries: dict = field(default_factory=dict)
    threshold: float = ZERO_THRESHOLD
    status: str = ""

    def __post_init__(self):
        if self.family not in FAMILY_SLOTS:
            raise ValueError(f"unknown tensor family {self.family!r}")
        self.entries = {k: float(v) for k, v in self.entries.items() if abs(v) >= self.threshold}

    @property
    def slots(self):
        return FAMILY_SLOTS[self.family]

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, key):
        key = tuple(ModeId.parse(k) if isinstance(k, str) else k for k in key)
        return self.entries.get(key, 0.0)

    def __iter__(self):
        return iter(self.sorted_items())

    def sorted_items(self):
        return sorted(self.entries.items(), key=lambda kv: tuple(m.sort_key() for m in kv[0]))

    def max_abs(self):
        return max((abs(v) for v in self.entries.values()), default=0.0)

    def permutation_violation(self, perm, sign):
        """Largest |T[perm(key)] - sign * T[key]| over stored keys and their images."""
        worst, where = 0.0, None
        keys = set(self.entries)
        keys |= {tuple(k[p] for p in perm) for k in self.entries}
        inv = [perm.index(i) for i in range(3)]
        for key in keys:
            image = tuple(key[p] for p in perm)
            err = abs(self.entries.get(image, 0.0) - sign * self.entries.get(key, 0.0))
            err = max(err, abs(self.entries.get(tuple(key[p] for p in inv), 0.0) - sign * self.entries.get(key, 0.0)))
            if err > worst:
                worst, where = err, key
        return worst, where

    def difference(self, other):
        """Largest entrywise |self - other| and the key where it occurs."""
        worst, where = 0.0, None
        for key in set(self.entries) | set(other.entries):
            err = abs(self.entries.get(key, 0.0) - other.entries.get(key, 0.0))
            if err > worst:
                worst, where = err, key
        return worst, where

    def records(self, with_family=False):
        out = []
        for (i, j, k), v in self.sorted_items():
            rec = {"i": i.label, "j": j.label, "k": k.label, "v": v}
            if with_family:
                rec = {"family": self.family, **rec}
            out.append(rec)
        return out

    def to_json(self, with_family=False):
        return json.dumps(self.records(with_family), indent=1)

    def to_csv(self, with_family=False):
        buf = io.StringIO()
        cols = (["family"] if with_family else []) + ["i", "j", "k", "v"]
        writer = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        writer.writeheader()
        for rec in self.records(with_family):
            writer.writerow({**rec, "v": repr(rec["v"])})
        return buf.getvalue()

    @classmethod
    def from_records(cls, family, records, threshold=ZERO_THRESHOLD):
        entries = {}
        for rec in records:
            key = tuple(ModeId.parse(rec[c]) for c in ("i", "j", "k"))
            entries[key] = float(rec["v"])
        return cls(family, entries, threshold)

    @classmethod
    def from_dense(cls, family, array, keys_i, keys_j, keys_k, threshold=ZERO_THRESHOLD):
        entries = {}
        for a, b, c in zip(*np.nonzero(np.abs(array) >= threshold)):
            entries[(keys_i[a], keys_j[b], keys_k[c])] = array[a, b, c]
        return cls(family, entries, threshold)

    def dense(self, keys_i, keys_j, keys_k):
        pos = [{k: n for n, k in enumerate(keys)} for keys in (keys_i, keys_j, keys_k)]
        out = np.zeros((len(keys_i), len(keys_j), len(keys_k)))
        for (i, j, k), v in self.entries.items():
            out[pos[0][i], pos[1][j], pos[2][k]] = v
        return out


def harmonic_ids(basis):
    return [ModeId("h", h.index) for h in basis.harmonic_fields]


# --- torus closed forms -------------------------------------------------

def _exponentials(mode):
    s = 1.0 / math.sqrt(2.0)
    if mode.family == "c":
        return ((1, s), (-1, s))
    return ((1, -1j * s), (-1, 1j * s))


def _closed_form_candidates(basis):
    """Admissible triples on the flat torus: s_a k_a + s_b k_b + s_c k_c = 0."""
    by_vector = {}
    for m in basis.modes:
        by_vector.setdefault(m.lattice, []).append(m)
    for b, c in itertools.product(basis.modes, repeat=2):
        targets = set()
        for sb, sc in ((1, 1), (1, -1)):
            k = (sb * b.i + sc * c.i, sb * b.j + sc * c.j)
            targets.add(_torus.canonical(k))
        for t in targets:
            for a in by_vector.get(t, ()):
                yield a, b, c


def _closed_form(basis, weight):
    entries = {}
    for a, b, c in _closed_form_candidates(basis):
        total = 0j
        for (sa, ca), (sb, cb), (sc, cc) in itertools.product(_exponentials(a), _exponentials(b), _exponentials(c)):
            if sa * a.i + sb * b.i + sc * c.i == 0 and sa * a.j + sb * b.j + sc * c.j == 0:
                total += ca * cb * cc * weight(sb, b, sc, c)
        entries[(a, b, c)] = total.real
    return entries


def compute_g_closed_form(basis: Basis) -> SparseRank3:
    if basis.spec.kind is not ManifoldKind.FLAT_TORUS:
        raise ValueError("closed-form g exists only on the flat torus")

    def weight(sb, b, sc, c):
        # (2 pi i)^2 s_b s_c (k_b x k_c)
        return -(_torus.TWO_PI**2) * sb * sc * (b.i * c.j - b.j * c.i)

    return SparseRank3("g", _closed_form(basis, weight))


def compute_d_closed_form(basis: Basis) -> SparseRank3:
    if basis.spec.kind is not ManifoldKind.FLAT_TORUS:
        raise ValueError("closed-form d exists only on the flat torus")
    return SparseRank3("d", _closed_form(basis, lambda *_: 1.0))


# --- quadrature ---------------------------------------------------------

def _weighted_values(basis):
    return basis.values * basis.grid.measure


def compute_g_quadrature(basis: Basis) -> SparseRank3:
    calc = basis.calculus
    G = basis.gradients
    pb = calc.cross(G[:, None], G[None, :])  # {Y_b, Y_c} on the grid
    dense = np.einsum("akl,bckl->abc", _weighted_values(basis), pb, optimize=True)
    m = list(basis.modes)
    return SparseRank3.from_dense("g", dense, m, m, m)


def compute_d_quadrature(basis: Basis) -> SparseRank3:
    V = basis.values
    dense = np.einsum("akl,bkl,ckl->abc", _weighted_values(basis), V, V, optimize=True)
    m = list(basis.modes)
    return SparseRank3.from_dense("d", dense, m, m, m)


def compute_g(basis: Basis, method="auto") -> SparseRank3:
    """Totally antisymmetric g; closed form on the flat torus unless told otherwise."""
    if method == "closed" or (method == "auto" and basis.spec.kind is ManifoldKind.FLAT_TORUS):
        return compute_g_closed_form(basis)
    return compute_g_quadrature(basis)


def compute_d(basis: Basis, method="auto") -> SparseRank3:
    if method == "closed" or (method == "auto" and basis.spec.kind is ManifoldKind.FLAT_TORUS):
        return compute_d_closed_form(basis)
    return compute_d_quadrature(basis)


def compute_e(basis: Basis, d: SparseRank3) -> SparseRank3:
    mu = dict(zip(basis.modes, basis.eigenvalues))
    entries = {(a, b, c): (mu[b] - mu[c]) / mu[a] * v for (a, b, c), v in d.entries.items()}
    return SparseRank3("e", entries)
