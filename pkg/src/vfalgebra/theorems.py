"""Explicit structure constants of the (L, phi, H) generator basis.

The six bracket relations assembled here are

    [phi_a, phi_b] = g_{abe} phi_e
    [H_r,  H_s]    = g_{rse} phi_e
    [phi_a, H_r]   = g_{are} phi_e
    [L_a,  L_b]    = e_{[a,b]e} L_e + gt_{abe} phi_e + k_{abr} H_r
    [L_a,  phi_b]  = g_{abe} L_e + et_{abe} phi_e + c_{abr} H_r
    [L_a,  H_r]    = g_{are} L_e + ct_{are} phi_e + y_{ars} H_s

with e_{[a,b]e} = (e_{abe} - e_{bae}) / 2.  All integrals are rho-weighted.
Harmonic-indexed families are empty (with a status note) on the sphere.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .geometry import Basis, ModeId
from .tensors import SparseRank3, compute_d, compute_e, compute_g, harmonic_ids

log = logging.getLogger(__name__)

ABSENT = "absent on genus-0 surface: no harmonic fields"


def _mu(basis):
    return dict(zip(basis.modes, basis.eigenvalues))


def _harmonic_samples(basis):
    return np.stack([h.samples for h in basis.harmonic_fields])


def _absent(family):
    log.warning("%s requested on a genus-0 surface; returning an empty tensor", family)
    return SparseRank3(family, status=ABSENT)


def compute_g_rr(basis: Basis) -> SparseRank3:
    """g_{r r' e} = int eps_hat(h_r, h_r') Y_e."""
    if basis.genus == 0:
        return _absent("g_rr")
    calc = basis.calculus
    H = _harmonic_samples(basis)
    area = calc.cross(H[:, None], H[None, :])
    dense = np.einsum("rskl,ekl->rse", area, basis.values * basis.grid.measure)
    h = harmonic_ids(basis)
    return SparseRank3.from_dense("g_rr", dense, h, h, list(basis.modes))


def compute_g_alpha_r(basis: Basis) -> SparseRank3:
    """g_{a r e} = int Y_a h_r^i d_i Y_e; antisymmetric in (a, e)."""
    if basis.genus == 0:
        return _absent("g_ar")
    calc = basis.calculus
    H = _harmonic_samples(basis)
    deriv = calc.dot(H[:, None], basis.gradients[None, :])  # h_r(Y_e)
    dense = np.einsum("akl,rekl->are", basis.values * basis.grid.measure, deriv)
    m = list(basis.modes)
    return SparseRank3.from_dense("g_ar", dense, m, harmonic_ids(basis), m)


def compute_g_tilde(basis: Basis, g: SparseRank3) -> SparseRank3:
    mu = _mu(basis)
    entries = {}
    for (a, b, e), v in g.entries.items():
        entries[(a, b, e)] = (mu[e] - mu[a] - mu[b]) / (mu[a] * mu[b] * mu[e]) * v
    return SparseRank3("g_tilde", entries)


def compute_k(basis: Basis, g_alpha_r: SparseRank3) -> SparseRank3:
    """k keyed (a, a', r): the H_r coefficient of [L_a, L_a'].

    Written k_{a e r} = (1/mu_a + 1/mu_e) g_{a r e}, i.e. the second slot is
    the second L index.
    """
    if basis.genus == 0:
        return _absent("k")
    mu = _mu(basis)
    entries = {(a, e, r): (1.0 / mu[a] + 1.0 / mu[e]) * v for (a, r, e), v in g_alpha_r.entries.items()}
    return SparseRank3("k", entries)


def compute_e_anti(basis: Basis, e: SparseRank3) -> SparseRank3:
    """e_{[a,b]c} = (e_{abc} - e_{bac}) / 2, the L-part of [L_a, L_b]."""
    keys = set(e.entries) | {(b, a, c) for a, b, c in e.entries}
    entries = {(a, b, c): 0.5 * (e[a, b, c] - e[b, a, c]) for a, b, c in keys}
    return SparseRank3("e_anti", entries)


def compute_e_tilde(basis: Basis, d: SparseRank3, e: SparseRank3) -> SparseRank3:
    """et_{a a' e} = d_{a a' e} + (e_{a a' e} - e_{e a a'}) / 2."""
    keys = set(d.entries) | set(e.entries) | {(b, c, a) for a, b, c in e.entries}
    entries = {(a, b, c): d[a, b, c] + 0.5 * (e[a, b, c] - e[c, a, b]) for a, b, c in keys}
    return SparseRank3("e_tilde", entries)


def compute_e_tilde_direct(basis: Basis) -> SparseRank3:
    """Same family from two gradient-overlap integrals, no d or e involved.

    et_{a a' e} = (1/mu_a) int <grad Y_a, grad Y_a'> Y_e
                + (1/mu_e) int <grad Y_e, grad Y_a'> Y_a
    """
    calc = basis.calculus
    G = basis.gradients
    W = basis.values * basis.grid.measure
    overlap = np.einsum("xbkl,ckl->xbc", calc.dot(G[:, None], G[None, :]), W, optimize=True)  # [x, b, c]
    inv_mu = 1.0 / basis.eigenvalues
    first = inv_mu[:, None, None] * overlap  # (a, a', e) = overlap[a, a', e]
    second = inv_mu[None, None, :] * np.transpose(overlap, (2, 1, 0))  # overlap[e, a', a]
    m = list(basis.modes)
    return SparseRank3.from_dense("e_tilde", first + second, m, m, m)


def compute_c(basis: Basis) -> SparseRank3:
    """c_{a a' r} = int Y_a eps_hat^{ij} d_i Y_a' h_{r j}."""
    if basis.genus == 0:
        return _absent("c")
    calc = basis.calculus
    H = _harmonic_samples(basis)
    area = calc.cross(basis.gradients[:, None], H[None, :])  # (a', r)
    dense = np.einsum("akl,brkl->abr", basis.values * basis.grid.measure, area)
    m = list(basis.modes)
    return SparseRank3.from_dense("c", dense, m, m, harmonic_ids(basis))


def compute_c_tilde(basis: Basis, c: SparseRank3) -> SparseRank3:
    """ct_{a r e} = (1/mu_a - 1/mu_e) c_{e a r}."""
    if basis.genus == 0:
        return _absent("c_tilde")
    mu = _mu(basis)
    entries = {(a, r, e): (1.0 / mu[a] - 1.0 / mu[e]) * v for (e, a, r), v in c.entries.items()}
    return SparseRank3("c_tilde", entries)


def compute_y(basis: Basis) -> SparseRank3:
    """y_{a r r'} = int Y_a <h_r, h_r'>."""
    if basis.genus == 0:
        return _absent("y")
    calc = basis.calculus
    H = _harmonic_samples(basis)
    inner = calc.dot(H[:, None], H[None, :])
    dense = np.einsum("akl,rskl->ars", basis.values * basis.grid.measure, inner)
    h = harmonic_ids(basis)
    return SparseRank3.from_dense("y", dense, list(basis.modes), h, h)


@dataclass
class BracketTable:
    """Every tensor of the six relations, indexed against one Basis."""

    basis: Basis
    g: SparseRank3
    d: SparseRank3
    e: SparseRank3
    e_anti: SparseRank3
    g_tilde: SparseRank3
    e_tilde: SparseRank3
    g_rr: SparseRank3
    g_ar: SparseRank3
    k: SparseRank3
    c: SparseRank3
    c_tilde: SparseRank3
    y: SparseRank3

    FAMILIES = ("g", "d", "e", "e_anti", "g_tilde", "e_tilde", "g_rr", "g_ar", "k", "c", "c_tilde", "y")

    def family(self, name):
        return getattr(self, name)

    @property
    def relations(self):
        """Per relation, the constituent tensors in (L, phi, H) coefficient order."""
        return {
            "[phi,phi]": {"phi": self.g},
            "[H,H]": {"phi": self.g_rr},
            "[phi,H]": {"phi": self.g_ar},
            "[L,L]": {"L": self.e_anti, "phi": self.g_tilde, "H": self.k},
            "[L,phi]": {"L": self.g, "phi": self.e_tilde, "H": self.c},
            "[L,H]": {"L": self.g_ar, "phi": self.c_tilde, "H": self.y},
        }

    def bracket(self, x, y):
        """Coefficients of [x, y] for generators given as (kind, ModeId).

        Returns a dict (kind, ModeId) -> value; antisymmetry supplies the
        reversed orderings.
        """
        index = self._bracket_index()
        if (x, y) in index:
            return dict(index[(x, y)])
        if (y, x) in index:
            return {k: -v for k, v in index[(y, x)].items()}
        return {}

    def _bracket_index(self):
        try:
            return self._index
        except AttributeError:
            pass
        kinds = {
            "[phi,phi]": ("phi", "phi"),
            "[H,H]": ("H", "H"),
            "[phi,H]": ("phi", "H"),
            "[L,L]": ("L", "L"),
            "[L,phi]": ("L", "phi"),
            "[L,H]": ("L", "H"),
        }
        index = {}
        for rel, parts in self.relations.items():
            ka, kb = kinds[rel]
            for out_kind, tensor in parts.items():
                for (a, b, t), v in tensor.entries.items():
                    slot = index.setdefault(((ka, a), (kb, b)), {})
                    slot[(out_kind, t)] = slot.get((out_kind, t), 0.0) + v
        self._index = index
        return index


def assemble_bracket_table(basis: Basis) -> BracketTable:
    g = compute_g(basis)
    d = compute_d(basis)
    e = compute_e(basis, d)
    g_ar = compute_g_alpha_r(basis)
    c = compute_c(basis)
    return BracketTable(
        basis=basis,
        g=g,
        d=d,
        e=e,
        e_anti=compute_e_anti(basis, e),
        g_tilde=compute_g_tilde(basis, g),
        e_tilde=compute_e_tilde(basis, d, e),
        g_rr=compute_g_rr(basis),
        g_ar=g_ar,
        k=compute_k(basis, g_ar),
        c=c,
        c_tilde=compute_c_tilde(basis, c),
        y=compute_y(basis),
    )


FAMILY_FUNCTIONS = {
    "g": lambda b: compute_g(b),
    "d": lambda b: compute_d(b),
    "e": lambda b: compute_e(b, compute_d(b)),
    "e_anti": lambda b: compute_e_anti(b, compute_e(b, compute_d(b))),
    "g_tilde": lambda b: compute_g_tilde(b, compute_g(b)),
    "e_tilde": lambda b: compute_e_tilde(b, compute_d(b), compute_e(b, compute_d(b))),
    "g_rr": compute_g_rr,
    "g_ar": compute_g_alpha_r,
    "k": lambda b: compute_k(b, compute_g_alpha_r(b)) if b.genus else _absent("k"),
    "c": compute_c,
    "c_tilde": lambda b: compute_c_tilde(b, compute_c(b)) if b.genus else _absent("c_tilde"),
    "y": compute_y,
}


def compute_family(basis: Basis, name: str) -> SparseRank3:
    try:
        fn = FAMILY_FUNCTIONS[name]
    except KeyError:
        raise ValueError(f"unknown family {name!r}; choose from {sorted(FAMILY_FUNCTIONS)}") from None
    return fn(basis)


def generator(kind, mode):
    """Normalize a generator reference to (kind, ModeId)."""
    if kind not in ("L", "phi", "H"):
        raise ValueError(f"unknown generator kind {kind!r}")
    if isinstance(mode, int):
        mode = ModeId("h", mode)
    elif isinstance(mode, str):
        mode = ModeId.parse(mode)
    return kind, mode
