"""The electromagnetic connection, its derivatives, and torsion.

Every component of the connection is ``kappa * coefficient * field`` for
one field symbol out of ``(Ex, Ey, Ez, Bx, By, Bz)``. The placement tables
below list ``(i, j, k, symbol, coefficient)`` in the order the rows are
printed, three columns per printed row.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from decimal import Decimal, localcontext

import numpy as np

from .fields import LEVI_CIVITA, FieldModel, FieldSample, ParticleParams

with localcontext() as _ctx:
    _ctx.prec = 40
    SQRT_5_6 = float((Decimal(5) / Decimal(6)).sqrt())

SYMBOLS = ("Ex", "Ey", "Ez", "Bx", "By", "Bz")
_SYM = {s: n for n, s in enumerate(SYMBOLS)}

_I = 1j * SQRT_5_6

_E_LORENTZ = [
    (1, 0, 0, "Ex", -1), (2, 0, 0, "Ey", -1), (3, 0, 0, "Ez", -1),
]
_B_STANDARD = [
    (2, 3, 0, "Bx", -1), (3, 1, 0, "By", -1), (1, 2, 0, "Bz", -1),
    (3, 0, 2, "Bx", 1), (1, 0, 3, "By", 1), (2, 0, 1, "Bz", 1),
]
_B_ALTERNATIVE = [
    (2, 0, 3, "Bx", -1), (3, 0, 1, "By", -1), (1, 0, 2, "Bz", -1),
    (3, 2, 0, "Bx", 1), (1, 3, 0, "By", 1), (2, 1, 0, "Bz", 1),
]
_COMPLETION = [
    (0, 3, 2, "Bx", -0.5), (0, 1, 3, "By", -0.5), (0, 2, 1, "Bz", -0.5),
    (0, 2, 3, "Bx", 0.5), (0, 3, 1, "By", 0.5), (0, 1, 2, "Bz", 0.5),
    (0, 0, 1, "Ex", -1), (0, 0, 2, "Ey", -1), (0, 0, 3, "Ez", -1),
    (0, 1, 0, "Ex", -1), (0, 2, 0, "Ey", -1), (0, 3, 0, "Ez", -1),
    (2, 2, 1, "Ex", _I), (3, 3, 2, "Ey", _I), (2, 2, 3, "Ez", _I),
    (2, 1, 2, "Ex", _I), (3, 2, 3, "Ey", _I), (2, 3, 2, "Ez", _I),
    (3, 3, 1, "Ex", -_I), (1, 1, 2, "Ey", -_I), (1, 1, 3, "Ez", -_I),
    (3, 1, 3, "Ex", -_I), (1, 2, 1, "Ey", -_I), (1, 3, 1, "Ez", -_I),
    (1, 2, 2, "Ex", 1 + _I), (2, 3, 3, "Ey", 1 + _I), (3, 2, 2, "Ez", 1 + _I),
    (1, 3, 3, "Ex", 1 - _I), (2, 1, 1, "Ey", 1 - _I), (3, 1, 1, "Ez", 1 - _I),
]


class Placement(enum.Enum):
    """Where the magnetic components sit in the connection."""

    LORENTZ_ONLY = "lorentz_only"
    FULL = "full"
    ALTERNATIVE_FULL = "alternative_full"

    @classmethod
    def parse(cls, value) -> "Placement":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "_")
        for member in cls:
            if key in (member.value, member.name.lower()):
                return member
        raise ValueError(f"unknown placement {value!r}; choose from {[m.value for m in cls]}")


TABLES = {
    Placement.LORENTZ_ONLY: _E_LORENTZ + _B_STANDARD,
    Placement.FULL: _E_LORENTZ + _B_STANDARD + _COMPLETION,
    Placement.ALTERNATIVE_FULL: _E_LORENTZ + _B_ALTERNATIVE + _COMPLETION,
}


def _coefficient_tensor(rows):
    coef = np.zeros((4, 4, 4, 6), dtype=complex)
    for i, j, k, sym, c in rows:
        if np.any(coef[i, j, k]):
            raise RuntimeError(f"duplicate table slot {(i, j, k)}")
        coef[i, j, k, _SYM[sym]] = c
    coef.setflags(write=False)
    return coef


COEFFICIENTS = {pl: _coefficient_tensor(rows) for pl, rows in TABLES.items()}


def _from_fields(f6, kappa, placement):
    coef = COEFFICIENTS[Placement.parse(placement)]
    # each slot holds one nonzero coefficient, so this sum is exact
    return np.einsum("ijkn,n->ijk", coef, kappa * np.asarray(f6, dtype=float))


def build_connection(s: FieldSample, pp: ParticleParams, placement=Placement.FULL) -> np.ndarray:
    """Connection components ``g[i, j, k]`` (complex, shape ``(4, 4, 4)``)."""
    return _from_fields(s.fields(), pp.kappa, placement)


@dataclass(frozen=True)
class ConnectionJet:
    """Connection ``g`` and derivatives ``dg[a] = d g / d x^a``."""

    g: np.ndarray
    dg: np.ndarray
    placement: Placement
    sample: FieldSample


def jet_from_sample(s: FieldSample, pp: ParticleParams, placement=Placement.FULL) -> ConnectionJet:
    placement = Placement.parse(placement)
    g = build_connection(s, pp, placement)
    d = s.field_derivatives()
    dg = np.stack([_from_fields(d[a], pp.kappa, placement) for a in range(4)])
    return ConnectionJet(g, dg, placement, s)


def build_jet(model: FieldModel, p, pp: ParticleParams, placement=Placement.FULL) -> ConnectionJet:
    """Connection and its derivatives at ``p``.

    The connection is linear in the fields, so each derivative slice is the
    connection built from the matching field-derivative slice.
    """
    return jet_from_sample(model(p), pp, placement)


def torsion(g: np.ndarray) -> np.ndarray:
    """``t[i, j, k] = g[i, j, k] - g[i, k, j]``."""
    g = np.asarray(g)
    return g - g.transpose(0, 2, 1)


def torsion_epsilon_sum(model: FieldModel, p, pp: ParticleParams, placement=Placement.FULL,
                        covariant=False) -> complex:
    """``sum eps_ijkl T^i_jk,l`` with ``,l`` the partial derivative along ``x^l``.

    For the full placements this equals ``2 kappa div B``. With
    ``covariant=True`` the connection correction terms

        + g[i,l,m] T[m,j,k] - g[m,l,j] T[i,m,k] - g[m,l,k] T[i,j,m]

    are added to each derivative before contracting (diagnostic only).
    """
    placement = Placement.parse(placement)
    if placement is Placement.LORENTZ_ONLY:
        raise ValueError("torsion epsilon sum is defined for the full placements")
    jet = build_jet(model, p, pp, placement)
    dt = jet.dg - jet.dg.transpose(0, 1, 3, 2)  # dt[l, i, j, k]
    deriv = np.einsum("lijk->ijkl", dt)
    if covariant:
        t = torsion(jet.g)
        g = jet.g
        deriv = (deriv
                 + np.einsum("ilm,mjk->ijkl", g, t)
                 - np.einsum("mlj,imk->ijkl", g, t)
                 - np.einsum("mlk,ijm->ijkl", g, t))
    return complex(np.einsum("ijkl,ijkl->", LEVI_CIVITA, deriv))


# ---------------------------------------------------------------------------
# table dump

NO_COMPONENTS = "no nonzero components"


def _fmt(x: float) -> str:
    if x == 0.0:
        return "0"
    return format(x, ".17g")


def _table_order(placement, antisymmetric=False):
    seen = []
    for i, j, k, _, _ in TABLES[placement]:
        key = (i, min(j, k), max(j, k)) if antisymmetric else (i, j, k)
        if key not in seen:
            seen.append(key)
    return seen


def table_rows(arr: np.ndarray, placement=Placement.FULL, torsion_only_upper=False):
    """Nonzero ``(i, j, k, re, im)`` rows in printed-table order.

    Components outside the placement table (none, for valid input) follow
    in lexicographic order. With ``torsion_only_upper`` only ``j < k``
    entries are listed.
    """
    placement = Placement.parse(placement)
    order = _table_order(placement, antisymmetric=torsion_only_upper)
    listed = set(order)
    rest = [(i, j, k) for i in range(4) for j in range(4) for k in range(4)
            if (i, j, k) not in listed]
    rows = []
    for i, j, k in order + rest:
        if torsion_only_upper and not j < k:
            continue
        v = complex(arr[i, j, k])
        if v != 0:
            rows.append((i, j, k, v.real, v.imag))
    return rows


def format_table(rows) -> str:
    """One ``i j k re im`` line per row, or the empty-table sentinel."""
    if not rows:
        return NO_COMPONENTS + "\n"
    return "".join(f"{i} {j} {k} {_fmt(re)} {_fmt(im)}\n" for i, j, k, re, im in rows)
