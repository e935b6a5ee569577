"""Trace of the curvature 2-form and its exactness.

Two-forms are stored as six coefficients ``w[(a, b)]``, ``a < b``, of
``dx^a ^ dx^b`` in the ``x^0 = ct`` basis, packed in ``FORM_PAIRS`` order.
:func:`to_display_basis` converts to the ``dt``-based labels
``dx^dt, dy^dt, dz^dt, dy^dz, dx^dz, dx^dy``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .connection import Placement, build_jet
from .curvature import riemann
from .fields import FieldModel, ParticleParams, as_point

FORM_PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
DISPLAY_LABELS = ("dx^dt", "dy^dt", "dz^dt", "dy^dz", "dx^dz", "dx^dy")


@dataclass(frozen=True)
class TraceForm:
    raw: np.ndarray          # sum_i R^i_iab, complex
    normalized: np.ndarray   # raw / kappa
    kappa: float


def curvature_trace_form(model: FieldModel, p, pp: ParticleParams,
                         placement=Placement.FULL) -> TraceForm:
    r = riemann(build_jet(model, p, pp, placement))
    tr = np.einsum("iiab->ab", r)
    raw = np.array([tr[a, b] for a, b in FORM_PAIRS])
    k = pp.kappa
    if k == 0.0:
        raise ValueError("kappa-normalized trace form needs a nonzero kappa")
    return TraceForm(raw=raw, normalized=raw / k, kappa=k)


def field_form(model: FieldModel, p) -> np.ndarray:
    """The six-term field-derivative 2-form, in the ``x^0`` basis.

    Coefficients: ``-d0 E_i`` on ``dx^0 ^ dx^i`` and ``d_b E_a - d_a E_b`` on
    ``dx^a ^ dx^b`` for spatial ``a < b``.
    """
    s = model(p)
    d = s.de  # d[a, i] = dE_i/dx^a
    return np.array([
        -d[0, 0], -d[0, 1], -d[0, 2],
        d[2, 0] - d[1, 1],
        d[3, 0] - d[1, 2],
        d[3, 1] - d[2, 2],
    ])


def to_display_basis(w: np.ndarray, c: float) -> np.ndarray:
    """Coefficients on ``dx^dt, dy^dt, dz^dt, dy^dz, dx^dz, dx^dy``.

    ``dx^0 ^ dx^i = -c dx^i ^ dt``.
    """
    w = np.asarray(w)
    return np.array([-c * w[0], -c * w[1], -c * w[2], w[5], w[4], w[3]])


def minus_d_e_form(model: FieldModel, p, h: float) -> np.ndarray:
    """``-d(E_x dx + E_y dy + E_z dz)`` by central differences of E."""
    if not h > 0:
        raise ValueError("step must be positive")
    p = as_point(p)
    # jac[a, i] = dE_i/dx^a, with E_0 = 0
    jac = np.zeros((4, 4))
    for a in range(4):
        dp = np.zeros(4)
        dp[a] = h
        ep, _ = model.fields_at(p + dp)
        em, _ = model.fields_at(p - dp)
        jac[a, 1:] = (ep - em) / (2.0 * h)
    return np.array([-(jac[a, b] - jac[b, a]) for a, b in FORM_PAIRS])


@dataclass(frozen=True)
class ExactnessReport:
    h: float
    deviation: float
    deviation_half: float
    scale: float

    @property
    def ratio(self) -> float:
        if self.deviation_half == 0.0:
            return float("nan")
        return self.deviation / self.deviation_half


def exactness_check(model: FieldModel, p, h: float, pp: ParticleParams = None,
                    placement=Placement.FULL) -> ExactnessReport:
    """Compare the normalized trace form with ``-d(E.dx)`` at steps h and h/2."""
    pp = pp if pp is not None else ParticleParams(c=1.0)
    w = curvature_trace_form(model, p, pp, placement).normalized
    dev = float(np.max(np.abs(w - minus_d_e_form(model, p, h))))
    dev_half = float(np.max(np.abs(w - minus_d_e_form(model, p, h / 2.0))))
    return ExactnessReport(h=h, deviation=dev, deviation_half=dev_half,
                           scale=max(1.0, float(np.max(np.abs(w)))))


def closedness(model: FieldModel, p, h: float, pp: ParticleParams = None,
               placement=Placement.FULL) -> np.ndarray:
    """Finite-difference exterior derivative of the normalized trace form.

    Returns the four 3-form coefficients on ``dx^a ^ dx^b ^ dx^c``,
    ``a < b < c``.
    """
    pp = pp if pp is not None else ParticleParams(c=1.0)
    p = as_point(p)
    full = np.zeros((4, 4, 4), dtype=complex)  # full[a, b, c] = d_a w_bc
    for a in range(4):
        dp = np.zeros(4)
        dp[a] = h
        wp = curvature_trace_form(model, p + dp, pp, placement).normalized
        wm = curvature_trace_form(model, p - dp, pp, placement).normalized
        dw = (wp - wm) / (2.0 * h)
        for n, (b, c) in enumerate(FORM_PAIRS):
            full[a, b, c] = dw[n]
            full[a, c, b] = -dw[n]
    triples = ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3))
    return np.array([full[a, b, c] + full[b, c, a] + full[c, a, b] for a, b, c in triples])
