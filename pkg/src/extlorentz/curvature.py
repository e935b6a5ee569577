"""Riemann and Ricci tensors of the connection and the Maxwell identities.

Closed forms for the three Ricci combinations (``k`` = kappa, ``d0`` =
derivative along ``x^0 = ct``)::

    trace                = k^2 (E^2 + B^2) + 2 k div E
    R_0i + R_i0          = k^2 (E x B)_i + k (curl B - d0 E)_i
    R_ij - R_ji          = k (curl E + d0 B)_n,   (i, j, n) cyclic

The third vanishes exactly when Faraday's law holds.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .connection import ConnectionJet, Placement, build_jet
from .fields import FieldModel, FieldSample, ParticleParams

SPATIAL_PAIRS = ((1, 2), (3, 1), (2, 3))
# component of (curl E + d0 B) carried by each spatial pair
_PAIR_COMPONENT = {(1, 2): 2, (3, 1): 1, (2, 3): 0}

SCHEMA_VERSION = 1


def riemann(jet: ConnectionJet) -> np.ndarray:
    """``r[i, j, k, l]`` from the connection jet; antisymmetric in ``(k, l)``."""
    return kernels.riemann(jet.g, jet.dg)


def ricci(r: np.ndarray) -> np.ndarray:
    """``ric[i, j] = sum_k r[k, j, k, i]``."""
    return np.einsum("kjki->ij", r)


def residual_scale(s: FieldSample, pp: ParticleParams) -> float:
    """``max(1, kappa^2 (E^2 + B^2))``, the yardstick for all Ricci residuals."""
    return max(1.0, pp.kappa ** 2 * s.energy_scale())


def expected_trace(s: FieldSample, pp: ParticleParams) -> float:
    k = pp.kappa
    return k * k * s.energy_scale() + 2.0 * k * s.div_e


def expected_mixed(s: FieldSample, pp: ParticleParams) -> np.ndarray:
    k = pp.kappa
    return k * k * np.cross(s.e, s.b) + k * s.ampere()


def expected_spatial(s: FieldSample, pp: ParticleParams) -> np.ndarray:
    far = s.faraday()
    return pp.kappa * np.array([far[_PAIR_COMPONENT[p]] for p in SPATIAL_PAIRS])


@dataclass(frozen=True)
class SymmetryReport:
    """Ricci trace, mixed sums and spatial differences with their closed forms."""

    trace: complex
    mixed: np.ndarray       # R_0i + R_i0, i = 1..3
    spatial: np.ndarray     # R_12 - R_21, R_31 - R_13, R_23 - R_32
    trace_expected: float
    mixed_expected: np.ndarray
    spatial_expected: np.ndarray
    scale: float

    @property
    def residual_trace(self) -> float:
        return abs(self.trace - self.trace_expected)

    @property
    def residual_mixed(self) -> np.ndarray:
        return np.abs(self.mixed - self.mixed_expected)

    @property
    def residual_spatial(self) -> np.ndarray:
        return np.abs(self.spatial - self.spatial_expected)

    def to_records(self) -> dict:
        """Flat key/value record with stable names."""
        rec = {"trace_re": self.trace.real, "trace_im": self.trace.imag}
        for n in range(3):
            rec[f"mixed_{n + 1}"] = self.mixed[n].real
            rec[f"mixed_{n + 1}_im"] = self.mixed[n].imag
        for n, (a, b) in enumerate(SPATIAL_PAIRS):
            rec[f"spatial_{a}{b}"] = self.spatial[n].real
            rec[f"spatial_{a}{b}_im"] = self.spatial[n].imag
        rec["residual_trace"] = self.residual_trace
        for n in range(3):
            rec[f"residual_mixed_{n + 1}"] = float(self.residual_mixed[n])
        for n, (a, b) in enumerate(SPATIAL_PAIRS):
            rec[f"residual_spatial_{a}{b}"] = float(self.residual_spatial[n])
        rec["scale"] = self.scale
        return {k: float(v) for k, v in rec.items()}


def report_from_ricci(ric: np.ndarray, s: FieldSample, pp: ParticleParams) -> SymmetryReport:
    mixed = np.array([ric[0, i] + ric[i, 0] for i in (1, 2, 3)])
    spatial = np.array([ric[a, b] - ric[b, a] for a, b in SPATIAL_PAIRS])
    return SymmetryReport(
        trace=complex(np.trace(ric)),
        mixed=mixed,
        spatial=spatial,
        trace_expected=expected_trace(s, pp),
        mixed_expected=expected_mixed(s, pp),
        spatial_expected=expected_spatial(s, pp),
        scale=residual_scale(s, pp),
    )


def symmetry_report(model: FieldModel, p, pp: ParticleParams,
                    placement=Placement.FULL) -> SymmetryReport:
    jet = build_jet(model, p, pp, placement)
    return report_from_ricci(ricci(riemann(jet)), jet.sample, pp)


@dataclass(frozen=True)
class SourceDensities:
    rho: float
    j: np.ndarray
    u: float
    s: np.ndarray


def geometric_sources(s: FieldSample, pp: ParticleParams) -> SourceDensities:
    """Charge and current densities tied to the field energy and flux.

    ``u = (E^2 + B^2) / 8 pi``, ``S = (c / 4 pi) E x B``,
    ``rho = -kappa u`` and ``J = -kappa S``.
    """
    u = s.energy_scale() / (8.0 * np.pi)
    flux = pp.c / (4.0 * np.pi) * np.cross(s.e, s.b)
    return SourceDensities(rho=-pp.kappa * u, j=-pp.kappa * flux, u=u, s=flux)


@dataclass(frozen=True)
class ContinuityResult:
    residual: float      # d rho/dt + div J
    j_dot_e: float
    scale: float         # sum of magnitudes of the terms in the residual
    je_scale: float


def continuity_residual(model: FieldModel, p, pp: ParticleParams) -> ContinuityResult:
    """Continuity residual of the geometric sources at ``p``.

    Time derivatives are ``c * d/dx^0``; ``div (E x B)`` is expanded with the
    product rule from the field derivatives.
    """
    s = model(p)
    k = pp.kappa
    pref = pp.c / (4.0 * np.pi)
    # d rho / dt = -k d u / dt = -k c (E.d0E + B.d0B) / 4 pi
    drho_terms = -k * pref * np.concatenate([s.e * s.de[0], s.b * s.db[0]])
    # div(E x B) = sum_a (d_a E x B + E x d_a B)_a
    div_terms = np.array(
        [np.cross(s.de[a], s.b)[a - 1] + np.cross(s.e, s.db[a])[a - 1] for a in (1, 2, 3)]
    )
    div_j_terms = -k * pref * div_terms
    residual = float(drho_terms.sum() + div_j_terms.sum())
    scale = float(np.abs(k) * pref * (np.abs(s.e) @ np.abs(s.de[0]) + np.abs(s.b) @ np.abs(s.db[0])
                                      + np.sum(np.abs(s.de[1:]) * np.abs(s.b).sum())
                                      + np.sum(np.abs(s.db[1:]) * np.abs(s.e).sum())))
    src = geometric_sources(s, pp)
    j_dot_e = float(src.j @ s.e)
    je_scale = float(abs(k) * pref * (s.e @ s.e) * np.sqrt(s.b @ s.b))
    return ContinuityResult(residual, j_dot_e, scale, je_scale)
