"""Linear Lorentz boosts of the connection and the "observable" averages.

A boost with constant ``beta`` is a linear coordinate change, so the
connection transforms as a rank-(1,2) tensor. The E and B seen after the
boost are read from fixed component averages of the transformed
connection and compared with the first-order field transformation.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .connection import Placement, build_connection
from .fields import FieldSample, ParticleParams, as_vec3

ROW_LABELS = ("B_x", "B_y", "B_z", "E_x", "E_y", "E_z")

# frozen deviation constant: |observed - first order| <= C beta^2 (field scale 1)
DEVIATION_CONSTANT = 10.0


@dataclass(frozen=True)
class BoostSpec:
    axis: int
    beta: float

    def __post_init__(self):
        if self.axis not in (1, 2, 3):
            raise ValueError("boost axis must be 1, 2 or 3")
        if not (np.isfinite(self.beta) and abs(self.beta) < 1.0):
            raise ValueError("boost requires |beta| < 1")

    @property
    def gamma(self) -> float:
        return 1.0 / np.sqrt(1.0 - self.beta * self.beta)


def boost_matrix(bs: BoostSpec):
    """``(L, L_inv)`` in ``(ct, x, y, z)`` coordinates."""
    g = bs.gamma
    gb = g * bs.beta
    a = bs.axis
    lam = np.eye(4)
    inv = np.eye(4)
    lam[0, 0] = lam[a, a] = g
    inv[0, 0] = inv[a, a] = g
    lam[0, a] = lam[a, 0] = -gb
    inv[0, a] = inv[a, 0] = gb
    return lam, inv


def transform_connection(g: np.ndarray, bs: BoostSpec) -> np.ndarray:
    """``g'[i,j,k] = L[i,a] Linv[b,j] Linv[d,k] g[a,b,d]`` (no truncation)."""
    lam, inv = boost_matrix(bs)
    return np.einsum("ia,bj,dk,abd->ijk", lam, inv, inv, g)


@dataclass(frozen=True)
class ObservableSet:
    e_obs: np.ndarray
    b_obs: np.ndarray

    def as_rows(self) -> np.ndarray:
        """Values in ``ROW_LABELS`` order."""
        return np.concatenate([self.b_obs, self.e_obs])


def _b_average(g, a, b):
    # (G^a_0b + G^a_b0 - (G^b_a0 + G^b_0a)) / 2
    return (g[a, 0, b] + g[a, b, 0] - (g[b, a, 0] + g[b, 0, a])) / 2.0


def observables(g: np.ndarray, pp: ParticleParams) -> ObservableSet:
    """Real parts of the observable averages, divided by kappa."""
    k = pp.kappa
    if k == 0.0:
        raise ValueError("observables need a nonzero kappa")
    e_obs = -np.real(g[1:, 0, 0]) / k
    b_obs = np.array([
        np.real(_b_average(g, 3, 2)),
        np.real(_b_average(g, 1, 3)),
        np.real(_b_average(g, 2, 1)),
    ]) / k
    return ObservableSet(e_obs, b_obs)


def first_order_fields(e, b, bs: BoostSpec, gamma=1.0):
    """Boosted fields to first order in beta.

    Components along the boost keep their value; transverse components
    become ``gamma (E + beta x B)`` and ``gamma (B - beta x E)``.
    """
    e = as_vec3(e)
    b = as_vec3(b)
    n = np.zeros(3)
    n[bs.axis - 1] = 1.0
    bv = bs.beta * n
    par_e = (e @ n) * n
    par_b = (b @ n) * n
    e_new = par_e + gamma * (e - par_e + np.cross(bv, b))
    b_new = par_b + gamma * (b - par_b - np.cross(bv, e))
    return e_new, b_new


@dataclass(frozen=True)
class FirstOrderReport:
    """Per-row comparison in ``ROW_LABELS`` order."""

    initial: np.ndarray
    observed: np.ndarray
    expected: np.ndarray
    expected_gamma: np.ndarray
    beta: float
    axis: int
    field_scale: float

    @property
    def deviation(self) -> np.ndarray:
        return np.abs(self.observed - self.expected)

    @property
    def bound(self) -> float:
        return DEVIATION_CONSTANT * self.beta ** 2 * self.field_scale

    @property
    def within_bound(self) -> bool:
        return bool(np.all(self.deviation <= self.bound))

    def rows(self):
        for n, label in enumerate(ROW_LABELS):
            yield {
                "row": label,
                "initial": float(self.initial[n]),
                "observed": float(self.observed[n]),
                "expected": float(self.expected[n]),
                "expected_gamma": float(self.expected_gamma[n]),
                "deviation": float(self.deviation[n]),
            }


def first_order_check(e, b, bs: BoostSpec, pp: ParticleParams, placement=Placement.FULL) -> FirstOrderReport:
    """Boost a uniform-field connection and compare its observables.

    The exact tensor transform is compared with the first-order field
    transform at ``gamma = 1``; ``expected_gamma`` keeps the gamma factors.
    """
    e = as_vec3(e)
    b = as_vec3(b)
    g = build_connection(FieldSample(e, b), pp, placement)
    obs = observables(transform_connection(g, bs), pp)
    e1, b1 = first_order_fields(e, b, bs)
    eg, bgam = first_order_fields(e, b, bs, gamma=bs.gamma)
    scale = max(1.0, float(np.max(np.abs(np.concatenate([e, b])))))
    return FirstOrderReport(
        initial=np.concatenate([b, e]),
        observed=obs.as_rows(),
        expected=np.concatenate([b1, e1]),
        expected_gamma=np.concatenate([bgam, eg]),
        beta=bs.beta,
        axis=bs.axis,
        field_scale=scale,
    )


def deviation_exponent(e, b, axis, pp: ParticleParams, betas=(0.01, 0.02, 0.04),
                       placement=Placement.FULL):
    """Least-squares slope of log(max-row deviation) against log(beta)."""
    devs = [float(np.max(first_order_check(e, b, BoostSpec(axis, bt), pp, placement).deviation))
            for bt in betas]
    slope = np.polyfit(np.log(betas), np.log(devs), 1)[0]
    return float(slope), devs
