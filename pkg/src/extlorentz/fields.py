"""Electromagnetic field models with first derivatives.

Coordinates are Cartesian ``(x0, x1, x2, x3) = (ct, x, y, z)`` in Gaussian
units. Every derivative stored in a :class:`FieldSample` is taken with
respect to ``x^a``; the slot ``a = 0`` therefore holds ``(1/c) dF/dt``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import SingularityError

C_LIGHT = 2.99792458e10  # cm/s

# central-difference optimum for double precision
FD_STEP_SCALE = np.finfo(float).eps ** (1.0 / 3.0)

LAWS = ("gauss_e", "gauss_b", "faraday", "ampere")


def _frozen(a, shape):
    arr = np.array(a, dtype=float)
    if arr.shape != shape:
        raise ValueError(f"expected shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("non-finite field value")
    arr.setflags(write=False)
    return arr


def as_point(p) -> np.ndarray:
    """Validate and return a spacetime point as a float array of length 4."""
    arr = np.asarray(p, dtype=float)
    if arr.shape != (4,):
        raise ValueError(f"spacetime point must have 4 coordinates, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("spacetime point has non-finite coordinates")
    return arr


def as_vec3(v) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.shape != (3,):
        raise ValueError(f"3-vector expected, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("3-vector has non-finite components")
    return arr


@dataclass(frozen=True)
class ParticleParams:
    """Charge ``q`` (statC), mass ``m`` (g), light speed ``c`` (cm/s).

    ``tau0`` is an optional proper lifetime in seconds, used only by the
    decay experiment.
    """

    q: float = 1.0
    m: float = 1.0
    c: float = C_LIGHT
    tau0: Optional[float] = None

    def __post_init__(self):
        if not (np.isfinite(self.q) and np.isfinite(self.m) and np.isfinite(self.c)):
            raise ValueError("particle parameters must be finite")
        if self.m <= 0:
            raise ValueError("mass must be positive")
        if self.c <= 0:
            raise ValueError("speed of light must be positive")
        if self.tau0 is not None and not self.tau0 > 0:
            raise ValueError("tau0 must be positive")

    @property
    def kappa(self) -> float:
        """The coupling ``q / (m c^2)``, recomputed on every access."""
        return self.q / (self.m * self.c * self.c)


@dataclass(frozen=True)
class FieldSample:
    """E, B and their derivatives at one point.

    ``de[a]`` is ``dE/dx^a`` and ``db[a]`` is ``dB/dx^a``; both have shape
    ``(4, 3)`` indexed as ``[coordinate, component]``.
    """

    e: np.ndarray
    b: np.ndarray
    de: np.ndarray = field(default_factory=lambda: np.zeros((4, 3)))
    db: np.ndarray = field(default_factory=lambda: np.zeros((4, 3)))

    def __post_init__(self):
        object.__setattr__(self, "e", _frozen(self.e, (3,)))
        object.__setattr__(self, "b", _frozen(self.b, (3,)))
        object.__setattr__(self, "de", _frozen(self.de, (4, 3)))
        object.__setattr__(self, "db", _frozen(self.db, (4, 3)))

    def fields(self) -> np.ndarray:
        """``(Ex, Ey, Ez, Bx, By, Bz)``."""
        return np.concatenate([self.e, self.b])

    def field_derivatives(self) -> np.ndarray:
        """Shape ``(4, 6)``: row ``a`` is ``d(E, B)/dx^a``."""
        return np.concatenate([self.de, self.db], axis=1)

    @property
    def div_e(self) -> float:
        return float(self.de[1, 0] + self.de[2, 1] + self.de[3, 2])

    @property
    def div_b(self) -> float:
        return float(self.db[1, 0] + self.db[2, 1] + self.db[3, 2])

    @property
    def curl_e(self) -> np.ndarray:
        return _curl(self.de)

    @property
    def curl_b(self) -> np.ndarray:
        return _curl(self.db)

    def faraday(self) -> np.ndarray:
        """``curl E + dB/dx^0``; zero for fields obeying Faraday's law."""
        return self.curl_e + self.db[0]

    def ampere(self) -> np.ndarray:
        """``curl B - dE/dx^0``; zero for source-free Ampere-Maxwell."""
        return self.curl_b - self.de[0]

    def energy_scale(self) -> float:
        return float(self.e @ self.e + self.b @ self.b)


def _curl(d):
    # d[a, i] = dF_i / dx^a, spatial a = 1..3
    return np.array(
        [d[2, 2] - d[3, 1], d[3, 0] - d[1, 2], d[1, 1] - d[2, 0]]
    )


class FieldModel:
    """A deterministic map from spacetime points to :class:`FieldSample`.

    Parameters
    ----------
    name : str
        Preset or user label.
    evaluator : callable
        ``evaluator(p) -> FieldSample`` for a validated point ``p``.
    analytic : bool
        True when derivatives come from closed-form differentiation.
    laws : iterable of str
        Source-free Maxwell laws the model satisfies everywhere it is
        defined, drawn from ``LAWS``.
    uniform : bool
        True when E and B are constant in spacetime.
    params : dict, optional
        Construction parameters, kept for reports.
    raw : callable, optional
        ``raw(p) -> (E, B)`` without derivatives, used by finite-difference
        checks.
    """

    def __init__(self, name, evaluator, *, analytic=True, laws=(), uniform=False,
                 params=None, raw=None):
        self.name = name
        self._evaluator = evaluator
        self.analytic = analytic
        self.laws = frozenset(laws)
        unknown = self.laws - set(LAWS)
        if unknown:
            raise ValueError(f"unknown laws: {sorted(unknown)}")
        self.uniform = uniform
        self.params = dict(params or {})
        self._raw = raw

    @property
    def maxwell(self) -> bool:
        """Whether all four source-free Maxwell equations hold."""
        return self.laws == frozenset(LAWS)

    def satisfies(self, law: str) -> bool:
        return law in self.laws

    def __call__(self, p) -> FieldSample:
        return self._evaluator(as_point(p))

    def fields_at(self, p):
        """``(E, B)`` at ``p`` without derivative work where possible."""
        p = as_point(p)
        if self._raw is not None:
            e, b = self._raw(p)
            return as_vec3(e), as_vec3(b)
        s = self._evaluator(p)
        return s.e.copy(), s.b.copy()

    def __repr__(self):
        return f"FieldModel({self.name!r}, analytic={self.analytic}, laws={sorted(self.laws)})"


def eval_field(model: FieldModel, p) -> FieldSample:
    """Evaluate ``model`` at ``p``.

    Raises
    ------
    SingularityError
        If ``p`` is a singular point of the model.
    """
    return model(p)


def finite_difference_adapter(raw: Callable, h=None, *, name="finite_difference",
                              laws=()) -> FieldModel:
    """Wrap ``raw(p) -> (E, B)`` with central-difference derivatives.

    With ``h=None`` the step along axis ``a`` is
    ``eps**(1/3) * max(1, |p_a|)``.
    """
    if h is not None and not h > 0:
        raise ValueError("finite-difference step must be positive")

    def _raw(p):
        e, b = raw(p)
        return as_vec3(e), as_vec3(b)

    def evaluate(p):
        e, b = _raw(p)
        de = np.empty((4, 3))
        db = np.empty((4, 3))
        for a in range(4):
            step = h if h is not None else FD_STEP_SCALE * max(1.0, abs(p[a]))
            dp = np.zeros(4)
            dp[a] = step
            ep, bp = _raw(p + dp)
            em, bm = _raw(p - dp)
            de[a] = (ep - em) / (2.0 * step)
            db[a] = (bp - bm) / (2.0 * step)
        return FieldSample(e, b, de, db)

    return FieldModel(name, evaluate, analytic=False, laws=laws, params={"h": h}, raw=_raw)


# ---------------------------------------------------------------------------
# presets


def _uniform(name, e, b):
    e = as_vec3(e)
    b = as_vec3(b)
    sample = FieldSample(e, b)
    return FieldModel(
        name,
        lambda p: sample,
        laws=LAWS,
        uniform=True,
        params={"e": e.tolist(), "b": b.tolist()},
        raw=lambda p: (e, b),
    )


def uniform_e(e=(1.0, 0.0, 0.0)) -> FieldModel:
    return _uniform("uniform_E", e, np.zeros(3))


def uniform_b(b=(0.0, 0.0, 1.0)) -> FieldModel:
    return _uniform("uniform_B", np.zeros(3), b)


def crossed_eb(e=(1.0, 0.0, 0.0), b=(0.0, 1.0, 0.0)) -> FieldModel:
    return _uniform("crossed_EB", e, b)


def plane_wave(e0=1.0, k=1.0) -> FieldModel:
    """Linearly polarized vacuum wave travelling along +z.

    ``Ex = By = e0 cos(k (x3 - x0))``; with ``x0 = ct`` this is
    ``e0 cos(k z - omega t)`` for ``omega = c k``. Time derivatives:
    ``dEx/dx0 = e0 k sin(phase)`` i.e. ``dEx/dt = c e0 k sin(phase)``.
    """
    e0 = float(e0)
    k = float(k)

    def raw(p):
        ph = k * (p[3] - p[0])
        a = e0 * np.cos(ph)
        return np.array([a, 0.0, 0.0]), np.array([0.0, a, 0.0])

    def evaluate(p):
        ph = k * (p[3] - p[0])
        a = e0 * np.cos(ph)
        g = e0 * k * np.sin(ph)
        de = np.zeros((4, 3))
        db = np.zeros((4, 3))
        de[0, 0] = g
        de[3, 0] = -g
        db[0, 1] = g
        db[3, 1] = -g
        return FieldSample([a, 0.0, 0.0], [0.0, a, 0.0], de, db)

    return FieldModel("plane_wave", evaluate, laws=LAWS, uniform=(k == 0.0 or e0 == 0.0),
                      params={"e0": e0, "k": k}, raw=raw)


def coulomb(q_src=1.0, center=(0.0, 0.0, 0.0)) -> FieldModel:
    """Static point charge ``E = q_src r / |r|^3``, ``B = 0``."""
    q_src = float(q_src)
    center = as_vec3(center)

    def _r(p):
        r = p[1:] - center
        r2 = float(r @ r)
        if r2 == 0.0:
            raise SingularityError(f"coulomb field is singular at {center.tolist()}")
        return r, r2

    def raw(p):
        r, r2 = _r(p)
        return q_src * r / (r2 * np.sqrt(r2)), np.zeros(3)

    def evaluate(p):
        r, r2 = _r(p)
        rn = np.sqrt(r2)
        inv3 = 1.0 / (r2 * rn)
        e = q_src * r * inv3
        # dE_i/dx_j = q (delta_ij / r^3 - 3 r_i r_j / r^5)
        jac = q_src * (np.eye(3) * inv3 - 3.0 * np.outer(r, r) * inv3 / r2)
        de = np.zeros((4, 3))
        de[1:] = jac.T
        return FieldSample(e, np.zeros(3), de, np.zeros((4, 3)))

    return FieldModel("coulomb", evaluate, laws=LAWS, params={"q_src": q_src, "center": center.tolist()},
                      raw=raw)


def linear_gradient(e0=(0.0, 0.0, 0.0), b0=(0.0, 0.0, 0.0), grad_e=None, grad_b=None) -> FieldModel:
    """Fields affine in the coordinates: ``E_i(x) = e0_i + grad_e[i, a] x^a``.

    ``grad_e`` and ``grad_b`` are 3x4 matrices (component, coordinate) and
    may be chosen to violate any Maxwell equation. The ``laws`` flags are
    computed from the gradients.
    """
    e0 = as_vec3(e0)
    b0 = as_vec3(b0)
    ge = np.zeros((3, 4)) if grad_e is None else np.array(grad_e, dtype=float)
    gb = np.zeros((3, 4)) if grad_b is None else np.array(grad_b, dtype=float)
    if ge.shape != (3, 4) or gb.shape != (3, 4):
        raise ValueError("gradient matrices must be 3x4 (component, coordinate)")
    if not (np.all(np.isfinite(ge)) and np.all(np.isfinite(gb))):
        raise ValueError("gradient matrices must be finite")
    de = ge.T.copy()
    db = gb.T.copy()

    def raw(p):
        return e0 + ge @ p, b0 + gb @ p

    def evaluate(p):
        e, b = raw(p)
        return FieldSample(e, b, de, db)

    probe = FieldSample(e0, b0, de, db)
    laws = []
    if probe.div_e == 0.0:
        laws.append("gauss_e")
    if probe.div_b == 0.0:
        laws.append("gauss_b")
    if not np.any(probe.faraday()):
        laws.append("faraday")
    if not np.any(probe.ampere()):
        laws.append("ampere")
    uniform = not (np.any(ge) or np.any(gb))
    return FieldModel("linear_gradient", evaluate, laws=laws, uniform=uniform,
                      params={"e0": e0.tolist(), "b0": b0.tolist(),
                              "grad_e": ge.tolist(), "grad_b": gb.tolist()},
                      raw=raw)


PRESETS = {
    "uniform_E": uniform_e,
    "uniform_B": uniform_b,
    "crossed_EB": crossed_eb,
    "plane_wave": plane_wave,
    "coulomb": coulomb,
    "linear_gradient": linear_gradient,
}


def preset(name: str, **params) -> FieldModel:
    """Build a named preset with analytic derivatives.

    >>> preset("uniform_B", b=(0, 0, 1))(np.zeros(4)).b.tolist()
    [0.0, 0.0, 1.0]
    """
    try:
        factory = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    try:
        return factory(**params)
    except TypeError as exc:
        raise ValueError(f"invalid parameters for preset {name!r}: {exc}") from None


# ---------------------------------------------------------------------------
# Levi-Civita symbol


def levi_civita(*idx) -> int:
    """Permutation symbol with ``levi_civita(0, 1, 2, 3) == +1``."""
    if len(set(idx)) != len(idx):
        return 0
    if sorted(idx) != list(range(len(idx))):
        return 0
    sign = 1
    seq = list(idx)
    for i in range(len(seq)):
        while seq[i] != i:
            j = seq[i]
            seq[i], seq[j] = seq[j], seq[i]
            sign = -sign
    return sign


LEVI_CIVITA = np.zeros((4, 4, 4, 4))
for _perm in itertools.permutations(range(4)):
    LEVI_CIVITA[_perm] = levi_civita(*_perm)
LEVI_CIVITA.setflags(write=False)
