"""Geodesic motion of a test charge in the electromagnetic connection.

The path parameter is ``s = c tau``. State vectors are 8-arrays
``(x^0, x^1, x^2, x^3, u^0, u^1, u^2, u^3)`` with ``u^mu = dx^mu/ds``, so
``u^0 = dt/dtau`` and ``u^i = v_i / c``. Only the real part of the
connection enters the dynamics.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .connection import Placement, build_connection
from .errors import IntegrationAbort
from .fields import FieldModel, FieldSample, ParticleParams, as_point, as_vec3, uniform_e

SCHEMA_VERSION = 1
RHS_CHOICES = ("geodesic", "classical")


@dataclass(frozen=True)
class GeodesicState:
    x: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", as_point(self.x))
        u = np.asarray(self.u, dtype=float)
        if u.shape != (4,) or not np.all(np.isfinite(u)):
            raise ValueError("4-velocity must be 4 finite numbers")
        object.__setattr__(self, "u", u)

    @classmethod
    def from_vector(cls, y) -> "GeodesicState":
        y = np.asarray(y, dtype=float)
        return cls(y[:4], y[4:])

    @classmethod
    def launch(cls, x, velocity, c, u0=1.0) -> "GeodesicState":
        """State at ``x`` with spatial velocity ``velocity`` (cm/s).

        ``u^0`` is a free input (no metric fixes it); the default 1 is the
        slow-motion value ``dt/dtau ~ 1``.
        """
        v = as_vec3(velocity)
        return cls(x, np.concatenate([[u0], v / c]))

    def vector(self) -> np.ndarray:
        return np.concatenate([self.x, self.u])


def _state_vector(st):
    if isinstance(st, GeodesicState):
        return st.vector()
    y = np.asarray(st, dtype=float)
    if y.shape != (8,):
        raise ValueError("state vector must have 8 entries")
    return y


def real_connection(s: FieldSample, pp: ParticleParams, placement=Placement.FULL) -> np.ndarray:
    return np.ascontiguousarray(build_connection(s, pp, placement).real)


def geodesic_rhs(st, model: FieldModel, pp: ParticleParams, placement=Placement.FULL) -> np.ndarray:
    """``(dx/ds, du/ds)`` with ``du^mu/ds = -Re(G^mu_jk) u^j u^k``."""
    y = _state_vector(st)
    gre = real_connection(model(y[:4]), pp, placement)
    return np.concatenate([y[4:], kernels.geodesic_accel(gre, y[4:])])


def classical_rhs(st, model: FieldModel, pp: ParticleParams) -> np.ndarray:
    """Lorentz force written in the geodesic parameter, ``u^0`` held fixed.

    ``du^i/ds = kappa (E_i (u^0)^2 + u^0 (u x B)_i)``; at ``u^0 = 1`` this is
    ``m a = q E + (q/c) v x B``.
    """
    y = _state_vector(st)
    s = model(y[:4])
    u0 = y[4]
    us = y[5:]
    acc = pp.kappa * (s.e * u0 * u0 + u0 * np.cross(us, s.b))
    return np.concatenate([y[4:], [0.0], acc])


@dataclass
class Trajectory:
    """Samples of an integrated path.

    ``tau`` is proper time (s); ``states`` rows are 8-vectors.
    """

    tau: np.ndarray
    states: np.ndarray
    h: float
    method: str = "rk4"
    order: int = 4
    rhs: str = "geodesic"
    c: float = 1.0
    meta: dict = field(default_factory=dict)

    @property
    def dt_dtau(self) -> np.ndarray:
        return self.states[:, 4]

    @property
    def t(self) -> np.ndarray:
        return self.states[:, 0] / self.c

    @property
    def final(self) -> GeodesicState:
        return GeodesicState.from_vector(self.states[-1])

    def speed(self) -> np.ndarray:
        """Spatial ``|u|`` per sample (``|dx/ds|``)."""
        return np.linalg.norm(self.states[:, 5:], axis=1)

    def drift(self) -> dict:
        sp = self.speed()
        u0 = self.states[:, 4]
        return {
            "speed_drift": float(np.max(np.abs(sp - sp[0])) / sp[0]) if sp[0] else 0.0,
            "u0_drift": float(np.max(np.abs(u0 - u0[0])) / abs(u0[0])),
        }

    def to_csv(self, header=None) -> str:
        buf = io.StringIO()
        buf.write(f"# schema_version={SCHEMA_VERSION}\n")
        for k, v in (header or {}).items():
            if k != "schema_version":
                buf.write(f"# {k}={v}\n")
        buf.write(f"# method={self.method} order={self.order} rhs={self.rhs} h={self.h!r}\n")
        buf.write("tau[s],t[s],x[cm],y[cm],z[cm],u0[1],u1[1],u2[1],u3[1]\n")
        for tau, row in zip(self.tau, self.states):
            vals = [tau, row[0] / self.c, row[1], row[2], row[3], row[4], row[5], row[6], row[7]]
            buf.write(",".join(repr(float(v)) for v in vals) + "\n")
        for k, v in self.drift().items():
            buf.write(f"# {k}={v!r}\n")
        return buf.getvalue()


def characteristic_time(model: FieldModel, pp: ParticleParams, p=None) -> float:
    """Shortest of the gyration time ``mc/(|q||B|)`` and ``mc/(|q||E|)``."""
    s = model(np.zeros(4) if p is None else p)
    times = []
    bn = float(np.linalg.norm(s.b))
    en = float(np.linalg.norm(s.e))
    if pp.q != 0.0 and bn > 0.0:
        times.append(pp.m * pp.c / (abs(pp.q) * bn))
    if pp.q != 0.0 and en > 0.0:
        times.append(pp.m * pp.c / (abs(pp.q) * en))
    return min(times) if times else 1.0


def _step_list(tau_end, h, c):
    n_full = int(np.floor(tau_end / h + 1e-12))
    taus = list(np.arange(1, n_full + 1) * h)
    if n_full == 0 or tau_end - taus[-1] > 1e-12 * tau_end:
        taus.append(tau_end)
    else:
        taus[-1] = tau_end
    taus = np.array([0.0] + taus)
    return taus, np.diff(taus) * c


def integrate(rhs, st0, model: FieldModel, pp: ParticleParams, tau_end: float,
              h: Optional[float] = None, placement=Placement.FULL) -> Trajectory:
    """Fixed-step classical RK4 in ``s = c tau`` from 0 to ``tau_end``.

    Parameters
    ----------
    rhs : {"geodesic", "classical"}
        Right-hand side to integrate.
    st0 : GeodesicState or 8-vector
        Initial state; ``u^0`` must be positive.
    tau_end, h : float
        Final proper time and step, both in seconds. The last step is
        shortened to land on ``tau_end``. ``h=None`` uses
        ``characteristic_time / 1000``.

    Raises
    ------
    IntegrationAbort
        If ``u^0`` reaches zero or below (time reversal) or the state
        stops being finite. Along a uniform E field the exact solution
        itself blows up at finite proper time, so long horizons end here.
    SingularityError
        Propagated from the field model.
    """
    if rhs not in RHS_CHOICES:
        raise ValueError(f"rhs must be one of {RHS_CHOICES}")
    if not tau_end > 0:
        raise ValueError("tau_end must be positive")
    placement = Placement.parse(placement)
    y0 = _state_vector(st0)
    if h is None:
        h = characteristic_time(model, pp, y0[:4]) / 1000.0
    if not h > 0:
        raise ValueError("step must be positive")
    if not y0[4] > 0:
        raise IntegrationAbort("initial u^0 must be positive", tau=0.0, last_state=y0)
    taus, ds = _step_list(tau_end, h, pp.c)

    if model.uniform:
        s = model(y0[:4])
        pl = placement if rhs == "geodesic" else Placement.LORENTZ_ONLY
        gre = real_connection(s, pp, pl)
        ys, n_valid = kernels.rk4_uniform(gre, y0, ds)
    else:
        if rhs == "geodesic":
            def f(y):
                return geodesic_rhs(y, model, pp, placement)
        else:
            def f(y):
                return classical_rhs(y, model, pp)
        ys = np.zeros((len(ds) + 1, 8))
        ys[0] = y0
        y = y0
        n_valid = len(ds) + 1
        for n, step in enumerate(ds):
            k1 = f(y)
            k2 = f(y + 0.5 * step * k1)
            k3 = f(y + 0.5 * step * k2)
            k4 = f(y + step * k3)
            y = y + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            ys[n + 1] = y
            if not (y[4] > 0.0 and np.all(np.isfinite(y))):
                n_valid = n + 1
                break
    if n_valid < len(ds) + 1:
        last = ys[n_valid - 1]
        tau = float(taus[n_valid - 1])
        if np.all(np.isfinite(ys[n_valid])):
            why = f"time reversal: u^0 <= 0 in the step after tau={tau!r}"
        else:
            why = (f"state diverged in the step after tau={tau!r} "
                   "(finite-time blow-up or step too large)")
        raise IntegrationAbort(why, tau=tau, last_state=last.copy())
    return Trajectory(tau=taus, states=ys, h=float(h), rhs=rhs, c=pp.c)


@dataclass(frozen=True)
class ForceProbe:
    acceleration: np.ndarray   # spatial du/ds divided by kappa
    parallel_ratio: float
    transverse_ratio: float


def force_probe(e, v, pp: ParticleParams) -> ForceProbe:
    """Geodesic force on a charge moving with velocity ``v`` in uniform ``e``.

    Ratios are measured force over ``q E``, split into components of E
    parallel and transverse to ``v``. The connection is not rotation
    invariant; the split is clean when ``v`` lies along a coordinate axis.
    At ``v = 0`` both ratios are taken along E.
    """
    e = as_vec3(e)
    v = as_vec3(v)
    if not np.any(e):
        raise ValueError("force probe needs a nonzero field")
    if pp.kappa == 0.0:
        raise ValueError("force probe needs a nonzero charge")
    model = uniform_e(e)
    y = np.concatenate([np.zeros(4), [1.0], v / pp.c])
    acc = geodesic_rhs(y, model, pp)[5:] / pp.kappa
    vn = np.linalg.norm(v)
    if vn == 0.0:
        r = float(acc @ e / (e @ e))
        return ForceProbe(acc, r, r)
    vh = v / vn
    e_par = e @ vh
    e_perp = e - e_par * vh
    a_par = acc @ vh
    a_perp = acc - a_par * vh
    par = float(a_par / e_par) if e_par != 0.0 else float("nan")
    en = e_perp @ e_perp
    perp = float(a_perp @ e_perp / en) if en > 0.0 else float("nan")
    return ForceProbe(acc, par, perp)


@dataclass
class DecayReport:
    """Lab-time survival and decay-rate curves for two opposite launches.

    ``plus`` moves along ``direction`` (E by default), ``minus`` against it.
    Rates are ``(1/tau0) dtau/dt``; the asymmetry is
    ``(rate_plus - rate_minus) / (rate_plus + rate_minus)``.
    """

    t: np.ndarray
    tau_plus: np.ndarray
    tau_minus: np.ndarray
    rate_plus: np.ndarray
    rate_minus: np.ndarray
    survival_plus: np.ndarray
    survival_minus: np.ndarray
    asymmetry: np.ndarray
    plus: Trajectory
    minus: Trajectory

    COLUMNS = ("t", "tau_plus", "tau_minus", "rate_plus", "rate_minus",
               "survival_plus", "survival_minus", "asymmetry")

    def table(self) -> np.ndarray:
        return np.column_stack([getattr(self, c) for c in self.COLUMNS])

    def swapped(self) -> "DecayReport":
        """The same report with the two launch directions exchanged."""
        return DecayReport(self.t, self.tau_minus, self.tau_plus, self.rate_minus, self.rate_plus,
                           self.survival_minus, self.survival_plus, -self.asymmetry,
                           self.minus, self.plus)

    def to_csv(self, header=None) -> str:
        buf = io.StringIO()
        buf.write(f"# schema_version={SCHEMA_VERSION}\n")
        for k, v in (header or {}).items():
            if k != "schema_version":
                buf.write(f"# {k}={v}\n")
        buf.write(",".join(self.COLUMNS) + "\n")
        for row in self.table():
            buf.write(",".join(repr(float(v)) for v in row) + "\n")
        return buf.getvalue()


def decay_experiment(e, speed: float, pp: ParticleParams, tau_end: float, h: Optional[float] = None,
                     direction=None, placement=Placement.FULL, n_samples: Optional[int] = None) -> DecayReport:
    """Integrate equal-speed launches along ``+direction`` and ``-direction``.

    Both paths are resampled on a shared lab-time grid ending at the
    earlier of their final lab times. Survival is ``exp(-tau / tau0)``.
    """
    e = as_vec3(e)
    if pp.tau0 is None:
        raise ValueError("decay experiment needs tau0")
    if not 0.0 <= speed < pp.c:
        raise ValueError("speed must lie in [0, c)")
    if direction is None:
        en = np.linalg.norm(e)
        d = e / en if en > 0 else np.array([1.0, 0.0, 0.0])
    else:
        d = as_vec3(direction)
        d = d / np.linalg.norm(d)
    model = uniform_e(e)
    trajs = []
    for sign in (1.0, -1.0):
        st = GeodesicState.launch(np.zeros(4), sign * speed * d, pp.c)
        trajs.append(integrate("geodesic", st, model, pp, tau_end, h, placement))
    plus, minus = trajs
    t_end = min(plus.t[-1], minus.t[-1])
    n = n_samples or min(len(plus.tau), len(minus.tau))
    t = np.linspace(0.0, t_end, n)
    out = {}
    for name, tr in (("plus", plus), ("minus", minus)):
        tau = np.interp(t, tr.t, tr.tau)
        rate = np.interp(t, tr.t, 1.0 / tr.dt_dtau) / pp.tau0
        out[name] = (tau, rate, np.exp(-tau / pp.tau0))
    rp, rm = out["plus"][1], out["minus"][1]
    asym = (rp - rm) / (rp + rm)
    return DecayReport(t, out["plus"][0], out["minus"][0], rp, rm,
                       out["plus"][2], out["minus"][2], asym, plus, minus)
