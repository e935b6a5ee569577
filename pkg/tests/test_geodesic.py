import numpy as np
import pytest

from extlorentz.connection import Placement
from extlorentz.errors import IntegrationAbort, SingularityError
from extlorentz.fields import ParticleParams, preset, uniform_b, uniform_e
from extlorentz.geodesic import (
    GeodesicState,
    characteristic_time,
    classical_rhs,
    decay_experiment,
    force_probe,
    geodesic_rhs,
    integrate,
)

from conftest import PRESET_NAMES, grid_points, random_preset


def closed_form_rhs(e, b, u, kappa):
    """The displayed extended-force equations, written out component by component."""
    u0, us = u[0], u[1:]
    du0 = 2 * kappa * (e @ us) * u0
    acc = np.empty(3)
    for i in range(3):
        others = sum(us[j] ** 2 for j in range(3) if j != i)
        acc[i] = kappa * (e[i] * u0 ** 2 - e[i] * others) + kappa * u0 * np.cross(us, b)[i]
    return np.concatenate([[du0], acc])


def test_state_validation():
    with pytest.raises(ValueError):
        GeodesicState(np.zeros(4), [1.0, np.nan, 0, 0])
    with pytest.raises(ValueError):
        GeodesicState(np.zeros(4), [1.0, 0, 0])


def test_launch_scales_velocity():
    st = GeodesicState.launch([0, 1, 2, 3], [3e9, 0, 0], 3e10)
    assert st.u.tolist() == [1.0, 0.1, 0.0, 0.0]
    assert np.array_equal(GeodesicState.from_vector(st.vector()).vector(), st.vector())


def test_parallel_field_gives_classical_force():
    pp = ParticleParams(q=2.0, m=1.0, c=1.0)
    d = geodesic_rhs(np.array([0, 0, 0, 0, 1, 0, 0, 0.0]), uniform_e([1.5, 0, 0]), pp)
    assert d[5] == pytest.approx(pp.kappa * 1.5, rel=1e-15)
    assert d[4] == 0


def test_transverse_force_reduced():
    pp = ParticleParams(q=1.0, m=1.0, c=1.0)
    d = geodesic_rhs(np.array([0, 0, 0, 0, 1, 0, 0.6, 0]), uniform_e([1.0, 0, 0]), pp)
    assert d[5] == pytest.approx(1.0 - 0.36, rel=1e-15)


def test_time_component_display():
    pp = ParticleParams(q=1.0, m=1.0, c=1.0)
    e = np.array([0.3, -0.2, 0.9])
    u = np.array([1.7, 0.1, 0.4, -0.2])
    d = geodesic_rhs(np.concatenate([np.zeros(4), u]), uniform_e(e), pp)
    assert d[4] == pytest.approx(2 * (e @ u[1:]) * u[0], rel=1e-14)


@pytest.mark.parametrize("placement", ["full", "alternative_full"])
def test_pointwise_rhs_identities(placement, rng):
    worst_rel = worst_time = 0.0
    for _ in range(100):
        e, b = rng.normal(size=3), rng.normal(size=3)
        u = np.concatenate([[rng.uniform(0.5, 2.0)], rng.uniform(-0.9, 0.9, size=3)])
        kappa = rng.uniform(-2, 2)
        pp = ParticleParams(q=kappa, m=1.0, c=1.0)
        d = geodesic_rhs(np.concatenate([np.zeros(4), u]),
                         preset("crossed_EB", e=e, b=b), pp, placement)
        ref = closed_form_rhs(e, b, u, kappa)
        assert np.array_equal(d[:4], u)
        scale = abs(kappa) * (np.linalg.norm(e) + np.linalg.norm(b)) * max(1.0, u @ u)
        worst_rel = max(worst_rel, np.max(np.abs(d[5:] - ref[1:])) / scale)
        worst_time = max(worst_time, abs(d[4] - ref[0]) / scale)
    assert worst_rel <= 1e-12
    assert worst_time <= 1e-14


def test_placement_equivalence_rhs(rng):
    pp = ParticleParams(q=1.2, m=1.0, c=1.0)
    for name in PRESET_NAMES:
        model = random_preset(name, rng)
        for p in grid_points(rng, 5):
            y = np.concatenate([p, [1.1], rng.uniform(-0.5, 0.5, 3)])
            a = geodesic_rhs(y, model, pp, Placement.FULL)
            b = geodesic_rhs(y, model, pp, Placement.ALTERNATIVE_FULL)
            assert np.max(np.abs(a - b)) <= 1e-15 * max(1.0, np.max(np.abs(a)))


def test_classical_rhs_examples():
    pp = ParticleParams(q=1.0, m=1.0, c=1.0)
    y = np.array([0, 0, 0, 0, 1, 0.2, 0, 0])
    d = classical_rhs(y, uniform_b([0, 0, 1.0]), pp)
    assert d[6] == pytest.approx(-0.2) and d[4] == 0
    for v in ([0, 0, 0], [0.3, -0.1, 0.5]):
        yv = np.concatenate([np.zeros(4), [1.0], v])
        assert classical_rhs(yv, uniform_e([1, 2, 3]), pp)[5:].tolist() == [1, 2, 3]
    assert not np.any(classical_rhs(y, uniform_e([0, 0, 0]), pp)[4:])


def test_singularity_propagates(unit_pp):
    with pytest.raises(SingularityError):
        geodesic_rhs(np.array([0, 0, 0, 0, 1, 0, 0, 0.0]), preset("coulomb"), unit_pp)


# ----- force probe


def test_force_probe_transverse():
    probe = force_probe([1, 0, 0], [0, 0.5, 0], ParticleParams(q=1.0, m=1.0, c=1.0))
    assert probe.transverse_ratio == pytest.approx(0.75, rel=1e-15)


def test_force_probe_rest():
    probe = force_probe([0.3, 0.4, 0], [0, 0, 0], ParticleParams(q=1.0, m=1.0, c=1.0))
    assert probe.parallel_ratio == pytest.approx(1.0, rel=1e-15)
    assert probe.transverse_ratio == pytest.approx(1.0, rel=1e-15)


@pytest.mark.parametrize("beta", [0.1, 0.5, 0.9])
def test_force_probe_parallel(beta):
    c = 3e10
    probe = force_probe([0, 0, 2.0], [0, 0, beta * c], ParticleParams(q=1.0, m=1.0, c=c))
    assert probe.parallel_ratio == pytest.approx(1.0, rel=1e-15)


def test_force_probe_rejects_zero_field(unit_pp):
    with pytest.raises(ValueError):
        force_probe([0, 0, 0], [0.1, 0, 0], unit_pp)


# ----- integrator


def test_zero_field_straight_line(unit_pp):
    u = np.array([1.3, 0.2, -0.1, 0.4])
    tr = integrate("geodesic", GeodesicState([1, 2, 3, 4], u), uniform_e([0, 0, 0]), unit_pp,
                   2.5, h=0.1)
    expected = np.array([1, 2, 3, 4]) + u * 2.5
    assert np.max(np.abs(tr.final.x - expected)) <= 1e-13
    assert np.array_equal(tr.final.u, u)


def test_final_step_lands_on_end(unit_pp):
    tr = integrate("geodesic", GeodesicState(np.zeros(4), [1, 0.1, 0, 0]), uniform_b([0, 0, 1]),
                   unit_pp, 1.05, h=0.1)
    assert tr.tau[-1] == 1.05
    assert np.all(np.diff(tr.tau) > 0)
    assert len(tr.tau) == 12


def test_physical_units_uniform_b():
    pp = ParticleParams(q=4.8e-10, m=9.1e-28)
    model = uniform_b([0, 0, 1.0])
    period = 2 * np.pi * pp.m * pp.c / (pp.q * 1.0)
    st = GeodesicState.launch(np.zeros(4), [1e8, 0, 0], pp.c)
    tr = integrate("geodesic", st, model, pp, period)
    assert np.max(np.abs(tr.final.x[1:] - st.x[1:])) <= 1e-6 * 1e8 * period
    assert tr.drift()["speed_drift"] <= 1e-9


def _orbit_end(h, rhs="geodesic"):
    pp = ParticleParams(q=1.0, m=1.0, c=1.0)
    st = GeodesicState(np.zeros(4), [1.0, 0.3, 0.0, 0.1])
    return integrate(rhs, st, uniform_b([0, 0, 1.0]), pp, 2 * np.pi, h=h)


def test_orbit_closes_and_b_conserves():
    tr = _orbit_end(2 * np.pi / 1000)
    assert abs(tr.final.x[1]) <= 1e-6 and abs(tr.final.x[2]) <= 1e-6
    drift = tr.drift()
    assert drift["u0_drift"] == 0.0
    assert drift["speed_drift"] <= 1e-9


def test_b_only_drift_long_run():
    pp = ParticleParams(q=1.0, m=1.0, c=1.0)
    st = GeodesicState(np.zeros(4), [1.0, 0.5, 0.2, 0.0])
    model = preset("crossed_EB", e=(0, 0, 0), b=(0.3, -0.4, 1.2))
    h = characteristic_time(model, pp) / 1000
    tr = integrate("geodesic", st, model, pp, 1e4 * h, h=h)
    assert len(tr.tau) == 10001
    assert tr.drift()["speed_drift"] <= 1e-9
    assert tr.drift()["u0_drift"] <= 1e-9


@pytest.mark.parametrize("rhs", ["geodesic", "classical"])
def test_fourth_order_self_convergence(rhs):
    h = 2 * np.pi / 40
    ends = [_orbit_end(h / 2 ** n, rhs).final.vector() for n in range(3)]
    e1 = np.max(np.abs(ends[0] - ends[1]))
    e2 = np.max(np.abs(ends[1] - ends[2]))
    assert abs(np.log2(e1 / e2) - 4.0) <= 0.2


def test_nonuniform_fourth_order(rng):
    pp = ParticleParams(q=1.0, m=1.0, c=1.0)
    model = preset("plane_wave", e0=0.5, k=1.0)
    st = GeodesicState([0, 0.1, 0, 0], [1.0, 0.1, 0.0, 0.0])
    ends = [integrate("geodesic", st, model, pp, 2.0, h=0.1 / 2 ** n).final.vector()
            for n in range(3)]
    e1 = np.max(np.abs(ends[0] - ends[1]))
    e2 = np.max(np.abs(ends[1] - ends[2]))
    assert abs(np.log2(e1 / e2) - 4.0) <= 0.2


def test_dt_dtau_increases_for_parallel_launch(unit_pp):
    st = GeodesicState(np.zeros(4), [1.0, 0.2, 0, 0])
    tr = integrate("geodesic", st, uniform_e([0.5, 0, 0]), unit_pp, 1.0, h=0.01)
    assert np.all(np.diff(tr.dt_dtau) > 0)


def _blowup_time(a, u1):
    # u0^2 - 2 u1^2 = k is conserved and u1' = a (k + 2 u1^2), so u1 grows
    # like a tangent and reaches infinity at this s (u0 = 1 at launch)
    k = 1.0 - 2.0 * u1 * u1
    r = np.sqrt(2.0 * k)
    return (np.pi / 2 - np.arctan(2.0 * u1 / r)) / (a * r)


def test_finite_time_blowup_along_e(unit_pp):
    a, u1 = 0.5, 0.2
    s_star = _blowup_time(a, u1)
    st = GeodesicState(np.zeros(4), [1.0, u1, 0, 0])
    model = uniform_e([a, 0, 0])
    tr = integrate("geodesic", st, model, unit_pp, 0.9 * s_star, h=1e-3)
    assert np.isfinite(tr.final.u).all()
    with pytest.raises(IntegrationAbort, match="diverged") as info:
        integrate("geodesic", st, model, unit_pp, 1.1 * s_star, h=1e-3)
    assert abs(info.value.tau - s_star) <= 0.02 * s_star


def test_u0_closed_form_under_uniform_e(unit_pp):
    # du0/ds = 2 kappa E u1 u0 with dx1/ds = u1 gives u0 = exp(2 kappa E (x1 - x1_0))
    st = GeodesicState(np.zeros(4), [1.0, 0.3, 0, 0])
    tr = integrate("geodesic", st, uniform_e([0.4, 0, 0]), unit_pp, 1.5, h=0.001)
    assert np.allclose(tr.dt_dtau, np.exp(0.8 * tr.states[:, 1]), rtol=1e-11, atol=0)


def test_classical_regime_agreement(rng):
    pp = ParticleParams(q=1.0, m=1.0, c=1.0)
    for name in ("uniform_E", "crossed_EB", "plane_wave"):
        model = random_preset(name, rng)
        st = GeodesicState(np.array([0.0, 0.6, 0.6, 0.6]), np.concatenate([[1.0], [1e-3, -5e-4, 2e-4]]))
        # short enough that field-driven velocity stays below 1e-3 as well
        a = integrate("geodesic", st, model, pp, 2e-4, h=2e-6)
        b = integrate("classical", st, model, pp, 2e-4, h=2e-6)
        disp = np.max(np.abs(b.states[:, 1:4] - st.x[1:]))
        assert np.max(np.abs(a.states[:, 1:4] - b.states[:, 1:4])) <= 1e-5 * disp


def test_integrate_argument_checks(unit_pp):
    st = GeodesicState(np.zeros(4), [1, 0, 0, 0])
    with pytest.raises(ValueError):
        integrate("newton", st, uniform_e([1, 0, 0]), unit_pp, 1.0)
    with pytest.raises(ValueError):
        integrate("geodesic", st, uniform_e([1, 0, 0]), unit_pp, 0.0)
    with pytest.raises(ValueError):
        integrate("geodesic", st, uniform_e([1, 0, 0]), unit_pp, 1.0, h=-1.0)


def test_negative_u0_aborts_immediately(unit_pp):
    with pytest.raises(IntegrationAbort) as info:
        integrate("geodesic", GeodesicState(np.zeros(4), [-1, 0, 0, 0]), uniform_e([1, 0, 0]),
                  unit_pp, 1.0)
    assert info.value.tau == 0.0


@pytest.mark.parametrize("model", [uniform_e([1.0, 0, 0]),
                                   preset("linear_gradient", e0=(1, 0, 0))])
def test_unstable_step_reports_time_reversal(model, unit_pp):
    st = GeodesicState(np.zeros(4), [1.0, -0.9, 0, 0])
    with pytest.raises(IntegrationAbort) as info:
        integrate("geodesic", st, model, unit_pp, 10.0, h=5.0)
    assert info.value.last_state[4] > 0
    assert info.value.tau in (0.0, 5.0)


def test_time_reversal_message(unit_pp):
    # one huge step from a slow launch against E overshoots to u^0 < 0
    st = GeodesicState(np.zeros(4), [1.0, -0.9, 0, 0])
    with pytest.raises(IntegrationAbort, match="time reversal") as info:
        integrate("geodesic", st, uniform_e([1.0, 0, 0]), unit_pp, 3.0, h=3.0)
    assert info.value.tau == 0.0


def test_default_step_from_characteristic_time():
    pp = ParticleParams(q=2.0, m=1.0, c=1.0)
    model = preset("crossed_EB", e=(0, 4.0, 0), b=(0, 0, 1.0))
    assert characteristic_time(model, pp) == pytest.approx(1 / 8)
    tr = integrate("geodesic", GeodesicState(np.zeros(4), [1, 0, 0, 0]), model, pp, 1e-3)
    assert tr.h == pytest.approx(1 / 8000)
    assert characteristic_time(uniform_e([0, 0, 0]), pp) == 1.0


def test_trajectory_csv(unit_pp):
    tr = integrate("geodesic", GeodesicState(np.zeros(4), [1, 0.1, 0, 0]), uniform_b([0, 0, 1]),
                   unit_pp, 0.3, h=0.1)
    lines = tr.to_csv({"seed": 7}).splitlines()
    assert lines[0] == "# schema_version=1"
    assert "# seed=7" in lines
    assert "tau[s],t[s],x[cm],y[cm],z[cm],u0[1],u1[1],u2[1],u3[1]" in lines
    assert lines[-1].startswith("# u0_drift=")
    assert sum(1 for ln in lines if not ln.startswith("#")) == 1 + 4


# ----- decay


def _pp(q=1.0):
    return ParticleParams(q=q, m=1.0, c=1.0, tau0=2.0)


def test_decay_signs():
    rep = decay_experiment([0.5, 0, 0], 0.3, _pp(), 1.0, h=0.01)
    assert np.all(np.diff(rep.rate_plus) < 0)
    # the antiparallel launch slows, turns round and then runs along E, so its
    # rate rises until the turning point (u^1 = 0) and falls afterwards
    u1 = np.interp(rep.t, rep.minus.t, rep.minus.states[:, 5])
    turn = np.argmax(u1 >= 0)
    assert 0 < turn < len(rep.t) - 1
    assert np.all(np.diff(rep.rate_minus[:turn]) > 0)
    assert np.all(np.diff(rep.rate_minus[turn + 1:]) < 0)
    assert np.all(rep.asymmetry[1:] < 0)
    assert rep.asymmetry[0] == 0


def test_decay_closed_form_asymmetry():
    # u0 = exp(2 kappa E dx), so the rate ratio fixes A = -tanh(kappa E (dx_plus - dx_minus))
    rep = decay_experiment([0.5, 0, 0], 0.3, _pp(), 1.0, h=0.005)
    xp = np.interp(rep.t, rep.plus.t, rep.plus.states[:, 1])
    xm = np.interp(rep.t, rep.minus.t, rep.minus.states[:, 1])
    assert np.max(np.abs(rep.asymmetry + np.tanh(0.5 * (xp - xm)))) <= 1e-4


def test_decay_survival_properties():
    rep = decay_experiment([0.5, 0, 0], 0.3, _pp(), 1.0, h=0.01)
    for surv in (rep.survival_plus, rep.survival_minus):
        assert np.all((surv > 0) & (surv <= 1))
        assert np.all(np.diff(surv) <= 0)
    assert rep.survival_plus[0] == 1.0


def test_decay_zero_field_symmetric():
    rep = decay_experiment([0, 0, 0], 0.3, _pp(), 1.0, h=0.01)
    assert not np.any(rep.asymmetry)
    assert np.array_equal(rep.tau_plus, rep.tau_minus)


def test_decay_charge_swap_symmetry():
    # with launches tied to E, flipping E also flips which launch is "plus"
    e = np.array([0.4, -0.1, 0.2])
    a = decay_experiment(e, 0.3, _pp(-1.0), 1.0, h=0.01)
    b = decay_experiment(-e, 0.3, _pp(1.0), 1.0, h=0.01).swapped()
    assert np.array_equal(a.table(), b.table())


def test_decay_fixed_direction_depends_on_kappa_e_only():
    e = np.array([0.4, 0.0, 0.0])
    a = decay_experiment(e, 0.3, _pp(-1.0), 1.0, h=0.01, direction=[1, 0, 0])
    b = decay_experiment(-e, 0.3, _pp(1.0), 1.0, h=0.01, direction=[1, 0, 0])
    assert np.array_equal(a.table(), b.table())


def test_decay_input_checks():
    with pytest.raises(ValueError):
        decay_experiment([1, 0, 0], 0.3, ParticleParams(q=1, m=1, c=1), 1.0)
    with pytest.raises(ValueError):
        decay_experiment([1, 0, 0], 1.0, _pp(), 1.0)


def test_decay_csv_columns():
    rep = decay_experiment([0.5, 0, 0], 0.3, _pp(), 0.5, h=0.05)
    lines = rep.to_csv({"schema_version": 1}).splitlines()
    assert lines.count("# schema_version=1") == 1
    assert lines[1] == ("t,tau_plus,tau_minus,rate_plus,rate_minus,"
                        "survival_plus,survival_minus,asymmetry")
