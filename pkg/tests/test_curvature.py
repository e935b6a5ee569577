import numpy as np
import pytest
import sympy as sp

from extlorentz.connection import Placement, build_jet, jet_from_sample
from extlorentz.curvature import (
    continuity_residual,
    geometric_sources,
    residual_scale,
    ricci,
    riemann,
    symmetry_report,
)
from extlorentz.fields import FieldSample, ParticleParams, preset

import oracle
from conftest import PRESET_NAMES, grid_points, random_preset

TOL = 1e-9


def random_sample(rng, scale=1.0):
    return FieldSample(scale * rng.normal(size=3), scale * rng.normal(size=3),
                       scale * rng.normal(size=(4, 3)), scale * rng.normal(size=(4, 3)))


@pytest.mark.parametrize("placement", ["full", "alternative_full", "lorentz_only"])
def test_riemann_matches_symbolic_oracle(placement, rng):
    f = oracle.riemann_function(placement)
    worst = 0.0
    for _ in range(120):
        kappa = rng.uniform(-2, 2)
        pp = ParticleParams(q=kappa, m=1.0, c=1.0)
        s = random_sample(rng, scale=rng.choice([1e-3, 1.0, 50.0]))
        r = riemann(jet_from_sample(s, pp, placement))
        ref = f(kappa, s.fields(), s.field_derivatives())
        worst = max(worst, np.max(np.abs(r - ref)) / max(1e-300, np.max(np.abs(ref))))
    assert worst <= 1e-12


def test_zero_riemann_gives_zero_ricci():
    assert not np.any(ricci(np.zeros((4, 4, 4, 4), complex)))


def test_riemann_antisymmetric_in_last_pair(rng, unit_pp):
    for _ in range(20):
        r = riemann(jet_from_sample(random_sample(rng), unit_pp))
        assert np.max(np.abs(r + r.transpose(0, 1, 3, 2))) == 0


def test_uniform_e_trace(unit_pp):
    rep = symmetry_report(preset("uniform_E", e=(1, 0, 0)), np.zeros(4), unit_pp)
    assert rep.trace == pytest.approx(1.0, abs=1e-15)


def test_crossed_fields_mixed_sum(unit_pp):
    rep = symmetry_report(preset("crossed_EB", e=(1, 0, 0), b=(0, 1, 0)), np.zeros(4), unit_pp)
    assert rep.mixed[2] == pytest.approx(1.0, abs=1e-15)
    assert np.max(np.abs(rep.spatial)) <= 1e-15


def test_faraday_violation_shows_in_spatial_pair(unit_pp):
    ge = np.zeros((3, 4))
    ge[1, 1] = 1.0  # dE_y/dx
    rep = symmetry_report(preset("linear_gradient", grad_e=ge), np.zeros(4), unit_pp)
    assert rep.spatial[0] == pytest.approx(1.0, abs=1e-15)
    assert abs(rep.spatial[1]) == 0 and abs(rep.spatial[2]) == 0


def test_symbolic_closed_forms():
    """The three combinations reduce exactly to the field expressions."""
    trace, mixed, spatial = oracle.symbolic_combinations("full")
    k = oracle.KAPPA
    ex, ey, ez, bx, by, bz = oracle.FIELDS
    d = oracle.DERIVS
    e, b = sp.Matrix([ex, ey, ez]), sp.Matrix([bx, by, bz])
    de = lambda a, n: d[a][n]  # noqa: E731
    div_e = de(1, 0) + de(2, 1) + de(3, 2)
    assert sp.expand(trace - (k ** 2 * (e.dot(e) + b.dot(b)) + 2 * k * div_e)) == 0
    curl_b = [de(2, 5) - de(3, 4), de(3, 3) - de(1, 5), de(1, 4) - de(2, 3)]
    curl_e = [de(2, 2) - de(3, 1), de(3, 0) - de(1, 2), de(1, 1) - de(2, 0)]
    exb = e.cross(b)
    for i in range(3):
        assert sp.expand(mixed[i] - (k ** 2 * exb[i] + k * (curl_b[i] - de(0, i)))) == 0
    for n, comp in enumerate((2, 1, 0)):
        assert sp.expand(spatial[n] - k * (curl_e[comp] + de(0, 3 + comp))) == 0


@pytest.mark.parametrize("name", PRESET_NAMES)
@pytest.mark.parametrize("placement", ["full", "alternative_full"])
def test_identities_on_presets(name, placement, rng):
    model = random_preset(name, rng)
    pp = ParticleParams(q=rng.uniform(0.5, 2.0), m=1.0, c=1.0)
    for p in grid_points(rng):
        rep = symmetry_report(model, p, pp, placement)
        assert rep.residual_trace <= TOL * rep.scale
        assert abs(rep.trace.imag) <= 1e-12 * rep.scale
        assert np.max(rep.residual_mixed) <= TOL * rep.scale
        assert np.max(rep.residual_spatial) <= TOL * rep.scale
        assert np.max(np.abs(rep.mixed.imag)) <= 1e-12 * rep.scale
        assert np.max(np.abs(rep.spatial.imag)) <= 1e-12 * rep.scale
        if model.satisfies("faraday"):
            assert np.max(np.abs(rep.spatial)) <= TOL * rep.scale


@pytest.mark.parametrize("name", PRESET_NAMES)
def test_placement_equivalence(name, rng):
    model = random_preset(name, rng)
    pp = ParticleParams(q=1.3, m=1.0, c=1.0)
    for p in grid_points(rng, 10):
        a = symmetry_report(model, p, pp, Placement.FULL).to_records()
        b = symmetry_report(model, p, pp, Placement.ALTERNATIVE_FULL).to_records()
        for key in a:
            assert abs(a[key] - b[key]) <= 1e-12 * a["scale"], key


def test_residual_scale_floor(unit_pp):
    assert residual_scale(FieldSample([1e-6, 0, 0], [0, 0, 0]), unit_pp) == 1.0
    assert residual_scale(FieldSample([3, 0, 0], [0, 4, 0]), unit_pp) == 25.0


def test_large_field_residuals_are_relative(rng):
    pp = ParticleParams(q=1.0, m=1.0, c=1.0)
    model = random_preset("linear_gradient", rng)
    big = preset("crossed_EB", e=1e6 * np.array([1.0, 2.0, 0.5]), b=1e6 * np.array([0.2, -1, 3]))
    for m in (model, big):
        rep = symmetry_report(m, np.array([0.1, 0.7, -0.6, 0.9]), pp)
        assert rep.residual_trace <= TOL * rep.scale


def test_record_keys_are_stable(unit_pp):
    rec = symmetry_report(preset("uniform_E"), np.zeros(4), unit_pp).to_records()
    for key in ("trace_re", "trace_im", "mixed_1", "mixed_2", "mixed_3",
                "spatial_12", "spatial_31", "spatial_23", "residual_trace", "scale"):
        assert key in rec


def test_coulomb_singularity_propagates(unit_pp):
    from extlorentz.errors import SingularityError
    with pytest.raises(SingularityError):
        symmetry_report(preset("coulomb"), np.zeros(4), unit_pp)


# ----- sources and continuity


def test_sources_pure_e(unit_pp):
    src = geometric_sources(FieldSample([1, 0, 0], [0, 0, 0]), unit_pp)
    assert src.u == pytest.approx(1 / (8 * np.pi), rel=1e-15)
    assert src.rho == pytest.approx(-1 / (8 * np.pi), rel=1e-15)


def test_sources_zero_field(unit_pp):
    src = geometric_sources(FieldSample(np.zeros(3), np.zeros(3)), unit_pp)
    assert src.rho == 0 and not np.any(src.j)


def test_sources_poynting(unit_pp):
    src = geometric_sources(FieldSample([1, 0, 0], [0, 1, 0]), unit_pp)
    assert src.s == pytest.approx([0, 0, 1 / (4 * np.pi)], abs=1e-16)
    assert src.j == pytest.approx([0, 0, -1 / (4 * np.pi)], abs=1e-16)


def test_continuity_plane_wave(rng):
    pp = ParticleParams(q=1.0, m=1.0, c=1.0)
    model = random_preset("plane_wave", rng)
    for p in grid_points(rng):
        res = continuity_residual(model, p, pp)
        assert abs(res.residual) <= 1e-10 * max(1.0, res.scale)


def test_continuity_static_exact(unit_pp):
    res = continuity_residual(preset("crossed_EB", e=(1, 2, 3), b=(-1, 0.5, 2)), np.zeros(4),
                              unit_pp)
    assert res.residual == 0


@pytest.mark.parametrize("name", PRESET_NAMES)
def test_j_dot_e_vanishes(name, rng):
    pp = ParticleParams(q=1.0, m=1.0, c=1.0)
    model = random_preset(name, rng)
    for p in grid_points(rng, 10):
        res = continuity_residual(model, p, pp)
        assert abs(res.j_dot_e) <= 1e-14 * max(1e-300, res.je_scale) + 1e-300
