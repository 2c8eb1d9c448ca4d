"""Tests for field evaluation over the Sommerfeld contours.

The strongest oracles are the boundary values: the integral representation
must reproduce e^{-i*k1*rho} on theta = 2*pi and vanish on the other wall,
with the total field matching e^{-i*k2*rho} there instead.  These are exact
consequences of the kernel residue structure and hold to quadrature
precision.
"""

import cmath
import math
import os

import numpy as np
import pytest

from wedgebvp.core import PI, PolarPoint, ProblemParams
from wedgebvp.contour import decomposition_contour, sommerfeld_double_loop
from wedgebvp.errors import DomainError, GeometryError, RayError
from wedgebvp.kernel import build_engine
from wedgebvp.solver import (
    FieldSample,
    GridSpec,
    U_total,
    field_csv,
    grid_eval,
    origin_probe,
    u1_decomposed,
    u1_field,
    u2_field,
    u_plane,
)

PARAMS = ProblemParams(omega=0.5 + 1j, phi=7 * PI / 4, k1=1.0, k2=2.0)


@pytest.fixture(scope="module")
def setup():
    e1 = build_engine(PARAMS, k=PARAMS.k1)
    e2 = build_engine(PARAMS, k=PARAMS.k2)
    cont = sommerfeld_double_loop(PARAMS, rho_min=0.25)
    dec = decomposition_contour(PARAMS, rho_min=0.25)
    return e1, e2, cont, dec


def test_u1_boundary_values(setup):
    e1, _, cont, _ = setup
    # The k2 = 2 branch point widens the loop, and the vertical links then
    # amplify roundoff like e^{rho*cosh(b)}; radii above about 1 lose the
    # certificate for this parameter set, so the sweep stays below that.
    for rho in (0.25, 0.7, 1.0):
        lit = u1_field(PolarPoint(rho, 2.0 * PI), e1, cont)
        assert abs(lit.value - cmath.exp(-1j * PARAMS.k1 * rho)) < 1e-9
        dark = u1_field(PolarPoint(rho, 2.0 * PI - PARAMS.phi), e1, cont)
        assert abs(dark.value) < 1e-9


def test_total_field_boundary_values(setup):
    e1, e2, cont, _ = setup
    for rho in (0.5, 1.0):
        top = U_total(PolarPoint(rho, 2.0 * PI), e1, e2, cont)
        assert abs(top.value - cmath.exp(-1j * PARAMS.k1 * rho)) < 1e-9
        bot = U_total(PolarPoint(rho, 2.0 * PI - PARAMS.phi), e1, e2, cont)
        assert abs(bot.value - cmath.exp(-1j * PARAMS.k2 * rho)) < 1e-9


def test_u2_is_u1_at_reflected_angle(setup):
    _, e2, cont, _ = setup
    pt = PolarPoint(0.8, 1.9 * PI)
    mirrored = PolarPoint(0.8, -1.9 * PI + 4.0 * PI - PARAMS.phi)
    a = u2_field(pt, e2, cont)
    b = u1_field(mirrored, e2, cont)
    assert a.value == b.value
    assert a.point is pt


def test_u_plane_exact_values(setup):
    e1, _, _, _ = setup
    rho = 1.3
    # At theta = 2*pi the plane wave reduces to the incoming trace.
    assert abs(u_plane(PolarPoint(rho, 2.0 * PI), e1)
               - cmath.exp(-1j * PARAMS.k1 * rho)) < 1e-14
    # At theta = 3*pi/2 the phase is i*omega*cosh(p1).
    want = cmath.exp(1j * e1.omega * rho * cmath.cosh(e1.branch.p1))
    assert abs(u_plane(PolarPoint(rho, 1.5 * PI), e1) - want) < 1e-14


def test_decomposed_matches_full_contour(setup):
    e1, _, cont, dec = setup
    for theta in (1.9 * PI, 1.62 * PI, 1.48 * PI, 1.3 * PI):
        pt = PolarPoint(1.0, theta)
        a = u1_field(pt, e1, cont).value
        b = u1_decomposed(pt, e1, dec).value
        assert abs(a - b) < 1e-8


def test_decomposed_near_ray_pole_subtraction(setup):
    # Within 0.15 of the crossing angle the moving pole hugs the upper curve
    # and the pole-subtracted path is taken; agreement must survive it.
    e1, _, cont, dec = setup
    for theta in (1.5 * PI + 0.02, 1.5 * PI - 0.02):
        pt = PolarPoint(1.0, theta)
        a = u1_field(pt, e1, cont).value
        b = u1_decomposed(pt, e1, dec).value
        assert abs(a - b) < 1e-8


def test_diffracted_jump_bookkeeping(setup):
    # The diffracted part u_d jumps by exactly -u_p across theta = 3*pi/2,
    # which is what keeps u1 = u_d + u_p * 1{theta > 3*pi/2} continuous.
    e1, _, _, dec = setup
    rho = 1.0
    d = 1e-4
    hi = u1_decomposed(PolarPoint(rho, 1.5 * PI + d), e1, dec).value \
        - u_plane(PolarPoint(rho, 1.5 * PI + d), e1)
    lo = u1_decomposed(PolarPoint(rho, 1.5 * PI - d), e1, dec).value
    up = u_plane(PolarPoint(rho, 1.5 * PI), e1)
    assert abs((hi - lo) + up) < 1e-3 * abs(up)


def test_ray_requires_principal_value(setup):
    e1, _, cont, dec = setup
    pt = PolarPoint(1.0, 1.5 * PI)
    with pytest.raises(RayError):
        u1_decomposed(pt, e1, dec)
    pv = u1_decomposed(pt, e1, dec, pv=True).value
    full = u1_field(pt, e1, cont).value
    assert abs(pv - full) < 1e-4


def test_field_rejects_point_outside_wedge(setup):
    e1, _, cont, _ = setup
    with pytest.raises(DomainError):
        u1_field(PolarPoint(1.0, 0.1), e1, cont)


def test_truncation_certificate_blocks_tiny_rho(setup):
    e1, _, cont, _ = setup
    with pytest.raises(GeometryError):
        u1_field(PolarPoint(1e-6, 1.9 * PI), e1, cont)


def test_refinement_error_estimate_is_small(setup):
    e1, _, cont, _ = setup
    s = u1_field(PolarPoint(1.0, 1.8 * PI), e1, cont, check=True)
    assert s.est_quad_error <= e1.tol.id_tol
    s0 = u1_field(PolarPoint(1.0, 1.8 * PI), e1, cont, check=False)
    assert s0.est_quad_error == 0.0
    assert abs(s.value - s0.value) < 1e-10


def test_grid_spec_spacing():
    spec = GridSpec(0.1, 10.0, 5, 1.5 * PI, 2.0 * PI, 3, log_rho=True)
    r = spec.rho_values()
    assert r[0] == pytest.approx(0.1) and r[-1] == pytest.approx(10.0)
    assert np.allclose(np.diff(np.log(r)), np.diff(np.log(r))[0])
    lin = GridSpec(0.1, 10.0, 5, 1.5 * PI, 2.0 * PI, 3)
    assert np.allclose(np.diff(lin.rho_values()), np.diff(lin.rho_values())[0])


def test_grid_eval_order_and_consistency(setup):
    e1, _, cont, _ = setup
    spec = GridSpec(0.5, 1.5, 3, 1.6 * PI, 1.9 * PI, 2)
    samples = grid_eval(spec, e1, cont, check=False)
    assert len(samples) == 6
    # Row-major: theta outer, rho inner.
    assert [s.point.theta for s in samples[:3]] == [1.6 * PI] * 3
    assert samples[0].point.rho < samples[1].point.rho < samples[2].point.rho
    direct = u1_field(samples[4].point, e1, cont, check=False)
    assert samples[4].value == direct.value


def test_grid_eval_total_field_and_errors(setup):
    e1, e2, cont, _ = setup
    spec = GridSpec(1e-7, 1.0, 2, 1.7 * PI, 1.7 * PI, 1)
    samples = grid_eval(spec, e1, cont, engine2=e2, check=False)
    # The uncertified tiny radius is recorded as an error sample, not raised.
    assert samples[0].method == "error:GeometryError"
    assert math.isnan(samples[0].value.real)
    want = U_total(samples[1].point, e1, e2, cont, check=False).value
    assert samples[1].value == want


def test_grid_eval_thread_determinism(setup, monkeypatch):
    e1, _, cont, _ = setup
    spec = GridSpec(0.5, 1.0, 2, 1.6 * PI, 1.9 * PI, 3)
    serial = grid_eval(spec, e1, cont, check=False)
    monkeypatch.setenv("WEDGE_THREADS", "4")
    threaded = grid_eval(spec, e1, cont, check=False)
    assert [s.value for s in serial] == [s.value for s in threaded]


def test_field_csv_roundtrip(tmp_path, setup):
    e1, _, cont, _ = setup
    spec = GridSpec(0.5, 1.0, 2, 1.7 * PI, 1.8 * PI, 2)
    samples = grid_eval(spec, e1, cont, check=False)
    path = tmp_path / "field.csv"
    field_csv(samples, path, PARAMS, timestamp="T0")
    lines = path.read_text().splitlines()
    assert lines[0] == "# timestamp: T0"
    assert lines[1].startswith("# params: {")
    assert lines[2] == "rho,theta,re_u,im_u,abs_u,method,est_err"
    assert len(lines) == 3 + len(samples)
    first = lines[3].split(",")
    assert float(first[0]) == samples[0].point.rho
    assert complex(float(first[2]), float(first[3])) == samples[0].value


def test_origin_probe_gradient_scaling(setup):
    e1, _, _, _ = setup
    val, slope, detail = origin_probe(e1, 1.8 * PI)
    assert -1.3 < slope < -0.7
    assert detail["ladder"] == [1e-2, 1e-3, 1e-4]
    # The field itself approaches a finite limit at the tip.
    u = detail["u_values"]
    assert abs(u[-1] - u[-2]) < 0.1 * max(1e-12, abs(u[-1]))


def test_origin_probe_rejects_bad_ladder(setup):
    e1, _, _, _ = setup
    with pytest.raises(DomainError):
        origin_probe(e1, 1.8 * PI, rho_ladder=(1e-3, 1e-2))


def test_field_sample_record(setup):
    e1, _, cont, _ = setup
    s = u1_field(PolarPoint(1.0, 1.8 * PI), e1, cont, check=False)
    assert isinstance(s, FieldSample)
    assert s.method == "FullContour"
