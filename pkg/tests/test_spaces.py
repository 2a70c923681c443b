import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from metriclab import BadParams, CarrierViolation, UnknownFamily, closed_form_intrinsic, make_space, parse_spec
from metriclab.kernels import KernelSpec
from metriclab.spaces import SpaceSpec

coord = st.floats(-3, 3, allow_nan=False)
height = st.floats(0.05, 5, allow_nan=False)
unit = st.floats(0, 1, allow_nan=False)
seg = st.floats(1, 2, allow_nan=False)


def test_make_space_examples():
    assert make_space("pseudohyperbolic_halfplane()").distance(1j, 2j) == pytest.approx(1 / 3, abs=1e-15)
    assert make_space("comb_euclidean()").distance((0, 0), (0.5, 0.5)) == pytest.approx(math.sqrt(2) / 2, abs=1e-15)
    assert make_space("comb_intrinsic()").distance((0, 0), (0.5, 0.5)) == 1.0


def test_make_space_errors():
    with pytest.raises(BadParams):
        make_space(SpaceSpec("pseudolog_segment", {"a": 2.0, "b": 1.0}))
    with pytest.raises(BadParams):
        make_space("truncated_euclidean(cap=1, bogus=2)")
    with pytest.raises(UnknownFamily):
        make_space(SpaceSpec("hyperbolic_ball"))
    with pytest.raises(BadParams):
        make_space("comb_euclidean(q_max=2.5)")


def test_closed_form_examples():
    assert closed_form_intrinsic(make_space("pseudolog_halfline()"), 1, math.e) == pytest.approx(1.0, abs=1e-15)
    assert closed_form_intrinsic(make_space("sqrt_line()"), 0, 1) == math.inf
    assert closed_form_intrinsic(make_space("discrete()"), 0, 1) == math.inf
    assert closed_form_intrinsic(make_space("sqrt_line()"), 0.3, 0.3) == 0.0
    # (1/2) log((1 + 1/2)/(1 - 1/2))
    assert closed_form_intrinsic(make_space("pseudohyperbolic_disk()"), 0j, 0.5 + 0j) == pytest.approx(0.5 * math.log(3), abs=1e-15)
    assert closed_form_intrinsic(make_space("pseudolog_segment()"), 1.0, 2.0) == pytest.approx(math.log(2), abs=1e-15)
    assert closed_form_intrinsic(make_space("comb_euclidean()"), (0, 0), (0.5, 0.5)) == 1.0


def test_closed_form_unknown_and_carrier():
    sp = make_space("euclidean_line()")
    assert closed_form_intrinsic(sp, 0, 1) == 1.0
    with pytest.raises(CarrierViolation):
        closed_form_intrinsic(make_space("pseudolog_halfline()"), 0, 1)


def _mp_halfplane(z, w):
    z, w = mpmath.mpc(*z), mpmath.mpc(*w)
    a, b = abs(w - mpmath.conj(z)), abs(w - z)
    return mpmath.log((a + b) / (a - b)) / 2


def _mp_disk(z, w):
    z, w = mpmath.mpc(*z), mpmath.mpc(*w)
    r = abs((w - z) / (1 - w * mpmath.conj(z)))
    return mpmath.log((1 + r) / (1 - r)) / 2


@given(coord, height, coord, height)
def test_halfplane_hyperbolic_matches_high_precision(x1, y1, x2, y2):
    mpmath.mp.dps = 40
    got = closed_form_intrinsic(make_space("pseudohyperbolic_halfplane()"), (x1, y1), (x2, y2))
    want = float(_mp_halfplane((x1, y1), (x2, y2)))
    assert got == pytest.approx(want, rel=1e-12, abs=1e-15)


@given(st.floats(0, 0.95), st.floats(0, 2 * math.pi), st.floats(0, 0.95), st.floats(0, 2 * math.pi))
def test_disk_hyperbolic_matches_high_precision(r1, t1, r2, t2):
    mpmath.mp.dps = 40
    z, w = (r1 * math.cos(t1), r1 * math.sin(t1)), (r2 * math.cos(t2), r2 * math.sin(t2))
    got = closed_form_intrinsic(make_space("pseudohyperbolic_disk()"), z, w)
    want = float(_mp_disk(z, w))
    assert got == pytest.approx(want, rel=1e-11, abs=1e-15)


@given(coord, height, coord, height)
def test_rho_halfplane_matches_definition_and_projection(x1, y1, x2, y2):
    sp = make_space("pseudohyperbolic_halfplane()")
    z, w = complex(x1, y1), complex(x2, y2)
    d = sp.distance(z, w)
    if z != w:
        assert d == pytest.approx(abs((w - z) / (w - z.conjugate())), rel=1e-12)
    assert d >= sp.distance(complex(0, y1), complex(0, y2)) - 1e-15


@given(seg, seg)
def test_pseudolog_segment_bilipschitz(x, y):
    d = make_space("pseudolog_segment()").distance(x, y)
    assert abs(x - y) / 2 <= d <= abs(x - y) + 1e-15


@given(unit, unit)
def test_bilipschitz_example_bounds(x, y):
    d = make_space("bilipschitz_example()").distance(x, y)
    assert abs(x - y) <= d + 1e-15
    assert d <= 3 * abs(x - y) + 1e-15


@given(st.integers(1, 40), unit, st.integers(1, 40), unit, st.booleans(), st.booleans())
def test_comb_intrinsic_dominates_euclidean(q, y, p, v, a_spine, b_spine):
    a = (1.0 / q, 0.0 if a_spine else y)
    b = (1.0 / p, 0.0 if b_spine else v)
    dc = make_space("comb_euclidean()").distance(a, b)
    di = make_space("comb_intrinsic()").distance(a, b)
    assert di >= dc - 1e-15


@given(st.floats(0, 10), st.floats(0, 10), st.booleans(), st.booleans())
def test_hook_distances(u, s, a_on_x, b_on_x):
    a = (u, 0.0) if a_on_x else (0.0, u)
    b = (s, 0.0) if b_on_x else (0.0, s)
    d1 = make_space("hook_taxi()").distance(a, b)
    d2 = make_space("hook_euclidean()").distance(a, b)
    assert d2 <= d1 + 1e-15
    if a_on_x == b_on_x:
        assert d1 == d2 == abs(u - s)


def test_comb_membership():
    sp = make_space("comb_euclidean(q_max=10)")
    assert sp.in_carrier((1 / 3, 0.5))
    assert sp.in_carrier((0.77, 0.0))
    assert not sp.in_carrier((0.3, 0.5))
    assert not sp.in_carrier((1 / 11, 0.5))
    assert not sp.in_carrier((0.5, 1.5))


def test_circular_distance_wraps():
    sp = make_space("circular_interval()")
    assert sp.distance(0.01, 2 * math.pi - 0.01) == pytest.approx(2 * math.sin(0.01), rel=1e-9)
    with pytest.raises(CarrierViolation):
        sp.distance(0.0, 1.0)


def test_truncated_cap():
    sp = make_space("truncated_euclidean(cap=0.5)")
    assert sp.distance(0, 3) == 0.5
    assert sp.distance(0, 0.25) == 0.25


def test_parse_spec_forms():
    assert parse_spec("euclidean_line") == SpaceSpec("euclidean_line", {})
    assert parse_spec("pseudolog_segment(a=1, b=2*2)") == SpaceSpec("pseudolog_segment", {"a": 1.0, "b": 4.0})
    assert parse_spec("gaussian(sigma=1.0,dim=2)") == KernelSpec("gaussian", {"sigma": 1.0, "dim": 2.0})
    assert make_space("pseudohyperbolic_disk(scale=sqrt(2))").scale == math.sqrt(2)
    assert make_space("polyfock(m=3)").params == {"m": 3, "alpha": 1}
    for bad in ("gaussian(sigma)", "gaussian(sigma=__import__('os'))", "gaussian(bogus=1)", "euclidean_line(a=1,a=2)", "(1)"):
        with pytest.raises(BadParams):
            parse_spec(bad)
    with pytest.raises(UnknownFamily):
        parse_spec("nosuch(a=1)")
