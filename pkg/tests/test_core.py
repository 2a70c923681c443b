import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from metriclab import (
    CarrierViolation,
    UnknownFamily,
    check_metric_axioms,
    custom_space,
    distance,
    make_space,
    open_ball_membership,
)
from metriclab.spaces import SPACE_FAMILIES
from metriclab.kernels import KERNEL_FAMILIES

ALL_FAMILIES = SPACE_FAMILIES + KERNEL_FAMILIES


def test_distance_examples():
    assert distance(make_space("euclidean_plane()"), (0, 0), (3, 4)) == 5.0
    # 2|1-3|/(1+3)
    assert distance(make_space("pseudolog_halfline()"), 1, 3) == 1.0
    assert distance(make_space("discrete()"), 0.2, 0.2) == 0.0


def test_distance_errors():
    with pytest.raises(CarrierViolation):
        distance(make_space("pseudolog_halfline()"), -1, 2)
    with pytest.raises(CarrierViolation):
        distance(make_space("pseudohyperbolic_disk()"), (1.0, 0.0), (0, 0))
    with pytest.raises(CarrierViolation):
        distance(make_space("euclidean_plane()"), 1.0, (0, 0))
    with pytest.raises(UnknownFamily):
        make_space("nosuch()")


def test_guard_band_on_strict_carriers():
    sp = make_space("pseudohyperbolic_halfplane()")
    assert not sp.in_carrier((0.0, 1e-13))
    assert sp.in_carrier((0.0, 1e-11))


def test_axioms_exact_metric():
    rep = check_metric_axioms(make_space("euclidean_line()"), [0.0, 1.0, 2.0], 1e-12)
    assert rep.passed


def test_axioms_bergman_disk_sample(rng):
    sp = make_space("bergman_disk()")
    r = 0.9 * np.sqrt(rng.uniform(size=20))
    th = rng.uniform(0, 2 * np.pi, 20)
    rep = check_metric_axioms(sp, np.column_stack([r * np.cos(th), r * np.sin(th)]), 1e-10)
    assert rep.triangle_ok and rep.passed


def test_axioms_corrupted_square_distance():
    bad = custom_space("square", lambda X, Y: (X[:, 0] - Y[:, 0]) ** 2)
    rep = check_metric_axioms(bad, [0.0, 1.0, 2.0], 1e-12)
    assert not rep.triangle_ok
    assert rep.triangle_witness == (0.0, 1.0, 2.0)
    assert rep.triangle_worst == pytest.approx(2.0)
    assert rep.identity_ok and rep.symmetry_ok


def test_axioms_reject_bad_input():
    with pytest.raises(ValueError):
        check_metric_axioms(make_space("euclidean_line()"), [0.0], 0.0)
    with pytest.raises(CarrierViolation):
        check_metric_axioms(make_space("pseudolog_halfline()"), [1.0, -2.0], 1e-12)


def test_open_ball_membership():
    assert open_ball_membership(make_space("euclidean_line()"), 0.0, 1.0, 0.5)
    assert open_ball_membership(make_space("circular_interval()"), 0.01, 0.1, 2 * math.pi - 0.01)
    assert not open_ball_membership(make_space("discrete()"), 0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        open_ball_membership(make_space("euclidean_line()"), 0.0, 0.0, 0.5)


def test_scaled_space():
    sp = make_space("euclidean_plane(scale=2)")
    assert sp.distance((0, 0), (3, 4)) == 10.0
    assert make_space("euclidean_plane()").scaled(2).distance((0, 0), (3, 4)) == 10.0


@pytest.mark.parametrize("family", ALL_FAMILIES)
def test_identity_symmetry_triangle_per_family(family):
    sp = make_space(f"{family}()")
    rng = np.random.default_rng(hash(family) % 2**32)
    X, Y, Z = (sp.sample(rng, 10_000) for _ in range(3))
    assert np.all(sp.distances(X, X) == 0.0)
    assert np.array_equal(sp.distances(X, Y), sp.distances(Y, X))
    dxy, dyz, dxz = sp.distances(X, Y), sp.distances(Y, Z), sp.distances(X, Z)
    assert np.all(dxy >= 0)
    excess = dxz - dxy - dyz
    assert np.nanmax(np.where(np.isfinite(excess), excess, -1.0)) <= (1e-10 if family in KERNEL_FAMILIES else 1e-12)


@given(st.floats(0, 1e300), st.floats(0, 1e300), st.floats(0, 1e300))
def test_extended_length_arithmetic(a, b, c):
    assert a + math.inf == math.inf
    assert max(a, math.inf) == math.inf
    if b <= c:
        assert max(a, b) <= max(a, c)
