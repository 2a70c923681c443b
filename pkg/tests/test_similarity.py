import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from metriclab import (
    InsufficientData,
    NonFiniteValue,
    ZeroDenominator,
    composition_check,
    composition_function,
    infinitesimal_defect,
    local_dilatation,
    local_ratio_profile,
    make_space,
    similarity_verdict,
)
from metriclab.similarity import RatioProfile, RatioRecord, relation_table
from metriclab.spaces import SPACE_FAMILIES

HOOK_DEFECT = (2 - math.sqrt(2)) / 2  # 0.2928932188134524


def _verdict(s1, s2, a, mode="point", **kw):
    return similarity_verdict(local_ratio_profile(make_space(s1), make_space(s2), a, mode=mode, **kw), 5e-3)


# -- ratio profiles ------------------------------------------------------------


def test_bilipschitz_ratio_tends_to_two():
    prof = local_ratio_profile(make_space("euclidean_line()"), make_space("bilipschitz_example()"), 0.5)
    last = prof.nonempty()[-1]
    assert last.min_ratio == pytest.approx(2.0, abs=1e-3)
    assert last.max_ratio == pytest.approx(2.0, abs=1e-3)
    v = similarity_verdict(prof)
    assert v.outcome == "fails"
    assert abs(v.liminf_estimate - 2.0) <= 5e-3 and abs(v.limsup_estimate - 2.0) <= 5e-3


def test_profile_radii_and_invariants():
    prof = local_ratio_profile(make_space("pseudohyperbolic_disk()"), make_space("bergman_disk()"), (0.2, -0.1), levels=8)
    radii = [r.radius for r in prof.records]
    assert all(b < a for a, b in zip(radii, radii[1:]))
    for r in prof.nonempty():
        assert 0 < r.min_ratio <= r.max_ratio


@pytest.mark.parametrize("family", [f for f in SPACE_FAMILIES if f != "discrete"])
def test_reflexivity(family):
    sp = make_space(f"{family}()")
    a = (0.0, 0.0) if family.startswith(("comb", "hook")) else sp.sample(np.random.default_rng(5), 1)[0]
    for prof, v in relation_table(sp, sp, a, r0=0.05, levels=6, directions=8):
        assert v.outcome == "holds", (family, prof.mode)
        if prof.mode != "defect":
            assert all(r.min_ratio == r.max_ratio == 1.0 for r in prof.nonempty())


def test_discrete_ball_is_degenerate():
    sp = make_space("discrete()")
    prof = local_ratio_profile(sp, sp, 0.5, r0=0.5, levels=4)
    assert prof.nonempty() == []
    with pytest.raises(InsufficientData):
        similarity_verdict(prof)


def test_truncated_and_circular_hold():
    assert _verdict("euclidean_line()", "truncated_euclidean()", 0.3).outcome == "holds"
    assert _verdict("euclidean_line()", "circular_interval()", 1.0).outcome == "holds"


def test_hook_relations():
    d1, d2 = "hook_taxi()", "hook_euclidean()"
    assert _verdict(d1, d2, (0, 0), "point").outcome == "holds"
    strong = _verdict(d1, d2, (0, 0), "pair")
    assert strong.outcome == "fails"
    assert strong.liminf_estimate == pytest.approx(math.sqrt(2) / 2, abs=5e-3)
    infin = _verdict(d1, d2, (0, 0), "infinitesimal")
    assert infin.outcome == "fails"
    assert infin.limsup_estimate == pytest.approx(HOOK_DEFECT, abs=5e-3)


def test_strong_implies_weaker_relations():
    # d_K = t sqrt(2 - t^2) of the pseudohyperbolic distance vs its sqrt(2) multiple
    cases = [
        ("euclidean_line()", "truncated_euclidean()", 0.3),
        ("pseudohyperbolic_disk(scale=sqrt(2))", "bergman_disk()", (0.1, 0.2)),
        ("euclidean_plane(scale=sqrt(2))", "gaussian()", (0.5, -0.5)),
    ]
    for s1, s2, a in cases:
        out = {p.mode: v.outcome for p, v in relation_table(make_space(s1), make_space(s2), a, levels=10, directions=8)}
        assert out["pair_in_ball"] == "holds", (s1, s2)
        assert out["defect"] == "holds" and out["point_vs_anchor"] == "holds"


def test_comb_distortion():
    prof = local_ratio_profile(make_space("comb_euclidean()"), make_space("comb_intrinsic()"), (0, 0), r0=0.5, levels=6)
    v = similarity_verdict(prof)
    assert v.outcome == "fails"
    assert v.liminf_estimate == pytest.approx(1.0, abs=5e-3)
    assert v.limsup_estimate == pytest.approx(math.sqrt(2), abs=5e-3)


@pytest.mark.parametrize("c", [0.5, 2.0])
def test_scale_covariance(c):
    s1, s2 = make_space("pseudohyperbolic_halfplane()"), make_space("bergman_halfplane()")
    a = (0.3, 1.2)
    base = local_ratio_profile(s1, s2, a, r0=0.1, levels=8, directions=8)
    scaled = local_ratio_profile(s1.scaled(c), s2.scaled(c), a, r0=0.1 * c, levels=8, directions=8)
    for r, q in zip(base.records, scaled.records):
        assert q.radius == c * r.radius
        assert (q.min_ratio, q.max_ratio, q.sample_count) == (r.min_ratio, r.max_ratio, r.sample_count)


def test_verdict_needs_four_records():
    recs = [RatioRecord(0.1 / 2**j, 1.0, 1.0, 4) for j in range(3)] + [RatioRecord(0.0125, math.nan, math.nan, 0)]
    with pytest.raises(InsufficientData):
        similarity_verdict(RatioProfile((0.0,), "point_vs_anchor", recs))


def test_verdict_inconclusive_when_unstable():
    # only the last record leaves the band
    vals = [1.0, 1.0, 1.0, 1.02]
    recs = [RatioRecord(0.1 / 2**j, v, v, 4) for j, v in enumerate(vals)]
    assert similarity_verdict(RatioProfile((0.0,), "point_vs_anchor", recs)).outcome == "inconclusive"


def test_verdict_json_keys():
    d = _verdict("euclidean_line()", "truncated_euclidean()", 0.3).to_dict()
    assert {"relation", "outcome", "liminf", "limsup"} <= set(d)


# -- defect and dilatation ---------------------------------------------------------


def test_defect_examples():
    d1, d2 = make_space("hook_taxi()"), make_space("hook_euclidean()")
    for u in (1e-3, 0.5, 7.0):
        assert infinitesimal_defect(d1, d2, (0, 0), (u, 0), (0, u)) == pytest.approx(HOOK_DEFECT, rel=1e-14)
    assert infinitesimal_defect(d1, d1, (0, 0), (1, 0), (0, 2)) == 0.0
    t = 0.01
    got = infinitesimal_defect(make_space("euclidean_line()"), make_space("bilipschitz_example()"), 0.0, t, 2 * t)
    assert got == pytest.approx(0.01, rel=1e-12)
    with pytest.raises(ZeroDenominator):
        infinitesimal_defect(d1, d2, (0, 0), (0, 0), (0, 0))


@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
def test_defect_symmetric(a, x, y):
    s1, s2 = make_space("euclidean_line()"), make_space("bilipschitz_example()")
    if a == x == y:
        return
    assert infinitesimal_defect(s1, s2, a, x, y) == infinitesimal_defect(s1, s2, a, y, x)


def test_dilatation_examples():
    hook = local_dilatation(make_space("hook_euclidean()"), make_space("hook_taxi()"), (0, 0))
    assert hook == pytest.approx(math.sqrt(2), abs=5e-3)
    assert hook <= math.sqrt(2) + 1e-12
    eu = make_space("euclidean_plane()")
    assert local_dilatation(eu, eu, (0.3, 0.4)) == 1.0
    with pytest.raises(ValueError):
        local_dilatation(eu, eu, (0, 0), pairs_per_level=8)


def test_comb_dilatation_exceeds_pointwise_limsup():
    # pairs on nearby teeth see the spine detour; the pair sup is larger than sqrt(2)
    dil = local_dilatation(make_space("comb_euclidean()"), make_space("comb_intrinsic()"), (0, 0), r0=0.5, levels=6)
    assert dil > math.sqrt(2)


# -- composition -----------------------------------------------------------------


@pytest.mark.parametrize(
    "name,params,Q",
    [
        ("bergman", {}, math.sqrt(2)),
        ("fock", {}, 1.0),
        ("polyfock", {"m": 3}, math.sqrt(3)),
        ("gaussian", {"sigma": 2.0}, 2 * math.sqrt(2)),
        ("paley_wiener", {}, 1.0),
    ],
)
def test_composition_Q(name, params, Q):
    rep = composition_check(composition_function(name, **params))
    assert rep.verdict == "holds"
    assert rep.Q_estimate == pytest.approx(Q, abs=1e-4)


def test_composition_square_fails():
    rep = composition_check(composition_function("square"))
    assert rep.Q_estimate < 1e-3
    assert rep.verdict == "fails"


def test_paley_wiener_lower_bound():
    rep = composition_check(composition_function("paley_wiener"))
    assert rep.lower_bound_C >= 0.5 - 1e-6


@pytest.mark.parametrize("name", ["bergman", "gaussian", "fock"])
def test_concave_lower_bound(name):
    f = composition_function(name)
    rep = composition_check(f)
    assert rep.concave and rep.monotone
    assert rep.lower_bound_C >= float(f(np.array([1.0]))[0]) - 1e-9


def test_composition_errors():
    with pytest.raises(NonFiniteValue), np.errstate(divide="ignore"):
        composition_check(lambda t: np.log(t))
    with pytest.raises(ValueError):
        composition_check(composition_function("identity"), grid_size=50)
    rep = composition_check(lambda t: t + 1.0)
    assert not rep.f0_zero and rep.verdict == "fails"
