"""Canned example scenarios for ``metriclab reproduce``.

Each scenario recomputes one closed-form or limit statement and compares it
with the expected value. They share the fixed seeded point sets used by the
acceptance tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import check_metric_axioms
from .intrinsic import EstimatorConfig, estimate_intrinsic, relative_gap, verify_theorem_instance
from .kernels import KERNEL_FAMILIES, KernelSpec, gram_min_eigenvalue, make_kernel
from .paths import DIVERGED, Partition, Path, cover_partition, cover_violations, length_profile, polygonal_length, straight_path
from .similarity import (
    composition_check,
    composition_function,
    infinitesimal_defect,
    local_dilatation,
    local_ratio_profile,
    similarity_verdict,
)
from .spaces import closed_form_intrinsic, make_space

PAIR_SEED = 2024


def halfplane_pairs(n: int = 10, seed: int = PAIR_SEED) -> list:
    """Seeded pairs in {|Re z| <= 2, 0.2 <= Im z <= 3}."""
    rng = np.random.default_rng(seed)
    z = np.column_stack([rng.uniform(-2, 2, 2 * n), rng.uniform(0.2, 3, 2 * n)])
    return [(z[2 * i], z[2 * i + 1]) for i in range(n)]


def disk_pairs(n: int = 10, seed: int = PAIR_SEED, radius: float = 0.8) -> list:
    """Seeded pairs uniform in {|z| <= radius}."""
    rng = np.random.default_rng(seed)
    r = radius * np.sqrt(rng.uniform(0, 1, 2 * n))
    th = rng.uniform(0, 2 * np.pi, 2 * n)
    z = np.column_stack([r * np.cos(th), r * np.sin(th)])
    return [(z[2 * i], z[2 * i + 1]) for i in range(n)]


def random_R(rng: np.random.Generator) -> Callable[[float], float]:
    """A positive piecewise-smooth radius function on [0, 1] with random pieces."""
    k = int(rng.integers(1, 6))
    cuts = np.sort(rng.uniform(0, 1, k - 1))
    base = np.exp(rng.uniform(np.log(1e-3), np.log(0.5), k))
    amp = rng.uniform(0, 0.9, k)
    freq = rng.uniform(0, 30, k)
    phase = rng.uniform(0, 2 * np.pi, k)

    def R(t: float) -> float:
        i = int(np.searchsorted(cuts, t, side="right"))
        return float(base[i] * (1.0 + amp[i] * math.sin(freq[i] * t + phase[i])))

    return R


@dataclass
class ScenarioResult:
    id: str
    passed: bool
    lines: list = field(default_factory=list)
    data: dict = field(default_factory=dict)


def _row(label: str, got, want, ok: bool) -> str:
    fmt = lambda v: f"{v:.9g}" if isinstance(v, float) else str(v)
    return f"{label}: got {fmt(got)} expected {fmt(want)} [{'ok' if ok else 'FAIL'}]"


def _pseudolog(cfg):
    sp = make_space("pseudolog_halfline()")
    res = ScenarioResult("pseudolog_intrinsic", True)
    for x, y in [(1.0, 2.0), (1.0, math.e), (0.5, 4.0)]:
        est = estimate_intrinsic(sp, x, y, cfg)
        want = abs(math.log(x) - math.log(y))
        ok = relative_gap(est.upper_bound, want) < 1e-4
        res.passed &= ok
        res.lines.append(_row(f"({x:g}, {y:.9g})", est.upper_bound, want, ok))
    return res


def _theorem(name, s1, s2, pairs, tol):
    def run(cfg):
        rep = verify_theorem_instance(make_space(s1), make_space(s2), pairs(), cfg, tol)
        res = ScenarioResult(name, rep.passed, data=rep.to_dict())
        for r in rep.rows:
            res.lines.append(_row(str(r.pair), r.est1, r.est2, r.passed) + f" gap {r.rel_gap:.3g}")
        return res

    return run


def _sqrt_profile(cfg):
    sp = make_space("sqrt_line()")
    prof = dict(length_profile(straight_path(sp, 0.0, 1.0), 6))
    res = ScenarioResult("sqrt_divergence", True)
    for m in (4, 16, 64):
        ok = abs(prof[m + 1] - math.sqrt(m)) <= 1e-12
        res.passed &= ok
        res.lines.append(_row(f"S at m={m}", prof[m + 1], math.sqrt(m), ok))
    est = estimate_intrinsic(sp, 0.0, 1.0, cfg)
    res.passed &= est.status == DIVERGED
    res.lines.append(_row("intrinsic status", est.status, DIVERGED, est.status == DIVERGED))
    return res


def _divergent_intrinsics(cfg):
    res = ScenarioResult("intrinsic_divergence", True)
    for spec, x, y in [("sqrt_line()", 0.0, 1.0), ("discrete()", 0.0, 1.0), ("sobolev_green()", 0.25, 0.75), ("min_kernel()", 0.25, 1.0)]:
        est = estimate_intrinsic(make_space(spec), x, y, cfg)
        ok = est.status == DIVERGED and math.isinf(est.upper_bound)
        res.passed &= ok
        res.lines.append(_row(spec, est.status, DIVERGED, ok))
    return res


def _verdict_case(name, s1, s2, a, mode, outcome, lo=None, hi=None, r0=0.1, levels=12):
    def run(cfg):
        prof = local_ratio_profile(make_space(s1), make_space(s2), a, r0, levels, mode=mode)
        v = similarity_verdict(prof, 5e-3)
        ok = v.outcome == outcome
        lines = [_row(f"{v.relation} at {a}", v.outcome, outcome, v.outcome == outcome)]
        if lo is not None:
            good = abs(v.liminf_estimate - lo) <= 5e-3
            ok &= good
            lines.append(_row("liminf", v.liminf_estimate, lo, good))
        if hi is not None:
            good = abs(v.limsup_estimate - hi) <= 5e-3
            ok &= good
            lines.append(_row("limsup", v.limsup_estimate, hi, good))
        return ScenarioResult(name, ok, lines, {"profile": prof.to_dict(), "verdict": v.to_dict()})

    return run


def _hook_relations(cfg):
    d1, d2 = make_space("hook_taxi()"), make_space("hook_euclidean()")
    res = ScenarioResult("hook_relations", True)
    want = {"point_vs_anchor": "holds", "pair_in_ball": "fails", "defect": "fails"}
    for mode, outcome in want.items():
        v = similarity_verdict(local_ratio_profile(d1, d2, (0.0, 0.0), mode=mode), 5e-3)
        ok = v.outcome == outcome
        res.passed &= ok
        res.lines.append(_row(v.relation, v.outcome, outcome, ok))
    v = similarity_verdict(local_ratio_profile(d1, d2, (0.0, 0.0), mode="pair"), 5e-3)
    ok = abs(v.liminf_estimate - math.sqrt(2) / 2) <= 5e-3
    res.passed &= ok
    res.lines.append(_row("pair liminf", v.liminf_estimate, math.sqrt(2) / 2, ok))
    u = 0.01
    dfc = infinitesimal_defect(d1, d2, (0, 0), (u, 0), (0, u))
    ok = abs(dfc - (2 - math.sqrt(2)) / 2) < 1e-12
    res.passed &= ok
    res.lines.append(_row("defect at (u,0),(0,u)", dfc, (2 - math.sqrt(2)) / 2, ok))
    dil = local_dilatation(d2, d1, (0.0, 0.0))
    ok = abs(dil - math.sqrt(2)) <= 5e-3
    res.passed &= ok
    res.lines.append(_row("dilatation euclidean->taxi", dil, math.sqrt(2), ok))
    return res


def composition_cases() -> list:
    """(label, name, params, expected Q, concave per the corollary)."""
    cases = [("bergman", "bergman", {}, math.sqrt(2), True)]
    cases += [(f"gaussian sigma={s:g}", "gaussian", {"sigma": s}, math.sqrt(2) * s, True) for s in (0.5, 1.0, 2.0)]
    cases += [("fock", "fock", {}, 1.0, True)]
    cases += [(f"polyfock m={m}", "polyfock", {"m": m}, math.sqrt(m), m == 1) for m in (1, 2, 3)]
    cases += [("paley_wiener rescaled", "paley_wiener", {}, 1.0, False)]
    return cases


def _composition(cfg):
    res = ScenarioResult("composition_constants", True)
    for label, name, params, Q, concave in composition_cases():
        f = composition_function(name, **params)
        rep = composition_check(f)
        ok = abs(rep.Q_estimate - Q) <= 1e-4 and rep.verdict == "holds"
        if concave:
            ok &= rep.lower_bound_C >= float(f(1.0)) - 1e-9
        res.passed &= ok
        res.lines.append(_row(f"{label} Q", rep.Q_estimate, Q, ok) + f" C={rep.lower_bound_C:.9g}")
    return res


def _cover(cfg):
    rng = np.random.default_rng(cfg.seed)
    bad = 0
    for _ in range(1000):
        R = random_R(rng)
        theta = float(rng.uniform(0.05, 0.95))
        bad += len(cover_violations(R, cover_partition(R, 0.0, 1.0, theta)))
    return ScenarioResult("cover_lemma", bad == 0, [_row("violations over 1000 radius functions", bad, 0, bad == 0)])


def _kernels(cfg):
    rng = np.random.default_rng(cfg.seed)
    res = ScenarioResult("kernel_sanity", True)
    for fam in KERNEL_FAMILIES:
        kern = make_kernel(KernelSpec(fam))
        sp = make_space(f"{fam}()")
        ev = gram_min_eigenvalue(kern, kern.sampler(rng, 8))
        X, Y, Z = (sp.sample(rng, 10_000) for _ in range(3))
        worst = float(np.max(sp.distances(X, Z) - sp.distances(X, Y) - sp.distances(Y, Z)))
        ok = ev >= -1e-10 and worst <= 1e-10
        res.passed &= ok
        res.lines.append(f"{fam}: min eigenvalue {ev:.9g}, worst triangle excess {worst:.3g} [{'ok' if ok else 'FAIL'}]")
    sz, disk = make_space("szego_disk()"), make_space("pseudohyperbolic_disk()")
    X, Y = sz.sample(rng, 1000), sz.sample(rng, 1000)
    dev = float(np.max(np.abs(sz.distances(X, Y) - disk.distances(X, Y))))
    ok = dev <= 1e-12
    res.passed &= ok
    res.lines.append(_row("szego vs pseudohyperbolic max deviation", dev, 0.0, ok))
    return res


MONOTONE_SPACES = ("pseudohyperbolic_halfplane()", "pseudohyperbolic_disk()", "pseudolog_halfline()", "sqrt_line()", "bergman_disk()", "gaussian(sigma=1,dim=2)")


def refinement_instances(rng: np.random.Generator, count: int = 1000):
    """Yield (space, path, P, Q) with P a subset of Q, on random polylines."""
    spaces = [make_space(s) for s in MONOTONE_SPACES]
    for i in range(count):
        sp = spaces[i % len(spaces)]
        pts = sp.sample(rng, int(rng.integers(2, 6)))
        path = Path(sp, pts, "ambient_linear")
        inner = np.sort(rng.uniform(0, 1, int(rng.integers(0, 12))))
        P = np.unique(np.concatenate([[0.0], inner, [1.0]]))
        extra = rng.uniform(0, 1, int(rng.integers(1, 12)))
        Q = np.unique(np.concatenate([P, extra]))
        yield sp, path, Partition(P), Partition(Q)


def _monotone(cfg):
    rng = np.random.default_rng(cfg.seed)
    bad = sum(polygonal_length(path, Q) < polygonal_length(path, P) for _, path, P, Q in refinement_instances(rng))
    return ScenarioResult("refinement_monotonicity", bad == 0, [_row("instances with S(P) > S(Q)", bad, 0, bad == 0)])


def _axioms(cfg):
    sp = make_space("bergman_disk()")
    rep = check_metric_axioms(sp, sp.sample(np.random.default_rng(cfg.seed), 20), 1e-10)
    return ScenarioResult("bergman_axioms", rep.passed, [_row("all axioms", rep.passed, True, rep.passed)], rep.to_dict())


def _closed(name, spec, x, y, want, tol=1e-12):
    def run(cfg):
        got = closed_form_intrinsic(make_space(spec), x, y)
        ok = (math.isinf(want) and got == want) or abs(got - want) <= tol
        return ScenarioResult(name, ok, [_row(f"{spec} d*({x}, {y})", got, want, ok)])

    return run


def _comb_length(cfg):
    sp = make_space("comb_euclidean()")
    est = estimate_intrinsic(sp, (0.0, 0.0), (0.5, 0.5), cfg)
    ok = abs(est.upper_bound - 1.0) < 1e-9
    return ScenarioResult("comb_intrinsic", ok, [_row("d*((0,0),(1/2,1/2))", est.upper_bound, 1.0, ok)])


SCENARIOS = {
    "pseudolog_intrinsic": ("pseudologarithmic distance on the halfline: d* = |log x - log y|", _pseudolog),
    "hyperbolic_halfplane": (
        "pseudohyperbolic halfplane: estimated d* vs the hyperbolic distance",
        _theorem("hyperbolic_halfplane", "pseudohyperbolic_halfplane()", "pseudohyperbolic_halfplane()", halfplane_pairs, 1e-2),
    ),
    "hyperbolic_disk": (
        "pseudohyperbolic disk: estimated d* vs the hyperbolic distance",
        _theorem("hyperbolic_disk", "pseudohyperbolic_disk()", "pseudohyperbolic_disk()", disk_pairs, 1e-2),
    ),
    "bergman_disk": (
        "Bergman kernel on the disk: d_K* = sqrt(2) rho_D*",
        _theorem("bergman_disk", "bergman_disk()", "pseudohyperbolic_disk(scale=sqrt(2))", disk_pairs, 2e-2),
    ),
    "bergman_halfplane": (
        "Bergman kernel on the halfplane: d_K* = sqrt(2) rho_H*",
        _theorem("bergman_halfplane", "bergman_halfplane()", "pseudohyperbolic_halfplane(scale=sqrt(2))", halfplane_pairs, 2e-2),
    ),
    "gaussian_kernel": (
        "Gaussian kernel: d_K* = sqrt(2) sigma |x - y|",
        _theorem("gaussian_kernel", "gaussian(sigma=1,dim=2)", "euclidean_plane(scale=sqrt(2))", lambda: disk_pairs(5, radius=1.5), 1e-2),
    ),
    "sqrt_divergence": ("sqrt distance: S = sqrt(m) on uniform partitions, d* = +inf", _sqrt_profile),
    "intrinsic_divergence": ("sqrt, discrete, Sobolev and min-kernel distances have d* = +inf off the diagonal", _divergent_intrinsics),
    "bilipschitz_not_similar": (
        "|x-y|(1+x+y) vs |x-y| at a = 0.5: ratio tends to 1 + 2a",
        _verdict_case("bilipschitz_not_similar", "euclidean_line()", "bilipschitz_example()", 0.5, "point", "fails", 2.0, 2.0),
    ),
    "truncated_similar": (
        "min(1, |x-y|) is locally similar to |x-y|",
        _verdict_case("truncated_similar", "euclidean_line()", "truncated_euclidean()", 0.3, "point", "holds", 1.0, 1.0),
    ),
    "circular_similar": (
        "circular distance on (0, 2 pi) is locally similar to |x-y|",
        _verdict_case("circular_similar", "euclidean_line()", "circular_interval()", 1.0, "point", "holds", 1.0, 1.0),
    ),
    "comb_distortion": (
        "comb at (0,0): limsup sqrt(2), liminf 1",
        _verdict_case("comb_distortion", "comb_euclidean()", "comb_intrinsic()", (0.0, 0.0), "point", "fails", 1.0, math.sqrt(2), 0.5, 6),
    ),
    "comb_intrinsic": ("comb: the shortest in-carrier path from (0,0) to (1/2,1/2) has length 1", _comb_length),
    "hook_relations": ("hook: locally similar, not strongly nor infinitesimally similar", _hook_relations),
    "composition_constants": ("Q constants of the kernel composition functions", _composition),
    "cover_lemma": ("greedy cover partitions satisfy the gap inequality", _cover),
    "kernel_sanity": ("Gram positivity, d_K triangle inequality, Szego d_K = rho_D", _kernels),
    "refinement_monotonicity": ("S(P) <= S(Q) whenever Q refines P", _monotone),
    "bergman_axioms": ("Bergman disk d_K satisfies the metric axioms on a sample", _axioms),
    "pseudolog_closed_form": ("closed form |log x - log y| at (1, e)", _closed("pseudolog_closed_form", "pseudolog_halfline()", 1.0, math.e, 1.0)),
    "hyperbolic_disk_closed_form": (
        "closed form of the disk hyperbolic distance at (0, 1/2)",
        _closed("hyperbolic_disk_closed_form", "pseudohyperbolic_disk()", (0.0, 0.0), (0.5, 0.0), 0.5 * math.log(3.0)),
    ),
}


def run_scenario(name: str, config: EstimatorConfig = EstimatorConfig()) -> ScenarioResult:
    if name not in SCENARIOS:
        raise KeyError(name)
    return SCENARIOS[name][1](config)
