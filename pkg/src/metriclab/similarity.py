"""Ratio profiles near an anchor, similarity verdicts, dilatation and composition checks.

Balls are always taken in the first distance d1 and ratios are d2/d1.
Points at d1-distance about r from the anchor are located by bisection
along rays: equally spaced directions on planar open carriers, the two
sides on the line, and the carrier's own segments on comb/hook carriers.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import MetricSpace, as_point
from .errors import InsufficientData, NonFiniteValue, ZeroDenominator
from .kernels import one_minus_sinc_squared_sqrt, polyfock_f

POINT, PAIR, DEFECT = "point_vs_anchor", "pair_in_ball", "defect"
MODES = (POINT, PAIR, DEFECT)
_MODE_ALIASES = {"point": POINT, "pair": PAIR, "infinitesimal": DEFECT}

RELATION_FOR_MODE = {POINT: "locally_similar", PAIR: "strongly_similar", DEFECT: "infinitesimally_similar"}

FRACTIONS = (0.2, 0.4, 0.6, 0.8, 0.99)
RAY_CAP = 1e6
BISECTIONS = 60


def _key(p: np.ndarray):
    return float(p[0]) if p.size == 1 else tuple(float(v) for v in p)


@dataclass
class RatioRecord:
    radius: float
    min_ratio: float
    max_ratio: float
    sample_count: int
    witness_min: Optional[tuple] = None
    witness_max: Optional[tuple] = None

    @property
    def empty(self) -> bool:
        return self.sample_count == 0


@dataclass
class RatioProfile:
    anchor: tuple
    mode: str
    records: list

    def nonempty(self) -> list:
        return [r for r in self.records if not r.empty]

    def to_dict(self) -> dict:
        return {"anchor": self.anchor, "mode": self.mode, "records": [asdict(r) for r in self.records]}


@dataclass
class SimilarityVerdict:
    relation: str
    outcome: str
    liminf_estimate: float
    limsup_estimate: float
    witness: Optional[tuple] = None

    def to_dict(self) -> dict:
        return {"relation": self.relation, "outcome": self.outcome, "liminf": self.liminf_estimate, "limsup": self.limsup_estimate, "witness": self.witness}


# ---------------------------------------------------------------------------
# ray sampling


class _Rays:
    """Rays from seed points along which d1(a, .) is searched for a crossing of r."""

    def __init__(self, space1: MetricSpace, space2: MetricSpace, a: np.ndarray, directions: int):
        self.s1, self.s2, self.a = space1, space2, a
        if space1.branches is not None:
            origins, dirs, reach = self._branch_rays(space1.branches())
        elif space1.dim == 1:
            origins = np.array([a, a])
            dirs = np.array([[1.0], [-1.0]])
            reach = np.array([math.inf, math.inf])
        else:
            th = 2.0 * np.pi * np.arange(directions) / directions
            dirs = np.column_stack([np.cos(th), np.sin(th)])
            origins = np.repeat(a[None, :], directions, axis=0)
            reach = np.full(directions, math.inf)
        self.origins, self.dirs, self.reach = origins, dirs, reach
        self.d_origin = self.d1_to_anchor(origins)
        finite = np.isfinite(reach)
        ends = origins + np.where(finite, reach, 0.0)[:, None] * dirs
        self.d_end = np.where(finite, self.d1_to_anchor(ends), math.inf)
        self.hint = np.ones(len(origins))

    def _branch_rays(self, segments):
        a = self.a
        seen, origins, dirs, reach = set(), [], [], []
        for p, q in segments:
            v = q - p
            L = float(np.linalg.norm(v))
            if L == 0.0:
                continue
            s = min(max(float(np.dot(a - p, v)) / (L * L), 0.0), 1.0)
            proj = p + s * v
            seeds = [proj, p, q]
            for seed in seeds:
                for end in (p, q):
                    w = end - seed
                    n = float(np.linalg.norm(w))
                    if n == 0.0:
                        continue
                    key = (tuple(np.round(seed, 15)), tuple(np.round(end, 15)))
                    if key in seen:
                        continue
                    seen.add(key)
                    origins.append(seed)
                    dirs.append(w / n)
                    reach.append(n)
        return np.array(origins), np.array(dirs), np.array(reach)

    def contains(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(self.s1.contains(X), dtype=bool) & np.asarray(self.s2.contains(X), dtype=bool)

    def d1_to_anchor(self, X: np.ndarray) -> np.ndarray:
        A = np.repeat(self.a[None, :], len(X), axis=0)
        return self.s1.distances(A, X, check=False)

    def crossings(self, r: float) -> tuple:
        """(ray indices, parameters t) with d1(a, o + t u) >= r and within 1% of r."""
        n = len(self.origins)
        valid = self.d_origin < r
        valid &= ~(np.isfinite(self.reach) & (self.d_end < r))
        lo = np.zeros(n)
        hi = np.where(np.isfinite(self.reach), self.reach, np.nan)
        # bracket the open-ended rays
        need = valid & np.isnan(hi)
        t = self.hint.copy()
        out = np.full(n, math.inf)
        for _ in range(400):
            if not need.any():
                break
            idx = np.flatnonzero(need)
            P = self.origins[idx] + t[idx, None] * self.dirs[idx]
            inside = self.contains(P)
            d = np.full(len(idx), np.nan)
            if inside.any():
                d[inside] = self.d1_to_anchor(P[inside])
            hit = inside & (d >= r)
            short = inside & (d < r)
            hi[idx[hit]] = t[idx[hit]]
            need[idx[hit]] = False
            i_s = idx[short]
            lo[i_s] = t[i_s]
            grow = np.where(np.isinf(out[i_s]), 2.0 * t[i_s], 0.5 * (t[i_s] + out[i_s]))
            t[i_s] = grow
            i_o = idx[~inside]
            out[i_o] = t[i_o]
            t[i_o] = 0.5 * (lo[i_o] + t[i_o])
            stuck = (t > RAY_CAP) | (np.isfinite(out) & (out - lo <= 1e-13 * (1.0 + out)))
            dead = need & stuck
            valid[dead] = False
            need[dead] = False
        valid[need] = False
        idx = np.flatnonzero(valid)
        if idx.size == 0:
            return idx, np.zeros(0)
        lo_i, hi_i = lo[idx], hi[idx]
        for _ in range(BISECTIONS):
            mid = 0.5 * (lo_i + hi_i)
            d = self.d1_to_anchor(self.origins[idx] + mid[:, None] * self.dirs[idx])
            up = d >= r
            hi_i = np.where(up, mid, hi_i)
            lo_i = np.where(up, lo_i, mid)
        X = self.origins[idx] + hi_i[:, None] * self.dirs[idx]
        d = self.d1_to_anchor(X)
        close = d <= 1.01 * r
        idx, hi_i = idx[close], hi_i[close]
        # open-ended rays restart near the previous crossing at the next radius
        self.hint[idx] = np.where(np.isfinite(self.reach[idx]), self.hint[idx], hi_i / 2.0)
        return idx, hi_i


def _ratio_stats(num: np.ndarray, den: np.ndarray, witnesses: list) -> tuple:
    ratio = num / den
    i_min, i_max = int(np.argmin(ratio)), int(np.argmax(ratio))
    return float(ratio[i_min]), float(ratio[i_max]), witnesses[i_min], witnesses[i_max]


def _ball_pairs(rays: _Rays, idx: np.ndarray, t: np.ndarray, r: float, directions: int, rng=None, extra: int = 0):
    """Distinct pairs inside B_{d1}(a, r): anchor plus fraction points on (a subsample of) the rays."""
    a = rays.a
    if idx.size > directions:
        sub = np.unique(np.linspace(0, idx.size - 1, directions).round().astype(int))
    else:
        sub = np.arange(idx.size)
    f = np.array(FRACTIONS)
    pts = [a[None, :]]
    pts.append((rays.origins[idx[sub]][:, None, :] + (t[sub, None] * f[None, :])[:, :, None] * rays.dirs[idx[sub]][:, None, :]).reshape(-1, a.size))
    Y = np.vstack(pts)
    Y = Y[rays.d1_to_anchor(Y) < r]
    Y = np.unique(Y, axis=0)
    i, j = np.triu_indices(len(Y), k=1)
    A, B = Y[i], Y[j]
    # every ray contributes its near-boundary point paired with the anchor
    far = rays.origins[idx] + (0.99 * t)[:, None] * rays.dirs[idx]
    far = far[rays.d1_to_anchor(far) < r]
    far = far[~np.all(far == a, axis=1)]
    A = np.vstack([A, np.repeat(a[None, :], len(far), axis=0)])
    B = np.vstack([B, far])
    if extra and idx.size:
        k = rng.integers(0, idx.size, size=(extra, 2))
        u = rng.uniform(0.0, 0.99, size=(extra, 2))
        P = rays.origins[idx[k[:, 0]]] + (u[:, 0] * t[k[:, 0]])[:, None] * rays.dirs[idx[k[:, 0]]]
        Q = rays.origins[idx[k[:, 1]]] + (u[:, 1] * t[k[:, 1]])[:, None] * rays.dirs[idx[k[:, 1]]]
        ok = (rays.d1_to_anchor(P) < r) & (rays.d1_to_anchor(Q) < r) & ~np.all(P == Q, axis=1)
        A = np.vstack([A, P[ok]])
        B = np.vstack([B, Q[ok]])
    return A, B


def _resolve_mode(mode: str) -> str:
    mode = _MODE_ALIASES.get(mode, mode)
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    return mode


def local_ratio_profile(
    space1: MetricSpace,
    space2: MetricSpace,
    a,
    r0: float = 0.1,
    levels: int = 12,
    directions: int = 16,
    mode: str = POINT,
) -> RatioProfile:
    """Extreme values of d2/d1 (or of the defect) at radii r0 * 2^-j, j = 0..levels-1.

    ``point_vs_anchor`` compares d2(x, a)/d1(x, a) for x at d1-distance r;
    ``pair_in_ball`` compares d2(x, y)/d1(x, y) over distinct pairs in the
    d1-ball; ``defect`` records |d2 - d1|(x, y)/(d1(x, a) + d1(y, a)) on
    the same pairs. Radii without any carrier point give empty records.
    """
    mode = _resolve_mode(mode)
    if not r0 > 0:
        raise ValueError("r0 must be positive")
    if not 1 <= levels <= 40:
        raise ValueError("levels must be in [1, 40]")
    if directions < 1:
        raise ValueError("directions must be positive")
    if space1.dim != space2.dim:
        raise ValueError("spaces must share a carrier")
    ap = space1.point(a)
    space2.require(ap[None, :])
    rays = _Rays(space1, space2, ap, directions)
    records = []
    for j in range(levels):
        r = r0 * 2.0**-j
        idx, t = rays.crossings(r)
        if idx.size == 0:
            records.append(RatioRecord(r, math.nan, math.nan, 0))
            continue
        if mode == POINT:
            X = rays.origins[idx] + t[:, None] * rays.dirs[idx]
            A = np.repeat(ap[None, :], len(X), axis=0)
            num = space2.distances(A, X, check=False)
            den = space1.distances(A, X, check=False)
            wit = [_key(x) for x in X]
        else:
            A, B = _ball_pairs(rays, idx, t, r, directions)
            if len(A) == 0:
                records.append(RatioRecord(r, math.nan, math.nan, 0))
                continue
            d1 = space1.distances(A, B, check=False)
            d2 = space2.distances(A, B, check=False)
            wit = [(_key(p), _key(q)) for p, q in zip(A, B)]
            if mode == PAIR:
                num, den = d2, d1
            else:
                num, den = np.abs(d2 - d1), rays.d1_to_anchor(A) + rays.d1_to_anchor(B)
        lo, hi, wlo, whi = _ratio_stats(num, den, wit)
        records.append(RatioRecord(r, lo, hi, int(len(num)), wlo, whi))
    return RatioProfile(_key(ap), mode, records)


def _extrapolate(r1: float, q1: float, r2: float, q2: float) -> float:
    """Linear extrapolation to radius 0; 2 q2 - q1 when r1 = 2 r2."""
    return q2 - r2 * (q1 - q2) / (r1 - r2)


def similarity_verdict(profile: RatioProfile, tol: float = 5e-3) -> SimilarityVerdict:
    """holds / fails / inconclusive from the tail of a profile.

    Estimates extrapolate the last two nonempty records to radius 0.
    ``fails`` additionally needs the last three raw records outside the
    tolerance band on the same side.
    """
    recs = profile.nonempty()
    if len(recs) < 4:
        raise InsufficientData(f"need at least 4 nonempty records, got {len(recs)}")
    p, q = recs[-2], recs[-1]
    lo = _extrapolate(p.radius, p.min_ratio, q.radius, q.min_ratio)
    hi = _extrapolate(p.radius, p.max_ratio, q.radius, q.max_ratio)
    tail = recs[-3:]
    relation = RELATION_FOR_MODE[profile.mode]
    if profile.mode == DEFECT:
        lo, hi = max(lo, 0.0), max(hi, 0.0)
        holds = hi <= tol
        fails = hi > tol and all(r.max_ratio > tol for r in tail)
        witness = q.witness_max
    else:
        holds = abs(lo - 1.0) <= tol and abs(hi - 1.0) <= tol
        above = hi > 1.0 + tol and all(r.max_ratio > 1.0 + tol for r in tail)
        below = lo < 1.0 - tol and all(r.min_ratio < 1.0 - tol for r in tail)
        fails = above or below
        witness = q.witness_max if abs(q.max_ratio - 1.0) >= abs(q.min_ratio - 1.0) else q.witness_min
    outcome = "holds" if holds else "fails" if fails else "inconclusive"
    return SimilarityVerdict(relation, outcome, lo, hi, witness)


def relation_table(space1: MetricSpace, space2: MetricSpace, a, r0: float = 0.1, levels: int = 12, directions: int = 16, tol: float = 5e-3) -> list:
    """Verdicts for all three relations at one anchor."""
    out = []
    for mode in MODES:
        prof = local_ratio_profile(space1, space2, a, r0, levels, directions, mode)
        out.append((prof, similarity_verdict(prof, tol)))
    return out


def dilatation_profile(space1: MetricSpace, space2: MetricSpace, a, r0: float = 0.1, levels: int = 12, pairs_per_level: int = 64, seed: int = 0, directions: int = 16) -> list:
    """(radius, sup of d2/d1 over sampled distinct pairs in B_{d1}(a, radius)) per level."""
    if pairs_per_level < 16:
        raise ValueError("pairs_per_level must be at least 16")
    if not r0 > 0 or not 1 <= levels <= 40:
        raise ValueError("need r0 > 0 and 1 <= levels <= 40")
    ap = space1.point(a)
    space2.require(ap[None, :])
    rays = _Rays(space1, space2, ap, directions)
    rng = np.random.default_rng(seed)
    out = []
    for j in range(levels):
        r = r0 * 2.0**-j
        idx, t = rays.crossings(r)
        if idx.size == 0:
            out.append((r, math.nan))
            continue
        A, B = _ball_pairs(rays, idx, t, r, directions, rng, pairs_per_level)
        if len(A) == 0:
            out.append((r, math.nan))
            continue
        out.append((r, float(np.max(space2.distances(A, B, check=False) / space1.distances(A, B, check=False)))))
    return out


def local_dilatation(space1: MetricSpace, space2: MetricSpace, a, r0: float = 0.1, levels: int = 12, pairs_per_level: int = 64, seed: int = 0) -> float:
    """Estimate of dil_a for the identity (X, d1) -> (X, d2): the sampled sup at the smallest radius."""
    prof = [v for _, v in dilatation_profile(space1, space2, a, r0, levels, pairs_per_level, seed) if not math.isnan(v)]
    if len(prof) < 3:
        raise InsufficientData("fewer than 3 nonempty radii")
    return prof[-1]


def infinitesimal_defect(space1: MetricSpace, space2: MetricSpace, a, x, y) -> float:
    """|d2(x, y) - d1(x, y)| / (d1(x, a) + d1(y, a))."""
    den = space1.distance(x, a) + space1.distance(y, a)
    if den == 0:
        raise ZeroDenominator("x = y = a makes the defect undefined")
    return abs(space2.distance(x, y) - space1.distance(x, y)) / den


# ---------------------------------------------------------------------------
# composition criterion


@dataclass
class CompositionReport:
    f0_zero: bool
    Q_estimate: float
    lower_bound_C: float
    monotone: bool
    concave: bool
    verdict: str
    quotients: list = field(default_factory=list)  # (t, f(t)/t) along t = 2^-j

    def to_dict(self) -> dict:
        return asdict(self)


def _evaluate(f: Callable, t: np.ndarray) -> np.ndarray:
    try:
        v = np.asarray(f(t), dtype=float)
        if v.shape != t.shape:
            raise TypeError
    except (TypeError, ValueError):
        v = np.array([float(f(float(s))) for s in t])
    return v


def composition_check(f: Callable, grid_max: float = 4.0, grid_size: int = 400, tol: float = 1e-9, levels: int = 12) -> CompositionReport:
    """Check the conditions under which d2 = f(d1) is locally similar to Q d1.

    Q is the two-level Richardson value 2 q_J - q_{J-1} of q_j = f(2^-j)/2^-j.
    The verdict holds iff f(0) = 0, Q > 0 and C = min f(t)/min(t, 1) > 0
    on the grid (all up to ``tol``).
    """
    if grid_size < 100:
        raise ValueError("grid_size must be at least 100")
    if grid_max < 2:
        raise ValueError("grid_max must be at least 2")
    if levels < 2:
        raise ValueError("levels must be at least 2")
    grid = np.linspace(grid_max / grid_size, grid_max, grid_size)
    ts = 2.0 ** -np.arange(levels + 1, dtype=float)
    vals = _evaluate(f, np.concatenate([[0.0], grid]))
    small = _evaluate(f, ts)
    if not (np.all(np.isfinite(vals)) and np.all(np.isfinite(small))):
        raise NonFiniteValue("f returned a non-finite value on the grid")
    q = small / ts
    Q = float(2.0 * q[-1] - q[-2])
    f0_zero = abs(vals[0]) <= tol
    C = float(np.min(vals[1:] / np.minimum(grid, 1.0)))
    diffs = np.diff(vals)
    monotone = bool(np.all(diffs >= -tol))
    second = np.diff(vals[1:], 2)
    concave = bool(np.all(second <= tol * max(1.0, float(np.max(np.abs(vals))))))
    holds = f0_zero and Q > tol and C > tol
    return CompositionReport(bool(f0_zero), Q, C, monotone, concave, "holds" if holds else "fails", [(float(t), float(v)) for t, v in zip(ts, q)])


def _bergman(t):
    t = np.minimum(np.asarray(t, dtype=float), 1.0)
    return t * np.sqrt(2.0 - t * t)


COMPOSITION_DEFAULTS = {
    "bergman": {},
    "gaussian": {"sigma": 1.0},
    "fock": {},
    "polyfock": {"m": 1, "alpha": 1},
    "paley_wiener": {},
    "paley_wiener_raw": {"A": 1.0},
    "square": {},
    "identity": {},
}


def composition_function(name: str, **params) -> Callable:
    """Named f from the kernel catalog, with d_K = f(d) on the matching base distance.

    ``bergman`` is t sqrt(2 - t^2) on [0, 1], continued by 1 (pseudohyperbolic
    distances never exceed 1). ``paley_wiener`` already absorbs the pre-scale
    2 A pi / sqrt(3); ``paley_wiener_raw`` is sqrt(1 - sinc^2(2 A t)).
    """
    from .errors import BadParams

    if name not in COMPOSITION_DEFAULTS:
        raise BadParams(f"unknown composition function {name!r}")
    unknown = set(params) - set(COMPOSITION_DEFAULTS[name])
    if unknown:
        raise BadParams(f"{name}: unknown parameter(s) {sorted(unknown)}")
    p = {**COMPOSITION_DEFAULTS[name], **params}
    if name == "bergman":
        return _bergman
    if name == "gaussian":
        s2 = float(p["sigma"]) ** 2
        if not s2 > 0:
            raise BadParams("sigma must be positive")
        return lambda t: np.sqrt(-np.expm1(-2.0 * s2 * np.asarray(t, dtype=float) ** 2))
    if name == "fock":
        return lambda t: np.sqrt(-np.expm1(-(np.asarray(t, dtype=float) ** 2)))
    if name == "polyfock":
        m, alpha = p["m"], p["alpha"]
        if m != int(m) or m < 1 or alpha not in (0, 1):
            raise BadParams("polyfock needs integer m >= 1 and alpha in {0, 1}")
        return lambda t: polyfock_f(t, int(m), int(alpha))
    if name == "paley_wiener":
        return lambda t: one_minus_sinc_squared_sqrt(math.sqrt(3.0) * np.asarray(t, dtype=float) / math.pi)
    if name == "paley_wiener_raw":
        A = float(p["A"])
        if not A > 0:
            raise BadParams("A must be positive")
        return lambda t: one_minus_sinc_squared_sqrt(2.0 * A * np.asarray(t, dtype=float))
    if name == "square":
        return lambda t: np.asarray(t, dtype=float) ** 2
    return lambda t: np.asarray(t, dtype=float)
