"""Upper-bound estimates of the intrinsic distance by polyline relaxation.

The estimate starts from the chord (or the family's canonical route),
relaxes interior control points by pattern search on a doubling schedule of
segment counts, and finally measures the best polyline with
:func:`metriclab.paths.path_length`. Every reported value is the length of
an actual carrier path, hence an upper bound on the infimum.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import MetricSpace
from .paths import CONVERGED, DIVERGED, Path, path_length, straight_path
from .spaces import closed_form_intrinsic


@dataclass(frozen=True)
class EstimatorConfig:
    segments: int = 32
    relax_rounds: int = 200
    perturbation_scale: float = 0.25
    length_tol: float = 1e-7
    seed: int = 0
    substeps: int = 8
    max_depth: int = 20
    divergence_ratio: float = 1.3

    def __post_init__(self):
        if not 1 <= self.segments <= 4096:
            raise ValueError("segments must be in [1, 4096]")
        if self.relax_rounds < 0 or self.substeps < 1:
            raise ValueError("relax_rounds must be >= 0 and substeps >= 1")
        if not (self.perturbation_scale > 0 and self.length_tol > 0):
            raise ValueError("perturbation_scale and length_tol must be positive")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")


@dataclass
class IntrinsicEstimate:
    upper_bound: float
    path: Path = field(repr=False)
    iterations: int
    status: str
    history: list = field(default_factory=list)  # running-min upper bound after each level

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "value": self.upper_bound,
            "iterations": self.iterations,
            "history": self.history,
            "path": self.path.control_points.tolist(),
        }


# ---------------------------------------------------------------------------
# relaxation


def _segment_costs(space: MetricSpace, A: np.ndarray, B: np.ndarray, substeps: int) -> np.ndarray:
    """Polygonal length of each chord A[i] -> B[i] measured at ``substeps`` equal pieces."""
    s = (np.arange(substeps + 1) / substeps)[None, :, None]
    pts = (1.0 - s) * A[:, None, :] + s * B[:, None, :]
    n = len(A)
    d = space.distances(pts[:, :-1].reshape(-1, A.shape[1]), pts[:, 1:].reshape(-1, A.shape[1]), check=False)
    return d.reshape(n, substeps).sum(axis=1)


def polyline_objective(space: MetricSpace, P: np.ndarray, substeps: int) -> float:
    return float(_segment_costs(space, P[:-1], P[1:], substeps).sum())


def _relax_points(space: MetricSpace, P: np.ndarray, config: EstimatorConfig, rng: np.random.Generator) -> tuple:
    """Pattern search on interior points with red-black sweeps. Returns (points, sweeps)."""
    P = P.copy()
    n = len(P) - 1
    if n < 2:
        return P, 0
    interior = np.arange(1, n)
    span = np.linalg.norm(P[2:] - P[:-2], axis=1) / 2.0
    base = config.perturbation_scale * np.maximum(span, 1e-300)
    step = base.copy()
    cost = _segment_costs(space, P[:-1], P[1:], config.substeps)  # cost[i] is segment i -> i+1
    sweeps = 0
    for _ in range(config.relax_rounds):
        sweeps += 1
        theta = rng.uniform(0.0, np.pi / 2)
        dirs = np.array([[math.cos(theta), math.sin(theta)], [-math.sin(theta), math.cos(theta)]])
        dirs = np.vstack([dirs, -dirs])
        moved = np.zeros(n - 1, dtype=bool)
        for parity in (1, 0):
            idx = interior[interior % 2 == parity]
            if idx.size == 0:
                continue
            for u in dirs:
                cand = P[idx] + step[idx - 1, None] * u
                ok = np.asarray(space.contains(cand), dtype=bool)
                if not ok.any():
                    continue
                j = idx[ok]
                c = cand[ok]
                left = _segment_costs(space, P[j - 1], c, config.substeps)
                right = _segment_costs(space, c, P[j + 1], config.substeps)
                better = left + right < cost[j - 1] + cost[j]
                if better.any():
                    jb = j[better]
                    P[jb] = c[better]
                    cost[jb - 1] = left[better]
                    cost[jb] = right[better]
                    moved[jb - 1] = True
        step = np.where(moved, np.minimum(2.0 * step, 64.0 * base), 0.5 * step)
        if np.all(step < 1e-4 * base):
            break
    return P, sweeps


def relax_path(path: Path, config: EstimatorConfig = EstimatorConfig(), rng: np.random.Generator | None = None) -> Path:
    """Move interior control points to shorten the polyline; endpoints stay fixed.

    Only planar polylines on open carriers are relaxed; other paths are
    returned unchanged. Moves are accepted only when they strictly lower the
    polygonal length measured with ``config.substeps`` pieces per segment,
    and moves leaving the carrier are rejected.
    """
    if not path.space.relaxable or path.interpolation != "ambient_linear" or len(path.control_points) < 3:
        return path
    rng = np.random.default_rng(config.seed) if rng is None else rng
    path.space.require(path.control_points)
    P, _ = _relax_points(path.space, path.control_points, config, rng)
    return path.with_points(P)


def _subdivide(P: np.ndarray) -> np.ndarray:
    out = np.empty((2 * len(P) - 1, P.shape[1]))
    out[0::2] = P
    out[1::2] = 0.5 * (P[:-1] + P[1:])
    return out


def _schedule(segments: int) -> list:
    levels = [segments]
    while levels[-1] % 2 == 0 and levels[-1] > 4:
        levels.append(levels[-1] // 2)
    return levels[::-1]


def estimate_intrinsic(space: MetricSpace, x, y, config: EstimatorConfig = EstimatorConfig()) -> IntrinsicEstimate:
    """Upper bound on d*(x, y) with the status of the final length computation."""
    base = straight_path(space, x, y)
    if np.array_equal(base.start, base.end):
        return IntrinsicEstimate(0.0, base, 0, CONVERGED, [0.0])

    def measure(p: Path):
        return path_length(p, tol=config.length_tol, max_depth=config.max_depth, divergence_ratio=config.divergence_ratio)

    if not space.relaxable:
        res = measure(base)
        return IntrinsicEstimate(res.value, base, 0, res.status, [res.value])

    rng = np.random.default_rng(config.seed)
    levels = _schedule(config.segments)
    first = levels[0]
    s = np.linspace(0.0, 1.0, first + 1)[:, None]
    P = (1.0 - s) * base.start + s * base.end
    P[-1] = base.end

    best = measure(base)
    best_path = base
    history = [best.value]
    iterations = 0
    for k, n in enumerate(levels):
        if k:
            P = _subdivide(P)
        P, sweeps = _relax_points(space, P, config, rng)
        iterations += sweeps
        candidate = Path(space, P, "ambient_linear")
        res = measure(candidate)
        if res.value < best.value or (best.status == DIVERGED and res.status != DIVERGED):
            best, best_path = res, candidate
        history.append(best.value)
    return IntrinsicEstimate(best.value, best_path, iterations, best.status, history)


# ---------------------------------------------------------------------------
# theorem-instance harness


@dataclass
class ComparisonRow:
    pair: tuple
    est1: float
    est2: float
    rel_gap: float
    passed: bool
    status1: str
    source2: str  # "closed_form" or the estimate status

    def to_dict(self) -> dict:
        return {
            "pair": [list(p) for p in self.pair],
            "est1": self.est1,
            "est2": self.est2,
            "rel_gap": self.rel_gap,
            "status": "pass" if self.passed else "fail",
            "status1": self.status1,
            "source2": self.source2,
        }


@dataclass
class ComparisonReport:
    space1: str
    space2: str
    tol: float
    rows: list

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def to_dict(self) -> dict:
        return {"space1": self.space1, "space2": self.space2, "tol": self.tol, "passed": self.passed, "rows": [r.to_dict() for r in self.rows]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["pair", "est1", "est2_or_closed_form", "rel_gap", "status"])
        for r in self.rows:
            pair = " ".join("(" + ",".join(repr(float(v)) for v in p) + ")" for p in r.pair)
            w.writerow([pair, repr(r.est1), repr(r.est2), repr(r.rel_gap), "pass" if r.passed else "fail"])
        return buf.getvalue()


def relative_gap(a: float, b: float) -> float:
    if math.isinf(a) and math.isinf(b):
        return 0.0
    if math.isinf(a) or math.isinf(b):
        return math.inf
    scale = max(abs(b), abs(a))
    return 0.0 if scale == 0 else abs(a - b) / scale


def _thread_count() -> int:
    try:
        return max(1, int(os.environ.get("METRICLAB_THREADS", "1")))
    except ValueError:
        return 1


def verify_theorem_instance(
    space1: MetricSpace,
    space2: MetricSpace,
    pairs,
    config: EstimatorConfig = EstimatorConfig(),
    tol: float = 1e-2,
) -> ComparisonReport:
    """Compare the estimated intrinsic distance of space1 with that of space2.

    space2 contributes its closed form when it has one, otherwise an
    estimate. Pairs run independently (threads per METRICLAB_THREADS) and
    rows keep input order.
    """
    if space1.dim != space2.dim:
        raise ValueError("spaces must share a carrier dimension")
    pts = [(space1.point(x), space1.point(y)) for x, y in pairs]
    for x, y in pts:
        space2.require(np.array([x, y]))

    def one(pair):
        x, y = pair
        e1 = estimate_intrinsic(space1, x, y, config)
        cf = closed_form_intrinsic(space2, x, y)
        if cf is None:
            e2 = estimate_intrinsic(space2, x, y, config)
            v2, src = e2.upper_bound, e2.status
        else:
            v2, src = cf, "closed_form"
        gap = relative_gap(e1.upper_bound, v2)
        return ComparisonRow((tuple(x.tolist()), tuple(y.tolist())), e1.upper_bound, v2, gap, gap < tol, e1.status, src)

    workers = _thread_count()
    if workers > 1 and len(pts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(one, pts))
    else:
        rows = [one(p) for p in pts]
    return ComparisonReport(space1.name, space2.name, tol, rows)
