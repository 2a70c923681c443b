"""Metric-space handles, carrier checks and sampled axiom verification.

Points are plain numpy vectors of length 1 or 2. Complex numbers are stored
as ``(re, im)`` pairs. Lengths that may be infinite (intrinsic distances,
path lengths) are ordinary floats using ``math.inf``; IEEE arithmetic already
makes ``+inf`` absorbing under addition and ``max``.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .errors import CarrierViolation

#: Strict carrier inequalities are tested against this guard band.
GUARD = 1e-12

PairwiseFn = Callable[[np.ndarray, np.ndarray], np.ndarray]
ContainsFn = Callable[[np.ndarray], np.ndarray]
SamplerFn = Callable[[np.random.Generator, int], np.ndarray]
Segment = tuple  # (start point, end point), both length-2 arrays


def as_point(x, dim: int) -> np.ndarray:
    """Coerce a scalar, complex number or sequence into a point of ``dim`` coordinates."""
    if isinstance(x, complex):
        arr = np.array([x.real, x.imag], dtype=float)
    else:
        arr = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
    if arr.shape != (dim,):
        raise CarrierViolation(f"expected {dim} coordinate(s), got {arr.size}")
    return arr


def as_points(xs, dim: int) -> np.ndarray:
    """Coerce a batch of points into an ``(n, dim)`` float array."""
    if isinstance(xs, np.ndarray) and xs.ndim == 2 and xs.shape[1] == dim:
        return xs.astype(float, copy=False)
    if isinstance(xs, np.ndarray) and dim == 1 and xs.ndim == 1:
        return xs.astype(float).reshape(-1, 1)
    return np.array([as_point(x, dim) for x in xs], dtype=float).reshape(-1, dim)


def to_complex(X: np.ndarray) -> np.ndarray:
    return X[:, 0] + 1j * X[:, 1]


@dataclass(frozen=True, eq=False)
class MetricSpace:
    """A named distance on a carrier subset of R or R^2.

    ``pairwise`` evaluates the distance row-by-row on two ``(n, dim)``
    arrays. ``intrinsic`` (optional) is the closed-form induced intrinsic
    distance with the same signature. ``path_kind`` selects how canonical
    paths are built: ``"linear"`` for convex carriers, ``"comb"`` and
    ``"hook"`` for the two thin planar carriers. ``branches`` lists the
    carrier's segments for thin carriers, used by ball sampling.
    """

    family: str
    dim: int
    pairwise: PairwiseFn = field(repr=False)
    contains: ContainsFn = field(repr=False)
    params: Mapping[str, float] = field(default_factory=dict)
    intrinsic: Optional[PairwiseFn] = field(default=None, repr=False)
    path_kind: str = "linear"
    branches: Optional[Callable[[], list]] = field(default=None, repr=False)
    sampler: Optional[SamplerFn] = field(default=None, repr=False)
    scale: float = 1.0
    kernel: object = field(default=None, repr=False)

    @property
    def has_closed_form_intrinsic(self) -> bool:
        return self.intrinsic is not None

    @property
    def relaxable(self) -> bool:
        """Whether paths may be optimized freely (open planar carriers only)."""
        return self.path_kind == "linear" and self.dim == 2

    @property
    def name(self) -> str:
        parts = [f"{k}={v:g}" for k, v in self.params.items()]
        if self.scale != 1.0:
            parts.append(f"scale={self.scale:.17g}")
        return f"{self.family}({','.join(parts)})"

    def scaled(self, c: float) -> "MetricSpace":
        """The distance ``c * d`` on the same carrier."""
        if not c > 0:
            raise ValueError("scale factor must be positive")
        return dataclasses.replace(self, scale=self.scale * c)

    # -- carrier -----------------------------------------------------------

    def point(self, x) -> np.ndarray:
        p = as_point(x, self.dim)
        self.require(p[None, :])
        return p

    def require(self, X: np.ndarray) -> None:
        """Raise CarrierViolation unless every row of ``X`` is in the carrier."""
        ok = np.asarray(self.contains(X), dtype=bool)
        if not ok.all():
            bad = X[int(np.argmin(ok))]
            raise CarrierViolation(f"point {tuple(bad.tolist())} is outside the carrier of {self.name}")

    def in_carrier(self, x) -> bool:
        try:
            p = as_point(x, self.dim)
        except CarrierViolation:
            return False
        return bool(np.asarray(self.contains(p[None, :]))[0])

    # -- evaluation ----------------------------------------------------------

    def distances(self, X: np.ndarray, Y: np.ndarray, check: bool = True) -> np.ndarray:
        """Row-wise distances between two ``(n, dim)`` arrays."""
        X = as_points(X, self.dim)
        Y = as_points(Y, self.dim)
        if check:
            self.require(X)
            self.require(Y)
        out = np.asarray(self.pairwise(X, Y), dtype=float) * self.scale
        # exact zero on the diagonal, whatever the formula's rounding does
        same = np.all(X == Y, axis=1)
        return np.where(same, 0.0, out)

    def distance(self, x, y) -> float:
        return float(self.distances(as_point(x, self.dim)[None, :], as_point(y, self.dim)[None, :])[0])

    def intrinsic_distances(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        if self.intrinsic is None:
            raise ValueError(f"{self.name} has no closed-form intrinsic distance")
        X = as_points(X, self.dim)
        Y = as_points(Y, self.dim)
        self.require(X)
        self.require(Y)
        out = np.asarray(self.intrinsic(X, Y), dtype=float) * self.scale
        return np.where(np.all(X == Y, axis=1), 0.0, out)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.sampler is None:
            raise ValueError(f"{self.name} has no sampler")
        return self.sampler(rng, n)


def custom_space(name: str, fn: Callable, dim: int = 1, contains: Optional[ContainsFn] = None) -> MetricSpace:
    """Wrap a row-wise distance function as a MetricSpace (for testing ad hoc distances)."""
    if contains is None:
        contains = lambda X: np.all(np.isfinite(X), axis=1)
    return MetricSpace(family=name, dim=dim, pairwise=fn, contains=contains)


def distance(space: MetricSpace, x, y) -> float:
    return space.distance(x, y)


def open_ball_membership(space: MetricSpace, center, radius: float, x) -> bool:
    """True iff ``d(center, x) < radius``."""
    if not radius > 0:
        raise ValueError("radius must be positive")
    return space.distance(center, x) < radius


@dataclass
class AxiomReport:
    identity_ok: bool
    identity_worst: float
    identity_witness: Optional[tuple]
    symmetry_ok: bool
    symmetry_worst: float
    symmetry_witness: Optional[tuple]
    triangle_ok: bool
    triangle_worst: float
    triangle_witness: Optional[tuple]

    @property
    def passed(self) -> bool:
        return self.identity_ok and self.symmetry_ok and self.triangle_ok

    def to_dict(self) -> dict:
        return dataclasses.asdict(self) | {"passed": self.passed}


def _point_key(p: np.ndarray):
    return float(p[0]) if p.size == 1 else tuple(float(v) for v in p)


def check_metric_axioms(space: MetricSpace, sample: Sequence, tol: float = 1e-12) -> AxiomReport:
    """Check identity, symmetry and the triangle inequality on all pairs/triples of ``sample``.

    Each axiom passes iff its worst violation is at most ``tol``. Witnesses
    are returned as tuples of sample points; for the triangle inequality
    ``(x, y, z)`` means ``d(x, z) > d(x, y) + d(y, z)``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    P = as_points(sample, space.dim)
    if len(P) == 0:
        raise ValueError("sample must be nonempty")
    space.require(P)
    n = len(P)
    ii, jj = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    D = space.distances(P[ii.ravel()], P[jj.ravel()], check=False).reshape(n, n)

    # identity: d(x,x)=0 and d(x,y)>0 for distinct points
    distinct = ~np.all(P[:, None, :] == P[None, :, :], axis=2)
    diag = np.abs(np.diag(D))
    id_worst, id_wit = float(diag.max()), (_point_key(P[int(diag.argmax())]),) if diag.max() > 0 else None
    zero_off = distinct & (D <= 0)
    if zero_off.any():
        i, j = np.argwhere(zero_off)[0]
        id_worst = max(id_worst, math.inf)
        id_wit = (_point_key(P[i]), _point_key(P[j]))
    identity_ok = id_worst <= tol

    asym = np.abs(D - D.T)
    s_idx = np.unravel_index(int(asym.argmax()), asym.shape)
    sym_worst = float(asym[s_idx])
    sym_wit = (_point_key(P[s_idx[0]]), _point_key(P[s_idx[1]])) if sym_worst > 0 else None

    # viol[i, j, k] = d(i, k) - d(i, j) - d(j, k)
    viol = D[:, None, :] - D[:, :, None] - D[None, :, :]
    t_idx = np.unravel_index(int(viol.argmax()), viol.shape)
    tri_worst = float(viol[t_idx])
    tri_wit = tuple(_point_key(P[k]) for k in t_idx) if tri_worst > 0 else None

    return AxiomReport(
        identity_ok=identity_ok,
        identity_worst=id_worst,
        identity_witness=id_wit,
        symmetry_ok=sym_worst <= tol,
        symmetry_worst=sym_worst,
        symmetry_witness=sym_wit,
        triangle_ok=tri_worst <= tol,
        triangle_worst=max(tri_worst, 0.0),
        triangle_witness=tri_wit,
    )
