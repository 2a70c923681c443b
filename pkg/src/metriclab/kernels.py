"""Reproducing kernels, the distance they induce, and supporting special functions.

For a kernel K with K(x, x) > 0 the induced distance is

    d_K(x, y) = sqrt(1 - |K(x, y)|^2 / (K(x, x) K(y, y))).

Evaluating that expression literally loses all relative accuracy once
d_K is below about 1e-8, which matters for fine path refinements. Each
catalog family therefore also carries an algebraically equivalent form that
avoids the cancellation; :func:`kernel_distance_generic` keeps the literal
expression so the two can be cross-checked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

import numpy as np

from .core import GUARD, MetricSpace, as_point, as_points, to_complex
from .errors import BadParams, CarrierViolation, DuplicatePoints, NonPositiveDiagonal, UnknownFamily
from .spaces import hyperbolic_disk, hyperbolic_halfplane, rho_disk, rho_halfplane, sample_disk

MAX_LAGUERRE_DEGREE = 64
SINC_SERIES_BELOW = 1e-4


# ---------------------------------------------------------------------------
# special functions


def laguerre(n: int, t, alpha: float = 0.0):
    """Generalized Laguerre polynomial L_n^(alpha)(t) by the three-term recurrence.

    ``alpha = 0`` gives the ordinary Laguerre polynomials. Works elementwise
    on arrays.
    """
    if n != int(n) or not 0 <= n <= MAX_LAGUERRE_DEGREE:
        raise BadParams(f"Laguerre degree must be an integer in [0, {MAX_LAGUERRE_DEGREE}], got {n}")
    n = int(n)
    t = np.asarray(t, dtype=float)
    prev = np.ones_like(t)
    if n == 0:
        return prev if prev.ndim else float(prev)
    cur = 1.0 + alpha - t
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 + alpha - t) * cur - (k + alpha) * prev) / (k + 1)
    return cur if cur.ndim else float(cur)


def laguerre_at_zero(n: int, alpha: float = 0.0) -> float:
    """L_n^(alpha)(0) = binom(n + alpha, n)."""
    return math.prod((k + alpha) / k for k in range(1, n + 1))


def _laguerre_relative_drop(n: int, alpha: float, s: np.ndarray) -> np.ndarray:
    """(L(0) - L(s)) / L(0) summed from the power series, exact at small s."""
    # L_n^a(s) = sum_k (-1)^k binom(n+a, n-k) s^k / k!
    out = np.zeros_like(s)
    coef = 1.0  # binom(n+a, n-k)/binom(n+a, n) / k!, built incrementally
    for k in range(1, n + 1):
        coef *= (n - k + 1) / ((k + alpha) * k)
        out -= (-1) ** k * coef * s**k
    return out


def sinc(x):
    """Normalized cardinal sine sin(pi x)/(pi x), with sinc(0) = 1."""
    x = np.asarray(x, dtype=float)
    u = np.pi * x
    small = np.abs(x) < SINC_SERIES_BELOW
    with np.errstate(invalid="ignore", divide="ignore"):
        direct = np.sin(u) / u
    u2 = u * u
    out = np.where(small, 1.0 - u2 / 6.0 + u2 * u2 / 120.0, direct)
    return out if out.ndim else float(out)


def one_minus_sinc(x):
    """1 - sinc(x) without cancellation near 0."""
    x = np.asarray(x, dtype=float)
    u = np.abs(np.pi * x)
    small = u < 0.5
    # (u - sin u)/u as an alternating series; 8 terms reach double precision for u < 0.5
    series = np.zeros_like(u)
    term = u * u / 6.0
    for k in range(8):
        series += term
        term *= -u * u / ((2 * k + 4) * (2 * k + 5))
    with np.errstate(invalid="ignore", divide="ignore"):
        direct = 1.0 - np.sin(u) / u
    out = np.where(small, series, direct)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# kernel catalog

KERNEL_DEFAULTS = {
    "szego_disk": {},
    "bergman_disk": {},
    "bergman_halfplane": {},
    "gaussian": {"sigma": 1.0, "dim": 2},
    "fock": {},
    "polyfock": {"m": 1, "alpha": 1},
    "paley_wiener": {"A": 1.0},
    "sobolev_green": {},
    "min_kernel": {},
}
KERNEL_FAMILIES = tuple(KERNEL_DEFAULTS)


@dataclass(frozen=True)
class KernelSpec:
    family: str
    params: Mapping[str, float] = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class Kernel:
    """A kernel on a carrier in R or R^2.

    ``fn(X, Y)`` returns K row-wise as a complex array. ``distance`` is an
    optional cancellation-free form of d_K; ``intrinsic`` the closed-form
    intrinsic distance of d_K when known.
    """

    family: str
    dim: int
    fn: Callable[[np.ndarray, np.ndarray], np.ndarray] = field(repr=False)
    contains: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    params: Mapping[str, float] = field(default_factory=dict)
    distance: Optional[Callable] = field(default=None, repr=False)
    intrinsic: Optional[Callable] = field(default=None, repr=False)
    sampler: Optional[Callable] = field(default=None, repr=False)


def validate_kernel_params(spec: KernelSpec) -> dict:
    if spec.family not in KERNEL_DEFAULTS:
        raise UnknownFamily(f"unknown family {spec.family!r}")
    defaults = KERNEL_DEFAULTS[spec.family]
    unknown = set(spec.params) - set(defaults)
    if unknown:
        raise BadParams(f"{spec.family}: unknown parameter(s) {sorted(unknown)}")
    p = {**defaults, **spec.params}
    if spec.family == "gaussian":
        if not p["sigma"] > 0:
            raise BadParams("gaussian needs sigma > 0")
        if p["dim"] not in (1, 2):
            raise BadParams("gaussian dim must be 1 or 2")
        p["dim"] = int(p["dim"])
    if spec.family == "polyfock":
        m = p["m"]
        if m != int(m) or not 1 <= m <= MAX_LAGUERRE_DEGREE:
            raise BadParams(f"polyfock m must be an integer in [1, {MAX_LAGUERRE_DEGREE}]")
        if p["alpha"] not in (0, 1):
            raise BadParams("polyfock alpha must be 0 or 1")
        p["m"], p["alpha"] = int(m), int(p["alpha"])
    if spec.family == "paley_wiener" and not p["A"] > 0:
        raise BadParams("paley_wiener needs A > 0")
    return p


def _sqrt_clamped(v):
    return np.sqrt(np.maximum(v, 0.0))


def _bergman_f(t):
    return t * np.sqrt(2.0 - t * t)


def _sq_norm(X, Y):
    return np.sum((X - Y) ** 2, axis=1)


def _interval(lo_open: bool, hi_open: bool):
    def contains(X):
        x = X[:, 0]
        lo = x > GUARD if lo_open else x >= 0.0
        hi = x < 1.0 - GUARD if hi_open else x <= 1.0
        return lo & hi

    return contains


def _disk(X):
    return np.hypot(X[:, 0], X[:, 1]) < 1.0 - GUARD


def _halfplane(X):
    return X[:, 1] > GUARD


def _anywhere(X):
    return np.all(np.isfinite(X), axis=1)


def _sobolev_k(X, Y):
    x, y = X[:, 0], Y[:, 0]
    return np.where(y <= x, (1.0 - x) * y, (1.0 - y) * x).astype(complex)


def _sobolev_d(X, Y):
    lo = np.minimum(X[:, 0], Y[:, 0])
    hi = np.maximum(X[:, 0], Y[:, 0])
    return np.sqrt((hi - lo) / ((1.0 - lo) * hi))


def _min_d(X, Y):
    lo = np.minimum(X[:, 0], Y[:, 0])
    hi = np.maximum(X[:, 0], Y[:, 0])
    return np.sqrt((hi - lo) / hi)


def _inf_off_diagonal(X, Y):
    return np.where(np.all(X == Y, axis=1), 0.0, math.inf)


def _halfplane_sampler(rng, n):
    return np.column_stack([rng.uniform(-2, 2, n), np.exp(rng.uniform(-1.5, 1.0, n))])


def make_kernel(spec: KernelSpec) -> Kernel:
    p = validate_kernel_params(spec)
    fam = spec.family
    r2 = math.sqrt(2.0)
    if fam == "szego_disk":
        return Kernel(
            fam,
            2,
            lambda X, Y: 1.0 / (1.0 - to_complex(X) * np.conj(to_complex(Y))),
            _disk,
            distance=rho_disk,
            intrinsic=hyperbolic_disk,
            sampler=sample_disk(0.9),
        )
    if fam == "bergman_disk":
        return Kernel(
            fam,
            2,
            lambda X, Y: 1.0 / (math.pi * (1.0 - to_complex(X) * np.conj(to_complex(Y))) ** 2),
            _disk,
            distance=lambda X, Y: _bergman_f(rho_disk(X, Y)),
            intrinsic=lambda X, Y: r2 * hyperbolic_disk(X, Y),
            sampler=sample_disk(0.9),
        )
    if fam == "bergman_halfplane":
        # the sign makes K(z, z) = 1/(4 pi Im(z)^2) positive
        return Kernel(
            fam,
            2,
            lambda X, Y: -1.0 / (math.pi * (to_complex(X) - np.conj(to_complex(Y))) ** 2),
            _halfplane,
            distance=lambda X, Y: _bergman_f(rho_halfplane(X, Y)),
            intrinsic=lambda X, Y: r2 * hyperbolic_halfplane(X, Y),
            sampler=_halfplane_sampler,
        )
    if fam == "gaussian":
        s2 = p["sigma"] ** 2
        q = r2 * p["sigma"]
        return Kernel(
            fam,
            p["dim"],
            lambda X, Y: np.exp(-s2 * _sq_norm(X, Y)).astype(complex),
            _anywhere,
            params={"sigma": p["sigma"], "dim": p["dim"]},
            distance=lambda X, Y: np.sqrt(-np.expm1(-2.0 * s2 * _sq_norm(X, Y))),
            intrinsic=lambda X, Y: q * np.sqrt(_sq_norm(X, Y)),
            sampler=lambda rng, n: rng.normal(size=(n, p["dim"])),
        )
    if fam == "fock":
        return Kernel(
            fam,
            2,
            lambda X, Y: np.exp(to_complex(X) * np.conj(to_complex(Y))),
            _anywhere,
            distance=lambda X, Y: np.sqrt(-np.expm1(-_sq_norm(X, Y))),
            intrinsic=lambda X, Y: np.sqrt(_sq_norm(X, Y)),
            sampler=lambda rng, n: rng.normal(size=(n, 2)),
        )
    if fam == "polyfock":
        m, a = p["m"], p["alpha"]
        q = polyfock_Q(m, a)

        def k(X, Y):
            z, w = to_complex(X), to_complex(Y)
            return np.exp(z * np.conj(w)) * laguerre(m - 1, np.abs(z - w) ** 2, a)

        def dist(X, Y):
            s = _sq_norm(X, Y)
            return polyfock_f(np.sqrt(s), m, a)

        return Kernel(
            fam,
            2,
            k,
            _anywhere,
            params={"m": m, "alpha": a},
            distance=dist,
            intrinsic=lambda X, Y: q * np.sqrt(_sq_norm(X, Y)),
            sampler=lambda rng, n: rng.normal(size=(n, 2)),
        )
    if fam == "paley_wiener":
        A = p["A"]
        c = 2.0 * A * math.pi / math.sqrt(3.0)
        return Kernel(
            fam,
            1,
            lambda X, Y: (2.0 * A * sinc(2.0 * A * (X[:, 0] - Y[:, 0]))).astype(complex),
            _anywhere,
            params={"A": A},
            distance=lambda X, Y: one_minus_sinc_squared_sqrt(2.0 * A * (X[:, 0] - Y[:, 0])),
            intrinsic=lambda X, Y: c * np.abs(X[:, 0] - Y[:, 0]),
            sampler=lambda rng, n: rng.uniform(-3, 3, size=(n, 1)),
        )
    if fam == "sobolev_green":
        return Kernel(
            fam,
            1,
            _sobolev_k,
            _interval(True, True),
            distance=_sobolev_d,
            intrinsic=_inf_off_diagonal,
            sampler=lambda rng, n: rng.uniform(0.01, 0.99, size=(n, 1)),
        )
    if fam == "min_kernel":
        return Kernel(
            fam,
            1,
            lambda X, Y: np.minimum(X[:, 0], Y[:, 0]).astype(complex),
            _interval(True, False),
            distance=_min_d,
            intrinsic=_inf_off_diagonal,
            sampler=lambda rng, n: rng.uniform(0.01, 1.0, size=(n, 1)),
        )
    raise UnknownFamily(f"unknown family {fam!r}")  # pragma: no cover - validate_kernel_params already checked


def one_minus_sinc_squared_sqrt(x):
    """sqrt(1 - sinc(x)^2), factored as (1 - sinc)(1 + sinc)."""
    oms = one_minus_sinc(x)
    return _sqrt_clamped(oms * (2.0 - oms))


def polyfock_Q(m: int, alpha: int = 1) -> float:
    """Limit of f(t)/t for the poly-Fock composition function: sqrt(1 + 2(m-1)/(alpha+1))."""
    return math.sqrt(1.0 + 2.0 * (m - 1) / (alpha + 1.0))


def polyfock_f(t, m: int, alpha: int = 1):
    """sqrt(1 - e^{-t^2} (L(t^2)/L(0))^2), evaluated without cancellation at small t."""
    s = np.asarray(t, dtype=float) ** 2
    drop = _laguerre_relative_drop(m - 1, alpha, s)  # 1 - L(s)/L(0)
    small = np.abs(drop) < 0.5
    # 1 - e^{-s} r^2 = -expm1(-s + 2 log|r|) with r = 1 - drop
    with np.errstate(divide="ignore"):
        log_r = np.where(small, np.log1p(-np.where(small, drop, 0.0)), np.log(np.abs(1.0 - drop)))
    out = _sqrt_clamped(-np.expm1(-s + 2.0 * log_r))
    return out if out.ndim else float(out)


def make_kernel_space(spec: KernelSpec) -> MetricSpace:
    kern = make_kernel(spec)
    pairwise = kern.distance if kern.distance is not None else (lambda X, Y: generic_distances(kern, X, Y))
    return MetricSpace(
        family=kern.family,
        dim=kern.dim,
        pairwise=pairwise,
        contains=kern.contains,
        params=dict(kern.params),
        intrinsic=kern.intrinsic,
        sampler=kern.sampler,
        kernel=kern,
    )


def _as_kernel(kernel) -> Kernel:
    if isinstance(kernel, Kernel):
        return kernel
    if isinstance(kernel, KernelSpec):
        return make_kernel(kernel)
    if isinstance(kernel, str):
        from .spaces import parse_spec

        spec = parse_spec(kernel)
        if isinstance(spec, KernelSpec):
            return make_kernel(spec)
    raise UnknownFamily(str(kernel))


def _require(kern: Kernel, X: np.ndarray) -> None:
    ok = np.asarray(kern.contains(X), dtype=bool)
    if not ok.all():
        bad = X[int(np.argmin(ok))]
        raise CarrierViolation(f"point {tuple(bad.tolist())} is outside the carrier of {kern.family}")


def kernel_eval(kernel, x, y) -> complex:
    """K(x, y) for a single pair of carrier points."""
    kern = _as_kernel(kernel)
    X = as_point(x, kern.dim)[None, :]
    Y = as_point(y, kern.dim)[None, :]
    _require(kern, X)
    _require(kern, Y)
    return complex(np.asarray(kern.fn(X, Y))[0])


def generic_distances(kern: Kernel, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """d_K row-wise from the literal definition, clamped at 0 before the root."""
    kxy = np.asarray(kern.fn(X, Y), dtype=complex)
    kxx = np.asarray(kern.fn(X, X), dtype=complex).real
    kyy = np.asarray(kern.fn(Y, Y), dtype=complex).real
    bad = (kxx <= 0) | (kyy <= 0)
    if bad.any():
        raise NonPositiveDiagonal(f"{kern.family}: K(x, x) <= 0 at a sampled point")
    out = _sqrt_clamped(1.0 - np.abs(kxy) ** 2 / (kxx * kyy))
    return np.where(np.all(X == Y, axis=1), 0.0, out)


def kernel_distance_generic(kernel, x, y) -> float:
    kern = _as_kernel(kernel)
    X = as_point(x, kern.dim)[None, :]
    Y = as_point(y, kern.dim)[None, :]
    _require(kern, X)
    _require(kern, Y)
    return float(generic_distances(kern, X, Y)[0])


def kernel_distance(kernel, x, y) -> float:
    """d_K(x, y). Uses the family's cancellation-free form when there is one."""
    kern = _as_kernel(kernel)
    X = as_point(x, kern.dim)[None, :]
    Y = as_point(y, kern.dim)[None, :]
    _require(kern, X)
    _require(kern, Y)
    diag = np.asarray(kern.fn(np.vstack([X, Y]), np.vstack([X, Y])), dtype=complex).real
    if (diag <= 0).any():
        raise NonPositiveDiagonal(f"{kern.family}: K(x, x) <= 0")
    if np.array_equal(X, Y):
        return 0.0
    if kern.distance is None:
        return float(generic_distances(kern, X, Y)[0])
    return float(np.asarray(kern.distance(X, Y))[0])


def gram_matrix(kernel, points) -> np.ndarray:
    kern = _as_kernel(kernel)
    P = as_points(points, kern.dim)
    _require(kern, P)
    n = len(P)
    ii, jj = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    G = np.asarray(kern.fn(P[ii.ravel()], P[jj.ravel()]), dtype=complex).reshape(n, n)
    return G


def gram_min_eigenvalue(kernel, points) -> float:
    """Smallest eigenvalue of the Hermitian Gram matrix [K(x_r, x_s)]."""
    kern = _as_kernel(kernel)
    P = as_points(points, kern.dim)
    if len(P) == 0:
        raise ValueError("need at least one point")
    if len(P) > 64:
        raise ValueError("at most 64 points")
    if len(np.unique(P, axis=0)) != len(P):
        raise DuplicatePoints("Gram matrix points must be pairwise distinct")
    G = gram_matrix(kern, P)
    G = 0.5 * (G + G.conj().T)
    return float(np.linalg.eigvalsh(G)[0])
