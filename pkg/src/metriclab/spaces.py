"""Catalog of example distances on subsets of R and R^2.

Every family is built by :func:`make_space` from a :class:`SpaceSpec` (or a
``"family(key=value,...)"`` string, see :func:`parse_spec`). Kernel-induced
distances live in :mod:`metriclab.kernels` but are reachable through the
same constructor.
"""

from __future__ import annotations

import ast
import math
import operator
import re
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

from .core import GUARD, MetricSpace, as_point
from .errors import BadParams, UnknownFamily

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SpaceSpec:
    family: str
    params: Mapping[str, float] = field(default_factory=dict)


# ---------------------------------------------------------------------------
# formulas shared with the kernel module


# The formulas below are written so that swapping the arguments reproduces
# the same floating-point operations, which keeps d(x, y) == d(y, x) exact.


def _sq_gap(Z: np.ndarray, W: np.ndarray) -> np.ndarray:
    return (Z[:, 0] - W[:, 0]) ** 2 + (Z[:, 1] - W[:, 1]) ** 2


def _sq_conj_gap(Z: np.ndarray, W: np.ndarray) -> np.ndarray:
    """|w - conj(z)|^2."""
    return (Z[:, 0] - W[:, 0]) ** 2 + (Z[:, 1] + W[:, 1]) ** 2


def _disk_defects(Z: np.ndarray, W: np.ndarray) -> np.ndarray:
    """(1 - |z|^2)(1 - |w|^2), which equals |1 - w conj(z)|^2 - |w - z|^2."""
    return (1.0 - (Z[:, 0] ** 2 + Z[:, 1] ** 2)) * (1.0 - (W[:, 0] ** 2 + W[:, 1] ** 2))


def rho_halfplane(Z: np.ndarray, W: np.ndarray) -> np.ndarray:
    """Pseudohyperbolic distance |w - z| / |w - conj(z)| on the upper halfplane."""
    return np.sqrt(_sq_gap(Z, W) / _sq_conj_gap(Z, W))


def rho_disk(Z: np.ndarray, W: np.ndarray) -> np.ndarray:
    """Pseudohyperbolic distance |w - z| / |1 - w conj(z)| on the unit disk."""
    g = _sq_gap(Z, W)
    return np.sqrt(g / (g + _disk_defects(Z, W)))


def hyperbolic_halfplane(Z: np.ndarray, W: np.ndarray) -> np.ndarray:
    """(1/2) log((|w-z̄|+|w-z|)/(|w-z̄|-|w-z|)).

    The difference in the denominator equals 4 Im z Im w / (|w-z̄|+|w-z|),
    which avoids cancellation for nearby points.
    """
    a = np.sqrt(_sq_conj_gap(Z, W))
    b = np.sqrt(_sq_gap(Z, W))
    return 0.5 * np.log((a + b) ** 2 / (4.0 * (Z[:, 1] * W[:, 1])))


def hyperbolic_disk(Z: np.ndarray, W: np.ndarray) -> np.ndarray:
    """(1/2) log((|1-wz̄|+|w-z|)/(|1-wz̄|-|w-z|)), using |1-wz̄|²-|w-z|² = (1-|z|²)(1-|w|²)."""
    g = _sq_gap(Z, W)
    p = _disk_defects(Z, W)
    a, b = np.sqrt(g + p), np.sqrt(g)
    return 0.5 * np.log((a + b) ** 2 / p)


def _infinite_off_diagonal(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    return np.where(np.all(X == Y, axis=1), 0.0, math.inf)


def _abs_diff(X, Y):
    return np.abs(X[:, 0] - Y[:, 0])


def _norm_diff(X, Y):
    return np.hypot(X[:, 0] - Y[:, 0], X[:, 1] - Y[:, 1])


def _taxi(X, Y):
    return np.abs(X[:, 0] - Y[:, 0]) + np.abs(X[:, 1] - Y[:, 1])


def _everywhere(X):
    return np.all(np.isfinite(X), axis=1)


# ---------------------------------------------------------------------------
# comb and hook carriers


def comb_contains(X: np.ndarray, q_max: int) -> np.ndarray:
    x, y = X[:, 0], X[:, 1]
    on_spine = (np.abs(y) <= GUARD) & (x >= -GUARD) & (x <= 1 + GUARD)
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.rint(1.0 / np.where(x > 0, x, np.nan))
    q_ok = np.isfinite(q) & (q >= 1) & (q <= q_max)
    on_tooth = q_ok & (np.abs(x - 1.0 / np.where(q_ok, q, 1.0)) <= GUARD) & (y >= -GUARD) & (y <= 1 + GUARD)
    return on_spine | on_tooth


def comb_rho(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Length of the shortest in-comb route: along a tooth, or down-spine-up."""
    same_x = np.abs(A[:, 0] - B[:, 0]) <= GUARD
    return np.where(
        same_x,
        np.abs(A[:, 1] - B[:, 1]),
        np.abs(A[:, 0] - B[:, 0]) + (A[:, 1] + B[:, 1]),
    )


def comb_branches(q_max: int) -> list:
    segs = [(np.array([0.0, 0.0]), np.array([1.0, 0.0]))]
    for q in range(1, q_max + 1):
        segs.append((np.array([1.0 / q, 0.0]), np.array([1.0 / q, 1.0])))
    return segs


def hook_contains(X: np.ndarray) -> np.ndarray:
    x, y = X[:, 0], X[:, 1]
    return ((np.abs(y) <= GUARD) & (x >= -GUARD)) | ((np.abs(x) <= GUARD) & (y >= -GUARD))


HOOK_REACH = 1e3  # finite stand-in for the unbounded half-axes when walking branches


def hook_branches() -> list:
    o = np.array([0.0, 0.0])
    return [(o, np.array([HOOK_REACH, 0.0])), (o, np.array([0.0, HOOK_REACH]))]


# ---------------------------------------------------------------------------
# samplers used by property tests


def _sample_line(lo, hi):
    return lambda rng, n: rng.uniform(lo, hi, size=(n, 1))


def _sample_halfline(rng, n):
    return np.exp(rng.uniform(-2.0, 2.0, size=(n, 1)))


def _sample_plane(rng, n):
    return rng.normal(scale=1.5, size=(n, 2))


def _sample_halfplane(rng, n):
    return np.column_stack([rng.uniform(-2, 2, n), np.exp(rng.uniform(-2.0, 1.0, n))])


def sample_disk(radius):
    def draw(rng, n):
        r = radius * np.sqrt(rng.uniform(0, 1, n))
        th = rng.uniform(0, TWO_PI, n)
        return np.column_stack([r * np.cos(th), r * np.sin(th)])

    return draw


def _sample_comb(q_max):
    def draw(rng, n):
        teeth = 1.0 / rng.integers(1, min(q_max, 20) + 1, size=n)
        on_tooth = rng.uniform(size=n) < 0.6
        x = np.where(on_tooth, teeth, rng.uniform(0, 1, n))
        y = np.where(on_tooth, rng.uniform(0, 1, n), 0.0)
        return np.column_stack([x, y])

    return draw


def _sample_hook(rng, n):
    t = np.exp(rng.uniform(-3, 1.5, n))
    axis = rng.uniform(size=n) < 0.5
    return np.column_stack([np.where(axis, t, 0.0), np.where(axis, 0.0, t)])


# ---------------------------------------------------------------------------
# catalog

_SPACE_PARAMS = {
    "euclidean_line": {},
    "euclidean_plane": {},
    "discrete": {},
    "sqrt_line": {},
    "pseudolog_halfline": {},
    "pseudolog_segment": {"a": 1.0, "b": 2.0},
    "pseudohyperbolic_halfplane": {},
    "pseudohyperbolic_disk": {},
    "circular_interval": {},
    "truncated_euclidean": {"cap": 1.0},
    "bilipschitz_example": {},
    "comb_euclidean": {"q_max": 1000},
    "comb_intrinsic": {"q_max": 1000},
    "hook_taxi": {},
    "hook_euclidean": {},
}

SPACE_FAMILIES = tuple(_SPACE_PARAMS)


def _params(family: str, given: Mapping[str, float], defaults: Mapping[str, float]) -> dict:
    unknown = set(given) - set(defaults) - {"scale"}
    if unknown:
        raise BadParams(f"{family}: unknown parameter(s) {sorted(unknown)}")
    return {**defaults, **{k: v for k, v in given.items() if k != "scale"}}


def _build_space(family: str, p: dict) -> MetricSpace:
    if family == "euclidean_line":
        return MetricSpace(family, 1, _abs_diff, _everywhere, intrinsic=_abs_diff, sampler=_sample_line(-3, 3))
    if family == "euclidean_plane":
        return MetricSpace(family, 2, _norm_diff, _everywhere, intrinsic=_norm_diff, sampler=_sample_plane)
    if family == "discrete":
        return MetricSpace(
            family,
            1,
            lambda X, Y: np.where(X[:, 0] == Y[:, 0], 0.0, 1.0),
            _everywhere,
            intrinsic=_infinite_off_diagonal,
            sampler=_sample_line(-3, 3),
        )
    if family == "sqrt_line":
        return MetricSpace(
            family,
            1,
            lambda X, Y: np.sqrt(np.abs(X[:, 0] - Y[:, 0])),
            _everywhere,
            intrinsic=_infinite_off_diagonal,
            sampler=_sample_line(-3, 3),
        )
    if family in ("pseudolog_halfline", "pseudolog_segment"):
        rho = lambda X, Y: 2.0 * np.abs(X[:, 0] - Y[:, 0]) / (X[:, 0] + Y[:, 0])
        log_gap = lambda X, Y: np.abs(np.log(X[:, 0]) - np.log(Y[:, 0]))
        if family == "pseudolog_halfline":
            return MetricSpace(
                family, 1, rho, lambda X: X[:, 0] > GUARD, intrinsic=log_gap, sampler=_sample_halfline
            )
        a, b = p["a"], p["b"]
        if not (0 < a < b):
            raise BadParams(f"pseudolog_segment needs 0 < a < b, got a={a}, b={b}")
        return MetricSpace(
            family,
            1,
            rho,
            lambda X: (X[:, 0] >= a) & (X[:, 0] <= b),
            params={"a": a, "b": b},
            intrinsic=log_gap,
            sampler=_sample_line(a, b),
        )
    if family == "pseudohyperbolic_halfplane":
        return MetricSpace(
            family,
            2,
            rho_halfplane,
            lambda X: X[:, 1] > GUARD,
            intrinsic=hyperbolic_halfplane,
            sampler=_sample_halfplane,
        )
    if family == "pseudohyperbolic_disk":
        return MetricSpace(
            family,
            2,
            rho_disk,
            lambda X: np.hypot(X[:, 0], X[:, 1]) < 1.0 - GUARD,
            intrinsic=hyperbolic_disk,
            sampler=sample_disk(0.95),
        )
    if family == "circular_interval":
        return MetricSpace(
            family,
            1,
            lambda X, Y: 2.0 * np.abs(np.sin((X[:, 0] - Y[:, 0]) / 2.0)),
            lambda X: (X[:, 0] > GUARD) & (X[:, 0] < TWO_PI - GUARD),
            intrinsic=_abs_diff,
            sampler=_sample_line(0.01, TWO_PI - 0.01),
        )
    if family == "truncated_euclidean":
        cap = p["cap"]
        if not cap > 0:
            raise BadParams("truncated_euclidean needs cap > 0")
        return MetricSpace(
            family,
            1,
            lambda X, Y: np.minimum(cap, np.abs(X[:, 0] - Y[:, 0])),
            _everywhere,
            params={"cap": cap},
            intrinsic=_abs_diff,
            sampler=_sample_line(-3, 3),
        )
    if family == "bilipschitz_example":
        rho = lambda X, Y: np.abs(X[:, 0] - Y[:, 0]) * (1.0 + (X[:, 0] + Y[:, 0]))
        return MetricSpace(
            family,
            1,
            rho,
            lambda X: (X[:, 0] >= 0.0) & (X[:, 0] <= 1.0),
            intrinsic=rho,
            sampler=_sample_line(0, 1),
        )
    if family in ("comb_euclidean", "comb_intrinsic"):
        q_max = p["q_max"]
        if q_max != int(q_max) or q_max < 1:
            raise BadParams("q_max must be a positive integer")
        q_max = int(q_max)
        return MetricSpace(
            family,
            2,
            _norm_diff if family == "comb_euclidean" else comb_rho,
            lambda X: comb_contains(X, q_max),
            params={"q_max": q_max},
            intrinsic=comb_rho,
            path_kind="comb",
            branches=lambda: comb_branches(q_max),
            sampler=_sample_comb(q_max),
        )
    if family in ("hook_taxi", "hook_euclidean"):
        return MetricSpace(
            family,
            2,
            _taxi if family == "hook_taxi" else _norm_diff,
            hook_contains,
            intrinsic=_taxi,
            path_kind="hook",
            branches=hook_branches,
            sampler=_sample_hook,
        )
    raise UnknownFamily(f"unknown family {family!r}")


def make_space(spec) -> MetricSpace:
    """Build a MetricSpace from a SpaceSpec, a KernelSpec, or a spec string.

    Every family accepts an extra ``scale`` parameter producing ``scale * d``.
    """
    from . import kernels

    if isinstance(spec, str):
        spec = parse_spec(spec)
    if isinstance(spec, kernels.KernelSpec):
        return kernels.make_kernel_space(spec)
    family, given = spec.family, dict(spec.params)
    scale = float(given.get("scale", 1.0))
    if not scale > 0:
        raise BadParams("scale must be positive")
    if family in _SPACE_PARAMS:
        space = _build_space(family, _params(family, given, _SPACE_PARAMS[family]))
    elif family in kernels.KERNEL_FAMILIES:
        space = kernels.make_kernel_space(kernels.KernelSpec(family, {k: v for k, v in given.items() if k != "scale"}))
    else:
        raise UnknownFamily(f"unknown family {family!r}")
    return space.scaled(scale) if scale != 1.0 else space


def closed_form_intrinsic(space: MetricSpace, x, y) -> Optional[float]:
    """Closed-form intrinsic distance, or ``None`` when the family has none."""
    if not space.has_closed_form_intrinsic:
        return None
    X = as_point(x, space.dim)[None, :]
    Y = as_point(y, space.dim)[None, :]
    return float(space.intrinsic_distances(X, Y)[0])


# ---------------------------------------------------------------------------
# "family(key=value, ...)" strings

_SPEC_RE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*(?:\((.*)\))?\s*$", re.S)

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv, ast.Pow: operator.pow}
_NAMES = {"pi": math.pi, "e": math.e}
_FUNCS = {"sqrt": math.sqrt, "log": math.log, "exp": math.exp}


def _eval_number(node):
    if isinstance(node, ast.Expression):
        return _eval_number(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return float(node.value)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval_number(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_number(node.left), _eval_number(node.right))
    if isinstance(node, ast.Name) and node.id in _NAMES:
        return _NAMES[node.id]
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS and len(node.args) == 1:
        return _FUNCS[node.func.id](_eval_number(node.args[0]))
    raise BadParams(f"cannot evaluate parameter expression {ast.dump(node)}")


def parse_number(text: str) -> float:
    """Parse a numeric literal or a small arithmetic expression such as ``sqrt(2)``."""
    try:
        return float(text)
    except ValueError:
        pass
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise BadParams(f"bad number {text!r}") from exc
    return _eval_number(tree)


def parse_spec(text: str):
    """Parse ``"family(key=value,...)"`` into a SpaceSpec or KernelSpec."""
    from . import kernels

    m = _SPEC_RE.match(text)
    if not m:
        raise BadParams(f"malformed space spec {text!r}")
    family, body = m.group(1), (m.group(2) or "").strip()
    params = {}
    if body:
        for item in body.split(","):
            if "=" not in item:
                raise BadParams(f"expected key=value in {text!r}, got {item!r}")
            key, value = (s.strip() for s in item.split("=", 1))
            if key in params:
                raise BadParams(f"duplicate parameter {key!r}")
            params[key] = parse_number(value)
    if family in _SPACE_PARAMS:
        return SpaceSpec(family, params)
    if family in kernels.KERNEL_FAMILIES:
        scale = params.pop("scale", None)
        spec = kernels.KernelSpec(family, params)
        kernels.validate_kernel_params(spec)
        if scale is not None:
            return SpaceSpec(family, {**params, "scale": scale})
        return spec
    raise UnknownFamily(f"unknown family {family!r}")
