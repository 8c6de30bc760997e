"""Orthants, faces and cones of R^d, the diagonal shift onto the unit sphere,
coordinate projections and the Mazur map.

Coordinates are indexed from 0.  A chart (e, i) names the face
``B_X ∩ Q_e ∩ H_i`` of the unit ball: points in the closed orthant of the
sign vector e whose i-th coordinate vanishes.  The shift moves such a point
along e until it reaches the unit sphere; the amount moved ends up as the
(smallest) i-th coordinate of the image.
"""

import itertools
from collections import namedtuple
from dataclasses import dataclass

import numpy as np

from ._roots import regula_falsi
from .norms import Lp, as_point

__all__ = [
    "FaceChart", "charts", "Membership", "classify_point", "project_hyperplane",
    "ShiftResult", "ShiftError", "shift_amounts", "lift_points", "shift_amount",
    "shift_to_sphere", "mazur_map",
]

SPHERE_TOL = 1e-12
ROOT_TOL = 1e-13
MAXITER = 100


class ShiftError(ArithmeticError):
    pass


@dataclass(frozen=True)
class FaceChart:
    e: tuple
    i: int

    def __post_init__(self):
        e = tuple(int(v) for v in self.e)
        if not e or any(v not in (-1, 1) for v in e):
            raise ValueError(f"sign vector must have entries +-1, got {self.e!r}")
        if not 0 <= self.i < len(e):
            raise ValueError(f"coordinate index {self.i} out of range for d={len(e)}")
        object.__setattr__(self, "e", e)

    @property
    def dim(self):
        return len(self.e)

    @property
    def signs(self):
        return np.array(self.e, dtype=float)

    def to_dict(self):
        return {"e": list(self.e), "i": self.i}


def charts(d):
    """All 2^d * d charts in a fixed order (sign vectors lexicographic, + first)."""
    for e in itertools.product((1, -1), repeat=d):
        for i in range(d):
            yield FaceChart(e, i)


Membership = namedtuple("Membership", "in_orthant in_face in_cone")


def classify_point(x, chart):
    x = as_point(x, chart.dim)
    signed = chart.signs * x
    in_orthant = bool(np.all((signed >= 0) & (signed <= 1)))
    in_face = bool(x[chart.i] == 0)
    in_cone = bool(np.all(abs(x[chart.i]) <= np.abs(x)))
    return Membership(in_orthant, in_face, in_cone)


def project_hyperplane(x, i):
    y = np.array(as_point(x), dtype=float)
    y[i] = 0.0
    return y


@dataclass(frozen=True)
class ShiftResult:
    s: float
    y: np.ndarray
    residual: float
    flat: bool = False

    def to_dict(self):
        return {"s": self.s, "y": [float(v) for v in self.y],
                "residual": self.residual, "flat": self.flat}


def _bisect(f, n):
    lo, hi = np.zeros(n), np.ones(n)
    for _ in range(MAXITER):
        mid = 0.5 * (lo + hi)
        below = f(mid, slice(None)) < 0
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= 1e-12):
            break
    return 0.5 * (lo + hi)


def shift_amounts(spec, chart, X, method="falsi"):
    """Shift amounts s(x) in [0, 1] for the rows of ``X`` (points of the face).

    No membership validation; see :func:`shift_amount` for the checked scalar
    version.  ``method`` is "falsi" (safeguarded regula falsi, default) or
    "bisect" (plain bisection, slower, kept as a reference).
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    e = chart.signs
    n = X.shape[0]

    # points are stored by coordinate (d x n): the level functionals then see
    # column-major n x d views, whose row reductions are much faster
    XT = np.ascontiguousarray(X.T)
    ecol = e[:, None]

    def f(s, rows):
        base = XT if isinstance(rows, slice) or rows.size == n else XT[:, rows]
        return spec.level((base + ecol * s).T) - 1.0

    everything = slice(None)
    # monotone with unit basis vectors: ||x + s e|| >= max|x| + s, so the root
    # lies below 1 - max|x| (the l_inf shift)
    top = np.clip(1.0 - np.max(np.abs(X), axis=1), 0.0, 1.0)
    fhi = f(top, everything)
    if np.any(fhi < -SPHERE_TOL):
        raise ShiftError("||x + (1 - max|x|) e|| < 1: the norm is not monotone and normalized")
    f0 = f(np.zeros(n), everything)
    on_sphere = np.abs(f0) <= SPHERE_TOL
    if method == "bisect":
        s = _bisect(f, n)
    elif method == "falsi":
        s = regula_falsi(f, np.zeros(n), top, f0, np.maximum(fhi, 0.0), ROOT_TOL, ROOT_TOL,
                         MAXITER)
    else:
        raise ValueError(f"unknown method {method!r}")
    return np.where(on_sphere, 0.0, s)


def lift_points(spec, chart, X, method="falsi"):
    """Images of the face points ``X`` on the unit sphere: x + s(x) e."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return X + shift_amounts(spec, chart, X, method)[:, None] * chart.signs


def _check_face_point(spec, chart, x):
    if chart.dim != spec.dim:
        raise ValueError("chart and norm dimensions differ")
    if not spec.monotone:
        raise ValueError("the shift needs a monotone quasi-norm")
    m = classify_point(x, chart)
    if not (m.in_orthant and m.in_face):
        raise ValueError(f"point is not in Q_e ∩ H_i for chart {chart}")
    if spec.norm(x) > 1 + SPHERE_TOL:
        raise ValueError("point is outside the unit ball")


def shift_amount(spec, chart, x, method="falsi"):
    x = as_point(x, spec.dim)
    _check_face_point(spec, chart, x)
    s = float(shift_amounts(spec, chart, x[None, :], method)[0])
    y = x + s * chart.signs
    residual = abs(float(spec.norm(y)) - 1.0)
    # a plateau of g(s) = ||x + s e|| - 1 around the root leaves s ambiguous
    step = 1e-9
    probes = np.clip([s - step, s + step], 0.0, 1.0)
    g = spec.norm(x[None, :] + probes[:, None] * chart.signs) - 1.0
    flat = bool(np.all(np.abs(g) <= 1e-13) and probes[1] > probes[0])
    return ShiftResult(s, y, residual, flat)


def shift_to_sphere(spec, chart, x, method="falsi"):
    res = shift_amount(spec, chart, x, method)
    y = res.y
    if np.any(np.abs(y[chart.i]) > np.abs(y) + 1e-9):
        raise ShiftError("shifted point left the cone C_i")
    return y


def mazur_map(p, x, source=2.0):
    """Sign-preserving power map x -> sign(x) |x|^(source/p) from S_source to S_p.

    With the default source 2 this is the Mazur map onto the l_p sphere; the
    inverse is ``mazur_map(2, y, source=p)``.
    """
    x = as_point(x)
    err = abs(float(Lp(source, x.size).norm(x)) - 1.0)
    if err > 1e-9:
        raise ValueError(f"point is not on the l_{source} sphere (off by {err:g})")
    return np.sign(x) * np.abs(x) ** (source / p)
