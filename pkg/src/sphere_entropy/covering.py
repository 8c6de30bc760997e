"""Coverings of ball faces, their lift to the unit sphere, and sampled checks.

Face grids live on the lattice of pitch h = 2*eps in the absolute face
coordinates: the cell with index j is ``[h j, h (j+1)] ∩ [0, 1]^(d-1)`` and is
kept when its lower corner ``h j`` lies in the ball (the face is downward
closed, so this is exactly "the cell meets the face").  A kept cell gets its
centre when that centre lies in the ball; otherwise it is represented by its
lower corner, which every face point of the cell dominates coordinate-wise.
Either way the lifted point is within 2*eps of the lifts of all face points
of the cell.
"""

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .geometry import FaceChart, charts, lift_points
from .norms import Lp, NormSpec, spec_from_dict

__all__ = [
    "Covering", "GridParams", "Sphere", "Ball", "Face", "CoverError",
    "face_cell_count", "face_cells", "cover_face_grid", "lift_chart_centers",
    "lift_sphere_cover", "lifted_cardinality", "ball_cell_count", "cover_ball_grid",
    "sample_set", "verify_covering", "VerifyReport", "MAX_CENTERS",
]

MAX_CENTERS = 10_000_000
BALL_TOL = 1e-12
GAP_TOL = 1e-9


class CoverError(RuntimeError):
    pass


@dataclass(frozen=True)
class Sphere:
    spec: NormSpec

    @property
    def dim(self):
        return self.spec.dim


@dataclass(frozen=True)
class Ball:
    spec: NormSpec

    @property
    def dim(self):
        return self.spec.dim


@dataclass(frozen=True)
class Face:
    spec: NormSpec
    chart: FaceChart

    @property
    def dim(self):
        return self.spec.dim


@dataclass(frozen=True)
class GridParams:
    step: float
    clamp_into_ball: bool = True

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("grid step must be positive")


@dataclass
class Covering:
    radius: float
    reference_norm: NormSpec
    centers: np.ndarray
    provenance: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("covering radius must be positive")
        c = np.asarray(self.centers, dtype=float)
        if c.size == 0:
            c = c.reshape(0, self.reference_norm.dim)
        if c.ndim != 2 or c.shape[1] != self.reference_norm.dim:
            raise ValueError("centers must be an (n, d) array matching the reference norm")
        self.centers = c

    def __len__(self):
        return self.centers.shape[0]

    @property
    def dim(self):
        return self.reference_norm.dim

    def to_dict(self):
        out = {"radius": self.radius, "norm": self.reference_norm.to_dict(),
               "centers": self.centers.tolist(), "provenance": self.provenance}
        if self.meta:
            out["meta"] = self.meta
        return out

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, obj):
        norm = spec_from_dict(obj["norm"])
        centers = np.asarray(obj.get("centers", []), dtype=float)
        return cls(float(obj["radius"]), norm, centers,
                   obj.get("provenance", "external"), obj.get("meta", {}))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"x{j}" for j in range(self.dim)])
        for row in self.centers:
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()


# -- lattices of grid cells ---------------------------------------------------

def _grid_shape(eps):
    if not 0 < eps:
        raise ValueError("eps must be positive")
    h = 2.0 * eps
    return h, max(1, math.ceil(1.0 / h))


def _in_ball(spec, h, J):
    P = np.zeros((J.shape[0], spec.dim))
    P[:, :J.shape[1]] = h * J
    return spec.norm(P) <= 1.0 + BALL_TOL


def _lattice(spec, free, eps, budget=None):
    """Index vectors j in {0..m-1}^free whose corner h*j lies in the ball.

    The corner is padded with zeros to the norm dimension, which for a
    symmetric norm is any face (free = d-1) or orthant (free = d) of the ball.
    Returns ``(prefixes, last_max)``: all in-ball prefixes of length free-1 and
    for each the largest admissible last index.  With ``budget``, returns None
    as soon as the count provably exceeds it.
    """
    if not spec.symmetric:
        raise NotImplementedError("grid lattices assume a symmetric norm")
    h, m = _grid_shape(eps)
    prefixes = np.zeros((1, 0), dtype=np.int64)
    for _ in range(free - 1):
        k = prefixes.shape[0]
        ext = np.concatenate([np.repeat(prefixes, m, axis=0),
                              np.tile(np.arange(m), k)[:, None]], axis=1)
        prefixes = ext[_in_ball(spec, h, ext)]
        if budget is not None and prefixes.shape[0] > budget:
            return None
        if prefixes.shape[0] > MAX_CENTERS:
            raise ValueError(f"more than {MAX_CENTERS} grid cells")
    # largest last index per prefix, by bisection over integers (monotone)
    k = prefixes.shape[0]

    def ok(last):
        return _in_ball(spec, h, np.concatenate([prefixes, last[:, None]], axis=1))

    lo = np.zeros(k, dtype=np.int64)
    hi = np.full(k, m - 1, dtype=np.int64)
    top_ok = ok(hi)
    lo = np.where(top_ok, hi, lo)
    while True:
        open_ = hi - lo > 1
        if not np.any(open_):
            break
        mid = (lo + hi) // 2
        good = ok(mid)
        lo = np.where(open_ & good, mid, lo)
        hi = np.where(open_ & ~good, mid, hi)
    return prefixes, lo


def _count(spec, free, eps, budget=None):
    res = _lattice(spec, free, eps, budget)
    if res is None:
        return budget + 1
    return int(np.sum(res[1] + 1))


def _indices(spec, free, eps):
    prefixes, last = _lattice(spec, free, eps)
    total = int(np.sum(last + 1))
    if total > MAX_CENTERS:
        raise ValueError(f"{total} grid cells exceed the {MAX_CENTERS} guard")
    reps = last + 1
    J = np.repeat(prefixes, reps, axis=0)
    starts = np.repeat(np.cumsum(reps) - reps, reps)
    col = np.arange(total) - starts
    return np.concatenate([J, col[:, None]], axis=1)


def face_cell_count(spec, eps, budget=None):
    """Number of grid cells kept on one face (the same on every face)."""
    return _count(spec, spec.dim - 1, eps, budget)


def ball_cell_count(spec, eps, budget=None):
    """Number of grid cells kept in one closed orthant of the ball."""
    return _count(spec, spec.dim, eps, budget)


def lifted_cardinality(spec, eps):
    """Upper bound 2^d * d * (cells per face) on the lifted cover's size."""
    d = spec.dim
    return 2 ** d * d * face_cell_count(spec, eps)


def _cells_to_points(spec, J, eps):
    # per-cell representative and the l_inf radius it certifies
    h, _ = _grid_shape(eps)
    lower = h * J
    upper = np.minimum(h * (J + 1), 1.0)
    centre = np.maximum(upper - eps, 0.0)
    P = np.zeros((J.shape[0], spec.dim))
    P[:, :J.shape[1]] = centre
    use_centre = spec.norm(P) <= 1.0 + BALL_TOL
    points = np.where(use_centre[:, None], centre, lower)
    radii = np.where(use_centre, eps, (upper - lower).max(axis=1))
    return points, radii, use_centre


def _embed(face_pts, chart):
    d = chart.dim
    out = np.zeros((face_pts.shape[0], d))
    cols = [j for j in range(d) if j != chart.i]
    out[:, cols] = face_pts
    return out * chart.signs


def face_cells(spec, chart, eps):
    """Face representatives for ``chart``: (points in R^d, per-point radius, is_centre)."""
    if chart.dim != spec.dim:
        raise ValueError("chart and norm dimensions differ")
    if spec.dim == 1:
        raise ValueError("faces need d >= 2")
    J = _indices(spec, spec.dim - 1, eps)
    pts, radii, is_centre = _cells_to_points(spec, J, eps)
    return _embed(pts, chart), radii, is_centre


def _check_eps(eps):
    if not 0 < eps <= 1:
        raise ValueError(f"eps must lie in (0, 1], got {eps}")


def cover_face_grid(spec, chart, eps, params=None):
    """Covering of the face B_X ∩ Q_e ∩ H_i in l_inf by one point per grid cell.

    The radius is eps unless a boundary cell had to fall back to its lower
    corner, in which case it is that cell's l_inf diameter (at most 2*eps).
    ``params`` may override the pitch (``step``); default pitch is 2*eps.
    """
    _check_eps(eps)
    if params is not None:
        eps = params.step / 2.0
    pts, radii, is_centre = face_cells(spec, chart, eps)
    radius = float(radii.max()) if len(radii) else eps
    return Covering(radius, Lp(math.inf, spec.dim), pts, "grid_face",
                    {"chart": chart.to_dict(), "eps": eps, "target_norm": spec.to_dict(),
                     "corner_cells": int(np.sum(~is_centre))})


def lift_chart_centers(spec, chart, eps):
    pts, _, _ = face_cells(spec, chart, eps)
    return lift_points(spec, chart, pts)


def _unique_rows(A):
    # first occurrence order
    _, idx = np.unique(A, axis=0, return_index=True)
    return A[np.sort(idx)]


def lift_sphere_cover(spec, eps):
    """2*eps-covering of the unit sphere in l_inf from face grids of every chart."""
    _check_eps(eps)
    bound = lifted_cardinality(spec, eps)
    if bound > MAX_CENTERS:
        raise ValueError(f"lifted cover would have up to {bound} centres")
    parts = []
    for chart in charts(spec.dim):
        try:
            parts.append(lift_chart_centers(spec, chart, eps))
        except ArithmeticError as exc:
            raise CoverError(f"shift failed on chart {chart}: {exc}") from exc
    centers = _unique_rows(np.concatenate(parts, axis=0))
    return Covering(2.0 * eps, Lp(math.inf, spec.dim), centers, "sphere_lift",
                    {"eps": eps, "bound": bound, "target_norm": spec.to_dict()})


def cover_ball_grid(spec, eps):
    """eps-covering of the unit ball in l_inf by grid cells of every orthant."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    d = spec.dim
    h, _ = _grid_shape(eps)
    J = _indices(spec, d, eps)
    upper = np.minimum(h * (J + 1), 1.0)
    centre = np.maximum(upper - eps, 0.0)
    parts = [centre * np.array(e, dtype=float)
             for e in _sign_vectors(d)]
    centers = _unique_rows(np.concatenate(parts, axis=0))
    return Covering(eps, Lp(math.inf, d), centers, "ball_grid",
                    {"eps": eps, "target_norm": spec.to_dict()})


def _sign_vectors(d):
    import itertools
    return itertools.product((1, -1), repeat=d)


# -- sampling and verification -----------------------------------------------

def sample_set(target, n, rng_seed=0):
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(rng_seed)
    spec, d = target.spec, target.dim
    if isinstance(target, (Sphere, Ball)):
        X = rng.standard_normal((n, d))
        zero = ~np.any(X != 0, axis=1)
        while np.any(zero):
            X[zero] = rng.standard_normal((int(zero.sum()), d))
            zero = ~np.any(X != 0, axis=1)
        X /= spec.norm(X)[:, None]
        if isinstance(target, Ball):
            X *= rng.random(n)[:, None] ** (1.0 / d)
        return X
    if isinstance(target, Face):
        k = d - 1
        g = max(1, math.ceil(n ** (1.0 / k))) if k else 1
        cells = rng.permutation(g ** k)[:n] if k else np.zeros(n, dtype=int)
        idx = np.stack(np.unravel_index(cells, (g,) * k), axis=1) if k else np.zeros((n, 0))
        A = (idx + rng.random(idx.shape)) / g
        P = _embed(A, FaceChart((1,) * d, target.chart.i)) if k else np.zeros((n, d))
        r = spec.norm(P)
        P = np.where((r > 1)[:, None], P / np.where(r > 1, r, 1.0)[:, None], P)
        return P * target.chart.signs
    raise TypeError(f"unknown target {target!r}")


@dataclass(frozen=True)
class VerifyReport:
    max_gap: float
    worst_point: list
    covered_fraction: float
    radius: float
    samples: int

    @property
    def passed(self):
        return self.max_gap <= self.radius + GAP_TOL and self.covered_fraction == 1.0

    def to_dict(self):
        return {"max_gap": self.max_gap, "worst_point": self.worst_point,
                "covered_fraction": self.covered_fraction, "radius": self.radius,
                "samples": self.samples, "passed": self.passed}


def nearest_distances(cover, points):
    ref = cover.reference_norm
    if ref.family == "lp" and ref.p >= 1:
        tree = cKDTree(cover.centers)
        dist, _ = tree.query(points, k=1, p=ref.p)
        return dist
    out = np.full(points.shape[0], np.inf)
    for start in range(0, points.shape[0], 256):
        chunk = points[start:start + 256]
        D = ref.norm(chunk[:, None, :] - cover.centers[None, :, :])
        out[start:start + 256] = D.min(axis=1)
    return out


def verify_covering(cover, target, samples=100_000, rng_seed=0, batch=25_000):
    """Distance from sampled target points to the nearest centre.

    Samples are drawn in batches whose seeds derive from ``rng_seed``.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if target.dim != cover.dim:
        raise ValueError("cover and target dimensions differ")
    seeds = np.random.SeedSequence(rng_seed).spawn(math.ceil(samples / batch))
    worst, worst_pt, covered, done = -np.inf, None, 0, 0
    for ss in seeds:
        n = min(batch, samples - done)
        pts = sample_set(target, n, ss)
        if len(cover) == 0:
            dist = np.full(n, np.inf)
        else:
            dist = nearest_distances(cover, pts)
        j = int(np.argmax(dist))
        if dist[j] > worst:
            worst, worst_pt = float(dist[j]), pts[j].tolist()
        covered += int(np.sum(dist <= cover.radius + GAP_TOL))
        done += n
    return VerifyReport(worst, worst_pt, covered / samples, cover.radius, samples)
