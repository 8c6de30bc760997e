"""Certified bounds on entropy numbers e_k(K, l_q^d), theoretical envelopes
and decay-rate fits.

Upper bounds come from explicit coverings with at most 2^(k-1) centres
(built in l_inf, then transferred to l_q through ||id: l_inf -> l_q|| =
d^(1/q)).  Lower bounds come from l_inf-separated point sets with more than
2^(k-1) points; since every l_q ball of radius r has l_inf-diameter at most
2r, they hold for every q.  All logarithms are base 2.
"""

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .covering import (Ball, Covering, Sphere, ball_cell_count, cover_ball_grid,
                       face_cell_count, lift_sphere_cover, verify_covering)
from .norms import Lp, fundamental_function
from .oracle import OracleError, greedy_packing, sublattice_packing, target_points

__all__ = [
    "CertificationError", "UpperBound", "LowerBound", "EntropyEstimate", "RateFit",
    "entropy_upper", "entropy_lower", "theoretical_rate", "fit_decay_rate",
    "symmetric_corollary_bounds", "CorollaryBounds", "estimate_series",
    "sphere_envelope",
]

EPS_LO = 2.0 ** -40
EPS_HI = 2.0
HALVINGS = 60
VERIFY_LIMIT = 2 ** 15
LOWER_RESOLUTION = {1: 4097, 2: 255, 3: 33}


class CertificationError(RuntimeError):
    pass


def _q_factor(q, d):
    return 1.0 if math.isinf(q) else d ** (1.0 / q)


def _parse_q(q):
    if isinstance(q, str):
        return math.inf if q.lower() in ("inf", "infinity") else float(q)
    return float(q)


@dataclass(frozen=True)
class UpperBound:
    value: float
    linf: float
    eps: float
    centers: int
    method: str
    verified: bool
    max_gap: float = float("nan")


@dataclass(frozen=True)
class LowerBound:
    value: float
    method: str
    points: int
    flagged: bool


def _search_eps(count, budget):
    """Smallest eps in [EPS_LO, EPS_HI] (to 60 halvings) with count(eps) <= budget."""
    if budget < 1 or count(EPS_HI, budget) > budget:
        return None
    lo, hi = EPS_LO, EPS_HI
    for _ in range(HALVINGS):
        mid = 0.5 * (lo + hi)
        if count(mid, budget) <= budget:
            hi = mid
        else:
            lo = mid
    return hi


def _cells(counter, spec):
    def count(eps, budget):
        # the m axis cells j*e_1 are always kept, so m > budget is infeasible
        if math.ceil(1.0 / (2.0 * eps)) > budget:
            return budget + 1
        return counter(spec, eps, budget)
    return count


def entropy_upper(spec, target, q, k, verify_samples=100_000, verify_limit=VERIFY_LIMIT,
                  rng_seed=0):
    """Certified upper bound on e_k(target, l_q^d).

    ``target`` is "sphere" or "ball" (or a Sphere/Ball of ``spec``).  The
    covering is built when it has at most ``verify_limit`` centres and then
    checked on ``verify_samples`` sampled target points; larger ones rest on
    the construction alone (``verified`` is False).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    q = _parse_q(q)
    kind = _kind(target)
    d = spec.dim
    budget = 2 ** (k - 1)
    if kind == "sphere":
        if d < 2:
            raise ValueError("sphere coverings need d >= 2")
        pieces, counter, scale = 2 ** d * d, face_cell_count, 2.0
    else:
        pieces, counter, scale = 2 ** d, ball_cell_count, 1.0
    eps = _search_eps(_cells(counter, spec), budget // pieces)
    if eps is None or scale * eps >= 1.0:
        linf, method, n, eps = 1.0, "trivial", 1, 1.0
    else:
        linf, method = scale * eps, ("sphere_lift" if kind == "sphere" else "ball_grid")
        n = pieces * counter(spec, eps)
    verified, gap = False, float("nan")
    if n <= verify_limit and verify_samples:
        cover = _build(spec, kind, method, eps)
        if len(cover) > budget:
            raise CertificationError(f"cover has {len(cover)} > 2^(k-1) centres")
        T = Sphere(spec) if kind == "sphere" else Ball(spec)
        rep = verify_covering(cover, T, verify_samples, rng_seed)
        if not rep.passed:
            raise CertificationError(
                f"covering gap {rep.max_gap} exceeds radius {cover.radius} at {rep.worst_point}")
        verified, gap = True, rep.max_gap
    return UpperBound(linf * _q_factor(q, d), linf, eps, n, method, verified, gap)


def _kind(target):
    if isinstance(target, Sphere) or target == "sphere":
        return "sphere"
    if isinstance(target, Ball) or target == "ball":
        return "ball"
    raise ValueError(f"target must be 'sphere' or 'ball', got {target!r}")


def _build(spec, kind, method, eps):
    if method == "trivial":
        return Covering(1.0, Lp(math.inf, spec.dim), np.zeros((1, spec.dim)), "trivial")
    if kind == "sphere":
        return lift_sphere_cover(spec, eps)
    return cover_ball_grid(spec, eps)


def _packing_bound(T, k, resolution):
    """Largest certified l_inf half-separation of > 2^(k-1) discretized target points."""
    need = 2 ** (k - 1) + 1
    pts = target_points(T, resolution)
    if pts.shape[0] < need:
        return 0.0, 0
    h = 2.0 / (resolution - 1)
    if isinstance(T, Ball):
        # grid points: cosets of t*Z^d are (t*h)-separated
        def pack(t):
            return sublattice_packing(pts, h, t)
    else:
        def pack(t):
            return greedy_packing(pts, (t - 0.5) * h)

    lo, hi = 1, resolution
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if len(pack(mid)) >= need:
            lo = mid
        else:
            hi = mid
    kept = pack(lo)
    if len(kept) < need:
        return 0.0, 0
    dist, _ = cKDTree(kept).query(kept, k=2, p=np.inf)
    return float(dist[:, 1].min()) / 2.0, len(kept)


def entropy_lower(spec, target, q, k, grid_resolution=None):
    """Certified lower bound on e_k(target, l_q^d), or 0 flagged when none is reachable.

    Sphere targets use the projection onto a coordinate hyperplane, whose image is
    the (d-1)-dimensional ball, as well as a direct packing of the sphere.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    kind = _kind(target)
    d = spec.dim
    routes = []
    if kind == "sphere" and d >= 2:
        if d - 1 <= 3:
            routes.append(("projection", Ball(spec.with_dim(d - 1)), d - 1))
        if d <= 3:
            routes.append(("packing", Sphere(spec), d))
    elif kind == "ball" and d <= 3:
        routes.append(("packing", Ball(spec), d))
    best = LowerBound(0.0, "none", 0, True)
    for name, T, dim in routes:
        res = grid_resolution or LOWER_RESOLUTION[dim]
        try:
            value, n = _packing_bound(T, k, res)
        except OracleError:
            continue
        if value > best.value:
            best = LowerBound(value, name, n, False)
    return best


def theoretical_rate(p, q, d, k, sphere=True, constants=None, exponent="sharp"):
    """Piecewise order of e_k of the l_p ball or sphere in l_q^d, constants supplied.

    ``constants`` maps "c_small", "c_mid", "c_large" to the (unknown) factors,
    all 1 by default.  ``exponent="volume"`` gives the weaker sphere exponent
    k/(d - min(1, p)) for comparison.
    """
    p, q = _parse_q(p), _parse_q(q)
    if p > q:
        raise ValueError("need p <= q")
    if d < 2:
        raise ValueError("need d >= 2")
    c = {"c_small": 1.0, "c_mid": 1.0, "c_large": 1.0, **(constants or {})}
    inv = lambda r: 0.0 if math.isinf(r) else 1.0 / r
    if k <= math.log2(d):
        return c["c_small"]
    if k < d:
        return c["c_mid"] * (math.log2(1 + d / k) / k) ** (inv(p) - inv(q))
    if not sphere:
        D = d
    elif exponent == "volume":
        D = d - min(1.0, p)
    else:
        D = d - 1
    return c["c_large"] * 2.0 ** (-k / D) * d ** (inv(q) - inv(p))


def sphere_envelope(spec, q, k):
    """Envelope 2^(-k/(d-1)) * lambda_Y(d-1)/lambda_X(d-1) for Y = l_q, any family."""
    q = _parse_q(q)
    d = spec.dim
    if spec.family == "lp" and spec.p <= q:
        return theoretical_rate(spec.p, q, d, k)
    lam_y = fundamental_function(Lp(q, d), d - 1)
    lam_x = fundamental_function(spec, d - 1)
    return 2.0 ** (-k / (d - 1)) * lam_y / lam_x


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    k_range: tuple
    residual: float
    points: int


def fit_decay_rate(series):
    """Least-squares line through (k, log2 value)."""
    series = list(series)
    if len(series) < 4:
        raise ValueError("need at least 4 points")
    k = np.array([s[0] for s in series], dtype=float)
    v = np.array([s[1] for s in series], dtype=float)
    if np.any(v <= 0) or not np.all(np.isfinite(v)):
        raise ValueError("values must be positive and finite")
    if k.min() == k.max():
        raise ValueError("need at least two distinct k")
    y = np.log2(v)
    slope, intercept = np.polyfit(k, y, 1)
    resid = y - (slope * k + intercept)
    return RateFit(float(slope), float(intercept), (int(k.min()), int(k.max())),
                   float(np.sqrt(np.mean(resid ** 2))), len(series))


@dataclass(frozen=True)
class EntropyEstimate:
    k: int
    upper: float
    lower: float
    envelope: float
    d: int
    q: float
    norm: dict
    upper_method: str = ""
    lower_method: str = ""
    verified: bool = False
    flags: tuple = field(default_factory=tuple)

    def to_dict(self):
        out = asdict(self)
        out["q"] = "inf" if math.isinf(self.q) else self.q
        out["flags"] = list(self.flags)
        return out


def estimate_series(spec, target, q, ks, verify_samples=100_000, verify_limit=VERIFY_LIMIT,
                    rng_seed=0, lower=True, grid_resolution=None):
    """EntropyEstimate per k, with the sandwich lower <= upper asserted."""
    q = _parse_q(q)
    out = []
    for k in ks:
        up = entropy_upper(spec, target, q, k, verify_samples, verify_limit, rng_seed + k)
        lo = (entropy_lower(spec, target, q, k, grid_resolution) if lower
              else LowerBound(0.0, "skipped", 0, True))
        flags = []
        if up.method == "trivial":
            flags.append("upper_trivial")
        if lo.flagged:
            flags.append("no_lower_certificate")
        if not up.verified:
            flags.append("upper_unverified")
        if lo.value > up.value * (1 + 1e-12):
            raise CertificationError(f"k={k}: lower {lo.value} exceeds upper {up.value}")
        env = sphere_envelope(spec, q, k) if _kind(target) == "sphere" else (
            theoretical_rate(spec.p, q, spec.dim, k, sphere=False)
            if spec.family == "lp" and spec.dim >= 2 and spec.p <= q else float("nan"))
        out.append(EntropyEstimate(k, up.value, lo.value, env, spec.dim, q, spec.to_dict(),
                                   up.method, lo.method, up.verified, tuple(flags)))
    return out


@dataclass(frozen=True)
class CorollaryBounds:
    lower: float
    upper: float
    regime: str
    consistent: bool
    constant_note: str = "c (unspecified constant of the ball bound)"


def symmetric_corollary_bounds(lambda_X, lambda_Y, d, k, c=1.0):
    """Two-sided bounds for spheres of symmetric spaces from fundamental functions.

    ``lambda_X``/``lambda_Y`` are sequences with ``lambda[l-1] = lambda(l)``.
    Regimes: "small_k" (k <= d-1, lower bound only), "gap" (no claim) and
    "large_k" (k >= 2d + ceil(log2 d) - 1).
    """
    lx = np.asarray(lambda_X, dtype=float)
    ly = np.asarray(lambda_Y, dtype=float)
    if d < 2 or len(lx) < d - 1 or len(ly) < d - 1:
        raise ValueError("lambda tables need at least d-1 entries")
    if np.any(lx[:d - 1] <= 0) or np.any(ly[:d - 1] <= 0):
        raise ValueError("lambda tables must be positive")
    if k < 1:
        raise ValueError("k must be >= 1")
    start = 2 * d + math.ceil(math.log2(d)) - 1
    if k <= d - 1:
        ratios = ly[k - 1:d - 1] / lx[k - 1:d - 1]
        return CorollaryBounds(float(ratios.max()) / (2 * math.e), math.inf, "small_k", True)
    if k < start:
        return CorollaryBounds(float("nan"), math.inf, "gap", True)
    base = 2.0 ** (-k / (d - 1)) * ly[d - 2] / lx[d - 2]
    lower, upper = base / math.e, 32 * c * base
    return CorollaryBounds(float(lower), float(upper), "large_k", bool(lower <= upper))
