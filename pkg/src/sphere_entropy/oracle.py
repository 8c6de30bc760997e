"""Covering and packing numbers of small discretized targets in l_inf.

Targets are replaced by finite point sets: grid points of [-1, 1]^d inside
the ball, or the radial projections of the grid points on the boundary of
the cube for the sphere.  Covering numbers then come from set cover over
candidate centres; packing numbers from a greedy separated subset.

Candidate centres are the canonical ones: an l_inf ball can always be slid,
axis by axis, until its lower face touches a covered point without losing
coverage, so centres of the form ``(t_1 + eps, ..., t_d + eps)`` with each t_j
a coordinate value occurring in the target suffice.  Set cover over them is
therefore exact for the discretized instance.
"""

import itertools
import math

import numpy as np
from scipy.spatial import cKDTree

from .covering import Ball, Sphere

__all__ = ["OracleError", "SolverLimitError", "target_points", "covering_number_oracle",
           "greedy_packing", "sublattice_packing", "packing_oracle", "solve_set_cover"]

MAX_RESOLUTION = 256
MAX_RESOLUTION_1D = 1 << 16
MAX_CANDIDATES = 200_000
TOL = 1e-12


class OracleError(ValueError):
    """Instance outside what the oracles accept (dimension, resolution, size)."""


class SolverLimitError(RuntimeError):
    """The exact search hit its node limit."""


def target_points(target, grid_resolution):
    """Finite l_inf-discretization of a Ball or Sphere target, sorted lexicographically."""
    d = target.dim
    if d > 3:
        raise OracleError("oracles are limited to dimension <= 3")
    cap = MAX_RESOLUTION_1D if d == 1 else MAX_RESOLUTION
    if not 2 <= grid_resolution <= cap:
        raise OracleError(f"grid_resolution must lie in [2, {cap}] for d={d}")
    axis = np.linspace(-1.0, 1.0, grid_resolution)
    G = np.array(list(itertools.product(axis, repeat=d)))
    spec = target.spec
    if isinstance(target, Ball):
        P = G[spec.norm(G) <= 1.0 + TOL]
    elif isinstance(target, Sphere):
        B = G[np.any(np.abs(G) == 1.0, axis=1)]
        P = B / spec.norm(B)[:, None]
        P = np.unique(np.round(P, 12), axis=0)
    else:
        raise OracleError(f"unsupported target {target!r}")
    order = np.lexsort(P.T[::-1])
    return P[order]


def _candidates(points, eps):
    axes = [np.unique(np.round(points[:, j], 12)) + eps for j in range(points.shape[1])]
    size = math.prod(len(a) for a in axes)
    if size > MAX_CANDIDATES:
        raise OracleError(f"{size} candidate centres exceed the {MAX_CANDIDATES} guard")
    C = np.array(list(itertools.product(*axes)))
    return C


def _cover_matrix(points, centers, eps):
    M = np.zeros((centers.shape[0], points.shape[0]), dtype=bool)
    for start in range(0, centers.shape[0], 512):
        c = centers[start:start + 512]
        M[start:start + 512] = np.max(np.abs(c[:, None, :] - points[None, :, :]), axis=2) <= eps + TOL
    return M


def _greedy(M):
    Mf = M.astype(np.float32)
    U = np.ones(M.shape[1], dtype=bool)
    chosen = []
    while U.any():
        gain = Mf @ U.astype(np.float32)
        best = int(np.argmax(gain))      # first maximum: lexicographic tie-break
        if gain[best] == 0:
            raise RuntimeError("target point not coverable by any candidate")
        chosen.append(best)
        U &= ~M[best]
    return chosen


def _undominated(rows, R):
    # drop rows whose coverage (restricted to the uncovered set) is inside another's
    keep = []
    for r in rows:
        mine = R[r]
        if any(not np.any(mine & ~R[k]) for k in keep):
            continue
        keep.append(r)
    return keep


def _bitsets(M):
    packed = np.packbits(M, axis=0, bitorder="little")
    return [int.from_bytes(packed[:, j].tobytes(), "little") for j in range(M.shape[1])]


def _disjoint_lower_bound(open_pts, colbits):
    # points no two of which share a candidate each need their own centre
    used, count = 0, 0
    for u in open_pts:
        b = colbits[u]
        if not b & used:
            used |= b
            count += 1
    return count


def _exact(M, incumbent, node_limit):
    Mf = M.astype(np.float32)
    per_point = M.sum(axis=0)
    order = np.argsort(per_point, kind="stable")
    colbits = _bitsets(M)
    best = [len(incumbent), list(incumbent)]
    nodes = [0]

    def rec(U, chosen):
        nodes[0] += 1
        if nodes[0] > node_limit:
            raise SolverLimitError(f"branch and bound exceeded {node_limit} nodes")
        left = int(U.sum())
        if left == 0:
            if len(chosen) < best[0]:
                best[0], best[1] = len(chosen), list(chosen)
            return
        gain = Mf @ U.astype(np.float32)
        if len(chosen) + math.ceil(left / gain.max()) >= best[0]:
            return
        if len(chosen) + _disjoint_lower_bound(order[U[order]], colbits) >= best[0]:
            return
        # branch on the uncovered point with the fewest covering candidates
        open_pts = np.flatnonzero(U)
        u = int(open_pts[int(np.argmin(per_point[open_pts]))])
        rows = np.flatnonzero(M[:, u])
        rows = rows[np.argsort(-gain[rows], kind="stable")]
        for r in _undominated(rows, M[:, open_pts]):
            rec(U & ~M[r], chosen + [int(r)])

    rec(np.ones(M.shape[1], dtype=bool), [])
    return best[1]


def solve_set_cover(M, mode="exact", node_limit=200_000):
    """Indices of rows of the boolean cover matrix ``M`` covering every column."""
    greedy = _greedy(M)
    if mode == "greedy":
        return greedy
    if mode != "exact":
        raise ValueError(f"unknown mode {mode!r}")
    return _exact(M, greedy, node_limit)


def covering_number_oracle(target, eps, grid_resolution=None, mode="exact"):
    """Smallest number of l_inf eps-balls covering the discretized target."""
    if not eps > 0:
        raise OracleError("eps must be positive")
    if eps >= 1:
        return 1
    points = target_points(target, grid_resolution or default_resolution(target.dim))
    centers = _candidates(points, eps)
    M = _cover_matrix(points, centers, eps)
    M = M[M.any(axis=1)]
    return len(solve_set_cover(M, mode))


def default_resolution(d):
    return {1: 129, 2: 64, 3: 16}.get(d, 8)


def greedy_packing(points, separation):
    """Lexicographic greedy subset with pairwise l_inf distance > ``separation``."""
    points = np.asarray(points, dtype=float)
    if separation <= 0 or len(points) == 0:
        return points
    tree = cKDTree(points)
    blocked = np.zeros(len(points), dtype=bool)
    kept = []
    for idx in range(len(points)):
        if blocked[idx]:
            continue
        kept.append(idx)
        blocked[tree.query_ball_point(points[idx], separation, p=np.inf)] = True
    return points[kept]


def sublattice_packing(points, step, t):
    """Largest coset of the sublattice t*Z^d among grid points of pitch ``step``.

    Points of one coset are pairwise at l_inf distance >= t * step.
    """
    points = np.asarray(points, dtype=float)
    idx = np.rint((points + 1.0) / step).astype(np.int64)
    _, inverse, counts = np.unique(idx % t, axis=0, return_inverse=True, return_counts=True)
    return points[inverse.ravel() == int(np.argmax(counts))]


def packing_oracle(target, eps, grid_resolution=None):
    """Size of a greedy 2*eps-separated subset; a lower bound for the covering number."""
    if not eps > 0:
        raise OracleError("eps must be positive")
    points = target_points(target, grid_resolution or default_resolution(target.dim))
    return len(greedy_packing(points, 2 * eps * (1 + TOL)))
