"""Sampled property suites: Lipschitz bound and monotonicity of the shift, and
an empirical Lipschitz scan of the Mazur map.

Every suite is deterministic given its seed; charts are visited in the order of
:func:`geometry.charts`, each with its own spawned random stream.
"""

import math
from dataclasses import asdict, dataclass

import numpy as np

from .geometry import charts, lift_points, mazur_map, shift_amounts
from .norms import Lorentz, Lp, Orlicz, PowerLog, PowerWeight

__all__ = ["SuiteResult", "builtin_specs", "sample_face", "dominated_pairs", "close_pairs",
           "lipschitz_suite", "monotonicity_suite", "MazurEstimate", "mazur_lipschitz",
           "mazur_scan"]

SUITE_TOL = 1e-9


def builtin_specs(d):
    """The six reference quasi-norms used by the suites, in dimension d."""
    return [Lp(0.5, d), Lp(1, d), Lp(2, d), Lp(math.inf, d),
            Lorentz(1, PowerWeight(-0.5), d), Orlicz(PowerLog(2, 1), d)]


@dataclass(frozen=True)
class SuiteResult:
    suite: str
    norm: dict
    d: int
    charts: int
    pairs: int
    violations: int
    worst_excess: float

    @property
    def passed(self):
        return self.violations == 0

    def to_dict(self):
        out = asdict(self)
        out["passed"] = self.passed
        return out


def _clamp(spec, Y, rng):
    # radial rescale into the ball; half the clamped points land on the sphere,
    # the other half at a uniform radius so the interior is sampled too
    r = spec.norm(Y)
    out = r > 1
    radius = np.where(rng.random(len(Y)) < 0.5, 1.0, rng.random(len(Y)))
    Y[out] *= (radius[out] / r[out])[:, None]
    return Y


def _uniform(rng, n, d):
    # drawn coordinate-major: the n x d result is column-major, which keeps the
    # row reductions in the norm evaluations fast
    return rng.random((d, n)).T


def sample_face(spec, chart, n, rng):
    """n points of the face B_X ∩ Q_e ∩ H_i (box sample, radially clamped)."""
    Y = _uniform(rng, n, chart.dim)
    Y[:, chart.i] = 0.0
    return _clamp(spec, Y, rng) * chart.signs


def dominated_pairs(spec, chart, n, rng):
    """Pairs (x, y) in the face with |x| <= |y| coordinatewise."""
    Y = sample_face(spec, chart, n, rng)
    X = _uniform(rng, *Y.shape) * Y
    X[:, chart.i] = 0.0
    return X, Y


def close_pairs(spec, chart, n, rng):
    """Pairs of face points at l_inf distances spread over 10^-6 .. 1."""
    X = sample_face(spec, chart, n, rng)
    step = 10.0 ** rng.uniform(-6, 0, size=(n, 1))
    Y = np.abs(X) + step * (2 * _uniform(rng, *X.shape) - 1)
    Y = np.clip(Y, 0.0, 1.0)
    Y[:, chart.i] = 0.0
    return X, _clamp(spec, Y, rng) * chart.signs


def _streams(seed, count):
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


def lipschitz_suite(spec, pairs_per_chart=10_000, seed=0, tol=SUITE_TOL):
    """Check ||Delta(x) - Delta(y)||_inf <= 2 ||x - y||_inf on every chart.

    Half of the pairs are independent face points, half are close pairs.
    """
    d = spec.dim
    cs = list(charts(d))
    violations, worst = 0, -math.inf
    for chart, rng in zip(cs, _streams(seed, len(cs))):
        half = pairs_per_chart // 2
        X1 = sample_face(spec, chart, half, rng)
        Y1 = sample_face(spec, chart, half, rng)
        X2, Y2 = close_pairs(spec, chart, pairs_per_chart - half, rng)
        XY = np.asfortranarray(np.vstack([X1, X2, Y1, Y2]))
        X, Y = XY[:pairs_per_chart], XY[pairs_per_chart:]
        L = lift_points(spec, chart, XY)
        LX, LY = L[:pairs_per_chart], L[pairs_per_chart:]
        excess = (np.max(np.abs(LX - LY), axis=1) - 2 * np.max(np.abs(X - Y), axis=1))
        violations += int(np.sum(excess > tol))
        worst = max(worst, float(excess.max()))
    return SuiteResult("lipschitz", spec.to_dict(), d, len(cs), pairs_per_chart * len(cs),
                       violations, worst)


def monotonicity_suite(spec, pairs_per_chart=10_000, seed=0, tol=SUITE_TOL):
    """Check s(y) <= s(x) <= s(y) + ||x - y||_inf for dominated pairs |x| <= |y|."""
    d = spec.dim
    cs = list(charts(d))
    violations, worst = 0, -math.inf
    for chart, rng in zip(cs, _streams(seed, len(cs))):
        X, Y = dominated_pairs(spec, chart, pairs_per_chart, rng)
        s = shift_amounts(spec, chart, np.asfortranarray(np.vstack([X, Y])))
        sx, sy = s[:len(X)], s[len(X):]
        excess = np.maximum(sy - sx, sx - sy - np.max(np.abs(X - Y), axis=1))
        violations += int(np.sum(excess > tol))
        worst = max(worst, float(excess.max()))
    return SuiteResult("monotonicity", spec.to_dict(), d, len(cs), pairs_per_chart * len(cs),
                       violations, worst)


@dataclass(frozen=True)
class MazurEstimate:
    p: float
    d: int
    pairs: int
    lipschitz: float

    def to_dict(self):
        return asdict(self)


def _sphere_pairs(d, n, rng):
    # pairs supported on a random set of 2..d coordinates, at distances 10^-6 .. 2;
    # low-dimensional configurations embed into every d, which is where the sup lives
    m = rng.integers(2, d + 1, size=n) if d > 2 else np.full(n, 2)
    mask = np.argsort(rng.random((n, d)), axis=1) < m[:, None]
    X = rng.standard_normal((n, d)) * mask
    X /= np.linalg.norm(X, axis=1)[:, None]
    step = 10.0 ** rng.uniform(-6, 0.3, size=(n, 1))
    Y = X + step * rng.standard_normal((n, d)) * mask
    Y /= np.linalg.norm(Y, axis=1)[:, None]
    return X, Y


def mazur_lipschitz(p, d, pairs=10_000, seed=0):
    """Largest sampled ratio ||M(x) - M(y)||_p / ||x - y||_2 over pairs of the l_2 sphere."""
    if d < 2:
        raise ValueError("need d >= 2")
    rng = np.random.default_rng(seed)
    X, Y = _sphere_pairs(d, pairs, rng)
    spec = Lp(p, d)
    MX = np.array([mazur_map(p, x) for x in X])
    MY = np.array([mazur_map(p, y) for y in Y])
    gap = np.linalg.norm(X - Y, axis=1)
    ok = gap > 0
    ratio = spec.norm(MX[ok] - MY[ok]) / gap[ok]
    return MazurEstimate(float(p), d, int(ok.sum()), float(ratio.max()))


def mazur_scan(p, dims=(2, 4, 8, 16, 32), pairs=10_000, seed=0):
    """Estimates for each d, with seeds spawned per dimension."""
    seeds = np.random.SeedSequence(seed).spawn(len(dims))
    return [mazur_lipschitz(p, d, pairs, int(s.generate_state(1)[0])) for d, s in zip(dims, seeds)]
