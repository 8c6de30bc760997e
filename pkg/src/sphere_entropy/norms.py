"""Quasi-norm families on R^d: l_p, generalized Lorentz and Orlicz.

Every family exposes two vectorized functionals over the last axis:

``norm(X)``
    the quasi-norm itself.
``level(X)``
    a cheaper monotone surrogate with ``level(X) <= 1`` exactly when
    ``norm(X) <= 1`` and ``level(X) == 1`` exactly on the unit sphere
    (the unscaled ``(sum |x|^p)^(1/p)`` for l_p, the modular ``sum M(|x|)``
    for Orlicz, ...).  Root finders on the sphere work with ``level`` to
    avoid nested solves; keeping it close to affine along rays speeds them up.

Orlicz functions that the literature defines only near zero are extended
linearly past the end of their domain with the one-sided slope there, which
keeps them convex and increasing.  Orlicz norms are normalized so that the
unit vectors have norm one.
"""

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from ._roots import regula_falsi

__all__ = [
    "NormSpecError", "PowerWeight", "TableWeight", "PowerM", "ExpInvSquare",
    "PowerLog", "NormSpec", "Lp", "Lorentz", "Orlicz", "as_point",
    "eval_norm", "rearrange_decreasing", "fundamental_function",
    "fundamental_function_formula", "shadow_norm", "check_monotone",
    "MonotoneReport", "spec_from_json", "spec_from_dict",
]

MIN_EXPONENT = 0.1
ORLICZ_RTOL = 1e-12
ORLICZ_MAXITER = 200


class NormSpecError(ValueError):
    pass


def _exponent(value, name):
    if isinstance(value, str):
        if value.strip().lower() not in ("inf", "infinity"):
            raise NormSpecError(f"{name}: cannot parse {value!r}")
        return math.inf
    value = float(value)
    if math.isnan(value):
        raise NormSpecError(f"{name} is NaN")
    return value


def _dump_exponent(value):
    return "inf" if math.isinf(value) else value


def as_point(x, dim=None):
    """Return ``x`` as a finite 1-D float array, checking its dimension."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"expected a 1-D point, got shape {x.shape}")
    if dim is not None and x.shape[0] != dim:
        raise ValueError(f"dimension mismatch: point has {x.shape[0]}, norm has {dim}")
    if not np.all(np.isfinite(x)):
        raise ValueError("point has non-finite entries")
    return x


# -- weights -----------------------------------------------------------------

@dataclass(frozen=True)
class PowerWeight:
    """w(t) = t**exponent; non-increasing needs exponent <= 0."""
    exponent: float

    def __post_init__(self):
        if not self.exponent <= 0:
            raise NormSpecError("PowerWeight exponent must be <= 0 (non-increasing weight)")

    def values(self, n):
        return np.arange(1, n + 1, dtype=float) ** self.exponent

    def to_dict(self):
        return {"power": self.exponent}


@dataclass(frozen=True)
class TableWeight:
    values_: tuple

    def __post_init__(self):
        w = np.asarray(self.values_, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise NormSpecError("weight table must be a non-empty list")
        if not np.all(w > 0) or not np.all(np.isfinite(w)):
            raise NormSpecError("weight table entries must be positive and finite")
        if w[0] != 1.0:
            raise NormSpecError("weight table must start with w(1) = 1")
        if np.any(np.diff(w) > 0):
            raise NormSpecError("weight table must be non-increasing")

    def values(self, n):
        if n > len(self.values_):
            raise NormSpecError(f"weight table has {len(self.values_)} entries, need {n}")
        return np.asarray(self.values_[:n], dtype=float)

    def to_dict(self):
        return {"table": list(self.values_)}


def _weight_from_dict(obj):
    if "power" in obj:
        return PowerWeight(float(obj["power"]))
    if "table" in obj:
        return TableWeight(tuple(float(v) for v in obj["table"]))
    raise NormSpecError(f"unknown weight {obj!r}")


# -- Orlicz functions --------------------------------------------------------

class _OrliczFunction:
    """Convex increasing M on [0, t0), continued linearly on [t0, inf)."""

    t0 = math.inf
    closed_form_inverse = True

    def _core(self, t):
        raise NotImplementedError

    def _core_inverse(self, y):
        raise NotImplementedError

    def _slope(self):
        raise NotImplementedError

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        t0 = self.t0
        if math.isinf(t0):
            return self._core(t)
        m0, slope = self._m0, self._slope()
        return np.where(t < t0, self._core(np.minimum(t, t0)), m0 + slope * (t - t0))

    @property
    def _m0(self):
        return float(self._core(np.array(self.t0)))

    def inverse(self, y):
        y = np.asarray(y, dtype=float)
        if np.any(y < 0):
            raise ValueError("M^-1 is defined for y >= 0")
        if math.isinf(self.t0):
            return self._core_inverse(y)
        flat = y.reshape(-1)
        m0 = self._m0
        inside = flat < m0
        out = np.empty_like(flat)
        out[inside] = self._core_inverse(flat[inside])
        out[~inside] = self.t0 + (flat[~inside] - m0) / self._slope()
        return out.reshape(y.shape)

    def _bisect_inverse(self, y):
        # M is increasing on [0, t0): plain bisection
        lo = np.zeros_like(y)
        hi = np.full_like(y, self.t0)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            below = self._core(mid) < y
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
            if np.all(hi - lo <= 1e-16 * np.maximum(hi, 1e-300)):
                break
        return 0.5 * (lo + hi)


@dataclass(frozen=True)
class PowerM(_OrliczFunction):
    """M(t) = t**p, p >= 1; the Orlicz norm is then the l_p norm."""
    p: float

    def __post_init__(self):
        if not self.p >= 1:
            raise NormSpecError("Orlicz power needs p >= 1")

    def _core(self, t):
        return t ** self.p

    def _core_inverse(self, y):
        return y ** (1.0 / self.p)

    def to_dict(self):
        return {"kind": "power", "p": self.p}


@dataclass(frozen=True)
class ExpInvSquare(_OrliczFunction):
    """M(t) = exp(-1/t^2) on [0, 1/2)."""

    t0 = 0.5

    def _core(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", over="ignore"):
            return np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0) ** 2), 0.0)

    def _core_inverse(self, y):
        with np.errstate(divide="ignore"):
            return np.where(y > 0, 1.0 / np.sqrt(-np.log(np.where(y > 0, y, 0.5))), 0.0)

    def _slope(self):
        t = self.t0
        return 2.0 / t ** 3 * math.exp(-1.0 / t ** 2)

    def to_dict(self):
        return {"kind": "exp_inv_square"}


@dataclass(frozen=True)
class PowerLog(_OrliczFunction):
    """M(t) = t**p * ln(1/t)**alpha on [0, t0), p > 1, alpha > 0.

    t0 is the largest point up to which this expression stays convex.
    """
    p: float
    alpha: float

    closed_form_inverse = False

    def __post_init__(self):
        if not (self.p > 1 and self.alpha > 0):
            raise NormSpecError("PowerLog needs p > 1 and alpha > 0")
        beta, gamma = self.beta_gamma
        if beta ** 2 < gamma:
            raise NormSpecError("PowerLog needs beta^2 >= gamma")

    @property
    def beta_gamma(self):
        p, a = self.p, self.alpha
        return a * (2 * p - 1) / (p * p - p), (a * a - a) / (p * p - p)

    @property
    def t0(self):
        beta, gamma = self.beta_gamma
        return 1.0 / math.exp(beta + math.sqrt(beta ** 2 - gamma))

    def _core(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            safe = np.where(t > 0, t, 1.0)
            val = safe ** self.p * (-np.log(safe)) ** self.alpha
        return np.where(t > 0, val, 0.0)

    def _core_inverse(self, y):
        return self._bisect_inverse(y)

    def _slope(self):
        t, p, a = self.t0, self.p, self.alpha
        L = -math.log(t)
        return t ** (p - 1) * L ** (a - 1) * (p * L - a)

    def to_dict(self):
        return {"kind": "power_log", "p": self.p, "alpha": self.alpha}


def _orlicz_from_dict(obj):
    kind = obj.get("kind")
    if kind == "power":
        return PowerM(float(obj["p"]))
    if kind == "exp_inv_square":
        return ExpInvSquare()
    if kind == "power_log":
        return PowerLog(float(obj["p"]), float(obj["alpha"]))
    raise NormSpecError(f"unknown Orlicz kind {kind!r}")


# -- norm families -----------------------------------------------------------

class NormSpec:
    """Base class of the closed set of supported quasi-norm families."""

    family = None
    dim: int
    symmetric = True
    monotone = True

    def _check_dim(self):
        if not (isinstance(self.dim, (int, np.integer)) and self.dim >= 1):
            raise NormSpecError(f"dim must be a positive integer, got {self.dim!r}")

    def with_dim(self, dim):
        return replace(self, dim=dim)

    def level(self, X):
        raise NotImplementedError

    def norm(self, X):
        raise NotImplementedError

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    def label(self):
        return self.to_json()


@dataclass(frozen=True)
class Lp(NormSpec):
    p: float
    dim: int
    family = "lp"

    def __post_init__(self):
        object.__setattr__(self, "p", _exponent(self.p, "p"))
        self._check_dim()
        if not self.p >= MIN_EXPONENT:
            raise NormSpecError(f"p must be >= {MIN_EXPONENT}, got {self.p}")

    def level(self, X):
        A = np.abs(X)
        if math.isinf(self.p):
            return A.max(axis=-1)
        return (A ** self.p).sum(axis=-1) ** (1.0 / self.p)

    def norm(self, X):
        A = np.abs(np.asarray(X, dtype=float))
        m = A.max(axis=-1)
        if math.isinf(self.p):
            return m
        safe = np.where(m > 0, m, 1.0)
        s = ((A / safe[..., None]) ** self.p).sum(axis=-1)
        return np.where(m > 0, safe * s ** (1.0 / self.p), 0.0)

    def to_dict(self):
        return {"family": "lp", "p": _dump_exponent(self.p), "dim": int(self.dim)}


@dataclass(frozen=True)
class Lorentz(NormSpec):
    """(sum_i (w(i) x*_i)^q)^(1/q) over the decreasing rearrangement x*."""
    q: float
    weight: object
    dim: int
    family = "lorentz"

    def __post_init__(self):
        object.__setattr__(self, "q", _exponent(self.q, "q"))
        self._check_dim()
        if not self.q >= MIN_EXPONENT:
            raise NormSpecError(f"q must be >= {MIN_EXPONENT}, got {self.q}")
        object.__setattr__(self, "_w", self.weight.values(self.dim))

    def _weighted(self, X):
        return -np.sort(-np.abs(X), axis=-1) * self._w

    def level(self, X):
        W = self._weighted(X)
        if math.isinf(self.q):
            return W.max(axis=-1)
        return (W ** self.q).sum(axis=-1) ** (1.0 / self.q)

    def norm(self, X):
        W = self._weighted(np.asarray(X, dtype=float))
        m = W.max(axis=-1)
        if math.isinf(self.q):
            return m
        safe = np.where(m > 0, m, 1.0)
        s = ((W / safe[..., None]) ** self.q).sum(axis=-1)
        return np.where(m > 0, safe * s ** (1.0 / self.q), 0.0)

    def to_dict(self):
        return {"family": "lorentz", "q": _dump_exponent(self.q),
                "weight": self.weight.to_dict(), "dim": int(self.dim)}


@dataclass(frozen=True)
class Orlicz(NormSpec):
    """Luxemburg norm inf{rho > 0 : sum M(c |x_i| / rho) <= 1}, c = M^-1(1)."""
    M: object
    dim: int
    family = "orlicz"

    def __post_init__(self):
        self._check_dim()
        scale = float(self.M.inverse(np.array(1.0)))
        object.__setattr__(self, "scale", scale)
        # ||x|| / max|x| lies in [1, lambda(d)]
        top = scale / float(self.M.inverse(np.array(1.0 / self.dim)))
        object.__setattr__(self, "_ratio_hi", top)

    def modular(self, X):
        return self.M(self.scale * np.abs(X)).sum(axis=-1)

    level = modular

    def norm(self, X):
        A = np.abs(np.asarray(X, dtype=float))
        shape = A.shape[:-1]
        A = A.reshape(-1, A.shape[-1])
        m = A.max(axis=-1)
        out = np.zeros(A.shape[0])
        nz = m > 0
        if np.any(nz):
            Z = A[nz] / m[nz, None]
            # solve modular(u Z) = 1 for u = max|x| / ||x|| in [1 / lambda(d), 1];
            # the modular is convex in u, so regula falsi converges quickly
            ulo = np.full(Z.shape[0], 1.0 / (self._ratio_hi * (1 + 1e-9)))
            uhi = np.ones(Z.shape[0])

            def f(u, rows):
                return self.modular(Z[rows] * u[:, None]) - 1.0

            rows = np.arange(Z.shape[0])
            u = regula_falsi(f, ulo, uhi, f(ulo, rows), f(uhi, rows), 1e-15, ORLICZ_RTOL,
                         ORLICZ_MAXITER)
            out[nz] = m[nz] / u
        return out.reshape(shape)

    def norm_bisect(self, X):
        """Reference evaluation by plain bisection on rho / max|x| in [1, lambda(d)]."""
        A = np.abs(np.asarray(X, dtype=float))
        shape = A.shape[:-1]
        A = A.reshape(-1, A.shape[-1])
        m = A.max(axis=-1)
        out = np.zeros(A.shape[0])
        nz = m > 0
        if np.any(nz):
            Z = A[nz] / m[nz, None]
            lo = np.ones(Z.shape[0])
            hi = np.full(Z.shape[0], self._ratio_hi * (1 + 1e-9))
            for _ in range(ORLICZ_MAXITER):
                mid = 0.5 * (lo + hi)
                over = self.modular(Z / mid[:, None]) > 1.0
                lo = np.where(over, mid, lo)
                hi = np.where(over, hi, mid)
                if np.all(hi - lo <= ORLICZ_RTOL * lo):
                    break
            out[nz] = m[nz] * 0.5 * (lo + hi)
        return out.reshape(shape)

    def to_dict(self):
        return {"family": "orlicz", "M": self.M.to_dict(), "dim": int(self.dim)}


def spec_from_dict(obj):
    family = obj.get("family")
    dim = obj.get("dim")
    if not isinstance(dim, int) or isinstance(dim, bool):
        raise NormSpecError(f"dim must be an integer, got {dim!r}")
    if family == "lp":
        return Lp(obj["p"], dim)
    if family == "lorentz":
        return Lorentz(obj["q"], _weight_from_dict(obj["weight"]), dim)
    if family == "orlicz":
        return Orlicz(_orlicz_from_dict(obj["M"]), dim)
    raise NormSpecError(f"unknown norm family {family!r}")


def spec_from_json(text):
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NormSpecError(f"invalid norm JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise NormSpecError("norm JSON must be an object")
    try:
        return spec_from_dict(obj)
    except KeyError as exc:
        raise NormSpecError(f"norm JSON is missing field {exc}") from None


# -- operations --------------------------------------------------------------

def eval_norm(spec, x):
    return float(spec.norm(as_point(x, spec.dim)))


def rearrange_decreasing(x):
    """Absolute values of ``x`` sorted non-increasingly."""
    return -np.sort(-np.abs(as_point(x)))


def fundamental_function_formula(spec, k):
    """lambda(k) from the family's closed form."""
    if spec.family == "lp":
        return 1.0 if math.isinf(spec.p) else float(k) ** (1.0 / spec.p)
    if spec.family == "lorentz":
        w = spec.weight.values(k)
        if math.isinf(spec.q):
            return float(w.max())
        return float((w ** spec.q).sum() ** (1.0 / spec.q))
    return spec.scale / float(spec.M.inverse(np.array(1.0 / k)))


def fundamental_function(spec, k, rtol=1e-8):
    """lambda(k) = norm of the sum of the first k unit vectors.

    Computed by norm evaluation and cross-checked against the closed form.
    """
    if not 1 <= k <= spec.dim:
        raise ValueError(f"k must be in 1..{spec.dim}, got {k}")
    x = np.zeros(spec.dim)
    x[:k] = 1.0
    value = float(spec.norm(x))
    formula = fundamental_function_formula(spec, k)
    if abs(value - formula) > rtol * formula:
        raise ArithmeticError(f"lambda({k}) mismatch: norm {value!r} vs formula {formula!r}")
    return value


def shadow_norm(spec, i, y, tol=1e-10, maxiter=500):
    """Quasi-norm of ``y`` (with y[i] == 0) in the projection of the unit ball onto H_i.

    That is ``min_t ||y + t e_i||``, found by golden-section search.
    """
    y = as_point(y, spec.dim)
    if y[i] != 0:
        raise ValueError(f"shadow_norm needs y[{i}] == 0")
    r = float(spec.norm(y))
    if r == 0:
        return 0.0

    def f(t):
        z = y.copy()
        z[i] = t
        return float(spec.norm(z))

    lo = 0.0 if spec.symmetric else -2 * r
    hi = 2 * r
    g = (math.sqrt(5) - 1) / 2
    a, b = lo + (1 - g) * (hi - lo), lo + g * (hi - lo)
    fa, fb = f(a), f(b)
    for _ in range(maxiter):
        if hi - lo <= tol:
            break
        if fa <= fb:
            hi, b, fb = b, a, fa
            a = lo + (1 - g) * (hi - lo)
            fa = f(a)
        else:
            lo, a, fa = a, b, fb
            b = lo + g * (hi - lo)
            fb = f(b)
    else:
        raise ArithmeticError(f"shadow_norm did not converge, bracket width {hi - lo:g}")
    candidates = [f(0.5 * (lo + hi)), r]
    if not spec.symmetric:
        candidates.append(f(lo))
    return min(candidates)


@dataclass(frozen=True)
class MonotoneReport:
    trials: int
    violations: int
    worst_gap: float


def check_monotone(spec, trials=1000, rng_seed=0, tol=1e-12):
    """Sample pairs |x| <= |y| in random orthants and count ||x|| > ||y||."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(rng_seed)
    d = spec.dim
    signs = rng.choice([-1.0, 1.0], size=(trials, d))
    Y = signs * np.abs(rng.standard_normal((trials, d)))
    Y /= spec.norm(Y)[:, None]
    X = rng.random((trials, d)) * Y
    nx, ny = spec.norm(X), spec.norm(Y)
    gap = nx - ny
    return MonotoneReport(trials, int(np.sum(gap > tol * np.maximum(ny, 1.0))),
                          float(gap.max()))
