"""Vectorized bracketed root finding (regula falsi with Anderson-Bjorck scaling)."""

import numpy as np

MAXITER = 100


def regula_falsi(f, lo, hi, flo, fhi, ftol=1e-15, xtol=1e-15, maxiter=MAXITER):
    """Roots of increasing functions, one per row, bracketed by [lo, hi].

    ``f(t, rows)`` evaluates the functions selected by the index array ``rows``
    at the points ``t``; ``flo <= 0 <= fhi`` are the values at the brackets.
    A bisection step replaces any secant point that leaves the bracket.  When
    the same endpoint is kept twice in a row its value is scaled down by the
    Anderson-Bjorck factor 1 - f(t)/f(replaced end), or halved (Illinois) when
    that factor is not positive.
    Returns the best iterate of each row (smallest |f| seen).
    """
    a, b = np.array(lo, dtype=float), np.array(hi, dtype=float)
    fa, fb = np.array(flo, dtype=float), np.array(fhi, dtype=float)
    best_t = np.where(-fa <= fb, a, b)
    best_f = np.minimum(-fa, fb)
    out = best_t.copy()
    rows = np.flatnonzero(best_f > ftol)
    # working state is kept compacted to the rows still iterating
    a, b, fa, fb = a[rows], b[rows], fa[rows], fb[rows]
    best_t, best_f = best_t[rows], best_f[rows]
    side = np.zeros(rows.size, dtype=np.int8)
    for _ in range(maxiter):
        if rows.size == 0:
            break
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (a * fb - b * fa) / (fb - fa)
        t = np.where((t > a) & (t < b), t, 0.5 * (a + b))
        ft = f(t, rows)
        left = ft < 0
        with np.errstate(divide="ignore", invalid="ignore"):
            m = np.where(left, 1.0 - ft / fa, 1.0 - ft / fb)
        m = np.where(m > 0, m, 0.5)
        fb = np.where(left, np.where(side == -1, m * fb, fb), ft)
        fa = np.where(left, ft, np.where(side == 1, m * fa, fa))
        a = np.where(left, t, a)
        b = np.where(left, b, t)
        side = np.where(left, -1, 1).astype(np.int8)
        better = np.abs(ft) < best_f
        best_t = np.where(better, t, best_t)
        best_f = np.where(better, np.abs(ft), best_f)
        keep = (best_f > ftol) & (b - a > xtol * np.maximum(1.0, np.abs(b)))
        if not keep.all():
            out[rows[~keep]] = best_t[~keep]
            rows, a, b, fa, fb = rows[keep], a[keep], b[keep], fa[keep], fb[keep]
            best_t, best_f, side = best_t[keep], best_f[keep], side[keep]
    out[rows] = best_t
    return out
