"""Adaptive Simpson quadrature with a cumulative variant for uniform grids."""

from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import NumericalError

_MAX_DEPTH = 60


def _simpson(fa: float, fm: float, fb: float, a: float, b: float) -> float:
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb)


def _asr(f, a, fa, b, fb, m, fm, whole, tol, depth):
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm = f(lm)
    frm = f(rm)
    left = _simpson(fa, flm, fm, a, m)
    right = _simpson(fm, frm, fb, m, b)
    delta = left + right - whole
    if abs(delta) <= 15.0 * tol:
        return left + right + delta / 15.0
    if depth <= 0:
        raise NumericalError("adaptive Simpson quadrature did not converge", where=m)
    return _asr(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) + _asr(
        f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1
    )


def adaptive_simpson(f: Callable[[float], float], a: float, b: float,
                     tol: float = 1e-10) -> float:
    """Integrate f over [a, b] to absolute tolerance tol."""
    if b == a:
        return 0.0
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = _simpson(fa, fm, fb, a, b)
    return _asr(f, a, fa, b, fb, m, fm, whole, tol, _MAX_DEPTH)


def cumulative_integral(f: Callable[[float], float], points: np.ndarray,
                        tol: float = 1e-10) -> np.ndarray:
    """Cumulative integral of f from points[0] to each grid point.

    One adaptive-Simpson pass per segment, with the absolute tolerance
    apportioned by segment length so the total error stays within tol.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 1 or len(points) < 1:
        raise ValueError("points must be a non-empty 1-D array")
    if np.any(np.diff(points) <= 0):
        raise ValueError("points must be strictly increasing")
    total = points[-1] - points[0]
    out = np.zeros(len(points))
    acc = 0.0
    for k in range(len(points) - 1):
        a, b = points[k], points[k + 1]
        seg_tol = max(tol * (b - a) / total, 1e-15) if total > 0 else tol
        acc += adaptive_simpson(f, a, b, seg_tol)
        out[k + 1] = acc
    return out
