"""Golden-section maximization, scalar and batched."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI2 = (3.0 - math.sqrt(5.0)) / 2.0


def golden_max(f: Callable[[float], float], a: float, b: float,
               tol: float = 1e-9, max_iter: int = 200):
    """Maximize a unimodal ``f`` on ``[a, b]``.

    Returns ``(x, f(x), lo, hi, iterations)`` where ``[lo, hi]`` is the final
    bracket (``hi - lo <= tol`` unless ``max_iter`` ran out).  The endpoints
    are evaluated too, so a maximum sitting on the boundary is returned
    exactly.
    """
    if b < a:
        raise ValueError("empty interval")
    fa, fb = f(a), f(b)
    lo, hi = a, b
    c = lo + INV_PHI2 * (hi - lo)
    d = lo + INV_PHI * (hi - lo)
    fc, fd = f(c), f(d)
    it = 0
    while hi - lo > tol and it < max_iter:
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = lo + INV_PHI2 * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + INV_PHI * (hi - lo)
            fd = f(d)
        it += 1
    # ties go to the smaller abscissa
    best_x, best_f = a, fa
    for x, fx in ((c, fc), (d, fd), (b, fb)):
        if fx > best_f:
            best_x, best_f = x, fx
    return best_x, best_f, lo, hi, it


def golden_max_batch(f: Callable[[np.ndarray], np.ndarray], a: np.ndarray,
                     b: np.ndarray, tol: float = 1e-9, max_iter: int = 200):
    """Lock-step golden-section search over many independent intervals.

    ``f`` maps an array of abscissae (one per interval) to values.  All
    intervals run the iteration count needed by the widest one.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    width = float(np.max(b - a)) if a.size else 0.0
    n = 0
    if width > tol:
        n = min(max_iter, int(math.ceil(math.log(tol / width) / math.log(INV_PHI))))
    fa, fb = f(a), f(b)
    lo, hi = a.copy(), b.copy()
    c = lo + INV_PHI2 * (hi - lo)
    d = lo + INV_PHI * (hi - lo)
    fc, fd = f(c), f(d)
    for _ in range(n):
        left = fc >= fd
        hi = np.where(left, d, hi)
        lo = np.where(left, lo, c)
        new_c = np.where(left, lo + INV_PHI2 * (hi - lo), d)
        new_d = np.where(left, c, lo + INV_PHI * (hi - lo))
        x_new = np.where(left, new_c, new_d)
        f_new = f(x_new)
        fc, fd = np.where(left, f_new, fd), np.where(left, fc, f_new)
        c, d = new_c, new_d
    best_x, best_f = a.copy(), fa.copy()
    for x, fx in ((c, fc), (d, fd), (b, fb)):
        better = fx > best_f
        best_x = np.where(better, x, best_x)
        best_f = np.where(better, fx, best_f)
    return best_x, best_f
