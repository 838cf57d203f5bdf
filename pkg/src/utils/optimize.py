"""
Derivative-free minimizers used by the bound optimizers.

All helpers are vectorized over numpy arrays and treat ``inf`` as an
infeasible value rather than an error.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

logger = logging.getLogger(__name__)

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
BISECT_ITERS = 48

Pair = tuple[np.ndarray, np.ndarray]


# ── Scalar line search ─────────────────────────────────────────────────────────


@dataclass(frozen=True)
class LineSearchResult:
    argmin: float
    minimum: float
    iterations: int
    converged: bool


def golden_section(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-10,
    max_iter: int = 200,
) -> LineSearchResult:
    """
    Minimize a unimodal scalar function on [lo, hi].

    The interval endpoints are compared against the final interior estimate,
    so a minimum sitting on the boundary is reported exactly.
    """
    a, b = float(lo), float(hi)
    if b < a:
        a, b = b, a
    if b - a <= tol:
        x = 0.5 * (a + b)
        return LineSearchResult(x, f(x), 0, True)

    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    f_lo, f_hi = f(a), f(b)
    a0, b0 = a, b

    iteration = 0
    while iteration < max_iter and (b - a) > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
        iteration += 1

    x, fx = (c, fc) if fc <= fd else (d, fd)
    if f_lo < fx:
        x, fx = a0, f_lo
    elif f_hi < fx:
        x, fx = b0, f_hi

    return LineSearchResult(
        argmin=x,
        minimum=fx,
        iterations=iteration,
        converged=iteration < max_iter and math.isfinite(fx),
    )


# ── Vectorized bisection ───────────────────────────────────────────────────────


def bisect_increasing(
    g: Callable[[np.ndarray], np.ndarray],
    lo: np.ndarray,
    hi: np.ndarray,
    iters: int = BISECT_ITERS,
) -> np.ndarray:
    """
    Root of an increasing function on each interval [lo, hi], elementwise.

    ``g`` is only evaluated at interior midpoints. Returns the midpoint of the
    final bracket.
    """
    a, b = np.broadcast_arrays(
        np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    )
    a, b = a.copy(), b.copy()
    for _ in range(iters):
        mid = 0.5 * (a + b)
        positive = g(mid) > 0
        b = np.where(positive, mid, b)
        a = np.where(positive, a, mid)
    return 0.5 * (a + b)


def minimax_crossing(
    evaluate: Callable[[np.ndarray], Pair],
    lo: np.ndarray,
    hi: np.ndarray,
    iters: int = BISECT_ITERS,
) -> Pair:
    """
    Minimize max(inc(x), dec(x)) over [lo, hi], elementwise.

    ``evaluate(x)`` returns the pair (inc, dec) of a non-decreasing and a
    non-increasing function. The minimum sits where the two cross, or at an
    endpoint; jumps to ``inf`` at the endpoints are allowed. Returns
    (argmin, minimum).
    """
    lo, hi = np.broadcast_arrays(
        np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    )
    a, b = lo.copy(), hi.copy()
    for _ in range(iters):
        mid = 0.5 * (a + b)
        inc, dec = evaluate(mid)
        crossed = inc >= dec
        b = np.where(crossed, mid, b)
        a = np.where(crossed, a, mid)

    candidates = np.stack([lo, a, b, hi])
    values = np.stack([np.maximum(*evaluate(c)) for c in candidates])
    values = np.where(np.isnan(values), np.inf, values)
    pick = np.argmin(values, axis=0)
    cols = np.arange(candidates.shape[1]) if candidates.ndim > 1 else None
    if cols is None:
        return candidates[pick], values[pick]
    return candidates[pick, cols], values[pick, cols]


# ── Multistart grid search ─────────────────────────────────────────────────────


def local_minima(values: np.ndarray, limit: int) -> np.ndarray:
    """Indices of up to ``limit`` finite local minima of a 1-D profile, best first."""
    values = np.asarray(values, dtype=float)
    finite = np.isfinite(values)
    if not finite.any():
        return np.array([], dtype=int)

    padded = np.concatenate([[np.inf], values, [np.inf]])
    is_min = (
        finite
        & (values <= padded[:-2])
        & (values <= padded[2:])
    )
    idx = np.flatnonzero(is_min)
    if idx.size == 0:
        idx = np.array([int(np.nanargmin(np.where(finite, values, np.nan)))])
    order = np.argsort(values[idx], kind="stable")
    return idx[order][:limit]


@dataclass(frozen=True)
class ZoomResult:
    x: float
    value: float
    levels: int


def zoom_minimize(
    objective: Callable[[np.ndarray], np.ndarray],
    starts: np.ndarray,
    lower: float,
    upper: float,
    width: float,
    points: int = 9,
    shrink: float = 0.25,
    tol: float = 1e-9,
    max_levels: int = 40,
) -> ZoomResult:
    """
    Nested grid search on [lower, upper] from several starting points at once.

    Every level evaluates a ``points``-wide grid of half-width ``width`` around
    each incumbent in a single vectorized call, moves each incumbent to its
    best grid point and shrinks the window unless the move hit the window
    edge. Returns the best incumbent once the window is below ``tol``.
    """
    x = np.clip(np.atleast_1d(np.asarray(starts, dtype=float)), lower, upper)
    best = np.asarray(objective(x), dtype=float)
    widths = np.full(x.shape, float(width))
    offsets = np.linspace(-1.0, 1.0, points)

    level = 0
    for level in range(1, max_levels + 1):
        grid = np.clip(x[:, None] + widths[:, None] * offsets[None, :], lower, upper)
        values = np.asarray(objective(grid.ravel()), dtype=float).reshape(grid.shape)
        values = np.where(np.isnan(values), np.inf, values)
        pick = np.argmin(values, axis=1)
        rows = np.arange(x.size)
        candidate = values[rows, pick]

        improved = candidate < best
        at_edge = improved & ((pick == 0) | (pick == points - 1))
        x = np.where(improved, grid[rows, pick], x)
        best = np.where(improved, candidate, best)
        widths = np.where(at_edge, widths, widths * shrink)
        if np.all(widths <= tol):
            break

    winner = int(np.argmin(best))
    logger.debug(
        f"Zoom search finished after {level} levels: x={x[winner]:.10g}, "
        f"value={best[winner]:.10g}"
    )
    return ZoomResult(x=float(x[winner]), value=float(best[winner]), levels=level)
