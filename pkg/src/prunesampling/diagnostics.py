"""Accuracy and convergence diagnostics for multi-run sampling experiments."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ContractError

DEFAULT_T_MIN = 10
DEFAULT_DELTA_GRID = np.round(np.arange(1, 41) * 0.05, 10)


@dataclass(frozen=True)
class RocFit:
    """Fit of ``g(t) = sigma_t^2 * sqrt(t) = alpha * (1 + beta * t**-delta)``.

    ``beta`` is NaN when ``alpha`` is 0 (the intercept was clipped).
    """

    alpha: float
    beta: float
    delta: float
    t_min: int
    residual: float


def hellinger(p, q) -> float:
    """Hellinger distance ``sqrt(sum((sqrt p - sqrt q)^2) / 2)``, in [0, 1]."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape or p.ndim != 1:
        raise ContractError("distributions must be 1-D and of equal length")
    for name, d in (("p", p), ("q", q)):
        if np.any(d < 0) or abs(d.sum() - 1.0) > 1e-6:
            raise ContractError(f"{name} is not a probability vector")
    return float(min(1.0, math.sqrt(float(np.sum((np.sqrt(p) - np.sqrt(q)) ** 2)) / 2.0)))


def hellinger_rows(est, exact) -> np.ndarray:
    """Row-wise Hellinger distance of ``est`` (T, k) against one vector ``exact``."""
    d = np.sqrt(np.sum((np.sqrt(np.clip(est, 0, None)) - np.sqrt(exact)[None, :]) ** 2, axis=1) / 2.0)
    return np.minimum(d, 1.0)


def ahd_series(traces, exact, query_vars=None) -> np.ndarray:
    """Average Hellinger distance at every step, over query variables and runs."""
    traces = list(traces)
    if not traces:
        raise ContractError("need at least one run")
    total = None
    for tr in traces:
        qs = tr.query if query_vars is None else [exact.net.index(q) for q in query_vars]
        if not qs:
            raise ContractError("no query variables")
        per_run = np.mean([hellinger_rows(tr.estimates[q], exact[q]) for q in qs], axis=0)
        if total is not None and per_run.shape != total.shape:
            raise ContractError("runs have different lengths")
        total = per_run if total is None else total + per_run
    return total / len(traces)


def sigma_series(series) -> np.ndarray:
    """Cross-run ``<y_t^2> - <y_t>^2`` at every step ``t``.

    ``series`` has shape ``(N runs, T)``. Values are sorted per step and
    shifted by the smallest before the moments are taken, so the result does
    not depend on run order and is exactly 0 where all runs agree.
    """
    y = np.asarray(series, dtype=np.float64)
    if y.ndim != 2:
        raise ContractError("series must have shape (runs, steps)")
    if y.shape[0] < 2:
        raise ContractError("need at least two runs")
    y = np.sort(y, axis=0)
    d = y - y[0]
    return np.maximum(np.mean(d * d, axis=0) - np.mean(d, axis=0) ** 2, 0.0)


def fit_roc(sigma, delta_grid=None, t_min: int = DEFAULT_T_MIN) -> RocFit:
    """Estimate the proportionality constant ``alpha`` of ``sigma_t^2 ~ alpha / sqrt(t)``.

    ``sigma[k]`` belongs to step ``t = k + 1``. For each ``delta`` in the grid,
    ``g(t) = sigma_t^2 sqrt(t)`` for ``t >= t_min`` is fitted by least squares
    against ``(1, t**-delta)``; the delta with the smallest residual wins and
    ``alpha`` is the intercept. A negative intercept is clipped to 0 (the fit
    is redone with the slope alone).
    """
    sigma = np.asarray(sigma, dtype=np.float64)
    grid = DEFAULT_DELTA_GRID if delta_grid is None else np.asarray(delta_grid, dtype=np.float64)
    if grid.size == 0 or np.any(grid <= 0):
        raise ContractError("delta grid must be non-empty and positive")
    t = np.arange(1, sigma.size + 1, dtype=np.float64)
    sel = t >= t_min
    if sel.sum() < 2:
        raise ContractError("fewer than two points at or after t_min")
    t, s = t[sel], sigma[sel]
    if not np.all(np.isfinite(s)) or np.all(s == 0):
        raise ContractError("degenerate sigma series")
    g = s * np.sqrt(t)
    best = None
    for delta in grid:
        x = t ** -delta
        design = np.column_stack([np.ones_like(x), x])
        (a, b), *_ = np.linalg.lstsq(design, g, rcond=None)
        if a < 0:
            a = 0.0
            b = float(x @ g / (x @ x))
        resid = float(np.linalg.norm(g - (a + b * x)))
        if best is None or resid < best[0]:
            best = (resid, float(a), float(b), float(delta))
    resid, a, b, delta = best
    beta = b / a if a > 0 else float("nan")
    return RocFit(alpha=a, beta=beta, delta=delta, t_min=int(t_min), residual=resid)


def samples_to_target(alpha: float, target_sigma2: float = 0.01) -> int:
    """``ceil((alpha / target)^2)``, evaluated on the decimal values given."""
    if not target_sigma2 > 0:
        raise ContractError("target must be positive")
    if not math.isfinite(alpha):
        raise ContractError("alpha must be finite")
    ratio = Fraction(repr(float(alpha))) / Fraction(repr(float(target_sigma2)))
    return math.ceil(ratio * ratio)
