"""Statistical reductions: survival curves, power-law fits, exact CIs.

Pass/fail decisions always go through exact Clopper-Pearson intervals,
never normal approximations.  Constants in the underlying bounds are
existential, so every check here is an exponent, shape, or positivity
check; fit ranges are supplied by the caller's manifest, not chosen from
the data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate, stats

from .errors import ContractError, ParameterError
from .engine import EventLog
from .gasket import COUNT_DECAY_EXPONENT, MASS_DIMENSION, WALK_DIMENSION  # noqa: F401


# ---------------------------------------------------------------------------
# set distances

def hausdorff_distance(a, b, metric: Optional[Callable] = None) -> float:
    """Hausdorff distance between two finite nonempty point sets.

    Points are scalars or coordinate tuples; ``metric`` overrides the
    Euclidean default.
    """
    a, b = list(a), list(b)
    if not a or not b:
        raise ContractError("hausdorff_distance needs nonempty sets")
    if metric is None:
        pa = np.atleast_2d(np.asarray(a, dtype=float))
        pb = np.atleast_2d(np.asarray(b, dtype=float))
        if pa.ndim == 2 and pa.shape[0] == 1 and len(a) > 1:
            pa = pa.T
        if pb.ndim == 2 and pb.shape[0] == 1 and len(b) > 1:
            pb = pb.T
        d = np.sqrt(((pa[:, None, :] - pb[None, :, :]) ** 2).sum(axis=2))
        return float(max(d.min(axis=1).max(), d.min(axis=0).max()))
    d_ab = max(min(metric(x, y) for y in b) for x in a)
    d_ba = max(min(metric(x, y) for x in a) for y in b)
    return float(max(d_ab, d_ba))


# ---------------------------------------------------------------------------
# regression fits

@dataclass(frozen=True)
class TailFit:
    slope: float
    intercept: float
    stderr: float
    fit_range: tuple[float, float]
    n_points: int
    r_squared: float


def _least_squares_line(x: np.ndarray, y: np.ndarray):
    n = len(x)
    xm, ym = x.mean(), y.mean()
    sxx = ((x - xm) ** 2).sum()
    slope = ((x - xm) * (y - ym)).sum() / sxx
    intercept = ym - slope * xm
    resid = y - (intercept + slope * x)
    ssr = (resid ** 2).sum()
    stderr = math.sqrt(ssr / (n - 2) / sxx) if n > 2 else float("inf")
    syy = ((y - ym) ** 2).sum()
    r2 = 1.0 if syy == 0 else 1.0 - ssr / syy
    return slope, intercept, stderr, r2


def fit_power_law(points: Sequence[tuple[float, float]]) -> TailFit:
    """Least-squares slope of log y against log x."""
    if len(points) < 4:
        raise ContractError("power-law fit needs at least 4 points")
    x = np.array([p[0] for p in points], dtype=float)
    y = np.array([p[1] for p in points], dtype=float)
    if (x <= 0).any() or (y <= 0).any():
        raise ContractError("power-law fit needs strictly positive data")
    slope, intercept, stderr, r2 = _least_squares_line(np.log(x), np.log(y))
    return TailFit(float(slope), float(intercept), float(stderr),
                   (float(x.min()), float(x.max())), len(points), float(r2))


@dataclass(frozen=True)
class ShapeReport:
    slope: float
    stderr: float
    r_squared: float
    n_points: int
    insufficient: bool


def tail_shape_check(args: Sequence[float], exceed_counts: Sequence[int],
                     totals: Sequence[int], min_exceedances: int = 50) -> ShapeReport:
    """Regression of log exceedance probability against a bound's argument.

    Bins with fewer than ``min_exceedances`` exceedances are dropped; if
    fewer than 4 bins survive the report is flagged insufficient rather
    than silently fitted.
    """
    keep = [(a, k, n) for a, k, n in zip(args, exceed_counts, totals)
            if k >= min_exceedances and k < n]
    if len(keep) < 4:
        return ShapeReport(float("nan"), float("nan"), float("nan"), len(keep), True)
    x = np.array([a for a, _, _ in keep], dtype=float)
    y = np.log(np.array([k / n for _, k, n in keep], dtype=float))
    slope, _, stderr, r2 = _least_squares_line(x, y)
    return ShapeReport(float(slope), float(stderr), float(r2), len(keep), False)


# ---------------------------------------------------------------------------
# closed-form integral and its quadrature oracle

def closed_form_gamma_integral(alpha: float, beta: float, a: float) -> float:
    """Value of the integral of t**-alpha * exp(-a / t**beta) over (0, inf)."""
    if alpha <= 1:
        raise ParameterError("alpha must exceed 1")
    if beta <= 0 or a <= 0:
        raise ParameterError("beta and a must be positive")
    s = (alpha - 1.0) / beta
    return math.gamma(s) / beta * a ** -s


def gamma_integral_quadrature(alpha: float, beta: float, a: float) -> float:
    """Adaptive quadrature of the same integrand (independent route)."""
    f = lambda t: t ** -alpha * math.exp(-a / t ** beta)
    split = a ** (1.0 / beta)
    v1, _ = integrate.quad(f, 0.0, split, epsabs=0.0, epsrel=1e-12, limit=400)
    v2, _ = integrate.quad(f, split, np.inf, epsabs=0.0, epsrel=1e-12, limit=400)
    return v1 + v2


# ---------------------------------------------------------------------------
# exact binomial confidence intervals

def clopper_pearson(successes: int, trials: int,
                    confidence: float = 0.95) -> tuple[float, float]:
    if trials < 1:
        raise ContractError("need at least one trial")
    if not (0 <= successes <= trials):
        raise ContractError("successes out of range")
    alpha = 1.0 - confidence
    lo = 0.0 if successes == 0 else float(
        stats.beta.ppf(alpha / 2, successes, trials - successes + 1))
    hi = 1.0 if successes == trials else float(
        stats.beta.ppf(1 - alpha / 2, successes + 1, trials - successes))
    return lo, hi


@dataclass(frozen=True)
class BoundCheck:
    passed: bool
    estimate: float
    ci_low: float
    ci_high: float
    threshold: float


def binomial_bound_check(successes: int, trials: int, p_low: float,
                         slack: float = 0.1, confidence: float = 0.95) -> BoundCheck:
    """Pass iff the exact CI lower bound reaches p_low * (1 - slack)."""
    lo, hi = clopper_pearson(successes, trials, confidence)
    threshold = p_low * (1.0 - slack)
    return BoundCheck(lo >= threshold, successes / trials, lo, hi, threshold)


# ---------------------------------------------------------------------------
# survival curves over replicate event logs

@dataclass
class SurvivalCurve:
    times: np.ndarray               # sampled times, increasing
    counts: np.ndarray              # (replicates, times) class counts
    mean: np.ndarray
    q10: np.ndarray
    q90: np.ndarray
    m_values: np.ndarray
    exceed_prob: np.ndarray         # (m_values, times)
    exceed_ci_low: np.ndarray
    exceed_ci_high: np.ndarray


def survival_curve(logs: Sequence[EventLog], ticks: Sequence[int],
                   m_values: Sequence[int],
                   confidence: float = 0.95) -> SurvivalCurve:
    if not logs:
        raise ContractError("need at least one replicate log")
    ticks = np.asarray(sorted(ticks))
    counts = np.vstack([log.counts_at_ticks(ticks) for log in logs])
    for row in counts:
        assert (np.diff(row) <= 0).all(), "per-replicate counts must be non-increasing"
    reps = len(logs)
    m_values = np.asarray(sorted(m_values))
    exceed = np.zeros((len(m_values), len(ticks)))
    lo = np.zeros_like(exceed)
    hi = np.zeros_like(exceed)
    for i, m in enumerate(m_values):
        k = (counts > m).sum(axis=0)
        exceed[i] = k / reps
        for j, kk in enumerate(k):
            lo[i, j], hi[i, j] = clopper_pearson(int(kk), reps, confidence)
    times = ticks * logs[0].tick_duration
    return SurvivalCurve(times, counts, counts.mean(axis=0),
                         np.quantile(counts, 0.1, axis=0),
                         np.quantile(counts, 0.9, axis=0),
                         m_values, exceed, lo, hi)


# ---------------------------------------------------------------------------
# parameter bookkeeping from the collision bounds

def reduction_factor(p_hat: float) -> float:
    """Per-round class reduction factor 1 / (1 - p/5); lies in (1, 1.25]."""
    if not (0.0 < p_hat <= 1.0):
        raise ParameterError("collision probability estimate must lie in (0, 1]")
    g = 1.0 / (1.0 - p_hat / 5.0)
    assert 1.0 < g <= 1.25
    return g


def validate_eta_window(alpha: float, eta: float) -> float:
    """Check eta against its admissible open window and return h > 0."""
    if not (1.0 < alpha < 2.0):
        raise ParameterError("alpha must lie in (1, 2)")
    lo, hi = (alpha - 1.0) / 2.0, alpha - 1.0
    if not (lo < eta < hi):
        raise ParameterError(
            f"eta={eta} outside the admissible window ({lo}, {hi}) for alpha={alpha}")
    h = 1.0 - (1.0 + eta) / alpha
    assert h > 0
    return h
