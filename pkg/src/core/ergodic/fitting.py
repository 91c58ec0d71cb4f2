"""Least-squares rate fits and Monte Carlo error bars."""

from typing import NamedTuple, Optional

import numpy as np
import structlog
from scipy import stats

logger = structlog.get_logger()

MIN_FIT_POINTS = 2


class LinearFit(NamedTuple):
    slope: float
    intercept: float
    slope_stderr: float
    n_points: int


def ensemble_mean(samples: np.ndarray) -> tuple[float, float]:
    """Mean over the first axis and its standard error (0 for a single sample)."""
    samples = np.asarray(samples, dtype=float)
    mean = float(np.mean(samples))
    if samples.size < 2:
        return mean, 0.0
    return mean, float(np.std(samples, ddof=1) / np.sqrt(samples.size))


def ensemble_mean_series(samples: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Column-wise ensemble_mean of an (n_paths, n_times) array."""
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    mean = samples.mean(axis=0)
    if samples.shape[0] < 2:
        return mean, np.zeros_like(mean)
    return mean, samples.std(axis=0, ddof=1) / np.sqrt(samples.shape[0])


def batch_means_stderr(series: np.ndarray, n_batches: int = 10) -> float:
    """Standard error of the mean of a correlated series by non-overlapping batch means."""
    series = np.asarray(series, dtype=float)
    n_batches = min(n_batches, series.size)
    if n_batches < 2:
        return 0.0
    usable = series.size - series.size % n_batches
    batches = series[:usable].reshape(n_batches, -1).mean(axis=1)
    return float(np.std(batches, ddof=1) / np.sqrt(n_batches))


def _linear_fit(x: np.ndarray, y: np.ndarray) -> Optional[LinearFit]:
    if x.size < MIN_FIT_POINTS or np.ptp(x) == 0:
        return None
    result = stats.linregress(x, y)
    slope_stderr = float(result.stderr) if np.isfinite(result.stderr) else 0.0
    return LinearFit(float(result.slope), float(result.intercept), slope_stderr, int(x.size))


def fit_exponential(times: np.ndarray, values: np.ndarray, floor: float = 0.0) -> Optional[LinearFit]:
    """Fit values ~ C exp(slope t) on the points with values > floor.

    Returns None when fewer than two points survive.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    mask = values > max(floor, 0.0)
    fit = _linear_fit(times[mask], np.log(values[mask]))
    if fit is None:
        logger.warning("Exponential fit degenerate", points=int(mask.sum()))
    return fit


def fit_loglog(x: np.ndarray, y: np.ndarray, floor: float = 0.0) -> Optional[LinearFit]:
    """Fit y ~ C x^slope on the points with y > floor."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    mask = (y > max(floor, 0.0)) & (x > 0)
    fit = _linear_fit(np.log(x[mask]), np.log(y[mask]))
    if fit is None:
        logger.warning("Log-log fit degenerate", points=int(mask.sum()))
    return fit
