"""Binning and jackknife error analysis for correlated Monte Carlo series."""

from __future__ import annotations

from typing import Callable, Tuple

import numpy as np

from .errors import InsufficientStatisticsError

__all__ = ["bin_series", "binned_mean_err", "jackknife"]

_TARGET_BINS = 32


def bin_series(series: np.ndarray, target_bins: int = _TARGET_BINS) -> np.ndarray:
    """Average a time series into bins, doubling the bin size while at
    least `target_bins` bins remain.  Returns the bin means.

    Doubling absorbs autocorrelation up to the final bin length; the
    caller is responsible for choosing a measurement interval that keeps
    residual correlation between neighboring bins small.
    """
    series = np.asarray(series, dtype=float)
    n = series.size
    if n < 2:
        raise InsufficientStatisticsError(
            f"need at least 2 measurement samples, got {n}"
        )
    size = 1
    while n // (2 * size) >= target_bins:
        size *= 2
    nbins = n // size
    return series[: nbins * size].reshape(nbins, size).mean(axis=1)


def binned_mean_err(series: np.ndarray) -> Tuple[float, float]:
    """Mean and standard error of a series via binning analysis."""
    bins = bin_series(series)
    err = bins.std(ddof=1) / np.sqrt(bins.size) if bins.size > 1 else 0.0
    return float(bins.mean()), float(err)


def jackknife(func: Callable[..., float], *series: np.ndarray) -> Tuple[float, float]:
    """Bias-corrected jackknife estimate and error of func(mean_1, ..., mean_k).

    Each input series is reduced to bin means first (common bin count),
    then leave-one-bin-out estimates are formed.  Use for quantities that
    are nonlinear functions of averages, e.g. the energy through f(m_x).
    """
    binned = [bin_series(s) for s in series]
    nb = min(b.size for b in binned)
    binned = [b[:nb] for b in binned]
    if nb < 2:
        raise InsufficientStatisticsError("need at least 2 bins for jackknife")
    sums = [b.sum() for b in binned]
    full = func(*(s / nb for s in sums))
    loo = np.empty(nb)
    for k in range(nb):
        loo[k] = func(*((s - b[k]) / (nb - 1) for s, b in zip(sums, binned)))
    loo_mean = loo.mean()
    estimate = nb * full - (nb - 1) * loo_mean
    err = np.sqrt((nb - 1) / nb * ((loo - loo_mean) ** 2).sum())
    return float(estimate), float(err)
