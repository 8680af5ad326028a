"""Smoothed lag-window estimates of the spectrum and bispectrum.

Everything is direct summation over lags: the bandwidths in play are small,
so the window support (or an explicit truncation region for the non-compact
optimal window) limits the work, and the estimates are exact sums.  Sample
cumulants are computed once per lag into a symmetry-folded cache.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .cumulants import TimeSeries
from .exceptions import DegenerateSeriesError
from .windows import SYMMETRY_MAPS, LagWindow, apply_symmetry

__all__ = [
    "SpectralEstimate",
    "BispectrumLagCache",
    "canonical_frequency",
    "canonical_lag",
    "autocumulants",
    "estimate_spectrum",
    "estimate_bispectrum",
    "estimate_bispectrum_partial",
    "bispectrum_curvature",
]

_TWO_PI = 2.0 * math.pi
_SQRT3 = math.sqrt(3.0)


def canonical_frequency(w: float) -> float:
    """Reduce a frequency to [-pi, pi); keeps integer-lag sums exactly periodic."""
    return float((w + math.pi) % _TWO_PI - math.pi)


def canonical_lag(t1: int, t2: int):
    """Deterministic representative of the 6-element symmetry orbit of a lag pair."""
    best = (t1, t2)
    for m in SYMMETRY_MAPS[1:]:
        img = apply_symmetry(m, t1, t2)
        if img > best:
            best = img
    return best


@dataclass
class SpectralEstimate:
    """A single spectral value with the metadata that produced it."""

    value: complex
    omega: tuple
    M: float
    window: str
    order: int
    n: int
    truncated_negative: bool = False
    lag_cap: int | None = None
    imag_discarded: float = 0.0


class BispectrumLagCache:
    """Third-order sample cumulants keyed by their canonical symmetry lag.

    Symmetry folding only applies when all three channels coincide; for
    mixed channels every lag is computed directly.
    """

    def __init__(self, series: TimeSeries, channels=(0, 0, 0)):
        if len(channels) != 3:
            raise ValueError("bispectrum cache needs exactly three channels")
        self.series = series
        self.channels = tuple(channels)
        self._fold = len(set(channels)) == 1
        self._y = {a: series.centered(a) for a in set(channels)}
        self._vals: dict = {}

    def variance(self, a: int) -> float:
        y = self._y.get(a)
        if y is None:
            y = self.series.centered(a)
            self._y[a] = y
        return float(np.dot(y, y) / self.series.n)

    def rho_denominator(self) -> float:
        denom = 1.0
        for a in self.channels:
            var = self.variance(a)
            if var <= 0.0:
                raise DegenerateSeriesError(f"channel {a} has zero variance")
            denom *= var
        return math.sqrt(denom)

    def _compute(self, t1: int, t2: int) -> float:
        N = self.series.n
        alpha = min(0, t1, t2)
        gamma = max(0, t1, t2) - alpha
        n_terms = N - gamma
        if n_terms < 1:
            return 0.0
        a1, a2, a3 = self.channels
        p = (self._y[a1][t1 - alpha:t1 - alpha + n_terms]
             * self._y[a2][t2 - alpha:t2 - alpha + n_terms]
             * self._y[a3][-alpha:-alpha + n_terms])
        return float(p.sum() / N)

    def cumulant(self, t1: int, t2: int) -> float:
        key = canonical_lag(int(t1), int(t2)) if self._fold else (int(t1), int(t2))
        val = self._vals.get(key)
        if val is None:
            val = self._compute(*key) if self._fold else self._compute(int(t1), int(t2))
            self._vals[key] = val
        return val

    def cumulants(self, T1, T2) -> np.ndarray:
        T1 = np.asarray(T1).ravel()
        T2 = np.asarray(T2).ravel()
        return np.array([self.cumulant(a, b) for a, b in zip(T1, T2)])

    def rho(self, t1: int, t2: int) -> float:
        return self.cumulant(t1, t2) / self.rho_denominator()


def autocumulants(series: TimeSeries, taus, channels=(0, 0)) -> np.ndarray:
    """Second-order mean-centered sample cumulants at each lag in `taus`."""
    y1 = series.centered(channels[0])
    y2 = series.centered(channels[1])
    N = series.n
    out = np.zeros(len(taus))
    for i, tau in enumerate(taus):
        tau = int(tau)
        alpha = min(0, tau)
        gamma = max(0, tau) - alpha
        n_terms = N - gamma
        if n_terms < 1:
            continue
        out[i] = np.dot(y1[tau - alpha:tau - alpha + n_terms],
                        y2[-alpha:-alpha + n_terms]) / N
    return out


def _lag_cap(window: LagWindow, M: float, N: int,
             truncation_radius: float | None, max_lag: int | None) -> int:
    if max_lag is not None:
        return min(int(max_lag), N - 1)
    if window.support_radius is not None:
        return min(int(math.ceil(window.support_radius * M)), N - 1)
    if truncation_radius is not None:
        # bounding box of the quadratic-form ellipse q <= r^2
        return min(int(math.ceil(2.0 / _SQRT3 * truncation_radius * M)), N - 1)
    return N - 1


# weights depend only on (window, M, lag cap, truncation), not on the data
_WEIGHT_CACHE: dict = {}


def _lag_weights(window: LagWindow, M: float, L: int, truncation_radius):
    key = (window.key(), float(M), int(L), truncation_radius)
    hit = _WEIGHT_CACHE.get(key)
    if hit is not None:
        return hit
    ax = np.arange(-L, L + 1)
    T1, T2 = np.meshgrid(ax, ax, indexing="ij")
    T1 = T1.ravel()
    T2 = T2.ravel()
    w = np.asarray(window.fn(T1 / M, T2 / M), float).ravel()
    if truncation_radius is not None and window.support_radius is None:
        X = T1 / M
        Y = T2 / M
        w = np.where(X * X - X * Y + Y * Y <= truncation_radius ** 2, w, 0.0)
    mask = w != 0.0
    result = (T1[mask], T2[mask], w[mask])
    if len(_WEIGHT_CACHE) > 256:
        _WEIGHT_CACHE.clear()
    _WEIGHT_CACHE[key] = result
    return result


def estimate_spectrum(series: TimeSeries, window: LagWindow, M: float, omega: float,
                      channels=(0, 0), truncate=True, max_lag=None) -> SpectralEstimate:
    """Second-order smoothed periodogram at a single frequency.

    Returns the real part; when truncation is enabled (default) a negative
    estimate is clamped to zero and flagged.
    """
    if M <= 0:
        raise ValueError("bandwidth M must be positive")
    if window.order != 2:
        raise ValueError(f"expected an order-2 window, got {window.name}")
    N = series.n
    L = _lag_cap(window, M, N, None, max_lag)
    taus = np.arange(-L, L + 1)
    w = np.asarray(window.fn(taus / M), float)
    mask = w != 0.0
    taus = taus[mask]
    w = w[mask]
    C = autocumulants(series, taus, channels)
    omega_c = canonical_frequency(omega)
    val = complex((w * C * np.exp(-1j * taus * omega_c)).sum() / _TWO_PI)
    value = val.real
    flagged = False
    if truncate and value < 0.0:
        value = 0.0
        flagged = True
    return SpectralEstimate(
        value=value, omega=(omega_c,), M=float(M), window=window.name,
        order=2, n=N, truncated_negative=flagged, lag_cap=L,
        imag_discarded=val.imag,
    )


def _bispectrum_terms(series, window, M, omega, channels, cache,
                      truncation_radius, max_lag):
    if M <= 0:
        raise ValueError("bandwidth M must be positive")
    if window.order != 3:
        raise ValueError(f"expected an order-3 window, got {window.name}")
    if not window.symmetric:
        warnings.warn(f"window {window.name} does not satisfy the cumulant symmetries",
                      stacklevel=3)
    if cache is None:
        cache = BispectrumLagCache(series, channels)
    N = series.n
    L = _lag_cap(window, M, N, truncation_radius, max_lag)
    T1, T2, w = _lag_weights(window, M, L, truncation_radius)
    C = cache.cumulants(T1, T2)
    w1 = canonical_frequency(omega[0])
    w2 = canonical_frequency(omega[1])
    phase = np.exp(-1j * (T1 * w1 + T2 * w2))
    return T1, T2, w, C, phase, (w1, w2), L, N


def estimate_bispectrum(series: TimeSeries, window: LagWindow, M: float, omega,
                        channels=(0, 0, 0), cache=None, truncation_radius=None,
                        max_lag=None) -> SpectralEstimate:
    """Third-order smoothed periodogram at omega = (omega1, omega2)."""
    T1, T2, w, C, phase, om, L, N = _bispectrum_terms(
        series, window, M, omega, channels, cache, truncation_radius, max_lag)
    val = complex((w * C * phase).sum() / _TWO_PI ** 2)
    return SpectralEstimate(
        value=val, omega=om, M=float(M), window=window.name,
        order=3, n=N, lag_cap=L,
    )


def estimate_bispectrum_partial(series: TimeSeries, window: LagWindow, M: float, omega,
                                i: int, j: int, channels=(0, 0, 0), cache=None,
                                truncation_radius=None, max_lag=None) -> complex:
    """Second partial derivative d^2 fhat / d omega_i d omega_j.

    Differentiating exp(-i tau.omega) twice brings down (-i tau_i)(-i tau_j)
    = -tau_i tau_j, hence the leading minus sign.
    """
    if i not in (1, 2) or j not in (1, 2):
        raise ValueError("derivative indices must be 1 or 2")
    T1, T2, w, C, phase, _, _, _ = _bispectrum_terms(
        series, window, M, omega, channels, cache, truncation_radius, max_lag)
    Ti = T1 if i == 1 else T2
    Tj = T1 if j == 1 else T2
    return complex((-Ti * Tj * w * C * phase).sum() / _TWO_PI ** 2)


def bispectrum_curvature(series: TimeSeries, window: LagWindow, M: float, omega,
                         channels=(0, 0, 0), cache=None, truncation_radius=None,
                         max_lag=None) -> complex:
    """(d^2/dw1^2 - d^2/dw1 dw2 + d^2/dw2^2) fhat, in a single lag pass."""
    T1, T2, w, C, phase, _, _, _ = _bispectrum_terms(
        series, window, M, omega, channels, cache, truncation_radius, max_lag)
    factor = -(T1 * T1 - T1 * T2 + T2 * T2)
    return complex((factor * w * C * phase).sum() / _TWO_PI ** 2)
