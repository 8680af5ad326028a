"""Data-driven bandwidth selection.

Three selectors are provided:

* the general flat-top rule — the first lag radius m at which every
  normalized cumulant on an annulus of width ``a_N`` drops below a
  threshold ~ sqrt(log N / N), giving M = m / b;
* the practical bispectrum rule — the same idea on the lexicographically
  ordered interior lag points P_1 = (1,0), P_2 = (2,1), ...;
* the per-frequency plug-in rule for differentiable second-order kernels,
  with either flat-top or conventional second-order pilot estimates.

Thresholds can be calibrated from the data with a circular block bootstrap.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cumulants import TimeSeries, normalized_cumulant
from .exceptions import DegenerateSeriesError
from .spectra import (
    BispectrumLagCache,
    bispectrum_curvature,
    estimate_spectrum,
)
from .windows import (
    LagWindow,
    flat_top_rpf,
    opt_truncation_radius,
    optimal_window,
    parzen_window,
    trapezoid_window,
    window_curvature_at_zero,
    window_l2_norm,
)

__all__ = [
    "AnnulusSpec",
    "BandwidthSelection",
    "select_bandwidth_general",
    "lex_point",
    "lex_index",
    "select_bandwidth_bispectrum",
    "bootstrap_threshold",
    "plugin_formula",
    "plugin_bandwidth",
]


@dataclass(frozen=True)
class AnnulusSpec:
    """Half-open annulus inner <= ||tau|| < outer in the lag plane (or line)."""

    inner: float
    outer: float
    norm: str = "euclidean"

    def __post_init__(self):
        if not 0 <= self.inner < self.outer:
            raise ValueError("annulus needs 0 <= inner < outer")
        if self.norm not in ("euclidean", "sup"):
            raise ValueError(f"unknown norm '{self.norm}'")

    def lag_norm(self, t1, t2=None):
        if t2 is None:
            return abs(t1)
        if self.norm == "sup":
            return max(abs(t1), abs(t2))
        return math.hypot(t1, t2)

    def contains(self, t1, t2=None) -> bool:
        r = self.lag_norm(t1, t2)
        return self.inner <= r < self.outer

    def integer_lags(self, dim: int):
        """All nonzero integer lags inside the annulus (positive half-line for dim 1)."""
        if dim == 1:
            lo = int(math.ceil(self.inner))
            hi = int(math.ceil(self.outer))
            return [(t,) for t in range(max(lo, 1), hi) if self.contains(t)]
        R = int(math.ceil(self.outer))
        out = []
        for t1 in range(-R, R + 1):
            for t2 in range(-R, R + 1):
                if (t1, t2) != (0, 0) and self.contains(t1, t2):
                    out.append((t1, t2))
        return out


@dataclass
class BandwidthSelection:
    """Outcome of a bandwidth search, with the evidence that produced it."""

    M_hat: float
    m_hat: int
    rule: str
    thresholds: dict
    trace: list = field(default_factory=list)
    cap_hit: bool = False
    params: dict = field(default_factory=dict)


def _log_threshold(k: float, N: int, base: float) -> float:
    return k * math.sqrt(math.log(N) / math.log(base) / N)


def select_bandwidth_general(series: TimeSeries, order: int = 2, channels=None,
                             k: float = 2.0, a_N: int = 5, b: float = 0.51,
                             norm: str = "euclidean", log_base: float = 10.0,
                             cap: int | None = None) -> BandwidthSelection:
    """Smallest m >= 1 with |rho(tau)| < k sqrt(log N / N) on the annulus
    m <= ||tau|| < m + a_N; returns M = m / b.

    The search is capped at m <= N/4; hitting the cap sets `cap_hit` and
    returns the cap rather than raising.
    """
    if k <= 0 or a_N < 1 or not 0 < b <= 1:
        raise ValueError("need k > 0, a_N >= 1, b in (0, 1]")
    if order not in (2, 3):
        raise ValueError(f"order must be 2 or 3, got {order}")
    if channels is None:
        channels = (0,) * order
    N = series.n
    thr = _log_threshold(k, N, log_base)
    if cap is None:
        cap = max(1, N // 4)
    dim = order - 1
    rho_cache: dict = {}
    if dim == 2:
        lag_cache = BispectrumLagCache(series, channels)
        denom = lag_cache.rho_denominator()

    def rho(tau):
        val = rho_cache.get(tau)
        if val is None:
            if dim == 2:
                val = lag_cache.cumulant(*tau) / denom
            else:
                val = normalized_cumulant(series, tau, channels)
            rho_cache[tau] = val
        return val

    trace = []
    m_hat, cap_hit = cap, True
    for m in range(1, cap + 1):
        ann = AnnulusSpec(m, m + a_N, norm)
        ok = True
        for tau in ann.integer_lags(dim):
            r = rho(tau)
            trace.append((tau, r))
            if abs(r) >= thr:
                ok = False
                break
        if ok:
            m_hat, cap_hit = m, False
            break
    return BandwidthSelection(
        M_hat=m_hat / b, m_hat=m_hat, rule="general",
        thresholds={"k": k, "value": thr}, trace=trace, cap_hit=cap_hit,
        params={"a_N": a_N, "b": b, "norm": norm, "log_base": log_base,
                "order": order},
    )


def lex_point(n: int):
    """n-th point of {0 < tau2 < tau1} U {(1,0)} in lexicographic order."""
    n = int(n)
    if n < 1:
        raise ValueError(f"lex index must be >= 1, got {n}")
    if n == 1:
        return (1, 0)
    i = int(math.floor(1.5 + math.sqrt(2 * n - 2)))
    j = n - (i * i - 3 * i) // 2 - 2
    return (i, j)


def lex_index(point) -> int:
    """Inverse of lex_point; raises if the point is not in the enumeration."""
    i, j = point
    if (i, j) == (1, 0):
        return 1
    if not 0 < j < i:
        raise ValueError(f"{point} is not an interior lex point")
    return (i * i - 3 * i) // 2 + 2 + j


def select_bandwidth_bispectrum(series: TimeSeries, k1: float = 2.0,
                                k2: float = 2.0, L: int = 5, b: float = 0.51,
                                channels=(0, 0, 0), log_base: float = math.e,
                                cap: int | None = None,
                                cache: BispectrumLagCache | None = None) -> BandwidthSelection:
    """Practical bispectrum rule over the lexicographic interior points.

    m_hat is the smallest m with |rho(P_{m+l})| < k~ sqrt(log N / N) for
    l = 1..L, where k~ = k1 at the boundary point (1,0) and k2 elsewhere.
    The bandwidth is floor(i / b) with i the first coordinate of P_{m_hat},
    so b = c = 0.51 yields only odd integers and b = 0.5 only even ones.
    """
    if k1 <= 0 or k2 <= 0 or L < 1 or not 0 < b <= 1:
        raise ValueError("need k1, k2 > 0, L >= 1, b in (0, 1]")
    N = series.n
    base = math.sqrt(math.log(N) / math.log(log_base) / N)
    if cap is None:
        cap = max(1, N // 4)
    if cache is None:
        cache = BispectrumLagCache(series, channels)
    denom = cache.rho_denominator()

    rho_cache: dict = {}

    def rho(n):
        val = rho_cache.get(n)
        if val is None:
            p = lex_point(n)
            val = cache.cumulant(*p) / denom
            rho_cache[n] = val
        return val

    trace = []
    m_hat, cap_hit = cap, True
    for m in range(1, cap + 1):
        ok = True
        for ell in range(1, L + 1):
            n = m + ell
            point = lex_point(n)
            ktil = k1 if point == (1, 0) else k2
            r = rho(n)
            trace.append((point, r))
            if abs(r) >= ktil * base:
                ok = False
                break
        if ok:
            m_hat, cap_hit = m, False
            break
    i = lex_point(m_hat)[0]
    return BandwidthSelection(
        M_hat=float(math.floor(i / b)), m_hat=m_hat, rule="bispectrum",
        thresholds={"k1": k1, "k2": k2, "base": base},
        trace=trace, cap_hit=cap_hit,
        params={"L": L, "b": b, "log_base": log_base},
    )


def bootstrap_threshold(series: TimeSeries, tau0, block_length: int | None = None,
                        B: int = 500, channel: int = 0, seed=None):
    """Circular block-bootstrap calibration of the selection threshold.

    Resamples the series in circular blocks, recomputes the normalized
    cumulant at tau0 in each of B replicates, and returns
    (sigma_hat, k = 2 sigma_hat) with sigma_hat = sqrt(N) times the
    replicate standard deviation — an approximate 95% simultaneous bound.
    """
    taus = (int(tau0),) if np.ndim(tau0) == 0 else tuple(int(t) for t in tau0)
    if any(t < 0 for t in taus):
        raise ValueError("tau0 components must be nonnegative")
    if B < 100:
        raise ValueError("need at least 100 bootstrap replicates")
    x = series.channel(channel)
    N = series.n
    if block_length is None:
        block_length = int(math.ceil(N ** (1.0 / 3.0)))
    if block_length < 1:
        raise ValueError("block length must be >= 1")
    if N < 2 * block_length:
        raise ValueError(f"series of length {N} too short for blocks of {block_length}")

    rng = np.random.Generator(np.random.Philox(seed))
    n_blocks = -(-N // block_length)
    starts = rng.integers(0, N, size=(B, n_blocks))
    idx = (starts[:, :, None] + np.arange(block_length)) % N
    xb = x[idx.reshape(B, -1)[:, :N]]

    y = xb - xb.mean(axis=1, keepdims=True)
    var = (y * y).sum(axis=1) / N
    if np.any(var <= 0.0):
        raise DegenerateSeriesError("bootstrap replicate with zero variance")
    gamma = max(taus + (0,))
    n_terms = N - gamma
    if n_terms < 1:
        raise ValueError("tau0 exceeds the series length")
    prod = y[:, :n_terms].copy()
    for t in taus:
        prod *= y[:, t:t + n_terms]
    num = prod.sum(axis=1) / N
    rhos = num / var ** ((len(taus) + 1) / 2.0)
    sigma_hat = math.sqrt(N) * float(np.std(rhos, ddof=1))
    return sigma_hat, 2.0 * sigma_hat


def _flat_top_pilots(series, channels, c, general_kwargs, bisp_kwargs,
                     calibrate, seed):
    # both pilot bandwidths come from the general selection rule (1-D and
    # 2-D annuli respectively), giving real-valued M = m / b; thresholds
    # are bootstrap-calibrated by default since the fluctuation scale of
    # higher-order cumulants is model-dependent
    general_kwargs = dict(general_kwargs or {})
    bisp_kwargs = dict(bisp_kwargs or {})
    if calibrate:
        if "k" not in general_kwargs:
            _, k2d = bootstrap_threshold(series, (3,), channel=channels[0],
                                         seed=seed)
            general_kwargs["k"] = max(k2d, 1e-3)
        if "k" not in bisp_kwargs:
            # calibrate at a boundary lag: the 2-D rule thresholds every lag
            # in the annulus with one k, and boundary lags fluctuate most
            _, k3d = bootstrap_threshold(series, (3, 0), channel=channels[0],
                                         seed=None if seed is None else seed + 1)
            bisp_kwargs["k"] = max(k3d, 1e-3)
    spec_win = trapezoid_window(c)
    sel2 = select_bandwidth_general(series, order=2,
                                    channels=(channels[0], channels[0]),
                                    b=c, **general_kwargs)
    bisp_win = flat_top_rpf(c)
    sel3 = select_bandwidth_general(series, order=3, channels=channels,
                                    b=c, **bisp_kwargs)
    return spec_win, sel2.M_hat, bisp_win, max(sel3.M_hat, 1.0), None


def _second_order_pilots(series, opt_threshold):
    N = series.n
    spec_win = parzen_window()
    M2 = max(float(math.floor(N ** 0.2)), 1.0)
    bisp_win = optimal_window()
    M3 = max(float(math.floor(N ** (1.0 / 6.0))), 1.0)
    return spec_win, M2, bisp_win, M3, opt_truncation_radius(opt_threshold)


def plugin_formula(N, l2_norm, spectrum_product, window_d2, curvature, cap):
    """Sixth-root plug-in rule with a cap when the curvature degenerates."""
    if spectrum_product <= 0.0:
        raise DegenerateSeriesError("pilot spectral product is not positive")
    if abs(curvature) == 0.0:
        return float(cap), True
    brace = (math.pi * N / (l2_norm * spectrum_product)
             * window_d2 ** 2 * abs(curvature) ** 2)
    M_hat = min(brace ** (1.0 / 6.0), float(cap))
    return M_hat, M_hat >= float(cap)


def plugin_bandwidth(window: LagWindow, series: TimeSeries, omega,
                     pilot: str = "flat-top", channels=(0, 0, 0), c: float = 0.51,
                     general_kwargs: dict | None = None,
                     bisp_kwargs: dict | None = None,
                     opt_threshold: float = 1e-3,
                     calibrate: bool = True, seed: int | None = 0,
                     cap: float | None = None) -> BandwidthSelection:
    """Per-frequency plug-in bandwidth for a differentiable order-2 kernel.

    M(w1, w2) = { pi N / (||lambda|| f(w1) f(w2) f(w1+w2))
                  * (d^2 lambda / d tau1^2 at 0)^2
                  * |(d/dw1^2 - d/dw1 dw2 + d/dw2^2) f(w1, w2)|^2 }^(1/6)

    with f and its curvature replaced by pilot estimates: flat-top pilots
    (trapezoid + pyramidal frustum, bandwidths from the selection rules) or
    second-order pilots (Parzen at floor(N^(1/5)), Bessel window at
    floor(N^(1/6))).
    """
    if pilot not in ("flat-top", "second-order"):
        raise ValueError(f"pilot must be 'flat-top' or 'second-order', got '{pilot}'")
    w1, w2 = float(omega[0]), float(omega[1])
    N = series.n
    if cap is None:
        cap = N / 4.0

    if pilot == "flat-top":
        spec_win, M2, bisp_win, M3, trunc = _flat_top_pilots(
            series, channels, c, general_kwargs, bisp_kwargs, calibrate, seed)
    else:
        spec_win, M2, bisp_win, M3, trunc = _second_order_pilots(series, opt_threshold)

    f1 = estimate_spectrum(series, spec_win, M2, w1,
                           channels=(channels[0], channels[0])).value
    f2 = estimate_spectrum(series, spec_win, M2, w2,
                           channels=(channels[1], channels[1])).value
    f12 = estimate_spectrum(series, spec_win, M2, w1 + w2,
                            channels=(channels[2], channels[2])).value
    product = f1 * f2 * f12
    if product <= 0.0:
        raise DegenerateSeriesError("pilot spectral product is not positive")

    curv = bispectrum_curvature(series, bisp_win, M3, (w1, w2),
                                channels=channels, truncation_radius=trunc)
    lam_norm = window_l2_norm(window)
    lam_d2 = window_curvature_at_zero(window)

    M_hat, cap_hit = plugin_formula(N, lam_norm, product, lam_d2, curv, cap)
    return BandwidthSelection(
        M_hat=M_hat, m_hat=max(int(round(M_hat)), 1), rule=f"plugin-{pilot}",
        thresholds={}, cap_hit=cap_hit,
        params={"omega": (w1, w2), "pilot_spectrum_M": M2,
                "pilot_bispectrum_M": M3, "f_product": product,
                "curvature": curv, "l2": lam_norm, "d2": lam_d2},
    )
