"""Lag-window kernels: flat-top families, the order-2 Bessel window, pilots.

2-D windows take lag arguments already scaled by the bandwidth, i.e. they are
evaluated at (tau1/M, tau2/M).  Flat-top windows are identically 1 inside a
neighborhood of the origin of radius `flat_top_radius` (for the frustum
windows this holds on the sector 0 <= y <= x; see `validate_flat_top`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial

import numpy as np

__all__ = [
    "LagWindow",
    "FlatTopReport",
    "SYMMETRY_MAPS",
    "apply_symmetry",
    "bessel_j2",
    "lambda_rp",
    "lambda_rc",
    "lambda_rpf",
    "lambda_rcf",
    "lambda_opt",
    "flat_top_rpf",
    "flat_top_rcf",
    "optimal_window",
    "trapezoid_window",
    "parzen_window",
    "parzen_window_2d",
    "pilot_windows",
    "symmetrize",
    "symmetrize_even_1d",
    "validate_flat_top",
    "parse_window",
    "window_l2_norm",
    "window_curvature_at_zero",
    "opt_truncation_radius",
]

_SQRT3 = math.sqrt(3.0)
_ALPHA_SCALE = 2.0 * math.pi / _SQRT3

# The six planar maps fixing the third-order cumulant: identity, swap,
# (-x, y-x), (y-x, -x), (x-y, -y), (-y, x-y).  Stored as 2x2 integer
# matrices acting on column vectors (x, y).
SYMMETRY_MAPS = (
    ((1, 0), (0, 1)),
    ((0, 1), (1, 0)),
    ((-1, 0), (-1, 1)),
    ((-1, 1), (-1, 0)),
    ((1, -1), (0, -1)),
    ((0, -1), (1, -1)),
)


def apply_symmetry(m, x, y):
    """Apply one symmetry matrix to coordinates (arrays ok)."""
    (a, b), (c, d) = m
    return a * x + b * y, c * x + d * y


# ---------------------------------------------------------------------------
# Bessel J2, computed in-house.
#
# Uses the integral form J_n(x) = (1/2pi) int_{-pi}^{pi} cos(n t - x sin t) dt
# discretized by the periodic trapezoid rule, which is exact up to aliasing
# terms J_{n +/- K}(x); with K = 512 nodes these are negligible for |x| well
# below ~400, far beyond any argument this package produces.
# ---------------------------------------------------------------------------

_J2_NODES = 512
_J2_THETA = 2.0 * np.pi * np.arange(_J2_NODES) / _J2_NODES
_J2_SIN = np.sin(_J2_THETA)
_J2_2THETA = 2.0 * _J2_THETA


def bessel_j2(x):
    """Second-order Bessel function of the first kind, |x| <~ 400."""
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    flat = np.atleast_1d(x).ravel()
    out = np.empty_like(flat)
    # chunk to bound the (len, K) workspace
    step = 1 << 16
    for i in range(0, flat.size, step):
        seg = flat[i:i + step, None]
        out[i:i + step] = np.cos(_J2_2THETA - seg * _J2_SIN).mean(axis=1)
    out = out.reshape(np.atleast_1d(x).shape)
    return float(out[0]) if scalar else out.reshape(x.shape)


def _opt_profile(alpha):
    """8 J2(alpha)/alpha^2 with the removable singularity handled by series."""
    alpha = np.asarray(alpha, dtype=float)
    scalar = alpha.ndim == 0
    if scalar:
        alpha = alpha[None]
    out = np.empty_like(alpha)
    small = alpha < 0.5
    if np.any(small):
        a2 = alpha[small] ** 2
        # 8 J2(a)/a^2 = sum_m (-1)^m 2 (a/2)^{2m} / (m! (m+2)!)
        acc = np.zeros_like(a2)
        term = np.ones_like(a2)  # (a/2)^{2m}
        for m in range(9):
            acc += (-1) ** m * 2.0 * term / (math.factorial(m) * math.factorial(m + 2))
            term = term * a2 / 4.0
        out[small] = acc
    big = ~small
    if np.any(big):
        ab = alpha[big]
        out[big] = 8.0 / ab ** 2 * bessel_j2(ab)
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# 2-D window shapes
# ---------------------------------------------------------------------------

def lambda_rp(x, y):
    """Right pyramid over the hexagon |x| + |y| + |x - y| = 2."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    quadrant = ((x >= -1) & (x <= 0) & (y >= -1) & (y <= 0)) | (
        (x >= 0) & (x <= 1) & (y >= 0) & (y <= 1)
    )
    val = np.where(
        quadrant,
        1.0 - np.maximum(np.abs(x), np.abs(y)),
        1.0 - np.maximum(np.abs(x + y), np.abs(x - y)),
    )
    return np.maximum(val, 0.0)


def lambda_rc(x, y):
    """Right cone over the ellipse x^2 - xy + y^2 = 1."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    q = x * x - x * y + y * y
    return np.maximum(1.0 - np.sqrt(np.maximum(q, 0.0)), 0.0)


def _check_c(c):
    if not 0.0 < c < 1.0:
        raise ValueError(f"flat-top parameter c must be in (0, 1), got {c}")


def lambda_rpf(x, y, c=0.51):
    """Right pyramidal frustum: flat inside |x| + |y| + |x - y| = 2c."""
    _check_c(c)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return (lambda_rp(x, y) - c * lambda_rp(x / c, y / c)) / (1.0 - c)


def lambda_rcf(x, y, c=0.51):
    """Right conical frustum: flat inside x^2 - xy + y^2 = c^2."""
    _check_c(c)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return (lambda_rc(x, y) - c * lambda_rc(x / c, y / c)) / (1.0 - c)


def lambda_opt(x, y):
    """Order-2 "optimal" window 8 J2(alpha)/alpha^2, alpha = 2pi/sqrt(3) * sqrt(x^2 - xy + y^2)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    q = np.maximum(x * x - x * y + y * y, 0.0)
    return _opt_profile(_ALPHA_SCALE * np.sqrt(q))


def opt_truncation_radius(threshold=1e-3) -> float:
    """Quadratic-form radius beyond which |lambda_opt| stays below `threshold`.

    Inverts the envelope 8 sqrt(2/(pi a)) / a^2; the region
    x^2 - xy + y^2 <= r^2 is invariant under all six symmetries.
    """
    alpha = (8.0 * math.sqrt(2.0 / math.pi) / threshold) ** (2.0 / 5.0)
    return alpha / _ALPHA_SCALE


# ---------------------------------------------------------------------------
# 1-D pilot windows
# ---------------------------------------------------------------------------

def _trapezoid_fn(t, c=0.51):
    t = np.abs(np.asarray(t, dtype=float))
    return np.clip((1.0 - t) / (1.0 - c), 0.0, 1.0)


def _parzen_fn(t):
    t = np.abs(np.asarray(t, dtype=float))
    inner = 1.0 - 6.0 * t ** 2 + 6.0 * t ** 3
    outer = 2.0 * (1.0 - t) ** 3
    return np.where(t <= 0.5, inner, np.where(t <= 1.0, outer, 0.0))


def _parzen2d_fn(x, y):
    return _parzen_fn(x) * _parzen_fn(y) * _parzen_fn(np.asarray(y) - np.asarray(x))


# ---------------------------------------------------------------------------
# Window objects
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LagWindow:
    """An evaluable lag-window kernel with its geometry descriptors.

    `order` is the spectral order s it serves (2 -> 1-D argument, 3 -> 2-D).
    `support_radius` bounds the coordinates of the support box in scaled lag
    units (None means unbounded).  `qform_profile`, when set, gives
    lambda(x, y) = g(sqrt(x^2 - xy + y^2)).
    """

    name: str
    order: int
    fn: object
    flat_top_radius: float = 0.0
    support_radius: float | None = None
    params: dict = field(default_factory=dict)
    symmetric: bool = True
    qform_profile: object = None

    def __call__(self, *coords):
        out = self.fn(*coords)
        if np.ndim(coords[0]) == 0:
            return float(out)
        return out

    def key(self):
        return (self.name, self.order, tuple(sorted(self.params.items())))


def flat_top_rpf(c: float = 0.51) -> LagWindow:
    _check_c(c)
    return LagWindow(
        name="rpf", order=3, fn=partial(lambda_rpf, c=c),
        flat_top_radius=c, support_radius=1.0, params={"c": c},
    )


def _rcf_profile(r, c=0.51):
    r = np.asarray(r, dtype=float)
    base = np.maximum(1.0 - r, 0.0)
    inner = np.maximum(1.0 - r / c, 0.0)
    return (base - c * inner) / (1.0 - c)


def flat_top_rcf(c: float = 0.51) -> LagWindow:
    _check_c(c)
    return LagWindow(
        name="rcf", order=3, fn=partial(lambda_rcf, c=c),
        flat_top_radius=c, support_radius=2.0 / _SQRT3, params={"c": c},
        qform_profile=partial(_rcf_profile, c=c),
    )


def _opt_qform_profile(r):
    return _opt_profile(_ALPHA_SCALE * np.asarray(r, dtype=float))


def optimal_window() -> LagWindow:
    return LagWindow(
        name="opt", order=3, fn=lambda_opt,
        flat_top_radius=0.0, support_radius=None,
        qform_profile=_opt_qform_profile,
    )


def trapezoid_window(c: float = 0.51) -> LagWindow:
    _check_c(c)
    return LagWindow(
        name="trapezoid", order=2, fn=partial(_trapezoid_fn, c=c),
        flat_top_radius=c, support_radius=1.0, params={"c": c},
    )


def parzen_window() -> LagWindow:
    return LagWindow(
        name="parzen", order=2, fn=_parzen_fn,
        flat_top_radius=0.0, support_radius=1.0,
    )


def parzen_window_2d() -> LagWindow:
    return LagWindow(
        name="parzen2d", order=3, fn=_parzen2d_fn,
        flat_top_radius=0.0, support_radius=1.0,
    )


def pilot_windows(c: float = 0.51) -> dict:
    """Catalog of the pilot windows used by the plug-in procedures."""
    return {
        "trapezoid": trapezoid_window(c),
        "parzen": parzen_window(),
        "parzen2d": parzen_window_2d(),
        "opt": optimal_window(),
    }


# ---------------------------------------------------------------------------
# Symmetrization
# ---------------------------------------------------------------------------

def _combine_mean(vals):
    return np.mean(vals, axis=0)


def _combine_gmean(vals):
    vals = np.asarray(vals)
    if np.any(vals < 0):
        raise ValueError("geometric mean requires nonnegative window values")
    return np.prod(vals, axis=0) ** (1.0 / len(vals))


_COMBINERS = {"mean": _combine_mean, "gmean": _combine_gmean}


def symmetrize(window: LagWindow, combiner="mean") -> LagWindow:
    """Average a 2-D window over its six symmetry images.

    The result satisfies the cumulant symmetry relations at every point for
    any symmetric 6-ary combiner (arithmetic and geometric mean built in).
    """
    if window.order != 3:
        raise ValueError("symmetrize applies to order-3 windows")
    g = _COMBINERS.get(combiner, combiner)

    def fn(x, y, _g=g, _w=window.fn):
        vals = [_w(*apply_symmetry(m, np.asarray(x, float), np.asarray(y, float)))
                for m in SYMMETRY_MAPS]
        return _g(np.stack([np.asarray(v, float) for v in vals]))

    support = None if window.support_radius is None else 2.0 * window.support_radius
    return LagWindow(
        name=f"sym({window.name})", order=3, fn=fn,
        flat_top_radius=window.flat_top_radius, support_radius=support,
        params=dict(window.params), symmetric=True,
    )


def symmetrize_even_1d(window: LagWindow, combiner="gmean") -> LagWindow:
    """Lift an even 1-D window to a symmetric 2-D one via h(l(x), l(y), l(y-x))."""
    if window.order != 2:
        raise ValueError("expected a 1-D (order-2) window")
    g = _COMBINERS.get(combiner, combiner)

    def fn(x, y, _g=g, _w=window.fn):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        return _g(np.stack([np.asarray(_w(x), float),
                            np.asarray(_w(y), float),
                            np.asarray(_w(y - x), float)]))

    support = None if window.support_radius is None else window.support_radius
    return LagWindow(
        name=f"sym1d({window.name})", order=3, fn=fn,
        flat_top_radius=window.flat_top_radius, support_radius=support,
        params=dict(window.params), symmetric=True,
    )


# ---------------------------------------------------------------------------
# Flat-top axiom checks
# ---------------------------------------------------------------------------

@dataclass
class FlatTopReport:
    window: str
    b: float
    flat_ok: bool
    bounded_ok: bool
    violations: list

    @property
    def passed(self) -> bool:
        return self.flat_ok and self.bounded_ok


def validate_flat_top(window: LagWindow, grid_step=0.01, b=None, sector=False,
                      bound_radius=None, tol=1e-9) -> FlatTopReport:
    """Check conditions (i) and (ii) on a sampled grid; report, never raise.

    Condition (i): lambda = 1 on the Euclidean ball of radius b (optionally
    restricted to the sector 0 <= y <= x, where the frustum windows are
    flat up to radius c).  Condition (ii): |lambda| <= 1 everywhere sampled.
    """
    if b is None:
        b = window.flat_top_radius
    R = bound_radius if bound_radius is not None else (window.support_radius or 3.0)
    ax = np.arange(-R, R + grid_step / 2, grid_step)
    violations = []
    if window.order == 2:
        vals = np.asarray(window.fn(ax), float)
        bounded_ok = bool(np.all(np.abs(vals) <= 1.0 + tol))
        for t in ax[np.abs(vals) > 1.0 + tol][:20]:
            violations.append((float(t), None, float(window.fn(t)), "bound"))
        flat_mask = np.abs(ax) <= b
        flat_ok = b > 0 and bool(np.all(np.abs(vals[flat_mask] - 1.0) <= tol))
        for t in ax[flat_mask & (np.abs(vals - 1.0) > tol)][:20]:
            violations.append((float(t), None, float(window.fn(t)), "flat"))
        return FlatTopReport(window.name, b, flat_ok, bounded_ok, violations)

    X, Y = np.meshgrid(ax, ax, indexing="ij")
    vals = np.asarray(window.fn(X, Y), float)
    bad = np.abs(vals) > 1.0 + tol
    bounded_ok = bool(~bad.any())
    for x, y, v in zip(X[bad][:20], Y[bad][:20], vals[bad][:20]):
        violations.append((float(x), float(y), float(v), "bound"))
    flat_mask = X * X + Y * Y <= b * b
    if sector:
        flat_mask &= (Y >= 0) & (Y <= X)
    bad_flat = flat_mask & (np.abs(vals - 1.0) > tol)
    flat_ok = b > 0 and bool(~bad_flat.any())
    for x, y, v in zip(X[bad_flat][:20], Y[bad_flat][:20], vals[bad_flat][:20]):
        violations.append((float(x), float(y), float(v), "flat"))
    return FlatTopReport(window.name, b, flat_ok, bounded_ok, violations)


# ---------------------------------------------------------------------------
# Numeric window constants for the plug-in bandwidth formula
# ---------------------------------------------------------------------------

def _simpson(y, dx):
    n = len(y)
    if n % 2 == 0:
        raise ValueError("simpson needs an odd sample count")
    return dx / 3.0 * (y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-2:2].sum())


_CONST_CACHE: dict = {}

# integration extent for the non-compact optimal window; tail of the L2
# integral beyond quadratic-form radius 60 is ~1e-6 relative
_OPT_L2_RADIUS = 60.0


def window_l2_norm(window: LagWindow) -> float:
    """L2 norm of the window over its lag space, computed numerically once."""
    cached = _CONST_CACHE.get(("l2", window.key()))
    if cached is not None:
        return cached
    if window.order == 2:
        R = window.support_radius or _OPT_L2_RADIUS
        n = 40001
        t = np.linspace(-R, R, n)
        val = _simpson(np.asarray(window.fn(t), float) ** 2, t[1] - t[0])
    elif window.qform_profile is not None:
        # lambda = g(sqrt(q)): integral reduces to (4pi/sqrt(3)) int g(r)^2 r dr
        R = window.support_radius if window.support_radius is not None else _OPT_L2_RADIUS
        r = np.linspace(0.0, R, 80001)
        g = window.qform_profile(r)
        val = 4.0 * math.pi / _SQRT3 * _simpson(np.asarray(g, float) ** 2 * r, r[1] - r[0])
    else:
        R = window.support_radius
        if R is None:
            raise ValueError("cannot integrate an unbounded window without a radial profile")
        n = 1601
        ax = np.linspace(-R, R, n)
        X, Y = np.meshgrid(ax, ax, indexing="ij")
        sq = np.asarray(window.fn(X, Y), float) ** 2
        rows = np.array([_simpson(sq[i], ax[1] - ax[0]) for i in range(n)])
        val = _simpson(rows, ax[1] - ax[0])
    result = math.sqrt(val)
    _CONST_CACHE[("l2", window.key())] = result
    return result


def window_curvature_at_zero(window: LagWindow, h=1e-4) -> float:
    """Second partial of the window along its first lag axis at the origin."""
    cached = _CONST_CACHE.get(("d2", window.key(), h))
    if cached is not None:
        return cached
    if window.order == 2:
        val = (float(window.fn(h)) - 2.0 * float(window.fn(0.0)) + float(window.fn(-h))) / h ** 2
    else:
        val = (float(window.fn(h, 0.0)) - 2.0 * float(window.fn(0.0, 0.0))
               + float(window.fn(-h, 0.0))) / h ** 2
    _CONST_CACHE[("d2", window.key(), h)] = val
    return val


# ---------------------------------------------------------------------------
# Name-based construction (CLI)
# ---------------------------------------------------------------------------

_FACTORIES = {
    "rpf": flat_top_rpf,
    "rcf": flat_top_rcf,
    "opt": optimal_window,
    "trapezoid": trapezoid_window,
    "parzen": parzen_window,
    "parzen2d": parzen_window_2d,
}


def parse_window(spec: str) -> LagWindow:
    """Build a window from a name + parameter string, e.g. 'rpf:c=0.51'."""
    name, _, rest = spec.partition(":")
    name = name.strip().lower()
    if name not in _FACTORIES:
        raise ValueError(f"unknown window '{name}' (choose from {sorted(_FACTORIES)})")
    kwargs = {}
    if rest:
        for item in rest.split(","):
            k, _, v = item.partition("=")
            if not _:
                raise ValueError(f"malformed window parameter '{item}'")
            kwargs[k.strip()] = float(v)
    return _FACTORIES[name](**kwargs)
