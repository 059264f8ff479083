"""Special functions, quadrature engines and root polishing.

Everything here is self-contained numpy code. The Airy function is assembled
from its Maclaurin series near the origin, the two large-argument expansions,
and Taylor continuation of ``y'' = x y`` across the two intermediate bands
where neither series is accurate to 1e-12. The quadrature rules are composite
Gauss-Legendre with adaptive bisection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AiryRangeError, NoConvergenceError, QuadratureError

__all__ = [
    "QuadratureSpec",
    "airy_ai",
    "airy_ai_prime",
    "gamma_three_quarters",
    "integrate_1d",
    "integrate_2d",
    "polish_root",
    "AIRY_X_MAX",
]


# # Airy function

#: Largest |x| for which airy_ai is validated.
AIRY_X_MAX = 30.0

# Ai(0) = 3^(-2/3)/Gamma(2/3),  -Ai'(0) = 3^(-1/3)/Gamma(1/3)
_AI0 = 0.355028053887817239260063186004183176
_DAI0 = 0.258819403792806798405183560189203963

# power series is used on [_SERIES_LO, _SERIES_HI]
_SERIES_HI = 3.5
_SERIES_LO = -5.0
# Taylor continuation of y'' = x y bridges [_OSC_LO, _SERIES_LO) starting from
# the series, and (_SERIES_HI, _DECAY_HI] integrating downwards from the
# exponential expansion (downward integration is stable for the recessive Ai)
_OSC_LO = -8.0
_DECAY_HI = 7.0
_ANCHOR_STEP = 0.25
_TAYLOR_TERMS = 30

_N_SERIES = 40
_N_ASYM_DECAY = 17
_N_ASYM_OSC = 22


def _asymptotic_coefficients(n):
    u = [1.0]
    for k in range(1, n):
        u.append(u[-1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216 * k))
    v = [1.0]
    for k in range(1, n):
        v.append(-u[k] * (6 * k + 1) / (6 * k - 1))
    return np.array(u), np.array(v)


_U, _V = _asymptotic_coefficients(max(_N_ASYM_DECAY, _N_ASYM_OSC) + 1)


def _series(x):
    """Maclaurin series of Ai and Ai' (vectorised)."""
    x = np.asarray(x, dtype=float)
    x3 = x**3
    f = np.ones_like(x)
    g = x.copy()
    df = np.zeros_like(x)
    dg = np.ones_like(x)
    tf = np.ones_like(x)
    tg = x.copy()
    tdf = 0.5 * x**2
    tdg = np.ones_like(x)
    df += tdf
    for k in range(1, _N_SERIES):
        tf = tf * x3 / ((3 * k - 1) * (3 * k))
        tg = tg * x3 / ((3 * k) * (3 * k + 1))
        f += tf
        g += tg
        # derivative series: d_k = 3k c_k x^(3k-1), e_k = (3k+1) c'_k x^(3k)
        tdf = tdf * x3 / ((3 * k) * (3 * k + 2))
        tdg = tdg * x3 / ((3 * k - 2) * (3 * k))
        df += tdf
        dg += tdg
    return _AI0 * f - _DAI0 * g, _AI0 * df - _DAI0 * dg


def _taylor_step(x0, y0, dy0, h):
    """Value and derivative of the Airy-equation solution through (x0, y0, dy0) at x0 + h."""
    a = [y0, dy0, 0.5 * x0 * y0]
    for m in range(1, _TAYLOR_TERMS):
        a.append((x0 * a[m] + a[m - 1]) / ((m + 2) * (m + 1)))
    y = np.zeros_like(h)
    dy = np.zeros_like(h)
    for n in range(len(a) - 1, 0, -1):
        y = y * h + a[n]
        dy = dy * h + n * a[n]
    y = y * h + a[0]
    return y, dy


def _build_anchors(start, stop, y0, dy0):
    n = int(round(abs(stop - start) / _ANCHOR_STEP))
    step = math.copysign(_ANCHOR_STEP, stop - start)
    xs = start + step * np.arange(n + 1)
    ys, dys = [float(y0)], [float(dy0)]
    for x0 in xs[:-1]:
        y1, dy1 = _taylor_step(x0, ys[-1], dys[-1], np.array(step))
        ys.append(float(y1))
        dys.append(float(dy1))
    return xs, np.array(ys), np.array(dys)


def _bridge(x, anchors):
    xs, ys, dys = anchors
    idx = np.rint((x - xs[0]) / (xs[1] - xs[0])).astype(int)
    y = np.empty_like(x)
    dy = np.empty_like(x)
    # Taylor coefficients depend on the anchor, so loop over the distinct anchors
    for i in np.unique(idx):
        m = idx == i
        y[m], dy[m] = _taylor_step(xs[i], ys[i], dys[i], x[m] - xs[i])
    return y, dy


def _asym_decay(x):
    z = 2.0 / 3.0 * x**1.5
    s = np.zeros_like(x)
    ds = np.zeros_like(x)
    for k in range(_N_ASYM_DECAY - 1, -1, -1):
        s = s * (-1.0 / z) + _U[k]
        ds = ds * (-1.0 / z) + _V[k]
    env = np.exp(-z) / (2.0 * math.sqrt(math.pi))
    return env * x**-0.25 * s, -env * x**0.25 * ds


def _asym_osc(x):
    a = -x
    z = 2.0 / 3.0 * a**1.5
    iz2 = -1.0 / z**2
    # P, Q: even/odd parts of the u_k series with alternating signs
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    r = np.zeros_like(x)
    s = np.zeros_like(x)
    for k in range(_N_ASYM_OSC // 2 - 1, -1, -1):
        p = p * iz2 + _U[2 * k]
        q = q * iz2 + _U[2 * k + 1]
        r = r * iz2 + _V[2 * k]
        s = s * iz2 + _V[2 * k + 1]
    q = q / z
    s = s / z
    th = z - math.pi / 4.0
    c, sn = np.cos(th), np.sin(th)
    ai = (c * p + sn * q) / (math.sqrt(math.pi) * a**0.25)
    dai = a**0.25 * (sn * r - c * s) / math.sqrt(math.pi)
    return ai, dai


_OSC_ANCHORS = _build_anchors(_SERIES_LO, _OSC_LO, *(v[0] for v in _series(np.array([_SERIES_LO]))))
_DECAY_ANCHORS = _build_anchors(
    _DECAY_HI, _SERIES_HI, *(v[0] for v in _asym_decay(np.array([_DECAY_HI])))
)


def _airy(x):
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise AiryRangeError("airy_ai argument must be finite")
    if np.any(np.abs(x) > AIRY_X_MAX):
        bad = x[np.abs(x) > AIRY_X_MAX].flat[0]
        raise AiryRangeError(f"airy_ai supports |x| <= {AIRY_X_MAX}, got {bad!r}")
    flat = np.atleast_1d(x).ravel()
    ai = np.empty_like(flat)
    dai = np.empty_like(flat)
    for mask, fn in (
        (flat > _DECAY_HI, _asym_decay),
        ((flat > _SERIES_HI) & (flat <= _DECAY_HI), lambda v: _bridge(v, _DECAY_ANCHORS)),
        ((flat >= _SERIES_LO) & (flat <= _SERIES_HI), _series),
        ((flat >= _OSC_LO) & (flat < _SERIES_LO), lambda v: _bridge(v, _OSC_ANCHORS)),
        (flat < _OSC_LO, _asym_osc),
    ):
        if np.any(mask):
            ai[mask], dai[mask] = fn(flat[mask])
    return ai.reshape(x.shape), dai.reshape(x.shape)


def airy_ai(x):
    """Airy function Ai(x) for real ``|x| <= 30``.

    Accurate to 1e-12 absolute on ``|x| <= 10`` and to 1e-10 relative (to the
    envelope on the oscillatory side) beyond.

    Parameters
    ----------
    x : float or array_like

    Returns
    -------
    float or ndarray
    """
    ai, _ = _airy(x)
    return float(ai) if ai.ndim == 0 else ai


def airy_ai_prime(x):
    """Derivative Ai'(x), same range and method as :func:`airy_ai`."""
    _, dai = _airy(x)
    return float(dai) if dai.ndim == 0 else dai


def gamma_three_quarters():
    """Gamma(3/4)."""
    return 1.2254167024651776451290983034


# # Quadrature


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and budget for the adaptive quadrature engines.

    ``truncation_threshold`` is the integrand-magnitude cutoff (relative to the
    peak) that callers use to choose finite integration windows.
    """

    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_evals: int = 2_000_000
    truncation_threshold: float = 1e-16

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0 and self.truncation_threshold > 0):
            raise ValueError("quadrature tolerances must be positive")
        if self.max_evals < 100:
            raise ValueError("max_evals must be at least 100")

    @property
    def tail_log(self):
        """ln(1/truncation_threshold)."""
        return -math.log(self.truncation_threshold)


DEFAULT_SPEC = QuadratureSpec()

_GL_ORDER_1D = 15
_GL_ORDER_2D = 10
_X1, _W1 = np.polynomial.legendre.leggauss(_GL_ORDER_1D)
_X2, _W2 = np.polynomial.legendre.leggauss(_GL_ORDER_2D)


def _gl_panels(f, a, b):
    """Gauss-Legendre estimate on each panel [a_i, b_i]."""
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    nodes = mid[:, None] + half[:, None] * _X1[None, :]
    vals = np.asarray(f(nodes), dtype=complex)
    if vals.shape != nodes.shape:
        vals = np.broadcast_to(vals, nodes.shape)
    return half * (vals @ _W1)


def _check_finite(values, what):
    if not np.all(np.isfinite(values)):
        raise QuadratureError(f"non-finite integrand values in {what}")


def integrate_1d(f, a, b, spec=None, *, panels=8, full_output=False):
    """Adaptive composite Gauss-Legendre quadrature of a complex integrand.

    Each panel is estimated with a 15-point rule and with the same rule on its
    two halves; panels whose discrepancy exceeds their share of the tolerance
    are bisected.

    Parameters
    ----------
    f : callable
        Vectorised integrand, ``f(ndarray) -> ndarray`` (real or complex).
    a, b : float
        Integration limits, ``a < b``.
    spec : QuadratureSpec, optional
    panels : int
        Number of equal panels in the initial partition.
    full_output : bool
        If true return ``(value, error, nevals)``.

    Returns
    -------
    complex
        Integral estimate whose error estimate is at most
        ``max(abs_tol, rel_tol*|value|)``.

    Raises
    ------
    QuadratureError
        If ``max_evals`` is exhausted first; carries the best estimate.
    """
    spec = spec or DEFAULT_SPEC
    if not a < b:
        raise ValueError(f"integrate_1d needs a < b, got a={a!r}, b={b!r}")
    length = b - a
    edges = np.linspace(a, b, panels + 1)
    lo, hi = edges[:-1], edges[1:]
    coarse = _gl_panels(f, lo, hi)
    nevals = coarse.size * _GL_ORDER_1D
    done_val = 0.0 + 0.0j
    done_err = 0.0
    while True:
        mid = 0.5 * (lo + hi)
        left = _gl_panels(f, lo, mid)
        right = _gl_panels(f, mid, hi)
        nevals += 2 * lo.size * _GL_ORDER_1D
        fine = left + right
        _check_finite(fine, "integrate_1d")
        err = np.abs(fine - coarse)
        total = done_val + fine.sum()
        tol = max(spec.abs_tol, spec.rel_tol * abs(total))
        if done_err + err.sum() <= tol:
            return (complex(total), done_err + float(err.sum()), nevals) if full_output else complex(total)
        if nevals > spec.max_evals:
            raise QuadratureError(
                f"integrate_1d did not converge within {spec.max_evals} evaluations",
                estimate=complex(total),
                error=done_err + float(err.sum()),
                nevals=nevals,
            )
        share = 0.5 * tol * (hi - lo) / length
        ok = err <= share
        done_val += fine[ok].sum()
        done_err += err[ok].sum()
        bad = ~ok
        if not np.any(bad):
            # every panel meets its share but the sum does not: tighten globally
            bad = err >= np.median(err)
            done_val -= fine[ok & bad].sum()
            done_err -= err[ok & bad].sum()
        lo_b, mid_b, hi_b = lo[bad], mid[bad], hi[bad]
        lo = np.concatenate([lo_b, mid_b])
        hi = np.concatenate([mid_b, hi_b])
        coarse = np.concatenate([left[bad], right[bad]])


def _gl_rects(f, x0, x1, y0, y1):
    hx = 0.5 * (x1 - x0)
    hy = 0.5 * (y1 - y0)
    mx = 0.5 * (x1 + x0)
    my = 0.5 * (y1 + y0)
    xs = mx[:, None, None] + hx[:, None, None] * _X2[None, :, None]
    ys = my[:, None, None] + hy[:, None, None] * _X2[None, None, :]
    xs, ys = np.broadcast_arrays(xs, ys)
    vals = np.asarray(f(xs, ys), dtype=complex)
    return hx * hy * np.einsum("nij,i,j->n", vals, _W2, _W2)


def integrate_2d(f, window, spec=None, *, cells=(8, 8), full_output=False):
    """Adaptive tensor-product Gauss-Legendre cubature over a rectangle.

    Each cell is estimated with a 10x10 rule and with the same rule on its
    four quadrants; cells failing their share of the tolerance are split.

    Parameters
    ----------
    f : callable
        Vectorised integrand ``f(x, y)`` on equally shaped arrays.
    window : tuple
        ``(x_min, x_max, y_min, y_max)``.
    spec : QuadratureSpec, optional
    cells : (int, int)
        Initial partition along x and y.
    full_output : bool
        If true return ``(value, error, nevals)``.
    """
    spec = spec or DEFAULT_SPEC
    xa, xb, ya, yb = (float(v) for v in window)
    if not (xa < xb and ya < yb):
        raise ValueError(f"degenerate integration window {window!r}")
    area = (xb - xa) * (yb - ya)
    ex = np.linspace(xa, xb, cells[0] + 1)
    ey = np.linspace(ya, yb, cells[1] + 1)
    X0, Y0 = np.meshgrid(ex[:-1], ey[:-1], indexing="ij")
    X1, Y1 = np.meshgrid(ex[1:], ey[1:], indexing="ij")
    x0, x1, y0, y1 = X0.ravel(), X1.ravel(), Y0.ravel(), Y1.ravel()
    npts = _GL_ORDER_2D**2
    coarse = _gl_rects(f, x0, x1, y0, y1)
    nevals = coarse.size * npts
    done_val = 0.0 + 0.0j
    done_err = 0.0
    while True:
        xm = 0.5 * (x0 + x1)
        ym = 0.5 * (y0 + y1)
        quads = [
            (x0, xm, y0, ym),
            (xm, x1, y0, ym),
            (x0, xm, ym, y1),
            (xm, x1, ym, y1),
        ]
        parts = [_gl_rects(f, *qd) for qd in quads]
        nevals += 4 * x0.size * npts
        fine = parts[0] + parts[1] + parts[2] + parts[3]
        _check_finite(fine, "integrate_2d")
        err = np.abs(fine - coarse)
        total = done_val + fine.sum()
        tol = max(spec.abs_tol, spec.rel_tol * abs(total))
        if done_err + err.sum() <= tol:
            return (complex(total), done_err + float(err.sum()), nevals) if full_output else complex(total)
        if nevals > spec.max_evals:
            raise QuadratureError(
                f"integrate_2d did not converge within {spec.max_evals} evaluations",
                estimate=complex(total),
                error=done_err + float(err.sum()),
                nevals=nevals,
            )
        share = 0.5 * tol * (x1 - x0) * (y1 - y0) / area
        ok = err <= share
        done_val += fine[ok].sum()
        done_err += err[ok].sum()
        bad = ~ok
        if not np.any(bad):
            bad = err >= np.median(err)
            done_val -= fine[ok & bad].sum()
            done_err -= err[ok & bad].sum()
        x0 = np.concatenate([q[0][bad] for q in quads])
        x1 = np.concatenate([q[1][bad] for q in quads])
        y0 = np.concatenate([q[2][bad] for q in quads])
        y1 = np.concatenate([q[3][bad] for q in quads])
        coarse = np.concatenate([p[bad] for p in parts])


# # Root polishing


def polish_root(f, df, guess, *, scale=1.0, max_iter=50, tol=1e-12):
    """Refine a simple complex root by damped Newton iteration.

    A step is halved (up to 30 times) whenever it would increase ``|f|``.
    Iteration stops once ``|f(p)| < tol*scale`` and the last step is at
    round-off level.

    Raises
    ------
    NoConvergenceError
        If the residual criterion is not met after `max_iter` steps.
    """
    p = complex(guess)
    fp = complex(f(p))
    for _ in range(max_iter):
        d = complex(df(p))
        if d == 0 or not np.isfinite(d):
            raise NoConvergenceError(f"vanishing derivative at p={p!r}", last=p)
        step = fp / d
        trial = p - step
        ft = complex(f(trial))
        n = 0
        while not abs(ft) <= abs(fp) and n < 30:
            step *= 0.5
            trial = p - step
            ft = complex(f(trial))
            n += 1
        p, fp = trial, ft
        if abs(fp) < tol * scale and abs(step) <= 4 * np.finfo(float).eps * max(1.0, abs(p)):
            return p
        if fp == 0:
            return p
    if abs(fp) < tol * scale:
        return p
    raise NoConvergenceError(f"Newton iteration stalled at p={p!r}, |f|={abs(fp):.3e}", last=p)
