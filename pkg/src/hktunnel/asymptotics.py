"""Saddle-point evaluation of the reduced HK integral for the folding model.

The exponent ``phi_tau`` has three stationary points: the two roots of
``q + tau g p^2`` (real for q < 0, imaginary for q > 0) and the branch point
``p_I`` of the prefactor. Which of them contribute depends on the region:

* allowed  (q < 0):           both real roots,
* shallow  (0 < q < l_gamma): the tunnelling root ``i sqrt(q/(tau g))``,
* deep     (q > l_gamma):     the branch point ``p_I`` alone.

The deep-region contribution comes from the sqrt-type endpoint at ``p_I``;
integrating ``sqrt(-(p - p_I)/p_I) exp(-phi''(p_I) (p - p_I)^2 / 2)`` along the
real direction through ``p_I`` gives a Gamma(3/4) prefactor, a
``(q - l_gamma)^(-3/4)`` caustic and ``exp(-phi(p_I))`` with

    phi(p_I) = gamma (q + l_gamma)^2 / 2 - (2/3) gamma l_gamma^2.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import CausticError
from .folding import (
    ModelParams,
    RegionClass,
    classify_region,
    derived_scales,
    exact_kernel,
    hk_kernel_reduced,
    hk_prefactor_analytic,
    phi_tau,
    phi_tau_prime,
    phi_tau_second,
)
from .numerics import gamma_three_quarters, polish_root

__all__ = [
    "SaddleKind",
    "SaddlePoint",
    "BorderResult",
    "ScalingRow",
    "find_saddles",
    "contributing_set",
    "saddle_contribution",
    "hksc_deep",
    "hk_semiclassical",
    "find_border",
    "hbar_scaling_study",
    "local_deviation",
]


class SaddleKind(enum.Enum):
    OUTGOING_REAL = "p_plus"
    INCOMING_REAL = "p_minus"
    TUNNELING = "p_0"
    # the conjugate imaginary root -i sqrt(q/(tau g)); never contributes
    ANTI_TUNNELING = "p_0_conj"
    ARTIFACT = "p_I"


@dataclass(frozen=True)
class SaddlePoint:
    p: complex
    kind: SaddleKind
    contributing: bool
    phi: complex
    phi2: complex
    degenerate: bool = False


@dataclass(frozen=True)
class BorderResult:
    q_border: float
    collision_residual: float


def _band(params, boundary_tol):
    return 1e-6 * derived_scales(params).l if boundary_tol is None else boundary_tol


def _make(p, kind, q, params, degenerate=False):
    return SaddlePoint(
        p=complex(p),
        kind=kind,
        contributing=False,
        phi=complex(phi_tau(p, q, params)),
        phi2=complex(phi_tau_second(p, q, params)),
        degenerate=degenerate,
    )


def find_saddles(q, params, boundary_tol=None):
    """Stationary points of ``phi_tau`` at real position `q`.

    Returns three saddles, or two when a pair has merged (at the turning point
    q = 0 and at the border q = l_gamma); the merged entry has
    ``degenerate=True``. Simple roots are Newton-polished on the factorised
    derivative. Contributing flags are all False here; see
    :func:`contributing_set`.
    """
    sc = derived_scales(params)
    tol = _band(params, boundary_tol)
    tg = params.tau * params.g
    p_I = sc.p_I
    dphi = lambda p: phi_tau_prime(p, q, params)
    d2phi = lambda p: phi_tau_second(p, q, params)
    scale = max(1.0, abs(q) / tg) ** 0.5

    def polish(p):
        return polish_root(dphi, d2phi, p, scale=scale)

    if abs(q) <= tol:
        return [
            _make(0.0, SaddleKind.OUTGOING_REAL, q, params, degenerate=True),
            _make(p_I, SaddleKind.ARTIFACT, q, params),
        ]
    if q < 0:
        r = math.sqrt(-q / tg)
        return [
            _make(polish(r), SaddleKind.OUTGOING_REAL, q, params),
            _make(polish(-r), SaddleKind.INCOMING_REAL, q, params),
            _make(polish(p_I), SaddleKind.ARTIFACT, q, params),
        ]
    r = math.sqrt(q / tg)
    anti = _make(polish(-1j * r), SaddleKind.ANTI_TUNNELING, q, params)
    if abs(q - sc.l_gamma) <= tol:
        return [anti, _make(p_I, SaddleKind.ARTIFACT, q, params, degenerate=True)]
    return [
        _make(polish(1j * r), SaddleKind.TUNNELING, q, params),
        anti,
        _make(polish(p_I), SaddleKind.ARTIFACT, q, params),
    ]


_CONTRIBUTORS = {
    RegionClass.ALLOWED: {SaddleKind.OUTGOING_REAL, SaddleKind.INCOMING_REAL},
    RegionClass.SHALLOW: {SaddleKind.TUNNELING},
    RegionClass.DEEP: {SaddleKind.ARTIFACT},
}


def contributing_set(q, params, boundary_tol=None):
    """Saddles at `q` with the contributing flags of the region's Stokes diagram.

    Raises
    ------
    CausticError
        Inside either caustic band.
    """
    region = classify_region(q, derived_scales(params), _band(params, boundary_tol))
    if region not in _CONTRIBUTORS:
        raise CausticError(f"q={q!r} lies in the {region.value} band")
    keep = _CONTRIBUTORS[region]
    return [
        SaddlePoint(s.p, s.kind, s.kind in keep, s.phi, s.phi2, s.degenerate)
        for s in find_saddles(q, params, boundary_tol)
    ]


def saddle_contribution(s, q, params):
    """Gaussian stationary-phase contribution of a simple saddle.

    ``C(p_s) exp(-phi(p_s)) sqrt(2 pi / phi'') / (2 pi hbar)``, the square root
    taken along the steepest-descent direction oriented like the real axis.
    """
    if s.kind is SaddleKind.ARTIFACT:
        raise ValueError("the branch point is not a simple saddle; use hksc_deep")
    if s.degenerate or abs(s.phi2) < 1e-12 * max(1.0, abs(s.phi)):
        raise CausticError(f"degenerate saddle at p={s.p!r}")
    theta = -0.5 * np.angle(s.phi2)
    root = np.exp(1j * theta) * math.sqrt(2.0 * math.pi / abs(s.phi2))
    C = hk_prefactor_analytic(s.p, params)
    return complex(C * np.exp(-s.phi) * root / (2.0 * math.pi * params.hbar))


def hksc_deep(q, params, boundary_tol=None):
    """Branch-point (artifact trajectory) evaluation of the HK kernel for q > l_gamma.

    ``Gamma(3/4) / (2 pi l (gamma l^2)^(1/4)) (l/(q - l_gamma))^(3/4)
    exp(-gamma (q + l_gamma)^2 / 2 + (2/3) gamma l_gamma^2)``

    Raises
    ------
    CausticError
        For q at or below l_gamma (plus the boundary band).
    """
    sc = derived_scales(params)
    tol = _band(params, boundary_tol)
    q = np.asarray(q, dtype=float)
    if np.any(q <= sc.l_gamma + tol):
        raise CausticError("the branch-point formula only holds for q > l_gamma")
    l, lg, gam = sc.l, sc.l_gamma, params.gamma
    pref = gamma_three_quarters() / (2.0 * math.pi * l * (gam * l * l) ** 0.25)
    val = pref * (l / (q - lg)) ** 0.75 * np.exp(-0.5 * gam * (q + lg) ** 2 + 2.0 / 3.0 * gam * lg**2)
    return float(val) if val.ndim == 0 else val


def hk_semiclassical(q, params, boundary_tol=None):
    """Leading asymptotic HK kernel, dispatched on the region of `q`."""
    if np.ndim(q):
        return np.array([hk_semiclassical(float(v), params, boundary_tol) for v in np.ravel(q)]).reshape(np.shape(q))
    region = classify_region(q, derived_scales(params), _band(params, boundary_tol))
    if region is RegionClass.DEEP:
        return hksc_deep(q, params, boundary_tol)
    total = sum(
        (saddle_contribution(s, q, params) for s in contributing_set(q, params, boundary_tol) if s.contributing),
        0j,
    )
    return float(total.real)


def find_border(params):
    """Position where the tunnelling saddle collides with the branch point.

    Root of ``sqrt(q/(tau g)) - Im p_I`` by Brent's method on a doubling bracket.
    """
    tg = params.tau * params.g
    target = derived_scales(params).p_I.imag
    f = lambda q: math.sqrt(q / tg) - target
    hi = tg * target**2
    while f(hi) <= 0:
        hi *= 2.0
    q_b = brentq(f, 0.0, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    residual = abs(1j * math.sqrt(q_b / tg) - derived_scales(params).p_I)
    return BorderResult(q_border=q_b, collision_residual=residual)


@dataclass(frozen=True)
class ScalingRow:
    hbar: float
    gamma: float
    q: float
    hk: float
    exact: float
    deviation: float
    log_ratio: float


def local_deviation(q, params, spec=None, n=41):
    """max |K_HK - K| / max |K| over one local oscillation wavelength centred at q < 0."""
    tg = params.tau * params.g
    lam = 2.0 * math.pi * params.hbar / math.sqrt(abs(q) / tg)
    qs = np.linspace(q - 0.5 * lam, q + 0.5 * lam, n)
    qs = qs[qs < 0]
    hk = np.array([hk_kernel_reduced(v, params, spec).real for v in qs])
    ex = exact_kernel(qs, params)
    return float(np.max(np.abs(hk - ex)) / np.max(np.abs(ex)))


def hbar_scaling_study(target, region, hbar_list, base=None, protocol="fixed_width", spec=None):
    """Deviation of the HK kernel from the exact one along a ladder of hbar values.

    Parameters
    ----------
    target : float
        ``q/l`` for the allowed region, ``q/l_gamma`` otherwise, both measured
        with the `base` parameters.
    region : RegionClass or str
        ALLOWED, SHALLOW or DEEP.
    hbar_list : sequence of float
    base : ModelParams
        Reference parameters (default g = tau = hbar = 1, gamma = 1/2).
    protocol : {"fixed_width", "classical"}
        ``fixed_width`` keeps g, tau, ``gamma l^2`` and ``q/l`` (or
        ``q/l_gamma``) fixed. ``l K_HK`` depends on q/l and gamma l^2 only, so
        in this protocol every row has the same deviation. ``classical`` keeps
        g, tau, q and ``hbar*gamma`` fixed, so that l_gamma and p_I stay put
        while l shrinks; this is the ladder along which the deviations
        actually move.

    Returns
    -------
    list of ScalingRow
        ``deviation`` is the windowed relative deviation (:func:`local_deviation`)
        in the allowed region and the pointwise ``|K_HK - K|/|K|`` elsewhere;
        ``log_ratio`` is ``|ln(K_HK/K)|``.
    """
    region = RegionClass(region) if isinstance(region, str) else region
    base = base or ModelParams()
    if region not in (RegionClass.ALLOWED, RegionClass.SHALLOW, RegionClass.DEEP):
        raise ValueError("region must be allowed, shallow or deep")
    sc0 = derived_scales(base)
    rows = []
    for hb in hbar_list:
        if protocol == "classical":
            params = base.replace(hbar=hb, gamma=base.gamma * base.hbar / hb)
            q = target * (sc0.l if region is RegionClass.ALLOWED else sc0.l_gamma)
        elif protocol == "fixed_width":
            l = (hb**2 * base.g * base.tau) ** (1.0 / 3.0)
            params = base.replace(hbar=hb, gamma=base.gamma * sc0.l**2 / l**2)
            sc = derived_scales(params)
            q = target * (sc.l if region is RegionClass.ALLOWED else sc.l_gamma)
        else:
            raise ValueError(f"unknown protocol {protocol!r}")
        hk = hk_kernel_reduced(q, params, spec).real
        ex = exact_kernel(q, params)
        if region is RegionClass.ALLOWED:
            dev = local_deviation(q, params, spec)
        else:
            dev = abs(hk - ex) / abs(ex)
        rows.append(
            ScalingRow(
                hbar=float(hb),
                gamma=params.gamma,
                q=float(q),
                hk=float(hk),
                exact=float(ex),
                deviation=float(dev),
                log_ratio=float(abs(math.log(abs(hk / ex)))),
            )
        )
    return rows
