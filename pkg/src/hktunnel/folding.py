"""The folding Hamiltonian H = -g p**3 / 3.

Exact propagator, its stationary-phase approximation, the analytic classical
flow, and the Herman-Kluk kernel after the Gaussian integral over the initial
position has been done analytically.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .errors import BranchCutError, CausticError, QuadratureError
from .numerics import QuadratureSpec, airy_ai, integrate_1d

__all__ = [
    "ModelParams",
    "DerivedScales",
    "PhasePoint",
    "RegionClass",
    "derived_scales",
    "exact_kernel",
    "sc_kernel",
    "classical_map",
    "action",
    "phi_tau",
    "phi_tau_prime",
    "phi_tau_second",
    "hk_prefactor_analytic",
    "reduced_window",
    "hk_kernel_reduced",
    "classify_region",
    "default_boundary_tol",
    "KERNEL_SPEC",
]

#: Quadrature settings used for kernels unless the caller passes its own.
KERNEL_SPEC = QuadratureSpec(abs_tol=1e-14, rel_tol=1e-11, max_evals=4_000_000)


@dataclass(frozen=True)
class ModelParams:
    """Physical constants of the folding model.

    Parameters
    ----------
    g : float
        Folding strength, > 0.
    tau : float
        Evolution time, > 0.
    hbar : float
        Planck constant, > 0.
    gamma : float
        Coherent-state width parameter (inverse length squared), > 0.
    """

    g: float = 1.0
    tau: float = 1.0
    hbar: float = 1.0
    gamma: float = 0.5

    def __post_init__(self):
        for name in ("g", "tau", "hbar", "gamma"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"ModelParams.{name} must be positive and finite, got {v!r}")

    @property
    def scales(self):
        return derived_scales(self)

    def replace(self, **changes):
        return ModelParams(**{**self.__dict__, **changes})


@dataclass(frozen=True)
class DerivedScales:
    """Penetration length ``l``, shallow/deep border ``l_gamma`` and branch point ``p_I``."""

    l: float
    l_gamma: float
    p_I: complex


class PhasePoint(NamedTuple):
    q: float
    p: float


class RegionClass(enum.Enum):
    ALLOWED = "allowed"
    SHALLOW = "shallow"
    DEEP = "deep"
    CONVENTIONAL_CAUSTIC = "conventional_caustic"
    HK_CAUSTIC = "hk_caustic"


def derived_scales(params):
    """l = (hbar^2 g tau)^(1/3), l_gamma = 1/(4 gamma^2 l^3), p_I = i/(2 hbar gamma tau g)."""
    l = (params.hbar**2 * params.g * params.tau) ** (1.0 / 3.0)
    l_gamma = 1.0 / (4.0 * params.gamma**2 * l**3)
    p_I = 1j / (2.0 * params.hbar * params.gamma * params.tau * params.g)
    return DerivedScales(l=l, l_gamma=l_gamma, p_I=p_I)


def default_boundary_tol(params):
    return 1e-6 * derived_scales(params).l


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def exact_kernel(q, params):
    """<q| exp(-i H tau/hbar) |0> = Ai(q/l)/l."""
    l = derived_scales(params).l
    return _out(airy_ai(np.asarray(q, dtype=float) / l) / l)


def sc_kernel(q, params, boundary_tol=None):
    """Leading stationary-phase kernel.

    Two interfering real trajectories for ``q < 0``; one imaginary-momentum
    tunnelling trajectory for ``q > 0``.

    Raises
    ------
    CausticError
        If any ``|q|`` is within `boundary_tol` of the turning point.
    """
    tol = default_boundary_tol(params) if boundary_tol is None else boundary_tol
    q = np.asarray(q, dtype=float)
    if np.any(np.abs(q) <= tol):
        raise CausticError("sc_kernel diverges at the caustic q = 0")
    l = derived_scales(params).l
    x = np.abs(q) / l
    amp = 1.0 / (math.sqrt(math.pi) * l * x**0.25)
    allowed = amp * np.cos(2.0 / 3.0 * x**1.5 - math.pi / 4.0)
    tail = 0.5 * amp * np.exp(-2.0 / 3.0 * x**1.5)
    return _out(np.where(q < 0, allowed, tail))


def classical_map(x, t, params):
    """Exact flow: (q, p) -> (q - g p^2 t, p)."""
    q, p = x
    return PhasePoint(q - params.g * p**2 * t, p)


def action(p0, t, params):
    """Action S_t = -(2/3) g p0^3 t along the trajectory with momentum p0."""
    p0 = np.asarray(p0, dtype=float)
    # p*p*p keeps the result exactly odd in p0
    return -2.0 / 3.0 * params.g * (p0 * p0 * p0) * t


def phi_tau(p, q, params):
    """Exponent of the reduced HK integrand (complex p allowed)."""
    g, tau, hbar, gamma = params.g, params.tau, params.hbar, params.gamma
    a = q + tau * g * p**2
    return 0.5 * gamma * a**2 - 1j * p * q / hbar - 1j * tau * g * p**3 / (3.0 * hbar)


def phi_tau_prime(p, q, params):
    """Factorised derivative (q + tau g p^2)(2 gamma tau g p - i/hbar)."""
    g, tau, hbar, gamma = params.g, params.tau, params.hbar, params.gamma
    return (q + tau * g * p**2) * (2.0 * gamma * tau * g * p - 1j / hbar)


def phi_tau_second(p, q, params):
    g, tau, hbar, gamma = params.g, params.tau, params.hbar, params.gamma
    return 2.0 * tau * g * p * (2.0 * gamma * tau * g * p - 1j / hbar) + (
        q + tau * g * p**2
    ) * (2.0 * gamma * tau * g)


def hk_prefactor_analytic(p, params):
    """Principal square root of ``1 - p/p_I``.

    The cut is the ray of the imaginary axis above ``p_I``; it never meets the
    real line.

    Raises
    ------
    BranchCutError
        If `p` lies on the cut.
    """
    p_I = derived_scales(params).p_I
    w = 1.0 - np.asarray(p, dtype=complex) / p_I
    on_cut = (w.real < 0) & (np.abs(w.imag) <= 1e-14 * np.abs(w))
    if np.any(on_cut):
        raise BranchCutError("HK prefactor evaluated on its branch cut")
    return complex(np.sqrt(w)) if np.ndim(w) == 0 else np.sqrt(w)


def reduced_window(q, params, spec=None):
    """Half-width ``p_max`` outside which the reduced integrand is below the tail cutoff.

    Solves ``gamma*(q + tau g p^2)^2/2 - gamma*max(q,0)^2/2 = ln(1/eps) + 5``
    for ``p`` and adds 10%.
    """
    spec = spec or KERNEL_SPEC
    L = spec.tail_log + 5.0
    qp = max(q, 0.0)
    a_min = math.sqrt(2.0 * L / params.gamma + qp**2)
    return 1.1 * math.sqrt((a_min - q) / (params.tau * params.g))


def hk_kernel_reduced(q, params, spec=None):
    """HK kernel as a single momentum integral of ``C(p) exp(-phi_tau(p))``.

    The initial panel count is chosen so that the phase
    ``(p q + tau g p^3/3)/hbar`` advances less than pi/4 between nodes.

    Returns
    -------
    complex
        Real up to quadrature error.

    Raises
    ------
    QuadratureError
        If the value is below ``100 eps`` times the integrand mass, where
        double-precision cancellation leaves no significant digits, or if
        the integrand underflows altogether.
    """
    spec = spec or KERNEL_SPEC
    q = float(q)
    p_max = reduced_window(q, params, spec)
    g, tau, hbar = params.g, params.tau, params.hbar

    def integrand(p):
        return hk_prefactor_analytic(p, params) * np.exp(-phi_tau(p, q, params))

    phase = 2.0 * abs(p_max * q + tau * g * p_max**3 / 3.0) / hbar
    panels = max(8, math.ceil(phase / (math.pi / 4.0) / 15.0))
    # deep-tail kernels are exponentially small: make abs_tol relative to the
    # integrand peak, exp(-gamma max(q,0)^2/2) times a modest prefactor bound
    peak = float(np.max(np.abs(integrand(np.linspace(-p_max, p_max, 257)))))
    spec = replace(spec, abs_tol=spec.abs_tol * min(1.0, max(peak, 1e-300)))
    val = integrate_1d(integrand, -p_max, p_max, spec, panels=panels)
    # deep in the tail the integral is a cancellation between oscillations of
    # size `peak`; below roundoff of that mass the value carries no digits
    floor = 100.0 * np.finfo(float).eps * peak * 2.0 * p_max
    # <= so that a fully underflowed integrand (floor = val = 0) is caught
    if abs(val) <= floor:
        raise QuadratureError(
            f"kernel at q={q!r} lies below the double-precision cancellation floor {floor:.2e}",
            estimate=val / (2.0 * math.pi * hbar),
        )
    return val / (2.0 * math.pi * hbar)


def classify_region(q, scales, boundary_tol=None):
    """Region of the real q line, with caustic bands of half-width `boundary_tol`."""
    tol = 1e-6 * scales.l if boundary_tol is None else boundary_tol
    if abs(q) <= tol:
        return RegionClass.CONVENTIONAL_CAUSTIC
    if abs(q - scales.l_gamma) <= tol:
        return RegionClass.HK_CAUSTIC
    if q < 0:
        return RegionClass.ALLOWED
    if q < scales.l_gamma:
        return RegionClass.SHALLOW
    return RegionClass.DEEP
