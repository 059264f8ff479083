"""Herman-Kluk kernel for one-degree-of-freedom Hamiltonians.

Trajectories, monodromy matrices and actions are integrated together with a
fixed-step RK4 scheme, vectorised over batches of initial conditions. The HK
prefactor is the square root of

    (M11 + M22 - 2i hbar gamma M12 - M21/(2i hbar gamma)) / 2

with its argument followed continuously in time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .errors import BranchCutError, DivergenceError
from .numerics import QuadratureSpec, integrate_2d

__all__ = [
    "Hamiltonian1D",
    "TrajectoryResult",
    "HKPrefactorState",
    "folding_hamiltonian",
    "harmonic_hamiltonian",
    "evolve",
    "evolve_path",
    "hk_radicand",
    "hk_prefactor_track",
    "coherent_state",
    "hk_window",
    "hk_kernel_full",
    "FULL_SPEC",
]

#: Cubature settings for hk_kernel_full.
FULL_SPEC = QuadratureSpec(abs_tol=1e-12, rel_tol=1e-9, max_evals=20_000_000)


@dataclass(frozen=True)
class Hamiltonian1D:
    """H(q, p) together with its first and second partial derivatives.

    All callables take and return numpy arrays (broadcasting).
    """

    H: Callable
    dH_dq: Callable
    dH_dp: Callable
    d2H_dqq: Callable
    d2H_dqp: Callable
    d2H_dpp: Callable
    name: str = "hamiltonian"
    #: optional fused evaluation returning (H, H_q, H_p, H_qq, H_qp, H_pp)
    partials: Callable | None = None

    def all_partials(self, q, p):
        if self.partials is not None:
            return self.partials(q, p)
        return (
            self.H(q, p),
            self.dH_dq(q, p),
            self.dH_dp(q, p),
            self.d2H_dqq(q, p),
            self.d2H_dqp(q, p),
            self.d2H_dpp(q, p),
        )

    def check_partials(self, q, p, h=1e-4, rtol=1e-5):
        """Compare the supplied partials with central differences at (q, p)."""
        pairs = [
            (self.dH_dq(q, p), (self.H(q + h, p) - self.H(q - h, p)) / (2 * h)),
            (self.dH_dp(q, p), (self.H(q, p + h) - self.H(q, p - h)) / (2 * h)),
            (self.d2H_dqq(q, p), (self.dH_dq(q + h, p) - self.dH_dq(q - h, p)) / (2 * h)),
            (self.d2H_dqp(q, p), (self.dH_dq(q, p + h) - self.dH_dq(q, p - h)) / (2 * h)),
            (self.d2H_dpp(q, p), (self.dH_dp(q, p + h) - self.dH_dp(q, p - h)) / (2 * h)),
        ]
        return all(
            np.allclose(a, b, rtol=rtol, atol=rtol * max(1.0, float(np.max(np.abs(b)))))
            for a, b in pairs
        )


def folding_hamiltonian(g=1.0):
    """H = -g p^3 / 3."""
    zero = lambda q, p: np.zeros(np.broadcast(q, p).shape)
    return Hamiltonian1D(
        H=lambda q, p: -g * p**3 / 3.0 + 0.0 * q,
        dH_dq=zero,
        dH_dp=lambda q, p: -g * p**2 + 0.0 * q,
        d2H_dqq=zero,
        d2H_dqp=zero,
        d2H_dpp=lambda q, p: -2.0 * g * p + 0.0 * q,
        name="folding",
    )


def harmonic_hamiltonian(omega=1.0, mass=1.0):
    """H = p^2/(2m) + m omega^2 q^2 / 2."""
    k = mass * omega**2
    return Hamiltonian1D(
        H=lambda q, p: p**2 / (2 * mass) + 0.5 * k * q**2,
        dH_dq=lambda q, p: k * q + 0.0 * p,
        dH_dp=lambda q, p: p / mass + 0.0 * q,
        d2H_dqq=lambda q, p: k + 0.0 * (q + p),
        d2H_dqp=lambda q, p: 0.0 * (q + p),
        d2H_dpp=lambda q, p: 1.0 / mass + 0.0 * (q + p),
        name="harmonic",
    )


@dataclass(frozen=True)
class TrajectoryResult:
    """End point, action and monodromy of a (batch of) trajectories.

    ``M[..., i, j]`` holds ``d(q_t, p_t)_i / d(q_0, p_0)_j``.
    """

    q_t: np.ndarray
    p_t: np.ndarray
    S_t: np.ndarray
    M: np.ndarray

    @property
    def det_M(self):
        return self.M[..., 0, 0] * self.M[..., 1, 1] - self.M[..., 0, 1] * self.M[..., 1, 0]


@dataclass(frozen=True)
class HKPrefactorState:
    value: np.ndarray
    accumulated_phase: np.ndarray


def _rhs(ham, y):
    q, p, m11, m12, m21, m22, _ = y
    h, hq, hp, hqq, hqp, hpp = ham.all_partials(q, p)
    out = np.empty_like(y)
    out[0] = hp
    out[1] = -hq
    out[2] = hqp * m11 + hpp * m21
    out[3] = hqp * m12 + hpp * m22
    out[4] = -hqq * m11 - hqp * m21
    out[5] = -hqq * m12 - hqp * m22
    out[6] = p * hp - h
    return out


def _initial_state(q0, p0):
    q0, p0 = np.broadcast_arrays(np.asarray(q0, dtype=float), np.asarray(p0, dtype=float))
    one = np.ones_like(q0)
    zero = np.zeros_like(q0)
    return np.stack([q0, p0, one, zero, zero, one, zero])


def _n_steps(t, dt):
    if not t > 0:
        raise ValueError(f"evolution time must be positive, got {t!r}")
    if not 0 < dt <= t:
        raise ValueError(f"time step must satisfy 0 < dt <= t, got dt={dt!r}, t={t!r}")
    n = math.ceil(t / dt - 1e-9)
    return n, t / n


_CHECK_EVERY = 64


def _rk4_step(ham, y, h):
    k1 = _rhs(ham, y)
    k2 = _rhs(ham, y + 0.5 * h * k1)
    k3 = _rhs(ham, y + 0.5 * h * k2)
    k4 = _rhs(ham, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _check(y, time):
    if not np.all(np.isfinite(y)):
        bad = np.argwhere(~np.all(np.isfinite(y), axis=0).ravel())
        idx = int(bad[0, 0]) if bad.size else None
        raise DivergenceError(f"trajectory left the finite range at t={time:.6g}", time=time, index=idx)


def _to_result(y):
    M = np.stack([np.stack([y[2], y[3]], axis=-1), np.stack([y[4], y[5]], axis=-1)], axis=-2)
    return TrajectoryResult(q_t=y[0], p_t=y[1], S_t=y[6], M=M)


def evolve_path(ham, x0, t, dt):
    """Integrate and keep every time node.

    Returns
    -------
    times : ndarray, shape (n+1,)
    states : ndarray, shape (n+1, 7, ...)
        Rows are q, p, M11, M12, M21, M22, S.
    """
    n, h = _n_steps(t, dt)
    y = _initial_state(*x0)
    out = np.empty((n + 1,) + y.shape)
    out[0] = y
    # overflow is reported through DivergenceError instead of warnings
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(n):
            y = _rk4_step(ham, y, h)
            _check(y, (k + 1) * h)
            out[k + 1] = y
    return h * np.arange(n + 1), out


def evolve(ham, x0, t, dt):
    """Fixed-step RK4 integration of Hamilton's equations, monodromy and action.

    Parameters
    ----------
    ham : Hamiltonian1D
    x0 : (q0, p0)
        Initial condition; scalars or broadcastable arrays.
    t : float
        Final time, > 0.
    dt : float
        Step size; rounded down so that an integer number of steps reaches `t`.

    Returns
    -------
    TrajectoryResult

    Raises
    ------
    DivergenceError
        If the state becomes non-finite.
    """
    n, h = _n_steps(t, dt)
    y = _initial_state(*x0)
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(n):
            y = _rk4_step(ham, y, h)
            if k % _CHECK_EVERY == 0 or k == n - 1:
                _check(y, (k + 1) * h)
    return _to_result(y)


def hk_radicand(M, gamma, hbar):
    """``(M11 + M22 - 2i hbar gamma M12 - M21/(2i hbar gamma)) / 2``."""
    c = 2j * hbar * gamma
    return 0.5 * (M[..., 0, 0] + M[..., 1, 1] - c * M[..., 0, 1] - M[..., 1, 0] / c)


def _track_sqrt(radicands, axis=0):
    mod = np.abs(radicands)
    if np.any(mod < 1e-12):
        raise BranchCutError("HK radicand passes through zero; prefactor branch is undefined")
    arg = np.unwrap(np.angle(radicands), axis=axis)
    return np.sqrt(mod) * np.exp(0.5j * arg), arg


def hk_prefactor_track(ham, x0, t, dt, gamma, hbar):
    """HK prefactor at time `t` with its argument tracked continuously from 1 at t=0.

    Raises
    ------
    BranchCutError
        If the radicand comes within 1e-12 of zero on the time grid.
    """
    if t == 0:
        shape = np.broadcast(*x0).shape
        return HKPrefactorState(value=np.ones(shape, dtype=complex), accumulated_phase=np.zeros(shape))
    _, states = evolve_path(ham, x0, t, dt)
    M = np.stack(
        [np.stack([states[:, 2], states[:, 3]], axis=-1), np.stack([states[:, 4], states[:, 5]], axis=-1)],
        axis=-2,
    )
    value, arg = _track_sqrt(hk_radicand(M, gamma, hbar), axis=0)
    return HKPrefactorState(value=value[-1], accumulated_phase=arg[-1])


def coherent_state(q, q0, p0, gamma, hbar):
    """<q|phi^gamma(q0, p0)> = (2 gamma/pi)^(1/4) exp(-gamma (q-q0)^2 + i p0 (q-q0)/hbar)."""
    d = q - q0
    return (2.0 * gamma / math.pi) ** 0.25 * np.exp(-gamma * d**2 + 1j * p0 * d / hbar)


def _hk_integrand(ham, q_final, q_initial, t, gamma, hbar, dt):
    def f(q0, p0):
        _, states = evolve_path(ham, (q0, p0), t, dt)
        y = states[-1]
        M = np.stack([np.stack([states[:, 2], states[:, 3]], axis=-1), np.stack([states[:, 4], states[:, 5]], axis=-1)], axis=-2)
        C, _ = _track_sqrt(hk_radicand(M, gamma, hbar), axis=0)
        C = C[-1]
        bra = coherent_state(q_final, y[0], y[1], gamma, hbar)
        ket = np.conj(coherent_state(q_initial, q0, p0, gamma, hbar))
        return bra * C * np.exp(1j * y[6] / hbar) * ket / (2.0 * math.pi * hbar)

    return f


def hk_window(ham, q_final, q_initial, t, gamma, hbar, dt, spec=None, p_scan=(-20.0, 20.0), n_scan=801):
    """Integration rectangle for :func:`hk_kernel_full` and a suggested initial cell count.

    The q0 range is fixed by the initial Gaussian; the p0 range by a coarse scan
    for where the final-Gaussian factor exceeds the tail cutoff.

    Returns
    -------
    window : (q0_min, q0_max, p0_min, p0_max)
    cells : (int, int)
    """
    spec = spec or FULL_SPEC
    L = spec.tail_log
    hw = math.sqrt(L / gamma)
    q0s = q_initial + np.linspace(-hw, hw, 25)
    p0s = np.linspace(p_scan[0], p_scan[1], n_scan)
    Q0, P0 = np.meshgrid(q0s, p0s, indexing="ij")
    res = evolve(ham, (Q0, P0), t, dt)
    keep = gamma * (q_final - res.q_t) ** 2 < L
    cols = np.any(keep, axis=0)
    if not np.any(cols):
        raise ValueError("final Gaussian never overlaps the evolved manifold inside the scan range")
    idx = np.flatnonzero(cols)
    dp = p0s[1] - p0s[0]
    lo = max(p0s[0], p0s[idx[0]] - 2 * dp)
    hi = min(p0s[-1], p0s[idx[-1]] + 2 * dp)
    if idx[0] == 0 or idx[-1] == n_scan - 1:
        raise ValueError("p0 scan range too narrow for the final Gaussian support")
    # phase advance along p0 at the centre slice sets the initial cell count
    f = _hk_integrand(ham, q_final, q_initial, t, gamma, hbar, dt)
    ps = np.linspace(lo, hi, 2001)
    vals = f(np.full_like(ps, q_initial), ps)
    phase = np.unwrap(np.angle(vals))
    advance = float(np.max(phase) - np.min(phase))
    n_p = max(8, math.ceil(advance / (math.pi / 4.0) / 10.0))
    return (q_initial - hw, q_initial + hw, lo, hi), (8, n_p)


def hk_kernel_full(ham, q_final, q_initial, t, gamma, hbar, window=None, spec=None, dt=None, cells=None):
    """Herman-Kluk kernel <q_final| exp(-iHt/hbar) |q_initial> as a phase-space integral.

    Parameters
    ----------
    ham : Hamiltonian1D
    q_final, q_initial : float
    t : float
    gamma, hbar : float
    window : tuple, optional
        ``(q0_min, q0_max, p0_min, p0_max)``; chosen by :func:`hk_window` if omitted.
    spec : QuadratureSpec, optional
    dt : float, optional
        RK4 step (default ``t/100``).

    Returns
    -------
    complex
    """
    spec = spec or FULL_SPEC
    dt = t / 100.0 if dt is None else dt
    if window is None:
        window, auto_cells = hk_window(ham, q_final, q_initial, t, gamma, hbar, dt, spec)
        cells = cells or auto_cells
    cells = cells or (8, 8)
    f = _hk_integrand(ham, q_final, q_initial, t, gamma, hbar, dt)
    qa, qb, pa, pb = window
    Q, P = np.meshgrid(np.linspace(qa, qb, 33), np.linspace(pa, pb, 129), indexing="ij")
    peak = float(np.max(np.abs(f(Q, P))))
    spec = replace(spec, abs_tol=spec.abs_tol * min(1.0, max(peak, 1e-300)))
    return integrate_2d(f, window, spec, cells=cells)
