"""Evolution of line manifolds in phase space and detection of their caustics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hk import Hamiltonian1D, TrajectoryResult, evolve

__all__ = [
    "MorseParams",
    "morse_hamiltonian",
    "Manifold",
    "EvolvedManifold",
    "CausticScan",
    "build_line_manifold",
    "evolve_manifold",
    "detect_caustics",
    "count_extrema",
]


@dataclass(frozen=True)
class MorseParams:
    """V(q) = D{(1 - exp(-lam q))^2 - 1} + (1 - epsilon) q^2 / 2.

    `D` defaults to ``epsilon / (2 lam^2)``, which makes the curvature at the
    minimum equal to one.
    """

    epsilon: float = 0.975
    lam: float = 1.0 / math.sqrt(12.0)
    D: float | None = None

    def __post_init__(self):
        if self.D is None:
            object.__setattr__(self, "D", self.epsilon / (2.0 * self.lam**2))


def morse_hamiltonian(params=None):
    """H = p^2/2 + V(q) for the softened Morse oscillator."""
    m = params or MorseParams()
    D, lam, k = m.D, m.lam, 1.0 - m.epsilon

    def V(q):
        e = np.exp(-lam * q)
        return D * ((1.0 - e) ** 2 - 1.0) + 0.5 * k * q**2

    def dV(q):
        e = np.exp(-lam * q)
        return 2.0 * D * lam * e * (1.0 - e) + k * q

    def d2V(q):
        e = np.exp(-lam * q)
        return 2.0 * D * lam**2 * (2.0 * e * e - e) + k

    def partials(q, p):
        e = np.exp(-lam * q)
        one_e = 1.0 - e
        return (
            0.5 * p**2 + D * (one_e**2 - 1.0) + 0.5 * k * q**2,
            2.0 * D * lam * e * one_e + k * q,
            p,
            2.0 * D * lam**2 * (2.0 * e * e - e) + k,
            0.0,
            1.0,
        )

    return Hamiltonian1D(
        H=lambda q, p: 0.5 * p**2 + V(q),
        dH_dq=lambda q, p: dV(q) + 0.0 * p,
        dH_dp=lambda q, p: p + 0.0 * q,
        d2H_dqq=lambda q, p: d2V(q) + 0.0 * p,
        d2H_dqp=lambda q, p: 0.0 * (q + p),
        d2H_dpp=lambda q, p: 1.0 + 0.0 * (q + p),
        name="morse",
        partials=partials,
    )


@dataclass(frozen=True)
class Manifold:
    """Ordered phase-space points with a strictly increasing parameter."""

    q: np.ndarray
    p: np.ndarray
    parameter: np.ndarray

    def __post_init__(self):
        if self.parameter.size < 2:
            raise ValueError("a manifold needs at least two points")
        if np.any(np.diff(self.parameter) <= 0):
            raise ValueError("manifold parameter must be strictly increasing")

    def __len__(self):
        return self.parameter.size


@dataclass(frozen=True)
class EvolvedManifold:
    """A manifold transported by the flow, with what is needed to refine along it."""

    initial: Manifold
    final: Manifold
    trajectories: TrajectoryResult
    ham: Hamiltonian1D
    t: float
    dt: float


@dataclass(frozen=True)
class CausticScan:
    positions: list
    parameters: list
    unresolved: list


def build_line_manifold(q, p_min, p_max, n):
    """n points on the vertical line ``{q} x [p_min, p_max]``, parameterised by p."""
    if not p_min < p_max:
        raise ValueError("need p_min < p_max")
    if n < 2:
        raise ValueError("need at least two points")
    p = np.linspace(p_min, p_max, n)
    return Manifold(q=np.full(n, float(q)), p=p, parameter=p.copy())


def evolve_manifold(ham, m, t, dt):
    """Transport every point of `m` for time `t`; ``t == 0`` returns the input."""
    if t == 0:
        n = len(m)
        ident = np.broadcast_to(np.eye(2), (n, 2, 2)).copy()
        traj = TrajectoryResult(q_t=m.q.copy(), p_t=m.p.copy(), S_t=np.zeros(n), M=ident)
        return EvolvedManifold(m, m, traj, ham, 0.0, dt)
    traj = evolve(ham, (m.q, m.p), t, dt)
    final = Manifold(q=traj.q_t, p=traj.p_t, parameter=m.parameter.copy())
    return EvolvedManifold(m, final, traj, ham, float(t), float(dt))


def _m12(ev, params):
    # parameter -> initial point by linear interpolation along the initial line
    q0 = np.interp(params, ev.initial.parameter, ev.initial.q)
    p0 = np.interp(params, ev.initial.parameter, ev.initial.p)
    return evolve(ev.ham, (q0, p0), ev.t, ev.dt)


def detect_caustics(ev, zero_tol=1e-12, rounds=8, probes=16, param_tol=1e-10, full_output=False):
    """Positions where dq_t/dp_0 changes sign along an evolved manifold.

    Brackets from the stored monodromies are narrowed by vectorised
    multisection (re-integrating `probes` points per bracket per round).
    Intervals where ``|M12|`` stays below `zero_tol`, and sign changes at an
    end point, are reported as unresolved rather than as caustics.

    Returns
    -------
    list of float
        Final positions q_t of the caustics, or a :class:`CausticScan` if
        `full_output` is set.
    """
    m12 = ev.trajectories.M[..., 0, 1]
    s = ev.initial.parameter
    small = np.abs(m12) <= zero_tol
    unresolved = []
    if small[0] or small[-1]:
        unresolved.append((float(s[0]), float(s[-1])) if np.all(small) else (float(s[0] if small[0] else s[-1]),) * 2)
    if np.all(small):
        return CausticScan([], [], unresolved) if full_output else []
    sign = np.sign(np.where(small, 0.0, m12))
    brackets = []
    k = 0
    n = len(s)
    while k < n - 1:
        if sign[k] == 0:
            k += 1
            continue
        j = k + 1
        while j < n and sign[j] == 0:
            j += 1
        if j < n and sign[j] != sign[k]:
            brackets.append((s[k], s[j], sign[k]))
        elif j == n and j - 1 > k:
            unresolved.append((float(s[k]), float(s[-1])))
        k = j
    if not brackets:
        return CausticScan([], [], unresolved) if full_output else []
    lo = np.array([b[0] for b in brackets])
    hi = np.array([b[1] for b in brackets])
    s_lo = np.array([b[2] for b in brackets])
    frac = np.linspace(0.0, 1.0, probes + 2)[1:-1]
    for _ in range(rounds):
        grid = lo[:, None] + (hi - lo)[:, None] * frac[None, :]
        vals = _m12(ev, grid).M[..., 0, 1]
        same = np.sign(vals) == s_lo[:, None]
        # last probe still on the low side
        last = np.sum(np.cumprod(same, axis=1), axis=1)
        pts = np.concatenate([lo[:, None], grid, hi[:, None]], axis=1)
        rows = np.arange(len(lo))
        lo, hi = pts[rows, last], pts[rows, last + 1]
        if np.all(hi - lo <= param_tol * np.maximum(1.0, np.abs(lo))):
            break
    mid = 0.5 * (lo + hi)
    res = _m12(ev, mid)
    positions = [float(v) for v in np.atleast_1d(res.q_t)]
    if full_output:
        return CausticScan(positions, [float(v) for v in mid], unresolved)
    return positions


def count_extrema(ev):
    """Number of interior local extrema of q_t along the parameter (finite differences)."""
    d = np.diff(ev.final.q)
    d = d[d != 0]
    return int(np.sum(np.sign(d[1:]) != np.sign(d[:-1])))
