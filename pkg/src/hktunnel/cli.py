"""Command-line front end: CSV tables for kernels, saddles, borders, manifolds and hbar ladders.

Run as ``python -m hktunnel <command> ...``. Every table starts with a ``#``
line holding the resolved parameters, then a header row. Floats are printed
with 17 significant digits so that output is byte-reproducible.

Exit codes: 0 success, 2 argument error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .asymptotics import contributing_set, find_border, find_saddles, hbar_scaling_study, hk_semiclassical
from .errors import CausticError, DivergenceError, HKError
from .folding import (
    KERNEL_SPEC,
    ModelParams,
    RegionClass,
    classify_region,
    default_boundary_tol,
    derived_scales,
    exact_kernel,
    hk_kernel_reduced,
    sc_kernel,
)
from .hk import FULL_SPEC, folding_hamiltonian, hk_kernel_full
from .manifolds import (
    MorseParams,
    build_line_manifold,
    detect_caustics,
    evolve_manifold,
    morse_hamiltonian,
)

__all__ = ["main", "build_parser", "parse_range", "gamma_for_l_gamma"]

METHODS = ("exact", "sc", "hk", "hk2d", "hksc")
DEFAULT_L_GAMMAS = (0.5, 1.0, 2.0, 4.0)
MORSE_DT = 5e-3


class NumericalFailure(Exception):
    pass


def fmt(x):
    return "%.17g" % x


def parse_range(text):
    """``min:max:count`` (inclusive nodes), a comma list, or a single number."""
    text = str(text).strip()
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise ValueError
            lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
            if n < 1 or (n > 1 and not lo < hi) or not (math.isfinite(lo) and math.isfinite(hi)):
                raise ValueError
            return [lo] if n == 1 else [float(v) for v in np.linspace(lo, hi, n)]
        vals = [float(v) for v in text.split(",") if v.strip()]
        if not vals or not all(math.isfinite(v) for v in vals):
            raise ValueError
        return vals
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range {text!r}; expected min:max:count or a comma list") from None


def parse_list(text):
    return [v.strip() for v in str(text).split(",") if v.strip()]


def gamma_for_l_gamma(l_gamma, params):
    """Width parameter giving the requested border: gamma = (4 l_gamma l^3)^(-1/2)."""
    l = derived_scales(params).l
    return (4.0 * l_gamma * l**3) ** -0.5


def read_config(path):
    """key=value lines; ``#`` starts a comment. Keys use flag spelling without dashes."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{n}: expected key=value")
            k, v = line.split("=", 1)
            out[k.strip().replace("-", "_")] = v.strip()
    return out


def _workers():
    raw = os.environ.get("HK_THREADS")
    if raw is None:
        return min(4, os.cpu_count() or 1)
    try:
        n = int(raw)
    except ValueError:
        raise argparse.ArgumentTypeError(f"HK_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError("HK_THREADS must be a positive integer")
    return n


def pmap(fn, items):
    """Ordered map over a thread pool sized by HK_THREADS."""
    items = list(items)
    n = _workers()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


def _params(args):
    return ModelParams(g=args.g, tau=args.tau, hbar=args.hbar, gamma=args.gamma)


def _comment(out, params, **extra):
    sc = derived_scales(params)
    items = [
        ("g", params.g),
        ("tau", params.tau),
        ("hbar", params.hbar),
        ("gamma", params.gamma),
        ("l", sc.l),
        ("l_gamma", sc.l_gamma),
    ]
    items += list(extra.items())
    out.write("# " + " ".join(f"{k}={fmt(v) if isinstance(v, float) else v}" for k, v in items) + "\n")


def _write(out, header, rows):
    out.write(",".join(header) + "\n")
    for r in rows:
        out.write(",".join(fmt(v) if isinstance(v, (float, np.floating)) else str(v) for v in r) + "\n")


def _eval_method(method, q, params, boundary_tol):
    try:
        if method == "exact":
            v = complex(exact_kernel(q, params))
        elif method == "sc":
            v = complex(sc_kernel(q, params, boundary_tol))
        elif method == "hksc":
            v = complex(hk_semiclassical(q, params, boundary_tol))
        elif method == "hk":
            v = hk_kernel_reduced(q, params, KERNEL_SPEC)
        elif method == "hk2d":
            v = hk_kernel_full(folding_hamiltonian(params.g), q, 0.0, params.tau, params.gamma, params.hbar, spec=FULL_SPEC)
        else:
            raise ValueError(method)
    except CausticError:
        # asymptotic formulas are undefined on caustics: report nan, not a failure
        v = complex(math.nan, math.nan)
    except (HKError, ArithmeticError) as exc:
        raise NumericalFailure(f"method {method} failed at q={fmt(q)}: {exc}") from exc
    return v


def _kernel_rows(qs, methods, params, boundary_tol, prefix=()):
    jobs = [(q, m) for q in qs for m in methods]
    vals = pmap(lambda job: _eval_method(job[1], job[0], params, boundary_tol), jobs)
    rows = [(*prefix, float(q), m, v.real, v.imag, abs(v)) for (q, m), v in zip(jobs, vals)]
    rows.sort(key=lambda r: (r[len(prefix)], r[len(prefix) + 1]))
    return rows


def _methods(text):
    ms = parse_list(text)
    bad = [m for m in ms if m not in METHODS]
    if bad or not ms:
        raise argparse.ArgumentTypeError(f"unknown method(s) {bad}; choose from {','.join(METHODS)}")
    return ms


def cmd_kernel(args, out):
    params = _params(args)
    methods = _methods(args.methods)
    _comment(out, params, abs_tol=KERNEL_SPEC.abs_tol, rel_tol=KERNEL_SPEC.rel_tol, boundary_tol=args.boundary_tol)
    rows = _kernel_rows(parse_range(args.q), methods, params, args.boundary_tol)
    _write(out, ["q", "method", "re", "im", "abs"], rows)


def cmd_sweep_gamma(args, out):
    base = _params(args)
    methods = _methods(args.methods)
    if args.gammas:
        gammas = parse_range(args.gammas)
    else:
        targets = parse_range(args.l_gammas) if args.l_gammas else list(DEFAULT_L_GAMMAS)
        gammas = [gamma_for_l_gamma(t, base) for t in targets]
    if any(g <= 0 for g in gammas):
        raise argparse.ArgumentTypeError("gamma values must be positive")
    _comment(out, base, abs_tol=KERNEL_SPEC.abs_tol, rel_tol=KERNEL_SPEC.rel_tol, gammas=";".join(fmt(g) for g in gammas))
    rows = []
    qs = parse_range(args.q)
    for gam in gammas:
        p = base.replace(gamma=gam)
        lg = derived_scales(p).l_gamma
        rows += _kernel_rows(qs, methods, p, args.boundary_tol, prefix=(lg, gam))
    _write(out, ["l_gamma", "gamma", "q", "method", "re", "im", "abs"], rows)


def cmd_border(args, out):
    params = _params(args)
    try:
        res = find_border(params)
    except (HKError, ArithmeticError, ValueError) as exc:
        raise NumericalFailure(f"border search failed: {exc}") from exc
    _comment(out, params)
    _write(out, ["l_gamma_analytic", "q_border", "residual"], [(derived_scales(params).l_gamma, res.q_border, res.collision_residual)])


def cmd_saddles(args, out):
    params = _params(args)
    sc = derived_scales(params)
    _comment(out, params, boundary_tol=args.boundary_tol)
    rows = []
    for q in parse_range(args.q):
        try:
            region = classify_region(q, sc, args.boundary_tol)
            if region in (RegionClass.CONVENTIONAL_CAUSTIC, RegionClass.HK_CAUSTIC):
                saddles = find_saddles(q, params, args.boundary_tol)
            else:
                saddles = contributing_set(q, params, args.boundary_tol)
        except (HKError, ArithmeticError) as exc:
            raise NumericalFailure(f"saddle search failed at q={fmt(q)}: {exc}") from exc
        for s in saddles:
            status = "degenerate" if s.degenerate else region.value
            rows.append((float(q), s.kind.value, s.p.real, s.p.imag, str(s.contributing).lower(), status))
    _write(out, ["q", "kind", "re", "im", "contributing", "status"], rows)


def cmd_manifold(args, out):
    params = _params(args)
    if args.model == "folding":
        ham = folding_hamiltonian(params.g)
        q0 = 0.0 if args.q0 is None else args.q0
        pmin = -2.0 if args.p_min is None else args.p_min
        pmax = 2.0 if args.p_max is None else args.p_max
        t = params.tau if args.t is None else args.t
        dt = 1e-3 if args.dt is None else args.dt
    else:
        ham = morse_hamiltonian(MorseParams())
        q0 = 9.0 if args.q0 is None else args.q0
        pmin = -3.0 if args.p_min is None else args.p_min
        pmax = 3.0 if args.p_max is None else args.p_max
        t = 18.0 if args.t is None else args.t
        dt = MORSE_DT if args.dt is None else args.dt
    if t < 0 or dt <= 0:
        raise argparse.ArgumentTypeError("need t >= 0 and dt > 0")
    try:
        m = build_line_manifold(q0, pmin, pmax, args.n)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    try:
        ev = evolve_manifold(ham, m, t, dt)
        scan = detect_caustics(ev, full_output=True) if t > 0 else None
    except DivergenceError as exc:
        raise NumericalFailure(f"trajectory diverged at point index {exc.index} (t={exc.time}): {exc}") from exc
    except (HKError, ArithmeticError) as exc:
        raise NumericalFailure(f"manifold evolution failed: {exc}") from exc
    _comment(out, params, model=args.model, t=float(t), dt=float(dt), n=args.n, q0=float(q0))
    M = ev.trajectories.M
    rows = [
        ("point", s, q, p, M[i, 0, 0], M[i, 0, 1], M[i, 1, 0], M[i, 1, 1])
        for i, (s, q, p) in enumerate(zip(m.parameter, ev.final.q, ev.final.p))
    ]
    nan = math.nan
    if scan is not None:
        rows += [("caustic", s, q, nan, nan, nan, nan, nan) for s, q in zip(scan.parameters, scan.positions)]
    _write(out, ["kind", "parameter", "q", "p", "M11", "M12", "M21", "M22"], rows)


def cmd_scaling(args, out):
    base = _params(args)
    hbars = parse_range(args.hbars)
    if any(h <= 0 for h in hbars):
        raise argparse.ArgumentTypeError("hbar values must be positive")
    try:
        rows = hbar_scaling_study(args.target, args.region, hbars, base, protocol=args.protocol)
    except (HKError, ArithmeticError) as exc:
        raise NumericalFailure(f"scaling study failed: {exc}") from exc
    _comment(out, base, region=args.region, target=float(args.target), protocol=args.protocol)
    _write(
        out,
        ["hbar", "gamma", "q", "hk", "exact", "deviation", "log_ratio"],
        [(r.hbar, r.gamma, r.q, r.hk, r.exact, r.deviation, r.log_ratio) for r in rows],
    )


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file; explicit flags take precedence")
    common.add_argument("--g", type=float, default=1.0)
    common.add_argument("--tau", type=float, default=1.0)
    common.add_argument("--hbar", type=float, default=1.0)
    common.add_argument("--gamma", type=float, default=0.5)
    common.add_argument("--boundary-tol", type=float, default=None, help="caustic band half-width (default 1e-6 l)")

    parser = argparse.ArgumentParser(prog="hktunnel", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("kernel", parents=[common], help="kernel values on a q grid")
    p.add_argument("--q", default="-5:5:501", help="min:max:count, comma list or single value")
    p.add_argument("--methods", default="exact,hk,hksc", help="comma list of exact, sc, hk, hk2d, hksc")
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("sweep-gamma", parents=[common], help="exact and HK kernels for several widths")
    p.add_argument("--q", default="-5:5:201", help="min:max:count, comma list or single value")
    p.add_argument("--methods", default="exact,hk", help="comma list of exact, sc, hk, hk2d, hksc")
    p.add_argument("--gammas", default=None, help="explicit gamma list (overrides --l-gammas)")
    p.add_argument("--l-gammas", default=None, help="border targets, default 0.5,1,2,4")
    p.set_defaults(func=cmd_sweep_gamma)

    p = sub.add_parser("border", parents=[common], help="shallow/deep border")
    p.set_defaults(func=cmd_border)

    p = sub.add_parser("saddles", parents=[common], help="saddle inventory per q")
    p.add_argument("--q", required=True, help="min:max:count, comma list or single value")
    p.set_defaults(func=cmd_saddles)

    p = sub.add_parser("manifold", parents=[common], help="evolved line manifold and its caustics")
    p.add_argument("--model", choices=("folding", "morse"), default="folding")
    p.add_argument("--t", type=float, default=None, help="default tau (folding) or 18 (morse)")
    p.add_argument("--dt", type=float, default=None, help="RK4 step, default 1e-3 (folding) or 5e-3 (morse)")
    p.add_argument("--n", type=int, default=301)
    p.add_argument("--q0", type=float, default=None)
    p.add_argument("--p-min", type=float, default=None)
    p.add_argument("--p-max", type=float, default=None)
    p.set_defaults(func=cmd_manifold)

    p = sub.add_parser("scaling", parents=[common], help="deviation along an hbar ladder")
    p.add_argument("--region", choices=("allowed", "shallow", "deep"), required=True)
    p.add_argument("--target", type=float, required=True, help="q/l (allowed) or q/l_gamma")
    p.add_argument("--hbars", default="1,0.5,0.25,0.125", help="hbar ladder")
    p.add_argument("--protocol", choices=("fixed_width", "classical"), default="fixed_width")
    p.set_defaults(func=cmd_scaling)
    return parser


def _parse(parser, argv):
    args = parser.parse_args(argv)
    if args.config:
        try:
            cfg = read_config(args.config)
        except (OSError, ValueError) as exc:
            parser.error(f"cannot read config: {exc}")
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = set(cfg) - known
        if unknown:
            parser.error(f"unknown config keys: {', '.join(sorted(unknown))}")
        # config values become defaults, so explicit flags still win
        typed = {}
        for a in sub._actions:
            if a.dest in cfg:
                typed[a.dest] = a.type(cfg[a.dest]) if a.type else cfg[a.dest]
        sub.set_defaults(**typed)
        args = parser.parse_args(argv)
    return args


_NEGATIVE_VALUE = re.compile(r"^-[\d.]")


def _join_negative_values(argv):
    # "--q -5:5:11" would otherwise be read as an unknown option
    argv = list(argv)
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok.startswith("--") and "=" not in tok and i + 1 < len(argv) and _NEGATIVE_VALUE.match(argv[i + 1]):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    argv = _join_negative_values(sys.argv[1:] if argv is None else argv)
    args = _parse(parser, argv)
    if args.boundary_tol is None:
        try:
            args.boundary_tol = default_boundary_tol(_params(args))
        except ValueError as exc:
            print(f"hktunnel: error: {exc}", file=sys.stderr)
            return 2
    buf = []

    class _Buf:
        write = buf.append

    try:
        _workers()
        _params(args)
        args.func(args, _Buf())
    except (NumericalFailure, HKError, ArithmeticError) as exc:
        print(f"hktunnel: numerical failure: {exc}", file=sys.stderr)
        return 3
    except (argparse.ArgumentTypeError, ValueError) as exc:
        print(f"hktunnel: error: {exc}", file=sys.stderr)
        return 2
    # emit only complete tables
    out.write("".join(buf))
    out.flush()
    return 0
