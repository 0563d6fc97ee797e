"""Command-line front end.

Plants are given either as the name of a built-in benchmark case or as a
path to a JSON file ``{"A": .., "B": .., "C": .., "D": .., "nmeas": .., "ncont": ..}``
(row-major nested lists; the partition keys are optional).  Controllers are
read and written in the same format, without the partition keys.

Exit status is 0 on success, 1 on a domain error (reported on stderr as
``ErrorName: message``) and 2 on a usage error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from typing import List, Optional

import numpy as np

from . import analysis, benchmarks
from .errors import ConfigError, FixorderError, PlantFormatError
from .statespace import StateSpaceModel, close_loop, format_tf, format_zpk, ss_to_tf, ss_to_zpk
from .synthesis import ControllerParams, SynthesisOptions, synthesize

SEED_ENV = "FIXORDER_SEED"
_DEFAULTS = SynthesisOptions()
_OBJECTIVE_NAMES = {"+": "stabilize_only", "s": "spectral_abscissa", "h": "hinf"}

_STEP_COLUMNS = "CSV columns: t, then y<i>_u<j> for every output i and input j (1-based)."
_SIGMA_COLUMNS = "CSV columns: omega (rad/s), then sv1, sv2, ... in descending order."


def _fmt(x: float, digits: int) -> str:
    return f"{x:.{digits}g}"


def _fmt_array(M: np.ndarray, digits: int) -> str:
    return np.array2string(np.asarray(M), formatter={"float_kind": lambda v: _fmt(v, digits)})


# ---------------------------------------------------------------------------
# Plant and controller loading
# ---------------------------------------------------------------------------


def load_model(spec: str) -> StateSpaceModel:
    """Built-in case name or path to a JSON model file."""
    names = benchmarks.case_names()
    if spec in names:
        return benchmarks.get_case(spec).plant
    if os.path.isfile(spec):
        try:
            with open(spec, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise PlantFormatError(f"cannot read {spec}: {exc}") from exc
        return StateSpaceModel.from_json(text)
    raise ConfigError(f"{spec!r} is neither a readable file nor a built-in plant; "
                      f"available: {', '.join(names)}")


def _maybe_closed(args) -> StateSpaceModel:
    sys_ = load_model(args.plant)
    if getattr(args, "close_with", None):
        sys_ = close_loop(sys_, load_model(args.close_with))
    return sys_


def _write_text(path: Optional[str], text: str) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _csv(header: List[str], cols: np.ndarray, digits: int) -> str:
    lines = [",".join(header)]
    for row in cols:
        lines.append(",".join(_fmt(v, digits) for v in row))
    return "\n".join(lines) + "\n"


def describe_controller(K: StateSpaceModel, digits: int) -> str:
    """Pretty-print: zero/pole/gain and transfer function for SISO, matrices otherwise."""
    if K.noutputs == 1 and K.ninputs == 1:
        if K.n == 0:
            return f"static gain: {_fmt(float(K.D[0, 0]), digits)}"
        z = ss_to_zpk(K)
        g = ss_to_tf(K)
        return ("zero/pole/gain:\n" + format_zpk(z, digits)
                + "\n\ntransfer function:\n" + format_tf(g.num, g.den, digits))
    parts = []
    for name, M in zip(("Ak", "Bk", "Ck", "Dk"), (K.A, K.B, K.C, K.D)):
        if M.size:
            parts.append(f"{name} =\n{_fmt_array(M, digits)}")
    return "\n".join(parts)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_synth(args) -> int:
    p = load_model(args.plant)
    objective = _OBJECTIVE_NAMES[args.objective]
    warm = None
    if args.warm_start:
        warm = ControllerParams.from_statespace(load_model(args.warm_start))
    opts = SynthesisOptions(objective=objective, n_starts=args.starts, rng_seed=args.seed,
                            max_iters_per_start=args.max_iters, init_scale=args.init_scale,
                            warm_start=warm)
    res = synthesize(p, args.order, opts)
    d = args.digits
    K = res.controller
    label = {"hinf": "H-infinity norm", "spectral_abscissa": "spectral abscissa",
             "stabilize_only": "spectral abscissa"}[objective]
    alpha = analysis.spectral_abscissa(close_loop(p, K))[0]
    print(f"objective: {objective}  order: {args.order}  starts: {args.starts}  seed: {args.seed}")
    for i, r in enumerate(res.per_start):
        print(f"  start {i}: value {_fmt(r.value, d)}  iterations {r.iterations}  "
              f"reason {r.reason}  |theta| {_fmt(r.theta_norm, d)}")
    if objective == "stabilize_only":
        print("found a stabilizing controller, quitting")
    print(f"achieved {label}: {_fmt(res.value, d)}")
    print(f"closed-loop spectral abscissa: {_fmt(alpha, d)}")
    print(describe_controller(K, d))
    js = K.to_json(indent=2)
    if args.output:
        _write_text(args.output, js)
        print(f"controller written to {args.output}")
    else:
        print("controller (JSON):")
        print(js)
    return 0


def cmd_norm(args) -> int:
    r = analysis.hinf_norm(_maybe_closed(args), tol=args.tol)
    d = args.digits
    print(f"H-infinity norm: {_fmt(r.norm, d)}")
    print(f"peak frequency: {_fmt(r.peak_frequency, d)} rad/s")
    return 0


def cmd_abscissa(args) -> int:
    alpha, et = analysis.spectral_abscissa(_maybe_closed(args))
    d = args.digits
    print(f"spectral abscissa: {_fmt(alpha, d)}")
    for lam in sorted(et.values, key=lambda z: (-z.real, -abs(z.imag))):
        sign = "+" if lam.imag >= 0 else "-"
        print(f"  {_fmt(lam.real, d)} {sign} {_fmt(abs(lam.imag), d)}i")
    return 0


def cmd_step(args) -> int:
    t, y = analysis.step_response(_maybe_closed(args), args.t_final, args.samples)
    p, m = y.shape[1:]
    header = ["t"] + [f"y{i + 1}_u{j + 1}" for i in range(p) for j in range(m)]
    _write_text(args.output, _csv(header, np.column_stack([t, y.reshape(len(t), -1)]),
                                  args.digits))
    return 0


def cmd_sigma(args) -> int:
    omega = np.logspace(np.log10(args.wmin), np.log10(args.wmax), args.points)
    sv = analysis.sigma(_maybe_closed(args), omega)
    header = ["omega"] + [f"sv{i + 1}" for i in range(sv.shape[1])]
    _write_text(args.output, _csv(header, np.column_stack([omega, sv]), args.digits))
    return 0


def cmd_zpk(args) -> int:
    sys_ = _maybe_closed(args)
    out, inp = args.out - 1, args.inp - 1
    if not (0 <= out < sys_.noutputs and 0 <= inp < sys_.ninputs):
        raise ConfigError(f"channel ({args.out},{args.inp}) outside a "
                          f"{sys_.noutputs}x{sys_.ninputs} system")
    print(format_zpk(ss_to_zpk(sys_, out, inp), args.digits))
    return 0


def cmd_bench(args) -> int:
    names = args.case or benchmarks.case_names()
    for n in names:
        benchmarks.get_case(n)          # validate every name before running anything
    orders = {n: args.orders for n in names} if args.orders else None
    report = benchmarks.run_benchmarks(names, orders, n_starts=args.starts, seed=args.seed,
                                       refine_passes=args.refine_passes,
                                       out_dir=args.artifacts)
    js = report.to_json(indent=2)
    _write_text(args.output, js)
    if args.output:
        print(f"report written to {args.output}")
    return 0 if report.passed or not args.strict else 1


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _nonneg_int(s: str) -> int:
    v = int(s)
    if v < 0:
        raise argparse.ArgumentTypeError("must be a nonnegative integer")
    return v


def _positive_float(s: str) -> float:
    v = float(s)
    if not (np.isfinite(v) and v > 0):
        raise argparse.ArgumentTypeError("must be a positive number")
    return v


def _resolve_seed(parser, args, default: int) -> int:
    if args.seed is not None:
        return args.seed
    v = os.environ.get(SEED_ENV, "")
    if not v:
        return default
    try:
        return int(v)
    except ValueError:
        parser.error(f"{SEED_ENV}={v!r} is not an integer")


def build_parser() -> argparse.ArgumentParser:
    cases = ", ".join(benchmarks.case_names())
    ap = argparse.ArgumentParser(
        prog="fixorder",
        description="Fixed-order controller synthesis and closed-loop analysis.",
        epilog=f"Built-in plants: {cases}.  Feedback convention: u = K y.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log per-start progress")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, closable=True):
        p.add_argument("--plant", required=True,
                       help="built-in case name or JSON model file")
        if closable:
            p.add_argument("--close-with", metavar="CONTROLLER",
                           help="JSON controller; analyse close_loop(plant, controller)")
        p.add_argument("--digits", type=_positive_int, default=6,
                       help="significant digits in numeric output (default 6)")

    s = sub.add_parser("synth", help="synthesize a fixed-order controller")
    common(s, closable=False)
    s.add_argument("--order", type=_nonneg_int, required=True, help="controller order k")
    s.add_argument("--objective", choices=sorted(_OBJECTIVE_NAMES), default="h",
                   help="'+' stabilize only, 's' spectral abscissa, 'h' H-infinity (default h)")
    s.add_argument("--starts", type=_positive_int, default=_DEFAULTS.n_starts,
                   help=f"number of random starts (default {_DEFAULTS.n_starts})")
    s.add_argument("--seed", type=int, default=None,
                   help=f"RNG seed (default ${SEED_ENV} or {_DEFAULTS.rng_seed})")
    s.add_argument("--max-iters", type=_positive_int, default=_DEFAULTS.max_iters_per_start,
                   help=f"BFGS iterations per start (default {_DEFAULTS.max_iters_per_start})")
    s.add_argument("--init-scale", type=_positive_float, default=_DEFAULTS.init_scale,
                   help=f"std. dev. of random initial parameters (default {_DEFAULTS.init_scale:g})")
    s.add_argument("--warm-start", metavar="CONTROLLER", help="JSON controller to start from")
    s.add_argument("--output", help="write the controller JSON here instead of stdout")
    s.set_defaults(func=cmd_synth, seed_default=_DEFAULTS.rng_seed)

    n = sub.add_parser("norm", help="H-infinity norm and peak frequency")
    common(n)
    n.add_argument("--tol", type=_positive_float, default=1e-6,
                   help="relative tolerance (default 1e-6)")
    n.set_defaults(func=cmd_norm)

    a = sub.add_parser("abscissa", help="spectral abscissa and eigenvalues")
    common(a)
    a.set_defaults(func=cmd_abscissa)

    st = sub.add_parser("step", help="step responses as CSV", epilog=_STEP_COLUMNS)
    common(st)
    st.add_argument("--t-final", type=_positive_float, default=2.0,
                    help="final time in seconds (default 2)")
    st.add_argument("--samples", type=int, default=201, help="number of samples (default 201)")
    st.add_argument("--output", help="CSV file (default stdout)")
    st.set_defaults(func=cmd_step)

    sg = sub.add_parser("sigma", help="singular values over frequency as CSV",
                        epilog=_SIGMA_COLUMNS)
    common(sg)
    sg.add_argument("--wmin", type=_positive_float, default=0.1,
                    help="lowest frequency in rad/s (default 0.1)")
    sg.add_argument("--wmax", type=_positive_float, default=10.0,
                    help="highest frequency in rad/s (default 10)")
    sg.add_argument("--points", type=_positive_int, default=100,
                    help="log-spaced frequency points (default 100)")
    sg.add_argument("--output", help="CSV file (default stdout)")
    sg.set_defaults(func=cmd_sigma)

    z = sub.add_parser("zpk", help="zero/pole/gain of one SISO channel")
    common(z)
    z.add_argument("--out", type=_positive_int, default=1, help="output index, 1-based")
    z.add_argument("--in", dest="inp", type=_positive_int, default=1, help="input index, 1-based")
    z.set_defaults(func=cmd_zpk)

    b = sub.add_parser("bench", help="rerun benchmark cases and print a JSON report")
    b.add_argument("--case", action="append", metavar="NAME",
                   help=f"case to run, repeatable (default all: {cases})")
    b.add_argument("--orders", type=_nonneg_int, nargs="+",
                   help="override the orders of every selected case")
    b.add_argument("--starts", type=_positive_int, default=benchmarks.DEFAULT_STARTS,
                   help=f"starts per order (default {benchmarks.DEFAULT_STARTS})")
    b.add_argument("--seed", type=int, default=None,
                   help=f"RNG seed (default ${SEED_ENV} or {benchmarks.DEFAULT_SEED})")
    b.add_argument("--refine-passes", type=_nonneg_int, default=1,
                   help="warm-started reruns after the first call (default 1)")
    b.add_argument("--artifacts", metavar="DIR", help="directory for step/sigma CSV files")
    b.add_argument("--output", help="JSON report file (default stdout)")
    b.add_argument("--strict", action="store_true", help="exit 1 if any order misses its bound")
    b.set_defaults(func=cmd_bench, seed_default=benchmarks.DEFAULT_SEED)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "samples", 2) < 2:
        parser.error("--samples must be at least 2")
    if getattr(args, "wmin", 0) and args.wmin > args.wmax:
        parser.error("--wmin must not exceed --wmax")
    if hasattr(args, "seed_default"):
        args.seed = _resolve_seed(parser, args, args.seed_default)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        return int(args.func(args))
    except FixorderError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
