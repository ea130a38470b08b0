"""Command-line entry point.

Exit codes: 0 on success, 2 on invalid input, 1 on any other failure. Errors
are printed to stderr as a JSON object ``{"error": ..., "message": ...}``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import FitChainError, ValidationError
from .fit_core import validate_params
from .gallery import verify_report
from .mixing import DEFAULT_EXACT_CAP, FitChain, default_horizon, distance_curve, hitting_distribution
from .oracle import exact_curve
from .poissonize import ct_curve, poisson_weights
from .profiles import DEFAULT_V_EXPONENT, ProfileSpec, build_profile_chain


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ValidationError(f"expected a comma-separated list of numbers, got {text!r}") from exc


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ValidationError(f"expected a comma-separated list of integers, got {text!r}") from exc


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _load_params(path: str):
    try:
        doc = json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from exc
    return validate_params(doc)


def _emit(text: str, out: str | None):
    if out and out != "-":
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _dump(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def cmd_validate(args) -> int:
    params = _load_params(args.params)
    doc = params.to_json_dict()
    doc["n_states"] = params.n_states
    _emit(_dump(doc), None)
    return 0


def cmd_curve(args) -> int:
    params = _load_params(args.params)
    t_max = args.t_max if args.t_max is not None else default_horizon(params, args.horizon_cap)
    curve = distance_curve(params, t_max, args.mode, cap=args.cap)
    _emit(curve.to_csv(), args.out)
    return 0


def cmd_hitting(args) -> int:
    params = _load_params(args.params)
    horizon = args.horizon or (params.l0 + params.lengths[-1] + 1)
    hd = hitting_distribution(FitChain(params), args.start, horizon)
    doc = {
        "start": str(hd.start),
        "horizon": hd.horizon,
        "tail_mass": hd.tail_mass,
        "pmf": [[t, float(p)] for t, p in enumerate(hd.pmf) if p > 0],
    }
    _emit(_dump(doc), args.out)
    return 0


def cmd_fit_profile(args) -> int:
    spec = ProfileSpec.from_csv(_read_text(args.profile))
    built = build_profile_chain(
        spec, args.t_n, args.w_n, args.n, args.eps, v_exponent=args.v_exponent
    )
    doc = built.params.to_json_dict()
    doc["meta"] = {
        "t_n": args.t_n,
        "w_n": args.w_n,
        "n": args.n,
        "v_n": built.v_n,
        "v_exponent": args.v_exponent,
        "synthetic_midpoint": built.step.synthetic_midpoint,
        "n_states": built.params.n_states,
    }
    _emit(_dump(doc), args.out)
    return 0


def cmd_ct_curve(args) -> int:
    params = _load_params(args.params)
    times = _floats(args.times)
    if not times:
        raise ValidationError("--times needs at least one value")
    values = ct_curve(params, times, args.tol, args.mode, cap=args.cap)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t_real", "d_ct", "tol"])
    for t, d in zip(times, values):
        writer.writerow([f"{t:.17g}", f"{d:.17g}", f"{args.tol:.17g}"])
    _emit(buf.getvalue(), args.out)
    return 0


def cmd_gallery(args) -> int:
    if args.which == "uncountable":
        grid = _floats(args.alpha)
    elif args.which == "nested":
        grid = _ints(args.q)
    else:
        grid = _ints(args.index)
    report = verify_report(
        args.which,
        _ints(args.n),
        _floats(args.c),
        grid,
        k_override=args.k_override,
        threads=args.threads,
    )
    _emit(report.to_json() + "\n", args.out)
    return 0


def cmd_oracle(args) -> int:
    params = _load_params(args.params)
    curve = exact_curve(params, args.t_max)
    _emit(_dump(curve.to_json_dict()), args.out)
    return 0


def cmd_poisson(args) -> int:
    tr = poisson_weights(args.t, args.tol)
    doc = {"t": tr.t, "left": tr.left, "right": tr.right, "tail_mass": tr.tail_mass}
    _emit(_dump(doc), None)
    return 0


def _default_threads() -> int:
    env = os.environ.get("FITCHAIN_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fitchain",
        description="Build FIT Markov chains from cutoff profiles and compute their mixing curves.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--seed", type=int, default=0, help="seed for any randomness (default 0)")
    parser.add_argument(
        "--threads",
        type=int,
        default=None,
        help="worker cap for grid evaluations (default: $FITCHAIN_THREADS or all cores)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a parameter document and print it normalized")
    p.add_argument("params")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("curve", help="worst-case distance curve as CSV")
    p.add_argument("params")
    p.add_argument("--t-max", type=int, default=None, help="last time step (default: auto)")
    p.add_argument("--mode", choices=["exact", "root"], default="exact")
    p.add_argument("--cap", type=int, default=DEFAULT_EXACT_CAP, help="state cap for exact mode")
    p.add_argument("--horizon-cap", type=int, default=100_000, help="cap on the automatic t_max")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("hitting", help="law of the hitting time of the fruit")
    p.add_argument("params")
    p.add_argument("--start", required=True, help="state label such as x0, y7^1 or z")
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_hitting)

    p = sub.add_parser("fit-profile", help="parameters whose curve follows a target profile")
    p.add_argument("profile", help="CSV with columns c,p")
    p.add_argument("--t-n", type=int, required=True)
    p.add_argument("--w-n", type=float, required=True)
    p.add_argument("--n", type=int, required=True, help="sequence index; sets epsilon = e^-n")
    p.add_argument("--eps", type=float, default=None, help="override epsilon")
    p.add_argument("--v-exponent", type=float, default=DEFAULT_V_EXPONENT)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_fit_profile)

    p = sub.add_parser("ct-curve", help="continuous-time distance by uniformization")
    p.add_argument("params")
    p.add_argument("--times", required=True, help="comma-separated real times")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--mode", choices=["exact", "root"], default="root")
    p.add_argument("--cap", type=int, default=DEFAULT_EXACT_CAP)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_ct_curve)

    p = sub.add_parser("gallery", help="verify one of the example families")
    p.add_argument("which", choices=["uncountable", "nested", "dense"])
    p.add_argument("--n", default="2000", help="comma-separated sizes")
    p.add_argument("--c", default="-1,0.5,1,2", help="comma-separated window positions")
    p.add_argument("--alpha", default="0.25,0.5,0.75", help="window exponents (uncountable)")
    p.add_argument("--q", default="2", help="window scales (nested)")
    p.add_argument("--index", default="0,1,2", help="family indices (dense)")
    p.add_argument("--k-override", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gallery)

    p = sub.add_parser("oracle", help="exact rational curve (small chains)")
    p.add_argument("params")
    p.add_argument("--t-max", type=int, default=50)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("poisson", help="truncation window of the Poisson weights")
    p.add_argument("t", type=float)
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_poisson)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads is None:
        args.threads = _default_threads()
    np.random.seed(args.seed)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(json.dumps(exc.to_dict()), file=sys.stderr)
        return 2
    except FitChainError as exc:
        print(json.dumps(exc.to_dict()), file=sys.stderr)
        return 1
    except ValueError as exc:
        print(json.dumps({"error": "ValidationError", "message": str(exc)}), file=sys.stderr)
        return 2
    except OSError as exc:
        print(json.dumps({"error": "IOError", "message": str(exc)}), file=sys.stderr)
        return 1


def main():
    sys.exit(run())
