"""Command-line front end.

Subcommands: ``compute``, ``verify``, ``game``, ``distill-bound`` and ``gen``.
Every command writes deterministic JSON to standard output (or ``--output``).

Exit codes: 0 success, 1 usage or configuration problem (bad flags, bad JSON,
unknown suite, size guard), 2 ill-posed input, 3 numerical failure.  ``verify``
also exits 4 when a suite runs cleanly but some instance violates its
tolerance.
"""
import argparse
import json
import logging
import math
import os
import sys

from . import io
from .conic import FEAS_TOL, GAP_TOL
from .distillation import (
    check_pure_to_pure,
    error_bound,
    free_overlap_channel,
    free_overlap_state,
    overhead_bound,
)
from .divergence import rmax_components
from .errors import ConfigurationError, DomainError, IllPosedError, NumericalFailure, SizeError
from .freesets import as_components, cone_from_registry
from .games import (
    channel_advantage_ratio,
    measurement_advantage_ratio,
    p_succ,
    verify_theorem5,
    verify_theorem7,
)
from .linalg import RANK_TOL
from .monotones import (
    bounds_report,
    gen_robustness,
    number_json,
    proj_robustness,
    projective_result_json,
    robustness_result_json,
    weight,
)
from .objects import Channel, PovmSet
from .randomgen import random_channel, random_povm_set, random_state, rng_from
from .suites import SUITES, run_suite

EXIT_OK, EXIT_USAGE, EXIT_ILL_POSED, EXIT_NUMERICAL, EXIT_VIOLATION = 0, 1, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on usage errors; the contract here is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read_json(text_or_path, what):
    if os.path.exists(text_or_path):
        try:
            with open(text_or_path) as fh:
                return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"{what} {text_or_path}: invalid JSON ({exc})") from exc
    try:
        return json.loads(text_or_path)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{what} is neither a readable file nor valid JSON: {text_or_path!r}") from exc


def _freeset(text, obj=None):
    """Registry spec given as a bare kind name, a JSON string or a JSON file."""
    spec = text if not (text.lstrip().startswith("{") or os.path.exists(text)) else _read_json(text, "free set")
    return cone_from_registry(spec, obj)


def _load_object(path, kind):
    if not os.path.exists(path):
        raise ConfigurationError(f"cannot read {path}")
    return io.load(path, kind)


def _tolerances(args):
    return {"rank_tol": args.rank_tol, "gap_tol": args.gap_tol, "feas_tol": args.feas_tol}


# --- compute -----------------------------------------------------------------

def cmd_compute(args):
    obj = _load_object(args.object, args.kind)
    tols = _tolerances(args)
    if args.monotone == "rmax":
        if not args.reference:
            raise ConfigurationError("--monotone rmax needs --reference")
        ref = _load_object(args.reference, args.kind)
        value = rmax_components(as_components(obj), as_components(ref), args.rank_tol)
        return {"monotone": "rmax", "value": number_json(value), "tolerances": {"rank_tol": args.rank_tol}}
    if not args.freeset:
        raise ConfigurationError(f"--monotone {args.monotone} needs --freeset")
    cone = _freeset(args.freeset, obj)
    if args.monotone == "omega":
        out = projective_result_json(proj_robustness(obj, cone, **tols))
    elif args.monotone == "robustness":
        out = robustness_result_json(gen_robustness(obj, cone, args.rank_tol), "robustness")
    elif args.monotone == "weight":
        out = robustness_result_json(weight(obj, cone, args.rank_tol), "weight")
    else:
        rep = bounds_report(obj, cone, args.rank_tol)
        out = {"monotone": "bounds", **{k: number_json(v) if isinstance(v, float) else v for k, v in rep.items()}}
    out["freeset"] = cone.to_json()
    out.setdefault("tolerances", {"rank_tol": args.rank_tol})
    return out


# --- verify ------------------------------------------------------------------

def cmd_verify(args):
    if args.suite not in SUITES:
        raise ConfigurationError(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES)}")
    report = run_suite(args.suite, args.trials, args.seed)
    return report, (EXIT_OK if report["pass"] else EXIT_VIOLATION)


# --- game --------------------------------------------------------------------

def _game_instance(data):
    if not isinstance(data, dict) or "ensembles" not in data or "povms" not in data:
        raise ConfigurationError("a game instance needs 'ensembles' and 'povms'")
    ens = [io.ensemble_from_json(e) for e in data["ensembles"]]
    povms = [io.povm_set_from_json(p) for p in data["povms"]]
    ch = io.channel_from_json(data["channel"]) if data.get("channel") is not None else None
    return ens, povms, ch


def cmd_game(args):
    if args.witness:
        if not (args.object and args.freeset):
            raise ConfigurationError("--witness needs --object and --freeset")
        obj = _load_object(args.object, args.kind)
        cone = _freeset(args.freeset, obj)
        if isinstance(obj, Channel):
            rec = verify_theorem5(obj, cone, trials=args.trials, seed=args.seed)
        elif isinstance(obj, PovmSet):
            rec = verify_theorem7(obj, cone, trials=args.trials, seed=args.seed)
        else:
            raise DomainError("witness games are defined for channels and single POVMs")
        return {"game": "witness", **rec}
    if not (args.instance and args.freeset):
        raise ConfigurationError("game needs --instance and --freeset (or --witness)")
    ens, povms, ch = _game_instance(_read_json(args.instance, "game instance"))
    if len(ens) == 1 and len(povms) == 2:
        if ch is None:
            raise ConfigurationError("a channel game needs a 'channel'")
        cone = _freeset(args.freeset, ch)
        rec = channel_advantage_ratio(ch, cone, ens[0], povms[0], povms[1])
        probs = {"p_discriminate": p_succ(ens[0], povms[0], ch), "p_exclude": p_succ(ens[0], povms[1], ch)}
        kind = "channel"
    elif len(ens) == 2 and len(povms) == 1:
        cone = _freeset(args.freeset, povms[0])
        rec = measurement_advantage_ratio(povms[0], cone, ens[0], ens[1])
        probs = {"p_first": p_succ(ens[0], povms[0]), "p_second": p_succ(ens[1], povms[0])}
        kind = "measurement"
    else:
        raise ConfigurationError("use one ensemble with two POVMs (channel game) or two ensembles with one POVM")
    return {
        "game": kind,
        "num": rec["num"],
        "denom_opt": rec["denom_opt"],
        "ratio": rec["ratio"],
        **probs,
    }


# --- distill-bound -------------------------------------------------------------

def cmd_distill(args):
    obj = _load_object(args.object, args.kind)
    target = _load_object(args.target, args.kind)
    cone = _freeset(args.freeset, obj)
    omega = proj_robustness(obj, cone, **_tolerances(args)).value
    if isinstance(obj, Channel):
        if not isinstance(target, Channel):
            raise DomainError("a channel resource needs a channel target")
        if not check_pure_to_pure(target, seed=args.seed):
            raise DomainError("the target channel does not map pure states to pure states")
        overlap, flag = free_overlap_channel(target, cone, args.fidelity_mode, seed=args.seed)
    else:
        overlap, flag = free_overlap_state(target, cone), "exact"
    out = {
        "omega": number_json(omega),
        "overlap": overlap,
        "overlap_flag": flag,
        "error_bound": error_bound(omega, overlap),
        "eps": args.eps,
        "tolerances": _tolerances(args),
    }
    try:
        n = overhead_bound(omega, overlap, args.eps)
        out["overhead_bound"] = n
        out["overhead_copies"] = math.ceil(n - 1e-12)
    except DomainError as exc:
        out["overhead_bound"] = None
        out["overhead_note"] = str(exc)
    return out


# --- gen -----------------------------------------------------------------------

def cmd_gen(args):
    rng = rng_from(args.seed)
    if args.what == "state":
        return io.state_to_json(random_state(args.dim, rng))
    if args.what == "channel":
        d_in = args.dim_in or args.dim
        d_out = args.dim_out or args.dim
        return io.channel_to_json(random_channel(d_in, d_out, rng))
    if args.n > args.dim:
        raise SizeError(f"noisy projective POVMs need n <= dim (got n={args.n}, dim={args.dim})")
    return io.povm_set_to_json(random_povm_set(args.dim, args.m, args.n, rng))


# --- parser --------------------------------------------------------------------

def _positive_dim(text):
    try:
        v = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from exc
    if not 1 <= v <= 16:
        raise argparse.ArgumentTypeError(f"dimension {v} outside the supported range 1..16")
    return v


def _add_tolerances(p):
    p.add_argument("--rank-tol", type=float, default=RANK_TOL, help="relative eigenvalue cut-off for supports")
    p.add_argument("--gap-tol", type=float, default=GAP_TOL, help="relative duality gap for certification")
    p.add_argument("--feas-tol", type=float, default=FEAS_TOL, help="relative residual for certification")


def build_parser():
    parser = _Parser(prog="resmon", description="Projective robustness and related resource monotones.")
    parser.add_argument("--output", "-o", help="write JSON here instead of standard output")
    parser.add_argument("--verbose", "-v", action="store_true", help="log solver diagnostics to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("compute", help="evaluate a monotone")
    p.add_argument("--object", required=True, help="object JSON file")
    p.add_argument("--kind", choices=["state", "channel", "povm", "povm-set"], help="object type (default: its 'type' field)")
    p.add_argument("--freeset", help="free-set registry spec: kind name, JSON string or JSON file")
    p.add_argument("--monotone", default="omega", choices=["omega", "robustness", "weight", "rmax", "bounds"])
    p.add_argument("--reference", help="second object for --monotone rmax")
    _add_tolerances(p)
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("verify", help="run a seeded property suite")
    p.add_argument("suite", help=f"one of: {', '.join(SUITES)}")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("game", help="discrimination/exclusion ratio of a game instance")
    p.add_argument("--instance", help="game instance JSON (file or string)")
    p.add_argument("--freeset", help="free-set registry spec")
    p.add_argument("--witness", action="store_true", help="build the optimal witness game for --object instead")
    p.add_argument("--object", help="channel or single POVM for --witness")
    p.add_argument("--kind", choices=["channel", "povm", "povm-set"])
    p.add_argument("--trials", type=int, default=20, help="random games for the upper-bound check (--witness)")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_game)

    p = sub.add_parser("distill-bound", help="error and overhead limits for distilling a target")
    p.add_argument("--object", required=True, help="resource state or channel JSON")
    p.add_argument("--target", required=True, help="pure target state or pure-to-pure target channel JSON")
    p.add_argument("--kind", choices=["state", "channel"])
    p.add_argument("--freeset", required=True)
    p.add_argument("--eps", type=float, default=0.01, help="target error for the overhead bound")
    p.add_argument("--fidelity-mode", default="exact_replacement", choices=["exact_replacement", "heuristic"])
    p.add_argument("--seed", type=int, default=0)
    _add_tolerances(p)
    p.set_defaults(func=cmd_distill)

    p = sub.add_parser("gen", help="seeded random instance")
    p.add_argument("what", choices=["state", "channel", "povm-set"])
    p.add_argument("--dim", type=_positive_dim, default=2)
    p.add_argument("--dim-in", type=_positive_dim)
    p.add_argument("--dim-out", type=_positive_dim)
    p.add_argument("-m", type=int, default=2, help="number of measurements (povm-set)")
    p.add_argument("-n", type=int, default=2, help="outcomes per measurement (povm-set)")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gen)
    return parser


def _emit(payload, path):
    text = io.dumps(payload)
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(name)s: %(message)s")
    try:
        result = args.func(args)
        payload, code = result if isinstance(result, tuple) else (result, EXIT_OK)
        _emit(payload, args.output)
        return code
    except (ConfigurationError, SizeError, OSError) as exc:
        print(f"resmon: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, IllPosedError) as exc:
        print(f"resmon: ill-posed input: {exc}", file=sys.stderr)
        return EXIT_ILL_POSED
    except NumericalFailure as exc:
        print(f"resmon: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
