"""``rndcalc`` command line: verify, rnd, info, generate.

Exit codes: 0 when everything checked passes, 1 when some identity is
violated, 2 for usage errors and unreadable or malformed input.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import fixtures as fx
from .conditional import ConditionalKernel, output_marginal
from .errors import DomainError, MeasureError, StructuralError, UnsatisfiableError
from .fileio import bundle_to_dict, load_bundle, load_kernel, load_measure
from .information import IDENTITY_TOL, identity_rhs, lautum_information, mutual_information
from .measure import ProbabilityMeasure, counting, measure_to_dict
from .report import dumps
from .rnd import check_radon_nikodym, rnd
from .suite import THEOREM_IDS, generate_instance, get_theorem, run_suite

log = logging.getLogger("rndcalc")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
UNDEFINED = "undefined (absolute continuity)"
GLOBAL_DEFAULTS = {"seed": 0, "trials": 1, "tol": [], "out": None}


class UsageError(Exception):
    pass


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _global_flags() -> argparse.ArgumentParser:
    # SUPPRESS lets the flags appear before or after the subcommand without
    # the subparser's defaults overwriting values given to the main parser
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--seed", type=_seed, help="unsigned 64-bit seed (default 0)")
    common.add_argument("--trials", type=_positive, help="instances per theorem (default 1)")
    common.add_argument(
        "--tol", action="append", metavar="THEOREM=VALUE", help="override a theorem's tolerance"
    )
    common.add_argument("--out", type=Path, help="write JSON here instead of stdout")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags()
    parser = argparse.ArgumentParser(prog="rndcalc", parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", parents=[common], help="run theorem checkers")
    which = verify.add_mutually_exclusive_group()
    which.add_argument("--all", action="store_true", help="every theorem (the default)")
    which.add_argument("--theorem", action="append", choices=THEOREM_IDS, metavar="ID")
    verify.add_argument("--fixture", action="append", default=[], metavar="PATH")

    rnd_cmd = sub.add_parser("rnd", parents=[common], help="derivative of P with respect to Q")
    rnd_cmd.add_argument("p", type=Path)
    rnd_cmd.add_argument("q", type=Path)

    info = sub.add_parser("info", parents=[common], help="mutual and lautum information")
    info.add_argument("kernel", type=Path)
    info.add_argument("px", type=Path)
    info.add_argument("--q", action="append", default=[], type=Path, metavar="PATH")
    info.add_argument("--bits", action="store_true")

    gen = sub.add_parser("generate", parents=[common], help="write a seeded random fixture")
    gen.add_argument("kind", choices=["measure", "measure-chain", "kernel", "density", "bundle"])
    gen.add_argument("--n", type=_positive, default=4)
    gen.add_argument("--nx", type=_positive, default=3)
    gen.add_argument("--ny", type=_positive, default=3)
    gen.add_argument("--len", type=_positive, default=3, dest="length")
    gen.add_argument("--strict", action="store_true", help="every weight at least 0.01")
    gen.add_argument("--theorem", choices=THEOREM_IDS, help="target theorem for 'bundle'")
    gen.add_argument("--grid", type=int, default=201)
    gen.add_argument("--a", type=float, default=0.0)
    gen.add_argument("--b", type=float, default=1.0)
    return parser


def parse_tolerances(items) -> dict[str, float]:
    out = {}
    for item in items:
        name, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--tol expects THEOREM=VALUE, got {item!r}")
        get_theorem(name)
        try:
            tol = float(value)
        except ValueError:
            raise UsageError(f"--tol value for {name} is not a number: {value!r}") from None
        if not (math.isfinite(tol) and tol >= 0):
            raise UsageError(f"--tol value for {name} must be finite and nonnegative")
        out[name] = tol
    return out


# -- commands ------------------------------------------------------------------

def cmd_verify(args):
    tolerances = parse_tolerances(args.tol)
    if args.fixture:
        if not args.theorem:
            raise UsageError("--fixture needs one or more --theorem selections")
        bundle = load_bundle(*args.fixture)
        report = run_suite(args.theorem, tolerances=tolerances, bundle=bundle, seed=args.seed)
    else:
        report = run_suite(
            args.theorem or THEOREM_IDS, seed=args.seed, trials=args.trials, tolerances=tolerances
        )
    return report, EXIT_OK if report["pass"] else EXIT_FAIL


def cmd_rnd(args):
    P, Q = load_measure(args.p), load_measure(args.q)
    g = rnd(P, Q)  # raises DomainError when P is not << Q
    tol = parse_tolerances(args.tol).get("rn_construction")
    check = check_radon_nikodym(P, Q, g, seed=args.seed, **({} if tol is None else {"tol": tol}))
    report = {
        "space": list(Q.space.labels),
        "values": g.values,
        "verification": check.to_dict(),
    }
    return report, EXIT_OK if check.passed else EXIT_FAIL


def _attempt(fn, *a):
    try:
        return fn(*a)
    except DomainError as exc:
        log.info("%s", exc)
        return None


def cmd_info(args):
    kernel: ConditionalKernel = load_kernel(args.kernel)
    px = load_measure(args.px)
    if not isinstance(px, ProbabilityMeasure):
        px = ProbabilityMeasure(px.space, px.weights)
    tol = parse_tolerances(args.tol).get("il_identity", IDENTITY_TOL)
    I = _attempt(mutual_information, kernel, px)
    L = _attempt(lautum_information, kernel, px)
    total = None if I is None or L is None else I + L
    if args.q:
        references = [(str(path), load_measure(path)) for path in args.q]
    else:
        P_Y = output_marginal(kernel, px)
        references = [("P_Y", P_Y), ("counting", counting(P_Y.space))]
    rhs = [(desc, _attempt(identity_rhs, kernel, px, Q)) for desc, Q in references]
    passed = total is not None and all(
        v is not None and abs(v - total) <= tol for _, v in rhs
    )

    def show(value, divisor=1.0):
        return UNDEFINED if value is None else value / divisor

    report = {
        "I_nats": show(I),
        "L_nats": show(L),
        "I_plus_L_nats": show(total),
        "identity_rhs": [{"Q": desc, "value": show(v)} for desc, v in rhs],
        "pass": passed,
    }
    if args.bits:
        ln2 = math.log(2.0)
        report["I_bits"] = show(I, ln2)
        report["L_bits"] = show(L, ln2)
        report["I_plus_L_bits"] = show(total, ln2)
        report["identity_rhs_bits"] = [{"Q": desc, "value": show(v, ln2)} for desc, v in rhs]
    # an undefined quantity is a precondition miss, not a violation
    violated = any(
        total is not None and v is not None and abs(v - total) > tol for _, v in rhs
    )
    return report, EXIT_FAIL if violated else EXIT_OK


def instance_to_bundle(theorem_id: str, instance: dict) -> dict:
    """Bundle JSON that ``verify --fixture`` reads back into the same instance."""
    i = instance
    if theorem_id in ("unit_measure", "bayes_like", "inverse_bayes"):
        return bundle_to_dict(kernel=i["kernel"], px=i["P_X"])
    if theorem_id == "il_identity":
        return bundle_to_dict(kernel=i["kernel"], px=i["P_X"], q=i["Q_list"])
    if theorem_id == "linearity":
        return bundle_to_dict(measures=[i["P"], *i["Qs"]], coeffs=i["coeffs"])
    if theorem_id == "continuity":
        seq = i["seq"]
        return bundle_to_dict(measures=[i["P"]], sequence=list(seq.terms), limit=seq.limit)
    if theorem_id == "product_measures":
        return bundle_to_dict(measures=[i["P1"], i["P2"], i["Q1"], i["Q2"]])
    if theorem_id == "proportional":
        return bundle_to_dict(measures=[i["P"]], c=i["c"])
    if theorem_id == "change_of_measure":
        return bundle_to_dict(measures=[i["P"], i["Q"]], f=i["f"])
    if theorem_id == "chain_rule":
        return bundle_to_dict(measures=[i["P"], i["Q"], i["R"]])
    return bundle_to_dict(measures=[i["P"], i["Q"]])


def cmd_generate(args):
    rng = np.random.default_rng(args.seed)
    floor = fx.STRICT_FLOOR if args.strict else 0.0
    if args.kind == "measure":
        out = measure_to_dict(fx.random_probability(rng, args.n, floor=floor))
    elif args.kind == "measure-chain":
        if args.strict:
            chain = [fx.random_probability(rng, args.n, floor=floor) for _ in range(args.length)]
        else:
            chain = fx.random_chain(rng, args.n, args.length)
        out = bundle_to_dict(measures=chain)
    elif args.kind == "kernel":
        out = fx.random_kernel(rng, args.nx, args.ny, floor=floor).to_dict()
    elif args.kind == "density":
        out = fx.random_density(rng, args.grid, args.a, args.b).to_dict()
    else:
        if args.theorem is None:
            raise UsageError("generate bundle needs --theorem")
        out = instance_to_bundle(args.theorem, generate_instance(args.theorem, args.seed))
    return out, EXIT_OK


COMMANDS = {"verify": cmd_verify, "rnd": cmd_rnd, "info": cmd_info, "generate": cmd_generate}


def _configure_logging():
    level = os.environ.get("RND_LOG", "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def main(argv=None) -> int:
    _configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    for key, default in GLOBAL_DEFAULTS.items():
        if not hasattr(args, key):
            setattr(args, key, default)
    try:
        payload, code = COMMANDS[args.command](args)
    except UnsatisfiableError as exc:
        print(f"rndcalc: unsatisfiable request: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, StructuralError, DomainError, MeasureError) as exc:
        print(f"rndcalc {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = dumps(payload)
    if args.out is None:
        sys.stdout.write(text)
    else:
        try:
            args.out.write_text(text)
        except OSError as exc:
            print(f"rndcalc: cannot write {args.out}: {exc}", file=sys.stderr)
            return EXIT_USAGE
    return code


if __name__ == "__main__":
    sys.exit(main())
