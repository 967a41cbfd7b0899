"""Command-line front end.

Exit codes: 0 success, 1 property violation (a certificate is in the
report), 2 input error.
"""
from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from . import combinators as cb
from . import io
from . import suites
from .embed import defect, exact_embedding, isometry_budget, isometry_gap, perturb
from .errors import SofickitError
from .measured import measure
from .oracle import EnumerationBudget
from .relation import SubrelationPair, restrict_relation
from .sampling import random_element, random_relation, rng_from

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _one(paths, flag):
    if not paths or len(paths) != 1:
        raise InputError(f"exactly one {flag} is required")
    return paths[0]


def _relations(args, count=None):
    paths = args.relation or []
    if count is not None and len(paths) != count:
        raise InputError(f"{count} --relation file(s) required, got {len(paths)}")
    return [io.relation_from_json(io.read_json(p)) for p in paths]


def _subset(R, spec: str | None):
    if spec is None:
        raise InputError("--subset is required")
    ids = [s for s in spec.split(",") if s]
    try:
        return R.subset(R.space.index[a] for a in ids)
    except KeyError as exc:
        raise InputError(f"unknown atom id {exc.args[0]!r}") from None


def _emit(args, report: dict) -> None:
    stamped = io.stamp(report)
    if args.out:
        io.write_json(args.out, stamped)
    else:
        print(io.dumps(stamped))


def _write_morphism(args, m, report: dict) -> None:
    if not args.out:
        raise InputError("--out is required for commands that build a morphism")
    io.write_json(args.out, io.morphism_to_json(m))
    if args.relation_out:
        io.write_json(args.relation_out, io.relation_to_json(m.source))
    d = defect(m)
    report = {**report, **io.defect_report(d, args.seed), "target_n": m.target_n, "carrier_size": len(m.carrier)}
    print(io.dumps(io.stamp(report)))


def _random_carrier(R, args):
    rng = rng_from(args.seed)
    return [random_element(rng, R) for _ in range(args.trials)]


# -- subcommands ---------------------------------------------------------------

def cmd_gen_relation(args) -> int:
    R = random_relation(rng_from(args.seed), args.atoms, args.max_den, min_class=args.min_class)
    obj = io.relation_to_json(R)
    if args.out:
        io.write_json(args.out, obj)
    else:
        print(io.dumps(obj))
    return EXIT_OK


def cmd_embed(args) -> int:
    (R,) = _relations(args, 1)
    m = exact_embedding(R, _random_carrier(R, args))
    _write_morphism(args, m, {"command": "embed"})
    return EXIT_OK


def cmd_perturb(args) -> int:
    (R,) = _relations(args, 1)
    if args.delta is None:
        raise InputError("--delta is required")
    m = io.morphism_from_json(io.read_json(_one(args.morphism, "--morphism")), R)
    out = perturb(m, args.delta, args.seed)
    _write_morphism(args, out, {"command": "perturb", "delta": io.rat(args.delta)})
    return EXIT_OK


def cmd_check(args) -> int:
    (R,) = _relations(args, 1)
    m = io.morphism_from_json(io.read_json(_one(args.morphism, "--morphism")), R)
    d = defect(m)
    gap, budget = isometry_gap(m), isometry_budget(m)
    report = {"command": "check", **io.defect_report(d, args.seed),
              "isometry_gap": io.rat(gap), "isometry_budget": io.rat(budget), "violations": []}
    if gap > budget:
        report["violations"].append({"check": "isometry gap within budget", "expected": f"<= {io.rat(budget)}",
                                     "got": io.rat(gap), "inputs": {"worst_pair": report["worst_pair"]}})
    if args.delta is not None:
        for name, got, bound in (("eps_mult", d.eps_mult, 3 * args.delta), ("eps_trace", d.eps_trace, args.delta)):
            if got > bound:
                report["violations"].append({"check": f"{name} within perturbation budget",
                                             "expected": f"<= {io.rat(bound)}", "got": io.rat(got),
                                             "inputs": {"delta": io.rat(args.delta)}})
    _emit(args, report)
    return EXIT_VIOLATION if report["violations"] else EXIT_OK


def cmd_combine(args) -> int:
    kind = args.kind
    if kind == "mix":
        Rs = _relations(args)
        paths = args.morphism or []
        if not Rs or len(Rs) != len(paths):
            raise InputError("mix needs one --relation per --morphism")
        weights = [int(w) for w in (args.weights or ",".join("1" for _ in paths)).split(",")]
        if len(weights) != len(paths):
            raise InputError("--weights must list one integer per morphism")
        parts = [(io.morphism_from_json(io.read_json(p), R), w) for p, R, w in zip(paths, Rs, weights)]
        _write_morphism(args, cb.mix(parts), {"command": "combine mix", "weights": weights})
    elif kind == "restrict":
        (R,) = _relations(args, 1)
        m = io.morphism_from_json(io.read_json(_one(args.morphism, "--morphism")), R)
        A = _subset(R, args.subset)
        _write_morphism(args, cb.restrict_morphism(m, A), {"command": "combine restrict", "subset": args.subset})
    elif kind == "product":
        R, S = _relations(args, 2)
        rng = rng_from(args.seed)
        K = [(random_element(rng, R), random_element(rng, S)) for _ in range(args.trials)]
        kappa = cb.product_pair(exact_embedding(R), exact_embedding(S), K)
        _write_morphism(args, kappa, {"command": "combine product"})
    elif kind == "extend":
        fine, coarse = _relations(args, 2)
        cs = cb.build_choice_system(SubrelationPair(fine, coarse))
        Xi = cb.extend_finite_index(exact_embedding(fine), cs, _random_carrier(coarse, args))
        _write_morphism(args, Xi, {"command": "combine extend", "index": cs.N, **io.choice_system_to_json(cs)})
    elif kind == "reconstruct":
        (R,) = _relations(args, 1)
        A = _subset(R, args.subset)
        theta = exact_embedding(R)
        phi = cb.reconstruct_measure_algebra(theta, A)
        report = {"command": "combine reconstruct", "subset": args.subset, "target_n": theta.target_n,
                  "image": sorted(phi), "mu": io.rat(measure(A)),
                  "mu_image": io.rat(Fraction(len(phi), theta.target_n)), "violations": []}
        if Fraction(len(phi), theta.target_n) != measure(A):
            report["violations"].append({"check": "isometry", "inputs": {"subset": args.subset},
                                         "expected": report["mu"], "got": report["mu_image"]})
        _emit(args, report)
        return EXIT_VIOLATION if report["violations"] else EXIT_OK
    elif kind == "trim":
        (R,) = _relations(args, 1)
        P = _subset(R, args.subset)
        RQ = restrict_relation(R, P.complement())
        rng = rng_from(args.seed)
        K = [random_element(rng, RQ, full=True) for _ in range(args.trials)]
        eta = cb.trim_periodic(exact_embedding(R), P, K).with_products()
        _write_morphism(args, eta, {"command": "combine trim", "subset": args.subset})
    return EXIT_OK


_SUITE_KWARGS = {
    "monoid": lambda a: {"n_max": a.n if a.n is not None else 4, "triples": a.trials or 100_000},
    "prop1": lambda a: {"n": a.n if a.n is not None else 3, "exhaustive": a.exhaustive, "trials": a.trials or 10_000},
    "trace-distance": lambda a: {"trials": a.trials or 10_000},
    "embedding": lambda a: {"relations": a.trials or 50},
    "pad": lambda a: {"n_max": a.n if a.n is not None else 8},
    "mix": lambda a: {"runs": a.trials or 10},
    "perturb": lambda a: {"runs": a.trials or 100, **({"deltas": (a.delta,)} if a.delta is not None else {})},
    "finite-index": lambda a: {"pairs": a.trials or 20},
    "product": lambda a: {"runs": a.trials or 10},
    "reconstruct": lambda a: {"relations": a.trials or 20},
    "covariant": lambda a: {"runs": a.trials or 20},
    "trim-formula": lambda a: {"instances": a.trials or 100},
    "trim": lambda a: {"instances": a.trials or 100},
}


def cmd_props(args) -> int:
    if args.suite not in suites.SUITES:
        raise InputError(f"unknown suite {args.suite!r}; choose from {', '.join(suites.SUITES)}")
    kwargs = {**_SUITE_KWARGS[args.suite](args), "seed": args.seed}
    if args.suite in ("monoid", "prop1"):
        kwargs["budget"] = EnumerationBudget.from_env(max_n=args.budget_n)
    rep = suites.SUITES[args.suite](**kwargs)
    payload = rep.payload()
    _emit(args, payload)
    return EXIT_OK if rep.ok else EXIT_VIOLATION


# -- parser --------------------------------------------------------------------

def _rational(text: str) -> Fraction:
    try:
        q = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}") from None
    return q


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--relation", action="append", help="relation JSON (repeatable)")
    common.add_argument("--morphism", action="append", help="morphism JSON (repeatable)")
    common.add_argument("--out", help="output path")
    common.add_argument("--relation-out", help="write the output morphism's source relation here")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--trials", type=int, default=None)
    common.add_argument("--delta", type=_rational, default=None, help="perturbation size, e.g. 1/20")

    parser = argparse.ArgumentParser(prog="sofickit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-relation", parents=[common], help="random relation with class-constant weights")
    p.add_argument("--atoms", type=int, default=8)
    p.add_argument("--max-den", type=int, default=60)
    p.add_argument("--min-class", type=int, default=1)
    p.set_defaults(func=cmd_gen_relation)

    for name, func, text in (("embed", cmd_embed, "exact embedding on a random carrier"),
                             ("perturb", cmd_perturb, "perturb a morphism by --delta"),
                             ("check", cmd_check, "defects of a morphism")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.set_defaults(func=func)

    p = sub.add_parser("combine", parents=[common], help="apply a combinator")
    p.add_argument("kind", choices=["mix", "restrict", "product", "extend", "reconstruct", "trim"])
    p.add_argument("--weights", help="comma-separated integer mixing weights")
    p.add_argument("--subset", help="comma-separated atom ids")
    p.set_defaults(func=cmd_combine)

    p = sub.add_parser("props", parents=[common], help="run a property suite")
    p.add_argument("--suite", required=True)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--exhaustive", action="store_true")
    p.add_argument("--budget-n", type=int, default=None, help="largest n to enumerate")
    p.set_defaults(func=cmd_props)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command in ("embed", "combine") and args.trials is None:
        args.trials = 20
    try:
        return args.func(args)
    except (InputError, SofickitError, OSError, KeyError, TypeError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
