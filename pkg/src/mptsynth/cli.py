"""Command-line driver.

Exit codes: 0 success, 1 no controller found, 2 input error, 3 resource
cap hit.  Reports go to stdout, human-readable by default or JSON with
--json.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import os
import sys
from typing import IO, Iterator, Optional, Sequence

from mptsynth.analysis import (
    accepting_components,
    probability_of_satisfaction,
    reachability_probability,
)
from mptsynth.automata import (
    HoaError,
    StateBudgetError,
    export_hoa,
    import_hoa,
    ltl_to_dra,
)
from mptsynth.logic import LtlSyntaxError, parse_ltl
from mptsynth.model import (
    ModelError,
    Mpts,
    apply_controller,
    load_model,
    save_model,
    validate,
)
from mptsynth.philosophers import generate_philosophers
from mptsynth.product import build_product, product_chain, product_to_dot
from mptsynth.synthesis import (
    CandidateCapError,
    load_controller,
    save_controller,
    synthesize,
    verify_controller,
)

EXIT_OK = 0
EXIT_NO_CONTROLLER = 1
EXIT_INPUT_ERROR = 2
EXIT_RESOURCE_CAP = 3


@contextlib.contextmanager
def _open_in(path: str) -> Iterator[IO[str]]:
    if path == "-":
        yield sys.stdin
    else:
        with open(path, "r", encoding="utf-8") as fp:
            yield fp


@contextlib.contextmanager
def _open_out(path: str) -> Iterator[IO[str]]:
    if path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8") as fp:
            yield fp


def _load_model(path: str) -> Mpts:
    with _open_in(path) as fp:
        model = load_model(fp)
    problems = validate(model)
    if problems:
        raise ModelError("invalid model: " + "; ".join(problems))
    return model


def _emit(report: dict, as_json: bool, lines: Sequence[str]) -> None:
    if as_json:
        print(json.dumps(report, indent=2))
    else:
        for line in lines:
            print(line)


def _synth_threads() -> int:
    raw = os.environ.get("MPTS_SYNTH_THREADS", "1")
    try:
        value = int(raw)
    except ValueError:
        raise ModelError(f"MPTS_SYNTH_THREADS must be an integer, got {raw!r}")
    if value < 1:
        raise ModelError("MPTS_SYNTH_THREADS must be at least 1")
    return value


def _cmd_validate(args) -> int:
    with _open_in(args.model) as fp:
        model = load_model(fp)
    problems = validate(model)
    report = {"valid": not problems, "diagnostics": problems}
    _emit(report, args.json,
          ["model is valid"] if not problems else problems)
    return EXIT_OK if not problems else EXIT_INPUT_ERROR


def _cmd_translate(args) -> int:
    formula = parse_ltl(args.ltl)
    dra = ltl_to_dra(formula, state_budget=args.state_budget)
    with _open_out(args.out) as fp:
        fp.write(export_hoa(dra))
    return EXIT_OK


def _cmd_example(args) -> int:
    if args.name != "philosophers":
        raise ModelError(f"unknown example {args.name!r}")
    model = generate_philosophers()
    with _open_out(args.out) as fp:
        save_model(model, fp)
    return EXIT_OK


def _check_pipeline(args):
    model = _load_model(args.model)
    with _open_in(args.controller) as fp:
        controller = load_controller(fp)
    formula = parse_ltl(args.ltl, set(model.atomic_props))
    dra = ltl_to_dra(formula, ap=sorted(model.atomic_props))
    cs = apply_controller(model, controller)
    g = build_product(cs, dra)
    return model, controller, formula, dra, cs, g


def _cmd_check(args) -> int:
    _, _, _, _, _, g = _check_pipeline(args)
    acs = accepting_components(g)
    probability = reachability_probability(product_chain(g), acs)[g.initial]
    if args.dot:
        with _open_out(args.dot) as fp:
            fp.write(product_to_dot(g, accepting=acs))
    ac_list = sorted(f"{x}|{q}" for x, q in acs)
    report = {"probability": probability, "accepting_states": ac_list}
    _emit(report, args.json,
          [f"probability {probability:.6f}",
           f"accepting component states ({len(ac_list)}):"]
          + [f"  {s}" for s in ac_list])
    return EXIT_OK


def _cmd_product(args) -> int:
    _, _, _, _, _, g = _check_pipeline(args)
    acs = accepting_components(g)
    with _open_out(args.dot) as fp:
        fp.write(product_to_dot(g, accepting=acs))
    return EXIT_OK


def _cmd_synthesize(args) -> int:
    _synth_threads()  # validated; candidate evaluation is sequential
    model = _load_model(args.model)
    formula = parse_ltl(args.ltl, set(model.atomic_props))
    controller = synthesize(model, formula, args.threshold,
                            candidate_cap=args.candidate_cap,
                            state_budget=args.state_budget)
    if controller is None:
        _emit({"found": False}, args.json, ["no controller meets the threshold"])
        return EXIT_NO_CONTROLLER
    probability = verify_controller(model, controller, formula)
    if args.out:
        with _open_out(args.out) as fp:
            save_controller(controller, fp)
    choices = {x: list(a) for x, a in controller.choices.items()}
    report = {"found": True, "probability": probability, "controller": choices}
    _emit(report, args.json,
          [f"controller found with probability {probability:.6f}"]
          + [f"  {x} -> ({','.join(a)})" for x, a in sorted(choices.items())])
    return EXIT_OK


def _cmd_simulate(args) -> int:
    from mptsynth.sim import estimate_probability

    _, _, _, _, _, g = _check_pipeline(args)
    result = estimate_probability(g, args.runs, args.seed)
    report = {
        "estimate": result.estimate,
        "std_error": result.std_error,
        "runs": result.runs,
        "censored": result.censored,
        "generator": result.generator,
    }
    _emit(report, args.json,
          [f"estimate {result.estimate:.6f} (standard error "
           f"{result.std_error:.6f}, {result.runs} runs, "
           f"{result.censored} censored, generator {result.generator})"])
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mptsynth",
        description="Controller synthesis for multi-agent probabilistic "
                    "discrete-event systems under LTL specifications.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a model file against the "
                                        "model invariants")
    p.add_argument("--model", default="-", help="model JSON (default stdin)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("translate", help="translate an LTL formula to a "
                                         "Rabin automaton in HOA format")
    p.add_argument("--ltl", required=True)
    p.add_argument("--out", default="-", help="output HOA file (default stdout)")
    p.add_argument("--state-budget", type=int, default=10**6)
    p.set_defaults(func=_cmd_translate)

    p = sub.add_parser("check", help="probability that a controlled system "
                                     "satisfies a formula")
    p.add_argument("--model", required=True)
    p.add_argument("--controller", required=True)
    p.add_argument("--ltl", required=True)
    p.add_argument("--dot", help="also write the product graph with "
                                 "accepting components highlighted")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("product", help="export the product graph as DOT")
    p.add_argument("--model", required=True)
    p.add_argument("--controller", required=True)
    p.add_argument("--ltl", required=True)
    p.add_argument("--dot", default="-", help="output file (default stdout)")
    p.set_defaults(func=_cmd_product)

    p = sub.add_parser("synthesize", help="search for a controller meeting "
                                          "a probability threshold")
    p.add_argument("--model", required=True)
    p.add_argument("--ltl", required=True)
    p.add_argument("--threshold", type=float, required=True)
    p.add_argument("--out", help="write the controller JSON here")
    p.add_argument("--candidate-cap", type=int, default=10**7)
    p.add_argument("--state-budget", type=int, default=10**6)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_synthesize)

    p = sub.add_parser("simulate", help="Monte Carlo estimate of the "
                                        "satisfaction probability")
    p.add_argument("--model", required=True)
    p.add_argument("--controller", required=True)
    p.add_argument("--ltl", required=True)
    p.add_argument("--runs", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("example", help="emit a bundled example model")
    p.add_argument("name", choices=["philosophers"])
    p.add_argument("--out", default="-", help="output file (default stdout)")
    p.set_defaults(func=_cmd_example)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT_ERROR if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (ModelError, LtlSyntaxError, HoaError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except (StateBudgetError, CandidateCapError) as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_RESOURCE_CAP


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
