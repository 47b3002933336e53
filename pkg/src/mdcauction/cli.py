"""Command-line entry point.

Commands: ``replay`` (worked-example fixtures), ``run`` (one mechanism
on one scenario), ``compare`` (paired multi-seed ensembles), ``gen``
(materialize or pin a generator scenario), ``validate`` (schema check).
Outputs are deterministic given the input file and flags; the only
wall-clock dependence is the optional timestamp header line, disabled
with ``--no-header``.  Exit codes: 0 success, 1 expectation failure,
2 input error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from importlib import resources
from pathlib import Path

from . import io
from .errors import ValidationError
from .mechanisms import replay
from .money import format_milli, to_milli
from .rng import GENERATOR_NAME
from .scenario import MechanismConfig, Scenario
from .simlab import MECHANISMS, MechanismSpec, compare, evaluate, materialize


def _resolve_input(name: str, kind: str) -> object:
    """A path on disk, or the name of a bundled fixture/profile."""
    path = Path(name)
    if path.exists():
        return path
    subdir = "fixtures" if kind == "fixture" else "profiles"
    bundled = resources.files("mdcauction").joinpath(f"data/{subdir}/{name}.json")
    if bundled.is_file():
        return bundled
    raise ValidationError(name, f"no such file and no bundled {kind} with that name")


def _parse_expect(expr: str) -> int:
    key, _, value = expr.partition("=")
    if key != "total" or not value:
        raise ValidationError("--expect", "expected the form total=<amount>")
    return to_milli(value, "--expect total")


def _mechanism_override(config, args):
    updates = {}
    if getattr(args, "gamma", None) is not None:
        updates["gamma"] = args.gamma
    if getattr(args, "solver", None) is not None:
        updates["solver"] = args.solver
    return replace(config, **updates) if updates else config


def _emit(lines: list[str]) -> None:
    print("\n".join(lines))


def cmd_replay(args) -> int:
    doc = io.load_json(_resolve_input(args.fixture, "fixture"))
    bids, budgets, items = io.parse_fixture(doc)
    result = replay(bids, budgets, items)
    _emit(io.replay_report_lines(result))

    if args.baseline is not None:
        base_doc = io.load_json(_resolve_input(args.baseline, "fixture"))
        base = replay(*io.parse_fixture(base_doc))
        if base.total_utility == 0:
            print("improvement=n/a (baseline total is 0)")
        else:
            gain = (
                (result.total_utility - base.total_utility) / base.total_utility * 100.0
            )
            print(
                f"improvement={gain:+.2f}% vs baseline total={format_milli(base.total_utility)}"
            )

    if args.out:
        meta = {"fixture": args.fixture, "items_per_round": str(items)}
        io.write_lines(
            args.out, io.result_csv_lines(result, "replay", meta, not args.no_header)
        )

    if args.expect is not None:
        expected = _parse_expect(args.expect)
        if result.total_utility != expected:
            print(
                f"expect failed: total={format_milli(expected)}"
                f" actual={format_milli(result.total_utility)}",
                file=sys.stderr,
            )
            return 1
        print(f"expect ok: total={format_milli(expected)}")
    return 0


def cmd_run(args) -> int:
    scenario = io.parse_scenario(io.load_json(_resolve_input(args.scenario, "scenario")))
    scenario = scenario.with_mechanism(_mechanism_override(scenario.mechanism, args))
    if args.seed is not None:
        if scenario.generator is None:
            raise ValidationError("--seed", "scenario has explicit bids; a seed cannot apply")
        scenario = replace(scenario, generator=replace(scenario.generator, seed=args.seed))
    scenario = materialize(scenario)
    evaluation = evaluate(scenario, args.mechanism)

    print(f"scenario: {args.scenario}")
    mech = scenario.mechanism
    print(
        f"mechanism: {args.mechanism} (solver={mech.solver}, pricing={mech.pricing},"
        f" gamma={mech.gamma:g}, scope={mech.scope})"
    )
    _emit(io.run_report_lines(evaluation.result, evaluation.metrics))

    if args.out:
        meta = {
            "scenario": args.scenario,
            "mechanism": args.mechanism,
            "solver": mech.solver,
            "pricing": mech.pricing,
            "gamma": f"{mech.gamma:g}",
            "seed": str(scenario.generator.seed) if scenario.generator else "-",
            "rng": GENERATOR_NAME if scenario.generator else "-",
        }
        io.write_lines(
            args.out,
            io.result_csv_lines(
                evaluation.result, "run", meta, not args.no_header, evaluation.metrics
            ),
        )
    return 0


def cmd_compare(args) -> int:
    params, mechanism = io.parse_params_file(
        io.load_json(_resolve_input(args.params, "profile"))
    )
    if args.seed is not None:
        params = replace(params, seed=args.seed)
    base_config = _mechanism_override(mechanism, args) if mechanism else None
    if base_config is None and (args.gamma is not None or args.solver is not None):
        base_config = _mechanism_override(MechanismConfig(), args)
    names = [name.strip() for name in args.mechanisms.split(",") if name.strip()]
    if not names:
        raise ValidationError("--mechanisms", "expected a comma-separated list")
    specs = [MechanismSpec(name, config=base_config) for name in names]
    report = compare(params, specs, args.seeds)
    _emit(io.compare_summary_lines(report))

    if args.out:
        meta = {
            "params": args.params,
            "seeds": str(args.seeds),
            "mechanisms": ";".join(names),
            "base_seed": str(params.seed),
            "rng": GENERATOR_NAME,
        }
        io.write_lines(args.out, io.compare_csv_lines(report, meta, not args.no_header))
    return 0


def cmd_gen(args) -> int:
    params, mechanism = io.parse_params_file(
        io.load_json(_resolve_input(args.params, "profile"))
    )
    if args.seed is not None:
        params = replace(params, seed=args.seed)
    scenario = Scenario(
        buyers=(),
        sellers=(),
        horizon=params.horizon,
        dimensions=params.dimensions,
        generator=params,
        mechanism=mechanism or MechanismConfig(),
    )
    if args.materialize:
        scenario = materialize(scenario)
    text = io.dump_json(io.scenario_to_doc(scenario, materialize=args.materialize))
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_validate(args) -> int:
    doc = io.load_json(Path(args.input))
    kind = io.detect_kind(doc)
    if kind == "fixture":
        io.parse_fixture(doc)
    elif kind == "params":
        io.parse_params_file(doc)
    else:
        io.parse_scenario(doc)
    print(f"ok: {kind}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mdcauction",
        description="Budget-aware multi-round resource auction simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_replay = sub.add_parser("replay", help="replay a worked-example fixture")
    p_replay.add_argument("fixture", help="fixture file or bundled name (table1, table2)")
    p_replay.add_argument("--baseline", help="second fixture to compute an improvement against")
    p_replay.add_argument("--expect", help="assert the total, e.g. total=26")
    p_replay.add_argument("--out", help="write per-round CSV here")
    p_replay.add_argument("--no-header", action="store_true", help="omit the timestamp header")
    p_replay.set_defaults(func=cmd_replay)

    p_run = sub.add_parser("run", help="run one mechanism on one scenario")
    p_run.add_argument("scenario", help="scenario file")
    p_run.add_argument(
        "--mechanism", default="mafl", choices=sorted(MECHANISMS), help="mechanism to run"
    )
    p_run.add_argument("--gamma", type=float, help="override the adjustment exponent")
    p_run.add_argument("--solver", choices=("exact", "greedy"), help="override the solver")
    p_run.add_argument("--seed", type=int, help="override the generator seed")
    p_run.add_argument("--out", help="write per-round CSV here")
    p_run.add_argument("--no-header", action="store_true", help="omit the timestamp header")
    p_run.set_defaults(func=cmd_run)

    p_cmp = sub.add_parser("compare", help="paired multi-seed mechanism comparison")
    p_cmp.add_argument("params", help="generator-params file or bundled profile (default, users40)")
    p_cmp.add_argument("--seeds", type=int, default=100, help="number of paired replicates")
    p_cmp.add_argument(
        "--mechanisms",
        default="mafl,repeated_srmra",
        help="comma-separated mechanism names",
    )
    p_cmp.add_argument("--gamma", type=float, help="override the adjustment exponent")
    p_cmp.add_argument("--solver", choices=("exact", "greedy"), help="override the solver")
    p_cmp.add_argument("--seed", type=int, help="override the base seed")
    p_cmp.add_argument("--out", help="write the per-seed CSV here")
    p_cmp.add_argument("--no-header", action="store_true", help="omit the timestamp header")
    p_cmp.set_defaults(func=cmd_compare)

    p_gen = sub.add_parser("gen", help="write a scenario file from generator params")
    p_gen.add_argument("params", help="generator-params file or bundled profile")
    p_gen.add_argument("--seed", type=int, help="override the generator seed")
    p_gen.add_argument("--out", help="output path (stdout when omitted)")
    p_gen.add_argument(
        "--materialize",
        action="store_true",
        help="write the concrete draw instead of the generator block"
        " (the result replays verbatim when reloaded)",
    )
    p_gen.set_defaults(func=cmd_gen)

    p_val = sub.add_parser("validate", help="check a scenario, fixture or params file")
    p_val.add_argument("input", help="file to validate")
    p_val.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
