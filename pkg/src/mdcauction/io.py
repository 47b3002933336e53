"""File formats: scenario/fixture/params JSON, CSV output, text reports.

JSON numbers are parsed as Decimals so fixed-point conversion is exact.
Unknown fields are rejected, and every diagnostic names the offending
field.  CSV output uses commas, a dot decimal point, a header row and
LF line endings; money is rendered with exactly three decimals, so
files are bit-identical across platforms.
"""

from __future__ import annotations

import json
from dataclasses import asdict
from datetime import datetime, timezone
from decimal import Decimal

from .errors import ValidationError
from .mechanisms import AuctionResult
from .model import Bid, Buyer, ResourceVector, Seller
from .money import SCALE, format_milli, to_milli
from .scenario import GeneratorParams, MechanismConfig, Scenario
from .simlab import ComparisonReport, RunMetrics


def load_json(source) -> dict:
    """Read a JSON object from a path (or importlib.resources traversable)."""
    try:
        with source.open("r", encoding="utf-8") if hasattr(source, "open") else open(
            source, "r", encoding="utf-8"
        ) as handle:
            doc = json.load(handle, parse_float=Decimal)
    except OSError as exc:
        raise ValidationError(str(source), f"cannot read file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(str(source), f"invalid JSON at line {exc.lineno}") from exc
    if not isinstance(doc, dict):
        raise ValidationError(str(source), "top-level value must be an object")
    return doc


def detect_kind(doc: dict) -> str:
    if "items_per_round" in doc or "budgets" in doc:
        return "fixture"
    if "n_buyers" in doc:
        return "params"
    return "scenario"


def _reject_unknown(doc: dict, allowed: set[str], prefix: str) -> None:
    for key in doc:
        if key not in allowed:
            raise ValidationError(f"{prefix}{key}", "unknown field")


def _require(doc: dict, key: str, prefix: str):
    if key not in doc:
        raise ValidationError(f"{prefix}{key}", "required field is missing")
    return doc[key]


def _int_value(value, field: str) -> int:
    if isinstance(value, bool):
        raise ValidationError(field, "expected an integer")
    if isinstance(value, int):
        return value
    if isinstance(value, Decimal) and value == value.to_integral_value():
        return int(value)
    raise ValidationError(field, "expected an integer")


def _money_value(value, field: str) -> int:
    amount = to_milli(value, field)
    if amount < 0:
        raise ValidationError(field, "must be >= 0")
    return amount


def _vector(value, field: str, dimensions: int | None = None) -> ResourceVector:
    if not isinstance(value, list):
        raise ValidationError(field, "expected an array of quantities")
    units = []
    for k, item in enumerate(value):
        units.append(_money_value(item, f"{field}[{k}]"))
    if dimensions is not None and len(units) != dimensions:
        raise ValidationError(field, f"expected {dimensions} components, got {len(units)}")
    return ResourceVector(tuple(units))


def _int_range(value, field: str) -> tuple[int, int]:
    if not isinstance(value, list) or len(value) != 2:
        raise ValidationError(field, "expected [low, high]")
    return (_int_value(value[0], f"{field}[0]"), _int_value(value[1], f"{field}[1]"))


_MECHANISM_KEYS = {"gamma", "scope", "tie_rule", "pricing", "solver"}


def parse_mechanism(doc: dict, prefix: str = "mechanism.") -> MechanismConfig:
    _reject_unknown(doc, _MECHANISM_KEYS, prefix)
    kwargs = {}
    if "gamma" in doc:
        gamma = doc["gamma"]
        if isinstance(gamma, bool) or not isinstance(gamma, (int, float, Decimal)):
            raise ValidationError(f"{prefix}gamma", "expected a number")
        kwargs["gamma"] = float(gamma)
    for key in ("scope", "tie_rule", "pricing", "solver"):
        if key in doc:
            if not isinstance(doc[key], str):
                raise ValidationError(f"{prefix}{key}", "expected a string")
            kwargs[key] = doc[key]
    return MechanismConfig(**kwargs)


_GENERATOR_KEYS = {
    "n_buyers",
    "m_sellers",
    "horizon",
    "seed",
    "dimensions",
    "demand_range",
    "bid_range",
    "budget_range",
    "capacity_range",
    "period_capacity_range",
    "ask_range",
}


def parse_generator(doc: dict, prefix: str = "generator.") -> GeneratorParams:
    _reject_unknown(doc, _GENERATOR_KEYS, prefix)
    kwargs = {
        "n_buyers": _int_value(_require(doc, "n_buyers", prefix), f"{prefix}n_buyers"),
        "m_sellers": _int_value(_require(doc, "m_sellers", prefix), f"{prefix}m_sellers"),
        "horizon": _int_value(_require(doc, "horizon", prefix), f"{prefix}horizon"),
    }
    if "seed" in doc:
        kwargs["seed"] = _int_value(doc["seed"], f"{prefix}seed")
    if "dimensions" in doc:
        kwargs["dimensions"] = _int_value(doc["dimensions"], f"{prefix}dimensions")
    for key in ("demand_range", "bid_range", "budget_range", "capacity_range", "ask_range"):
        if key in doc:
            kwargs[key] = _int_range(doc[key], f"{prefix}{key}")
    if doc.get("period_capacity_range") is not None:
        kwargs["period_capacity_range"] = _int_range(
            doc["period_capacity_range"], f"{prefix}period_capacity_range"
        )
    return GeneratorParams(**kwargs)


def parse_params_file(doc: dict) -> tuple[GeneratorParams, MechanismConfig | None]:
    """Parse a generator-params file; may carry a mechanism block."""
    mechanism = None
    if "mechanism" in doc:
        block = doc["mechanism"]
        if not isinstance(block, dict):
            raise ValidationError("mechanism", "expected an object")
        mechanism = parse_mechanism(block)
        doc = {k: v for k, v in doc.items() if k != "mechanism"}
    return parse_generator(doc, prefix=""), mechanism


_SCENARIO_KEYS = {"buyers", "sellers", "horizon", "dimensions", "bids", "generator", "mechanism"}


def parse_scenario(doc: dict) -> Scenario:
    _reject_unknown(doc, _SCENARIO_KEYS, "scenario.")
    mechanism = MechanismConfig()
    if "mechanism" in doc:
        if not isinstance(doc["mechanism"], dict):
            raise ValidationError("mechanism", "expected an object")
        mechanism = parse_mechanism(doc["mechanism"])

    if "generator" in doc:
        if not isinstance(doc["generator"], dict):
            raise ValidationError("generator", "expected an object")
        for key in ("buyers", "sellers", "bids", "horizon", "dimensions"):
            if key in doc:
                raise ValidationError(key, "must be omitted when a generator is present")
        params = parse_generator(doc["generator"])
        return Scenario(
            buyers=(),
            sellers=(),
            horizon=params.horizon,
            dimensions=params.dimensions,
            generator=params,
            mechanism=mechanism,
        )

    buyers_doc = _require(doc, "buyers", "scenario.")
    sellers_doc = _require(doc, "sellers", "scenario.")
    horizon = _int_value(_require(doc, "horizon", "scenario."), "horizon")
    bids_doc = _require(doc, "bids", "scenario.")
    if not isinstance(buyers_doc, list):
        raise ValidationError("buyers", "expected an array")
    if not isinstance(sellers_doc, list):
        raise ValidationError("sellers", "expected an array")
    if not isinstance(bids_doc, list):
        raise ValidationError("bids", "expected an array of per-buyer rows")

    dimensions = None
    if "dimensions" in doc:
        dimensions = _int_value(doc["dimensions"], "dimensions")

    sellers = []
    for j, entry in enumerate(sellers_doc):
        if not isinstance(entry, dict):
            raise ValidationError(f"sellers[{j}]", "expected an object")
        _reject_unknown(entry, {"id", "round_capacity", "period_capacity", "ask"}, f"sellers[{j}].")
        seller_id = _int_value(_require(entry, "id", f"sellers[{j}]."), f"sellers[{j}].id")
        round_cap = _vector(
            _require(entry, "round_capacity", f"sellers[{j}]."),
            f"sellers[{j}].round_capacity",
            dimensions,
        )
        if dimensions is None:
            dimensions = len(round_cap)
        period_cap = None
        if entry.get("period_capacity") is not None:
            period_cap = _vector(
                entry["period_capacity"], f"sellers[{j}].period_capacity", dimensions
            )
        ask = None
        if entry.get("ask") is not None:
            ask = _money_value(entry["ask"], f"sellers[{j}].ask")
        sellers.append(Seller(seller_id, round_cap, period_cap, ask))

    buyers = []
    for i, entry in enumerate(buyers_doc):
        if not isinstance(entry, dict):
            raise ValidationError(f"buyers[{i}]", "expected an object")
        _reject_unknown(entry, {"id", "budget"}, f"buyers[{i}].")
        buyer_id = _int_value(_require(entry, "id", f"buyers[{i}]."), f"buyers[{i}].id")
        budget = _money_value(_require(entry, "budget", f"buyers[{i}]."), f"buyers[{i}].budget")
        buyers.append(Buyer(buyer_id, budget))

    matrix = []
    if len(bids_doc) != len(buyers):
        raise ValidationError("bids", f"expected {len(buyers)} rows, got {len(bids_doc)}")
    for i, row in enumerate(bids_doc):
        if not isinstance(row, list):
            raise ValidationError(f"bids[{i}]", "expected an array of per-round bids")
        parsed_row = []
        for l, entry in enumerate(row, start=1):
            field = f"bids[{i}][{l - 1}]"
            if not isinstance(entry, dict):
                raise ValidationError(field, "expected an object with amount and demand")
            _reject_unknown(entry, {"amount", "demand"}, f"{field}.")
            amount = _money_value(_require(entry, "amount", f"{field}."), f"{field}.amount")
            demand = _vector(_require(entry, "demand", f"{field}."), f"{field}.demand", dimensions)
            if dimensions is None:
                dimensions = len(demand)
            parsed_row.append(Bid(i, l, amount, demand))
        matrix.append(tuple(parsed_row))

    return Scenario(
        buyers=tuple(buyers),
        sellers=tuple(sellers),
        horizon=horizon,
        dimensions=dimensions if dimensions is not None else 3,
        bid_matrix=tuple(matrix),
        mechanism=mechanism,
    )


_FIXTURE_KEYS = {"budgets", "bids", "items_per_round"}


def parse_fixture(doc: dict) -> tuple[list, list, int]:
    """Parse a replay fixture: bid matrix rows, budgets, items per round."""
    _reject_unknown(doc, _FIXTURE_KEYS, "fixture.")
    budgets = _require(doc, "budgets", "fixture.")
    bids = _require(doc, "bids", "fixture.")
    items = _int_value(_require(doc, "items_per_round", "fixture."), "items_per_round")
    if not isinstance(budgets, list):
        raise ValidationError("budgets", "expected an array")
    if not isinstance(bids, list) or not all(isinstance(r, list) for r in bids):
        raise ValidationError("bids", "expected an array of per-buyer rows")
    return bids, budgets, items


def _milli_to_json(amount: int):
    if amount % SCALE == 0:
        return amount // SCALE
    return float(format_milli(amount))


def scenario_to_doc(scenario: Scenario, materialize: bool = False) -> dict:
    """JSON-ready form of a scenario.

    Generator scenarios round-trip as their generator block unless
    ``materialize`` is set, in which case the concrete draw is written
    out; such a file replays verbatim (the bids are no longer treated
    as adjustable valuations when reloaded).
    """
    mechanism = asdict(scenario.mechanism)
    if scenario.generator is not None and not materialize:
        generator = {k: v for k, v in asdict(scenario.generator).items() if v is not None}
        generator["demand_range"] = list(generator["demand_range"])
        generator["bid_range"] = list(generator["bid_range"])
        generator["budget_range"] = list(generator["budget_range"])
        generator["capacity_range"] = list(generator["capacity_range"])
        generator["ask_range"] = list(generator["ask_range"])
        if "period_capacity_range" in generator:
            generator["period_capacity_range"] = list(generator["period_capacity_range"])
        return {"generator": generator, "mechanism": mechanism}
    if not scenario.materialized:
        raise ValidationError("scenario", "cannot materialize without running the generator")
    sellers = []
    for seller in scenario.sellers:
        entry = {
            "id": seller.id,
            "round_capacity": [_milli_to_json(u) for u in seller.round_capacity],
        }
        if seller.period_capacity is not None:
            entry["period_capacity"] = [_milli_to_json(u) for u in seller.period_capacity]
        if seller.ask is not None:
            entry["ask"] = _milli_to_json(seller.ask)
        sellers.append(entry)
    return {
        "dimensions": scenario.dimensions,
        "horizon": scenario.horizon,
        "buyers": [{"id": b.id, "budget": _milli_to_json(b.budget)} for b in scenario.buyers],
        "sellers": sellers,
        "bids": [
            [
                {
                    "amount": _milli_to_json(bid.amount),
                    "demand": [_milli_to_json(u) for u in bid.demand],
                }
                for bid in row
            ]
            for row in scenario.bid_matrix
        ],
        "mechanism": mechanism,
    }


def dump_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# CSV and text reports


def _timestamp() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def header_lines(command: str, meta: dict[str, str], timestamp: bool) -> list[str]:
    pairs = " ".join(f"{k}={v}" for k, v in meta.items())
    lines = [f"# mdcauction {command} {pairs}".rstrip()]
    if timestamp:
        lines.append(f"# generated_at={_timestamp()}")
    return lines


def _winners_cell(outcome) -> str:
    return ";".join(f"{b}:{s}" for b, s in outcome.winners)


def result_csv_lines(
    result: AuctionResult,
    command: str,
    meta: dict[str, str],
    timestamp: bool,
    metrics: RunMetrics | None = None,
) -> list[str]:
    lines = header_lines(command, meta, timestamp)
    lines.append("round,utility,revenue,winners")
    for outcome in result.rounds:
        lines.append(
            f"{outcome.round},{format_milli(outcome.utility)},"
            f"{format_milli(outcome.revenue)},{_winners_cell(outcome)}"
        )
    lines.append(
        f"total,{format_milli(result.total_utility)},{format_milli(result.total_revenue)},"
    )
    if metrics is not None:
        lines.append(f"# allocation_ratio={metrics.allocation_ratio:.4f}")
        exhaustion = ";".join(
            f"{buyer}={round_ if round_ is not None else 'never'}"
            for buyer, round_ in sorted(metrics.exhaustion_round.items())
        )
        lines.append(f"# exhaustion_rounds={exhaustion or '-'}")
    return lines


def run_report_lines(result: AuctionResult, metrics: RunMetrics) -> list[str]:
    lines = []
    for outcome in result.rounds:
        winners = ",".join(f"{b}:{s}" for b, s in outcome.winners) or "-"
        lines.append(
            f"l={outcome.round} winners={winners} utility={format_milli(outcome.utility)}"
            f" revenue={format_milli(outcome.revenue)}"
        )
    lines.append(
        f"total utility={format_milli(result.total_utility)}"
        f" revenue={format_milli(result.total_revenue)}"
    )
    lines.append(f"allocation_ratio={metrics.allocation_ratio:.4f}")
    exhaustion = " ".join(
        f"{buyer}={round_ if round_ is not None else 'never'}"
        for buyer, round_ in sorted(metrics.exhaustion_round.items())
    )
    lines.append(f"exhaustion_rounds: {exhaustion or '-'}")
    return lines


def replay_report_lines(result: AuctionResult) -> list[str]:
    lines = []
    for outcome in result.rounds:
        winners = ",".join(str(b) for b, _ in outcome.winners) or "-"
        lines.append(
            f"l={outcome.round} winners={winners} utility={format_milli(outcome.utility)}"
        )
    lines.append(f"total={format_milli(result.total_utility)}")
    return lines


def compare_csv_lines(
    report: ComparisonReport, meta: dict[str, str], timestamp: bool
) -> list[str]:
    lines = header_lines("compare", meta, timestamp)
    lines.append(
        "seed,mechanism,revenue,utility,allocation_ratio,exhausted_buyers,mean_exhaustion_round"
    )
    for record in report.records:
        mean_ex = "" if record.mean_exhaustion_round is None else f"{record.mean_exhaustion_round:.2f}"
        lines.append(
            f"{record.seed},{record.mechanism},{format_milli(record.revenue)},"
            f"{format_milli(record.utility)},{record.allocation_ratio:.4f},"
            f"{record.exhausted_buyers},{mean_ex}"
        )
    return lines


def _pct(value: float) -> str:
    if value == float("inf"):
        return "inf"
    return f"{value:+.2f}%"


def compare_summary_lines(report: ComparisonReport) -> list[str]:
    lines = [
        f"seeds={report.n_seeds} rng={report.rng_name} base_seed={report.params.seed}"
        f" bootstrap_resamples={report.bootstrap_resamples}"
    ]
    for stat in report.stats:
        lines.append(
            f"{stat.mechanism}: mean_revenue={stat.mean_revenue:.3f}"
            f" median_revenue={stat.median_revenue:.3f}"
        )
    for pair in report.pairwise:
        lines.append(
            f"{pair.mechanism_a} vs {pair.mechanism_b}: improvement={_pct(pair.improvement_pct)}"
            f" ci95=[{_pct(pair.ci_low)},{_pct(pair.ci_high)}]"
            f" win_rate={pair.win_rate:.2f} ties={pair.ties}"
        )
    return lines


def write_lines(path, lines: list[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("\n".join(lines) + "\n")
