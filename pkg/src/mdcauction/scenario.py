"""Scenario definition: participants, horizon, bid source, mechanism settings.

A scenario either carries an explicit bid matrix or generator
parameters, never both as independent inputs.  Explicit matrices are
strategic trajectories and are taken verbatim by every mechanism;
generated matrices are per-round true valuations that budget-aware
mechanisms may adjust (``bids_are_valuations``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import ValidationError
from .model import Bid, Buyer, Seller

SOLVERS = ("exact", "greedy")
PRICING_MODES = ("first_price", "critical_value")
TIE_RULES = ("lowest_index",)
ADJUSTMENT_SCOPES = ("winners_only", "all_buyers")


@dataclass(frozen=True)
class MechanismConfig:
    """Knobs shared by the mechanisms.

    ``gamma`` is the punishment exponent: a previous winner's effective
    bid is its clamped true bid times (remaining/initial)**gamma.
    gamma = 0 disables adjustment entirely.
    """

    gamma: float = 1.0
    scope: str = "winners_only"
    tie_rule: str = "lowest_index"
    pricing: str = "first_price"
    solver: str = "exact"

    def __post_init__(self):
        if not math.isfinite(self.gamma) or self.gamma < 0:
            raise ValidationError("mechanism.gamma", "must be finite and >= 0")
        if self.scope not in ADJUSTMENT_SCOPES:
            raise ValidationError("mechanism.scope", f"must be one of {ADJUSTMENT_SCOPES}")
        if self.tie_rule not in TIE_RULES:
            raise ValidationError("mechanism.tie_rule", f"must be one of {TIE_RULES}")
        if self.pricing not in PRICING_MODES:
            raise ValidationError("mechanism.pricing", f"must be one of {PRICING_MODES}")
        if self.solver not in SOLVERS:
            raise ValidationError("mechanism.solver", f"must be one of {SOLVERS}")


def _check_range(name: str, rng: tuple[int, int]) -> tuple[int, int]:
    lo, hi = rng
    if lo < 0:
        raise ValidationError(name, "bounds must be >= 0")
    if lo > hi:
        raise ValidationError(name, f"lower bound {lo} exceeds upper bound {hi}")
    return (int(lo), int(hi))


@dataclass(frozen=True)
class GeneratorParams:
    """Uniform-integer workload generator settings.

    All ranges are inclusive bounds in whole units (converted to
    milli-units when the scenario is materialized).  Budgets and seller
    properties are drawn once; bid amounts and demands are drawn per
    buyer per round.
    """

    n_buyers: int
    m_sellers: int
    horizon: int
    seed: int = 0
    dimensions: int = 3
    demand_range: tuple[int, int] = (1, 5)
    bid_range: tuple[int, int] = (1, 20)
    budget_range: tuple[int, int] = (50, 200)
    capacity_range: tuple[int, int] = (10, 30)
    period_capacity_range: tuple[int, int] | None = None
    ask_range: tuple[int, int] = (1, 10)

    def __post_init__(self):
        if self.n_buyers < 0:
            raise ValidationError("n_buyers", "must be >= 0")
        if self.m_sellers < 0:
            raise ValidationError("m_sellers", "must be >= 0")
        if self.horizon < 1:
            raise ValidationError("horizon", "must be >= 1")
        if self.dimensions < 1:
            raise ValidationError("dimensions", "must be >= 1")
        object.__setattr__(self, "demand_range", _check_range("demand_range", self.demand_range))
        object.__setattr__(self, "bid_range", _check_range("bid_range", self.bid_range))
        object.__setattr__(self, "budget_range", _check_range("budget_range", self.budget_range))
        object.__setattr__(
            self, "capacity_range", _check_range("capacity_range", self.capacity_range)
        )
        if self.period_capacity_range is not None:
            object.__setattr__(
                self,
                "period_capacity_range",
                _check_range("period_capacity_range", self.period_capacity_range),
            )
        object.__setattr__(self, "ask_range", _check_range("ask_range", self.ask_range))


@dataclass(frozen=True)
class Scenario:
    """A full experiment input.

    Either materialized (concrete buyers, sellers and bid matrix, with
    ``generator`` kept only as provenance) or pending generation
    (``bid_matrix`` is None and ``generator`` holds the parameters).
    ``bid_matrix[i][l-1]`` is buyer i's bid in round l.
    """

    buyers: tuple[Buyer, ...]
    sellers: tuple[Seller, ...]
    horizon: int
    dimensions: int
    bid_matrix: tuple[tuple[Bid, ...], ...] | None = None
    generator: GeneratorParams | None = None
    mechanism: MechanismConfig = MechanismConfig()
    bids_are_valuations: bool = False

    def __post_init__(self):
        if self.horizon < 1:
            raise ValidationError("horizon", "must be >= 1")
        if self.dimensions < 1:
            raise ValidationError("dimensions", "must be >= 1")
        for position, buyer in enumerate(self.buyers):
            if buyer.id != position:
                raise ValidationError(
                    f"buyers[{position}].id", f"ids must be dense 0-based, got {buyer.id}"
                )
        seen_sellers = set()
        for position, seller in enumerate(self.sellers):
            if seller.id in seen_sellers:
                raise ValidationError(f"sellers[{position}].id", "duplicate seller id")
            seen_sellers.add(seller.id)
            if len(seller.round_capacity) != self.dimensions:
                raise ValidationError(
                    f"sellers[{position}].round_capacity",
                    f"expected {self.dimensions} components, got {len(seller.round_capacity)}",
                )
        if self.bid_matrix is None:
            if self.generator is None:
                raise ValidationError("bids", "either an explicit bid matrix or a generator is required")
            if self.buyers or self.sellers:
                raise ValidationError(
                    "buyers", "must be omitted when a generator drives the scenario"
                )
            return
        if len(self.bid_matrix) != len(self.buyers):
            raise ValidationError(
                "bids", f"expected {len(self.buyers)} rows, got {len(self.bid_matrix)}"
            )
        for i, row in enumerate(self.bid_matrix):
            if len(row) != self.horizon:
                raise ValidationError(
                    f"bids[{i}]", f"expected {self.horizon} rounds, got {len(row)}"
                )
            for l, bid in enumerate(row, start=1):
                if bid.buyer_id != i:
                    raise ValidationError(f"bids[{i}][{l - 1}]", "buyer_id mismatch")
                if bid.round != l:
                    raise ValidationError(f"bids[{i}][{l - 1}]", "round index mismatch")
                if len(bid.demand) != self.dimensions:
                    raise ValidationError(
                        f"bids[{i}][{l - 1}].demand",
                        f"expected {self.dimensions} components, got {len(bid.demand)}",
                    )

    @property
    def materialized(self) -> bool:
        return self.bid_matrix is not None

    def with_mechanism(self, mechanism: MechanismConfig) -> "Scenario":
        return replace(self, mechanism=mechanism)


def new_ledger(scenario: Scenario):
    """Fresh ledger for a materialized scenario: full budgets, full period capacity."""
    from .model import AuctionLedger

    if not scenario.materialized:
        raise ValidationError("scenario", "cannot open a ledger before the generator runs")
    return AuctionLedger.new(scenario.buyers, scenario.sellers)
