"""Auction mechanisms.

``run_srmra`` clears one round: winner determination over the effective
bids, first-price payments, ledger charge.  ``run_repeated_srmra``
cycles it over the horizon with budget clamping only, which is the
baseline whose budgets burn out early.  ``run_mafl`` is the budget-aware
framework: before each round it shrinks the previous winners' bids in
proportion to their remaining budget, which stretches budgets across
the horizon.  ``replay`` is the deterministic desk engine for
unit-demand, single-pool examples, and ``run_double_auction`` is a
simplified bid/ask matching baseline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import InvariantViolation, ValidationError
from .model import Assignment, AuctionLedger, Bid, Buyer, ResourceVector, RoundOutcome, Seller
from .money import SCALE, scale_by_ratio_pow, to_milli
from .scenario import MechanismConfig, Scenario, new_ledger
from .wdp import WdpInstance, solve_exact, solve_greedy


@dataclass(frozen=True)
class AdjustmentPolicy:
    """How previous winners' bids shrink with their remaining budget.

    With ``winners_only`` scope, only buyers who won the previous round
    are adjusted; everyone else just gets the budget clamp.  With
    ``all_buyers`` every bid is scaled by (remaining/initial)**gamma.
    """

    gamma: float = 1.0
    scope: str = "winners_only"

    def __post_init__(self):
        if not math.isfinite(self.gamma) or self.gamma < 0:
            raise ValidationError("policy.gamma", "must be finite and >= 0")
        if self.scope not in ("winners_only", "all_buyers"):
            raise ValidationError("policy.scope", "must be winners_only or all_buyers")


@dataclass(frozen=True)
class AuctionResult:
    """A full run: per-round outcomes, totals, and the final ledger."""

    rounds: tuple[RoundOutcome, ...]
    total_utility: int
    total_revenue: int
    ledger: AuctionLedger

    def __post_init__(self):
        utility = sum(r.utility for r in self.rounds)
        revenue = sum(r.revenue for r in self.rounds)
        if self.total_utility != utility or self.total_revenue != revenue:
            raise InvariantViolation("result totals disagree with per-round outcomes")


def _result(ledger: AuctionLedger) -> AuctionResult:
    rounds = tuple(ledger.history)
    return AuctionResult(
        rounds,
        sum(r.utility for r in rounds),
        sum(r.revenue for r in rounds),
        ledger,
    )


def adjust_bid(
    true_amount: int,
    remaining: int,
    initial: int,
    policy: AdjustmentPolicy,
    won_previous: bool,
) -> int:
    """Effective bid for one buyer in one round.

    Non-punished buyers are only clamped to their remaining budget.
    Punished buyers bid floor(true * (remaining/initial)**gamma),
    clamped to the remaining budget; a buyer with no initial budget
    always bids 0.
    """
    if true_amount < 0:
        raise ValidationError("true_amount", "must be >= 0")
    if not 0 <= remaining <= initial:
        raise ValidationError("remaining", "must satisfy 0 <= remaining <= initial")
    if initial == 0:
        return 0
    if policy.scope == "winners_only" and not won_previous:
        return min(true_amount, remaining)
    adjusted = scale_by_ratio_pow(true_amount, remaining, initial, policy.gamma)
    return min(adjusted, remaining)


def _critical_payment(instance: WdpInstance, winner_id: int, solve) -> int:
    # Smallest own bid (bisection, milli granularity) at which the buyer
    # still wins; assumes winning is monotone in the own bid.
    by_id = {b.buyer_id: b for b in instance.bids}
    lo, hi = 1, by_id[winner_id].amount
    while lo < hi:
        mid = (lo + hi) // 2
        trial_bids = tuple(
            Bid(b.buyer_id, b.round, mid, b.demand) if b.buyer_id == winner_id else b
            for b in instance.bids
        )
        trial = WdpInstance(tuple(b for b in trial_bids if b.amount > 0), instance.seller_caps)
        if winner_id in solve(trial).assignment.buyers():
            hi = mid
        else:
            lo = mid + 1
    return lo


def run_srmra(
    bids: list[Bid],
    sellers: tuple[Seller, ...],
    ledger: AuctionLedger,
    config: MechanismConfig = MechanismConfig(),
    round_index: int | None = None,
) -> RoundOutcome:
    """Clear a single round and charge the ledger.

    Bids must already be clamped to remaining budgets (and adjusted, if
    a multi-round framework is driving).  Zero-amount bids never win;
    winners pay their bids under first-price pricing.
    """
    if round_index is None:
        round_index = bids[0].round if bids else len(ledger.history) + 1
    dimension = len(sellers[0].round_capacity) if sellers else None
    for bid in bids:
        if bid.round != round_index:
            raise ValidationError(f"bids[{bid.buyer_id}].round", "bids span several rounds")
        if dimension is not None and len(bid.demand) != dimension:
            raise ValidationError(
                f"bids[{bid.buyer_id}].demand", "dimension differs from seller capacities"
            )
        if bid.amount > ledger.remaining_budget.get(bid.buyer_id, 0):
            raise ValidationError(
                f"bids[{bid.buyer_id}].amount", "exceeds the buyer's remaining budget"
            )
    caps = {s.id: ledger.effective_capacity(s) for s in sellers}
    instance = WdpInstance(tuple(b for b in bids if b.amount > 0), caps)
    solve = solve_exact if config.solver == "exact" else solve_greedy
    solution = solve(instance)

    amount_of = {b.buyer_id: b.amount for b in instance.bids}
    demand_of = {b.buyer_id: b.demand for b in instance.bids}
    winning_bids = {buyer: amount_of[buyer] for buyer, _ in solution.assignment}
    if config.pricing == "first_price":
        payments = dict(winning_bids)
    else:
        payments = {
            buyer: _critical_payment(instance, buyer, solve) for buyer in winning_bids
        }
    outcome = RoundOutcome(
        round=round_index,
        winners=solution.assignment,
        bids=winning_bids,
        payments=payments,
        demands={buyer: demand_of[buyer] for buyer, _ in solution.assignment},
        utility=sum(winning_bids.values()),
    )
    ledger.charge(outcome)
    return outcome


def _clamped_bid(scenario: Scenario, ledger: AuctionLedger, buyer_id: int, round_index: int) -> Bid:
    raw = scenario.bid_matrix[buyer_id][round_index - 1]
    amount = min(raw.amount, ledger.remaining_budget[buyer_id])
    return Bid(buyer_id, round_index, amount, raw.demand)


def _require_materialized(scenario: Scenario) -> None:
    if not scenario.materialized:
        raise ValidationError("scenario", "generator scenarios must be materialized before running")


def run_repeated_srmra(scenario: Scenario) -> AuctionResult:
    """Cycle the single-round auction over the horizon without adjustment.

    Bids are taken from the matrix verbatim, clamped to remaining
    budgets; the ledger carries across rounds.
    """
    _require_materialized(scenario)
    ledger = new_ledger(scenario)
    for l in range(1, scenario.horizon + 1):
        round_bids = [_clamped_bid(scenario, ledger, b.id, l) for b in scenario.buyers]
        run_srmra(round_bids, scenario.sellers, ledger, scenario.mechanism, round_index=l)
    return _result(ledger)


def run_mafl(scenario: Scenario) -> AuctionResult:
    """Run the budget-aware multi-round framework.

    Each round is one single-round auction over effective bids: the
    previous round's winners bid floor(true * (remaining/initial)**gamma)
    so that heavy spenders cool off instead of burning out.  The win
    flag resets every round.  Explicit bid matrices are strategic
    trajectories, not true valuations, so they replay verbatim (budget
    clamp only); generated scenarios carry true valuations and are
    adjusted.  With gamma = 0 the adjustment is the identity and the
    run matches run_repeated_srmra round for round.
    """
    _require_materialized(scenario)
    policy = AdjustmentPolicy(scenario.mechanism.gamma, scenario.mechanism.scope)
    ledger = new_ledger(scenario)
    previous_winners: set[int] = set()
    for l in range(1, scenario.horizon + 1):
        round_bids = []
        for buyer in scenario.buyers:
            clamped = _clamped_bid(scenario, ledger, buyer.id, l)
            if scenario.bids_are_valuations:
                amount = adjust_bid(
                    clamped.amount,
                    ledger.remaining_budget[buyer.id],
                    buyer.budget,
                    policy,
                    buyer.id in previous_winners,
                )
            else:
                amount = clamped.amount
            round_bids.append(Bid(buyer.id, l, amount, clamped.demand))
        outcome = run_srmra(round_bids, scenario.sellers, ledger, scenario.mechanism, round_index=l)
        previous_winners = outcome.winners.buyers()
    return _result(ledger)


def replay(bid_matrix, budgets, items_per_round: int) -> AuctionResult:
    """Deterministic desk engine for unit-demand, single-pool examples.

    ``bid_matrix[i][l-1]`` is buyer i's bid in round l, in whole
    currency units (0.001 resolution).  Each round, bids are clamped to
    remaining budgets and the ``items_per_round`` highest positive bids
    win, ties going to the lowest buyer index; winners pay their bids.
    """
    if not isinstance(items_per_round, int) or isinstance(items_per_round, bool):
        raise ValidationError("items_per_round", "must be an integer")
    if items_per_round < 0:
        raise ValidationError("items_per_round", "must be >= 0")
    budget_milli = [to_milli(b, f"budgets[{i}]") for i, b in enumerate(budgets)]
    for i, b in enumerate(budget_milli):
        if b < 0:
            raise ValidationError(f"budgets[{i}]", "must be >= 0")
    if len(bid_matrix) != len(budget_milli):
        raise ValidationError(
            "bids", f"expected {len(budget_milli)} rows, got {len(bid_matrix)}"
        )
    rows = []
    horizon = None
    for i, row in enumerate(bid_matrix):
        amounts = [to_milli(a, f"bids[{i}][{l}]") for l, a in enumerate(row)]
        if any(a < 0 for a in amounts):
            raise ValidationError(f"bids[{i}]", "amounts must be >= 0")
        if horizon is None:
            horizon = len(amounts)
        elif len(amounts) != horizon:
            raise ValidationError(f"bids[{i}]", f"expected {horizon} rounds, got {len(amounts)}")
        rows.append(amounts)

    unit = ResourceVector((SCALE,))
    buyers = [Buyer(i, b) for i, b in enumerate(budget_milli)]
    seller = Seller(0, ResourceVector((items_per_round * SCALE,)))
    ledger = AuctionLedger.new(buyers, [seller])
    for l in range(1, (horizon or 0) + 1):
        effective = [min(rows[i][l - 1], ledger.remaining_budget[i]) for i in range(len(rows))]
        contenders = sorted(
            (i for i in range(len(rows)) if effective[i] > 0),
            key=lambda i: (-effective[i], i),
        )
        winners = sorted(contenders[:items_per_round])
        outcome = RoundOutcome(
            round=l,
            winners=Assignment(tuple((i, 0) for i in winners)),
            bids={i: effective[i] for i in winners},
            payments={i: effective[i] for i in winners},
            demands={i: unit for i in winners},
            utility=sum(effective[i] for i in winners),
        )
        ledger.charge(outcome)
    return _result(ledger)


def run_double_auction(scenario: Scenario) -> AuctionResult:
    """Greedy bid/ask matching baseline with midpoint trade prices.

    Every seller quotes an ask per normalized demand unit; a buyer's
    ask at seller s scales that by the mean of demand/round-capacity
    across dimensions.  Each round walks buyers by descending clamped
    bid (ties to the lowest id) and matches each against the
    cheapest-ask seller that fits and whose scaled ask the bid meets;
    the trade price is the floor of the bid/ask midpoint.  This is a
    deliberately simple stand-in baseline, not a faithful port of any
    published double auction.
    """
    _require_materialized(scenario)
    for position, seller in enumerate(scenario.sellers):
        if seller.ask is None:
            raise ValidationError(
                f"sellers[{position}].ask", "required by the double_auction mechanism"
            )
    ledger = new_ledger(scenario)
    dim = scenario.dimensions
    for l in range(1, scenario.horizon + 1):
        residual = {
            s.id: list(ledger.effective_capacity(s)) for s in scenario.sellers
        }
        sellers_by_ask = sorted(scenario.sellers, key=lambda s: (s.ask, s.id))
        round_bids = [_clamped_bid(scenario, ledger, b.id, l) for b in scenario.buyers]
        order = sorted(
            (b for b in round_bids if b.amount > 0), key=lambda b: (-b.amount, b.buyer_id)
        )
        pairs: list[tuple[int, int]] = []
        bids_map: dict[int, int] = {}
        payments: dict[int, int] = {}
        demands: dict[int, ResourceVector] = {}
        for bid in order:
            demand = tuple(bid.demand)
            for seller in sellers_by_ask:
                room = residual[seller.id]
                if not all(demand[k] <= room[k] for k in range(dim)):
                    continue
                load = Fraction(0)
                for k in range(dim):
                    if demand[k]:
                        load += Fraction(demand[k], seller.round_capacity.units[k])
                ask = math.floor(seller.ask * load / dim) if dim else 0
                if bid.amount < ask:
                    continue
                price = (bid.amount + ask) // 2
                for k in range(dim):
                    room[k] -= demand[k]
                pairs.append((bid.buyer_id, seller.id))
                bids_map[bid.buyer_id] = bid.amount
                payments[bid.buyer_id] = price
                demands[bid.buyer_id] = bid.demand
                break
        outcome = RoundOutcome(
            round=l,
            winners=Assignment(tuple(pairs)),
            bids=bids_map,
            payments=payments,
            demands=demands,
            utility=sum(bids_map.values()),
        )
        ledger.charge(outcome)
    return _result(ledger)
