"""Combinatorial-auction allocators: bid enumeration, CA and FECA.

Tenants bid their bundle value on every nonempty subset of their
preallocated channels; the winner determination problem selects
channel-disjoint bundles, at most one per bidder, of maximum total value.
The fairness-enhanced variant adds per-bidder minimum-value rows, halving
all minima on infeasibility until the problem admits a solution.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from . import ilp
from .alloc_matching import Preallocation, preallocate
from .assignment import Assignment
from .scenario import Scenario
from .valuation import Context, bundle_capacities, fairness_min_values, tenant_utility

# Bids grow as 2^|preallocated set|; the preallocation step exists to keep
# this bounded.
MAX_BIDDABLE_CHANNELS = 8
FECA_RELAX_FACTOR = 0.5
FECA_MIN_SCALE = 1e-6


@dataclass(frozen=True)
class Bid:
    bundle: frozenset[int]
    value: float
    bidder: int

    def __post_init__(self) -> None:
        if not self.bundle:
            raise ValueError("a bid must name at least one channel")
        if self.value < 0:
            raise ValueError(f"bid value must be >= 0, got {self.value}")


@dataclass(frozen=True)
class BidMatrix:
    bids: tuple[Bid, ...]
    n_channels: int

    def __len__(self) -> int:
        return len(self.bids)

    def bidders(self) -> list[int]:
        seen: dict[int, None] = {}
        for b in self.bids:
            seen.setdefault(b.bidder)
        return list(seen)


@dataclass(frozen=True)
class WdpModel:
    """Winner determination program plus the bid metadata to decode it."""

    program: ilp.ZeroOneProgram
    bids: tuple[Bid, ...]
    n_channels: int
    trivially_infeasible: bool = False


def enumerate_bids(
    tenant_id: int,
    prealloc_set: frozenset[int],
    scenario: Scenario,
    context: Context,
) -> list[Bid]:
    """One bid per nonempty subset of the tenant's preallocated channels."""
    channels = sorted(prealloc_set)
    if len(channels) > MAX_BIDDABLE_CHANNELS:
        raise ValueError(
            f"{len(channels)} preallocated channels would imply "
            f"2^{len(channels)} bids; cap is {MAX_BIDDABLE_CHANNELS}"
        )
    subsets = [
        frozenset(channels[j] for j in range(len(channels)) if code >> j & 1)
        for code in range(1, 1 << len(channels))
    ]
    caps = bundle_capacities(tenant_id, subsets, scenario)
    if context is Context.CAPACITY:
        values = caps
    else:
        values = [tenant_utility(scenario, tenant_id, float(c)) for c in caps]
    return [
        Bid(bundle=s, value=float(v), bidder=tenant_id)
        for s, v in zip(subsets, values)
    ]


def prune_zero_bids(bids: list[Bid], n_channels: int) -> BidMatrix:
    """Drop worthless bids; the survivors keep their order."""
    return BidMatrix(
        bids=tuple(b for b in bids if b.value > 0.0), n_channels=n_channels
    )


def sort_bids(matrix: BidMatrix) -> BidMatrix:
    """Deterministic solver ordering: value desc, bidder, bundle lexicographic."""
    ordered = sorted(
        matrix.bids, key=lambda b: (-b.value, b.bidder, tuple(sorted(b.bundle)))
    )
    return BidMatrix(bids=tuple(ordered), n_channels=matrix.n_channels)


def build_wdp(
    bid_matrix: BidMatrix, min_values: dict[int, float] | None = None
) -> WdpModel:
    """Assemble the 0-1 program: exclusivity rows, one-bundle rows, min rows.

    A bidder carrying a positive minimum but no bids makes the model
    trivially infeasible; the flag reports it without a solver call.
    """
    bids = bid_matrix.bids
    objective = np.array([b.value for b in bids], dtype=float)
    by_channel: list[list[int]] = [[] for _ in range(bid_matrix.n_channels)]
    by_bidder: dict[int, list[int]] = {}
    for j, b in enumerate(bids):
        for m in b.bundle:
            by_channel[m].append(j)
        by_bidder.setdefault(b.bidder, []).append(j)
    le_rows = [tuple(row) for row in by_channel]
    le_rows += [tuple(rows) for _, rows in sorted(by_bidder.items())]
    ge_rows = []
    trivially_infeasible = False
    if min_values:
        for bidder, floor in sorted(min_values.items()):
            if floor <= 0:
                continue
            rows = by_bidder.get(bidder, [])
            if not rows:
                trivially_infeasible = True
            ge_rows.append(
                (tuple(rows), tuple(float(bids[j].value) for j in rows), float(floor))
            )
    program = ilp.ZeroOneProgram(
        objective=objective, le_rows=tuple(le_rows), ge_rows=tuple(ge_rows)
    )
    return WdpModel(
        program=program,
        bids=bids,
        n_channels=bid_matrix.n_channels,
        trivially_infeasible=trivially_infeasible,
    )


def decode_assignment(
    matrix: BidMatrix, result: ilp.SolveResult, n_tenants: int
) -> Assignment:
    """Write the accepted bundles into an assignment matrix.

    Asserts the auction contract on the way: accepted bundles are pairwise
    channel-disjoint and no bidder wins more than one.
    """
    out = Assignment.empty(n_tenants, matrix.n_channels)
    winners: set[int] = set()
    for j in result.chosen:
        bid = matrix.bids[j]
        assert bid.bidder not in winners, "bidder accepted twice"
        winners.add(bid.bidder)
        for m in sorted(bid.bundle):
            out.assign(bid.bidder, m)  # raises if bundles overlap
    return out


def build_bid_matrix(
    scenario: Scenario,
    context: Context,
    prealloc: Preallocation,
) -> BidMatrix:
    bids: list[Bid] = []
    for k in range(scenario.n_tenants):
        bids.extend(enumerate_bids(k, prealloc[k], scenario, context))
    return sort_bids(prune_zero_bids(bids, scenario.n_channels))


def allocate_ca(
    scenario: Scenario,
    context: Context,
    rng: np.random.Generator,
    channel_quota: int = 6,
    tenant_quota: int = 6,
    cap: int = MAX_BIDDABLE_CHANNELS,
) -> Assignment:
    """Preallocation-based combinatorial auction.

    Preallocate, enumerate and prune bids, then solve the winner
    determination problem exactly.  Channels in no accepted bundle stay
    unassigned.
    """
    prealloc = preallocate(
        scenario, context, rng, channel_quota=channel_quota,
        tenant_quota=tenant_quota, cap=cap,
    )
    matrix = build_bid_matrix(scenario, context, prealloc)
    model = build_wdp(matrix)
    result = ilp.solve(model.program)
    assert result.status is ilp.SolveStatus.OPTIMAL
    return decode_assignment(matrix, result, scenario.n_tenants)


def allocate_feca(
    scenario: Scenario,
    context: Context,
    rng: np.random.Generator,
    channel_quota: int = 6,
    tenant_quota: int = 6,
    cap: int = MAX_BIDDABLE_CHANNELS,
) -> Assignment:
    """Fairness-enhanced combinatorial auction.

    Adds a minimum-value row per tenant; on infeasibility every minimum is
    halved and the problem re-solved.  Once the minima have shrunk below
    1e-6 of their originals the constraint set is abandoned and the plain
    auction answer (always feasible) is returned.
    """
    prealloc = preallocate(
        scenario, context, rng, channel_quota=channel_quota,
        tenant_quota=tenant_quota, cap=cap,
    )
    matrix = build_bid_matrix(scenario, context, prealloc)
    originals = fairness_min_values(scenario, context)
    scale = 1.0
    while scale >= FECA_MIN_SCALE:
        minima = {k: originals[k] * scale for k in range(scenario.n_tenants)}
        model = build_wdp(matrix, minima)
        if not model.trivially_infeasible:
            result = ilp.solve(model.program)
            if result.status is ilp.SolveStatus.OPTIMAL:
                return decode_assignment(matrix, result, scenario.n_tenants)
        scale *= FECA_RELAX_FACTOR
    model = build_wdp(matrix)
    result = ilp.solve(model.program)
    assert result.status is ilp.SolveStatus.OPTIMAL
    return decode_assignment(matrix, result, scenario.n_tenants)


def bid_matrix_to_csv(matrix: BidMatrix) -> str:
    """Serialize as rows of |CH| membership flags, the value, the bidder id."""
    buf = io.StringIO()
    for b in matrix.bids:
        flags = ["1" if m in b.bundle else "0" for m in range(matrix.n_channels)]
        buf.write(",".join(flags + [repr(b.value), str(b.bidder)]) + "\n")
    return buf.getvalue()


def bid_matrix_from_csv(text: str) -> BidMatrix:
    """Parse the membership-flags/value/bidder layout; width fixes |CH|."""
    bids: list[Bid] = []
    n_channels: int | None = None
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        cells = [c.strip() for c in line.split(",")]
        if len(cells) < 3:
            raise ValueError(f"bid row needs at least 3 columns: {line!r}")
        if n_channels is None:
            n_channels = len(cells) - 2
        elif len(cells) - 2 != n_channels:
            raise ValueError("inconsistent column count in bid matrix")
        bundle = frozenset(m for m in range(n_channels) if float(cells[m]) != 0.0)
        bids.append(
            Bid(bundle=bundle, value=float(cells[-2]), bidder=int(cells[-1]))
        )
    return BidMatrix(bids=tuple(bids), n_channels=n_channels or 0)
