"""Capacity/utility valuation of channel bundles and preference construction.

Algorithms run in one of two contexts: decisions scored by raw rate in Mbps,
or by a saturating per-tenant utility in [0, 1].  The utility is 0 below the
tenant's minimum rate, 1 above its maximum, and grows logarithmically in
between.  Because a single channel usually cannot lift a tenant over its
minimum rate, single-channel preferences in the utility context are scored
against the tenant's minimum as reference: U(c_min + single-channel rate).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import radio
from .scenario import Scenario

# Scores closer than this are one tie group; identical channels of one BS
# produce bit-equal scores, the epsilon absorbs rounding in derived values.
TIE_TOL = 1e-12


class Context(enum.Enum):
    CAPACITY = "capacity"
    UTILITY = "utility"

    @classmethod
    def parse(cls, label: str) -> "Context":
        try:
            return cls(label.lower())
        except ValueError:
            raise ValueError(f"unknown context {label!r}") from None


@dataclass(frozen=True)
class UtilityParams:
    c_min_mbps: float
    c_max_mbps: float

    def __post_init__(self) -> None:
        if not 0 < self.c_min_mbps < self.c_max_mbps:
            raise ValueError(
                f"need 0 < c_min < c_max, got ({self.c_min_mbps}, {self.c_max_mbps})"
            )


@dataclass(frozen=True)
class PreferenceList:
    """Alternatives ordered most-preferred first with their inducing scores.

    Scores are weakly decreasing; the order inside a tie group is the random
    permutation drawn at construction.
    """

    items: tuple[int, ...]
    scores: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.items)


def utility(c_mbps: float, p: UtilityParams) -> float:
    """Saturating log utility: 0 below c_min, 1 above c_max."""
    if c_mbps <= p.c_min_mbps:
        return 0.0
    if c_mbps >= p.c_max_mbps:
        return 1.0
    return math.log(c_mbps / p.c_min_mbps) / math.log(p.c_max_mbps / p.c_min_mbps)


def tenant_utility_params(scenario: Scenario, tenant_id: int) -> UtilityParams:
    t = scenario.tenants[tenant_id]
    return UtilityParams(t.c_min_mbps, t.c_max_mbps)


def tenant_utility(scenario: Scenario, tenant_id: int, c_mbps: float) -> float:
    return utility(c_mbps, tenant_utility_params(scenario, tenant_id))


def bundle_capacity(tenant_id: int, channel_set: Iterable[int], scenario: Scenario) -> float:
    return radio.rho(tenant_id, channel_set, scenario)


def bundle_capacities(
    tenant_id: int, channel_sets: Sequence[frozenset[int]], scenario: Scenario
) -> np.ndarray:
    """Rates of many bundles of one tenant; uncached ones solved in one batch."""
    out = np.empty(len(channel_sets))
    cache = scenario.bundle_cache
    missing: list[int] = []
    for idx, ids in enumerate(channel_sets):
        if not ids:
            out[idx] = 0.0
            continue
        val = cache.get((tenant_id, ids))
        if val is None:
            missing.append(idx)
        else:
            out[idx] = val
    if missing:
        n_ch = scenario.n_channels
        masks = np.zeros((len(missing), n_ch), dtype=bool)
        for row, idx in enumerate(missing):
            masks[row, list(channel_sets[idx])] = True
        gains, ricians = scenario.tenant_link_arrays(tenant_id)
        caps = radio.outage_capacity_batch(masks, gains, ricians, scenario.params)
        for row, idx in enumerate(missing):
            val = float(caps[row])
            cache[(tenant_id, channel_sets[idx])] = val
            out[idx] = val
    return out


def bundle_value(
    tenant_id: int, channel_set: Iterable[int], scenario: Scenario, context: Context
) -> float:
    """Worth of a bundle to a tenant: its rate, or the utility of that rate."""
    cap = bundle_capacity(tenant_id, channel_set, scenario)
    if context is Context.CAPACITY:
        return cap
    return tenant_utility(scenario, tenant_id, cap)


def first_channel_score(tenant_id: int, candidate_channel: int, scenario: Scenario) -> float:
    """Single-channel score of a tenant holding nothing, in the utility context.

    Rates a candidate by the utility of (own minimum rate + the candidate's
    single-connectivity rate), so channels remain comparable even when none
    of them alone clears the minimum.
    """
    p = tenant_utility_params(scenario, tenant_id)
    single = float(scenario.single_link_capacity_matrix[tenant_id, candidate_channel])
    return utility(p.c_min_mbps + single, p)


def marginal_value(
    tenant_id: int,
    current_set: Iterable[int],
    candidate_channel: int,
    scenario: Scenario,
    context: Context,
) -> float:
    """Value gained by adding one channel to the tenant's current bundle."""
    current = frozenset(current_set)
    if candidate_channel in current:
        raise ValueError(f"channel {candidate_channel} already held")
    if context is Context.UTILITY and not current:
        return first_channel_score(tenant_id, candidate_channel, scenario)
    return bundle_value(
        tenant_id, current | {candidate_channel}, scenario, context
    ) - bundle_value(tenant_id, current, scenario, context)


def fairness_min_values(scenario: Scenario, context: Context) -> list[float]:
    """Per-tenant floor used by the fairness-aware methods.

    The tenant's own minimum rate in the capacity context, a utility of 1/3
    in the utility context.
    """
    if context is Context.CAPACITY:
        return [t.c_min_mbps for t in scenario.tenants]
    return [1.0 / 3.0] * scenario.n_tenants


def rank_with_ties(
    items: Sequence[int], scores: Sequence[float], rng: np.random.Generator
) -> PreferenceList:
    """Order items by score descending, permuting each tie group at random.

    Consumes the rng only when a tie group has more than one member, so an
    all-distinct scoring is rng-independent.
    """
    order = sorted(range(len(items)), key=lambda i: (-scores[i], items[i]))
    ranked = [items[i] for i in order]
    ranked_scores = [scores[i] for i in order]
    start = 0
    for end in range(1, len(order) + 1):
        boundary = end == len(order) or ranked_scores[end - 1] - ranked_scores[end] > TIE_TOL
        if boundary:
            if end - start > 1:
                perm = rng.permutation(end - start)
                ranked[start:end] = [ranked[start + j] for j in perm]
                ranked_scores[start:end] = [ranked_scores[start + j] for j in perm]
            start = end
    return PreferenceList(items=tuple(ranked), scores=tuple(ranked_scores))


def marginal_scores(
    tenant_id: int,
    candidates: Sequence[int],
    current_set: Iterable[int],
    scenario: Scenario,
    context: Context,
) -> np.ndarray:
    """Marginal (or first-channel) score of every candidate, batch-evaluated."""
    current = frozenset(current_set)
    if context is Context.UTILITY and not current:
        return np.array(
            [first_channel_score(tenant_id, m, scenario) for m in candidates]
        )
    sets = [current | {m} for m in candidates]
    caps = bundle_capacities(tenant_id, sets, scenario)
    if context is Context.CAPACITY:
        base = bundle_capacity(tenant_id, current, scenario)
        return caps - base
    p = tenant_utility_params(scenario, tenant_id)
    base_u = utility(bundle_capacity(tenant_id, current, scenario), p)
    return np.array([utility(float(c), p) - base_u for c in caps])


def tenant_preferences(
    tenant_id: int,
    available_channels: Sequence[int],
    current_set: Iterable[int],
    scenario: Scenario,
    context: Context,
    rng: np.random.Generator,
) -> PreferenceList:
    """A tenant's ranking of candidate channels given what it already holds."""
    scores = marginal_scores(tenant_id, available_channels, current_set, scenario, context)
    return rank_with_ties(list(available_channels), [float(s) for s in scores], rng)


def channel_preferences(
    channel_id: int,
    tenants: Sequence[int],
    scenario: Scenario,
    context: Context,
    rng: np.random.Generator,
) -> PreferenceList:
    """A channel's ranking of tenants by its single-connectivity worth to them."""
    if context is Context.CAPACITY:
        col = scenario.single_link_capacity_matrix[:, channel_id]
        scores = [float(col[k]) for k in tenants]
    else:
        scores = [first_channel_score(k, channel_id, scenario) for k in tenants]
    return rank_with_ties(list(tenants), scores, rng)
