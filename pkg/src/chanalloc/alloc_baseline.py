"""Randomized and selection-based allocators: R, SR1, SR2, WS, ORR.

The randomized family assigns channels one by one to sampled tenants under a
per-tenant cap.  The selection family iterates let-the-needy-choose rounds:
weakest-selects always hands the pick to the currently worst-off tenant,
opportunistic round robin reshuffles the picking order every round.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assignment import Assignment
from .scenario import Scenario
from .valuation import TIE_TOL, Context, bundle_value, marginal_scores


@dataclass(frozen=True)
class BaselineConfig:
    """Cap on channels per tenant for the randomized methods."""

    max_channels_per_tenant: int = 4

    def __post_init__(self) -> None:
        if self.max_channels_per_tenant < 0:
            raise ValueError("max_channels_per_tenant must be >= 0")


def _pick_max(ids: list[int], scores: np.ndarray, rng: np.random.Generator) -> int:
    best = scores.max()
    group = [ids[i] for i in range(len(ids)) if scores[i] >= best - TIE_TOL]
    if len(group) == 1:
        return group[0]
    return group[int(rng.integers(len(group)))]


def _pick_min(ids: list[int], scores: np.ndarray, rng: np.random.Generator) -> int:
    return _pick_max(ids, -np.asarray(scores), rng)


def allocate_random(
    scenario: Scenario, cfg: BaselineConfig, rng: np.random.Generator
) -> Assignment:
    """Uniformly random tenant per channel, skipping tenants already at cap."""
    out = Assignment.empty(scenario.n_tenants, scenario.n_channels)
    counts = np.zeros(scenario.n_tenants, dtype=int)
    for m in range(scenario.n_channels):
        eligible = np.flatnonzero(counts < cfg.max_channels_per_tenant)
        if len(eligible) == 0:
            continue
        k = int(eligible[rng.integers(len(eligible))])
        out.assign(k, m)
        counts[k] += 1
    return out


def _weighted_random(
    scenario: Scenario,
    cfg: BaselineConfig,
    rng: np.random.Generator,
    weights_for: "callable",
) -> Assignment:
    out = Assignment.empty(scenario.n_tenants, scenario.n_channels)
    counts = np.zeros(scenario.n_tenants, dtype=int)
    for m in range(scenario.n_channels):
        eligible = np.flatnonzero(counts < cfg.max_channels_per_tenant)
        if len(eligible) == 0:
            continue
        w = np.asarray([weights_for(int(k), m) for k in eligible], dtype=float)
        total = w.sum()
        if total > 0:
            p = w / total
        else:
            p = np.full(len(eligible), 1.0 / len(eligible))
        k = int(eligible[rng.choice(len(eligible), p=p)])
        out.assign(k, m)
        counts[k] += 1
    return out


def allocate_sr1(
    scenario: Scenario, cfg: BaselineConfig, rng: np.random.Generator
) -> Assignment:
    """Semi-random assignment, selection probability proportional to 1/distance."""
    bs_ids = scenario.channel_bs_ids

    def weights(k: int, m: int) -> float:
        return 1.0 / scenario.distance(k, int(bs_ids[m]))

    return _weighted_random(scenario, cfg, rng, weights)


def allocate_sr2(
    scenario: Scenario, cfg: BaselineConfig, rng: np.random.Generator
) -> Assignment:
    """Semi-random assignment weighted by single-connectivity rate.

    Falls back to a uniform draw when every eligible tenant values the
    channel at zero.
    """
    single = scenario.single_link_capacity_matrix

    def weights(k: int, m: int) -> float:
        return float(single[k, m])

    return _weighted_random(scenario, cfg, rng, weights)


def allocate_ws(
    scenario: Scenario, context: Context, rng: np.random.Generator
) -> Assignment:
    """Weakest selects: the worst-off tenant repeatedly takes its best channel.

    Worst-off means lowest rate in the capacity context and highest utility
    deficit in the utility context; both the chooser and its channel pick
    break ties at random.  Every channel ends up assigned.
    """
    out = Assignment.empty(scenario.n_tenants, scenario.n_channels)
    remaining = list(range(scenario.n_channels))
    holdings: list[frozenset[int]] = [frozenset()] * scenario.n_tenants
    tenant_ids = list(range(scenario.n_tenants))
    while remaining:
        values = np.array(
            [bundle_value(k, holdings[k], scenario, context) for k in tenant_ids]
        )
        chooser = _pick_min(tenant_ids, values, rng)
        scores = marginal_scores(chooser, remaining, holdings[chooser], scenario, context)
        channel = _pick_max(remaining, scores, rng)
        out.assign(chooser, channel)
        holdings[chooser] = holdings[chooser] | {channel}
        remaining.remove(channel)
    return out


def allocate_orr(
    scenario: Scenario, context: Context, rng: np.random.Generator
) -> Assignment:
    """Opportunistic round robin: fresh random tenant order every round.

    Each tenant in turn takes its best remaining channel (zero-gain picks
    included) until no channels remain.
    """
    out = Assignment.empty(scenario.n_tenants, scenario.n_channels)
    remaining = list(range(scenario.n_channels))
    holdings: list[frozenset[int]] = [frozenset()] * scenario.n_tenants
    while remaining:
        order = rng.permutation(scenario.n_tenants)
        for k in order:
            if not remaining:
                break
            k = int(k)
            scores = marginal_scores(k, remaining, holdings[k], scenario, context)
            channel = _pick_max(remaining, scores, rng)
            out.assign(k, channel)
            holdings[k] = holdings[k] | {channel}
            remaining.remove(channel)
    return out
