"""Matching-based allocators: deferred acceptance, its variants, and TTC.

Channels play the proposing side throughout.  The many-to-one variant backs
the plain quota matching (GS), the minimum-rate rescue variant (MRM) and the
round-based variant (MRGS); the many-to-many variant produces the
overlapping preallocation sets consumed by the auction methods.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .assignment import Assignment
from .scenario import Scenario
from .valuation import (
    Context,
    PreferenceList,
    bundle_value,
    channel_preferences,
    fairness_min_values,
    marginal_scores,
    tenant_preferences,
)
from .alloc_baseline import _pick_max


@dataclass(frozen=True)
class Quotas:
    tenant_quota: int
    channel_quota: int = 1

    def __post_init__(self) -> None:
        if self.tenant_quota < 1 or self.channel_quota < 1:
            raise ValueError("quotas must be >= 1")


@dataclass(frozen=True)
class Preallocation:
    """Per-tenant candidate channel sets; sets may overlap across tenants."""

    sets: tuple[frozenset[int], ...]

    def __getitem__(self, tenant_id: int) -> frozenset[int]:
        return self.sets[tenant_id]

    def covered_channels(self) -> frozenset[int]:
        out: set[int] = set()
        for s in self.sets:
            out |= s
        return frozenset(out)


def _rank_maps(prefs: dict[int, PreferenceList]) -> dict[int, dict[int, int]]:
    return {
        owner: {item: pos for pos, item in enumerate(plist.items)}
        for owner, plist in prefs.items()
    }


def deferred_acceptance(
    channel_prefs: dict[int, PreferenceList],
    tenant_prefs: dict[int, PreferenceList],
    tenant_quota: int,
) -> dict[int, list[int]]:
    """Channel-proposing many-to-one deferred acceptance over strict lists.

    Every tenant holds its best <= quota proposals at all times; a rejected
    channel moves on to its next choice.  Returns held channels per tenant.
    The proposal count is bounded by n_channels * n_tenants and asserted.
    """
    tenant_rank = _rank_maps(tenant_prefs)
    holds: dict[int, list[int]] = {k: [] for k in tenant_prefs}
    nxt = {m: 0 for m in channel_prefs}
    free = deque(channel_prefs)
    proposal_cap = len(channel_prefs) * max(len(tenant_prefs), 1)
    proposals = 0
    while free:
        m = free.popleft()
        plist = channel_prefs[m].items
        if nxt[m] >= len(plist):
            continue  # exhausted every tenant; stays unmatched
        k = plist[nxt[m]]
        nxt[m] += 1
        proposals += 1
        assert proposals <= proposal_cap, "deferred acceptance exceeded proposal bound"
        rank = tenant_rank[k]
        held = holds[k]
        if len(held) < tenant_quota:
            held.append(m)
            continue
        worst = max(held, key=rank.__getitem__)
        if rank[m] < rank[worst]:
            held.remove(worst)
            held.append(m)
            free.append(worst)
        else:
            free.append(m)
    return holds


def gale_shapley_many_to_one(
    channel_prefs: dict[int, PreferenceList],
    tenant_prefs: dict[int, PreferenceList],
    tenant_quota: int,
    rng: np.random.Generator | None = None,
    shape: tuple[int, int] | None = None,
) -> Assignment:
    """Stable many-to-one matching of channels to quota-limited tenants.

    Preference lists must already be strict (ties broken at construction);
    the rng parameter is accepted for signature symmetry with the other
    allocators but never consumed here.
    """
    del rng
    holds = deferred_acceptance(channel_prefs, tenant_prefs, tenant_quota)
    if shape is None:
        n_t = max(tenant_prefs, default=-1) + 1
        n_ch = max(channel_prefs, default=-1) + 1
        shape = (n_t, n_ch)
    out = Assignment.empty(*shape)
    for k, chans in holds.items():
        for m in chans:
            out.assign(k, m)
    return out


def blocking_pairs(
    holds: dict[int, list[int]],
    channel_prefs: dict[int, PreferenceList],
    tenant_prefs: dict[int, PreferenceList],
    tenant_quota: int,
) -> list[tuple[int, int]]:
    """Exhaustive blocking-pair scan of a many-to-one matching.

    A pair blocks when the channel strictly prefers the tenant to its current
    match (or is unmatched) and the tenant strictly prefers the channel to
    its worst held one (or has spare quota).
    """
    tenant_rank = _rank_maps(tenant_prefs)
    channel_rank = _rank_maps(channel_prefs)
    matched_tenant: dict[int, int] = {}
    for k, chans in holds.items():
        for m in chans:
            matched_tenant[m] = k
    pairs = []
    for m, plist in channel_prefs.items():
        current = matched_tenant.get(m)
        current_pos = (
            channel_rank[m][current] if current is not None else len(plist.items)
        )
        for pos in range(current_pos):
            k = plist.items[pos]
            held = holds.get(k, [])
            if len(held) < tenant_quota:
                pairs.append((m, k))
            else:
                worst = max(held, key=tenant_rank[k].__getitem__)
                if tenant_rank[k][m] < tenant_rank[k][worst]:
                    pairs.append((m, k))
    return pairs


def _single_connectivity_prefs(
    scenario: Scenario,
    context: Context,
    rng: np.random.Generator,
    channel_ids: list[int] | None = None,
) -> tuple[dict[int, PreferenceList], dict[int, PreferenceList]]:
    """Both-side preference lists scored by single-connectivity values."""
    channels = channel_ids if channel_ids is not None else list(range(scenario.n_channels))
    tenants = list(range(scenario.n_tenants))
    tenant_prefs = {
        k: tenant_preferences(k, channels, frozenset(), scenario, context, rng)
        for k in tenants
    }
    channel_prefs = {
        m: channel_preferences(m, tenants, scenario, context, rng) for m in channels
    }
    return channel_prefs, tenant_prefs


def allocate_gs(
    scenario: Scenario,
    context: Context,
    rng: np.random.Generator,
    tenant_quota: int = 4,
) -> Assignment:
    """Plain many-to-one deferred acceptance with a fixed tenant quota."""
    channel_prefs, tenant_prefs = _single_connectivity_prefs(scenario, context, rng)
    return gale_shapley_many_to_one(
        channel_prefs,
        tenant_prefs,
        tenant_quota,
        shape=(scenario.n_tenants, scenario.n_channels),
    )


def allocate_mrm(
    scenario: Scenario,
    context: Context,
    rng: np.random.Generator,
    min_values: list[float] | None = None,
    tenant_quota: int = 4,
) -> Assignment:
    """Minimum-rate matching: rescue phase, then deferred acceptance.

    Phase 1 loops like weakest-selects but only over tenants still below
    their floor, handing the pick to the largest deficit.  Phase 2 allocates
    whatever channels remain by plain GS; the quota counts phase-2 channels
    only, so rescue channels never crowd a tenant out of the matching.
    """
    if min_values is None:
        min_values = fairness_min_values(scenario, context)
    out = Assignment.empty(scenario.n_tenants, scenario.n_channels)
    remaining = list(range(scenario.n_channels))
    holdings: list[frozenset[int]] = [frozenset()] * scenario.n_tenants
    while remaining:
        values = [
            bundle_value(k, holdings[k], scenario, context)
            for k in range(scenario.n_tenants)
        ]
        below = [k for k in range(scenario.n_tenants) if values[k] < min_values[k]]
        if not below:
            break
        deficits = np.array([min_values[k] - values[k] for k in below])
        chooser = _pick_max(below, deficits, rng)
        scores = marginal_scores(chooser, remaining, holdings[chooser], scenario, context)
        channel = _pick_max(remaining, scores, rng)
        out.assign(chooser, channel)
        holdings[chooser] = holdings[chooser] | {channel}
        remaining.remove(channel)
    if remaining:
        channel_prefs, tenant_prefs = _single_connectivity_prefs(
            scenario, context, rng, channel_ids=remaining
        )
        holds = deferred_acceptance(channel_prefs, tenant_prefs, tenant_quota)
        for k, chans in holds.items():
            for m in chans:
                out.assign(k, m)
    return out


def allocate_mrgs(
    scenario: Scenario, context: Context, rng: np.random.Generator
) -> Assignment:
    """Multi-round GS: each BS offers one channel per round, tenant quota 1.

    Tenants re-rank the offered channels every round by the gain on top of
    what they already hold; offers that stay unmatched return to the pool.
    Channels of one BS are interchangeable, so each BS offers its
    lowest-index remaining channel.
    """
    out = Assignment.empty(scenario.n_tenants, scenario.n_channels)
    pool: dict[int, list[int]] = {bs.id: [] for bs in scenario.base_stations}
    for ch in scenario.channels:
        pool[ch.bs_id].append(ch.id)
    holdings: list[frozenset[int]] = [frozenset()] * scenario.n_tenants
    tenants = list(range(scenario.n_tenants))
    while True:
        offers = [chans[0] for chans in pool.values() if chans]
        if not offers:
            break
        tenant_prefs = {
            k: tenant_preferences(k, offers, holdings[k], scenario, context, rng)
            for k in tenants
        }
        channel_prefs = {
            m: channel_preferences(m, tenants, scenario, context, rng) for m in offers
        }
        holds = deferred_acceptance(channel_prefs, tenant_prefs, tenant_quota=1)
        for k, chans in holds.items():
            for m in chans:
                out.assign(k, m)
                holdings[k] = holdings[k] | {m}
                pool[int(scenario.channel_bs_ids[m])].remove(m)
    return out


def ttc_round(
    endowment: dict[int, int],
    tenant_prefs: dict[int, PreferenceList],
    rng: np.random.Generator | None = None,
) -> dict[int, int]:
    """One top-trading-cycles pass over tenants each endowed with one channel.

    Every remaining tenant points at the owner of its most preferred
    remaining channel; all cycles (self-loops included) trade and leave.
    Returns the final channel per tenant, a permutation of the endowment.
    """
    del rng
    owner = {ch: k for k, ch in endowment.items()}
    remaining = set(endowment)
    result: dict[int, int] = {}
    while remaining:
        live_channels = set(owner)
        targets: dict[int, int] = {}
        points: dict[int, int] = {}
        for k in remaining:
            for ch in tenant_prefs[k].items:
                if ch in live_channels:
                    targets[k] = ch
                    points[k] = owner[ch]
                    break
            else:
                raise ValueError(f"tenant {k} ranks no remaining channel")
        # every functional digraph on a finite nonempty set contains a cycle;
        # collect all cycles of the current pointer graph, then trade them
        color = dict.fromkeys(remaining, 0)
        cycles: list[list[int]] = []
        for start in sorted(remaining):
            if color[start] != 0:
                continue
            path: list[int] = []
            node = start
            while color[node] == 0:
                color[node] = 1
                path.append(node)
                node = points[node]
            if color[node] == 1:
                cycles.append(path[path.index(node):])
            for n in path:
                color[n] = 2
        for cycle in cycles:
            for k in cycle:
                result[k] = targets[k]
            for k in cycle:
                del owner[endowment[k]]
                remaining.discard(k)
    return result


def allocate_ttc(
    scenario: Scenario, context: Context, rng: np.random.Generator
) -> Assignment:
    """Round-based top trading cycles over randomly endowed channel batches.

    Each round draws up to one channel per BS (random BS order, repeated
    passes) until the batch matches the tenant count, endows the batch at
    random, and trades by current marginal preferences.  A short final batch
    involves only the endowed tenants.
    """
    out = Assignment.empty(scenario.n_tenants, scenario.n_channels)
    pool: dict[int, list[int]] = {bs.id: [] for bs in scenario.base_stations}
    for ch in scenario.channels:
        pool[ch.bs_id].append(ch.id)
    holdings: list[frozenset[int]] = [frozenset()] * scenario.n_tenants
    n_t = scenario.n_tenants
    while any(pool.values()):
        live_bs = [bs for bs in sorted(pool) if pool[bs]]
        order = [live_bs[i] for i in rng.permutation(len(live_bs))]
        batch: list[int] = []
        while len(batch) < n_t:
            took = False
            for bs in order:
                if len(batch) >= n_t:
                    break
                if pool[bs]:
                    batch.append(pool[bs].pop(0))
                    took = True
            if not took:
                break
        if len(batch) == n_t:
            participants = list(range(n_t))
        else:
            participants = sorted(
                int(k) for k in rng.choice(n_t, size=len(batch), replace=False)
            )
        shuffled = [batch[i] for i in rng.permutation(len(batch))]
        endowment = {k: shuffled[i] for i, k in enumerate(participants)}
        tenant_prefs = {
            k: tenant_preferences(k, batch, holdings[k], scenario, context, rng)
            for k in participants
        }
        traded = ttc_round(endowment, tenant_prefs)
        for k, ch in traded.items():
            out.assign(k, ch)
            holdings[k] = holdings[k] | {ch}
    return out


def gale_shapley_many_to_many(
    channel_prefs: dict[int, PreferenceList],
    tenant_prefs: dict[int, PreferenceList],
    channel_quota: int,
    tenant_quota: int,
    rng: np.random.Generator | None = None,
) -> Preallocation:
    """Many-to-many deferred acceptance producing overlapping hold sets.

    Channels propose to their best not-yet-tried tenants up to their quota;
    tenants hold their best <= quota proposals and reject the rest.  Stops
    when no channel has both spare quota and an untried tenant.
    """
    del rng
    tenant_rank = _rank_maps(tenant_prefs)
    holds: dict[int, list[int]] = {k: [] for k in tenant_prefs}
    count: dict[int, int] = {m: 0 for m in channel_prefs}
    nxt = {m: 0 for m in channel_prefs}
    pending = deque(channel_prefs)
    queued = set(channel_prefs)
    while pending:
        m = pending.popleft()
        queued.discard(m)
        plist = channel_prefs[m].items
        while count[m] < channel_quota and nxt[m] < len(plist):
            k = plist[nxt[m]]
            nxt[m] += 1
            rank = tenant_rank[k]
            holds[k].append(m)
            count[m] += 1
            if len(holds[k]) > tenant_quota:
                worst = max(holds[k], key=rank.__getitem__)
                holds[k].remove(worst)
                count[worst] -= 1
                if worst != m and worst not in queued:
                    pending.append(worst)
                    queued.add(worst)
    n_t = max(tenant_prefs, default=-1) + 1
    sets = [frozenset()] * n_t
    for k, chans in holds.items():
        sets[k] = frozenset(chans)
    return Preallocation(sets=tuple(sets))


def preallocate(
    scenario: Scenario,
    context: Context,
    rng: np.random.Generator,
    channel_quota: int = 6,
    tenant_quota: int = 6,
    cap: int = 8,
) -> Preallocation:
    """Restrict each tenant's biddable channels via many-to-many matching.

    Channels left out of every hold set are then pushed to randomly chosen
    distinct tenants with spare room (multiplicity min(channel quota, number
    of tenants below the cap)) so that no resource goes unbid while any
    tenant can still take it.
    """
    if tenant_quota > cap:
        raise ValueError(f"tenant quota {tenant_quota} exceeds preallocation cap {cap}")
    channel_prefs, tenant_prefs = _single_connectivity_prefs(scenario, context, rng)
    pre = gale_shapley_many_to_many(
        channel_prefs, tenant_prefs, channel_quota, tenant_quota
    )
    sets = [set(s) for s in pre.sets]
    covered = pre.covered_channels()
    for m in range(scenario.n_channels):
        if m in covered:
            continue
        spare = [k for k in range(scenario.n_tenants) if len(sets[k]) < cap]
        target = min(channel_quota, len(spare))
        if target == 0:
            continue
        chosen = rng.choice(len(spare), size=target, replace=False)
        for idx in chosen:
            sets[spare[int(idx)]].add(m)
    return Preallocation(sets=tuple(frozenset(s) for s in sets))
