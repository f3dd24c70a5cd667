"""Independent reference implementations used to check the production code.

Everything here is deliberately slow and simple: plain bisection for the
outage inversion, exhaustive enumeration for assignments and matchings.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from chanalloc.radio import LinkState, outage_prob_multi


def bisect_outage_threshold(links: list[LinkState], epsilon: float, iters: int = 300) -> float:
    """Pure bisection inversion of the joint outage probability."""
    hi = 1.0
    while outage_prob_multi(hi, links) <= epsilon:
        hi *= 2.0
    lo = 0.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if outage_prob_multi(mid, links) > epsilon:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def bisect_outage_capacity(links: list[LinkState], params) -> float:
    """Reference epsilon-outage capacity in Mbps via plain bisection."""
    usable = [l for l in links if l.mean_sir_linear > 0]
    if not usable:
        return 0.0
    gamma = bisect_outage_threshold(usable, params.epsilon)
    return params.bandwidth_hz * math.log1p(gamma) / math.log(2.0) / 1e6


def enumerate_assignments(n_tenants: int, n_channels: int):
    """Yield every channel->owner map (owner -1 means unassigned)."""
    for owners in itertools.product(range(-1, n_tenants), repeat=n_channels):
        yield owners


def best_assignment_value(n_tenants: int, n_channels: int, value_of) -> float:
    """Exhaustive maximum of sum_k value_of(k, S_k) over all assignments."""
    best = -np.inf
    for owners in enumerate_assignments(n_tenants, n_channels):
        sets = [frozenset(m for m, o in enumerate(owners) if o == k) for k in range(n_tenants)]
        total = sum(value_of(k, sets[k]) for k in range(n_tenants))
        best = max(best, total)
    return float(best)


def random_feasible_selection(bids, n_channels: int, rng: np.random.Generator) -> list[int]:
    """A random maximal feasible bid selection (adversary for the WDP optimum)."""
    order = rng.permutation(len(bids))
    used_channels: set[int] = set()
    used_bidders: set[int] = set()
    chosen: list[int] = []
    for j in order:
        b = bids[int(j)]
        if b.bidder in used_bidders or (b.bundle & used_channels):
            continue
        chosen.append(int(j))
        used_bidders.add(b.bidder)
        used_channels |= b.bundle
    return chosen
