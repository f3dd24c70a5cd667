"""SIR-based connectivity model: path loss, outage probability, outage capacity.

The rate a tenant obtains from a set of channels is the highest rate whose
outage probability stays below the threshold ``epsilon``, under selection
combining of statistically independent Rician/Rayleigh fading channels.
All outage arithmetic happens in linear scale; dB enters only through the
path-loss / transmit-power bookkeeping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

LOG2 = math.log(2.0)

# Inversion exit criteria: either the outage probability at the returned
# threshold is within INVERSION_REL_TOL of epsilon, or the enclosing bracket
# has collapsed below BRACKET_REL_TOL relative width.
INVERSION_REL_TOL = 1e-3
BRACKET_REL_TOL = 1e-12
MAX_INVERSION_ITER = 200
MAX_DOUBLINGS = 1100  # 2**1100 overflows double; unreachable in practice


class OutageInversionError(RuntimeError):
    """Raised when the outage-capacity inversion fails to converge."""


@dataclass(frozen=True)
class RadioParams:
    """Invariant radio parameters shared by every link of a scenario.

    bandwidth_hz: channel bandwidth B in Hz.
    ref_distance_m: path-loss reference distance d0 in meters.
    ref_path_loss_db: path loss at d0, in dB.
    path_loss_exponent: exponent of the log-distance path-loss law.
    interference_power_dbm: constant worst-case co-channel interference.
    epsilon: outage probability threshold defining the outage capacity.
    rician_ref_db: unperturbed Rician factor in dB.
    """

    bandwidth_hz: float = 20e6
    ref_distance_m: float = 15.0
    ref_path_loss_db: float = 70.28
    path_loss_exponent: float = 2.0
    interference_power_dbm: float = -50.0
    epsilon: float = 1e-9
    rician_ref_db: float = 14.1

    def __post_init__(self) -> None:
        if self.bandwidth_hz <= 0:
            raise ValueError(f"bandwidth_hz must be positive, got {self.bandwidth_hz}")
        if self.ref_distance_m <= 0:
            raise ValueError(f"ref_distance_m must be positive, got {self.ref_distance_m}")
        if self.path_loss_exponent <= 0:
            raise ValueError(
                f"path_loss_exponent must be positive, got {self.path_loss_exponent}"
            )
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")

    @property
    def rician_ref_linear(self) -> float:
        return 10.0 ** (self.rician_ref_db / 10.0)


@dataclass(frozen=True)
class LinkState:
    """Fading state of one tenant-BS link, in linear scale.

    mean_sir_linear: local mean signal-to-interference ratio.
    rician_linear: Rician factor; 0 degenerates the link to Rayleigh fading
    (the representation of an outage-case-suppressed link).
    """

    mean_sir_linear: float
    rician_linear: float

    def __post_init__(self) -> None:
        if self.mean_sir_linear < 0:
            raise ValueError(f"mean_sir_linear must be >= 0, got {self.mean_sir_linear}")
        if self.rician_linear < 0:
            raise ValueError(f"rician_linear must be >= 0, got {self.rician_linear}")


def path_loss_db(d_m: float, params: RadioParams) -> float:
    """Log-distance path loss PL(d0) + 10*delta*log10(d/d0), in dB."""
    if d_m <= 0:
        raise ValueError(f"distance must be positive, got {d_m}")
    return params.ref_path_loss_db + 10.0 * params.path_loss_exponent * math.log10(
        d_m / params.ref_distance_m
    )


def mean_sir_linear(tx_power_dbm: float, d_m: float, params: RadioParams) -> float:
    """Local mean SIR of a link, converted from dB to a linear ratio.

    gamma_bar_dB = P_T - PL(d) - P_I; the interference term is the constant
    worst-case power from ``params``.
    """
    sir_db = tx_power_dbm - path_loss_db(d_m, params) - params.interference_power_dbm
    return 10.0 ** (sir_db / 10.0)


def outage_prob_single(gamma_th: float, link: LinkState) -> float:
    """Outage probability of one Rician/Rayleigh link at threshold gamma_th.

    P_out = gamma_th/(gamma_th + gbar) * exp(-K*gbar/(gamma_th + gbar)),
    all quantities linear.  A dead link (gbar = 0) is always in outage.
    """
    if gamma_th <= 0:
        raise ValueError(f"gamma_th must be positive, got {gamma_th}")
    g = link.mean_sir_linear
    if g == 0.0:
        return 1.0
    denom = gamma_th + g
    return (gamma_th / denom) * math.exp(-link.rician_linear * g / denom)


def outage_prob_multi(gamma_th: float, links: Iterable[LinkState]) -> float:
    """Joint outage probability of independent links under selection combining.

    Product of the single-link outage probabilities; the empty product is 1
    (no channel means certain outage).
    """
    p = 1.0
    for link in links:
        p *= outage_prob_single(gamma_th, link)
    return p


def _log_outage(x: float, gains: Sequence[float], ricians: Sequence[float]) -> float:
    # log of the joint outage probability at threshold x; gains all positive
    s = 0.0
    for g, k in zip(gains, ricians):
        s += math.log(x) - math.log(x + g) - k * g / (x + g)
    return s


def _log_outage_slope(x: float, gains: Sequence[float], ricians: Sequence[float]) -> float:
    # d log(P_out) / d log(gamma_th); strictly positive for positive gains
    s = 0.0
    for g, k in zip(gains, ricians):
        r = g / (x + g)
        s += r * (1.0 + k * x / (x + g))
    return s


def invert_outage(
    gains: Sequence[float], ricians: Sequence[float], epsilon: float
) -> float:
    """Solve P_out(gamma_th) = epsilon for gamma_th on links with positive SIR.

    Bracketed root search: the upper bracket is found by doubling from 1.0,
    then the bracket is shrunk by log-space Newton steps that fall back to
    bisection whenever a step leaves the bracket.  Exits per the module
    tolerances; running past the iteration cap raises, never returns junk.
    """
    log_eps = math.log(epsilon)
    hi = 1.0
    for _ in range(MAX_DOUBLINGS):
        if _log_outage(hi, gains, ricians) > log_eps:
            break
        hi *= 2.0
    else:
        raise OutageInversionError("no upper bracket for outage inversion")
    lo = 0.0
    x = 0.5 * hi
    for _ in range(MAX_INVERSION_ITER):
        d = _log_outage(x, gains, ricians) - log_eps
        if abs(math.expm1(d)) <= INVERSION_REL_TOL:
            return x
        if d > 0.0:
            hi = x
        else:
            lo = x
        if hi - lo <= BRACKET_REL_TOL * hi:
            return 0.5 * (lo + hi)
        step = x * math.exp(-d / _log_outage_slope(x, gains, ricians))
        if not lo < step < hi:
            step = 0.5 * (lo + hi)
        x = step
    raise OutageInversionError(
        f"outage inversion did not converge in {MAX_INVERSION_ITER} iterations"
    )


def outage_capacity(links: Sequence[LinkState], params: RadioParams) -> float:
    """Epsilon-outage capacity of a link set, in Mbps.

    B*log2(1 + gamma_th*)/1e6 where gamma_th* solves the joint outage
    equation.  An empty set, or a set whose links all have zero mean SIR,
    supports no positive rate and yields 0.
    """
    gains = [l.mean_sir_linear for l in links if l.mean_sir_linear > 0.0]
    if not gains:
        return 0.0
    ricians = [l.rician_linear for l in links if l.mean_sir_linear > 0.0]
    gamma = invert_outage(gains, ricians, params.epsilon)
    return params.bandwidth_hz * math.log1p(gamma) / LOG2 / 1e6


def outage_capacity_batch(
    masks: np.ndarray, gains: np.ndarray, ricians: np.ndarray, params: RadioParams
) -> np.ndarray:
    """Vectorized outage capacity for many link subsets of one tenant.

    masks: (n_subsets, n_links) boolean matrix selecting links per subset.
    gains / ricians: per-link mean SIR and Rician factor, linear scale.
    Returns capacities in Mbps, 0.0 for subsets with no usable link.

    Same bracketing/Newton scheme as :func:`invert_outage`, run in lockstep
    across rows; converged rows are frozen while the rest iterate.
    """
    masks = np.asarray(masks, dtype=bool)
    gains = np.asarray(gains, dtype=float)
    ricians = np.asarray(ricians, dtype=float)
    n_subsets = masks.shape[0]
    out = np.zeros(n_subsets)
    eff = masks & (gains > 0.0)
    active = eff.any(axis=1)
    if not active.any():
        return out
    m = eff[active]
    g = gains[np.newaxis, :]
    k = ricians[np.newaxis, :]
    log_eps = math.log(params.epsilon)

    def row_log_p(x: np.ndarray) -> np.ndarray:
        xc = x[:, np.newaxis]
        terms = np.log(xc) - np.log(xc + g) - k * g / (xc + g)
        return np.where(m, terms, 0.0).sum(axis=1)

    def row_slope(x: np.ndarray) -> np.ndarray:
        xc = x[:, np.newaxis]
        r = g / (xc + g)
        terms = r * (1.0 + k * xc / (xc + g))
        return np.where(m, terms, 0.0).sum(axis=1)

    hi = np.ones(m.shape[0])
    for _ in range(MAX_DOUBLINGS):
        low = row_log_p(hi) <= log_eps
        if not low.any():
            break
        hi[low] *= 2.0
    else:
        raise OutageInversionError("no upper bracket for outage inversion")
    lo = np.zeros_like(hi)
    x = 0.5 * hi
    done = np.zeros(m.shape[0], dtype=bool)
    for _ in range(MAX_INVERSION_ITER):
        d = row_log_p(x) - log_eps
        done |= np.abs(np.expm1(d)) <= INVERSION_REL_TOL
        if done.all():
            break
        live = ~done
        above = live & (d > 0.0)
        below = live & (d <= 0.0)
        hi = np.where(above, x, hi)
        lo = np.where(below, x, lo)
        collapsed = live & (hi - lo <= BRACKET_REL_TOL * hi)
        x = np.where(collapsed, 0.5 * (lo + hi), x)
        done |= collapsed
        live = ~done
        if not live.any():
            break
        with np.errstate(over="ignore"):
            step = x * np.exp(-d / row_slope(x))
        step = np.where((step > lo) & (step < hi), step, 0.5 * (lo + hi))
        x = np.where(live, step, x)
    if not done.all():
        raise OutageInversionError(
            f"outage inversion did not converge in {MAX_INVERSION_ITER} iterations"
        )
    out[active] = params.bandwidth_hz * np.log1p(x) / LOG2 / 1e6
    return out


def rho(tenant_id: int, channel_ids: Iterable[int], scenario) -> float:
    """Connectivity function: rate of a tenant holding a set of channels, Mbps.

    Maps every channel to the link state of its owning BS toward the tenant
    and returns the joint outage capacity.  Depends on nothing beyond the
    tenant's own channel set; results are memoized on the scenario.
    """
    ids = frozenset(channel_ids)
    key = (tenant_id, ids)
    cache = scenario.bundle_cache
    val = cache.get(key)
    if val is None:
        n_ch = len(scenario.channels)
        if not 0 <= tenant_id < len(scenario.tenants):
            raise KeyError(f"unknown tenant id {tenant_id}")
        for mid in ids:
            if not 0 <= mid < n_ch:
                raise KeyError(f"unknown channel id {mid}")
        links = [
            scenario.link_state(tenant_id, scenario.channels[mid].bs_id)
            for mid in sorted(ids)
        ]
        val = outage_capacity(links, scenario.params)
        cache[key] = val
    return val
