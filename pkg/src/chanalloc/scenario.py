"""World model and randomized scenario generation.

A scenario fixes the rectangle geometry, base stations on its boundary,
tenants in its interior, the channel inventory, and the Rician-factor mask
encoding which tenant-BS links are degraded to Rayleigh fading (obstacle
cases).  Scenarios are immutable after construction and deterministic given
(config, seed); the mutable dict used to memoize connectivity values is
transparent caching only.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Sequence

import numpy as np

from . import radio
from .radio import LinkState, RadioParams
from .rng import spawn_rng

# Fraction of tenant-BS pairs whose Rician factor is suppressed to 0.
CASE_FRACTIONS = {"I": 0.0, "II": 0.25, "III": 0.5}


@dataclass(frozen=True)
class BaseStation:
    id: int
    position: tuple[float, float]
    tx_power_dbm: float
    num_channels: int


@dataclass(frozen=True)
class Channel:
    id: int
    bs_id: int


@dataclass(frozen=True)
class Tenant:
    id: int
    position: tuple[float, float]
    c_min_mbps: float
    c_max_mbps: float

    def __post_init__(self) -> None:
        if not 0 < self.c_min_mbps < self.c_max_mbps:
            raise ValueError(
                f"need 0 < c_min < c_max, got ({self.c_min_mbps}, {self.c_max_mbps})"
            )


@dataclass(frozen=True)
class GeneratorConfig:
    """Randomization protocol knobs; defaults are the benchmark setup."""

    area: tuple[float, float] = (100.0, 50.0)
    n_bs: int = 8
    n_tenants: int = 6
    tx_power_interval_dbm: tuple[float, float] = (15.0, 25.0)
    channels_per_bs_choices: tuple[int, ...] = (1, 2, 3)
    channel_cap: int = 20
    c_min_interval: tuple[float, float] = (0.1, 0.2)
    c_max_interval: tuple[float, float] = (15.0, 25.0)
    case_fraction: float = 0.0
    params: RadioParams = field(default_factory=RadioParams)

    def __post_init__(self) -> None:
        if self.n_bs < 1 or self.n_tenants < 1:
            raise ValueError("need at least one BS and one tenant")
        if min(self.channels_per_bs_choices) * self.n_bs > self.channel_cap:
            raise ValueError(
                f"{self.n_bs} BSs cannot fit under the channel cap "
                f"{self.channel_cap} with minimum per-BS count "
                f"{min(self.channels_per_bs_choices)}"
            )
        if not 0.0 <= self.case_fraction < 1.0:
            raise ValueError(f"case_fraction must lie in [0, 1), got {self.case_fraction}")

    @property
    def case_label(self) -> str:
        for label, frac in CASE_FRACTIONS.items():
            if self.case_fraction == frac:
                return label
        return f"frac={self.case_fraction:g}"


@dataclass(frozen=True)
class Scenario:
    """One immutable world state: the input to every allocation algorithm."""

    params: RadioParams
    base_stations: tuple[BaseStation, ...]
    channels: tuple[Channel, ...]
    tenants: tuple[Tenant, ...]
    rician_mask: np.ndarray  # (n_tenants, n_bs) of linear Rician factors
    seed: int
    case_label: str
    # Memoized connectivity values keyed by (tenant_id, frozenset(channel_ids)).
    bundle_cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def n_tenants(self) -> int:
        return len(self.tenants)

    @property
    def n_channels(self) -> int:
        return len(self.channels)

    @property
    def n_bs(self) -> int:
        return len(self.base_stations)

    def distance(self, tenant_id: int, bs_id: int) -> float:
        tx, ty = self.tenants[tenant_id].position
        bx, by = self.base_stations[bs_id].position
        return float(np.hypot(tx - bx, ty - by))

    @cached_property
    def mean_sir_matrix(self) -> np.ndarray:
        """(n_tenants, n_bs) matrix of linear mean SIR values."""
        out = np.empty((self.n_tenants, self.n_bs))
        for k in range(self.n_tenants):
            for i, bs in enumerate(self.base_stations):
                out[k, i] = radio.mean_sir_linear(
                    bs.tx_power_dbm, self.distance(k, i), self.params
                )
        out.setflags(write=False)
        return out

    def link_state(self, tenant_id: int, bs_id: int) -> LinkState:
        if not 0 <= tenant_id < self.n_tenants:
            raise KeyError(f"unknown tenant id {tenant_id}")
        if not 0 <= bs_id < self.n_bs:
            raise KeyError(f"unknown base station id {bs_id}")
        return LinkState(
            mean_sir_linear=float(self.mean_sir_matrix[tenant_id, bs_id]),
            rician_linear=float(self.rician_mask[tenant_id, bs_id]),
        )

    @cached_property
    def channel_bs_ids(self) -> np.ndarray:
        out = np.array([ch.bs_id for ch in self.channels], dtype=int)
        out.setflags(write=False)
        return out

    def tenant_link_arrays(self, tenant_id: int) -> tuple[np.ndarray, np.ndarray]:
        """Per-channel (mean SIR, Rician factor) arrays for one tenant."""
        bs_ids = self.channel_bs_ids
        return (
            self.mean_sir_matrix[tenant_id, bs_ids],
            self.rician_mask[tenant_id, bs_ids],
        )

    @cached_property
    def single_link_capacity_matrix(self) -> np.ndarray:
        """(n_tenants, n_channels) matrix of single-connectivity rates, Mbps."""
        out = np.empty((self.n_tenants, self.n_channels))
        eye = np.eye(self.n_channels, dtype=bool)
        for k in range(self.n_tenants):
            gains, ricians = self.tenant_link_arrays(k)
            out[k] = radio.outage_capacity_batch(eye, gains, ricians, self.params)
            for m in range(self.n_channels):
                self.bundle_cache.setdefault((k, frozenset((m,))), float(out[k, m]))
        out.setflags(write=False)
        return out

    def clear_bundle_cache(self) -> None:
        """Drop memoized bundle values, keeping the single-link entries."""
        matrix = self.single_link_capacity_matrix
        self.bundle_cache.clear()
        for k in range(self.n_tenants):
            for m in range(self.n_channels):
                self.bundle_cache[(k, frozenset((m,)))] = float(matrix[k, m])

    def to_json_dict(self) -> dict:
        return {
            "seed": self.seed,
            "case": self.case_label,
            "params": {
                "bandwidth_hz": self.params.bandwidth_hz,
                "ref_distance_m": self.params.ref_distance_m,
                "ref_path_loss_db": self.params.ref_path_loss_db,
                "path_loss_exponent": self.params.path_loss_exponent,
                "interference_power_dbm": self.params.interference_power_dbm,
                "epsilon": self.params.epsilon,
                "rician_ref_db": self.params.rician_ref_db,
            },
            "base_stations": [
                {
                    "id": bs.id,
                    "position": list(bs.position),
                    "tx_power_dbm": bs.tx_power_dbm,
                    "num_channels": bs.num_channels,
                }
                for bs in self.base_stations
            ],
            "channels": [{"id": ch.id, "bs_id": ch.bs_id} for ch in self.channels],
            "tenants": [
                {
                    "id": t.id,
                    "position": list(t.position),
                    "c_min_mbps": t.c_min_mbps,
                    "c_max_mbps": t.c_max_mbps,
                }
                for t in self.tenants
            ],
            "rician_mask": [[float(v) for v in row] for row in self.rician_mask],
        }

    def dump_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    @staticmethod
    def from_json_dict(doc: dict) -> "Scenario":
        mask = np.array(doc["rician_mask"], dtype=float)
        mask.setflags(write=False)
        return Scenario(
            params=RadioParams(**doc["params"]),
            base_stations=tuple(
                BaseStation(
                    id=b["id"],
                    position=tuple(b["position"]),
                    tx_power_dbm=b["tx_power_dbm"],
                    num_channels=b["num_channels"],
                )
                for b in doc["base_stations"]
            ),
            channels=tuple(Channel(id=c["id"], bs_id=c["bs_id"]) for c in doc["channels"]),
            tenants=tuple(
                Tenant(
                    id=t["id"],
                    position=tuple(t["position"]),
                    c_min_mbps=t["c_min_mbps"],
                    c_max_mbps=t["c_max_mbps"],
                )
                for t in doc["tenants"]
            ),
            rician_mask=mask,
            seed=doc["seed"],
            case_label=doc["case"],
        )

    @staticmethod
    def load_json(text: str) -> "Scenario":
        return Scenario.from_json_dict(json.loads(text))


def _perimeter_point(u: float, width: float, height: float) -> tuple[float, float]:
    # Map an arc-length position u in [0, perimeter) to boundary coordinates,
    # walking bottom, right, top, left.
    if u < width:
        return (u, 0.0)
    u -= width
    if u < height:
        return (width, u)
    u -= height
    if u < width:
        return (width - u, height)
    u -= width
    return (0.0, height - u)


def generate(config: GeneratorConfig, seed: int) -> Scenario:
    """Draw one scenario; a pure function of (config, seed).

    Draw order (fixed for reproducibility): BS perimeter positions, BS
    transmit powers, per-BS channel counts (sequentially clamped so the
    running total never exceeds the cap), tenant positions, per-tenant
    c_min then c_max, and finally the suppressed tenant-BS pairs.
    """
    rng = spawn_rng("scenario", seed)
    width, height = config.area
    perimeter = 2.0 * (width + height)

    positions = [
        _perimeter_point(float(u), width, height)
        for u in rng.uniform(0.0, perimeter, size=config.n_bs)
    ]
    lo_p, hi_p = config.tx_power_interval_dbm
    powers = rng.uniform(lo_p, hi_p, size=config.n_bs)

    counts = []
    total = 0
    for _ in range(config.n_bs):
        c = int(rng.choice(config.channels_per_bs_choices))
        c = min(c, config.channel_cap - total)
        counts.append(c)
        total += c

    base_stations = tuple(
        BaseStation(id=i, position=positions[i], tx_power_dbm=float(powers[i]),
                    num_channels=counts[i])
        for i in range(config.n_bs)
    )
    channels = []
    for bs in base_stations:
        for _ in range(bs.num_channels):
            channels.append(Channel(id=len(channels), bs_id=bs.id))

    tenant_pos = []
    for _ in range(config.n_tenants):
        while True:
            x = float(rng.uniform(0.0, width))
            y = float(rng.uniform(0.0, height))
            if 0.0 < x < width and 0.0 < y < height:
                tenant_pos.append((x, y))
                break
    lo_min, hi_min = config.c_min_interval
    lo_max, hi_max = config.c_max_interval
    c_mins = rng.uniform(lo_min, hi_min, size=config.n_tenants)
    c_maxs = rng.uniform(lo_max, hi_max, size=config.n_tenants)
    tenants = tuple(
        Tenant(id=k, position=tenant_pos[k], c_min_mbps=float(c_mins[k]),
               c_max_mbps=float(c_maxs[k]))
        for k in range(config.n_tenants)
    )

    n_pairs = config.n_tenants * config.n_bs
    n_suppressed = round(config.case_fraction * n_pairs)
    mask = np.full((config.n_tenants, config.n_bs), config.params.rician_ref_linear)
    if n_suppressed:
        flat = rng.choice(n_pairs, size=n_suppressed, replace=False)
        mask[np.unravel_index(flat, mask.shape)] = 0.0
    mask.setflags(write=False)

    return Scenario(
        params=config.params,
        base_stations=base_stations,
        channels=tuple(channels),
        tenants=tenants,
        rician_mask=mask,
        seed=seed,
        case_label=config.case_label,
    )


def config_for_case(case: str, base: GeneratorConfig | None = None) -> GeneratorConfig:
    """A copy of ``base`` with the outage fraction of the named case."""
    if case not in CASE_FRACTIONS:
        raise ValueError(f"unknown case {case!r}; expected one of {sorted(CASE_FRACTIONS)}")
    cfg = base if base is not None else GeneratorConfig()
    return replace(cfg, case_fraction=CASE_FRACTIONS[case])


def single_link_capacity_matrix(scenario: Scenario) -> np.ndarray:
    """Single-connectivity rate of every (tenant, channel) pair, Mbps."""
    return scenario.single_link_capacity_matrix
