from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from chanalloc.radio import RadioParams
from chanalloc.scenario import BaseStation, Channel, Scenario, Tenant


def build_scenario(
    bs_specs: list[tuple[tuple[float, float], float, int]],
    tenant_specs: list[tuple[tuple[float, float], float, float]],
    params: RadioParams | None = None,
    rician_linear: float | None = None,
    mask: np.ndarray | None = None,
    case_label: str = "I",
    seed: int = 0,
) -> Scenario:
    """Hand-built scenario: bs_specs = (position, tx_power_dbm, n_channels),
    tenant_specs = (position, c_min, c_max)."""
    params = params or RadioParams()
    base_stations = tuple(
        BaseStation(id=i, position=pos, tx_power_dbm=p, num_channels=n)
        for i, (pos, p, n) in enumerate(bs_specs)
    )
    channels = []
    for bs in base_stations:
        for _ in range(bs.num_channels):
            channels.append(Channel(id=len(channels), bs_id=bs.id))
    tenants = tuple(
        Tenant(id=k, position=pos, c_min_mbps=lo, c_max_mbps=hi)
        for k, (pos, lo, hi) in enumerate(tenant_specs)
    )
    if mask is None:
        k_lin = params.rician_ref_linear if rician_linear is None else rician_linear
        mask = np.full((len(tenants), len(base_stations)), k_lin)
    mask = np.asarray(mask, dtype=float)
    mask.setflags(write=False)
    return Scenario(
        params=params,
        base_stations=base_stations,
        channels=tuple(channels),
        tenants=tenants,
        rician_mask=mask,
        seed=seed,
        case_label=case_label,
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
