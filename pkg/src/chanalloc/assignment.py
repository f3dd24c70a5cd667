"""The universal allocator output: a binary tenant-by-channel matrix.

Every channel belongs to at most one tenant (column sums <= 1); a tenant may
hold any number of channels unless the producing algorithm caps its rows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class Assignment:
    matrix: np.ndarray  # (n_tenants, n_channels) of 0/1

    @classmethod
    def empty(cls, n_tenants: int, n_channels: int) -> "Assignment":
        return cls(matrix=np.zeros((n_tenants, n_channels), dtype=np.int8))

    @property
    def n_tenants(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_channels(self) -> int:
        return self.matrix.shape[1]

    def assign(self, tenant_id: int, channel_id: int) -> None:
        if self.matrix[:, channel_id].any():
            raise ValueError(f"channel {channel_id} already assigned")
        self.matrix[tenant_id, channel_id] = 1

    def channels_of(self, tenant_id: int) -> frozenset[int]:
        return frozenset(int(m) for m in np.flatnonzero(self.matrix[tenant_id]))

    def tenant_of(self, channel_id: int) -> int | None:
        owners = np.flatnonzero(self.matrix[:, channel_id])
        return int(owners[0]) if len(owners) else None

    def assigned_channels(self) -> frozenset[int]:
        return frozenset(int(m) for m in np.flatnonzero(self.matrix.any(axis=0)))

    def row_counts(self) -> np.ndarray:
        return self.matrix.sum(axis=1)

    def validate(self) -> None:
        if ((self.matrix != 0) & (self.matrix != 1)).any():
            raise ValueError("assignment matrix must be binary")
        col = self.matrix.sum(axis=0)
        if (col > 1).any():
            bad = np.flatnonzero(col > 1)
            raise ValueError(f"channels assigned more than once: {bad.tolist()}")
