"""Scenario parameters, user indexing, and power vectors shared by all modules.

Cells and users are 0-indexed throughout. Within a cell, the user index used
by the interference and solver modules is the decoding position (users sorted
by ascending own-cell gain), see `channel.ChannelRealization`.

All types here are immutable after construction and safe to share across
concurrent Monte Carlo workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .units import db_to_linear, dbm_to_watts


@dataclass(frozen=True)
class GlobalIndexMap:
    """Bijection between (cell m, user n) pairs and flat indices 0..N-1.

    flat(m, n) = sum(users_per_cell[:m]) + n
    """

    users_per_cell: tuple[int, ...]
    offsets: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        if not self.users_per_cell or any(n < 1 for n in self.users_per_cell):
            raise ValueError("every cell must contain at least one user")
        offs = np.concatenate(([0], np.cumsum(self.users_per_cell[:-1])))
        object.__setattr__(self, "offsets", tuple(int(o) for o in offs))

    @property
    def num_cells(self) -> int:
        return len(self.users_per_cell)

    @property
    def total_users(self) -> int:
        return sum(self.users_per_cell)

    def flat(self, cell: int, user: int) -> int:
        if not 0 <= cell < self.num_cells:
            raise IndexError(f"cell {cell} out of range")
        if not 0 <= user < self.users_per_cell[cell]:
            raise IndexError(f"user {user} out of range for cell {cell}")
        return self.offsets[cell] + user

    def unflat(self, index: int) -> tuple[int, int]:
        if not 0 <= index < self.total_users:
            raise IndexError(f"flat index {index} out of range")
        cell = int(np.searchsorted(self.offsets, index, side="right")) - 1
        return cell, index - self.offsets[cell]

    def cell_slice(self, cell: int) -> slice:
        start = self.offsets[cell]
        return slice(start, start + self.users_per_cell[cell])


@dataclass(frozen=True)
class SystemParams:
    """Static description of one multi-cell uplink scenario.

    Distances in metres, bandwidth in Hz, powers in dBm, targets in dB.
    Defaults are the desk-scale scenario: 3 cells x 3 users, 100 m radius,
    10 MHz band, -174 dBm/Hz noise, 30 dBm per-user cap.

    `sinr_target_db`, `max_power_dbm` and `sic_coefficient` are uniform
    defaults; the `*_overrides` maps allow per-user values keyed by
    (cell, user). Override keys refer to the original (pre-ordering) user
    index of a realization; builders permute them into decoding order.
    """

    num_cells: int = 3
    users_per_cell: int | tuple[int, ...] = 3
    cell_radius_m: float = 100.0
    bandwidth_hz: float = 10e6
    noise_psd_dbm_hz: float = -174.0
    max_power_dbm: float = 30.0
    sic_coefficient: float = 0.0
    sinr_target_db: float = -2.5
    min_user_bs_distance_m: float = 1.0
    sinr_target_db_overrides: Mapping[tuple[int, int], float] = field(default_factory=dict)
    max_power_dbm_overrides: Mapping[tuple[int, int], float] = field(default_factory=dict)
    sic_coefficient_overrides: Mapping[tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        users = self.users_per_cell
        if isinstance(users, int):
            users = (users,) * self.num_cells
        else:
            users = tuple(int(n) for n in users)
        object.__setattr__(self, "users_per_cell", users)
        if self.num_cells < 1:
            raise ValueError("num_cells must be >= 1")
        if len(users) != self.num_cells:
            raise ValueError("users_per_cell length must equal num_cells")
        if any(n < 1 for n in users):
            raise ValueError("every cell needs at least one user")
        if not 0.0 <= self.sic_coefficient <= 1.0:
            raise ValueError("sic_coefficient must lie in [0, 1]")
        for (_, _), beta in self.sic_coefficient_overrides.items():
            if not 0.0 <= beta <= 1.0:
                raise ValueError("per-user sic_coefficient must lie in [0, 1]")
        if not self.cell_radius_m > self.min_user_bs_distance_m > 0.0:
            raise ValueError("require cell_radius_m > min_user_bs_distance_m > 0")
        for key in (
            list(self.sinr_target_db_overrides)
            + list(self.max_power_dbm_overrides)
            + list(self.sic_coefficient_overrides)
        ):
            m, n = key
            if not (0 <= m < self.num_cells and 0 <= n < users[m]):
                raise ValueError(f"override key {key} addresses no user")

    @property
    def total_users(self) -> int:
        return sum(self.users_per_cell)

    def index_map(self) -> GlobalIndexMap:
        return GlobalIndexMap(self.users_per_cell)

    @property
    def noise_power_watts(self) -> float:
        """Receiver noise power sigma^2 = PSD * bandwidth, in watts."""
        return float(dbm_to_watts(self.noise_psd_dbm_hz) * self.bandwidth_hz)

    def _per_user(self, uniform: float, overrides) -> list[np.ndarray]:
        out = []
        for m, n_users in enumerate(self.users_per_cell):
            vals = np.full(n_users, uniform, dtype=float)
            for (cm, cn), v in overrides.items():
                if cm == m:
                    vals[cn] = v
            out.append(vals)
        return out

    def sinr_targets_linear(self) -> list[np.ndarray]:
        """Per-cell arrays of linear SINR targets, original user order."""
        return [db_to_linear(v) for v in self._per_user(self.sinr_target_db, self.sinr_target_db_overrides)]

    def max_powers_watts(self) -> list[np.ndarray]:
        """Per-cell arrays of power caps in watts, original user order."""
        return [dbm_to_watts(v) for v in self._per_user(self.max_power_dbm, self.max_power_dbm_overrides)]

    def sic_coefficients(self) -> list[np.ndarray]:
        """Per-cell arrays of residual-interference coefficients."""
        return self._per_user(self.sic_coefficient, self.sic_coefficient_overrides)


@dataclass(frozen=True)
class PowerAllocation:
    """Non-negative transmit powers in watts, flat-indexed in decoding order."""

    powers: np.ndarray
    index_map: GlobalIndexMap

    def __post_init__(self):
        p = np.asarray(self.powers, dtype=float)
        object.__setattr__(self, "powers", p)
        if p.shape != (self.index_map.total_users,):
            raise ValueError("power vector length does not match index map")
        if np.any(p < 0.0):
            raise ValueError("powers must be non-negative")

    def get(self, cell: int, user: int) -> float:
        return float(self.powers[self.index_map.flat(cell, user)])

    def cell(self, cell: int) -> np.ndarray:
        return self.powers[self.index_map.cell_slice(cell)]

    @property
    def sum_watts(self) -> float:
        return float(self.powers.sum())
