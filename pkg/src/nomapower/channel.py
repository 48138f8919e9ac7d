"""Topology generation and random channel realizations.

Base stations sit on the vertices of a regular polygon with adjacent-BS
spacing of two cell radii (a single BS sits at the origin). Users are dropped
area-uniformly on the annulus [min_user_bs_distance, cell_radius] around
their own BS. Channel gain combines the log-distance pathloss
30.6 + 36.7*log10(d) with optional unit-mean exponential (Rayleigh power)
fading.

Generation is deterministic per seed; a ChannelRealization is immutable once
built, so distinct trials can run concurrently.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .model import SystemParams
from .units import db_to_linear, linear_to_db

PATHLOSS_INTERCEPT_DB = 30.6
PATHLOSS_SLOPE_DB = 36.7

FADING_RAYLEIGH = "rayleigh"
FADING_PATHLOSS_ONLY = "pathloss-only"
FADING_MODES = (FADING_RAYLEIGH, FADING_PATHLOSS_ONLY)


def pathloss_db(distance_m):
    """Log-distance pathloss in dB; distance in metres, must be > 0."""
    d = np.asarray(distance_m, dtype=float)
    if np.any(d <= 0.0):
        raise ValueError("pathloss undefined for non-positive distance")
    return PATHLOSS_INTERCEPT_DB + PATHLOSS_SLOPE_DB * np.log10(d)


@dataclass(frozen=True)
class Topology:
    """BS coordinates (M, 2) and, once dropped, per-cell user coordinates."""

    bs_positions: np.ndarray
    user_positions: tuple[np.ndarray, ...] | None = None

    @property
    def complete(self) -> bool:
        return self.user_positions is not None

    def distances(self, cell: int) -> np.ndarray:
        """(N_m, M) distances from cell's users to every BS, in metres."""
        if not self.complete:
            raise ValueError("users have not been dropped yet")
        diff = self.user_positions[cell][:, None, :] - self.bs_positions[None, :, :]
        return np.linalg.norm(diff, axis=2)


def place_base_stations(params: SystemParams) -> Topology:
    """Partial topology: one BS at the origin, or a regular M-gon with
    adjacent spacing 2 * cell_radius."""
    m = params.num_cells
    if m == 1:
        pos = np.zeros((1, 2))
    else:
        # chord between adjacent vertices = 2R  =>  circumradius R / sin(pi/M)
        circumradius = params.cell_radius_m / np.sin(np.pi / m)
        angles = 2.0 * np.pi * np.arange(m) / m
        pos = circumradius * np.stack([np.cos(angles), np.sin(angles)], axis=1)
    return Topology(bs_positions=pos)


def drop_users(topology: Topology, params: SystemParams, rng_seed) -> Topology:
    """Complete a topology with one area-uniform user drop per cell.

    Radii are drawn on the annulus [min_user_bs_distance, cell_radius]
    uniformly by area, angles uniformly; deterministic given the seed.
    """
    rng = np.random.default_rng(rng_seed)
    r_min = params.min_user_bs_distance_m
    r_max = params.cell_radius_m
    users = []
    for m, n_users in enumerate(params.users_per_cell):
        u = rng.random(n_users)
        radii = np.sqrt(r_min**2 + u * (r_max**2 - r_min**2))
        theta = 2.0 * np.pi * rng.random(n_users)
        offsets = radii[:, None] * np.stack([np.cos(theta), np.sin(theta)], axis=1)
        users.append(topology.bs_positions[m] + offsets)
    return Topology(bs_positions=topology.bs_positions, user_positions=tuple(users))


@dataclass(frozen=True)
class ChannelRealization:
    """Linear power gains for one drop, plus per-cell decoding orders.

    gains[m] has shape (N_m, M): entry (n, b) is the gain between user n of
    cell m and BS b, in original drop order. decoding_order[m][k] is the
    original index of the user at decoding position k; positions sort users
    by ascending own-cell gain (ties broken by lower original index), so the
    user decoded first sits at the last position.
    """

    gains: tuple[np.ndarray, ...]
    decoding_order: tuple[np.ndarray, ...]
    ordered_gains: tuple[np.ndarray, ...] = field(init=False)

    def __post_init__(self):
        if len(self.gains) != len(self.decoding_order):
            raise ValueError("gains and decoding_order must cover the same cells")
        n_cells = len(self.gains)
        ordered = []
        for m, g in enumerate(self.gains):
            if g.ndim != 2 or g.shape[1] != n_cells:
                raise ValueError("each gain block must be (N_m, num_cells)")
            if np.any(g <= 0.0) or not np.all(np.isfinite(g)):
                raise ValueError("channel gains must be positive and finite")
            order = np.asarray(self.decoding_order[m])
            if sorted(order.tolist()) != list(range(g.shape[0])):
                raise ValueError(f"decoding_order for cell {m} is not a permutation")
            own = g[order, m]
            if np.any(np.diff(own) < 0.0):
                raise ValueError(f"decoding_order for cell {m} is not ascending in own gain")
            ordered.append(g[order, :])
        object.__setattr__(self, "ordered_gains", tuple(ordered))

    @classmethod
    def from_gains(cls, gains) -> "ChannelRealization":
        """Build a realization from raw gain blocks, deriving decoding orders."""
        blocks = tuple(np.asarray(g, dtype=float) for g in gains)
        order = tuple(np.argsort(g[:, m], kind="stable") for m, g in enumerate(blocks))
        return cls(gains=blocks, decoding_order=order)

    @property
    def num_cells(self) -> int:
        return len(self.gains)

    @property
    def users_per_cell(self) -> tuple[int, ...]:
        return tuple(g.shape[0] for g in self.gains)

    def own_gains(self, cell: int) -> np.ndarray:
        """Own-cell gains in decoding order (ascending)."""
        return self.ordered_gains[cell][:, cell]

    def cross_gains(self, cell: int, bs: int) -> np.ndarray:
        """Gains from `cell`'s users (decoding order) towards BS `bs`."""
        return self.ordered_gains[cell][:, bs]


def realize_channel(
    topology: Topology,
    params: SystemParams,
    rng_seed,
    fading_mode: str = FADING_RAYLEIGH,
) -> ChannelRealization:
    """Draw the gain tensor for a complete topology.

    gain = 10^(-pathloss_dB/10) * F with F = 1 (pathloss-only) or
    F ~ Exp(1) (Rayleigh power fading), independently per (user, BS) link.
    """
    if fading_mode not in FADING_MODES:
        raise ValueError(f"unknown fading_mode {fading_mode!r}")
    if not topology.complete:
        raise ValueError("topology has no user positions")
    rng = np.random.default_rng(rng_seed)
    blocks = []
    for m in range(params.num_cells):
        d = topology.distances(m)
        if np.any(d < params.min_user_bs_distance_m):
            raise ValueError("a user sits closer to a BS than min_user_bs_distance_m")
        g = db_to_linear(-pathloss_db(d))
        if fading_mode == FADING_RAYLEIGH:
            g = g * rng.exponential(1.0, size=d.shape)
        blocks.append(g)
    return ChannelRealization.from_gains(blocks)


def dump_channel(realization: ChannelRealization, path) -> None:
    """Write one row per (cell, user, bs) with the gain in linear and dB."""
    with open(path, "w", newline="\n") as fh:
        writer = csv.writer(fh)
        writer.writerow(["cell", "user", "bs", "gain_linear", "gain_db"])
        for m, g in enumerate(realization.gains):
            for n in range(g.shape[0]):
                for b in range(g.shape[1]):
                    writer.writerow([m, n, b, repr(float(g[n, b])), repr(float(linear_to_db(g[n, b])))])
