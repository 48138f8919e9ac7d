"""Normalized interference systems: global, per-cell, and the OMA baseline.

The SINR constraints at equality read (I - B) p = u over flat user indices
(decoding order within each cell). Row i of B holds the interference each
unit of the other users' power contributes to user i, normalized by user i's
own gain and scaled by its SINR target; u holds the equally normalized noise
terms. Same-cell entries below the diagonal (weaker users, decoded later)
interfere fully; entries above the diagonal are residuals after SIC, scaled
by the decoding user's beta coefficient. Cross-cell entries use the
interferer's gain towards the victim's BS.

All builders are pure functions of immutable inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization
from .model import GlobalIndexMap, PowerAllocation, SystemParams

SCHEME_NOMA = "noma"
SCHEME_OMA = "oma"

OMA_RATE_EQUIVALENT = "rate-equivalent"
OMA_SAME_SINR = "same-sinr"
OMA_MODES = (OMA_RATE_EQUIVALENT, OMA_SAME_SINR)


@dataclass(frozen=True)
class InterferenceSystem:
    """Global system: B (N x N, dimensionless), u (N, watts), plus the
    per-user linear SINR targets and power caps resolved in decoding order."""

    B: np.ndarray
    u: np.ndarray
    index_map: GlobalIndexMap
    scheme: str
    gamma_lin: np.ndarray
    pmax_w: np.ndarray

    def __post_init__(self):
        n = self.index_map.total_users
        if self.B.shape != (n, n) or self.u.shape != (n,):
            raise ValueError("system dimensions do not match the index map")
        if np.any(np.diagonal(self.B) != 0.0):
            raise ValueError("B must have a zero diagonal")
        if np.any(self.B < 0.0) or np.any(self.u < 0.0):
            raise ValueError("B and u must be non-negative")


@dataclass(frozen=True)
class CellSubsystem:
    """One cell's system (I - B_m) p_m = u_m with the current inter-cell
    interference folded into u_m."""

    cell: int
    B: np.ndarray
    u: np.ndarray
    gamma_lin: np.ndarray
    own_gains: np.ndarray
    pmax_w: np.ndarray


def _ordered_user_arrays(realization: ChannelRealization, params: SystemParams):
    """Per-cell (gamma_lin, pmax_w, beta) arrays permuted into decoding order."""
    gammas = params.sinr_targets_linear()
    pmaxs = params.max_powers_watts()
    betas = params.sic_coefficients()
    out_g, out_p, out_b = [], [], []
    for m, order in enumerate(realization.decoding_order):
        out_g.append(gammas[m][order])
        out_p.append(pmaxs[m][order])
        out_b.append(betas[m][order])
    return out_g, out_p, out_b


def _same_cell_block(gamma: np.ndarray, beta: np.ndarray, own: np.ndarray) -> np.ndarray:
    """B block for one cell: gamma_i * h_j / h_i, beta_i-weighted above the
    diagonal (already-cancelled stronger users), zero diagonal."""
    n = own.size
    ratio = own[None, :] / own[:, None]
    weight = np.tril(np.ones((n, n)), k=-1) + beta[:, None] * np.triu(np.ones((n, n)), k=1)
    return gamma[:, None] * ratio * weight


def build_global_system(realization: ChannelRealization, params: SystemParams) -> InterferenceSystem:
    """Assemble the full-network NOMA system (B, u)."""
    index_map = GlobalIndexMap(realization.users_per_cell)
    if realization.users_per_cell != params.users_per_cell:
        raise ValueError("realization and params disagree on the user layout")
    gamma_c, pmax_c, beta_c = _ordered_user_arrays(realization, params)
    sigma2 = params.noise_power_watts
    n = index_map.total_users
    B = np.zeros((n, n))
    u = np.zeros(n)
    for m in range(params.num_cells):
        own = realization.own_gains(m)
        if np.any(own == 0.0):
            raise ValueError("zero own-channel gain")
        sm = index_map.cell_slice(m)
        B[sm, sm] = _same_cell_block(gamma_c[m], beta_c[m], own)
        for mj in range(params.num_cells):
            if mj == m:
                continue
            cross = realization.cross_gains(mj, m)
            B[sm, index_map.cell_slice(mj)] = gamma_c[m][:, None] * cross[None, :] / own[:, None]
        u[sm] = gamma_c[m] * sigma2 / own
    return InterferenceSystem(
        B=B,
        u=u,
        index_map=index_map,
        scheme=SCHEME_NOMA,
        gamma_lin=np.concatenate(gamma_c),
        pmax_w=np.concatenate(pmax_c),
    )


def build_cell_subsystem(
    realization: ChannelRealization,
    params: SystemParams,
    cell: int,
    other_powers,
) -> CellSubsystem:
    """Assemble one cell's local system given the other cells' powers.

    `other_powers` is a flat power vector (or PowerAllocation) over all users
    in decoding order; entries of `cell` itself are ignored. B_m depends only
    on the cell's own gains, the inter-cell term enters through u_m.
    """
    if isinstance(other_powers, PowerAllocation):
        p = other_powers.powers
    else:
        p = np.asarray(other_powers, dtype=float)
    index_map = GlobalIndexMap(realization.users_per_cell)
    if p.shape != (index_map.total_users,):
        raise ValueError("other_powers length does not match the scenario")
    if np.any(p < 0.0):
        raise ValueError("negative input powers")
    gamma_c, pmax_c, beta_c = _ordered_user_arrays(realization, params)
    own = realization.own_gains(cell)
    if np.any(own == 0.0):
        raise ValueError("zero own-channel gain")
    inter = 0.0
    for mj in range(params.num_cells):
        if mj == cell:
            continue
        inter += float(realization.cross_gains(mj, cell) @ p[index_map.cell_slice(mj)])
    sigma2 = params.noise_power_watts
    return CellSubsystem(
        cell=cell,
        B=_same_cell_block(gamma_c[cell], beta_c[cell], own),
        u=gamma_c[cell] * (inter + sigma2) / own,
        gamma_lin=gamma_c[cell],
        own_gains=own,
        pmax_w=pmax_c[cell],
    )


def oma_sinr_target(gamma_lin, n_subbands: int, oma_mode: str):
    """Per-sub-band SINR target for the OMA baseline.

    rate-equivalent: (1 + gamma)^n - 1, equating each user's 1/n-band OMA
    rate with the full-band NOMA rate at target gamma. same-sinr: gamma.
    """
    if oma_mode == OMA_RATE_EQUIVALENT:
        return (1.0 + np.asarray(gamma_lin, dtype=float)) ** n_subbands - 1.0
    if oma_mode == OMA_SAME_SINR:
        return np.asarray(gamma_lin, dtype=float)
    raise ValueError(f"unknown oma_mode {oma_mode!r}")


def build_oma_system(
    realization: ChannelRealization,
    params: SystemParams,
    oma_mode: str = OMA_RATE_EQUIVALENT,
) -> InterferenceSystem:
    """Assemble the orthogonal baseline system.

    Each cell splits the band into N_m equal sub-bands; the user at decoding
    position k occupies sub-band k, so same-cell interference vanishes and
    only same-position users of other cells couple. Per-sub-band noise is
    sigma^2 / N_m. Requires equal N_m in every cell.
    """
    index_map = GlobalIndexMap(realization.users_per_cell)
    if realization.users_per_cell != params.users_per_cell:
        raise ValueError("realization and params disagree on the user layout")
    n_per_cell = set(params.users_per_cell)
    if len(n_per_cell) != 1:
        raise ValueError("OMA sub-band pairing requires equal users_per_cell in every cell")
    n_sub = n_per_cell.pop()
    gamma_c, pmax_c, _ = _ordered_user_arrays(realization, params)
    sigma2_sub = params.noise_power_watts / n_sub
    n = index_map.total_users
    B = np.zeros((n, n))
    u = np.zeros(n)
    gamma_oma = [oma_sinr_target(g, n_sub, oma_mode) for g in gamma_c]
    for m in range(params.num_cells):
        own = realization.own_gains(m)
        if np.any(own == 0.0):
            raise ValueError("zero own-channel gain")
        sm = index_map.cell_slice(m)
        for mj in range(params.num_cells):
            if mj == m:
                continue
            cross = realization.cross_gains(mj, m)
            block = np.zeros((n_sub, n_sub))
            idx = np.arange(n_sub)
            block[idx, idx] = gamma_oma[m] * cross / own
            B[sm, index_map.cell_slice(mj)] = block
        u[sm] = gamma_oma[m] * sigma2_sub / own
    return InterferenceSystem(
        B=B,
        u=u,
        index_map=index_map,
        scheme=SCHEME_OMA,
        gamma_lin=np.concatenate(gamma_oma),
        pmax_w=np.concatenate(pmax_c),
    )


def achieved_sinr(
    realization: ChannelRealization,
    params: SystemParams,
    powers,
    scheme: str = SCHEME_NOMA,
    oma_mode: str = OMA_RATE_EQUIVALENT,
) -> np.ndarray:
    """Per-user SINR at the given powers, flat-indexed in decoding order.

    Computed from the interference sums directly (received powers at each
    BS), not through B, so it can cross-check the matrix construction.
    """
    if isinstance(powers, PowerAllocation):
        p = powers.powers
    else:
        p = np.asarray(powers, dtype=float)
    index_map = GlobalIndexMap(realization.users_per_cell)
    _, _, beta_c = _ordered_user_arrays(realization, params)
    sigma2 = params.noise_power_watts
    out = np.zeros(index_map.total_users)
    for m in range(realization.num_cells):
        own = realization.own_gains(m)
        pm = p[index_map.cell_slice(m)]
        received = pm * own
        if scheme == SCHEME_NOMA:
            inter = 0.0
            for mj in range(realization.num_cells):
                if mj == m:
                    continue
                inter += float(realization.cross_gains(mj, m) @ p[index_map.cell_slice(mj)])
            n_users = own.size
            sinr = np.zeros(n_users)
            for k in range(n_users):
                inner = received[:k].sum() + beta_c[m][k] * received[k + 1 :].sum()
                sinr[k] = received[k] / (inner + inter + sigma2)
        elif scheme == SCHEME_OMA:
            n_sub = own.size
            sinr = np.zeros(n_sub)
            for k in range(n_sub):
                inter = 0.0
                for mj in range(realization.num_cells):
                    if mj == m:
                        continue
                    pj = p[index_map.cell_slice(mj)][k]
                    inter += pj * realization.cross_gains(mj, m)[k]
                sinr[k] = received[k] / (inter + sigma2 / n_sub)
        else:
            raise ValueError(f"unknown scheme {scheme!r}")
        out[index_map.cell_slice(m)] = sinr
    return out


def dump_matrix(mat: np.ndarray, path) -> None:
    """Write one line per nonzero entry: `i j value` (full precision)."""
    mat = np.atleast_2d(np.asarray(mat, dtype=float))
    with open(path, "w", newline="\n") as fh:
        for i, j in zip(*np.nonzero(mat)):
            fh.write(f"{i} {j} {float(mat[i, j])!r}\n")
