"""Seeded Monte Carlo harness: outage and sum-power sweeps, convergence probes.

One trial draws one channel realization and reuses it for every
(scheme, beta, gamma) cell of the plan, so comparisons across schemes and
coefficients are paired. Per-trial seeds derive deterministically from the
master seed and the trial index, which lets any subset of trials be
recomputed independently. Trials are independent; aggregation is keyed and
order-independent, so identical plans reproduce bit-identical tables.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .channel import (
    FADING_MODES,
    FADING_RAYLEIGH,
    ChannelRealization,
    drop_users,
    place_base_stations,
    realize_channel,
)
from .interference import (
    OMA_MODES,
    OMA_RATE_EQUIVALENT,
    SCHEME_NOMA,
    SCHEME_OMA,
    build_global_system,
    build_oma_system,
)
from .model import SystemParams
from .solvers import ConvergenceTrace, SolveStatus, solve_centralized, solve_distributed
from .units import watts_to_dbm

# (scheme, beta, gamma_db); OMA ignores beta and is recorded under beta = 0.0
CellKey = tuple[str, float, float]


@dataclass(frozen=True)
class ExperimentPlan:
    params: SystemParams
    gamma_db_values: tuple[float, ...] = (-10.0, -8.0, -6.0, -4.0, -2.0, 0.0)
    beta_values: tuple[float, ...] = (0.0, 0.05, 0.1, 0.15)
    schemes: tuple[str, ...] = (SCHEME_NOMA, SCHEME_OMA)
    trials: int = 1000
    master_seed: int = 1
    oma_mode: str = OMA_RATE_EQUIVALENT
    fading_mode: str = FADING_RAYLEIGH

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.gamma_db_values or not self.beta_values or not self.schemes:
            raise ValueError("sweep lists must be non-empty")
        for s in self.schemes:
            if s not in (SCHEME_NOMA, SCHEME_OMA):
                raise ValueError(f"unknown scheme {s!r}")
        if self.oma_mode not in OMA_MODES:
            raise ValueError(f"unknown oma_mode {self.oma_mode!r}")
        if self.fading_mode not in FADING_MODES:
            raise ValueError(f"unknown fading_mode {self.fading_mode!r}")

    def cells(self) -> list[CellKey]:
        keys: list[CellKey] = []
        for gamma in self.gamma_db_values:
            if SCHEME_NOMA in self.schemes:
                keys += [(SCHEME_NOMA, beta, gamma) for beta in self.beta_values]
            if SCHEME_OMA in self.schemes:
                keys.append((SCHEME_OMA, 0.0, gamma))
        return keys


@dataclass(frozen=True)
class CellResult:
    status: SolveStatus
    sum_power_w: float | None  # present iff feasible


@dataclass(frozen=True)
class TrialRecord:
    index: int
    results: dict[CellKey, CellResult]

    def feasible(self, key: CellKey) -> bool:
        return self.results[key].status is SolveStatus.FEASIBLE


def trial_seed_sequence(master_seed: int, trial_index: int) -> np.random.SeedSequence:
    """Deterministic per-trial seed root mixed from (master seed, index)."""
    return np.random.SeedSequence((master_seed, trial_index))


def realize_trial(
    params: SystemParams, master_seed: int, trial_index: int, fading_mode: str
) -> ChannelRealization:
    """Draw the channel realization of one trial (drop + fading seeds split)."""
    drop_seed, fade_seed = trial_seed_sequence(master_seed, trial_index).spawn(2)
    topo = drop_users(place_base_stations(params), params, drop_seed)
    return realize_channel(topo, params, fade_seed, fading_mode)


def _with_cell_params(params: SystemParams, beta: float, gamma_db: float) -> SystemParams:
    from dataclasses import replace

    return replace(params, sic_coefficient=beta, sinr_target_db=gamma_db,
                   sic_coefficient_overrides={}, sinr_target_db_overrides={})


def run_trial(plan: ExperimentPlan, trial_index: int) -> TrialRecord:
    """Solve every (scheme, beta, gamma) cell on one shared realization."""
    realization = realize_trial(plan.params, plan.master_seed, trial_index, plan.fading_mode)
    results: dict[CellKey, CellResult] = {}
    for scheme, beta, gamma in plan.cells():
        cell_params = _with_cell_params(plan.params, beta, gamma)
        if scheme == SCHEME_NOMA:
            system = build_global_system(realization, cell_params)
        else:
            system = build_oma_system(realization, cell_params, plan.oma_mode)
        outcome = solve_centralized(system)
        power = outcome.sum_power_w if outcome.feasible else None
        results[(scheme, beta, gamma)] = CellResult(outcome.status, power)
    return TrialRecord(index=trial_index, results=results)


def run_trials(plan: ExperimentPlan) -> list[TrialRecord]:
    return [run_trial(plan, t) for t in range(plan.trials)]


@dataclass(frozen=True)
class SweepRow:
    scheme: str
    beta: float
    gamma_db: float
    trials: int
    feasible_trials: int
    outage: float
    mean_sum_power_w: float | None
    mean_sum_power_dbm: float | None


@dataclass
class ResultTable:
    rows: list[SweepRow] = field(default_factory=list)
    joint_feasible_trials: int | None = None  # set on sum-power tables

    CSV_HEADER = [
        "scheme", "beta", "gamma_min_db", "trials", "feasible_trials",
        "outage", "mean_sum_power_dbm", "mean_sum_power_watts",
    ]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="\n") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.CSV_HEADER)
            for r in self.rows:
                dbm = "NA" if r.mean_sum_power_dbm is None else repr(r.mean_sum_power_dbm)
                watts = "NA" if r.mean_sum_power_w is None else repr(r.mean_sum_power_w)
                writer.writerow([
                    r.scheme, repr(r.beta), repr(r.gamma_db), r.trials,
                    r.feasible_trials, repr(r.outage), dbm, watts,
                ])

    def row(self, scheme: str, beta: float, gamma_db: float) -> SweepRow:
        for r in self.rows:
            if r.scheme == scheme and r.beta == beta and r.gamma_db == gamma_db:
                return r
        raise KeyError((scheme, beta, gamma_db))


def _mean_power(records, key, member) -> tuple[float | None, float | None]:
    powers = [rec.results[key].sum_power_w for rec in records if member(rec)]
    if not powers:
        return None, None
    mean_w = float(np.mean(powers))
    return mean_w, float(watts_to_dbm(mean_w))


def run_outage_sweep(plan: ExperimentPlan, records: list[TrialRecord] | None = None) -> ResultTable:
    """Outage probability per plan cell: share of trials whose cell is
    infeasible. Mean powers are taken over that cell's own feasible trials."""
    if records is None:
        records = run_trials(plan)
    table = ResultTable()
    for key in plan.cells():
        scheme, beta, gamma = key
        feasible = [rec for rec in records if rec.feasible(key)]
        mean_w, mean_dbm = _mean_power(records, key, lambda rec: rec.feasible(key))
        table.rows.append(SweepRow(
            scheme=scheme, beta=beta, gamma_db=gamma, trials=len(records),
            feasible_trials=len(feasible),
            outage=1.0 - len(feasible) / len(records),
            mean_sum_power_w=mean_w, mean_sum_power_dbm=mean_dbm,
        ))
    return table


def run_sum_power_sweep(plan: ExperimentPlan, records: list[TrialRecord] | None = None) -> ResultTable:
    """Mean sum power per plan cell, averaged over the trials that are
    feasible for EVERY cell of the plan (paired comparison). An empty
    intersection yields explicit NA markers, never zeros."""
    if records is None:
        records = run_trials(plan)
    keys = plan.cells()
    joint = [rec for rec in records if all(rec.feasible(k) for k in keys)]
    in_joint = {rec.index for rec in joint}
    table = ResultTable(joint_feasible_trials=len(joint))
    for key in keys:
        scheme, beta, gamma = key
        n_feas = sum(1 for rec in records if rec.feasible(key))
        mean_w, mean_dbm = _mean_power(records, key, lambda rec: rec.index in in_joint)
        table.rows.append(SweepRow(
            scheme=scheme, beta=beta, gamma_db=gamma, trials=len(records),
            feasible_trials=len(joint),
            outage=1.0 - n_feas / len(records),
            mean_sum_power_w=mean_w, mean_sum_power_dbm=mean_dbm,
        ))
    return table


@dataclass(frozen=True)
class ProbeResult:
    trace: ConvergenceTrace
    seed_used: int
    attempt: int
    skipped: tuple[tuple[int, str], ...]  # (attempt index, status) of infeasible draws


def run_convergence_probe(
    params: SystemParams,
    gamma_db: float,
    seed: int,
    eps_star: float = 1e-6,
    fading_mode: str = FADING_RAYLEIGH,
    beta: float | None = None,
    max_attempts: int = 100,
) -> ProbeResult:
    """Full distributed-iteration trace on a feasible instance.

    Tries realizations derived from (seed, attempt) until one is feasible,
    reporting skipped attempts."""
    probe_params = _with_cell_params(
        params, params.sic_coefficient if beta is None else beta, gamma_db
    )
    skipped: list[tuple[int, str]] = []
    for attempt in range(max_attempts):
        realization = realize_trial(probe_params, seed, attempt, fading_mode)
        outcome, trace = solve_distributed(realization, probe_params, eps_star=eps_star)
        if outcome.feasible:
            return ProbeResult(trace=trace, seed_used=seed, attempt=attempt,
                               skipped=tuple(skipped))
        skipped.append((attempt, outcome.status.value))
    raise RuntimeError(
        f"no feasible realization in {max_attempts} attempts at gamma={gamma_db} dB"
    )
