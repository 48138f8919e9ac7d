"""Feasibility analysis and minimum-power solvers.

Three routes to the same fixed point:

* `solve_centralized`: tests the dominant eigenvalue of B (power iteration
  with Collatz-Wielandt bounds), then solves (I - B) p = u directly. A
  non-negative solution exists iff the spectral radius is < 1; the problem is
  feasible iff additionally every power respects its cap.
* `solve_distributed`: sequential per-cell closed-form updates (each cell
  solves its own N_m x N_m system against the latest inter-cell interference)
  until the power vector stabilizes, aborting as soon as any updated power
  leaves [0, p_max]. The per-cell update map is a standard interference
  function (positive, monotone, scalable), so from p = 0 the iterates climb
  monotonically to the unique optimum whenever one exists.
* `solve_fixed_point_oracle`: plain global iteration p <- B p + u from zero.
  Kept deliberately simple as an independent cross-check of both solvers.

Solvers are single-threaded and reentrant; instances on immutable inputs may
be solved concurrently.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelRealization
from .interference import CellSubsystem, InterferenceSystem, build_cell_subsystem
from .model import GlobalIndexMap, PowerAllocation, SystemParams
from .units import watts_to_dbm

# The update norm of the distributed iteration is computed on
# microwatt-scale powers. Desk-scale allocations span roughly 1e-6..1 W, so
# the stock eps_star = 1e-6 stops once a full sweep moves the allocation by
# less than 1e-3 uW: converged to well below any cap or SINR tolerance, yet
# reachable within a handful of sweeps.
EPS_NORM_SCALE = 1e6

DBM_FLOOR = -400.0  # stand-in for 0 W so exported traces stay finite


class SolveStatus(str, enum.Enum):
    FEASIBLE = "feasible"
    INFEASIBLE_SPECTRAL = "infeasible_spectral"
    INFEASIBLE_POWER = "infeasible_power"
    INFEASIBLE_NEGATIVE = "infeasible_negative"


@dataclass(frozen=True)
class SpectralEstimate:
    """Power-iteration estimate of the dominant eigenvalue of a non-negative
    matrix, with certified lower/upper bounds."""

    value: float
    lower: float
    upper: float
    iterations: int
    converged: bool


@dataclass(frozen=True)
class SolveDiagnostics:
    spectral_radius: float | None = None
    iterations: int = 0
    residual_norm: float | None = None
    converged: bool = True
    note: str = ""


@dataclass(frozen=True)
class SolveOutcome:
    status: SolveStatus
    powers: PowerAllocation | None
    diagnostics: SolveDiagnostics

    @property
    def feasible(self) -> bool:
        return self.status is SolveStatus.FEASIBLE

    @property
    def sum_power_w(self) -> float:
        if self.powers is None:
            raise ValueError("no powers on an infeasible outcome")
        return self.powers.sum_watts


@dataclass(frozen=True)
class TraceStep:
    """Snapshot taken right after one cell's update."""

    iteration: int  # full-sweep counter, 1-based
    cell: int
    powers: np.ndarray


@dataclass
class ConvergenceTrace:
    """Per-update snapshots plus the squared update norm of each sweep.

    epsilons[l-1] is |p^(l) - p^(l-1)|_2^2 on EPS_NORM_SCALE-scaled powers.
    `iterations` counts sweeps after the initial allocation, which is the
    convention used when reporting convergence speed.
    """

    index_map: GlobalIndexMap
    eps_star: float
    steps: list[TraceStep] = field(default_factory=list)
    epsilons: list[float] = field(default_factory=list)

    @property
    def num_sweeps(self) -> int:
        return len(self.epsilons)

    @property
    def iterations(self) -> int:
        return max(0, self.num_sweeps - 1)

    def final_powers(self) -> np.ndarray:
        if not self.steps:
            return np.zeros(self.index_map.total_users)
        return self.steps[-1].powers


def spectral_radius(B: np.ndarray, tol: float = 1e-10, max_iter: int = 100_000,
                    threshold: float | None = None) -> SpectralEstimate:
    """Dominant-eigenvalue estimate of a non-negative square matrix.

    Runs power iteration on the shifted matrix B + I from a strictly positive
    start vector; the shift keeps the iterate positive, so the classical
    min/max ratio bounds bracket the dominant eigenvalue at every step and
    the iteration converges whenever B is irreducible. A preliminary probe
    detects nilpotent B (radius exactly 0) in at most N products.

    If `threshold` is given, iteration also stops as soon as the bounds place
    the radius strictly on one side of it. `converged` is False when the
    bounds never tightened to `tol` (or never separated from `threshold`).
    """
    B = np.asarray(B, dtype=float)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise ValueError("matrix must be square")
    if np.any(B < 0.0):
        raise ValueError("matrix must be non-negative")
    n = B.shape[0]

    # radius == 0 iff B^n annihilates a strictly positive vector
    y = np.ones(n)
    for k in range(n):
        y = B @ y
        if not y.any():
            return SpectralEstimate(0.0, 0.0, 0.0, k + 1, True)

    x = np.ones(n)
    lower, upper = 0.0, np.inf
    for k in range(1, max_iter + 1):
        z = x + B @ x  # (B + I) x, strictly positive
        ratios = z / x
        lower = max(0.0, float(ratios.min()) - 1.0)
        upper = float(ratios.max()) - 1.0
        if upper - lower <= tol * max(1.0, upper):
            return SpectralEstimate((lower + upper) / 2.0, lower, upper, k, True)
        if threshold is not None and (upper < threshold or lower >= threshold):
            return SpectralEstimate((lower + upper) / 2.0, lower, upper, k, True)
        x = z / np.linalg.norm(z)
    return SpectralEstimate((lower + upper) / 2.0, lower, upper, max_iter, False)


def solve_centralized(
    system: InterferenceSystem,
    delta_margin: float = 1e-9,
    neg_tol: float = 1e-12,
    spectral_tol: float = 1e-10,
    spectral_max_iter: int = 100_000,
) -> SolveOutcome:
    """Closed-form global solve of (I - B) p = u.

    Systems with spectral radius >= 1 - delta_margin are rejected as
    infeasible_spectral before factorization: the linear system turns
    numerically singular at the boundary and must fail cleanly.
    """
    cutoff = 1.0 - delta_margin
    est = spectral_radius(system.B, tol=spectral_tol, max_iter=spectral_max_iter,
                          threshold=cutoff)
    if est.lower >= cutoff or not est.converged:
        note = "" if est.converged else "spectral bounds did not separate from 1"
        return SolveOutcome(
            SolveStatus.INFEASIBLE_SPECTRAL,
            None,
            SolveDiagnostics(spectral_radius=est.value, iterations=est.iterations,
                             converged=est.converged, note=note),
        )
    n = system.index_map.total_users
    p = np.linalg.solve(np.eye(n) - system.B, system.u)
    diag = SolveDiagnostics(
        spectral_radius=est.value,
        iterations=est.iterations,
        residual_norm=float(np.linalg.norm((np.eye(n) - system.B) @ p - system.u)),
    )
    if np.any(p < -neg_tol):
        return SolveOutcome(SolveStatus.INFEASIBLE_NEGATIVE, None, diag)
    p = np.clip(p, 0.0, None)
    if np.any(p > system.pmax_w):
        return SolveOutcome(SolveStatus.INFEASIBLE_POWER, None, diag)
    return SolveOutcome(SolveStatus.FEASIBLE, PowerAllocation(p, system.index_map), diag)


def _solve_cell(sub: CellSubsystem) -> np.ndarray:
    n = sub.B.shape[0]
    return np.linalg.solve(np.eye(n) - sub.B, sub.u)


def solve_distributed(
    realization: ChannelRealization,
    params: SystemParams,
    eps_star: float = 1e-6,
    max_rounds: int = 10_000,
    cell_order: tuple[int, ...] | None = None,
    record_trace: bool = True,
) -> tuple[SolveOutcome, ConvergenceTrace]:
    """Distributed iterative power control.

    Starting from p = 0, cells update sequentially: each solves its local
    system against the other cells' current powers. If any updated power
    exceeds its cap or goes negative, the instance is declared infeasible on
    the spot. A sweep of all cells is one iteration; the loop ends when the
    squared update norm of a sweep drops below eps_star.

    Each BS only needs its own users' gains and its interference-plus-noise
    level, so the update uses strictly local information.
    """
    index_map = GlobalIndexMap(realization.users_per_cell)
    if cell_order is None:
        cell_order = tuple(range(params.num_cells))
    elif sorted(cell_order) != list(range(params.num_cells)):
        raise ValueError("cell_order must be a permutation of the cells")

    trace = ConvergenceTrace(index_map=index_map, eps_star=eps_star)
    p = np.zeros(index_map.total_users)
    status: SolveStatus | None = None
    sweeps = 0
    eps = np.inf
    while eps >= eps_star:
        if sweeps >= max_rounds:
            diag = SolveDiagnostics(iterations=trace.iterations, residual_norm=eps,
                                    converged=False,
                                    note="max_rounds exhausted; radius likely near 1")
            return SolveOutcome(SolveStatus.INFEASIBLE_SPECTRAL, None, diag), trace
        p_prev = p.copy()
        sweeps += 1
        for m in cell_order:
            sub = build_cell_subsystem(realization, params, m, p)
            pm = _solve_cell(sub)
            if np.any(pm < 0.0):
                status = SolveStatus.INFEASIBLE_NEGATIVE
            elif np.any(pm > sub.pmax_w):
                status = SolveStatus.INFEASIBLE_POWER
            if status is not None:
                diag = SolveDiagnostics(iterations=trace.iterations, converged=False)
                return SolveOutcome(status, None, diag), trace
            p[index_map.cell_slice(m)] = pm
            if record_trace:
                trace.steps.append(TraceStep(iteration=sweeps, cell=m, powers=p.copy()))
        delta = (p - p_prev) * EPS_NORM_SCALE
        eps = float(delta @ delta)
        trace.epsilons.append(eps)

    diag = SolveDiagnostics(iterations=trace.iterations, residual_norm=eps, converged=True)
    return SolveOutcome(SolveStatus.FEASIBLE, PowerAllocation(p, index_map), diag), trace


def solve_fixed_point_oracle(
    system: InterferenceSystem,
    tol: float = 1e-12,
    max_iter: int = 1_000_000,
) -> SolveOutcome:
    """Independent check: iterate p <- B p + u from zero.

    From p = 0 the iterates increase monotonically towards the fixed point
    when one exists, so iterates blowing past any plausible power budget
    signal spectral infeasibility; power caps are judged on the converged
    vector.
    """
    n = system.index_map.total_users
    guard = n * float(system.pmax_w.max()) * 1e3
    p = np.zeros(n)
    for k in range(1, max_iter + 1):
        p_next = system.B @ p + system.u
        diag = SolveDiagnostics(iterations=k, residual_norm=float(np.abs(p_next - p).max()))
        if np.linalg.norm(p_next) > guard:
            return SolveOutcome(SolveStatus.INFEASIBLE_SPECTRAL, None, diag)
        if np.abs(p_next - p).max() < tol:
            if np.any(p_next > system.pmax_w):
                return SolveOutcome(SolveStatus.INFEASIBLE_POWER, None, diag)
            return SolveOutcome(
                SolveStatus.FEASIBLE, PowerAllocation(p_next, system.index_map), diag
            )
        p = p_next
    diag = SolveDiagnostics(iterations=max_iter, converged=False,
                            note="fixed-point iteration did not reach tol; radius likely near 1")
    return SolveOutcome(SolveStatus.INFEASIBLE_SPECTRAL, None, diag)


def write_trace_csv(trace: ConvergenceTrace, path) -> None:
    """Export a trace: one row per cell update, powers in dBm.

    Zero powers are floored at DBM_FLOOR so every field stays finite; the
    epsilon column repeats each sweep's squared update norm.
    """
    index_map = trace.index_map
    header = ["iteration", "cell_updated"]
    for m, n_users in enumerate(index_map.users_per_cell):
        header += [f"p_dbm_cell{m}_user{n}" for n in range(n_users)]
    header.append("epsilon")
    with open(path, "w", newline="\n") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for step in trace.steps:
            dbm = np.maximum(watts_to_dbm(step.powers), DBM_FLOOR)
            eps = trace.epsilons[step.iteration - 1] if step.iteration <= len(trace.epsilons) else ""
            writer.writerow(
                [step.iteration, step.cell]
                + [repr(float(v)) for v in dbm]
                + [repr(float(eps)) if eps != "" else ""]
            )
