"""Command-line entry point.

Subcommands:
  solve       one realization through the centralized and distributed solvers
  montecarlo  outage + sum-power sweep CSVs with a metadata sidecar
  converge    distributed-iteration trace CSV for one feasible instance

Exit codes: 0 success/feasible, 2 infeasible, 1 usage or config error.
All outputs are deterministic functions of (config, seed).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .experiments import run_outage_sweep, run_sum_power_sweep, run_trials, realize_trial, run_convergence_probe
from .interference import SCHEME_NOMA, SCHEME_OMA, achieved_sinr, build_global_system, build_oma_system
from .runconfig import ConfigError, RunConfig, load_config, _parse_float_list, _parse_str_list
from .solvers import solve_centralized, solve_distributed, write_trace_csv
from .units import linear_to_db, watts_to_dbm

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; 2 is reserved for "infeasible"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_common(p: _Parser) -> None:
    p.add_argument("--config", type=Path, help="key-value config file")
    p.add_argument("--seed", type=int, help="override plan.master_seed")
    p.add_argument("--oma-mode", choices=("rate-equivalent", "same-sinr"))
    p.add_argument("--fading", choices=("rayleigh", "pathloss-only"))


def build_parser() -> _Parser:
    parser = _Parser(prog="nomapower", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"nomapower {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve one seeded realization")
    _add_common(p_solve)
    p_solve.add_argument("--scheme", choices=(SCHEME_NOMA, SCHEME_OMA), default=SCHEME_NOMA)
    p_solve.add_argument("--beta", type=float, help="override system.sic_coefficient")
    p_solve.add_argument("--gamma-db", type=str, help="override system.sinr_target_db")
    p_solve.add_argument("--dump", type=Path, help="write per-user powers to this CSV")

    p_mc = sub.add_parser("montecarlo", help="run the outage / sum-power sweeps")
    _add_common(p_mc)
    p_mc.add_argument("--trials", type=int, help="override plan.trials")
    p_mc.add_argument("--out-dir", type=Path, default=Path("out"))
    p_mc.add_argument("--scheme", type=str, help="comma list overriding plan.schemes")
    p_mc.add_argument("--beta", type=str, help="comma list overriding plan.beta_list")
    p_mc.add_argument("--gamma-db", type=str, help="comma list overriding plan.gamma_db_list")

    p_conv = sub.add_parser("converge", help="trace the distributed iteration")
    _add_common(p_conv)
    p_conv.add_argument("--beta", type=float, help="override system.sic_coefficient")
    p_conv.add_argument("--gamma-db", type=str, help="override system.sinr_target_db")
    p_conv.add_argument("--out-dir", type=Path, default=Path("out"))
    return parser


def _load(args) -> RunConfig:
    config = load_config(args.config) if args.config else RunConfig()
    updates = {}
    if args.seed is not None:
        updates["master_seed"] = args.seed
    if args.oma_mode:
        updates["oma_mode"] = args.oma_mode
    if args.fading:
        updates["fading"] = args.fading
    if getattr(args, "trials", None) is not None:
        updates["trials"] = args.trials
    beta = getattr(args, "beta", None)
    if beta is not None:
        if isinstance(beta, float):
            updates["sic_coefficient"] = beta
        else:
            updates["beta_list"] = _parse_float_list(beta)
    gamma = getattr(args, "gamma_db", None)
    if gamma is not None:
        values = _parse_float_list(gamma)
        if args.command == "montecarlo":
            updates["gamma_db_list"] = values
        else:
            if len(values) != 1:
                raise ConfigError("this command takes a single --gamma-db value")
            updates["sinr_target_db"] = values[0]
    scheme = getattr(args, "scheme", None)
    if scheme is not None and args.command == "montecarlo":
        updates["schemes"] = _parse_str_list(scheme)
    config = replace(config, **updates)
    config.validate()
    return config


def _write_metadata(path: Path, config: RunConfig) -> None:
    lines = [f"nomapower.version = {__version__}"]
    lines += [f"{k} = {v}" for k, v in config.metadata_items()]
    # modeling assumptions that the scenario description does not pin down
    lines.append("assumption.bs_layout = regular polygon, adjacent spacing 2*cell_radius")
    lines.append(f"assumption.fading = {config.fading}")
    lines.append("assumption.oma_pairing = cross-cell sub-band pairing by decoding position")
    path.write_text("\n".join(lines) + "\n")


def cmd_solve(args) -> int:
    config = _load(args)
    params = config.system_params()
    realization = realize_trial(params, config.master_seed, 0, config.fading)
    if args.scheme == SCHEME_OMA:
        system = build_oma_system(realization, params, config.oma_mode)
    else:
        system = build_global_system(realization, params)
    central = solve_centralized(system)

    distributed = None
    if args.scheme == SCHEME_NOMA:
        distributed, _ = solve_distributed(
            realization, params, eps_star=config.eps_star, max_rounds=config.max_rounds
        )

    print(f"scheme: {args.scheme}   seed: {config.master_seed}   "
          f"beta: {params.sic_coefficient}   gamma_min: {params.sinr_target_db} dB")
    diag = central.diagnostics
    print(f"status: {central.status.value}"
          + (f"   spectral_radius: {diag.spectral_radius:.6f}" if diag.spectral_radius is not None else ""))
    if distributed is not None:
        print(f"distributed: {distributed.status.value}   "
              f"iterations (after initial allocation): {distributed.diagnostics.iterations}")
    if not central.feasible:
        return EXIT_INFEASIBLE

    p = central.powers
    sinr_db = linear_to_db(achieved_sinr(realization, params, p, scheme=args.scheme,
                                         oma_mode=config.oma_mode))
    header = f"{'cell':>4} {'user':>4} {'p_central_dbm':>14}"
    if distributed is not None and distributed.feasible:
        header += f" {'p_distrib_dbm':>14}"
    header += f" {'sinr_db':>12}"
    print(header)
    rows = []
    for m in range(params.num_cells):
        for n in range(params.users_per_cell[m]):
            i = system.index_map.flat(m, n)
            row = f"{m:>4} {n:>4} {float(watts_to_dbm(p.powers[i])):>14.4f}"
            if distributed is not None and distributed.feasible:
                row += f" {float(watts_to_dbm(distributed.powers.powers[i])):>14.4f}"
            row += f" {float(sinr_db[i]):>12.6f}"
            print(row)
            rows.append((m, n, p.powers[i]))
    print(f"sum_power: {p.sum_watts!r} W ({float(watts_to_dbm(p.sum_watts)):.4f} dBm)")
    if args.dump:
        with open(args.dump, "w", newline="\n") as fh:
            fh.write("cell,user,power_watts,power_dbm\n")
            for m, n, w in rows:
                fh.write(f"{m},{n},{w!r},{float(watts_to_dbm(w))!r}\n")
    return EXIT_OK


def cmd_montecarlo(args) -> int:
    config = _load(args)
    plan = config.plan()
    out_dir: Path = args.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    records = run_trials(plan)
    outage = run_outage_sweep(plan, records)
    sum_power = run_sum_power_sweep(plan, records)
    outage.write_csv(out_dir / "outage.csv")
    sum_power.write_csv(out_dir / "sum_power.csv")
    _write_metadata(out_dir / "metadata.txt", config)
    print(f"wrote {out_dir / 'outage.csv'}")
    print(f"wrote {out_dir / 'sum_power.csv'}")
    print(f"jointly feasible trials: {sum_power.joint_feasible_trials}/{plan.trials}")
    return EXIT_OK


def cmd_converge(args) -> int:
    config = _load(args)
    params = config.system_params()
    probe = run_convergence_probe(
        params, params.sinr_target_db, config.master_seed,
        eps_star=config.eps_star, fading_mode=config.fading,
    )
    out_dir: Path = args.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    trace_path = out_dir / "trace.csv"
    write_trace_csv(probe.trace, trace_path)
    _write_metadata(out_dir / "metadata.txt", config)
    for attempt, status in probe.skipped:
        print(f"skipped attempt {attempt}: {status}")
    print(f"feasible on attempt {probe.attempt}; converged after "
          f"{probe.trace.iterations} iterations (post initial allocation), "
          f"final epsilon {probe.trace.epsilons[-1]!r}")
    print(f"wrote {trace_path}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "solve":
            return cmd_solve(args)
        if args.command == "montecarlo":
            return cmd_montecarlo(args)
        if args.command == "converge":
            return cmd_converge(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    raise AssertionError("unreachable")


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
