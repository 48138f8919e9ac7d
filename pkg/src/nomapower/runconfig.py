"""Declarative run configuration: plain-text key-value files with dotted keys.

Format: one `section.key = value` per line, `#` comments and blank lines
allowed. Unknown keys are rejected with their line number; missing keys take
the desk-scale defaults. The fully resolved configuration is echoed into
every output's metadata sidecar.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

from .channel import FADING_MODES, FADING_RAYLEIGH
from .experiments import ExperimentPlan
from .interference import OMA_MODES, OMA_RATE_EQUIVALENT, SCHEME_NOMA, SCHEME_OMA
from .model import SystemParams


class ConfigError(ValueError):
    """Raised on unparseable or unknown configuration input."""


def _parse_int(text: str) -> int:
    return int(text)


def _parse_float(text: str) -> float:
    return float(text)


def _parse_int_list(text: str) -> tuple[int, ...]:
    return tuple(int(v.strip()) for v in text.split(",") if v.strip())


def _parse_float_list(text: str) -> tuple[float, ...]:
    return tuple(float(v.strip()) for v in text.split(",") if v.strip())


def _parse_str_list(text: str) -> tuple[str, ...]:
    return tuple(v.strip() for v in text.split(",") if v.strip())


def _parse_str(text: str) -> str:
    return text.strip()


@dataclass(frozen=True)
class RunConfig:
    """Mirror of SystemParams + ExperimentPlan with desk-scale defaults."""

    num_cells: int = 3
    users_per_cell: tuple[int, ...] = (3, 3, 3)
    cell_radius_m: float = 100.0
    bandwidth_hz: float = 10e6
    noise_psd_dbm_hz: float = -174.0
    max_power_dbm: float = 30.0
    sic_coefficient: float = 0.0
    sinr_target_db: float = -2.5
    min_user_bs_distance_m: float = 1.0
    gamma_db_list: tuple[float, ...] = (-10.0, -8.0, -6.0, -4.0, -2.0, 0.0)
    beta_list: tuple[float, ...] = (0.0, 0.05, 0.1, 0.15)
    schemes: tuple[str, ...] = (SCHEME_NOMA, SCHEME_OMA)
    trials: int = 1000
    master_seed: int = 1
    oma_mode: str = OMA_RATE_EQUIVALENT
    fading: str = FADING_RAYLEIGH
    eps_star: float = 1e-6
    max_rounds: int = 10_000

    def system_params(self) -> SystemParams:
        return SystemParams(
            num_cells=self.num_cells,
            users_per_cell=self.users_per_cell,
            cell_radius_m=self.cell_radius_m,
            bandwidth_hz=self.bandwidth_hz,
            noise_psd_dbm_hz=self.noise_psd_dbm_hz,
            max_power_dbm=self.max_power_dbm,
            sic_coefficient=self.sic_coefficient,
            sinr_target_db=self.sinr_target_db,
            min_user_bs_distance_m=self.min_user_bs_distance_m,
        )

    def plan(self) -> ExperimentPlan:
        return ExperimentPlan(
            params=self.system_params(),
            gamma_db_values=self.gamma_db_list,
            beta_values=self.beta_list,
            schemes=self.schemes,
            trials=self.trials,
            master_seed=self.master_seed,
            oma_mode=self.oma_mode,
            fading_mode=self.fading,
        )

    def validate(self) -> None:
        try:
            self.plan()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def metadata_items(self) -> list[tuple[str, str]]:
        items = []
        for key, (attr, _) in sorted(_KEYS.items()):
            value = getattr(self, attr)
            if isinstance(value, tuple):
                text = ",".join(str(v) for v in value)
            else:
                text = str(value)
            items.append((key, text))
        return items


# dotted config key -> (RunConfig field, parser)
_KEYS: dict[str, tuple[str, callable]] = {
    "system.num_cells": ("num_cells", _parse_int),
    "system.users_per_cell": ("users_per_cell", _parse_int_list),
    "system.cell_radius_m": ("cell_radius_m", _parse_float),
    "system.bandwidth_hz": ("bandwidth_hz", _parse_float),
    "system.noise_psd_dbm_hz": ("noise_psd_dbm_hz", _parse_float),
    "system.max_power_dbm": ("max_power_dbm", _parse_float),
    "system.sic_coefficient": ("sic_coefficient", _parse_float),
    "system.sinr_target_db": ("sinr_target_db", _parse_float),
    "system.min_user_bs_distance_m": ("min_user_bs_distance_m", _parse_float),
    "plan.gamma_db_list": ("gamma_db_list", _parse_float_list),
    "plan.beta_list": ("beta_list", _parse_float_list),
    "plan.schemes": ("schemes", _parse_str_list),
    "plan.trials": ("trials", _parse_int),
    "plan.master_seed": ("master_seed", _parse_int),
    "plan.oma_mode": ("oma_mode", _parse_str),
    "plan.fading": ("fading", _parse_str),
    "solver.eps_star": ("eps_star", _parse_float),
    "solver.max_rounds": ("max_rounds", _parse_int),
}

assert {attr for attr, _ in _KEYS.values()} == {f.name for f in fields(RunConfig)}


def parse_config_text(text: str, source: str = "<config>") -> RunConfig:
    """Parse a config document, rejecting unknown keys with line numbers."""
    values: dict[str, object] = {}
    seen: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'section.key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in seen:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r} (first on line {seen[key]})")
        seen[key] = lineno
        attr, parser = _KEYS[key]
        try:
            values[attr] = parser(value.strip())
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key!r}: {exc}") from exc
    config = replace(RunConfig(), **values)
    # users_per_cell given as a single count applies to every cell
    if len(config.users_per_cell) == 1 and config.num_cells > 1:
        config = replace(config, users_per_cell=config.users_per_cell * config.num_cells)
    try:
        config.validate()
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    return config


def load_config(path) -> RunConfig:
    with open(path, "r") as fh:
        return parse_config_text(fh.read(), source=str(path))
