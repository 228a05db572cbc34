"""Flat key = value experiment configuration.

Keys carry their units in the name (``D_ueV``, ``BF_max_mT``) so that unit
mistakes are visible at the configuration boundary.  Values are whitespace
separated tokens; plain fractions like ``1/3`` are accepted wherever a
number is, and ``#`` starts a comment.  Defaults reproduce the reference
parameter set: S = 1, D = 5 ueV, E/D in {0, 0.1, 1/3}, isotropic g = 2,
photon energy 20 ueV, amplitudes 0-300 mT.
"""

from __future__ import annotations

from dataclasses import dataclass, fields as dc_fields
from fractions import Fraction
from pathlib import Path

import numpy as np

from .drive import POLARIZATION_NAMES

__all__ = ["ConfigError", "ExperimentConfig", "MODES", "load_config", "parse_config_text"]

MODES = ("sweep", "smfs", "cancel", "effective", "vanvleck", "field-sweep")


class ConfigError(ValueError):
    """Problem in a configuration file, with file/line diagnostics."""


@dataclass
class ExperimentConfig:
    mode: str = "sweep"
    S: float = 1.0
    D_ueV: float = 5.0
    E_over_D: tuple = (0.0, 0.1, 1.0 / 3.0)
    g: float = 2.0
    hbar_omega_ueV: float = 20.0
    polarizations: tuple = POLARIZATION_NAMES
    BF_min_mT: float = 0.0
    BF_max_mT: float = 300.0
    BF_step_mT: float = 25.0
    BF_list_mT: "tuple | None" = None
    BF_mT: float = 125.0  # fixed amplitude for field-sweep mode
    Bs_mT: tuple = (0.0, 0.0, 0.0)
    N_floquet: int = 10
    N_T: int = 100
    dBF_mT: float = 1.0
    smfs_spacing_mT: float = 0.1
    smfs_min_spacing_mT: float = 1e-5
    smfs_theta_tol: float = 1e-12
    cancel_tol_mT: float = 1e-4
    cancel_max_iterations: int = 500
    sweep_axis: str = "y"
    sweep_halfwidth_mT: float = 10.0
    sweep_step_mT: float = 0.1

    def bf_grid(self) -> np.ndarray:
        """Amplitude grid (mT): the explicit list if given, else min/step/max."""
        if self.BF_list_mT is not None:
            return np.asarray(self.BF_list_mT, dtype=float)
        n = int(round((self.BF_max_mT - self.BF_min_mT) / self.BF_step_mT))
        return self.BF_min_mT + self.BF_step_mT * np.arange(n + 1)

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {', '.join(MODES)}; got {self.mode!r}")
        for pol in self.polarizations:
            if pol not in POLARIZATION_NAMES:
                raise ConfigError(f"unknown polarization {pol!r}")
        if self.sweep_axis not in ("x", "y", "z"):
            raise ConfigError("sweep_axis must be x, y, or z")
        grid = self.bf_grid()
        if grid.size == 0 or np.any(np.diff(grid) <= 0):
            raise ConfigError("amplitude grid must be non-empty and strictly increasing")
        if self.mode != "field-sweep" and grid[0] != 0.0:
            raise ConfigError("amplitude grid must start at 0 (continuation from zero drive)")
        if len(self.Bs_mT) != 3:
            raise ConfigError("Bs_mT must have three components")
        for name in ("hbar_omega_ueV", "BF_step_mT", "sweep_step_mT", "dBF_mT"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.N_floquet < 0 or self.N_T < 2:
            raise ConfigError("N_floquet must be >= 0 and N_T >= 2")


def _number(token: str, where: str) -> float:
    try:
        return float(token)
    except ValueError:
        pass
    try:
        return float(Fraction(token))
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"{where}: cannot parse number {token!r}") from None


def _integer(token: str, where: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise ConfigError(f"{where}: cannot parse integer {token!r}") from None


def _cast(key: str, tokens: list[str], where: str):
    if key in ("mode", "sweep_axis"):
        if len(tokens) != 1:
            raise ConfigError(f"{where}: {key} takes a single value")
        return tokens[0]
    if key == "polarizations":
        return tuple(tokens)
    if key in ("E_over_D", "BF_list_mT"):
        return tuple(_number(t, where) for t in tokens)
    if key == "Bs_mT":
        if len(tokens) != 3:
            raise ConfigError(f"{where}: Bs_mT takes three components")
        return tuple(_number(t, where) for t in tokens)
    if key in ("N_floquet", "N_T", "cancel_max_iterations"):
        if len(tokens) != 1:
            raise ConfigError(f"{where}: {key} takes a single value")
        return _integer(tokens[0], where)
    if len(tokens) != 1:
        raise ConfigError(f"{where}: {key} takes a single value")
    return _number(tokens[0], where)


def parse_config_text(text: str, source: str = "<config>") -> ExperimentConfig:
    """Parse a configuration; raises ConfigError with line diagnostics."""
    known = {f.name for f in dc_fields(ExperimentConfig)}
    values: dict = {}
    seen: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}"
        if "=" not in line:
            raise ConfigError(f"{where}: expected 'key = value', got {raw.strip()!r}")
        key, _, rhs = line.partition("=")
        key = key.strip()
        tokens = rhs.split()
        if key not in known:
            raise ConfigError(f"{where}: unknown key {key!r}")
        if key in seen:
            raise ConfigError(f"{where}: duplicate key {key!r} (first set on line {seen[key]})")
        if not tokens:
            raise ConfigError(f"{where}: no value for {key!r}")
        seen[key] = lineno
        values[key] = _cast(key, tokens, where)
    cfg = ExperimentConfig(**values)
    cfg.validate()
    return cfg


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config_text(text, source=str(path))
