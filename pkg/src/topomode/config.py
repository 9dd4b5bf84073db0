"""Run configuration: INI-style sections, validated into dataclasses.

Sections and keys (all optional; unknown ones are rejected)::

    [dynamics]   a, b, delta, horizon, tol, c0, cp, rotating, samples_per_period
    [averaging]  max_horizon, tolerance, initial_horizon, jump_threshold
    [sweep]      b_grid, bracket, tol_b, A_grid, A_bracket, tol_A, detuning_hz
    [trap]       f_r_hz, f_z_hz
    [atom]       mass_kg, scattering_length_m, atom_number, gF_mF, codata_mass, excited_mode
    [output]     dir, json, plot, workers

Grids are either ``lo:hi:num`` (inclusive linspace) or comma-separated values;
brackets are ``lo,hi``.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np

from .dynamics import DimensionlessParams, ModeAmplitudes
from .modes import ROUNDED_RB87_MASS_KG, RB87_MASS_KG, AtomSpecies, ModeIndex, PhysicalSetup, TrapConfig
from .order import AveragingConfig


class ConfigError(ValueError):
    pass


def parse_bool(text) -> bool:
    if isinstance(text, bool):
        return text
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def parse_grid(text) -> list[float]:
    text = str(text).strip()
    if not text:
        return []
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"grid must be lo:hi:num, got {text!r}")
        lo, hi, num = float(parts[0]), float(parts[1]), int(parts[2])
        if num < 1:
            raise ConfigError("grid needs at least one point")
        return [float(x) for x in np.linspace(lo, hi, num)]
    return [float(x) for x in text.split(",") if x.strip()]


def parse_pair(text) -> tuple[float, float]:
    values = [float(x) for x in str(text).split(",")]
    if len(values) != 2:
        raise ConfigError(f"expected lo,hi, got {text!r}")
    return values[0], values[1]


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, complex):
        return repr(value).strip("()")
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ",".join(_fmt(v) for v in value)
    return str(value)


@dataclass
class DynamicsSection:
    a: float = 1.0
    b: float = 0.0
    delta: float = 0.0
    horizon: float = 50.0
    tol: float = 1e-10
    c0: complex = 1 + 0j
    cp: complex = 0j
    rotating: bool = True
    samples_per_period: int = 200


@dataclass
class AveragingSection:
    max_horizon: float = 2000.0
    tolerance: float = 1e-3
    initial_horizon: float = 50.0
    jump_threshold: float = 0.1


@dataclass
class SweepSection:
    b_grid: list = field(default_factory=lambda: parse_grid("0:1:21"))
    bracket: tuple = (0.4, 0.6)
    tol_b: float = 1e-4
    A_grid: list = field(default_factory=lambda: parse_grid("0:0.3:31"))
    A_bracket: Optional[tuple] = None
    tol_A: float = 1e-4
    detuning_hz: float = 0.0


@dataclass
class TrapSection:
    f_r_hz: float = 120.0
    f_z_hz: float = 24.0


@dataclass
class AtomSection:
    mass_kg: float = ROUNDED_RB87_MASS_KG
    scattering_length_m: float = 6e-9
    atom_number: float = 1e4
    gF_mF: float = 1.0
    codata_mass: bool = False
    excited_mode: str = "100"


@dataclass
class OutputSection:
    dir: str = "."
    json: bool = False
    plot: bool = False
    workers: int = 0


_CONVERTERS = {
    "float": float,
    "int": int,
    "bool": parse_bool,
    "complex": lambda s: complex(str(s).replace(" ", "")),
    "str": str,
    "list": parse_grid,
    "tuple": parse_pair,
    "Optional[tuple]": lambda s: None if str(s).strip().lower() in ("", "none") else parse_pair(s),
}


@dataclass
class RunConfig:
    dynamics: DynamicsSection = field(default_factory=DynamicsSection)
    averaging: AveragingSection = field(default_factory=AveragingSection)
    sweep: SweepSection = field(default_factory=SweepSection)
    trap: TrapSection = field(default_factory=TrapSection)
    atom: AtomSection = field(default_factory=AtomSection)
    output: OutputSection = field(default_factory=OutputSection)

    # -- construction -----------------------------------------------------

    @classmethod
    def from_mapping(cls, data: dict) -> "RunConfig":
        cfg = cls()
        cfg.update(data)
        return cfg

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str  # keys are case-sensitive (A_grid)
        try:
            with open(path) as fh:
                parser.read_file(fh)
        except (OSError, configparser.Error) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_mapping({s: dict(parser[s]) for s in parser.sections()})

    def update(self, data: dict):
        """Apply ``{section: {key: value}}``; values may be strings or typed."""
        for section, entries in data.items():
            target = getattr(self, section, None) if section in self.section_names() else None
            if target is None:
                raise ConfigError(f"unknown section [{section}]")
            types = {f.name: f.type for f in fields(target)}
            for key, raw in entries.items():
                if key not in types:
                    raise ConfigError(f"unknown key {key!r} in [{section}]")
                try:
                    value = _CONVERTERS[types[key]](raw) if isinstance(raw, str) else raw
                except (ValueError, TypeError) as exc:
                    raise ConfigError(f"[{section}] {key}: {exc}") from exc
                setattr(target, key, value)
        self.validate()

    @staticmethod
    def section_names():
        return [f.name for f in fields(RunConfig)]

    # -- validation & echo ------------------------------------------------

    def validate(self):
        try:
            self.dimensionless()
            self.initial_state()
            self.averaging_config()
            self.physical_setup()
            ModeIndex.parse(self.atom.excited_mode)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        d = self.dynamics
        if not d.horizon > 0:
            raise ConfigError("horizon must be positive")
        if not 1e-12 <= d.tol <= 1e-4:
            raise ConfigError("tol must lie in [1e-12, 1e-4]")
        if d.samples_per_period < 8:
            raise ConfigError("samples_per_period must be >= 8")
        if self.output.workers < 0:
            raise ConfigError("workers must be >= 0")
        for name in ("b_grid", "A_grid"):
            grid = getattr(self.sweep, name)
            if any(y < x for x, y in zip(grid, grid[1:])):
                raise ConfigError(f"{name} must be sorted ascending")
            if any(not math.isfinite(x) or x < 0 for x in grid):
                raise ConfigError(f"{name} must hold finite non-negative values")

    def as_dict(self) -> dict:
        """Echo as ``{section: {key: string}}``; re-parses to an equal config."""
        return {
            name: {f.name: _fmt(getattr(getattr(self, name), f.name))
                   for f in fields(getattr(self, name))}
            for name in self.section_names()
        }

    def to_ini(self) -> str:
        lines = []
        for section, entries in self.as_dict().items():
            lines.append(f"[{section}]")
            lines += [f"{k} = {v}" for k, v in entries.items()]
            lines.append("")
        return "\n".join(lines)

    # -- typed views ------------------------------------------------------

    def dimensionless(self) -> DimensionlessParams:
        d = self.dynamics
        return DimensionlessParams(d.a, d.b, d.delta)

    def initial_state(self) -> ModeAmplitudes:
        state = ModeAmplitudes(self.dynamics.c0, self.dynamics.cp)
        if abs(state.norm - 1) > 1e-6:
            raise ConfigError(f"initial state not normalized (|c0|^2+|cp|^2 = {state.norm:g})")
        return state

    def averaging_config(self) -> AveragingConfig:
        av = self.averaging
        return AveragingConfig(max_horizon=av.max_horizon, tolerance=av.tolerance,
                               initial_horizon=av.initial_horizon, ode_tol=self.dynamics.tol,
                               samples_per_period=self.dynamics.samples_per_period,
                               jump_threshold=av.jump_threshold)

    def physical_setup(self) -> PhysicalSetup:
        at = self.atom
        mass = RB87_MASS_KG if at.codata_mass else at.mass_kg
        return PhysicalSetup(AtomSpecies(mass, at.scattering_length_m, at.atom_number),
                             TrapConfig.from_hz(self.trap.f_r_hz, self.trap.f_z_hz),
                             at.gF_mF, ModeIndex.parse(at.excited_mode))

    def __eq__(self, other):
        return isinstance(other, RunConfig) and self.as_dict() == other.as_dict()


def load(path: Optional[str | Path] = None) -> RunConfig:
    return RunConfig.from_file(path) if path else RunConfig()
