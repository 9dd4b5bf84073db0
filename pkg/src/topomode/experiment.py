"""Physical setup -> dimensionless parameters, and order parameter versus field gradient."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .dynamics import DimensionlessParams
from .modes import ModeIndex, PhysicalSetup, alpha, quad_beta, transition_frequency
from .order import (
    AveragingConfig,
    CriticalKind,
    CriticalPoint,
    EtaEstimate,
    InvalidBracket,
    find_critical_b,
    sweep_eta,
)

__all__ = [
    "PhysicalSetup",
    "DrivenExperiment",
    "ExperimentMap",
    "CriticalGradient",
    "EtaRow",
    "dimensionless_params",
    "eta_vs_A",
    "find_critical_A",
]


@dataclass(frozen=True)
class DrivenExperiment:
    setup: PhysicalSetup
    A: float  # G/cm
    detuning_hz: float = 0.0

    def __post_init__(self):
        if not (self.A >= 0 and math.isfinite(self.A)):
            raise ValueError(f"field gradient must be finite and >= 0, got {self.A}")


@dataclass(frozen=True)
class ExperimentMap:
    params: DimensionlessParams
    alpha_p0: float  # rad/s, the time unit
    alpha_0p: float
    beta: float  # rad/s, signed
    omega_p0: float  # rad/s

    def to_seconds(self, t_dimless):
        return t_dimless / self.alpha_p0

    def to_dimensionless(self, seconds):
        return seconds * self.alpha_p0


def dimensionless_params(exp: DrivenExperiment) -> ExperimentMap:
    """``a = alpha_0p/alpha_p0``, ``b = |beta|/alpha_p0``, ``delta = 2 pi f_det / alpha_p0``.

    The sign of beta only flips the phase of the excited amplitude, so ``b``
    takes its magnitude.
    """
    setup = exp.setup
    p = setup.excited_mode
    a_p0 = alpha(p, ModeIndex.GROUND, setup)
    a_0p = alpha(ModeIndex.GROUND, p, setup)
    if not a_p0 > 0:
        raise ValueError(f"alpha_p0 = {a_p0:g} rad/s is not positive; no time scale")
    beta = quad_beta(setup, exp.A, p)
    params = DimensionlessParams(a_0p / a_p0, abs(beta) / a_p0, 2 * math.pi * exp.detuning_hz / a_p0)
    return ExperimentMap(params, a_p0, a_0p, beta, transition_frequency(setup, p))


@dataclass(frozen=True)
class EtaRow:
    A: float
    a: float
    b: float
    delta: float
    alpha_p0: float
    estimate: EtaEstimate


def eta_vs_A(setup: PhysicalSetup, detuning_hz: float, A_grid: Sequence[float],
             cfg: AveragingConfig = AveragingConfig(), workers: int = 1) -> list[EtaRow]:
    grid = [float(A) for A in A_grid]
    if any(y < x for x, y in zip(grid, grid[1:])):
        raise ValueError("A_grid must be sorted ascending")
    maps = [dimensionless_params(DrivenExperiment(setup, A, detuning_hz)) for A in grid]
    a, delta = maps[0].params.a, maps[0].params.delta
    sweep = sweep_eta(a, delta, [m.params.b for m in maps], cfg, workers=workers)
    return [EtaRow(A, m.params.a, m.params.b, m.params.delta, m.alpha_p0, est)
            for A, m, (_, est) in zip(grid, maps, sweep)]


@dataclass(frozen=True)
class CriticalGradient:
    A_critical: float  # G/cm
    bracket_width: float  # G/cm
    kind: CriticalKind
    eta_below: float
    eta_above: float
    params: DimensionlessParams  # at A_critical
    alpha_p0: float
    b_point: CriticalPoint


def find_critical_A(setup: PhysicalSetup, detuning_hz: float, bracket: tuple[float, float],
                    tol_A: float = 1e-4, cfg: AveragingConfig = AveragingConfig()) -> CriticalGradient:
    """Critical gradient by bisection; b is linear in A so this reuses find_critical_b."""
    lo, hi = map(float, bracket)
    if not 0 <= lo < hi:
        raise InvalidBracket(f"bracket must satisfy 0 <= lo < hi, got {bracket}")
    unit = dimensionless_params(DrivenExperiment(setup, 1.0, detuning_hz))
    slope = unit.params.b  # b per G/cm
    a, delta = unit.params.a, unit.params.delta
    point = find_critical_b(a, delta, (slope * lo, slope * hi), tol_b=slope * tol_A, cfg=cfg)
    A_c = point.b_critical / slope
    return CriticalGradient(
        A_critical=A_c,
        bracket_width=point.bracket_width / slope,
        kind=point.kind,
        eta_below=point.eta_below,
        eta_above=point.eta_above,
        params=DimensionlessParams(a, point.b_critical, delta),
        alpha_p0=unit.alpha_p0,
        b_point=point,
    )
