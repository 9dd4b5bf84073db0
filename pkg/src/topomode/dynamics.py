"""Two-mode amplitude equations in dimensionless form.

Time is measured in units of ``1/alpha_p0``. The equations of motion are::

    dc0/dt = -i a n_p c0 - (i/2) b exp(+i delta t) cp
    dcp/dt = -i n_0 cp  - (i/2) b exp(-i delta t) c0

By default they are integrated in the rotating frame ``cp_rot = cp exp(i delta t)``,
where the system is autonomous, and mapped back to the lab frame on output.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import dopri
from .dopri import StepFailure

__all__ = [
    "ModeAmplitudes",
    "DimensionlessParams",
    "Trajectory",
    "StepFailure",
    "GROUND",
    "derivative",
    "integrate",
    "propagate",
    "populations",
    "rabi_reference",
    "estimate_period",
]

DEFAULT_TOL = 1e-10
DEFAULT_SAMPLES_PER_PERIOD = 200
MAX_SAMPLES = 2_000_000


@dataclass(frozen=True)
class ModeAmplitudes:
    c0: complex
    cp: complex

    def __post_init__(self):
        object.__setattr__(self, "c0", complex(self.c0))
        object.__setattr__(self, "cp", complex(self.cp))
        if not all(map(cmath.isfinite, (self.c0, self.cp))):
            raise ValueError(f"non-finite amplitudes {self}")

    @property
    def n0(self) -> float:
        return abs(self.c0) ** 2

    @property
    def n_p(self) -> float:
        return abs(self.cp) ** 2

    @property
    def norm(self) -> float:
        return self.n0 + self.n_p

    def as_array(self) -> np.ndarray:
        return np.array([self.c0, self.cp])


GROUND = ModeAmplitudes(1.0, 0.0)


@dataclass(frozen=True)
class DimensionlessParams:
    """Interaction ratio ``a``, pumping ``b`` and detuning ``delta``, all in units of alpha_p0."""

    a: float
    b: float
    delta: float = 0.0

    def __post_init__(self):
        for name in ("a", "b", "delta"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)
        if self.a < 0:
            raise ValueError(f"a must be >= 0, got {self.a}")
        if self.b < 0:
            raise ValueError(f"b must be >= 0, got {self.b}")


@dataclass
class Trajectory:
    times: np.ndarray
    c0: np.ndarray
    cp: np.ndarray
    params: DimensionlessParams
    init: ModeAmplitudes
    # running integral of n0 - n_p from t=0, used for exact period averages
    integral: np.ndarray = field(repr=False)
    stopped: bool = False

    def __len__(self):
        return len(self.times)

    @property
    def states(self) -> list[ModeAmplitudes]:
        return [ModeAmplitudes(x, y) for x, y in zip(self.c0, self.cp)]

    @property
    def horizon(self) -> float:
        return float(self.times[-1])


def _check_state(state: ModeAmplitudes, tol: float = 1e-6):
    if abs(state.norm - 1.0) > tol:
        raise ValueError(f"state not normalized: |c0|^2+|cp|^2 = {state.norm!r}")


def derivative(state: ModeAmplitudes, params: DimensionlessParams, t: float,
               nonlinear: bool = True) -> tuple[complex, complex]:
    """Lab-frame time derivative ``(dc0/dt, dcp/dt)`` at dimensionless time ``t``."""
    if not math.isfinite(t):
        raise ValueError(f"non-finite time {t}")
    _check_state(state)
    c0, cp = state.c0, state.cp
    nl = 1.0 if nonlinear else 0.0
    drive = cmath.exp(1j * params.delta * t)
    dc0 = -1j * nl * params.a * state.n_p * c0 - 0.5j * params.b * drive * cp
    dcp = -1j * nl * state.n0 * cp - 0.5j * params.b * drive.conjugate() * c0
    return dc0, dcp


def estimate_period(params: DimensionlessParams, init: ModeAmplitudes = GROUND) -> float:
    """Rough oscillation period, used only to choose the sampling interval.

    Takes the largest relative-phase frequency the nonlinear terms can produce
    and combines it with the pump as in a Rabi frequency.
    """
    detuning = max(abs(1.0 - params.delta), abs(params.a + params.delta),
                   abs(init.n0 - params.a * init.n_p - params.delta))
    omega = math.hypot(params.b, detuning)
    return 2 * math.pi / max(omega, 1e-3)


def _sample_times(horizon: float, params, init, samples_per_period: int) -> np.ndarray:
    dt = estimate_period(params, init) / samples_per_period
    # sample count capped to keep memory bounded for extreme pumping
    n = min(max(int(math.ceil(horizon / dt)), 2), MAX_SAMPLES)
    return np.linspace(0.0, horizon, n + 1)


def integrate(
    params: DimensionlessParams,
    init: ModeAmplitudes = GROUND,
    horizon: float = 50.0,
    tol: float = DEFAULT_TOL,
    t_eval: Optional[Sequence[float]] = None,
    samples_per_period: int = DEFAULT_SAMPLES_PER_PERIOD,
    rotating: bool = True,
    nonlinear: bool = True,
    stop_above: Optional[float] = None,
) -> Trajectory:
    """Integrate from ``t=0`` to ``horizon`` and return lab-frame samples.

    ``t_eval`` overrides the default sampling (``samples_per_period`` points per
    estimated oscillation period); it must start at 0 and increase strictly.
    With ``stop_above`` set, the run ends at the first step where the excited
    population exceeds it; the trajectory is then truncated and flagged.
    ``nonlinear=False`` drops both interaction terms (diagnostic use).

    Raises StepFailure when the step controller cannot meet ``tol``.
    """
    if not horizon > 0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    if not 1e-12 <= tol <= 1e-4:
        raise ValueError(f"tol must lie in [1e-12, 1e-4], got {tol}")
    _check_state(init)

    if t_eval is None:
        times = _sample_times(horizon, params, init, samples_per_period)
    else:
        times = np.asarray(t_eval, dtype=float)
        if times[0] != 0.0 or np.any(np.diff(times) <= 0) or times[-1] > horizon:
            raise ValueError("t_eval must start at 0, increase strictly and end within horizon")

    y0 = np.array([init.c0, init.cp, 0.0], dtype=complex)
    t_out, y_out, stopped = dopri.solve(
        y0, 0.0, horizon, tol, times, params.a, params.b, params.delta,
        nonlinear=nonlinear, rotating=rotating,
        stop_np=np.inf if stop_above is None else stop_above)

    cp = y_out[:, 1]
    if rotating:
        cp = cp * np.exp(-1j * params.delta * t_out)
    return Trajectory(
        times=np.array(t_out),
        c0=y_out[:, 0].copy(),
        cp=cp,
        params=params,
        init=init,
        integral=y_out[:, 2].real.copy(),
        stopped=stopped,
    )


def propagate(params: DimensionlessParams, state: ModeAmplitudes, t_start: float, t_end: float,
              tol: float = DEFAULT_TOL, rotating: bool = True, nonlinear: bool = True) -> ModeAmplitudes:
    """Lab-frame state at ``t_end`` given ``state`` at ``t_start``; either direction."""
    cp = state.cp * cmath.exp(1j * params.delta * t_start) if rotating else state.cp
    y0 = np.array([state.c0, cp, 0.0], dtype=complex)
    _, y, _ = dopri.solve(y0, t_start, t_end, tol, np.array([t_end]), params.a, params.b,
                          params.delta, nonlinear=nonlinear, rotating=rotating)
    c0, cp = complex(y[-1, 0]), complex(y[-1, 1])
    if rotating:
        cp *= cmath.exp(-1j * params.delta * t_end)
    return ModeAmplitudes(c0, cp)


def populations(traj: Trajectory) -> tuple[np.ndarray, np.ndarray]:
    """Fractional populations ``(n0, n_p)`` at every sample."""
    return np.abs(traj.c0) ** 2, np.abs(traj.cp) ** 2


def rabi_reference(b: float, delta: float, t) -> np.ndarray:
    """Excited population of the linear two-level problem started in the ground mode."""
    if b == 0 and delta == 0:
        raise ValueError("(b, delta) = (0, 0) has no Rabi frequency")
    omega = math.hypot(b, delta)
    return (b / omega) ** 2 * np.sin(0.5 * omega * np.asarray(t)) ** 2
