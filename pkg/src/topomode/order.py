"""Order parameter, regime classification and critical pumping.

The order parameter is the difference of time-averaged mode populations,
``eta = mean(n0) - mean(n_p)``, averaged over an integer number of
oscillation periods whenever a period can be detected.
"""

from __future__ import annotations

import enum
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import Optional, Sequence

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .dynamics import (
    DEFAULT_SAMPLES_PER_PERIOD,
    DEFAULT_TOL,
    GROUND,
    DimensionlessParams,
    ModeAmplitudes,
    StepFailure,
    Trajectory,
    integrate,
    populations,
)

__all__ = [
    "AveragingConfig",
    "EtaEstimate",
    "Regime",
    "CriticalKind",
    "CriticalPoint",
    "InvalidBracket",
    "NonConvergence",
    "eta",
    "detect_period",
    "classify_regime",
    "sweep_eta",
    "find_critical_b",
]


class InvalidBracket(ValueError):
    pass


class NonConvergence(UserWarning):
    """Averages did not settle within the horizon cap (near-critical slowing)."""


@dataclass(frozen=True)
class AveragingConfig:
    max_horizon: float = 2000.0
    tolerance: float = 1e-3
    initial_horizon: float = 50.0
    ode_tol: float = DEFAULT_TOL
    samples_per_period: int = DEFAULT_SAMPLES_PER_PERIOD
    jump_threshold: float = 0.1

    def __post_init__(self):
        if not self.max_horizon >= 50:
            raise ValueError(f"max_horizon must be >= 50, got {self.max_horizon}")
        if not 1e-6 <= self.tolerance <= 1e-2:
            raise ValueError(f"tolerance must lie in [1e-6, 1e-2], got {self.tolerance}")
        if not 0 < self.initial_horizon <= self.max_horizon:
            raise ValueError("initial_horizon must lie in (0, max_horizon]")
        if self.samples_per_period < 8:
            raise ValueError("samples_per_period must be >= 8")
        if not self.jump_threshold > 0:
            raise ValueError("jump_threshold must be positive")


@dataclass(frozen=True)
class EtaEstimate:
    eta: float
    mean_n0: float
    mean_np: float
    averaging_horizon: float
    converged: bool
    period_estimate: Optional[float] = None
    # "ok", "nonconvergence" or the text of a numerical failure
    status: str = "ok"

    @classmethod
    def from_eta(cls, value, horizon, converged, period=None, status="ok"):
        return cls(value, 0.5 * (1 + value), 0.5 * (1 - value), horizon, converged, period, status)


class Regime(enum.Enum):
    LOCKED = "Locked"
    UNLOCKED = "Unlocked"
    NEAR_CRITICAL = "NearCritical"


class CriticalKind(enum.Enum):
    JUMP = "Jump"
    SMOOTH_ZERO = "SmoothZero"


@dataclass(frozen=True)
class CriticalPoint:
    b_critical: float
    bracket_width: float
    kind: CriticalKind
    eta_below: float
    eta_above: float
    bracket: tuple[float, float]


def _local_minima(traj: Trajectory) -> tuple[np.ndarray, np.ndarray]:
    """Minima of ``s = n0 - n_p`` refined by a parabola through three samples."""
    n0, n_p = populations(traj)
    s = n0 - n_p
    t = traj.times
    if len(s) < 3:
        return np.empty(0), np.empty(0)
    idx = np.nonzero((s[1:-1] < s[:-2]) & (s[1:-1] <= s[2:]))[0] + 1
    times, values = [], []
    for i in idx:
        t0, t1, t2 = t[i - 1], t[i], t[i + 1]
        s0, s1, s2 = s[i - 1], s[i], s[i + 1]
        # vertex of the interpolating parabola
        d01 = (s1 - s0) / (t1 - t0)
        d12 = (s2 - s1) / (t2 - t1)
        curv = (d12 - d01) / (t2 - t0)
        if curv <= 0:
            times.append(t1)
            values.append(s1)
            continue
        tv = 0.5 * (t0 + t1) - d01 / (2 * curv)
        tv = min(max(tv, t0), t2)
        times.append(tv)
        values.append(s0 + d01 * (tv - t0) + curv * (tv - t0) * (tv - t1))
    return np.array(times), np.array(values)


def _period_minima(traj: Trajectory) -> np.ndarray:
    """Times of the deepest minimum in each oscillation period.

    Shallow spurious minima (round-off near flat maxima, secondary dips) are
    dropped by keeping only minima whose depth matches the deepest one.
    """
    times, values = _local_minima(traj)
    if len(times) == 0:
        return times
    n0, n_p = populations(traj)
    span = float(np.ptp(n0 - n_p))
    match = max(1e-7, 1e-4 * span)
    keep = values <= values.min() + match
    return times[keep]


def detect_period(traj: Trajectory) -> Optional[float]:
    """Period of ``n0 - n_p`` from the spacing of successive minima, or None."""
    t_min = _period_minima(traj)
    if len(t_min) < 2:
        return None
    return float((t_min[-1] - t_min[0]) / (len(t_min) - 1))


def _integral_interp(traj: Trajectory) -> CubicHermiteSpline:
    n0, n_p = populations(traj)
    return CubicHermiteSpline(traj.times, traj.integral, n0 - n_p)


def _horizons(cfg: AveragingConfig):
    T = cfg.initial_horizon
    while True:
        yield T
        if T >= cfg.max_horizon:
            return
        T = min(2 * T, cfg.max_horizon)


def eta(params: DimensionlessParams, init: ModeAmplitudes = GROUND,
        cfg: AveragingConfig = AveragingConfig()) -> EtaEstimate:
    """Time-averaged population difference for one parameter set.

    Averages over the whole periods found inside a horizon that doubles up to
    ``cfg.max_horizon``. When no period fits, falls back to running averages
    over ``T, 2T, 4T, ...`` and flags ``converged=False`` unless the last two
    agree within ``cfg.tolerance`` (a NonConvergence warning is issued then).
    """
    if params.b == 0:
        # free evolution: populations are constants of motion
        value = init.n0 - init.n_p
        return EtaEstimate.from_eta(value, 0.0, True)

    traj = None
    for T in _horizons(cfg):
        traj = integrate(params, init, T, tol=cfg.ode_tol,
                         samples_per_period=cfg.samples_per_period)
        t_min = _period_minima(traj)
        if len(t_min) >= 2:
            q = _integral_interp(traj)
            t1, t2 = t_min[0], t_min[-1]
            value = float((q(t2) - q(t1)) / (t2 - t1))
            period = float((t2 - t1) / (len(t_min) - 1))
            return EtaEstimate.from_eta(_clip(value), float(t2 - t1), True, period)

    # Cesaro fallback on the longest run
    q = _integral_interp(traj)
    checkpoints = [T for T in _horizons(cfg)]
    averages = [float(q(T) / T) for T in checkpoints]
    converged = len(averages) >= 2 and abs(averages[-1] - averages[-2]) < cfg.tolerance
    status = "ok"
    if not converged:
        status = "nonconvergence"
        warnings.warn(f"eta did not converge for {params} within t'={cfg.max_horizon}",
                      NonConvergence, stacklevel=2)
    return EtaEstimate.from_eta(_clip(averages[-1]), checkpoints[-1], converged, None, status)


def _clip(value: float) -> float:
    # integration error can push |eta| a hair past 1
    return min(1.0, max(-1.0, value))


def classify_regime(params: DimensionlessParams, init: ModeAmplitudes = GROUND,
                    cfg: AveragingConfig = AveragingConfig()) -> Regime:
    """Locked if n0 stays above 1/2 over a full period, Unlocked once n_p passes 1/2."""
    if abs(init.n0 - 1.0) > 1e-12:
        raise ValueError("regime classification is defined for the ground-state start (1, 0)")
    if params.b == 0:
        return Regime.LOCKED
    for T in _horizons(cfg):
        traj = integrate(params, init, T, tol=cfg.ode_tol,
                         samples_per_period=cfg.samples_per_period, stop_above=0.5)
        if traj.stopped:
            return Regime.UNLOCKED
        if len(_period_minima(traj)) >= 2:
            return Regime.LOCKED
    return Regime.NEAR_CRITICAL


def _eta_point(b: float, a: float, delta: float, cfg: AveragingConfig,
               init: ModeAmplitudes) -> EtaEstimate:
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NonConvergence)
            return eta(DimensionlessParams(a, b, delta), init, cfg)
    except StepFailure as exc:
        return EtaEstimate(math.nan, math.nan, math.nan, 0.0, False, None, f"StepFailure: {exc}")


def sweep_eta(a: float, delta: float, b_grid: Sequence[float],
              cfg: AveragingConfig = AveragingConfig(), init: ModeAmplitudes = GROUND,
              workers: int = 1) -> list[tuple[float, EtaEstimate]]:
    """Order parameter at every pumping value of a sorted grid.

    Points are independent; with ``workers > 1`` they are spread over a process
    pool. Output order follows the grid.
    """
    grid = [float(b) for b in b_grid]
    if any(b2 < b1 for b1, b2 in zip(grid, grid[1:])):
        raise ValueError("b_grid must be sorted ascending")
    task = partial(_eta_point, a=a, delta=delta, cfg=cfg, init=init)
    if workers > 1 and len(grid) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            estimates = list(pool.map(task, grid))
    else:
        estimates = [task(b) for b in grid]
    return list(zip(grid, estimates))


def _quiet_eta(a, b, delta, cfg):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NonConvergence)
        return eta(DimensionlessParams(a, b, delta), GROUND, cfg).eta


def find_critical_b(a: float, delta: float, bracket: tuple[float, float], tol_b: float = 1e-4,
                    cfg: AveragingConfig = AveragingConfig()) -> CriticalPoint:
    """Locate the pumping value where the dynamical regime changes.

    1. If the regime classifier differs at the bracket ends, bisect on it. A
       jump in eta across the final bracket makes this a ``Jump``.
    2. Otherwise, or if the classifier flip is smooth but eta still differs by
       more than ``cfg.jump_threshold`` across the bracket, bisect on eta itself,
       always keeping the half with the larger change; this homes in on the
       discontinuity.
    3. Failing that, bisect for the first b where eta drops to
       ``cfg.tolerance`` (or fall back to the classifier flip if eta stays
       positive). The result is ``SmoothZero`` unless eta still jumps across
       the final bracket.
    """
    lo, hi = map(float, bracket)
    if not 0 <= lo < hi:
        raise InvalidBracket(f"bracket must satisfy 0 <= lo < hi, got {bracket}")
    if not tol_b > 0:
        raise ValueError("tol_b must be positive")
    thr = cfg.jump_threshold

    def regime(b):
        return classify_regime(DimensionlessParams(a, b, delta), GROUND, cfg)

    def eta_at(b):
        return _quiet_eta(a, b, delta, cfg)

    r_lo, r_hi = regime(lo), regime(hi)
    e_lo, e_hi = eta_at(lo), eta_at(hi)
    if r_lo == r_hi and abs(e_hi - e_lo) <= thr:
        raise InvalidBracket(
            f"both ends classify as {r_lo.value} and eta differs by {abs(e_hi - e_lo):.3g} <= {thr}")

    flip = None
    if r_lo != r_hi:
        b_lo, b_hi = lo, hi
        upper = r_hi != Regime.LOCKED
        while b_hi - b_lo > tol_b:
            mid = 0.5 * (b_lo + b_hi)
            if (regime(mid) != Regime.LOCKED) == upper:
                b_hi = mid
            else:
                b_lo = mid
        eb, ea = eta_at(b_lo), eta_at(b_hi)
        if abs(ea - eb) > thr:
            return CriticalPoint(0.5 * (b_lo + b_hi), b_hi - b_lo, CriticalKind.JUMP, eb, ea,
                                 (b_lo, b_hi))
        flip = (b_lo, b_hi, eb, ea)

    if abs(e_hi - e_lo) > thr:
        b_lo, b_hi = lo, hi
        eb, ea = e_lo, e_hi
        while b_hi - b_lo > tol_b:
            mid = 0.5 * (b_lo + b_hi)
            em = eta_at(mid)
            if abs(em - eb) >= abs(ea - em):
                b_hi, ea = mid, em
            else:
                b_lo, eb = mid, em
        if abs(ea - eb) > thr:
            return CriticalPoint(0.5 * (b_lo + b_hi), b_hi - b_lo, CriticalKind.JUMP, eb, ea,
                                 (b_lo, b_hi))

    zero = cfg.tolerance
    if e_lo > zero >= e_hi:
        b_lo, b_hi = lo, hi
        eb, ea = e_lo, e_hi
        while b_hi - b_lo > tol_b:
            mid = 0.5 * (b_lo + b_hi)
            em = eta_at(mid)
            if em <= zero:
                b_hi, ea = mid, em
            else:
                b_lo, eb = mid, em
        # the kind is decided by the final bracket, whichever search produced it
        kind = CriticalKind.JUMP if abs(ea - eb) > thr else CriticalKind.SMOOTH_ZERO
        return CriticalPoint(0.5 * (b_lo + b_hi), b_hi - b_lo, kind, eb, ea, (b_lo, b_hi))
    if flip is not None:
        b_lo, b_hi, eb, ea = flip
        return CriticalPoint(0.5 * (b_lo + b_hi), b_hi - b_lo, CriticalKind.SMOOTH_ZERO, eb, ea,
                             (b_lo, b_hi))
    raise InvalidBracket(f"no regime change or eta zero crossing inside {bracket}")
