"""Variational trap modes and the two-mode amplitudes built from them.

Internal units: lengths in the radial oscillator length ``l_r``, energies in
``hbar*omega_r``. In these units the Gross-Pitaevskii energy functional reads

    E[phi] = int [ |grad phi|^2/2 + (r^2 + lam^2 z^2)|phi|^2/2 + g/2 |phi|^4 ] d^3r

with ``lam = omega_z/omega_r`` and ``g = 4 pi (N-1) a_s / l_r``.

Every ansatz is a fixed shape stretched by ``sqrt(u)`` radially and ``sqrt(v)``
axially, so its energy is exactly

    E(u, v) = K_r u + P_r / u + K_z v + lam^2 P_z / v + (g/2) Q u sqrt(v)

with shape constants obtained from Gaussian moments of small polynomials.
"""

from __future__ import annotations

import enum
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Optional

import numpy as np
from numpy.polynomial import Polynomial
from scipy import constants
from scipy.optimize import minimize

from .quadrature import QuadratureFailure, gauss_legendre_2d

__all__ = [
    "ModeIndex",
    "TrapConfig",
    "AtomSpecies",
    "PhysicalSetup",
    "VariationalMode",
    "MinimizationFailure",
    "QuadratureFailure",
    "wavefunction",
    "variational_energy",
    "energy_gradient",
    "minimize_variational",
    "eigenvalue",
    "density_overlap",
    "transition_frequency",
    "alpha",
    "beta_integral",
    "quad_beta",
    "overlap",
    "ROUNDED_RB87_MASS_KG",
    "RB87_MASS_KG",
]

HBAR = constants.hbar
MU_B = constants.physical_constants["Bohr magneton"][0]
ROUNDED_RB87_MASS_KG = 1.44e-25
RB87_MASS_KG = 86.909180527 * constants.atomic_mass
GAUSS_PER_CM = 1e-2  # T/m


class MinimizationFailure(RuntimeError):
    pass


class ModeIndex(enum.Enum):
    """Quantum numbers ``(n, m, k)``: radial nodes, angular momentum, axial nodes."""

    GROUND = (0, 0, 0)
    VORTEX = (0, 1, 0)
    AXIAL = (0, 0, 1)
    RADIAL = (1, 0, 0)

    @property
    def label(self) -> str:
        return "".join(map(str, self.value))

    @property
    def m(self) -> int:
        return self.value[1]

    @classmethod
    def parse(cls, text) -> "ModeIndex":
        if isinstance(text, cls):
            return text
        key = str(text).strip().strip("()").replace(",", "").replace(" ", "")
        for mode in cls:
            if mode.label == key or mode.name.lower() == key.lower():
                return mode
        raise ValueError(f"unknown mode {text!r}; expected one of 000, 010, 001, 100")


@dataclass(frozen=True)
class _Shape:
    # radial density (u/pi) p_r(us) exp(-us) with s = r^2, and the radial
    # kinetic density (u/pi) u k_r(us) exp(-us) of |d_r R|^2 + m^2 R^2/r^2;
    # axial density sqrt(v/pi) p_z(v z^2) exp(-v z^2), kinetic v k_z(v z^2) likewise
    p_r: Polynomial
    k_r: Polynomial
    p_z: Polynomial
    k_z: Polynomial


_X = Polynomial([0, 1])
_ONE = Polynomial([1])
_SHAPES = {
    ModeIndex.GROUND: _Shape(_ONE, _X, _ONE, _X),
    ModeIndex.VORTEX: _Shape(_X, (1 - _X) ** 2 + 1, _ONE, _X),
    ModeIndex.AXIAL: _Shape(_ONE, _X, 2 * _X, 2 * (1 - _X) ** 2),
    ModeIndex.RADIAL: _Shape((1 - _X) ** 2, _X * (3 - _X) ** 2, _ONE, _X),
}


def _radial_moment(poly: Polynomial, rate: float = 1.0) -> float:
    # int_0^inf poly(s) exp(-rate s) ds
    return sum(c * math.factorial(n) / rate ** (n + 1) for n, c in enumerate(poly.coef))


def _axial_moment(poly: Polynomial, rate: float = 1.0) -> float:
    # int_-inf^inf poly(z^2) exp(-rate z^2) dz
    return sum(c * math.gamma(n + 0.5) / rate ** (n + 0.5) for n, c in enumerate(poly.coef))


def _stretch(poly: Polynomial, scale: float) -> Polynomial:
    # p(scale * x) as a polynomial in x
    return Polynomial(poly.coef * scale ** np.arange(len(poly.coef)))


def density_overlap(j: ModeIndex, uj: float, vj: float, k: ModeIndex, uk: float, vk: float) -> float:
    """``int |phi_j|^2 |phi_k|^2 d^3r`` in closed form (units of l_r^-3)."""
    sj, sk = _SHAPES[j], _SHAPES[k]
    radial = (uj * uk / math.pi) * _radial_moment(_stretch(sj.p_r, uj) * _stretch(sk.p_r, uk), uj + uk)
    axial = (math.sqrt(vj * vk) / math.pi) * _axial_moment(
        _stretch(sj.p_z, vj) * _stretch(sk.p_z, vk), vj + vk)
    return radial * axial


@lru_cache(maxsize=None)
def _energy_constants(index: ModeIndex) -> tuple[float, float, float, float, float]:
    s = _SHAPES[index]
    k_r = 0.5 * _radial_moment(s.k_r)
    p_r = 0.5 * _radial_moment(_X * s.p_r)
    k_z = 0.5 * _axial_moment(s.k_z) / math.sqrt(math.pi)
    p_z = 0.5 * _axial_moment(_X * s.p_z) / math.sqrt(math.pi)
    q = density_overlap(index, 1.0, 1.0, index, 1.0, 1.0)
    return k_r, p_r, k_z, p_z, q


def _check_widths(u, v):
    if not (u > 0 and v > 0):
        raise ValueError(f"variational widths must be positive, got u={u}, v={v}")


def _energy_parts(index, u, v, g, lam):
    _check_widths(u, v)
    k_r, p_r, k_z, p_z, q = _energy_constants(ModeIndex.parse(index))
    kinetic = k_r * u + k_z * v
    potential = p_r / u + lam**2 * p_z / v
    interaction = 0.5 * g * q * u * math.sqrt(v)
    return kinetic, potential, interaction


def variational_energy(index, u: float, v: float, g: float, lam: float) -> float:
    """Energy functional evaluated on the ansatz, in units of hbar*omega_r."""
    return sum(_energy_parts(index, u, v, g, lam))


def energy_gradient(index, u, v, g, lam) -> np.ndarray:
    _check_widths(u, v)
    k_r, p_r, k_z, p_z, q = _energy_constants(ModeIndex.parse(index))
    G = 0.5 * g * q
    return np.array([
        k_r - p_r / u**2 + G * math.sqrt(v),
        k_z - lam**2 * p_z / v**2 + 0.5 * G * u / math.sqrt(v),
    ])


def energy_hessian(index, u, v, g, lam) -> np.ndarray:
    k_r, p_r, k_z, p_z, q = _energy_constants(ModeIndex.parse(index))
    G = 0.5 * g * q
    huv = 0.5 * G / math.sqrt(v)
    return np.array([
        [2 * p_r / u**3, huv],
        [huv, 2 * lam**2 * p_z / v**3 - 0.25 * G * u / v**1.5],
    ])


@dataclass(frozen=True)
class VariationalMode:
    index: ModeIndex
    u: float
    v: float
    g: float
    lam: float
    energy: float = field(compare=False)
    eigenvalue: float = field(compare=False)

    @property
    def normalization(self) -> float:
        """Prefactor of the wavefunction (units l_r^-3/2)."""
        u, v = self.u, self.v
        if self.index is ModeIndex.GROUND or self.index is ModeIndex.RADIAL:
            return (u**2 * v / math.pi**3) ** 0.25
        if self.index is ModeIndex.VORTEX:
            return u * (v / math.pi**3) ** 0.25
        return (4 * u**2 * v**3 / math.pi**3) ** 0.25

    def __call__(self, r, phi, z):
        return wavefunction(self, r, phi, z)


def wavefunction(mode: VariationalMode, r, phi, z):
    """Mode function at cylindrical point(s) ``(r, phi, z)`` in units of l_r."""
    r, phi, z = np.asarray(r, float), np.asarray(phi, float), np.asarray(z, float)
    u, v = mode.u, mode.v
    envelope = mode.normalization * np.exp(-(u * r**2 + v * z**2) / 2)
    if mode.index is ModeIndex.GROUND:
        return envelope + 0j
    if mode.index is ModeIndex.VORTEX:
        return envelope * r * np.exp(1j * phi)
    if mode.index is ModeIndex.AXIAL:
        return envelope * z + 0j
    return envelope * (1 - u * r**2) + 0j


def _radial_profile(mode: VariationalMode, r, z):
    # real (r, z) part of the wavefunction, azimuthal phase stripped
    return wavefunction(mode, r, 0.0, z).real


def eigenvalue(mode: VariationalMode, g: Optional[float] = None, lam: Optional[float] = None) -> float:
    """Expectation of the nonlinear Hamiltonian: interaction counted twice."""
    g = mode.g if g is None else g
    lam = mode.lam if lam is None else lam
    kinetic, potential, interaction = _energy_parts(mode.index, mode.u, mode.v, g, lam)
    return kinetic + potential + 2 * interaction


def _polish(index, u, v, g, lam, steps=50):
    # Newton iterations on the closed form; quadratic convergence near the minimum
    for _ in range(steps):
        grad = energy_gradient(index, u, v, g, lam)
        if np.linalg.norm(grad) < 1e-13:
            break
        step = np.linalg.solve(energy_hessian(index, u, v, g, lam), grad)
        t = 1.0
        while (u - t * step[0] <= 0 or v - t * step[1] <= 0) and t > 1e-8:
            t *= 0.5
        u, v = u - t * step[0], v - t * step[1]
    return u, v


def _cache_path() -> Optional[Path]:
    root = os.environ.get("TOPOMODE_CACHE_DIR")
    return Path(root) / "modes.json" if root else None


def _disk_lookup(key):
    path = _cache_path()
    if path is None or not path.exists():
        return None
    try:
        return json.loads(path.read_text()).get(key)
    except (OSError, ValueError):
        return None


def _disk_store(key, value):
    path = _cache_path()
    if path is None:
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        table = json.loads(path.read_text()) if path.exists() else {}
    except (OSError, ValueError):
        table = {}
    table[key] = value
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        json.dump(table, fh, sort_keys=True, indent=1)
    os.replace(tmp, path)


@lru_cache(maxsize=256)
def _minimize_cached(index: ModeIndex, g: float, lam: float) -> tuple[float, float]:
    key = f"{index.label}|{g!r}|{lam!r}"
    hit = _disk_lookup(key)
    if hit is not None:
        return tuple(hit)

    def objective(x):
        u, v = np.exp(x)
        return variational_energy(index, u, v, g, lam)

    def jac(x):
        u, v = np.exp(x)
        return energy_gradient(index, u, v, g, lam) * np.array([u, v])

    best = None
    for u0 in (0.25, 1.0, 4.0):
        for v0 in (0.25, 1.0, 4.0):
            res = minimize(objective, np.log([u0, v0]), jac=jac, method="BFGS",
                           options={"gtol": 1e-10})
            u, v = _polish(index, *np.exp(res.x), g, lam)
            grad = np.linalg.norm(energy_gradient(index, u, v, g, lam))
            if not grad < 1e-8:
                continue
            e = variational_energy(index, u, v, g, lam)
            if best is None or e < best[0]:
                best = (e, u, v)
    if best is None:
        raise MinimizationFailure(f"no start converged for mode {index.label}, g={g}, lam={lam}")
    _, u, v = best
    if np.any(np.linalg.eigvalsh(energy_hessian(index, u, v, g, lam)) <= 0):
        raise MinimizationFailure(f"stationary point for mode {index.label} is not a minimum")
    _disk_store(key, [u, v])
    return u, v


def minimize_variational(index, g: float, lam: float) -> VariationalMode:
    """Widths ``(u, v)`` minimizing the variational energy of one mode.

    Multi-start BFGS in log-widths from a 3x3 grid, then Newton polishing on
    the closed form. Results are memoized per ``(index, g, lam)`` (and on disk
    when ``TOPOMODE_CACHE_DIR`` is set).
    """
    index = ModeIndex.parse(index)
    if g < 0:
        raise ValueError("attractive interactions (g < 0) are not supported")
    if not lam > 0:
        raise ValueError("trap anisotropy must be positive")
    g, lam = float(g), float(lam)
    u, v = map(float, _minimize_cached(index, g, lam))
    mode = VariationalMode(index, u, v, g, lam, float(variational_energy(index, u, v, g, lam)), 0.0)
    return VariationalMode(index, u, v, g, lam, mode.energy, float(eigenvalue(mode)))


@dataclass(frozen=True)
class TrapConfig:
    omega_r: float
    omega_z: float

    def __post_init__(self):
        if not (self.omega_r > 0 and self.omega_z > 0):
            raise ValueError("trap frequencies must be positive")

    @classmethod
    def from_hz(cls, f_r: float, f_z: float) -> "TrapConfig":
        return cls(2 * math.pi * f_r, 2 * math.pi * f_z)

    @property
    def lam(self) -> float:
        return self.omega_z / self.omega_r

    def oscillator_length(self, mass: float) -> float:
        return math.sqrt(HBAR / (mass * self.omega_r))


@dataclass(frozen=True)
class AtomSpecies:
    mass: float
    scattering_length: float
    atom_number: float

    def __post_init__(self):
        if self.atom_number < 2:
            raise ValueError("need at least two atoms")
        if not self.scattering_length > 0:
            raise ValueError("only repulsive interactions (a_s > 0) are supported")
        if not self.mass > 0:
            raise ValueError("mass must be positive")

    @property
    def coupling(self) -> float:
        """``A_s = 4 pi (N-1) hbar^2 a_s / m`` in J m^3."""
        return 4 * math.pi * (self.atom_number - 1) * HBAR**2 * self.scattering_length / self.mass

    def dimensionless_coupling(self, l_r: float) -> float:
        return 4 * math.pi * (self.atom_number - 1) * self.scattering_length / l_r


@dataclass(frozen=True)
class PhysicalSetup:
    species: AtomSpecies
    trap: TrapConfig
    gF_mF: float = 1.0
    excited_mode: ModeIndex = ModeIndex.RADIAL

    @classmethod
    def rb87_reference(cls, atom_number=1e4, scattering_length=6e-9, f_r=120.0, f_z=24.0,
                   gF_mF=1.0, codata_mass=False) -> "PhysicalSetup":
        mass = RB87_MASS_KG if codata_mass else ROUNDED_RB87_MASS_KG
        return cls(AtomSpecies(mass, scattering_length, atom_number), TrapConfig.from_hz(f_r, f_z),
                   gF_mF)

    @property
    def l_r(self) -> float:
        return self.trap.oscillator_length(self.species.mass)

    @property
    def g(self) -> float:
        return self.species.dimensionless_coupling(self.l_r)

    @property
    def lam(self) -> float:
        return self.trap.lam

    def mode(self, index) -> VariationalMode:
        return minimize_variational(index, self.g, self.lam)


def transition_frequency(setup: PhysicalSetup, p=ModeIndex.RADIAL) -> float:
    """``(E_p - E_0)/hbar`` in rad/s."""
    p = ModeIndex.parse(p)
    if p is ModeIndex.GROUND:
        raise ValueError("transition frequency needs an excited mode")
    return (setup.mode(p).eigenvalue - setup.mode(ModeIndex.GROUND).eigenvalue) * setup.trap.omega_r


def _alpha_dimless(mj: VariationalMode, mk: VariationalMode, g: float) -> float:
    jk = density_overlap(mj.index, mj.u, mj.v, mk.index, mk.u, mk.v)
    jj = density_overlap(mj.index, mj.u, mj.v, mj.index, mj.u, mj.v)
    return g * (2 * jk - jj)


def alpha(j, k, setup: PhysicalSetup) -> float:
    """Interaction amplitude ``alpha_jk`` in rad/s; not symmetric in (j, k)."""
    mj, mk = setup.mode(ModeIndex.parse(j)), setup.mode(ModeIndex.parse(k))
    return _alpha_dimless(mj, mk, setup.g) * setup.trap.omega_r


def beta_integral(ground: VariationalMode, excited: VariationalMode, rtol=1e-10) -> float:
    """``int phi_0* sqrt(r^2 + 4 z^2) phi_p d^3r`` in units of l_r.

    The azimuthal integral is done analytically (it vanishes unless the
    excited mode carries m = 0). The (r, z) half-plane is mapped to
    ``r = rho sin(t), z = rho cos(t)/2`` so that the field magnitude becomes
    ``rho`` and the integrand is smooth; the result is tensor Gauss-Legendre
    with node doubling.
    """
    if excited.index.m != ground.index.m:
        return 0.0
    u_sum = ground.u + excited.u
    v_sum = ground.v + excited.v
    decay = 0.5 * min(u_sum, 0.25 * v_sum)
    rho_max = math.sqrt(60.0 / decay)

    def integrand(rho, t):
        r = rho * np.sin(t)
        z = 0.5 * rho * np.cos(t)
        # 2 pi r (azimuth) * rho (field) * rho/2 (Jacobian)
        return math.pi * rho**3 * np.sin(t) * _radial_profile(ground, r, z) * _radial_profile(excited, r, z)

    value, _ = gauss_legendre_2d(integrand, (0.0, rho_max), (0.0, math.pi), rtol=rtol)
    return float(value)


def quad_beta(setup: PhysicalSetup, A_gauss_per_cm: float, p=ModeIndex.RADIAL) -> float:
    """Field coupling ``beta`` (rad/s) for a quadrupole gradient given in G/cm.

    Signed: the sign follows the overlap integral, which for the breathing
    mode is negative. Linear in the gradient.
    """
    if A_gauss_per_cm < 0:
        raise ValueError("field gradient must be non-negative")
    ground = setup.mode(ModeIndex.GROUND)
    excited = setup.mode(ModeIndex.parse(p))
    per_unit = _beta_per_gauss_cm(setup, ground, excited)
    return per_unit * A_gauss_per_cm


@lru_cache(maxsize=64)
def _beta_per_gauss_cm(setup, ground, excited) -> float:
    integral = beta_integral(ground, excited)
    return setup.gF_mF * MU_B * GAUSS_PER_CM * setup.l_r * integral / HBAR


def overlap(mj: VariationalMode, mk: VariationalMode, rtol=1e-12) -> complex:
    """``int phi_j* phi_k d^3r`` by quadrature (azimuth by the periodic trapezoid rule)."""
    nodes = np.linspace(0.0, 2 * math.pi, 16, endpoint=False)
    azimuth = 2 * math.pi * np.mean(np.exp(1j * (mk.index.m - mj.index.m) * nodes))
    if abs(azimuth) < 1e-14 * 2 * math.pi:
        azimuth = 0.0
    r_max = math.sqrt(60.0 / (0.5 * (mj.u + mk.u)))
    z_max = math.sqrt(60.0 / (0.5 * (mj.v + mk.v)))

    def integrand(r, z):
        return r * _radial_profile(mj, r, z) * _radial_profile(mk, r, z)

    value, _ = gauss_legendre_2d(integrand, (0.0, r_max), (-z_max, z_max), rtol=rtol)
    return azimuth * value
