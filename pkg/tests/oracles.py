"""Independent references for the variational modes.

Each trial function is built from its shape alone and normalized
symbolically; energies come from sympy integration of the Gross-Pitaevskii
functional, cross densities from scipy quadrature.
"""

import math

import sympy as sp
from scipy.integrate import dblquad

from topomode import ModeIndex

R, Z = sp.symbols("r z", real=True)
U, V, G, LAM = sp.symbols("u v g lam", positive=True)
SHAPES = {
    ModeIndex.GROUND: (sp.Integer(1), 0),
    ModeIndex.VORTEX: (R, 1),
    ModeIndex.AXIAL: (Z, 0),
    ModeIndex.RADIAL: (1 - U * R**2, 0),
}


def _cyl(expr):
    inner = sp.integrate(2 * sp.pi * R * expr, (R, 0, sp.oo))
    return sp.integrate(inner, (Z, -sp.oo, sp.oo))


def build_oracle():
    table = {}
    for index, (poly, m) in SHAPES.items():
        f = poly * sp.exp(-(U * R**2 + V * Z**2) / 2)
        f = f / sp.sqrt(sp.simplify(_cyl(f**2)))
        kinetic = _cyl((sp.diff(f, R) ** 2 + sp.diff(f, Z) ** 2 + m**2 * f**2 / R**2) / 2)
        potential = _cyl((R**2 + LAM**2 * Z**2) * f**2 / 2)
        interaction = _cyl(G / 2 * f**4)
        parts = [sp.simplify(x) for x in (kinetic, potential, interaction)]
        energy = sum(parts)
        table[index] = dict(
            parts=sp.lambdify((U, V, G, LAM), parts, "mpmath"),
            energy=sp.lambdify((U, V, G, LAM), energy, "mpmath"),
            grad=sp.lambdify((U, V, G, LAM), [sp.diff(energy, U), sp.diff(energy, V)], "mpmath"),
            density=sp.lambdify((R, Z, U, V), f**2, "numpy"),
        )
    return table


def rel(x, y):
    return abs(float(x) - float(y)) / max(abs(float(y)), 1e-300)


def quad_overlap(oracle, mj, mk):
    dj, dk = oracle[mj.index]["density"], oracle[mk.index]["density"]
    cut_r = 12.0 / math.sqrt(min(mj.u, mk.u))
    cut_z = 12.0 / math.sqrt(min(mj.v, mk.v))

    def integrand(z, r):
        return 2 * math.pi * r * dj(r, z, mj.u, mj.v) * dk(r, z, mk.u, mk.v)

    value, _ = dblquad(integrand, 0, cut_r, -cut_z, cut_z, epsabs=0, epsrel=1e-13)
    return value
