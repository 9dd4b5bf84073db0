"""Order parameter versus quadrupole gradient for several detunings, with critical gradients."""

import argparse
import dataclasses
import math
from pathlib import Path

import numpy as np

from topomode import (
    DrivenExperiment,
    InvalidBracket,
    ModeIndex,
    PhysicalSetup,
    dimensionless_params,
    eta_vs_A,
    find_critical_A,
    transition_frequency,
)
from topomode.plot import emit_plot


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results/quadrupole")
    parser.add_argument("--detunings", type=float, nargs="+", default=[-36.0, -13.0, -2.0, 13.0])
    parser.add_argument("--A-max", type=float, default=0.4)
    parser.add_argument("--points", type=int, default=161)
    parser.add_argument("--gF-mF", type=float, default=1.0)
    parser.add_argument("--workers", type=int, default=4)
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    setup = dataclasses.replace(PhysicalSetup.rb87_reference(), gF_mF=args.gF_mF)
    unit = dimensionless_params(DrivenExperiment(setup, 1.0))
    print(f"l_r={setup.l_r:.4e} m  g={setup.g:.2f}  lam={setup.lam:g}")
    print(f"omega_100,0 = 2pi x {transition_frequency(setup, ModeIndex.RADIAL) / (2 * math.pi):.2f} Hz")
    print(f"alpha_p0={unit.alpha_p0:.2f} rad/s  a={unit.params.a:.5f}  "
          f"beta={unit.beta:.2f} rad/s per G/cm  b per G/cm={unit.params.b:.4f}")

    grid = np.linspace(0.0, args.A_max, args.points)
    curves = []
    for detuning in args.detunings:
        rows = eta_vs_A(setup, detuning, grid, workers=args.workers)
        path = out / f"eta_vs_A_{detuning:+g}Hz.csv"
        with path.open("w") as fh:
            fh.write("A_gauss_per_cm,b,delta,eta,converged\n")
            for r in rows:
                fh.write(f"{r.A!r},{r.b!r},{r.delta!r},{r.estimate.eta!r},{r.estimate.converged}\n")
        curves.append((f"{detuning:+g} Hz", grid, [r.estimate.eta for r in rows]))
        try:
            point = find_critical_A(setup, detuning, (0.01, args.A_max), tol_A=1e-4)
            print(f"{detuning:+6g} Hz  delta={rows[0].delta:+.4f}  A_c={point.A_critical:.4f} G/cm  "
                  f"{point.kind.value:<10}  eta {point.eta_below:+.3f} -> {point.eta_above:+.3f}")
        except InvalidBracket as exc:
            print(f"{detuning:+6g} Hz  no critical gradient: {exc}")
    emit_plot(curves, out / "eta_vs_A.svg", title=f"gF*mF={args.gF_mF:g}",
              xlabel="A (G/cm)", ylabel="eta")


if __name__ == "__main__":
    main()
