"""Ground-mode population versus time just below, at and above the resonant threshold."""

import argparse
from pathlib import Path

from topomode import GROUND, DimensionlessParams, integrate, populations
from topomode.plot import emit_plot


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results/population_dynamics")
    parser.add_argument("--a", type=float, default=1.0)
    parser.add_argument("--delta", type=float, default=0.0)
    parser.add_argument("--b", type=float, nargs="+", default=[0.4, 0.5, 0.5001, 0.6])
    parser.add_argument("--horizon", type=float, default=50.0)
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    curves = []
    for b in args.b:
        traj = integrate(DimensionlessParams(args.a, b, args.delta), GROUND, horizon=args.horizon)
        n0, n_p = populations(traj)
        path = out / f"trajectory_a{args.a:g}_b{b:g}_d{args.delta:g}.csv"
        with path.open("w") as fh:
            fh.write("t,n0,n_p\n")
            for row in zip(traj.times, n0, n_p):
                fh.write(",".join(repr(float(x)) for x in row) + "\n")
        curves.append((f"b={b:g}", traj.times, n0))
        print(f"b={b:<8g} min n0={n0.min():.4f} max n_p={n_p.max():.4f} -> {path}")
    emit_plot(curves, out / "ground_population.svg", title=f"a={args.a:g}, delta={args.delta:g}",
              xlabel="t'", ylabel="n0")


if __name__ == "__main__":
    main()
