"""Order parameter versus pumping: interaction ratios at resonance, then detunings at a=0.1."""

import argparse
from pathlib import Path

import numpy as np

from topomode import InvalidBracket, find_critical_b, sweep_eta
from topomode.plot import emit_plot


def scan(label, a, delta, grid, workers, out):
    results = sweep_eta(a, delta, grid, workers=workers)
    path = out / f"eta_a{a:g}_d{delta:g}.csv"
    with path.open("w") as fh:
        fh.write("b,eta,converged,status\n")
        for b, est in results:
            fh.write(f"{b!r},{est.eta!r},{est.converged},{est.status}\n")
    return label, [b for b, _ in results], [e.eta for _, e in results]


def report_critical(a, delta, bracket):
    try:
        point = find_critical_b(a, delta, bracket, tol_b=1e-4)
    except InvalidBracket as exc:
        print(f"a={a:<4g} delta={delta:<5g} no critical point in {bracket}: {exc}")
        return
    print(f"a={a:<4g} delta={delta:<5g} b_c={point.b_critical:.5f} {point.kind.value:<10} "
          f"eta {point.eta_below:+.3f} -> {point.eta_above:+.3f}")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results/order_parameter")
    parser.add_argument("--points", type=int, default=201)
    parser.add_argument("--workers", type=int, default=0)
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    workers = args.workers or 4
    grid = np.linspace(0.0, 1.0, args.points)

    curves = [scan(f"a={a:g}", a, 0.0, grid, workers, out) for a in (0.1, 0.5, 0.8, 0.9, 1.0)]
    emit_plot(curves, out / "eta_vs_b_resonant.svg", title="delta=0", xlabel="b", ylabel="eta")
    for a in (0.8, 0.9, 1.0):
        report_critical(a, 0.0, (0.3, 0.8))

    curves = [scan(f"delta={d:g}", 0.1, d, grid, workers, out) for d in (0.0, 0.4, 0.45, 0.5)]
    emit_plot(curves, out / "eta_vs_b_detuned.svg", title="a=0.1", xlabel="b", ylabel="eta")
    for d in (0.4, 0.45, 0.5):
        report_critical(0.1, d, (0.05, 0.6))


if __name__ == "__main__":
    main()
