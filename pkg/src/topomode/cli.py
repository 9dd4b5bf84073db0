"""Command-line entry point: ``topomode <subcommand> [flags]``.

Every run writes ``<run-id>.csv`` into the output directory, plus
``<run-id>.json`` with ``--json`` and ``<run-id>.svg`` with ``--plot``. The
run id is a content hash of the subcommand and the effective configuration
(output options excluded), so identical inputs map to identical file names.

Exit status: 0 on success, 2 on invalid input, 3 on numerical failure
(including sweeps where some rows failed; those rows are still written).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .config import ConfigError, RunConfig
from .dopri import StepFailure
from .dynamics import GROUND, integrate, populations
from .experiment import eta_vs_A, find_critical_A
from .modes import MinimizationFailure, ModeIndex, QuadratureFailure, alpha, quad_beta, transition_frequency
from .order import InvalidBracket, classify_regime, eta, find_critical_b, sweep_eta
from .plot import emit_plot

SUBCOMMANDS = ("simulate", "eta", "sweep", "critical", "modes", "quadrupole")

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3

# flag -> (section, key)
FLAG_TARGETS = {
    "a": ("dynamics", "a"),
    "b": ("dynamics", "b"),
    "delta": ("dynamics", "delta"),
    "horizon": ("dynamics", "horizon"),
    "tol": ("dynamics", "tol"),
    "c0": ("dynamics", "c0"),
    "cp": ("dynamics", "cp"),
    "samples_per_period": ("dynamics", "samples_per_period"),
    "max_horizon": ("averaging", "max_horizon"),
    "tolerance": ("averaging", "tolerance"),
    "jump_threshold": ("averaging", "jump_threshold"),
    "b_grid": ("sweep", "b_grid"),
    "bracket": ("sweep", "bracket"),
    "tol_b": ("sweep", "tol_b"),
    "A_grid": ("sweep", "A_grid"),
    "A_bracket": ("sweep", "A_bracket"),
    "tol_A": ("sweep", "tol_A"),
    "detuning_hz": ("sweep", "detuning_hz"),
    "gF_mF": ("atom", "gF_mF"),
    "excited_mode": ("atom", "excited_mode"),
    "atom_number": ("atom", "atom_number"),
    "out": ("output", "dir"),
    "workers": ("output", "workers"),
}


@dataclass
class ResultRecord:
    run_id: str
    timestamp: str
    subcommand: str
    config: dict
    columns: list[str]
    rows: list[list]
    diagnostics: dict = field(default_factory=dict)
    summary: str = ""
    failed: bool = False
    curves: list = field(default_factory=list, repr=False)
    labels: tuple = ("", "")

    def csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_cell(x) for x in row])
        return buf.getvalue()

    def as_json(self) -> dict:
        return {
            "run_id": self.run_id,
            "timestamp": self.timestamp,
            "subcommand": self.subcommand,
            "input": self.config,
            "columns": self.columns,
            "rows": [[_json_value(x) for x in row] for row in self.rows],
            "diagnostics": {k: _json_value(v) for k, v in self.diagnostics.items()},
            "summary": self.summary,
        }


def _cell(x) -> str:
    # repr keeps full precision and is stable across runs
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _json_value(x):
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, (np.integer,)):
        return int(x)
    return x


def run_id(subcommand: str, cfg: RunConfig) -> str:
    echo = {k: v for k, v in cfg.as_dict().items() if k != "output"}
    text = subcommand + "\n" + json.dumps(echo, sort_keys=True)
    return hashlib.sha256(text.encode()).hexdigest()[:12]


def _workers(cfg: RunConfig) -> int:
    return cfg.output.workers or os.cpu_count() or 1


# -- subcommands -------------------------------------------------------------


def _simulate(cfg: RunConfig, rec: ResultRecord):
    d = cfg.dynamics
    traj = integrate(cfg.dimensionless(), cfg.initial_state(), d.horizon, tol=d.tol,
                     samples_per_period=d.samples_per_period, rotating=d.rotating)
    n0, n_p = populations(traj)
    rec.columns = ["t", "n0", "n_p", "re_c0", "im_c0", "re_cp", "im_cp"]
    rec.rows = [[t, x, y, c.real, c.imag, p.real, p.imag]
                for t, x, y, c, p in zip(traj.times, n0, n_p, traj.c0, traj.cp)]
    drift = float(np.max(np.abs(n0 + n_p - 1)))
    rec.diagnostics.update(samples=len(traj), min_n0=float(n0.min()), max_np=float(n_p.max()),
                           norm_drift=drift)
    rec.summary = (f"simulate: {len(traj)} samples to t'={d.horizon:g}, min n0={n0.min():.6f}, "
                   f"max n_p={n_p.max():.6f}, norm drift={drift:.2e}")
    rec.curves = [("n0", traj.times, n0), ("n_p", traj.times, n_p)]
    rec.labels = ("t'", "population")


def _eta(cfg: RunConfig, rec: ResultRecord):
    params, init = cfg.dimensionless(), cfg.initial_state()
    est = eta(params, init, cfg.averaging_config())
    regime = classify_regime(params, init, cfg.averaging_config()).value if init == GROUND else ""
    rec.columns = ["a", "b", "delta", "eta", "mean_n0", "mean_np", "averaging_horizon",
                   "converged", "period", "regime", "status"]
    rec.rows = [[params.a, params.b, params.delta, est.eta, est.mean_n0, est.mean_np,
                 est.averaging_horizon, est.converged, est.period_estimate, regime, est.status]]
    rec.summary = f"eta: eta={est.eta:.6f} converged={est.converged} regime={regime or 'n/a'}"


def _sweep(cfg: RunConfig, rec: ResultRecord):
    d = cfg.dynamics
    if not cfg.sweep.b_grid:
        raise ConfigError("b_grid is empty")
    results = sweep_eta(d.a, d.delta, cfg.sweep.b_grid, cfg.averaging_config(),
                        cfg.initial_state(), workers=_workers(cfg))
    rec.columns = ["b", "eta", "converged", "period", "status"]
    rec.rows = [[b, e.eta, e.converged, e.period_estimate, e.status] for b, e in results]
    failed = [b for b, e in results if e.status not in ("ok", "nonconvergence")]
    rec.failed = bool(failed)
    rec.diagnostics.update(points=len(results), failed=len(failed),
                           unconverged=sum(not e.converged for _, e in results))
    rec.summary = (f"sweep: {len(results)} points for a={d.a:g}, delta={d.delta:g}; "
                   f"{len(failed)} failed")
    rec.curves = [(f"a={d.a:g}", [b for b, _ in results], [e.eta for _, e in results])]
    rec.labels = ("b", "eta")


def _critical(cfg: RunConfig, rec: ResultRecord):
    s = cfg.sweep
    if s.A_bracket is not None:
        point = find_critical_A(cfg.physical_setup(), s.detuning_hz, s.A_bracket, s.tol_A,
                                cfg.averaging_config())
        p = point.params
        rec.columns = ["detuning_hz", "A_critical", "bracket_width", "kind", "eta_below",
                       "eta_above", "a", "b_critical", "delta", "alpha_p0_rad_s"]
        rec.rows = [[s.detuning_hz, point.A_critical, point.bracket_width, point.kind.value,
                     point.eta_below, point.eta_above, p.a, p.b, p.delta, point.alpha_p0]]
        rec.summary = (f"critical: A_c={point.A_critical:.5f} G/cm ({point.kind.value}, "
                       f"width {point.bracket_width:.1e}) at detuning {s.detuning_hz:g} Hz")
        return
    d = cfg.dynamics
    point = find_critical_b(d.a, d.delta, s.bracket, s.tol_b, cfg.averaging_config())
    rec.columns = ["a", "delta", "b_critical", "bracket_lo", "bracket_hi", "bracket_width",
                   "kind", "eta_below", "eta_above"]
    rec.rows = [[d.a, d.delta, point.b_critical, point.bracket[0], point.bracket[1],
                 point.bracket_width, point.kind.value, point.eta_below, point.eta_above]]
    rec.summary = (f"critical: b_c={point.b_critical:.5f} ({point.kind.value}, "
                   f"width {point.bracket_width:.1e}, eta {point.eta_below:.3f} -> "
                   f"{point.eta_above:.3f})")


def _modes(cfg: RunConfig, rec: ResultRecord):
    setup = cfg.physical_setup()
    ground = setup.mode(ModeIndex.GROUND)
    rec.columns = ["mode", "u", "v", "variational_energy", "eigenvalue", "transition_hz"]
    for index in ModeIndex:
        m = setup.mode(index)
        f = 0.0 if index is ModeIndex.GROUND else transition_frequency(setup, index) / (2 * math.pi)
        rec.rows.append([index.label, m.u, m.v, m.energy, m.eigenvalue, f])
    p = setup.excited_mode
    a_p0 = alpha(p, ModeIndex.GROUND, setup)
    a_0p = alpha(ModeIndex.GROUND, p, setup)
    beta = quad_beta(setup, 1.0, p)
    rec.diagnostics.update(l_r_m=setup.l_r, g=setup.g, lam=setup.lam, ground_eigenvalue=ground.eigenvalue,
                           alpha_p0_rad_s=a_p0, alpha_0p_rad_s=a_0p, a=a_0p / a_p0,
                           beta_rad_s_per_gauss_cm=beta, b_per_gauss_cm=abs(beta) / a_p0)
    f_p = transition_frequency(setup, p) / (2 * math.pi)
    rec.summary = (f"modes: g={setup.g:.4g} lam={setup.lam:.4g}; omega_{p.label},0 = 2pi x {f_p:.2f} Hz; "
                   f"a={a_0p / a_p0:.4f}; b per G/cm={abs(beta) / a_p0:.4f}")


def _quadrupole(cfg: RunConfig, rec: ResultRecord):
    s = cfg.sweep
    if not s.A_grid:
        raise ConfigError("A_grid is empty")
    rows = eta_vs_A(cfg.physical_setup(), s.detuning_hz, s.A_grid, cfg.averaging_config(),
                    workers=_workers(cfg))
    rec.columns = ["A_gauss_per_cm", "a", "b", "delta", "alpha_p0_rad_s", "eta", "converged", "status"]
    rec.rows = [[r.A, r.a, r.b, r.delta, r.alpha_p0, r.estimate.eta, r.estimate.converged,
                 r.estimate.status] for r in rows]
    failed = [r for r in rows if r.estimate.status not in ("ok", "nonconvergence")]
    rec.failed = bool(failed)
    rec.diagnostics.update(points=len(rows), failed=len(failed))
    rec.summary = (f"quadrupole: {len(rows)} gradients at detuning {s.detuning_hz:g} Hz "
                   f"(a={rows[0].a:.4f}, delta={rows[0].delta:.4f}); {len(failed)} failed")
    rec.curves = [(f"{s.detuning_hz:g} Hz", [r.A for r in rows], [r.estimate.eta for r in rows])]
    rec.labels = ("A (G/cm)", "eta")


HANDLERS = {
    "simulate": _simulate,
    "eta": _eta,
    "sweep": _sweep,
    "critical": _critical,
    "modes": _modes,
    "quadrupole": _quadrupole,
}


# -- orchestration -----------------------------------------------------------


def build_config(config_path: Optional[str], overrides: dict) -> RunConfig:
    cfg = RunConfig.from_file(config_path) if config_path else RunConfig()
    cfg.update(overrides)
    return cfg


def execute(subcommand: str, cfg: RunConfig) -> ResultRecord:
    if subcommand not in HANDLERS:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    rec = ResultRecord(run_id(subcommand, cfg), datetime.now(timezone.utc).isoformat(timespec="seconds"),
                       subcommand, cfg.as_dict(), [], [])
    HANDLERS[subcommand](cfg, rec)
    return rec


def write_artifacts(rec: ResultRecord, cfg: RunConfig) -> list[Path]:
    out = Path(cfg.output.dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        paths = [out / f"{rec.run_id}.csv"]
        paths[0].write_text(rec.csv_text())
        if cfg.output.json:
            paths.append(out / f"{rec.run_id}.json")
            paths[-1].write_text(json.dumps(rec.as_json(), indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write results to {out}: {exc}") from exc
    if cfg.output.plot and rec.curves:
        paths.append(emit_plot(rec.curves, out / f"{rec.run_id}.svg",
                               title=rec.subcommand, xlabel=rec.labels[0], ylabel=rec.labels[1]))
    return paths


def run(config_path: Optional[str], subcommand: str, overrides: Optional[dict] = None,
        stream=None) -> tuple[int, list[Path]]:
    """Validate, dispatch, persist. Returns ``(exit_status, artifact_paths)``."""
    try:
        cfg = build_config(config_path, overrides or {})
        rec = execute(subcommand, cfg)
    except (ConfigError, InvalidBracket, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID, []
    except (StepFailure, MinimizationFailure, QuadratureFailure) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL, []
    try:
        paths = write_artifacts(rec, cfg)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID, []
    print(f"{rec.summary} -> {paths[0]}", file=stream or sys.stdout)
    return (EXIT_NUMERICAL if rec.failed else EXIT_OK), paths


def _parse_set(items: Sequence[str]) -> dict:
    overrides: dict = {}
    for item in items:
        key, sep, value = item.partition("=")
        section, dot, name = key.strip().partition(".")
        if not sep or not dot:
            raise ConfigError(f"--set expects section.key=value, got {item!r}")
        overrides.setdefault(section, {})[name] = value
    return overrides


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="topomode", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI file with [dynamics], [averaging], [sweep], [trap], [atom], [output]")
    common.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override any config entry (repeatable)")
    g = common.add_argument_group("dynamics")
    g.add_argument("--a", help="interaction ratio")
    g.add_argument("--b", help="pumping amplitude")
    g.add_argument("--delta", help="detuning in dimensionless units")
    g.add_argument("--horizon", help="integration horizon t'")
    g.add_argument("--tol", help="local error per unit time")
    g.add_argument("--c0", help="initial ground amplitude, e.g. 1+0j")
    g.add_argument("--cp", help="initial excited amplitude")
    g.add_argument("--samples-per-period", dest="samples_per_period")
    g = common.add_argument_group("averaging")
    g.add_argument("--max-horizon", dest="max_horizon")
    g.add_argument("--tolerance", help="Cesaro convergence tolerance")
    g.add_argument("--jump-threshold", dest="jump_threshold")
    g = common.add_argument_group("sweeps")
    g.add_argument("--b-grid", dest="b_grid", help="lo:hi:num or comma list")
    g.add_argument("--bracket", help="lo,hi in b")
    g.add_argument("--tol-b", dest="tol_b")
    g.add_argument("--A-grid", dest="A_grid", help="field gradients in G/cm, lo:hi:num or comma list")
    g.add_argument("--A-bracket", dest="A_bracket", help="lo,hi in G/cm; makes 'critical' work in A")
    g.add_argument("--tol-A", dest="tol_A")
    g.add_argument("--detuning-hz", dest="detuning_hz")
    g = common.add_argument_group("physical setup")
    g.add_argument("--gF-mF", dest="gF_mF", help="Lande factor times magnetic quantum number")
    g.add_argument("--excited-mode", dest="excited_mode", help="100, 010 or 001")
    g.add_argument("--atom-number", dest="atom_number")
    g = common.add_argument_group("output")
    g.add_argument("--out", help="output directory")
    g.add_argument("--workers", help="process count for sweeps; 0 = all cores")
    g.add_argument("--json", action="store_const", const="true")
    g.add_argument("--plot", action="store_const", const="true")

    sub = parser.add_subparsers(dest="subcommand", required=True)
    helps = {
        "simulate": "integrate the amplitude equations and write the trajectory",
        "eta": "time-averaged population difference and regime at one parameter point",
        "sweep": "order parameter over a grid of pumping amplitudes",
        "critical": "critical pumping amplitude (or gradient with --A-bracket) by bisection",
        "modes": "variational trap modes and the derived two-mode coefficients",
        "quadrupole": "order parameter versus quadrupole field gradient",
    }
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def overrides_from_args(args: argparse.Namespace) -> dict:
    overrides = _parse_set(args.set)
    for flag, (section, key) in FLAG_TARGETS.items():
        value = getattr(args, flag, None)
        if value is not None:
            overrides.setdefault(section, {})[key] = value
    for flag in ("json", "plot"):
        if getattr(args, flag):
            overrides.setdefault("output", {})[flag] = "true"
    return overrides


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        overrides = overrides_from_args(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    status, _ = run(args.config, args.subcommand, overrides)
    return status


if __name__ == "__main__":
    sys.exit(main())
