"""Command-line entry point.

Subcommands: ``sweep``, ``levels``, ``symmetry-check``, ``inl``, ``perturbation``.
Settings come from a flat ``key = value`` file (``--config``) and every key
can be overridden by a flag of the same name, e.g. ``--nu 1e-3 --kind pair``.
"""

from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from .evolution import InvalidParams
from .perturbation import perturbative_averages
from .spectrum import level_scan, min_gap_scan, RangeTooNarrow
from .sweep import (
    CONFIG_DEFAULTS,
    ConfigError,
    config_from_mapping,
    load_config,
    parse_value,
    run_sweep,
    write_csv,
)
from .symmetry import classify, forced_zero_residuals, verify_trajectory_symmetry

_LOCAL_KEYS = ("h_start", "h_stop", "h_points", "sector", "horizon_periods")


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value configuration file")
    for key in CONFIG_DEFAULTS:
        flags = [f"--{key}"]
        if "_" in key:
            flags.append(f"--{key.replace('_', '-')}")
        common.add_argument(*flags, dest=key, default=None,
                            help=f"(default: {CONFIG_DEFAULTS[key] or 'unset'})")
    parser = argparse.ArgumentParser(prog="acspin", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("sweep", parents=[common], help="steady-state sweep to CSV")
    sub.add_parser("levels", parents=[common], help="frozen-field levels to CSV")
    sub.add_parser("symmetry-check", parents=[common], help="symmetry report and deviations")
    sub.add_parser("inl", parents=[common], help="omega sweep and I_NL")
    sub.add_parser("perturbation", parents=[common], help="second-order oracle table")
    return parser


def _settings(args) -> dict[str, str]:
    values = load_config(args.config) if args.config else {}
    for key in CONFIG_DEFAULTS:
        flag = getattr(args, key)
        if flag is not None:
            values[key] = flag
    return values


def _split(values: dict[str, str]):
    local = {k: values.get(k, CONFIG_DEFAULTS[k]) for k in _LOCAL_KEYS}
    config = config_from_mapping({k: v for k, v in values.items() if k not in _LOCAL_KEYS})
    return config, local


def _open_output(path):
    return open(path, "w", newline="") if path else sys.stdout


def cmd_sweep(config, local, out):
    result = run_sweep(config)
    text = write_csv(result, None, config.columns)
    if config.output:
        with open(config.output, "w", newline="") as fh:
            fh.write(text)
    else:
        out.write(text)
    if "i_nl" in result.metrics:
        print(f"I_NL = {result.metrics['i_nl']:.4f} %", file=sys.stderr)


def cmd_inl(config, local, out):
    if config.axis != "omega":
        raise ConfigError("inl needs axis = omega")
    result = run_sweep(config)
    if config.output:
        write_csv(result, config.output, config.columns)
    out.write(f"I_NL = {result.metrics['i_nl']:.6f} %\n")
    out.write(f"{'omega':>14} {'|Sy|':>14}\n")
    for w, sy in result.metrics["peak_positions"]:
        out.write(f"{w:14.8f} {sy:14.8e}\n")


def cmd_levels(config, local, out):
    hs = np.linspace(parse_value(local["h_start"]), parse_value(local["h_stop"]),
                     int(parse_value(local["h_points"])))
    scan = level_scan(config.system, hs, local["sector"].strip())
    if config.output:
        scan.to_csv(config.output)
    else:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["h"] + [f"E{i + 1}" for i in range(scan.levels.shape[1])])
        for h, row in zip(scan.h_values, scan.levels):
            writer.writerow([repr(float(h))] + [repr(float(e)) for e in row])
    try:
        sector = "triplet" if config.system.kind.value == "pair" else "full"
        h_star, gap = min_gap_scan(config.system, (0, 1), (hs[0], hs[-1]), sector=sector)
        print(f"min gap of the two lowest {sector} levels: {gap:.6f} at h = {h_star:.6f}",
              file=sys.stderr)
    except RangeTooNarrow as exc:
        print(f"min gap: {exc}", file=sys.stderr)


def cmd_symmetry(config, local, out):
    spec, params = config.system, config.thermal
    report = classify(spec, params)
    horizon = int(parse_value(local["horizon_periods"]))
    out.write(f"{'case':<6}{'holds':<8}{'map':<48}{'deviation':>14}\n")
    for case in (1, 2, 3):
        holds = case in report.cases
        dev = verify_trajectory_symmetry(spec, params, case, horizon) if holds else float("nan")
        desc = report.map_descriptions.get(case, "-")
        out.write(f"{case:<6}{'yes' if holds else 'no':<8}{desc:<48}{dev:>14.3e}\n")
    zeros = ", ".join(sorted(report.forced_zero)) or "none"
    out.write(f"forced zero: {zeros}\n")
    for name, value in forced_zero_residuals(spec, params, horizon).items():
        out.write(f"{name:<6}{'|avg|':<8}{'':<48}{value:>14.3e}\n")


def cmd_perturbation(config, local, out):
    spec, params = config.system, config.thermal
    if spec.kind.value != "single":
        raise ConfigError("the perturbative oracle covers the single spin only")
    if len(spec.drive.harmonics) != 1 or spec.drive.harmonics[0].n != 1:
        raise ConfigError("the perturbative oracle needs a single cosine drive")
    eps = spec.drive.harmonics[0].amplitude
    values = config.grid_values()
    writer = csv.writer(out if not config.output else _open_output(config.output),
                        lineterminator="\n")
    writer.writerow([config.axis, "A0x", "A0y", "A0z", "delta", "valid"])
    for v in values:
        kw = dict(h0=spec.h0, phi=spec.phi, beta=params.beta, nu=params.nu,
                  epsilon=eps, omega=spec.omega)
        kw[config.axis] = float(v)
        p = perturbative_averages(**kw)
        writer.writerow([repr(float(v)), repr(p.a0x), repr(p.a0y), repr(p.a0z), repr(p.delta),
                         "1" if p.valid else "0"])


COMMANDS = {
    "sweep": cmd_sweep,
    "levels": cmd_levels,
    "symmetry-check": cmd_symmetry,
    "inl": cmd_inl,
    "perturbation": cmd_perturbation,
}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        config, local = _split(_settings(args))
        COMMANDS[args.command](config, local, sys.stdout)
    except (ConfigError, InvalidParams, OSError) as exc:
        print(f"acspin {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
