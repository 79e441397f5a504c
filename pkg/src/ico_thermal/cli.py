"""Command-line front end: ``ico-thermal {cycle,sweep,figure,verify}``.

Exit codes: 0 on success, 1 when a verification fails (including a
simulation that disagrees with its closed form), 2 for usage and
configuration errors.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Sequence

from .channels import ParameterError, ThermalSpec
from .cycle import ClosedFormMismatch
from .linalg import StateError
from .sweep import (
    FIGURE_GRID_N,
    FIGURES,
    ConfigError,
    GridSpec,
    RunConfig,
    branch_label,
    figure_rows,
    plot_script,
    render_csv,
    render_json,
    run_point,
    sweep_rows,
)
from .verify import GRID_BETA_EPS, verify_equations, verify_no_work_from_equilibrium

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_CONFIG = 2

CONFIG_KEYS = {
    "beta_eps", "eps", "device", "control", "a", "b", "theta", "theta_deg", "grid_a",
    "grid_theta", "output_path", "out", "format", "jobs", "seed", "n", "emit_plot_script",
}


def _add_run_flags(p: argparse.ArgumentParser, grids: bool) -> None:
    p.add_argument("--config", help="JSON file with flat RunConfig keys; flags override it")
    p.add_argument("--beta-eps", type=float, help="beta times eps of the cold bath")
    p.add_argument("--eps", type=float, help="energy half-gap eps (default 1)")
    p.add_argument("--device", help="engine-accelerator, refrigerator or definite")
    p.add_argument("--control", help="definite, incoherent, coherent-plus or coherent-minus")
    p.add_argument("--a", type=float, help="measurement parameter a")
    p.add_argument("--b", help="meter-B parameter (definite device only) or same-as-a")
    theta = p.add_mutually_exclusive_group()
    theta.add_argument("--theta", type=float, help="order-control angle in radians")
    theta.add_argument("--theta-deg", type=float, help="order-control angle in degrees")
    if grids:
        p.add_argument("--grid-a", help="a grid as min:max:n")
        p.add_argument("--grid-theta", help="theta grid (radians) as min:max:n")
        p.add_argument("--out", help="output file (default: standard output)")
        p.add_argument("--format", help="csv (default) or json")
        p.add_argument("--jobs", type=int, help="worker processes (default 1)")
        p.add_argument("--emit-plot-script", action="store_true",
                       help="also write a gnuplot script next to --out")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ico-thermal",
        description="Measurement-powered qubit cycles with definite and indefinite causal order.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    cycle = sub.add_parser("cycle", help="simulate one cycle and print its report as JSON")
    _add_run_flags(cycle, grids=False)

    sweep = sub.add_parser("sweep", help="simulate a grid over a and/or theta and write CSV")
    _add_run_flags(sweep, grids=True)

    names = ", ".join(f"{k} ({v.description}, beta*eps = {v.beta_eps})" for k, v in FIGURES.items())
    fig = sub.add_parser(
        "figure",
        help="regenerate the data behind a figure",
        description=f"Figures: {names}. Every preset uses a {FIGURE_GRID_N}x{FIGURE_GRID_N} grid "
                    "over a in [0, 1] and theta in [0, pi]; rows of the two branches come in "
                    "separate blocks, + first.",
    )
    fig.add_argument("name", help="one of " + ", ".join(FIGURES))
    fig.add_argument("--out", help="output file (default: standard output)")
    fig.add_argument("--format", default="csv", help="csv (default) or json")
    fig.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    fig.add_argument("--emit-plot-script", action="store_true",
                     help="also write a gnuplot script next to --out")

    ver = sub.add_parser("verify", help="cross-check every closed form against simulation")
    ver.add_argument("--seed", type=int, default=42, help="SplitMix64 seed (default 42)")
    ver.add_argument("--n", type=int, default=10_000, help="number of random cases (default 10000)")
    ver.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                     help="worker processes (default: number of CPUs; the report does not depend on it)")
    return parser


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    unknown = set(data) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return data


def _merged(args: argparse.Namespace) -> dict:
    merged = _load_config_file(args.config)
    if "theta" in merged and "theta_deg" in merged:
        raise ConfigError("give theta or theta_deg, not both")
    flags = {k: v for k, v in vars(args).items()
             if k not in ("config", "command") and v is not None and v is not False}
    if "theta" in flags or "theta_deg" in flags:
        merged.pop("theta", None)
        merged.pop("theta_deg", None)
    merged.update(flags)
    if "theta_deg" in merged:
        merged["theta"] = math.radians(_number(merged, "theta_deg"))
        del merged["theta_deg"]
    if "out" in merged:
        merged["output_path"] = merged.pop("out")
    return merged


def _number(merged: dict, key: str) -> float:
    try:
        return float(merged[key])
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be a number, got {merged[key]!r}") from None


def config_from_args(args: argparse.Namespace, allow_grids: bool) -> tuple[RunConfig, dict]:
    """Build a :class:`RunConfig` from ``--config`` and flags; returns it with the merged dict."""
    m = _merged(args)
    if "beta_eps" not in m:
        raise ConfigError("beta_eps is required (--beta-eps or the config file)")
    control = m.get("control")
    device = m.get("device")
    if device is None:
        device = "definite" if control in (None, "definite") else "engine-accelerator"
    if control is None:
        if device != "definite":
            raise ConfigError(f"device {device} needs --control")
        control = "definite"

    a = m.get("a")
    theta = m.get("theta")
    if m.get("grid_a") is not None:
        if not allow_grids:
            raise ConfigError("cycle takes scalar a and theta, not grids")
        a = GridSpec.parse(m["grid_a"])
    elif a is not None:
        a = _number(m, "a")
    if m.get("grid_theta") is not None:
        if not allow_grids:
            raise ConfigError("cycle takes scalar a and theta, not grids")
        theta = GridSpec.parse(m["grid_theta"])
    elif theta is not None:
        theta = _number(m, "theta")
    if a is None:
        raise ConfigError("a is required (--a, --grid-a or the config file)")
    if theta is None:
        if device != "definite":
            raise ConfigError("theta is required for indefinite causal order")
        theta = 0.0

    b = m.get("b", "same-as-a")
    if b != "same-as-a":
        b = _number(m, "b")
    cfg = RunConfig(
        beta_eps=_number(m, "beta_eps"),
        eps=_number(m, "eps") if "eps" in m else 1.0,
        device=device,
        control=control,
        a=a,
        b=b,
        theta=theta,
        output_path=m.get("output_path"),
        format=m.get("format", "csv"),
    )
    return cfg, m


def _jobs(value) -> int:
    try:
        jobs = int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"jobs must be an integer, got {value!r}") from None
    if jobs < 1:
        raise ConfigError("jobs must be at least 1")
    return jobs


def _write(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc.strerror}") from None


def _check_plot_target(wanted: bool, path: str | None) -> None:
    if wanted and path is None:
        raise ConfigError("--emit-plot-script needs --out so the script can reference the data file")


def _emit_plot(path: str, columns, branches) -> None:
    _write(plot_script(os.path.basename(path), columns, branches), os.path.splitext(path)[0] + ".gp")


def cmd_cycle(args: argparse.Namespace) -> int:
    cfg, _ = config_from_args(args, allow_grids=False)
    report = run_point(cfg, float(cfg.a), float(cfg.theta))
    print(json.dumps(report.to_dict(), indent=2))
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg, merged = config_from_args(args, allow_grids=True)
    if cfg.is_scalar():
        raise ConfigError("sweep needs --grid-a and/or --grid-theta")
    _check_plot_target(bool(merged.get("emit_plot_script")), cfg.output_path)
    rows = sweep_rows(cfg, jobs=_jobs(merged.get("jobs", 1)))
    _write(render_csv(rows) if cfg.format == "csv" else render_json(rows), cfg.output_path)
    if merged.get("emit_plot_script"):
        _emit_plot(cfg.output_path, (("q_hot", "Q_hot"), ("work", "W"), ("merit", "merit")),
                   [branch_label(cfg.control)])
    return EXIT_OK


def cmd_figure(args: argparse.Namespace) -> int:
    if args.name not in FIGURES:
        raise ConfigError(f"unknown figure {args.name!r}; choose from {', '.join(FIGURES)}")
    if args.format not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {args.format!r}")
    _check_plot_target(args.emit_plot_script, args.out)
    rows = figure_rows(args.name, jobs=_jobs(args.jobs))
    _write(render_csv(rows) if args.format == "csv" else render_json(rows), args.out)
    if args.emit_plot_script:
        preset = FIGURES[args.name]
        _emit_plot(args.out, preset.columns, [branch_label(c) for c in preset.controls])
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    if args.n < 1:
        raise ConfigError("--n must be at least 1")
    report = verify_equations(seed=args.seed, n_random=args.n, jobs=_jobs(args.jobs))
    report.extra_checks["no_work_from_equilibrium"] = all(
        verify_no_work_from_equilibrium(ThermalSpec.from_beta_eps(be, eps))
        for be in GRID_BETA_EPS for eps in (0.5, 1.0, 2.0)
    )
    print(report.to_json())
    return EXIT_OK if report.passed else EXIT_VERIFY


COMMANDS = {"cycle": cmd_cycle, "sweep": cmd_sweep, "figure": cmd_figure, "verify": cmd_verify}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, ParameterError, StateError) as exc:
        print(f"ico-thermal {args.command}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ClosedFormMismatch as exc:
        print(f"ico-thermal {args.command}: verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
