"""Run configurations, parameter sweeps and the figure presets.

A sweep evaluates one cycle per grid point by full Kraus-sum simulation and
renders the results as CSV rows. Rows are ordered control block first, then
``a`` (outer) and ``theta`` (inner). Parallel evaluation only changes who
computes a row, never where it lands in the output.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from typing import Iterable, Sequence

from .channels import ParameterError, ThermalSpec
from .cycle import CycleReport, run_cycle_definite
from .switch import Branch, run_ico_cycle_engine, run_ico_cycle_refrigerator, run_incoherent_cycle

DEVICES = ("engine-accelerator", "refrigerator", "definite")
CONTROLS = ("definite", "incoherent", "coherent-plus", "coherent-minus")
FORMATS = ("csv", "json")
CSV_HEADER = "a,theta,beta_eps,branch,p,omega,q_hot,work,q_cold,merit,mode"
FIGURE_GRID_N = 201


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


@dataclass(frozen=True)
class GridSpec:
    min: float
    max: float
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ConfigError(f"grid needs n >= 2 points, got {self.n!r}")
        if not (math.isfinite(self.min) and math.isfinite(self.max)) or self.max < self.min:
            raise ConfigError(f"grid bounds must satisfy min <= max, got {self.min!r}:{self.max!r}")

    @classmethod
    def parse(cls, text) -> GridSpec:
        """Accept ``"min:max:n"`` or a mapping with ``min``, ``max`` and ``n``."""
        if isinstance(text, GridSpec):
            return text
        if isinstance(text, dict):
            try:
                return cls(float(text["min"]), float(text["max"]), int(text["n"]))
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError(f"bad grid {text!r}: {exc}") from None
        parts = str(text).split(":")
        if len(parts) != 3:
            raise ConfigError(f"grid must look like min:max:n, got {text!r}")
        try:
            return cls(float(parts[0]), float(parts[1]), int(parts[2]))
        except ValueError as exc:
            raise ConfigError(f"bad grid {text!r}: {exc}") from None

    def values(self) -> list[float]:
        # endpoints are hit exactly
        step = self.n - 1
        return [self.min + (self.max - self.min) * i / step for i in range(step)] + [self.max]

    def to_dict(self) -> dict:
        return {"min": self.min, "max": self.max, "n": self.n}


@dataclass(frozen=True)
class RunConfig:
    """One cycle or one sweep.

    ``a`` and ``theta`` are scalars or :class:`GridSpec`. ``b`` only applies
    to the definite device; ``"same-as-a"`` ties it to ``a``.
    """

    beta_eps: float
    eps: float = 1.0
    device: str = "definite"
    control: str = "definite"
    a: float | GridSpec = 0.5
    b: float | str = "same-as-a"
    theta: float | GridSpec = 0.0
    output_path: str | None = None
    format: str = "csv"

    def __post_init__(self):
        if self.device not in DEVICES:
            raise ConfigError(f"device must be one of {', '.join(DEVICES)}, got {self.device!r}")
        if self.control not in CONTROLS:
            raise ConfigError(f"control must be one of {', '.join(CONTROLS)}, got {self.control!r}")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be csv or json, got {self.format!r}")
        if (self.device == "definite") != (self.control == "definite"):
            raise ConfigError("the definite device goes with definite control and vice versa")
        if self.device == "refrigerator" and self.control == "incoherent":
            raise ConfigError("the refrigerator needs coherent control (coherent-plus or coherent-minus)")
        if self.b != "same-as-a":
            if self.device != "definite":
                raise ConfigError("b differs from a only for the definite device")
            _check_range("b", self.b, 0.0, 1.0)
        for grid_or_value, name, hi in ((self.a, "a", 1.0), (self.theta, "theta", math.pi)):
            if isinstance(grid_or_value, GridSpec):
                _check_range(name, grid_or_value.min, 0.0, hi)
                _check_range(name, grid_or_value.max, 0.0, hi)
            else:
                _check_range(name, grid_or_value, 0.0, hi)
        try:
            ThermalSpec.from_beta_eps(self.beta_eps, self.eps)
        except (ParameterError, TypeError, ZeroDivisionError) as exc:
            raise ConfigError(str(exc)) from None

    @property
    def thermal(self) -> ThermalSpec:
        return ThermalSpec.from_beta_eps(self.beta_eps, self.eps)

    def a_values(self) -> list[float]:
        return self.a.values() if isinstance(self.a, GridSpec) else [float(self.a)]

    def theta_values(self) -> list[float]:
        return self.theta.values() if isinstance(self.theta, GridSpec) else [float(self.theta)]

    def is_scalar(self) -> bool:
        return not isinstance(self.a, GridSpec) and not isinstance(self.theta, GridSpec)

    def to_dict(self) -> dict:
        out = asdict(self)
        for key in ("a", "theta"):
            value = getattr(self, key)
            if isinstance(value, GridSpec):
                out[key] = value.to_dict()
        return out


def _check_range(name: str, x, lo: float, hi: float) -> None:
    try:
        x = float(x)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a number, got {x!r}") from None
    if not lo <= x <= hi:
        raise ConfigError(f"{name} = {x!r} is outside [{lo}, {hi!r}]")


def run_point(cfg: RunConfig, a: float, theta: float) -> CycleReport:
    """Simulate one cycle for the device and control of ``cfg``."""
    t = cfg.thermal
    if cfg.device == "definite":
        b = a if cfg.b == "same-as-a" else float(cfg.b)
        return run_cycle_definite(t, a, b)
    if cfg.control == "incoherent":
        return run_incoherent_cycle(t, a, theta)
    branch = Branch.PLUS if cfg.control == "coherent-plus" else Branch.MINUS
    if cfg.device == "refrigerator":
        return run_ico_cycle_refrigerator(t, a, theta, branch)
    return run_ico_cycle_engine(t, a, theta, branch)


def branch_label(control: str) -> str:
    return {"definite": "def", "incoherent": "inc", "coherent-plus": "+", "coherent-minus": "-"}[control]


@dataclass(frozen=True)
class SweepRow:
    a: float
    theta: float
    beta_eps: float
    branch: str
    p: float | None
    omega: float | None
    q_hot: float
    work: float
    q_cold: float
    merit: float | None
    mode: str

    @classmethod
    def from_report(cls, cfg: RunConfig, a: float, theta: float, report: CycleReport) -> SweepRow:
        return cls(a, theta, cfg.beta_eps, branch_label(cfg.control), report.branch_probability,
                   report.omega, report.q_hot, report.work, report.q_cold, report.merit,
                   report.mode.value)

    def csv_line(self) -> str:
        return ",".join(_fmt(getattr(self, name)) for name in CSV_HEADER.split(","))

    def to_dict(self) -> dict:
        return asdict(self)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        # repr is the shortest decimal that round-trips the double; + 0.0 drops the sign of -0.0
        return repr(x + 0.0)
    return str(x)


def _rows_for_block(cfg: RunConfig, points: Sequence[tuple[float, float]]) -> list[SweepRow]:
    return [SweepRow.from_report(cfg, a, th, run_point(cfg, a, th)) for a, th in points]


def sweep_rows(cfg: RunConfig, controls: Iterable[str] | None = None, jobs: int = 1) -> list[SweepRow]:
    """All rows of a sweep, one block per control setting, in output order."""
    controls = [cfg.control] if controls is None else list(controls)
    configs = [replace(cfg, control=c) for c in controls]
    points = [(a, th) for a in cfg.a_values() for th in cfg.theta_values()]
    if jobs <= 1:
        return [row for c in configs for row in _rows_for_block(c, points)]
    # a few chunks per worker keeps them busy while pool.map preserves order
    size = max(1, -(-len(points) // (4 * jobs)))
    tasks = [(c, points[i:i + size]) for c in configs for i in range(0, len(points), size)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        parts = pool.map(_rows_for_block, *zip(*tasks))
        return [row for part in parts for row in part]


def render_csv(rows: Iterable[SweepRow]) -> str:
    return "".join([CSV_HEADER + "\n"] + [row.csv_line() + "\n" for row in rows])


def render_json(rows: Iterable[SweepRow]) -> str:
    return json.dumps([row.to_dict() for row in rows], indent=1) + "\n"


@dataclass(frozen=True)
class FigurePreset:
    name: str
    beta_eps: float
    device: str
    controls: tuple[str, ...]
    description: str
    # (column, label) pairs plotted by the companion script
    columns: tuple[tuple[str, str], ...]

    def config(self, grid_n: int = FIGURE_GRID_N) -> RunConfig:
        return RunConfig(
            beta_eps=self.beta_eps,
            device=self.device,
            control=self.controls[0],
            a=GridSpec(0.0, 1.0, grid_n),
            theta=GridSpec(0.0, math.pi, grid_n),
        )


FIGURES = {
    "fig4": FigurePreset("fig4", 1.39, "engine-accelerator", ("coherent-minus",),
                         "post-selection probability p_- over (a, theta)", (("p", "p_-"),)),
    "fig6": FigurePreset("fig6", 1.39, "engine-accelerator", ("coherent-plus", "coherent-minus"),
                         "hot heat and work, both branches", (("q_hot", "Q_hot"), ("work", "W"))),
    "fig7": FigurePreset("fig7", 1.39, "engine-accelerator", ("coherent-plus", "coherent-minus"),
                         "efficiency and accelerator COP, both branches", (("merit", "eta or COP_acc"),)),
    "fig8": FigurePreset("fig8", 0.45, "refrigerator", ("coherent-plus", "coherent-minus"),
                         "refrigerator COP, both branches", (("merit", "COP_ref"),)),
    "fig9": FigurePreset("fig9", 1.39, "engine-accelerator", ("incoherent",),
                         "incoherent control: hot heat, work, efficiency and COP",
                         (("q_hot", "Q_hot"), ("work", "W"), ("merit", "eta or COP_acc"))),
}


def figure_rows(name: str, jobs: int = 1, grid_n: int = FIGURE_GRID_N) -> list[SweepRow]:
    if name not in FIGURES:
        raise ConfigError(f"unknown figure {name!r}; choose from {', '.join(FIGURES)}")
    preset = FIGURES[name]
    return sweep_rows(preset.config(grid_n), preset.controls, jobs)


def plot_script(csv_path: str, columns: Sequence[tuple[str, str]], branches: Sequence[str]) -> str:
    """A gnuplot script drawing one surface per (column, branch) from ``csv_path``."""
    index = {name: i + 1 for i, name in enumerate(CSV_HEADER.split(","))}
    lines = [
        "set datafile separator ','",
        "set xlabel 'a'",
        "set ylabel 'theta'",
        "set pm3d map",
        "set palette rgb 33,13,10",
        "set datafile missing ''",
    ]
    for col, label in columns:
        for br in branches:
            # rows of other branches (and empty fields) are mapped to NaN and skipped
            lines += [
                f"set title '{label} ({br})'",
                f"splot '{csv_path}' every ::1 using 1:2:(strcol(4) eq '{br}' ? "
                f"column({index[col]}) : NaN) notitle",
                "pause -1",
            ]
    return "\n".join(lines) + "\n"
