"""Three-stroke measurement-powered cycle with a definite order of channels.

Stroke 1 thermalizes the qubit with the cold bath, stroke 2 applies meter A
and stroke 3 meter B. Every report is produced by explicit Kraus sums; the
closed-form expressions are only used to cross-check the simulation.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from . import channels
from .channels import (
    ParameterError,
    StrokeRecord,
    ThermalSpec,
    apply_channel,
    check_unit_interval,
    gibbs_state,
    hamiltonian,
    stroke_record,
)

FIRST_LAW_TOL = 1e-12
CLOSED_FORM_TOL = 1e-10
BOUNDARY_TOL = 1e-12


class Mode(str, enum.Enum):
    ENGINE = "Engine"
    ACCELERATOR = "Accelerator"
    REFRIGERATOR = "Refrigerator"
    OUT_OF_REGIME = "OutOfRegime"


class ClosedFormMismatch(AssertionError):
    """Simulation and a closed-form expression disagree beyond tolerance."""

    def __init__(self, equation_id: str, simulated: float, analytic: float):
        super().__init__(
            f"{equation_id}: simulated {simulated!r} vs closed form {analytic!r} "
            f"(|diff| = {abs(simulated - analytic):.3e})"
        )
        self.equation_id = equation_id
        self.simulated = simulated
        self.analytic = analytic


def check_closed_form(equation_id: str, simulated: float, analytic: float,
                      tol: float = CLOSED_FORM_TOL) -> None:
    if not abs(simulated - analytic) <= tol:
        raise ClosedFormMismatch(equation_id, simulated, analytic)


def check_ratio(equation_id: str, numerator: float, denominator: float, analytic: float,
                tol: float = CLOSED_FORM_TOL) -> None:
    """Check ``numerator / denominator == analytic`` in cross-multiplied form.

    The tolerance is scaled by ``max(1, |analytic|)`` so that figures of merit
    close to a pole are not rejected because of rounding in a tiny denominator.
    """
    if not abs(numerator - analytic * denominator) <= tol * max(1.0, abs(analytic)):
        raise ClosedFormMismatch(equation_id, numerator / denominator, analytic)


@dataclass(frozen=True)
class CycleReport:
    """Energy ledger of one cycle.

    ``work`` is positive when invested into the qubit and negative when
    extracted. ``merit`` is the efficiency for engines and the coefficient of
    performance for accelerators and refrigerators; it is ``None`` out of regime.
    """

    mode: Mode
    strokes: tuple[StrokeRecord, ...]
    q_hot: float
    q_cold: float
    work: float
    merit: float | None
    eps: float = 1.0
    omega: float | None = None
    branch_probability: float | None = None
    expected_repeats: float | None = None
    first_law_residual: float = field(default=0.0)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode.value,
            "strokes": [s.to_dict() for s in self.strokes],
            "q_hot": self.q_hot,
            "q_cold": self.q_cold,
            "work": self.work,
            "merit": self.merit,
            "omega": self.omega,
            "branch_probability": self.branch_probability,
            "expected_repeats": self.expected_repeats,
            "first_law_residual": self.first_law_residual,
            "eps": self.eps,
            "in_units_of_eps": {
                "q_hot": self.q_hot / self.eps,
                "q_cold": self.q_cold / self.eps,
                "work": self.work / self.eps,
            },
        }


def first_law_residual(strokes: list[StrokeRecord], eps: float = 1.0) -> float:
    """Sum of stroke energy changes over a closed cycle; raises if it is not zero."""
    residual = math.fsum(s.delta_u for s in strokes)
    if abs(residual) > FIRST_LAW_TOL * max(1.0, eps):
        raise ClosedFormMismatch("first_law", residual, 0.0)
    return residual


def classify_mode_definite(t: ThermalSpec, a: float, b: float) -> Mode:
    a = check_unit_interval("a", a)
    b = check_unit_interval("b", b)
    low, high = channels.isentropic_points_a(t)
    if abs(a - b) <= BOUNDARY_TOL:
        if 0.5 <= a < high:
            return Mode.ENGINE
        if low < a < 0.5:
            return Mode.ACCELERATOR
    if abs(a - high) <= BOUNDARY_TOL and b > high:
        return Mode.REFRIGERATOR
    return Mode.OUT_OF_REGIME


def efficiency_definite(t: ThermalSpec, a: float) -> float:
    """Engine efficiency ``2 (1 + tanh(beta eps) / (2a - 1))^-1`` for ``1/2 <= a < (1 + tanh)/2``."""
    low, high = channels.isentropic_points_a(t)
    if not 0.5 <= a < high:
        raise ParameterError(f"a = {a!r} is outside the engine interval [0.5, {high!r})")
    x = 2.0 * a - 1.0
    # written without dividing by (2a - 1), which vanishes at a = 1/2
    return 2.0 * x / (x + t.tanh_be)


def cop_accelerator_definite(t: ThermalSpec, a: float) -> float:
    low, _ = channels.isentropic_points_a(t)
    if not low < a < 0.5:
        raise ParameterError(f"a = {a!r} is outside the accelerator interval ({low!r}, 0.5)")
    return 0.5 * (1.0 - t.tanh_be / (2.0 * a - 1.0))


def cop_refrigerator_definite(t: ThermalSpec, b: float) -> float:
    _, high = channels.isentropic_points_a(t)
    if not high < b <= 1.0:
        raise ParameterError(f"b = {b!r} is outside the refrigerator interval ({high!r}, 1]")
    return (b - 0.5) / t.tanh_be - 0.5


def run_cycle_definite(t: ThermalSpec, a: float, b: float) -> CycleReport:
    a = check_unit_interval("a", a)
    b = check_unit_interval("b", b)
    h = hamiltonian(t.eps)
    eps = t.eps

    rho1 = gibbs_state(t)
    rho2 = apply_channel(channels.kraus_meter_a(a), rho1)
    rho3 = apply_channel(channels.kraus_meter_b(b), rho2)
    strokes = [
        stroke_record(h, rho1, rho2, "2:A"),
        stroke_record(h, rho2, rho3, "3:B"),
        stroke_record(h, rho3, rho1, "1:thermalize"),
    ]
    check_closed_form("U2", strokes[0].delta_u, 2.0 * eps * (a - t.excited_population))
    check_closed_form("U3", strokes[1].delta_u, 2.0 * eps * (1.0 - a - b))
    check_closed_form("U1", strokes[2].delta_u, -2.0 * eps * (t.ground_population - b))

    residual = first_law_residual(strokes, eps)
    mode = classify_mode_definite(t, a, b)
    du2, du3, du1 = (s.delta_u for s in strokes)
    # energies are split by the role of each stroke, not by its entropy change,
    # which vanishes at the isentropic points and would flip the split there;
    # A at the upper isentropic point is the refrigerator's work stroke whatever b is
    if mode is Mode.REFRIGERATOR or abs(a - t.ground_population) <= BOUNDARY_TOL:
        work, q_hot = du2, du3
    else:
        q_hot, work = du2, du3
    q_cold = du1
    merit = None
    if mode is Mode.ENGINE:
        merit = -work / q_hot + 0.0  # no signed zero at the zero-work end
        check_ratio("eta", -work, q_hot, efficiency_definite(t, a))
    elif mode is Mode.ACCELERATOR:
        merit = -q_cold / work
        check_ratio("COP_acc", -q_cold, work, cop_accelerator_definite(t, a))
    elif mode is Mode.REFRIGERATOR:
        merit = q_cold / work
        check_ratio("COP_ref", q_cold, work, cop_refrigerator_definite(t, b))
    return CycleReport(
        mode=mode,
        strokes=tuple(strokes),
        q_hot=q_hot,
        q_cold=q_cold,
        work=work,
        merit=merit,
        eps=eps,
        first_law_residual=residual,
    )
