"""Quantum switch of meters A and B and the devices built on it.

The order controller ``|c_theta> = cos(theta/2)|0> + sin(theta/2)|1>`` selects
``B after A`` on ``|0>`` and ``A after B`` on ``|1>``. Measuring the controller
in the ``|x_+->`` basis gives the coherently controlled devices; discarding it
gives the incoherent mixture of the two orders.

Closed forms below assume ``b = a``. The switch itself accepts any ``(a, b)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import channels
from .channels import (
    KrausChannel,
    ParameterError,
    ThermalSpec,
    apply_channel,
    check_unit_interval,
    gibbs_state,
    hamiltonian,
    stroke_record,
)
from .cycle import (
    CLOSED_FORM_TOL,
    CycleReport,
    Mode,
    check_closed_form,
    check_ratio,
    first_law_residual,
)
from .linalg import DensityOp, StateError, kron, partial_trace_controller, validate_density

PROBABILITY_FLOOR = 1e-12
W_RANGE_TOL = 1e-12


class Branch(str, enum.Enum):
    PLUS = "+"
    MINUS = "-"

    @property
    def sign(self) -> int:
        return 1 if self is Branch.PLUS else -1

    @property
    def ket(self) -> np.ndarray:
        return np.array([1.0, self.sign], dtype=complex) / math.sqrt(2.0)


class ControlKind(str, enum.Enum):
    COHERENT_PLUS = "CoherentPlus"
    COHERENT_MINUS = "CoherentMinus"
    INCOHERENT = "Incoherent"


@dataclass(frozen=True)
class ControllerState:
    theta: float

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi:
            raise ParameterError(f"theta = {self.theta!r} is outside [0, pi]")

    @property
    def ket(self) -> np.ndarray:
        return np.array([math.cos(self.theta / 2), math.sin(self.theta / 2)], dtype=complex)

    def density(self) -> np.ndarray:
        k = self.ket
        return np.outer(k, k.conj())


@dataclass(frozen=True)
class SwitchOutcome:
    branch: Branch
    probability: float
    state: DensityOp


@dataclass(frozen=True)
class RegimeIndicator:
    omega: float
    control_kind: ControlKind


def _kind(branch: Branch) -> ControlKind:
    return ControlKind.COHERENT_PLUS if branch is Branch.PLUS else ControlKind.COHERENT_MINUS


def switch_kraus(a: float, b: float) -> KrausChannel:
    """The 16 operators ``K_ij = B_i A_j (x) |0><0| + A_j B_i (x) |1><1|``."""
    ka = channels.kraus_meter_a(a).stack
    kb = channels.kraus_meter_b(b).stack
    # index layout (i, j, system_row, controller_row, system_col, controller_col)
    ops = np.zeros((len(kb), len(ka), 2, 2, 2, 2), dtype=complex)
    ops[:, :, :, 0, :, 0] = np.einsum("ixy,jyz->ijxz", kb, ka)
    ops[:, :, :, 1, :, 1] = np.einsum("jxy,iyz->ijxz", ka, kb)
    return KrausChannel(ops.reshape(-1, 4, 4), "SWITCH")


def apply_switch(rho1: DensityOp, c: ControllerState, a: float, b: float) -> DensityOp:
    if rho1.dim != 2:
        raise ValueError("the switch acts on a qubit state")
    joint = validate_density(kron(rho1.mat, c.density()), rho1.tol)
    return apply_channel(switch_kraus(a, b), joint)


def reduce_incoherent(rho_sw: DensityOp) -> DensityOp:
    return validate_density(partial_trace_controller(rho_sw.mat), rho_sw.tol)


def postselect_branch(rho_sw: DensityOp, branch: Branch) -> SwitchOutcome:
    """Project the controller on ``|x_+->`` and return the conditioned qubit state."""
    if rho_sw.dim != 4:
        raise ValueError("post-selection needs a system-controller state")
    x = branch.ket
    # (i k, j l) -> sum_kl conj(x_k) rho[(i k), (j l)] x_l
    half = (rho_sw.mat.reshape(2, 2, 2, 2) @ x).transpose(0, 2, 1)
    unnormalized = half @ x.conj()
    p = float((unnormalized[0, 0] + unnormalized[1, 1]).real)
    if p <= PROBABILITY_FLOOR:
        raise StateError("trace", f"branch {branch.value} has probability {p:.3e}")
    return SwitchOutcome(branch, p, validate_density(unnormalized / p, rho_sw.tol))


def branch_probability_closed(a: float, theta: float, branch: Branch) -> float:
    return 0.5 * (1.0 + branch.sign * a * (1.0 - a) * math.sin(theta))


def incoherent_state_closed(a: float, theta: float) -> np.ndarray:
    """``I/2 + (a - 1/2) cos(theta) sigma_z``."""
    z = (a - 0.5) * math.cos(theta)
    return np.diag([0.5 + z, 0.5 - z]).astype(complex)


def _bias(t: ThermalSpec, a: float, theta: float) -> float:
    # 1 + (1 - 2a) cos(theta) / tanh(beta eps), shared by both regime functions
    return 1.0 + (1.0 - 2.0 * a) * math.cos(theta) / t.tanh_be


def omega_coherent(a: float, theta: float, t: ThermalSpec, branch: Branch) -> RegimeIndicator:
    p = branch_probability_closed(a, theta, branch)
    return RegimeIndicator(_bias(t, a, theta) / (4.0 * p), _kind(branch))


def omega_incoherent(a: float, theta: float, t: ThermalSpec) -> RegimeIndicator:
    return RegimeIndicator(0.5 * _bias(t, a, theta), ControlKind.INCOHERENT)


def w_isentropic_coherent(a: float, theta: float, t: ThermalSpec, branch: Branch) -> float:
    """Work-channel parameter that makes channel C isentropic on the post-selected state."""
    p = branch_probability_closed(a, theta, branch)
    g = 1.0 / (2.0 * p)
    w = g * (0.5 - (a - 0.5) * math.cos(theta)) + (1.0 - g) * t.excited_population
    return _confine_unit(w, "w_pm")


def w_isentropic_incoherent(a: float, theta: float) -> float:
    return _confine_unit(0.5 - (a - 0.5) * math.cos(theta), "w_inc")


def _confine_unit(w: float, name: str) -> float:
    if not -W_RANGE_TOL <= w <= 1.0 + W_RANGE_TOL:
        # mathematically impossible for valid inputs
        raise ArithmeticError(f"{name} = {w!r} left [0, 1]")
    return min(max(w, 0.0), 1.0)


def engine_merit_from_omega(omega: float) -> float:
    return 2.0 - 1.0 / omega


def accelerator_merit_from_omega(omega: float) -> float:
    return (1.0 - omega) / (1.0 - 2.0 * omega)


def _engine_accelerator_mode(omega: float) -> Mode:
    # closed at 1/2 like the definite-order engine interval, so theta = 0 reproduces it
    if 0.5 <= omega < 1.0:
        return Mode.ENGINE
    if 0.0 < omega < 0.5:
        return Mode.ACCELERATOR
    return Mode.OUT_OF_REGIME


def _check_inputs(a: float, theta: float) -> tuple[float, ControllerState]:
    return check_unit_interval("a", a), ControllerState(float(theta))


def run_ico_cycle_engine(t: ThermalSpec, a: float, theta: float, branch: Branch) -> CycleReport:
    """Engine/accelerator with the switch in stroke 2 and channel C in stroke 3."""
    a, c = _check_inputs(a, theta)
    branch = Branch(branch)
    h = hamiltonian(t.eps)
    eps, th = t.eps, t.tanh_be

    rho1 = gibbs_state(t)
    outcome = postselect_branch(apply_switch(rho1, c, a, a), branch)
    rho2 = outcome.state
    p = outcome.probability
    w = w_isentropic_coherent(a, theta, t, branch)
    rho3 = apply_channel(channels.kraus_work_c(w), rho2)
    strokes = [
        stroke_record(h, rho1, rho2, "2:switch"),
        stroke_record(h, rho2, rho3, "3:C"),
        stroke_record(h, rho3, rho1, "1:thermalize"),
    ]
    residual = first_law_residual(strokes, eps)
    du2, du3, du1 = (s.delta_u for s in strokes)

    omega = omega_coherent(a, theta, t, branch).omega
    cos_t = math.cos(theta)
    check_closed_form("p_pm", p, branch_probability_closed(a, theta, branch))
    check_closed_form("w_pm", w, float(rho2.mat[1, 1].real))
    check_closed_form("S3_pm", strokes[1].delta_s, 0.0)
    check_closed_form("U2_pm", du2, eps / (2 * p) * ((1 - 2 * a) * cos_t + th))
    check_closed_form("W_pm", du3, eps / p * ((2 * a - 1) * cos_t + (2 * p - 1) * th))
    check_closed_form("Qcold_pm", du1, -eps / (2 * p) * ((2 * a - 1) * cos_t - (1 - 4 * p) * th))
    check_closed_form("Omega_pm", du2, 2 * eps * th * omega)

    mode = _engine_accelerator_mode(omega)
    merit = None
    if mode is Mode.ENGINE:
        merit = -du3 / du2 + 0.0  # no signed zero at the zero-work end
        check_ratio("eta_pm", -du3, du2, engine_merit_from_omega(omega))
    elif mode is Mode.ACCELERATOR:
        merit = -du1 / du3
        check_ratio("COPacc_pm", -du1, du3, accelerator_merit_from_omega(omega))
    return CycleReport(
        mode=mode,
        strokes=tuple(strokes),
        q_hot=du2,
        q_cold=du1,
        work=du3,
        merit=merit,
        eps=eps,
        omega=omega,
        branch_probability=p,
        expected_repeats=1.0 / p,
        first_law_residual=residual,
    )


def run_ico_cycle_refrigerator(t: ThermalSpec, a: float, theta: float, branch: Branch) -> CycleReport:
    """Refrigerator with channel D in stroke 2 and the switch in stroke 3.

    The refrigerating regime needs the regime function below zero and a
    positive heat flow out of the cold bath; other points are reported out
    of regime with their simulated energies.
    """
    a, c = _check_inputs(a, theta)
    branch = Branch(branch)
    h = hamiltonian(t.eps)
    eps, th = t.eps, t.tanh_be

    rho1 = gibbs_state(t)
    d = t.ground_population
    rho2 = apply_channel(channels.kraus_work_d(d), rho1)
    outcome = postselect_branch(apply_switch(rho2, c, a, a), branch)
    rho3 = outcome.state
    p = outcome.probability
    strokes = [
        stroke_record(h, rho1, rho2, "2:D"),
        stroke_record(h, rho2, rho3, "3:switch"),
        stroke_record(h, rho3, rho1, "1:thermalize"),
    ]
    residual = first_law_residual(strokes, eps)
    du2, du3, du1 = (s.delta_u for s in strokes)

    omega = omega_coherent(a, theta, t, branch).omega
    cos_t = math.cos(theta)
    check_closed_form("p_pm_ref", p, branch_probability_closed(a, theta, branch))
    check_closed_form("S2_ref", strokes[0].delta_s, 0.0)
    check_closed_form("W_inv", du2, 2 * eps * th)
    check_closed_form("Qhot_ref_pm", du3, -eps / (2 * p) * ((2 * a - 1) * cos_t + th))
    check_closed_form("Qcold_ref_pm", du1, eps / (2 * p) * ((2 * a - 1) * cos_t + (1 - 4 * p) * th))
    cop_closed = 1.0 / (2 * p) - (omega + 1.0)
    check_ratio("COPref_pm", du1, du2, cop_closed)

    refrigerating = omega < 0.0 and du1 > 0.0
    return CycleReport(
        mode=Mode.REFRIGERATOR if refrigerating else Mode.OUT_OF_REGIME,
        strokes=tuple(strokes),
        q_hot=du3,
        q_cold=du1,
        work=du2,
        merit=du1 / du2 if refrigerating else None,
        eps=eps,
        omega=omega,
        branch_probability=p,
        expected_repeats=1.0 / p,
        first_law_residual=residual,
    )


def run_incoherent_cycle(t: ThermalSpec, a: float, theta: float) -> CycleReport:
    """Engine/accelerator fuelled by the unobserved switch (mixture of orders)."""
    a, c = _check_inputs(a, theta)
    h = hamiltonian(t.eps)
    eps, th = t.eps, t.tanh_be

    rho1 = gibbs_state(t)
    rho2 = reduce_incoherent(apply_switch(rho1, c, a, a))
    w = w_isentropic_incoherent(a, theta)
    rho3 = apply_channel(channels.kraus_work_c(w), rho2)
    strokes = [
        stroke_record(h, rho1, rho2, "2:switch-inc"),
        stroke_record(h, rho2, rho3, "3:C"),
        stroke_record(h, rho3, rho1, "1:thermalize"),
    ]
    residual = first_law_residual(strokes, eps)
    du2, du3, du1 = (s.delta_u for s in strokes)

    omega = omega_incoherent(a, theta, t).omega
    cos_t = math.cos(theta)
    check_closed_form("rho_sw_inc", float(np.max(np.abs(rho2.mat - incoherent_state_closed(a, theta)))), 0.0)
    check_closed_form("w_inc", w, float(rho2.mat[1, 1].real))
    check_closed_form("Qhot_inc", du2, eps * ((1 - 2 * a) * cos_t + th))
    check_closed_form("W_inc", du3, 2 * eps * (2 * a - 1) * cos_t)
    check_closed_form("Omega_inc", du2, 2 * eps * th * omega)

    mode = _engine_accelerator_mode(omega)
    merit = None
    if mode is Mode.ENGINE:
        merit = -du3 / du2 + 0.0  # no signed zero at the zero-work end
        check_ratio("eta_inc", -du3, du2, engine_merit_from_omega(omega))
    elif mode is Mode.ACCELERATOR:
        merit = -du1 / du3
        check_ratio("COPacc_inc", -du1, du3, accelerator_merit_from_omega(omega))
    return CycleReport(
        mode=mode,
        strokes=tuple(strokes),
        q_hot=du2,
        q_cold=du1,
        work=du3,
        merit=merit,
        eps=eps,
        omega=omega,
        first_law_residual=residual,
    )


@dataclass(frozen=True)
class AdvantageRecord:
    """Coherent versus incoherent control at the same ``(a, theta)``.

    ``comparison`` says which figure of merit was compared: ``"engine"``
    when the coherent device is an engine, ``"accelerator"`` when it is an
    accelerator, ``"not-applicable"`` otherwise. A side whose figure of merit
    is undefined at this point reports ``None``.
    """

    advantaged: bool
    p: float
    omega_coherent: float
    omega_incoherent: float
    comparison: str
    eta_coherent: float | None = None
    eta_incoherent: float | None = None
    cop_coherent: float | None = None
    cop_incoherent: float | None = None


def _eta_or_none(omega: float) -> float | None:
    # omega = 1/2 is the zero-work point: heat in, nothing out, efficiency 0
    return engine_merit_from_omega(omega) if 0.5 <= omega < 1.0 else None


def _cop_or_none(omega: float) -> float | None:
    return accelerator_merit_from_omega(omega) if 0.0 < omega < 0.5 else None


def coherent_advantage(t: ThermalSpec, a: float, theta: float, branch: Branch) -> AdvantageRecord:
    branch = Branch(branch)
    p = branch_probability_closed(a, theta, branch)
    om_c = omega_coherent(a, theta, t, branch).omega
    om_i = omega_incoherent(a, theta, t).omega
    advantaged = om_c > om_i
    # om_c - om_i = (1 - 2p) / (4p) * bias, so with bias > 0 the flag is p < 1/2
    if _bias(t, a, theta) > 1e-12 and abs(p - 0.5) > 1e-12:
        if advantaged != (p < 0.5):
            raise AssertionError(f"advantage flag {advantaged} disagrees with p = {p!r}")

    mode = _engine_accelerator_mode(om_c)
    if mode is Mode.ENGINE:
        comparison = "engine"
    elif mode is Mode.ACCELERATOR:
        comparison = "accelerator"
    else:
        comparison = "not-applicable"
    return AdvantageRecord(
        advantaged=advantaged,
        p=p,
        omega_coherent=om_c,
        omega_incoherent=om_i,
        comparison=comparison,
        eta_coherent=_eta_or_none(om_c),
        eta_incoherent=_eta_or_none(om_i),
        cop_coherent=_cop_or_none(om_c),
        cop_incoherent=_cop_or_none(om_i),
    )


__all__ = [
    "Branch",
    "ControlKind",
    "ControllerState",
    "SwitchOutcome",
    "RegimeIndicator",
    "AdvantageRecord",
    "switch_kraus",
    "apply_switch",
    "reduce_incoherent",
    "postselect_branch",
    "branch_probability_closed",
    "incoherent_state_closed",
    "omega_coherent",
    "omega_incoherent",
    "w_isentropic_coherent",
    "w_isentropic_incoherent",
    "run_ico_cycle_engine",
    "run_ico_cycle_refrigerator",
    "run_incoherent_cycle",
    "coherent_advantage",
    "CLOSED_FORM_TOL",
]
