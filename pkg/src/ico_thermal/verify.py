"""Cross-validation of every closed-form expression against Kraus-sum simulation.

Each registered :class:`Equation` pairs an analytic expression with a value
obtained by brute-force simulation (explicit channel application, switch,
partial trace, post-selection). :func:`verify_equations` evaluates the
registry on a seeded pseudo-random parameter set plus a structured grid of
boundary points and reports the worst absolute deviation per equation.

Random parameters come from SplitMix64 (64-bit state, Steele, Lea & Flood
2014) so that any implementation seeded identically draws the same cases.
Uniform doubles are ``(x >> 11) * 2**-53``; each random case draws, in order,
``a``, ``theta / pi`` and ``(beta_eps - 0.05) / 2.95``.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Sequence

import numpy as np

from . import channels
from .channels import ThermalSpec, gibbs_state, hamiltonian
from .linalg import (
    DensityOp,
    binary_entropy,
    kron,
    partial_trace_controller,
    relative_entropy,
    validate_density,
    von_neumann_entropy,
)
from .switch import (
    Branch,
    ControllerState,
    branch_probability_closed,
    incoherent_state_closed,
    omega_coherent,
    omega_incoherent,
    postselect_branch,
    switch_kraus,
    w_isentropic_coherent,
    w_isentropic_incoherent,
)

THRESHOLD = 1e-10
# figures of merit are ratios; points whose simulated denominator is smaller
# than this (in units of eps) are too ill-conditioned for an absolute check
MERIT_DENOMINATOR_FLOOR = 1e-2
BETA_EPS_RANGE = (0.05, 3.0)
GRID_BETA_EPS = (0.05, 0.45, 1.39, 3.0)
BRANCHES = (Branch.PLUS, Branch.MINUS)


class SplitMix64:
    """SplitMix64 generator with 64-bit state."""

    MASK = (1 << 64) - 1

    def __init__(self, seed: int):
        self.state = seed & self.MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & self.MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & self.MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & self.MASK
        return z ^ (z >> 31)

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53


@dataclass(frozen=True)
class CaseInputs:
    a: float
    theta: float
    beta_eps: float
    eps: float = 1.0

    @property
    def b(self) -> float:
        return self.a

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "theta": self.theta, "beta_eps": self.beta_eps, "eps": self.eps}


class Simulation:
    """Brute-force states and stroke energies for one parameter point.

    Everything here is computed by applying Kraus operators; no closed form
    is used. Attributes are evaluated lazily so that a broken channel only
    affects the equations that depend on it.
    """

    def __init__(self, case: CaseInputs):
        self.case = case
        self.t = ThermalSpec.from_beta_eps(case.beta_eps, case.eps)
        self.h = hamiltonian(case.eps)
        self.rho1 = gibbs_state(self.t)

        # entropies are memoized per state object; states are immutable and held by this instance
        self._entropy: dict[int, tuple[DensityOp, float]] = {}
        self._relative: dict[int, tuple[DensityOp, float]] = {}
        self._energy: dict[int, tuple[DensityOp, float]] = {}

    def energy(self, rho: DensityOp) -> float:
        hit = self._energy.get(id(rho))
        if hit is None:
            hit = self._energy[id(rho)] = (rho, float((self.h.mat * rho.mat.T).sum().real))
        return hit[1]

    def du(self, before: DensityOp, after: DensityOp) -> float:
        return self.energy(after) - self.energy(before)

    def entropy(self, rho: DensityOp) -> float:
        hit = self._entropy.get(id(rho))
        if hit is None:
            hit = self._entropy[id(rho)] = (rho, von_neumann_entropy(rho))
        return hit[1]

    def ds(self, before: DensityOp, after: DensityOp) -> float:
        return self.entropy(after) - self.entropy(before)

    def rel(self, rho: DensityOp) -> float:
        hit = self._relative.get(id(rho))
        if hit is None:
            hit = self._relative[id(rho)] = (rho, relative_entropy(rho, self.rho1))
        return hit[1]

    # definite order, b = a
    @cached_property
    def meter_a(self) -> channels.KrausChannel:
        return channels.kraus_meter_a(self.case.a)

    @cached_property
    def meter_b(self) -> channels.KrausChannel:
        return channels.kraus_meter_b(self.case.b)

    @cached_property
    def rho2(self) -> DensityOp:
        return channels.apply_channel(self.meter_a, self.rho1)

    @cached_property
    def rho3(self) -> DensityOp:
        return channels.apply_channel(self.meter_b, self.rho2)

    @cached_property
    def definite_strokes(self) -> list[tuple[DensityOp, DensityOp]]:
        return [(self.rho3, self.rho1), (self.rho1, self.rho2), (self.rho2, self.rho3)]

    # definite-order refrigerator: A at the upper isentropic point, then B(b_ref)
    @cached_property
    def b_ref(self) -> float:
        p0 = self.t.ground_population
        return p0 + (1.0 - p0) * self.case.a

    @cached_property
    def rho2_ref(self) -> DensityOp:
        return channels.apply_channel(channels.kraus_meter_a(self.t.ground_population), self.rho1)

    @cached_property
    def rho3_ref(self) -> DensityOp:
        return channels.apply_channel(channels.kraus_meter_b(self.b_ref), self.rho2_ref)

    # closed forms reused by several equations
    @cached_property
    def closed_p(self) -> dict:
        return {br: branch_probability_closed(self.case.a, self.case.theta, br) for br in BRANCHES}

    @cached_property
    def closed_omega(self) -> dict:
        return {br: omega_coherent(self.case.a, self.case.theta, self.t, br).omega for br in BRANCHES}

    @cached_property
    def entropic_identity(self) -> tuple[tuple, tuple]:
        """``(dS + d(relative entropy), beta dU)`` over the definite and refrigerator strokes."""
        lhs, rhs = [], []
        strokes = self.definite_strokes + [(self.rho1, self.rho2_ref), (self.rho2_ref, self.rho3_ref),
                                           (self.rho3_ref, self.rho1)]
        for before, after in strokes:
            lhs.append(self.t.beta * self.du(before, after))
            rhs.append(self.ds(before, after) + self.rel(after) - self.rel(before))
        return tuple(rhs), tuple(lhs)

    # switch
    @cached_property
    def switch(self) -> channels.KrausChannel:
        return switch_kraus(self.case.a, self.case.b)

    @cached_property
    def controller(self) -> np.ndarray:
        return ControllerState(self.case.theta).density()

    def switched(self, rho: DensityOp) -> DensityOp:
        joint = validate_density(kron(rho.mat, self.controller))
        return channels.apply_channel(self.switch, joint)

    @cached_property
    def rho_sw(self) -> DensityOp:
        return self.switched(self.rho1)

    @cached_property
    def rho_inc(self) -> DensityOp:
        return validate_density(partial_trace_controller(self.rho_sw.mat))

    @cached_property
    def outcomes(self) -> dict:
        return {br: postselect_branch(self.rho_sw, br) for br in BRANCHES}

    @cached_property
    def rho_ab(self) -> DensityOp:
        return self.rho3

    @cached_property
    def rho_ba(self) -> DensityOp:
        return channels.apply_channel(self.meter_a, channels.apply_channel(self.meter_b, self.rho1))

    @cached_property
    def work_outputs(self) -> dict:
        # isentropic parameter read off the simulated state: C swaps populations
        out = {}
        for br, o in self.outcomes.items():
            w = min(max(float(o.state.mat[1, 1].real), 0.0), 1.0)
            out[br] = (w, channels.apply_channel(channels.kraus_work_c(w), o.state))
        return out

    @cached_property
    def inc_work_output(self) -> tuple[float, DensityOp]:
        w = min(max(float(self.rho_inc.mat[1, 1].real), 0.0), 1.0)
        return w, channels.apply_channel(channels.kraus_work_c(w), self.rho_inc)

    # ICO refrigerator: D at the swap point, then the switch
    @cached_property
    def rho2_fridge(self) -> DensityOp:
        return channels.apply_channel(channels.kraus_work_d(self.t.ground_population), self.rho1)

    @cached_property
    def fridge_outcomes(self) -> dict:
        joint = self.switched(self.rho2_fridge)
        return {br: postselect_branch(joint, br) for br in BRANCHES}


@dataclass(frozen=True)
class Equation:
    """One closed form and its simulated counterpart.

    ``analytic`` and ``simulated`` may return scalars or arrays; the deviation
    is the largest absolute element-wise difference. ``applies`` filters out
    points where the expression is undefined or ill-conditioned.
    """

    id: str
    description: str
    analytic: Callable[[Simulation], object]
    simulated: Callable[[Simulation], object]
    applies: Callable[[Simulation], bool] = lambda s: True


def _per_branch(fn: Callable[[Simulation, Branch], float]) -> Callable[[Simulation], tuple]:
    return lambda s: tuple(fn(s, br) for br in BRANCHES)


def _c(s: Simulation) -> float:
    return math.cos(s.case.theta)


def _p(s: Simulation, br: Branch) -> float:
    return s.closed_p[br]


def _omega(s: Simulation, br: Branch) -> float:
    return s.closed_omega[br]


def _omega_inc(s: Simulation) -> float:
    return omega_incoherent(s.case.a, s.case.theta, s.t).omega


def _q_pm(s: Simulation, br: Branch) -> float:
    return s.du(s.rho1, s.outcomes[br].state)


def _w_pm(s: Simulation, br: Branch) -> float:
    o = s.outcomes[br].state
    return s.du(o, s.work_outputs[br][1])


def _qc_pm(s: Simulation, br: Branch) -> float:
    return s.du(s.work_outputs[br][1], s.rho1)


def _qh_ref(s: Simulation, br: Branch) -> float:
    return s.du(s.rho2_fridge, s.fridge_outcomes[br].state)


def _qc_ref(s: Simulation, br: Branch) -> float:
    return s.du(s.fridge_outcomes[br].state, s.rho1)


def _w_inv(s: Simulation) -> float:
    return s.du(s.rho1, s.rho2_fridge)


def _mode_a(s: Simulation) -> tuple[float, float, float]:
    t = s.t
    return t.excited_population, 0.5, t.ground_population


def _rel_ratio_ok(values: Iterable[float]) -> bool:
    return all(abs(v) >= MERIT_DENOMINATOR_FLOOR for v in values)


def _entropic_identity(s: Simulation) -> tuple[tuple, tuple]:
    return s.entropic_identity


def _d(s: Simulation, rho: DensityOp) -> float:
    return s.rel(rho)


def build_registry() -> list[Equation]:
    """All checked closed forms, keyed by a stable identifier."""
    eq = Equation
    eps = lambda s: s.case.eps  # noqa: E731
    th = lambda s: s.t.tanh_be  # noqa: E731
    a_ = lambda s: s.case.a  # noqa: E731

    def in_engine(s):
        low, half, high = _mode_a(s)
        return half <= s.case.a < high and abs(s.du(s.rho1, s.rho2)) >= MERIT_DENOMINATOR_FLOOR

    def in_accel(s):
        low, half, _ = _mode_a(s)
        return low < s.case.a < half and abs(s.du(s.rho2, s.rho3)) >= MERIT_DENOMINATOR_FLOOR

    def fridge_b_ok(s):
        return s.b_ref > s.t.ground_population

    def entropy_eta(s):
        d2, d3 = _d(s, s.rho2), _d(s, s.rho3)
        return (d2 - d3) / (d2 + s.ds(s.rho1, s.rho2))

    def entropy_cop_acc(s):
        d2, d3 = _d(s, s.rho2), _d(s, s.rho3)
        return (d3 + s.ds(s.rho1, s.rho2)) / (d3 - d2)

    def entropy_cop_ref(s):
        d2, d3 = _d(s, s.rho2_ref), _d(s, s.rho3_ref)
        return (s.ds(s.rho3_ref, s.rho1) - d3) / d2

    registry = [
        # definite-order cycle
        eq("U2", "meter A energy change 2 eps [a - (1 - tanh)/2]",
           lambda s: 2 * eps(s) * (a_(s) - s.t.excited_population),
           lambda s: s.du(s.rho1, s.rho2)),
        eq("S2", "meter A entropy change h(a) - h((1 - tanh)/2)",
           lambda s: binary_entropy(a_(s)) - binary_entropy(s.t.excited_population),
           lambda s: s.ds(s.rho1, s.rho2)),
        eq("U3", "meter B energy change 2 eps (1 - a - b)",
           lambda s: 2 * eps(s) * (1 - a_(s) - s.case.b),
           lambda s: s.du(s.rho2, s.rho3)),
        eq("S3", "meter B entropy change h(b) - h(a)",
           lambda s: binary_entropy(s.case.b) - binary_entropy(a_(s)),
           lambda s: s.ds(s.rho2, s.rho3)),
        eq("U1", "thermalization energy change -2 eps [(1 + tanh)/2 - b]",
           lambda s: -2 * eps(s) * (s.t.ground_population - s.case.b),
           lambda s: s.du(s.rho3, s.rho1)),
        eq("entropic_identity", "beta dU = dS + d(relative entropy to Gibbs), every stroke",
           lambda s: _entropic_identity(s)[0],
           lambda s: _entropic_identity(s)[1]),
        eq("eta", "engine efficiency 2 (1 + tanh/(2a - 1))^-1 vs energy ratio",
           lambda s: 2 * (2 * a_(s) - 1) / (2 * a_(s) - 1 + th(s)),
           lambda s: -s.du(s.rho2, s.rho3) / s.du(s.rho1, s.rho2),
           in_engine),
        eq("eta_entropic", "engine efficiency in relative-entropy form",
           lambda s: 2 * (2 * a_(s) - 1) / (2 * a_(s) - 1 + th(s)),
           entropy_eta,
           in_engine),
        eq("COP_acc", "accelerator COP (1 - tanh/(2a - 1))/2 vs energy ratio",
           lambda s: 0.5 * (1 - th(s) / (2 * a_(s) - 1)),
           lambda s: -s.du(s.rho3, s.rho1) / s.du(s.rho2, s.rho3),
           in_accel),
        eq("COP_acc_entropic", "accelerator COP in relative-entropy form",
           lambda s: 0.5 * (1 - th(s) / (2 * a_(s) - 1)),
           entropy_cop_acc,
           in_accel),
        eq("COP_ref", "refrigerator COP (b - 1/2) coth - 1/2 vs energy ratio",
           lambda s: (s.b_ref - 0.5) / th(s) - 0.5,
           lambda s: s.du(s.rho3_ref, s.rho1) / s.du(s.rho1, s.rho2_ref),
           fridge_b_ok),
        eq("COP_ref_entropic", "refrigerator COP in relative-entropy form",
           lambda s: (s.b_ref - 0.5) / th(s) - 0.5,
           entropy_cop_ref,
           fridge_b_ok),
        # switch
        eq("rho_sw_inc", "traced-out switch I/2 + (a - 1/2) cos(theta) sigma_z",
           lambda s: incoherent_state_closed(a_(s), s.case.theta),
           lambda s: s.rho_inc.mat),
        eq("rho_sw_orders", "traced-out switch cos^2 rho_ab + sin^2 rho_ba",
           lambda s: math.cos(s.case.theta / 2) ** 2 * s.rho_ab.mat
           + math.sin(s.case.theta / 2) ** 2 * s.rho_ba.mat,
           lambda s: s.rho_inc.mat),
        eq("p_pm", "branch probability [1 +- a(1 - a) sin(theta)]/2",
           _per_branch(_p),
           _per_branch(lambda s, br: s.outcomes[br].probability)),
        eq("mixture", "p+ rho+ + p- rho- equals the traced-out switch",
           lambda s: s.rho_inc.mat,
           lambda s: sum(o.probability * o.state.mat for o in s.outcomes.values())),
        eq("rho_pm", "conditioned state rho_inc/(2p) + (1 - 1/(2p)) rho1",
           lambda s: np.array([s.rho_inc.mat / (2 * _p(s, br)) + (1 - 1 / (2 * _p(s, br))) * s.rho1.mat
                               for br in BRANCHES]),
           lambda s: np.array([s.outcomes[br].state.mat for br in BRANCHES])),
        # coherent engine / accelerator
        eq("U2_pm", "switch heat eps/(2p) [(1 - 2a) cos + tanh]",
           _per_branch(lambda s, br: eps(s) / (2 * _p(s, br)) * ((1 - 2 * a_(s)) * _c(s) + th(s))),
           _per_branch(_q_pm)),
        eq("Omega_pm", "regime function: Q_hot = 2 eps tanh Omega",
           _per_branch(lambda s, br: 2 * eps(s) * th(s) * _omega(s, br)),
           _per_branch(_q_pm)),
        eq("w_pm", "isentropic work-channel parameter",
           _per_branch(lambda s, br: w_isentropic_coherent(a_(s), s.case.theta, s.t, br)),
           _per_branch(lambda s, br: s.work_outputs[br][0])),
        eq("S3_pm", "channel C at w_pm is isentropic",
           _per_branch(lambda s, br: 0.0),
           _per_branch(lambda s, br: s.ds(s.outcomes[br].state, s.work_outputs[br][1]))),
        eq("W_pm", "work eps/p [(2a - 1) cos + (2p - 1) tanh]",
           _per_branch(lambda s, br: eps(s) / _p(s, br)
                       * ((2 * a_(s) - 1) * _c(s) + (2 * _p(s, br) - 1) * th(s))),
           _per_branch(_w_pm)),
        eq("W_pm_omega", "work 2 eps tanh (1 - 2 Omega)",
           _per_branch(lambda s, br: 2 * eps(s) * th(s) * (1 - 2 * _omega(s, br))),
           _per_branch(_w_pm)),
        eq("Qcold_pm", "cold heat -eps/(2p) [(2a - 1) cos - (1 - 4p) tanh]",
           _per_branch(lambda s, br: -eps(s) / (2 * _p(s, br))
                       * ((2 * a_(s) - 1) * _c(s) - (1 - 4 * _p(s, br)) * th(s))),
           _per_branch(_qc_pm)),
        eq("Qcold_pm_omega", "cold heat -2 eps tanh (1 - Omega)",
           _per_branch(lambda s, br: -2 * eps(s) * th(s) * (1 - _omega(s, br))),
           _per_branch(_qc_pm)),
        eq("eta_pm", "efficiency 2 - 1/Omega vs -W/Q_hot",
           _per_branch(lambda s, br: 2 - 1 / _omega(s, br)),
           _per_branch(lambda s, br: -_w_pm(s, br) / _q_pm(s, br)),
           lambda s: _rel_ratio_ok(_q_pm(s, br) for br in BRANCHES)),
        eq("COPacc_pm", "accelerator COP 1 - (2 - 1/Omega)^-1 vs -Q_cold/W",
           _per_branch(lambda s, br: 1 - 1 / (2 - 1 / _omega(s, br))),
           _per_branch(lambda s, br: -_qc_pm(s, br) / _w_pm(s, br)),
           lambda s: _rel_ratio_ok(_w_pm(s, br) for br in BRANCHES)
           and _rel_ratio_ok(_q_pm(s, br) for br in BRANCHES)),
        # coherent refrigerator
        eq("W_inv", "work invested by channel D, 2 eps tanh",
           lambda s: 2 * eps(s) * th(s),
           _w_inv),
        eq("Qhot_ref_pm", "meter heat -eps/(2p) [(2a - 1) cos + tanh]",
           _per_branch(lambda s, br: -eps(s) / (2 * _p(s, br)) * ((2 * a_(s) - 1) * _c(s) + th(s))),
           _per_branch(_qh_ref)),
        eq("Qcold_ref_pm", "cold heat eps/(2p) [(2a - 1) cos + (1 - 4p) tanh]",
           _per_branch(lambda s, br: eps(s) / (2 * _p(s, br))
                       * ((2 * a_(s) - 1) * _c(s) + (1 - 4 * _p(s, br)) * th(s))),
           _per_branch(_qc_ref)),
        eq("COPref_pm", "refrigerator COP 1/(2p) - (Omega + 1) vs Q_cold/W_inv",
           _per_branch(lambda s, br: 1 / (2 * _p(s, br)) - (_omega(s, br) + 1)),
           _per_branch(lambda s, br: _qc_ref(s, br) / _w_inv(s))),
        # incoherent control
        eq("Omega_inc", "regime function: Q_hot = 2 eps tanh Omega_inc",
           lambda s: 2 * eps(s) * th(s) * _omega_inc(s),
           lambda s: s.du(s.rho1, s.rho_inc)),
        eq("Qhot_inc", "heat eps [(1 - 2a) cos + tanh]",
           lambda s: eps(s) * ((1 - 2 * a_(s)) * _c(s) + th(s)),
           lambda s: s.du(s.rho1, s.rho_inc)),
        eq("w_inc", "isentropic parameter 1/2 - (a - 1/2) cos",
           lambda s: w_isentropic_incoherent(a_(s), s.case.theta),
           lambda s: s.inc_work_output[0]),
        eq("W_inc", "work 2 eps (2a - 1) cos",
           lambda s: 2 * eps(s) * (2 * a_(s) - 1) * _c(s),
           lambda s: s.du(s.rho_inc, s.inc_work_output[1])),
        eq("eta_inc", "efficiency 2 - 1/Omega_inc vs -W/Q_hot",
           lambda s: 2 - 1 / _omega_inc(s),
           lambda s: -s.du(s.rho_inc, s.inc_work_output[1]) / s.du(s.rho1, s.rho_inc),
           lambda s: _rel_ratio_ok([s.du(s.rho1, s.rho_inc)])),
        eq("COPacc_inc", "accelerator COP 1 - (2 - 1/Omega_inc)^-1 vs -Q_cold/W",
           lambda s: 1 - 1 / (2 - 1 / _omega_inc(s)),
           lambda s: -s.du(s.inc_work_output[1], s.rho1) / s.du(s.rho_inc, s.inc_work_output[1]),
           lambda s: _rel_ratio_ok([s.du(s.rho_inc, s.inc_work_output[1]),
                                    s.du(s.rho1, s.rho_inc)])),
    ]
    ids = [e.id for e in registry]
    assert len(ids) == len(set(ids)), "duplicate equation id"
    return registry


def random_cases(seed: int, n: int) -> list[CaseInputs]:
    rng = SplitMix64(seed)
    lo, hi = BETA_EPS_RANGE
    out = []
    for _ in range(n):
        a = rng.uniform()
        theta = math.pi * rng.uniform()
        beta_eps = lo + (hi - lo) * rng.uniform()
        out.append(CaseInputs(a, theta, beta_eps))
    return out


def grid_cases(grid_n: int) -> list[CaseInputs]:
    """Structured grid including the isentropic, symmetric and end points."""
    out = []
    thetas = sorted(set(np.linspace(0.0, math.pi, grid_n).tolist()) | {0.0, math.pi / 2, math.pi})
    for be in GRID_BETA_EPS:
        t = ThermalSpec.from_beta_eps(be)
        special = {0.0, t.excited_population, 0.5, t.ground_population, 1.0}
        a_values = sorted(set(np.linspace(0.0, 1.0, grid_n).tolist()) | special)
        out.extend(CaseInputs(a, th, be) for a in a_values for th in thetas)
    return out


@dataclass
class EquationResult:
    id: str
    cases: int = 0
    max_deviation: float = 0.0
    worst_inputs: dict | None = None
    error: str | None = None

    def update(self, deviation: float, case: CaseInputs) -> None:
        self.cases += 1
        # strict comparison keeps the earliest worst case, so case order fixes the report
        if self.worst_inputs is None or deviation > self.max_deviation:
            self.max_deviation = deviation
            self.worst_inputs = case.to_dict()

    def merge(self, later: EquationResult) -> None:
        """Fold in the result for cases that come after this one's."""
        self.cases += later.cases
        if later.worst_inputs is not None and (
            self.worst_inputs is None or later.max_deviation > self.max_deviation
        ):
            self.max_deviation = later.max_deviation
            self.worst_inputs = later.worst_inputs
        if self.error is None:
            self.error = later.error

    def to_dict(self) -> dict:
        dev = self.max_deviation if math.isfinite(self.max_deviation) else None
        out = {"id": self.id, "cases": self.cases, "max_deviation": dev,
               "worst_inputs": self.worst_inputs}
        if self.error is not None:
            out["error"] = self.error
        return out


@dataclass
class VerifyReport:
    equations: list[EquationResult]
    threshold: float = THRESHOLD
    seed: int | None = None
    n_random: int = 0
    grid_n: int = 0
    extra_checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        eq_ok = all(e.max_deviation <= self.threshold and e.error is None for e in self.equations)
        return eq_ok and all(self.extra_checks.values())

    def failing(self) -> list[str]:
        return [e.id for e in self.equations
                if not (e.max_deviation <= self.threshold and e.error is None)]

    def to_dict(self) -> dict:
        out = {
            "pass": self.passed,
            "threshold": self.threshold,
            "seed": self.seed,
            "n_random": self.n_random,
            "grid_n": self.grid_n,
            "equations": [e.to_dict() for e in self.equations],
        }
        if self.extra_checks:
            out["checks"] = dict(self.extra_checks)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _deviation(analytic, simulated) -> float:
    if isinstance(analytic, float) and isinstance(simulated, float):
        dev = abs(analytic - simulated)
        return dev if math.isfinite(dev) else math.inf
    if isinstance(analytic, tuple) and isinstance(simulated, tuple) and len(analytic) == len(simulated):
        dev = max(abs(x - y) for x, y in zip(analytic, simulated))
        return dev if math.isfinite(dev) else math.inf
    diff = np.abs(np.asarray(analytic, dtype=complex) - np.asarray(simulated, dtype=complex))
    dev = float(np.max(diff)) if diff.size else 0.0
    return dev if math.isfinite(dev) else math.inf


def evaluate_cases(cases: Sequence[CaseInputs],
                   registry: Sequence[Equation] | None = None) -> list[EquationResult]:
    registry = build_registry() if registry is None else list(registry)
    results = [EquationResult(e.id) for e in registry]
    for case in cases:
        sim = Simulation(case)
        for eq, res in zip(registry, results):
            try:
                if not eq.applies(sim):
                    continue
                dev = _deviation(eq.analytic(sim), eq.simulated(sim))
            except Exception as exc:  # failures are reported, never raised
                dev = math.inf
                if res.error is None:
                    res.error = f"{type(exc).__name__}: {exc}"
            res.update(dev, case)
    return results


def _evaluate_chunk(cases: Sequence[CaseInputs]) -> list[EquationResult]:
    return evaluate_cases(cases)


def verify_equations(seed: int = 42, n_random: int = 10_000, grid_n: int = 11,
                     registry: Sequence[Equation] | None = None, jobs: int = 1) -> VerifyReport:
    """Evaluate the registry on ``n_random`` seeded cases plus the structured grid.

    With ``jobs > 1`` contiguous blocks of cases run in worker processes and
    are merged in case order, so the report is identical to a serial run.
    A custom ``registry`` is always evaluated serially.
    """
    if n_random < 1:
        raise ValueError("n_random must be at least 1")
    cases = random_cases(seed, n_random) + grid_cases(grid_n)
    if jobs <= 1 or registry is not None:
        results = evaluate_cases(cases, registry)
    else:
        size = -(-len(cases) // jobs)
        chunks = [cases[i:i + size] for i in range(0, len(cases), size)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_evaluate_chunk, chunks))
        results = parts[0]
        for part in parts[1:]:
            for total, piece in zip(results, part):
                total.merge(piece)
    return VerifyReport(results, seed=seed, n_random=n_random, grid_n=grid_n)


def no_work_from_equilibrium_details(t: ThermalSpec) -> list[dict]:
    """Isentropic C and D channels on the Gibbs state: energy change and relative entropy."""
    h = hamiltonian(t.eps)
    rho1 = gibbs_state(t)
    rows = []
    for name, family in (("C", channels.kraus_work_c), ("D", channels.kraus_work_d)):
        for x in (t.excited_population, t.ground_population):
            out = channels.apply_channel(family(x), rho1)
            rec = channels.stroke_record(h, rho1, out, name)
            rows.append({
                "channel": name,
                "parameter": x,
                "delta_u": rec.delta_u,
                "delta_s": rec.delta_s,
                "relative_entropy_energy": relative_entropy(out, rho1) / t.beta,
            })
    return rows


def verify_no_work_from_equilibrium(t: ThermalSpec) -> bool:
    """No isentropic non-selective channel extracts work from the Gibbs state."""
    for row in no_work_from_equilibrium_details(t):
        if abs(row["delta_s"]) > THRESHOLD:
            return False
        if row["delta_u"] < -1e-12:
            return False
        if abs(row["delta_u"] - row["relative_entropy_energy"]) > THRESHOLD:
            return False
    return True
