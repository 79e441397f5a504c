"""Thermal state, qubit Hamiltonian and the non-selective measurement channels.

Conventions: ``H = -eps * sigma_z``, so ``|0>`` is the ground state with
energy ``-eps`` and ``|1>`` the excited state with energy ``+eps``.

The four measurement families are input-independent resets:

* meter A (and work channel D) prepares ``diag(1 - a, a)``;
* meter B (and work channel C) prepares ``diag(b, 1 - b)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .linalg import (
    SIGMA_Z,
    DensityOp,
    binary_entropy,
    validate_density,
    von_neumann_entropy,
)

COMPLETENESS_TOL = 1e-12
WORK_ENTROPY_TOL = 1e-9
NULL_ENERGY_TOL = 1e-12


class ParameterError(ValueError):
    """A physical parameter is outside its allowed range."""


def check_unit_interval(name: str, x: float) -> float:
    x = float(x)
    if not (0.0 <= x <= 1.0):
        raise ParameterError(f"{name} = {x!r} is outside [0, 1]")
    return x


@dataclass(frozen=True)
class ThermalSpec:
    """Cold bath at inverse temperature ``beta`` for a qubit of half-gap ``eps``."""

    beta: float
    eps: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.beta) and self.beta > 0):
            raise ParameterError(f"beta must be positive, got {self.beta!r}")
        if not (math.isfinite(self.eps) and self.eps > 0):
            raise ParameterError(f"eps must be positive, got {self.eps!r}")
        if not 0.0 < self.tanh_be < 1.0:
            raise ParameterError(
                f"beta*eps = {self.beta_eps!r} leaves tanh(beta*eps) outside (0, 1) in double precision"
            )

    @classmethod
    def from_beta_eps(cls, beta_eps: float, eps: float = 1.0) -> ThermalSpec:
        return cls(beta=beta_eps / eps, eps=eps)

    @property
    def beta_eps(self) -> float:
        return self.beta * self.eps

    @property
    def tanh_be(self) -> float:
        return math.tanh(self.beta_eps)

    @property
    def partition(self) -> float:
        return 2.0 * math.cosh(self.beta_eps)

    @property
    def ground_population(self) -> float:
        return 0.5 * (1.0 + self.tanh_be)

    @property
    def excited_population(self) -> float:
        return 0.5 * (1.0 - self.tanh_be)


@dataclass(frozen=True, eq=False)
class HamiltonianOp:
    eps: float
    mat: np.ndarray

    def energy(self, rho: DensityOp) -> float:
        return float(np.trace(self.mat @ rho.mat).real)


def hamiltonian(eps: float = 1.0) -> HamiltonianOp:
    return HamiltonianOp(eps, -eps * SIGMA_Z)


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """A CPTP map given by Kraus operators, checked for completeness on construction."""

    ops: np.ndarray
    label: str

    def __post_init__(self):
        stack = np.array(self.ops, dtype=complex)
        if stack.ndim != 3 or stack.shape[1] != stack.shape[2]:
            raise ValueError("Kraus operators must be square matrices of equal size")
        stack.setflags(write=False)
        object.__setattr__(self, "ops", stack)
        object.__setattr__(self, "_stack", stack)
        # flattened layouts so that Kraus sums are single 2-D products
        k, d, _ = stack.shape
        object.__setattr__(self, "_rows", stack.reshape(k * d, d))
        object.__setattr__(self, "_adj_rows", stack.conj().transpose(0, 2, 1).reshape(k * d, d))
        dev = self.completeness_error()
        if dev > COMPLETENESS_TOL:
            raise ValueError(f"channel {self.label}: completeness violated by {dev:.3e}")

    @property
    def dim(self) -> int:
        return self._stack.shape[1]

    @property
    def stack(self) -> np.ndarray:
        return self._stack

    def completeness_error(self) -> float:
        rows = self._rows
        total = np.dot(rows.conj().T, rows).tolist()
        return max(abs(x - (i == j)) for i, row in enumerate(total) for j, x in enumerate(row))

    def __len__(self) -> int:
        return len(self.ops)

    def __call__(self, m: np.ndarray) -> np.ndarray:
        """Kraus sum on a bare matrix, without validation."""
        k, d, _ = self._stack.shape
        left = (self._rows @ m).reshape(k, d, d).transpose(1, 0, 2).reshape(d, k * d)
        return left @ self._adj_rows


def _reset_ops(x: float, keep: int) -> np.ndarray:
    # keep is the level populated with weight 1 - x; the other level gets weight x
    flip = 1 - keep
    lo = math.sqrt(1.0 - x)
    hi = math.sqrt(x)
    ops = np.zeros((4, 2, 2), dtype=complex)
    ops[0, keep, keep] = lo
    ops[1, keep, flip] = lo
    ops[2, flip, flip] = hi
    ops[3, flip, keep] = -hi
    return ops


def kraus_meter_a(a: float) -> KrausChannel:
    """Meter A: ``sqrt(1-a)|0><0|, sqrt(1-a)|0><1|, sqrt(a)|1><1|, -sqrt(a)|1><0|``."""
    a = check_unit_interval("a", a)
    return KrausChannel(_reset_ops(a, keep=0), "A")


def kraus_meter_b(b: float) -> KrausChannel:
    """Meter B: ``sqrt(1-b)|1><1|, sqrt(1-b)|1><0|, sqrt(b)|0><0|, -sqrt(b)|0><1|``."""
    b = check_unit_interval("b", b)
    return KrausChannel(_reset_ops(b, keep=1), "B")


def kraus_work_c(w: float) -> KrausChannel:
    """Isentropic work channel C, same family as meter B."""
    w = check_unit_interval("w", w)
    return KrausChannel(_reset_ops(w, keep=1), "C")


def kraus_work_d(d: float) -> KrausChannel:
    """Isentropic work channel D, same family as meter A."""
    d = check_unit_interval("d", d)
    return KrausChannel(_reset_ops(d, keep=0), "D")


def identity_channel(dim: int = 2) -> KrausChannel:
    return KrausChannel((np.eye(dim, dtype=complex),), "I")


def apply_channel(ch: KrausChannel, rho: DensityOp) -> DensityOp:
    if ch.dim != rho.dim:
        raise ValueError(f"channel {ch.label} acts on dimension {ch.dim}, state has {rho.dim}")
    return validate_density(ch(rho.mat), rho.tol)


def gibbs_state(t: ThermalSpec) -> DensityOp:
    return validate_density(np.diag([t.ground_population, t.excited_population]))


def isentropic_points_a(t: ThermalSpec) -> tuple[float, float]:
    """Meter-A parameters that leave the Gibbs-state entropy unchanged.

    The low point reproduces the Gibbs state, the high point swaps its
    populations.
    """
    return t.excited_population, t.ground_population


class ExchangeKind(str, enum.Enum):
    WORK = "Work"
    HEAT = "Heat"
    NONE = "None"


@dataclass(frozen=True)
class StrokeRecord:
    label: str
    delta_u: float
    delta_s: float
    exchange_kind: ExchangeKind

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "delta_u": self.delta_u,
            "delta_s": self.delta_s,
            "exchange_kind": self.exchange_kind.value,
        }


def classify_exchange(delta_u: float, delta_s: float) -> ExchangeKind:
    if abs(delta_s) > WORK_ENTROPY_TOL:
        return ExchangeKind.HEAT
    if abs(delta_u) > NULL_ENERGY_TOL:
        return ExchangeKind.WORK
    return ExchangeKind.NONE


def stroke_record(h: HamiltonianOp, before: DensityOp, after: DensityOp, label: str) -> StrokeRecord:
    if before.dim != 2 or after.dim != 2:
        raise ValueError("stroke records are defined for qubit states")
    delta_u = float(np.trace(h.mat @ (after.mat - before.mat)).real)
    delta_s = von_neumann_entropy(after) - von_neumann_entropy(before)
    return StrokeRecord(label, delta_u, delta_s, classify_exchange(delta_u, delta_s))


def delta_s_meter_a(t: ThermalSpec, a: float) -> float:
    """Closed-form entropy change of meter A acting on the Gibbs state."""
    return binary_entropy(a) - binary_entropy(t.excited_population)
