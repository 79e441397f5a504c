"""Measurement-powered qubit thermal machines with definite and indefinite causal order.

The working medium is a qubit with ``H = -eps * sigma_z`` coupled to a cold
bath. Generalized measurements act as the hot source. With a quantum switch
the order of the two measurement channels is controlled by a qubit, and
post-selecting that controller turns the cycle into an engine, an
accelerator or a refrigerator depending on the regime function ``Omega``.
"""

from .channels import (
    ExchangeKind,
    HamiltonianOp,
    KrausChannel,
    ParameterError,
    StrokeRecord,
    ThermalSpec,
    apply_channel,
    gibbs_state,
    hamiltonian,
    kraus_meter_a,
    kraus_meter_b,
    kraus_work_c,
    kraus_work_d,
)
from .cycle import (
    ClosedFormMismatch,
    CycleReport,
    Mode,
    cop_accelerator_definite,
    cop_refrigerator_definite,
    efficiency_definite,
    run_cycle_definite,
)
from .linalg import DensityOp, StateError, validate_density
from .switch import (
    AdvantageRecord,
    Branch,
    ControllerState,
    coherent_advantage,
    omega_coherent,
    omega_incoherent,
    run_ico_cycle_engine,
    run_ico_cycle_refrigerator,
    run_incoherent_cycle,
    switch_kraus,
)
from .verify import VerifyReport, verify_equations, verify_no_work_from_equilibrium

__version__ = "0.1.0"

__all__ = [
    "AdvantageRecord",
    "Branch",
    "ClosedFormMismatch",
    "ControllerState",
    "CycleReport",
    "DensityOp",
    "ExchangeKind",
    "HamiltonianOp",
    "KrausChannel",
    "Mode",
    "ParameterError",
    "StateError",
    "StrokeRecord",
    "ThermalSpec",
    "VerifyReport",
    "apply_channel",
    "coherent_advantage",
    "cop_accelerator_definite",
    "cop_refrigerator_definite",
    "efficiency_definite",
    "gibbs_state",
    "hamiltonian",
    "kraus_meter_a",
    "kraus_meter_b",
    "kraus_work_c",
    "kraus_work_d",
    "omega_coherent",
    "omega_incoherent",
    "run_cycle_definite",
    "run_ico_cycle_engine",
    "run_ico_cycle_refrigerator",
    "run_incoherent_cycle",
    "switch_kraus",
    "validate_density",
    "verify_equations",
    "verify_no_work_from_equilibrium",
]
