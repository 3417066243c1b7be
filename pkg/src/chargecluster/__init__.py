"""Cluster-state generation in inductively coupled charge-qubit arrays.

Calibration of flux and bias settings, exact state-vector evolution under
sigma_x-diagonal Hamiltonians, closed-form target states, decoherence
estimates from noise spectra and seeded fabrication-spread sweeps.
"""

from .engine import StateVector, evolve_dense, evolve_diagonal, initial_all_zero
from .errors import CalibrationError, ContractError, DomainError, NumericalError, ResourceError
from .model import IsingXModel, PauliTerm, build_chain, build_longrange
from .params import ChargeQubitParams, CouplerParams, calibrate_chain, calibrate_common
from .states import closed_form_chain, closed_form_longrange, fidelity

__all__ = [
    "CalibrationError",
    "ChargeQubitParams",
    "ContractError",
    "CouplerParams",
    "DomainError",
    "IsingXModel",
    "NumericalError",
    "PauliTerm",
    "ResourceError",
    "StateVector",
    "build_chain",
    "build_longrange",
    "calibrate_chain",
    "calibrate_common",
    "closed_form_chain",
    "closed_form_longrange",
    "evolve_dense",
    "evolve_diagonal",
    "fidelity",
    "initial_all_zero",
]
