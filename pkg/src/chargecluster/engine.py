"""State-vector evolution under sigma_x-diagonal Hamiltonians.

Amplitudes are indexed by bitstrings with qubit 1 as the most significant
bit.  In the z basis bit 0/1 is the charge state |0>/|1>.  In the x basis
bit 0 is |-> = (|0> + |1>)/sqrt2 (sigma_x = +1) and bit 1 is
|+> = (|0> - |1>)/sqrt2 (sigma_x = -1), so the change of basis is the
Hadamard transform on every qubit.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import ContractError, DomainError, ResourceError
from .model import IsingXModel, PauliTerm, to_dense

Z_BASIS = "z"
X_BASIS = "x"

NORM_TOL = 1e-12
MAX_DENSE_QUBITS = int(os.environ.get("CHARGECLUSTER_MAX_DENSE", 12))
MAX_DIAGONAL_QUBITS = int(os.environ.get("CHARGECLUSTER_MAX_DIAGONAL", 26))

_INV_SQRT2 = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True, eq=False)
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray
    basis: str = Z_BASIS

    def __post_init__(self):
        if self.n_qubits < 1:
            raise DomainError("a state needs at least one qubit")
        if self.basis not in (Z_BASIS, X_BASIS):
            raise DomainError(f"unknown basis flag {self.basis!r}")
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != 1 << self.n_qubits:
            raise DomainError(f"{amps.size} amplitudes for {self.n_qubits} qubits")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise DomainError(f"state not normalised: sum |a|^2 = {norm!r}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalised(cls, amplitudes, basis: str = Z_BASIS) -> "StateVector":
        a = np.asarray(amplitudes, dtype=complex).reshape(-1)
        n = a.size.bit_length() - 1
        return cls(n, a / np.linalg.norm(a), basis)

    def norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def to_dict(self, cutoff: float = 1e-14) -> dict:
        a = self.amplitudes
        keep = np.nonzero(np.abs(a) > cutoff)[0]
        return {
            "n_qubits": self.n_qubits,
            "basis": self.basis,
            "amplitudes": [[int(k), float(a[k].real), float(a[k].imag)] for k in keep],
        }

    def to_json(self, cutoff: float = 1e-14) -> str:
        return json.dumps(self.to_dict(cutoff))

    @classmethod
    def from_dict(cls, d: dict) -> "StateVector":
        n = int(d["n_qubits"])
        a = np.zeros(1 << n, dtype=complex)
        for k, re, im in d["amplitudes"]:
            a[int(k)] = complex(re, im)
        return cls(n, a / np.linalg.norm(a), d.get("basis", Z_BASIS))

    @classmethod
    def from_json(cls, text: str) -> "StateVector":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True, eq=False)
class MeasurementRecord:
    qubit: int
    outcome: int
    probability: float
    post_state: StateVector


def initial_all_zero(n: int) -> StateVector:
    a = np.zeros(1 << n, dtype=complex)
    a[0] = 1.0
    return StateVector(n, a)


def random_state(n: int, rng: np.random.Generator) -> StateVector:
    a = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    return StateVector(n, a / np.linalg.norm(a))


def hadamard_all(a: np.ndarray, n: int) -> np.ndarray:
    """Hadamard transform on every qubit, one butterfly pass per qubit."""
    out = np.array(a, dtype=complex)
    for k in range(n):
        v = out.reshape(1 << k, 2, -1)
        lo, hi = v[:, 0, :], v[:, 1, :]
        out = np.stack((lo + hi, lo - hi), axis=1).reshape(-1)
        out *= _INV_SQRT2
    return out


def to_x_basis(s: StateVector) -> StateVector:
    if s.basis != Z_BASIS:
        raise ContractError("to_x_basis expects a z-basis state")
    return StateVector(s.n_qubits, hadamard_all(s.amplitudes, s.n_qubits), X_BASIS)


def from_x_basis(s: StateVector) -> StateVector:
    if s.basis != X_BASIS:
        raise ContractError("from_x_basis expects an x-basis state")
    return StateVector(s.n_qubits, hadamard_all(s.amplitudes, s.n_qubits), Z_BASIS)


def x_term_energies(terms: Sequence[PauliTerm], n: int) -> np.ndarray:
    """Energies (GHz) of all x-basis states for a sigma_x-only term list."""
    bad = [t.label for t in terms if not t.is_x_only]
    if bad:
        raise ContractError(f"terms not diagonal in the x basis: {bad}")
    if any(t.max_index() > n for t in terms):
        raise DomainError(f"term acts outside {n} qubits")
    idx = np.arange(1 << n, dtype=np.int64)
    signs: dict[int, np.ndarray] = {}
    energies = np.zeros(1 << n)
    for t in terms:
        prod = np.ones(1 << n)
        for i, _ in t.factors:
            if i not in signs:
                signs[i] = 1.0 - 2.0 * ((idx >> (n - i)) & 1)
            prod *= signs[i]
        energies += t.coefficient * prod
    return energies


def _check_guard(n: int, limit: int, what: str) -> None:
    if n > limit:
        raise ResourceError(f"{what} evolution limited to {limit} qubits, got {n}")


def evolve_diagonal(
    s: StateVector,
    m: IsingXModel | Sequence[PauliTerm],
    t: float,
    *,
    max_qubits: int | None = None,
) -> StateVector:
    """exp(-iHt/hbar)|s> for H diagonal in the x basis; t in ns.

    ``m`` is either an :class:`IsingXModel` or a term list whose factors are
    all X.  Cost is O(N 2^N): two Hadamard passes and one phase multiply.
    """
    if s.basis != Z_BASIS:
        raise ContractError("evolve_diagonal expects a z-basis state")
    n = s.n_qubits
    _check_guard(n, MAX_DIAGONAL_QUBITS if max_qubits is None else max_qubits, "diagonal")
    if isinstance(m, IsingXModel):
        if m.n_qubits != n:
            raise DomainError(f"model has {m.n_qubits} qubits, state has {n}")
        phase = m.x_energies() * (m.g * t)
    else:
        phase = x_term_energies(list(m), n) * (2 * math.pi * t)
    ax = hadamard_all(s.amplitudes, n)
    ax *= np.exp(-1j * phase)
    return StateVector(n, hadamard_all(ax, n))


def evolve_dense(
    s: StateVector,
    terms: Sequence[PauliTerm],
    t: float,
    *,
    max_qubits: int | None = None,
) -> StateVector:
    """Brute-force exp(-iHt/hbar)|s> through a full Hermitian eigendecomposition."""
    if s.basis != Z_BASIS:
        raise ContractError("evolve_dense expects a z-basis state")
    n = s.n_qubits
    _check_guard(n, MAX_DENSE_QUBITS if max_qubits is None else max_qubits, "dense")
    h = to_dense(list(terms), n)
    vals, vecs = scipy.linalg.eigh(h)
    coeffs = vecs.conj().T @ s.amplitudes
    out = vecs @ (np.exp(-2j * math.pi * vals * t) * coeffs)
    return StateVector(n, out)


def evolve_dense_model(s: StateVector, m: IsingXModel, t: float, **kw) -> StateVector:
    return evolve_dense(s, m.terms(), t, **kw)


def measure_z(
    s: StateVector,
    qubit: int,
    rng_seed: int | None = None,
    *,
    rng: np.random.Generator | None = None,
) -> MeasurementRecord:
    """Projective measurement of ``qubit`` (1-based) on the charge states |0>, |1>."""
    if s.basis != Z_BASIS:
        raise ContractError("measure_z expects a z-basis state")
    n = s.n_qubits
    if not 1 <= qubit <= n:
        raise DomainError(f"qubit {qubit} outside 1..{n}")
    v = s.amplitudes.reshape(1 << (qubit - 1), 2, -1)
    p1 = float(np.vdot(v[:, 1, :], v[:, 1, :]).real)
    p0 = float(np.vdot(v[:, 0, :], v[:, 0, :]).real)
    if p1 <= 1e-15:
        outcome = 0
    elif p0 <= 1e-15:
        outcome = 1
    else:
        if rng is None:
            rng = np.random.default_rng(rng_seed)
        outcome = 0 if rng.random() < p0 / (p0 + p1) else 1
    prob = p0 if outcome == 0 else p1
    post = np.zeros_like(v)
    post[:, outcome, :] = v[:, outcome, :] / math.sqrt(prob)
    return MeasurementRecord(qubit, outcome, prob, StateVector(n, post.reshape(-1)))
