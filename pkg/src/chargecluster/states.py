"""Closed-form cluster states and state diagnostics.

The target states are written as tensor products over sites in which the
|+>_i branch (chain) or the |->_i branch (long-range) carries sigma_x
operators acting on later sites.  Since sigma_x is diagonal on |+/->, each
x-basis configuration gets the product of per-site scalar factors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .engine import X_BASIS, Z_BASIS, StateVector, from_x_basis
from .errors import ContractError, DomainError
from .model import PauliTerm

SiteFactor = Callable[[int, np.ndarray, np.ndarray], np.ndarray]


def _x_configurations(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Bits (1 = |+>) and sigma_x eigenvalues for every x configuration, shape (2^n, n)."""
    idx = np.arange(1 << n, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(n - 1, -1, -1)) & 1
    return bits, 1 - 2 * bits


@dataclass(frozen=True)
class XConfigAmplitudeRule:
    """Amplitude of an x configuration as 2^(-N/2) times a product of site factors.

    ``site_factor(i, bits, x)`` returns, for site i (1-based), the factor of
    every configuration given all bits and sigma_x eigenvalues.
    """

    site_factor: SiteFactor

    def x_amplitudes(self, n: int) -> np.ndarray:
        bits, x = _x_configurations(n)
        amp = np.full(1 << n, 2.0 ** (-n / 2), dtype=complex)
        for i in range(1, n + 1):
            amp *= self.site_factor(i, bits, x)
        return amp

    def state(self, n: int) -> StateVector:
        return from_x_basis(StateVector(n, self.x_amplitudes(n), X_BASIS))


def _chain_factor(i: int, bits: np.ndarray, x: np.ndarray) -> np.ndarray:
    n = bits.shape[1]
    nxt = x[:, i] if i < n else np.ones(len(x), dtype=x.dtype)
    return np.where(bits[:, i - 1] == 0, 1, nxt)


def _longrange_factor(i: int, bits: np.ndarray, x: np.ndarray) -> np.ndarray:
    n = bits.shape[1]
    later = np.prod(x[:, i:], axis=1) if i < n else np.ones(len(x), dtype=x.dtype)
    return np.where(bits[:, i - 1] == 1, 1, (-1) ** (n - i) * later)


CHAIN_RULE = XConfigAmplitudeRule(_chain_factor)
LONGRANGE_RULE = XConfigAmplitudeRule(_longrange_factor)


def closed_form_chain(n: int) -> StateVector:
    """2^(-N/2) prod_i (|->_i + |+>_i sigma_x^(i+1)), with sigma_x^(N+1) = 1."""
    if n < 2:
        raise DomainError("cluster states need at least two qubits")
    return CHAIN_RULE.state(n)


def closed_form_longrange(n: int) -> StateVector:
    """2^(-N/2) prod_i (|->_i (-1)^(N-i) prod_{j>i} sigma_x^(j) + |+>_i)."""
    if n < 2:
        raise DomainError("cluster states need at least two qubits")
    return LONGRANGE_RULE.state(n)


def fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>|^2, insensitive to global phase."""
    if a.n_qubits != b.n_qubits:
        raise DomainError(f"fidelity between {a.n_qubits}- and {b.n_qubits}-qubit states")
    if a.basis != b.basis:
        raise ContractError("fidelity needs both states in the same basis")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


def apply_pauli(s: StateVector, p: PauliTerm) -> np.ndarray:
    """Amplitudes of P|s> for the Pauli string of ``p`` (coefficient ignored)."""
    if s.basis != Z_BASIS:
        raise ContractError("Pauli strings act on z-basis amplitudes")
    n = s.n_qubits
    if p.max_index() > n:
        raise DomainError(f"Pauli string acts outside {n} qubits")
    idx = np.arange(1 << n, dtype=np.int64)
    flip = 0
    phase = np.ones(1 << n, dtype=complex)
    for i, letter in p.factors:
        shift = n - i
        bit = (idx >> shift) & 1
        if letter in "XY":
            flip |= 1 << shift
        if letter == "Z":
            phase *= 1 - 2 * bit
        elif letter == "Y":
            phase *= 1j * (1 - 2 * bit)
    out = np.empty_like(s.amplitudes)
    out[idx ^ flip] = phase * s.amplitudes
    return out


def pauli_expectation(s: StateVector, p: PauliTerm) -> float:
    """coefficient * <s|P|s>; real for any Pauli string."""
    val = np.vdot(s.amplitudes, apply_pauli(s, p))
    if abs(val.imag) > 1e-12:
        raise DomainError(f"non-Hermitian expectation value {val!r}")
    return p.coefficient * float(val.real)


def _cut_position(n: int, block: int | Iterable[int]) -> int:
    if isinstance(block, (int, np.integer)):
        k = int(block)
    else:
        sites = sorted(set(int(i) for i in block))
        k = len(sites)
        if sites == list(range(1, k + 1)):
            pass
        elif sites == list(range(n - k + 1, n + 1)):
            k = n - k  # a suffix has the same spectrum as its complementary prefix
        else:
            raise DomainError(f"block {sites} is neither a prefix nor a suffix")
    if not 1 <= k < n:
        raise DomainError(f"cut after qubit {k} is not internal to {n} qubits")
    return k


def schmidt_coefficients(s: StateVector, block: int | Iterable[int]) -> np.ndarray:
    k = _cut_position(s.n_qubits, block)
    mat = s.amplitudes.reshape(1 << k, -1)
    return np.linalg.svd(mat, compute_uv=False)


def entanglement_entropy(
    s: StateVector, left_block: int | Iterable[int], *, base: float = 2.0
) -> float:
    """Von Neumann entropy of the reduced state of a contiguous end block.

    ``left_block`` is either k (meaning qubits 1..k) or an explicit prefix or
    suffix of qubit indices.  Result in bits unless ``base`` is changed.
    """
    p = schmidt_coefficients(s, left_block) ** 2
    p = p[p > 1e-14]
    p = p / p.sum()
    return float(-(p * np.log(p)).sum() / math.log(base))
