"""Ising-like Hamiltonians built from sigma_x projectors.

All Hamiltonians here are sums of products of ``(1 +/- sigma_x)/2``
projectors, so they are diagonal in the product basis of sigma_x
eigenstates.  Qubits are numbered from 1.

Coefficients of :class:`PauliTerm` are energies in GHz (E/h).  ``g`` is an
angular frequency in rad/ns, so hbar*g in GHz is ``g / (2*pi)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property, reduce
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import DomainError
from .params import (
    COMMON_INDUCTANCE,
    CalibrationResult,
    ChargeQubitParams,
    CouplerParams,
    coupling_biased,
    coupling_lr,
    effective_ej,
    epsilon,
)

_PAULI_LETTERS = frozenset("XYZ")

_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class PauliTerm:
    """``coefficient * prod_i P_i`` with P_i in {X, Y, Z}; no factors means identity."""

    coefficient: float
    factors: tuple[tuple[int, str], ...] = ()

    def __post_init__(self):
        raw = self.factors.items() if isinstance(self.factors, Mapping) else self.factors
        norm = tuple(sorted((int(i), str(p).upper()) for i, p in raw))
        idx = [i for i, _ in norm]
        if len(set(idx)) != len(idx):
            raise DomainError(f"repeated qubit index in {norm}")
        for i, p in norm:
            if i < 1:
                raise DomainError(f"qubit indices start at 1, got {i}")
            if p not in _PAULI_LETTERS:
                raise DomainError(f"unknown Pauli factor {p!r}")
        if not math.isfinite(self.coefficient):
            raise DomainError(f"non-finite coefficient {self.coefficient!r}")
        object.__setattr__(self, "factors", norm)
        object.__setattr__(self, "coefficient", float(self.coefficient))

    @property
    def is_identity(self) -> bool:
        return not self.factors

    @property
    def is_x_only(self) -> bool:
        return all(p == "X" for _, p in self.factors)

    @property
    def label(self) -> str:
        return " ".join(f"{p}{i}" for i, p in self.factors) or "I"

    def max_index(self) -> int:
        return max((i for i, _ in self.factors), default=0)

    def to_dict(self) -> dict:
        return {"coefficient": self.coefficient, "factors": {str(i): p for i, p in self.factors}}

    @classmethod
    def from_dict(cls, d: Mapping) -> "PauliTerm":
        return cls(float(d["coefficient"]), {int(k): v for k, v in d.get("factors", {}).items()})


def combine_terms(terms: Iterable[PauliTerm], *, drop_zero: bool = True) -> list[PauliTerm]:
    """Merge like terms; identity first, then by weight and index."""
    acc: dict[tuple, float] = {}
    for t in terms:
        acc[t.factors] = acc.get(t.factors, 0.0) + t.coefficient
    out = [PauliTerm(c, f) for f, c in acc.items() if not (drop_zero and c == 0.0 and f)]
    return sorted(out, key=lambda t: (len(t.factors), t.factors))


def terms_to_json(terms: Sequence[PauliTerm]) -> str:
    return json.dumps([t.to_dict() for t in terms], indent=2)


def terms_from_json(text: str) -> list[PauliTerm]:
    return [PauliTerm.from_dict(d) for d in json.loads(text)]


def to_dense(terms: Sequence[PauliTerm], n: int) -> np.ndarray:
    """Dense 2^n x 2^n matrix (GHz) with qubit 1 as the leftmost tensor factor."""
    if any(t.max_index() > n for t in terms):
        raise DomainError(f"term acts outside {n} qubits")
    dim = 2**n
    h = np.zeros((dim, dim), dtype=complex)
    for t in terms:
        letters = dict(t.factors)
        ops = [_SINGLE[letters.get(i, "I")] for i in range(1, n + 1)]
        h += t.coefficient * reduce(np.kron, ops)
    return h


Kernel = Callable[[int, int], float]


def nearest_neighbour(i: int, j: int) -> float:
    return 1.0 if j == i + 1 else 0.0


def all_pairs(i: int, j: int) -> float:
    return 1.0 if j > i else 0.0


@dataclass(frozen=True)
class IsingXModel:
    """hbar*g * sum_{i,j} kernel(i, j) * P_i P_j with P = (1 - x)/2 ("minus") or (1 + x)/2 ("plus").

    The double sum runs over ordered pairs 1 <= i, j <= N including i == j.
    A negative kernel gives an overall minus sign.  With
    ``includes_constant=False`` the identity part is removed from energies
    and from the term expansion alike.
    """

    n_qubits: int
    g: float
    kernel: Kernel = field(compare=False)
    sign: str = "minus"
    includes_constant: bool = True

    def __post_init__(self):
        if self.n_qubits < 1:
            raise DomainError("a model needs at least one qubit")
        if self.sign not in ("plus", "minus"):
            raise DomainError(f"sign must be 'plus' or 'minus', got {self.sign!r}")

    is_diagonal = True

    @cached_property
    def weights(self) -> np.ndarray:
        n = self.n_qubits
        w = np.array(
            [[float(self.kernel(i, j)) for j in range(1, n + 1)] for i in range(1, n + 1)]
        )
        return w

    @property
    def hbar_g(self) -> float:
        """hbar*g in GHz."""
        return self.g / (2 * math.pi)

    @cached_property
    def constant(self) -> float:
        """Identity coefficient of the expansion, in units of hbar*g."""
        w = self.weights
        return 0.25 * (w.sum() - np.trace(w)) + 0.5 * np.trace(w)

    def projector_values(self, config: Sequence[int]) -> np.ndarray:
        x = np.asarray(config, dtype=float)
        return 0.5 * (1 - x) if self.sign == "minus" else 0.5 * (1 + x)

    def x_energies(self, chunk: int = 1 << 16) -> np.ndarray:
        """Energies of all 2^N x-basis states in units of hbar*g.

        Entry k belongs to the x configuration whose bits (qubit 1 most
        significant) mark |+> (sigma_x = -1) with 1 and |-> (sigma_x = +1) with 0.
        """
        n = self.n_qubits
        w = self.weights
        dim = 1 << n
        out = np.empty(dim)
        shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
        for start in range(0, dim, chunk):
            idx = np.arange(start, min(dim, start + chunk), dtype=np.int64)
            bits = ((idx[:, None] >> shifts) & 1).astype(float)
            p = bits if self.sign == "minus" else 1.0 - bits
            out[start : start + len(idx)] = np.einsum("ki,ki->k", p @ w, p)
        if not self.includes_constant:
            out -= self.constant
        return out

    def terms(self) -> list[PauliTerm]:
        """Pauli expansion with coefficients in GHz."""
        s = -1.0 if self.sign == "minus" else 1.0
        scale = self.hbar_g
        raw: list[PauliTerm] = []
        w = self.weights
        n = self.n_qubits
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                wij = w[i - 1, j - 1]
                if wij == 0.0:
                    continue
                c = scale * wij
                if i == j:
                    raw += [PauliTerm(0.5 * c), PauliTerm(0.5 * s * c, {i: "X"})]
                else:
                    raw += [
                        PauliTerm(0.25 * c),
                        PauliTerm(0.25 * s * c, {i: "X"}),
                        PauliTerm(0.25 * s * c, {j: "X"}),
                        PauliTerm(0.25 * c, {i: "X", j: "X"}),
                    ]
        out = combine_terms(raw)
        if not self.includes_constant:
            return [t for t in out if not t.is_identity]
        if not any(t.is_identity for t in out):
            out.insert(0, PauliTerm(0.0))
        return out


def build_general(n: int, g: float, kernel: Kernel, sign: str = "minus") -> IsingXModel:
    return IsingXModel(n, g, kernel, sign)


def build_chain(n: int, g: float) -> IsingXModel:
    """Nearest-neighbour chain hbar*g sum_i (1 - x_i)/2 (1 - x_{i+1})/2."""
    if n < 2:
        raise DomainError("the chain model needs at least two qubits")
    return IsingXModel(n, g, nearest_neighbour, "minus")


def _minus_all_pairs(i: int, j: int) -> float:
    return -all_pairs(i, j)


def build_longrange(n: int, g: float) -> IsingXModel:
    """All-pairs model -hbar*g sum_{j>i} (1 + x_i)/2 (1 + x_j)/2."""
    if n < 2:
        raise DomainError("the long-range model needs at least two qubits")
    return IsingXModel(n, g, _minus_all_pairs, "plus")


def x_basis_energy(m: IsingXModel, config: Sequence[int]) -> float:
    """Exact eigenvalue (GHz) of ``m`` on the product x state ``config`` of +/-1 entries."""
    if len(config) != m.n_qubits:
        raise DomainError(f"configuration of length {len(config)} for {m.n_qubits} qubits")
    if any(x not in (1, -1) for x in config):
        raise DomainError("configuration entries must be +1 or -1")
    p = m.projector_values(config)
    e = float(p @ m.weights @ p)
    if not m.includes_constant:
        e -= m.constant
    return m.hbar_g * e


def build_physical_chain(
    qubits: Sequence[ChargeQubitParams],
    couplers: Sequence[CouplerParams],
    cal: CalibrationResult | None = None,
) -> list[PauliTerm]:
    """sum_i [eps_i Z_i - Ebar_i X_i] + sum_i Lambda_{i,i+1} X_i X_{i+1}.

    Fluxes and bias ratios come from ``cal`` when given, otherwise from the
    parameter objects themselves.  Zero coefficients are dropped.
    """
    n = len(qubits)
    if len(couplers) != n - 1:
        raise DomainError(f"{n} qubits need {n - 1} couplers")
    fluxes = list(cal.fluxes) if cal is not None else [q.flux for q in qubits]
    ratios = list(cal.bias_ratios) if cal is not None else [c.bias_ratio for c in couplers]
    raw = []
    for i, q in enumerate(qubits, start=1):
        raw.append(PauliTerm(epsilon(q), {i: "Z"}))
        raw.append(PauliTerm(-effective_ej(q.E_J, fluxes[i - 1]), {i: "X"}))
    for k, c in enumerate(couplers):
        tuned = CouplerParams.large_jj(c.E_J0, ratios[k])
        lam = coupling_biased(qubits[k].E_J, qubits[k + 1].E_J, fluxes[k], fluxes[k + 1], tuned)
        raw.append(PauliTerm(lam, {k + 1: "X", k + 2: "X"}))
    return combine_terms(raw)


def build_physical_common(
    qubits: Sequence[ChargeQubitParams],
    c: CouplerParams,
    cal: CalibrationResult | None = None,
) -> list[PauliTerm]:
    """sum_i [eps_i Z_i - Ebar_i X_i] - sum_{i<j} Lambda_ij X_i X_j on a shared inductance."""
    if c.variant != COMMON_INDUCTANCE:
        raise DomainError("needs a common_inductance coupler")
    flux = cal.fluxes[0] if cal is not None else c.common_flux
    tuned = CouplerParams.common_inductance(c.inductance_nH, flux)
    raw = []
    n = len(qubits)
    for i, q in enumerate(qubits, start=1):
        raw.append(PauliTerm(epsilon(q), {i: "Z"}))
        raw.append(PauliTerm(-effective_ej(q.E_J, flux), {i: "X"}))
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            lam = coupling_lr(qubits[i - 1].E_J, qubits[j - 1].E_J, tuned)
            raw.append(PauliTerm(-lam, {i: "X", j: "X"}))
    return combine_terms(raw)
