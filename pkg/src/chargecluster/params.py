"""Circuit parameters, inter-qubit coupling formulas and calibration.

Unit conventions at every public boundary: energies are frequency
equivalents E/h in GHz, times in ns, angular frequencies in rad/ns, fluxes in
units of the flux quantum, inductances in nH and bias currents as ratios
I_b/I_0.  SI values appear only inside the coupling formulas.

With hbar*g expressed in GHz it equals g / 2pi, so the quarter-coupling
``hbar*g/4`` maps to ``g = 8*pi*q`` for q in GHz.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import CalibrationError, DomainError
from .rootfind import find_root


@dataclass(frozen=True)
class PhysicalConstants:
    flux_quantum: float = 2.067833848e-15  # Wb
    planck_h: float = 6.62607015e-34  # J s

    @property
    def hbar(self) -> float:
        return self.planck_h / (2 * math.pi)


CONSTANTS = PhysicalConstants()

GHZ_TO_J = 1e9 * CONSTANTS.planck_h


def _check_flux(flux: float, name: str = "flux") -> None:
    if not (0.0 <= flux <= 0.5):
        raise DomainError(f"{name} = {flux!r} outside [0, 1/2] flux quanta")


@dataclass(frozen=True)
class ChargeQubitParams:
    """One charge qubit.

    ``E_c`` and ``E_J`` in GHz, ``n_g`` the dimensionless gate charge
    C_i V_i / e, ``flux`` the local loop flux in flux quanta (chain topology).
    """

    E_c: float
    E_J: float
    n_g: float = 1.0
    flux: float = 0.0
    min_charging_ratio: float = 5.0

    def __post_init__(self):
        if not self.E_c > 0:
            raise DomainError(f"charging energy must be positive, got {self.E_c!r}")
        if not self.E_J > 0:
            raise DomainError(f"Josephson energy must be positive, got {self.E_J!r}")
        if self.E_c / self.E_J < self.min_charging_ratio:
            raise DomainError(
                f"E_c/E_J = {self.E_c / self.E_J:.3g} below charging-regime "
                f"threshold {self.min_charging_ratio:g}"
            )
        _check_flux(self.flux)


LARGE_JJ = "large_jj"
COMMON_INDUCTANCE = "common_inductance"


@dataclass(frozen=True)
class CouplerParams:
    """A coupling element.

    ``large_jj``: junction energy ``E_J0`` (GHz) and bias ratio I_b/I_0.
    ``common_inductance``: ``inductance_nH`` and the common flux in flux quanta.
    """

    variant: str
    E_J0: float | None = None
    bias_ratio: float = 0.0
    inductance_nH: float | None = None
    common_flux: float = 0.0

    def __post_init__(self):
        if self.variant == LARGE_JJ:
            if self.E_J0 is None or not self.E_J0 > 0:
                raise DomainError(f"E_J0 must be positive, got {self.E_J0!r}")
            if not abs(self.bias_ratio) < 1:
                raise DomainError(
                    f"|bias ratio| = {abs(self.bias_ratio)!r} >= 1: the junction has switched"
                )
        elif self.variant == COMMON_INDUCTANCE:
            if self.inductance_nH is None or not self.inductance_nH > 0:
                raise DomainError(f"inductance must be positive, got {self.inductance_nH!r}")
            _check_flux(self.common_flux, "common flux")
        else:
            raise DomainError(f"unknown coupler variant {self.variant!r}")

    @classmethod
    def large_jj(cls, E_J0: float, bias_ratio: float = 0.0) -> "CouplerParams":
        return cls(LARGE_JJ, E_J0=E_J0, bias_ratio=bias_ratio)

    @classmethod
    def common_inductance(cls, inductance_nH: float, common_flux: float = 0.0) -> "CouplerParams":
        return cls(COMMON_INDUCTANCE, inductance_nH=inductance_nH, common_flux=common_flux)

    @property
    def junction_inductance(self) -> float:
        """Effective inductance Phi0 / (2 pi I0 cos gamma) of the large junction, in H."""
        if self.variant != LARGE_JJ:
            raise DomainError("junction inductance is defined for large_jj couplers only")
        critical_current = 2 * math.pi * self.E_J0 * GHZ_TO_J / CONSTANTS.flux_quantum
        cos_gamma = math.sqrt(1.0 - self.bias_ratio**2)
        return CONSTANTS.flux_quantum / (2 * math.pi * critical_current * cos_gamma)


def epsilon(q: ChargeQubitParams) -> float:
    """Charging term (GHz) multiplying sigma_z; zero at the degeneracy point."""
    return 0.5 * q.E_c * (q.n_g - 1.0)


def effective_ej(E_J: float, flux: float) -> float:
    """Flux-suppressed Josephson energy E_J cos(pi * flux)."""
    _check_flux(flux)
    if flux == 0.5:
        return 0.0
    return E_J * math.cos(math.pi * flux)


def _inductive_coupling(inductance: float, E_Ji: float, E_Jj: float) -> float:
    """L pi^2 E_Ji E_Jj / Phi0^2 converted back to GHz."""
    e_i, e_j = E_Ji * GHZ_TO_J, E_Jj * GHZ_TO_J
    return inductance * math.pi**2 * e_i * e_j / CONSTANTS.flux_quantum**2 / GHZ_TO_J


def coupling_nn(E_Ji: float, E_Jj: float, flux_i: float, flux_j: float, c: CouplerParams) -> float:
    """Nearest-neighbour coupling through an unbiased large junction (GHz)."""
    if c.variant != LARGE_JJ:
        raise DomainError("coupling_nn needs a large_jj coupler")
    if c.bias_ratio != 0.0:
        raise DomainError("coupling_nn is the unbiased case; use coupling_biased")
    _check_flux(flux_i)
    _check_flux(flux_j)
    return (
        _inductive_coupling(c.junction_inductance, E_Ji, E_Jj)
        * math.sin(math.pi * flux_i)
        * math.sin(math.pi * flux_j)
    )


def coupling_biased(
    E_Ji: float, E_Jj: float, flux_i: float, flux_j: float, c: CouplerParams
) -> float:
    """Coupling through a current-biased large junction (GHz).

    The bias phase gamma = arcsin(I_b/I_0) raises the inductance by 1/cos(gamma)
    and shifts the two loop phases by +gamma/2 and -gamma/2. A negative ratio
    means the current source drives the opposite direction.
    """
    if c.variant != LARGE_JJ:
        raise DomainError("coupling_biased needs a large_jj coupler")
    _check_flux(flux_i)
    _check_flux(flux_j)
    gamma = math.asin(c.bias_ratio)
    return (
        _inductive_coupling(c.junction_inductance, E_Ji, E_Jj)
        * math.sin(math.pi * flux_i + 0.5 * gamma)
        * math.sin(math.pi * flux_j - 0.5 * gamma)
    )


def coupling_lr(E_Ji: float, E_Jj: float, c: CouplerParams) -> float:
    """Coupling of any two qubits sharing the common inductance (GHz)."""
    if c.variant != COMMON_INDUCTANCE:
        raise DomainError("coupling_lr needs a common_inductance coupler")
    return (
        _inductive_coupling(c.inductance_nH * 1e-9, E_Ji, E_Jj)
        * math.sin(math.pi * c.common_flux) ** 2
    )


# --- calibration -----------------------------------------------------------


@dataclass(frozen=True)
class CalibrationResult:
    """Solved settings for one array.

    ``residuals`` are relative violations of each calibration condition,
    recomputed from the returned settings: site conditions first, then
    coupler conditions.
    """

    topology: str
    fluxes: tuple[float, ...]
    bias_ratios: tuple[float, ...]
    achieved_g: float
    residuals: tuple[float, ...]
    couplings: tuple[float, ...] = ()
    effective_ej: tuple[float, ...] = ()
    max_coupling: float | None = None
    notes: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if not self.achieved_g > 0:
            raise DomainError(f"achieved g must be positive, got {self.achieved_g!r}")

    @property
    def t_s(self) -> float:
        return math.pi / self.achieved_g

    @property
    def max_residual(self) -> float:
        return max((abs(r) for r in self.residuals), default=0.0)

    @property
    def hbar_g(self) -> float:
        """hbar*g in GHz."""
        return self.achieved_g / (2 * math.pi)

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("fluxes", "bias_ratios", "residuals", "couplings", "effective_ej", "notes"):
            d[key] = list(d[key])
        d["t_s"] = self.t_s
        d["max_residual"] = self.max_residual
        d["coupling_GHz"] = self.hbar_g / 4
        return d


def g_from_quarter(q: float) -> float:
    """Angular frequency g (rad/ns) for which hbar*g/4 equals q (GHz)."""
    return 8 * math.pi * q


def _chain_site_weights(n: int) -> list[int]:
    # end sites carry one bond's worth of sigma_x field, interior sites two
    return [1] + [2] * (n - 2) + [1]


class _ChainProblem:
    def __init__(self, qubits: Sequence[ChargeQubitParams], couplers: Sequence[CouplerParams]):
        self.n = len(qubits)
        self.E = [q.E_J for q in qubits]
        self.couplers = list(couplers)
        self.weights = _chain_site_weights(self.n)
        self.q_cap = min(e / w for e, w in zip(self.E, self.weights))

    def fluxes(self, q: float) -> list[float]:
        return [
            math.acos(min(1.0, w * q / e)) / math.pi for e, w in zip(self.E, self.weights)
        ]

    def bond(self, k: int, fl: Sequence[float], ratio: float = 0.0) -> float:
        c = replace(self.couplers[k], bias_ratio=ratio)
        return coupling_biased(self.E[k], self.E[k + 1], fl[k], fl[k + 1], c)

    def unbiased_residual(self, k: int, q: float) -> float:
        return self.bond(k, self.fluxes(q)) / q - 1.0

    def balance_point(self, k: int) -> float | None:
        """q at which bond k balances without bias, or None if it never reaches q."""
        lo = self.q_cap * 1e-12
        if self.unbiased_residual(k, lo) <= 0.0:
            return None
        if self.unbiased_residual(k, self.q_cap) >= 0.0:
            return self.q_cap
        return find_root(lambda q: self.unbiased_residual(k, q), lo, self.q_cap)

    def solve_bias(self, k: int, fl: Sequence[float], q: float, max_ratio: float) -> float | None:
        """Bias ratio closing bond k at strength q, smallest |ratio| first."""
        a, b = math.pi * fl[k], math.pi * fl[k + 1]
        g_max = math.asin(max_ratio)
        # both shifted loop phases stay inside (0, pi) so the coupling keeps its sign
        upper = min(g_max, 2 * math.pi - 2 * a, 2 * b) * (1 - 1e-12)
        lower = max(-g_max, -2 * a, 2 * b - 2 * math.pi) * (1 - 1e-12)

        def resid(gamma: float) -> float:
            return self.bond(k, fl, math.sin(gamma)) / q - 1.0

        r0 = resid(0.0)
        if r0 == 0.0:
            return 0.0
        best = None
        for limit in (upper, lower):
            if limit == 0.0:
                continue
            grid = np.linspace(0.0, limit, 257)[1:]
            prev_g, prev_r = 0.0, r0
            for gam in grid:
                r = resid(float(gam))
                if (r > 0) != (prev_r > 0):
                    root = find_root(resid, prev_g, float(gam))
                    if best is None or abs(root) < abs(best):
                        best = root
                    break
                prev_g, prev_r = float(gam), r
        return None if best is None else math.sin(best)


def calibrate_chain(
    qubits: Sequence[ChargeQubitParams],
    couplers: Sequence[CouplerParams],
    g_target: float | None = None,
    *,
    tune_bias: bool = True,
    tol: float = 1e-9,
    strict: bool = True,
    max_bias_ratio: float = 0.999,
) -> CalibrationResult:
    """Solve loop fluxes (and optionally bias currents) for the nearest-neighbour chain.

    Conditions: end sites Ebar = q, interior sites Ebar = 2q, every coupler
    Lambda = q, with q = hbar*g/4.  For a fixed q the site conditions fix each
    flux in closed form and every coupler condition is a scalar equation in
    its own bias ratio.

    Without ``g_target`` the strength is chosen as the largest zero-bias
    balance point over all couplers, so bias currents only have to
    strengthen the weaker couplers. With ``tune_bias=False`` the strength
    instead minimises the worst coupler residual, which generally stays
    nonzero once parameters vary.

    ``strict`` raises CalibrationError when the worst residual exceeds ``tol``;
    otherwise the best-effort result is returned.
    """
    n = len(qubits)
    if n < 2:
        raise DomainError("a chain needs at least two qubits")
    if len(couplers) != n - 1:
        raise DomainError(f"{n} qubits need {n - 1} couplers, got {len(couplers)}")
    if any(c.variant != LARGE_JJ for c in couplers):
        raise DomainError("chain calibration needs large_jj couplers")
    prob = _ChainProblem(qubits, couplers)
    notes: list[str] = []

    if g_target is not None:
        if not g_target > 0:
            raise DomainError(f"g_target must be positive, got {g_target!r}")
        q = g_target / (8 * math.pi)
        if q > prob.q_cap:
            raise CalibrationError(
                f"target hbar*g/4 = {q:.6g} GHz exceeds the largest reachable "
                f"site field {prob.q_cap:.6g} GHz",
                best_residual=q / prob.q_cap - 1.0,
            )
    else:
        points = [prob.balance_point(k) for k in range(n - 1)]
        if any(p is None for p in points):
            dead = [k + 1 for k, p in enumerate(points) if p is None]
            raise CalibrationError(
                f"coupler(s) {dead} cannot reach the site fields at any flux", best_residual=1.0
            )
        if tune_bias:
            q = max(points)
        else:
            lo, hi = min(points), max(points)

            def spread(qq: float) -> float:
                r = [prob.unbiased_residual(k, qq) for k in range(n - 1)]
                return max(r) + min(r)

            q = lo if hi - lo <= 1e-15 * hi else find_root(spread, lo, hi)
            notes.append("g chosen to minimise the worst unbiased coupler residual")

    fl = prob.fluxes(q)
    ratios = [0.0] * (n - 1)
    if tune_bias:
        for k in range(n - 1):
            r = prob.solve_bias(k, fl, q, max_bias_ratio)
            if r is None:
                notes.append(f"coupler {k + 1}: no bias ratio within +/-{max_bias_ratio} closes it")
            else:
                ratios[k] = r

    ebar = [effective_ej(e, f) for e, f in zip(prob.E, fl)]
    lam = [
        coupling_biased(prob.E[k], prob.E[k + 1], fl[k], fl[k + 1], replace(couplers[k], bias_ratio=ratios[k]))
        for k in range(n - 1)
    ]
    residuals = [eb / (w * q) - 1.0 for eb, w in zip(ebar, prob.weights)]
    residuals += [lk / q - 1.0 for lk in lam]
    result = CalibrationResult(
        topology="chain",
        fluxes=tuple(fl),
        bias_ratios=tuple(ratios),
        achieved_g=g_from_quarter(q),
        residuals=tuple(residuals),
        couplings=tuple(lam),
        effective_ej=tuple(ebar),
        notes=tuple(notes),
    )
    if strict and result.max_residual > tol:
        raise CalibrationError(
            f"chain calibration residual {result.max_residual:.3e} exceeds {tol:g}", result
        )
    return result


def calibrate_common(
    qubits: Sequence[ChargeQubitParams],
    c: CouplerParams,
    n: int | None = None,
) -> CalibrationResult:
    """Solve the common flux for N identical qubits on a shared inductance.

    The condition Ebar/(N-1) = Lambda reads cos(x)/(N-1) = kappa sin(x)^2 with
    x = pi*Phi_e and kappa = L pi^2 E_J / Phi0^2; the left side falls and the
    right side rises on (0, pi/2), so the root is unique.
    """
    if c.variant != COMMON_INDUCTANCE:
        raise DomainError("common calibration needs a common_inductance coupler")
    if n is None:
        n = len(qubits)
    if n < 2:
        raise DomainError("a cluster needs at least two qubits; g is undefined for N = 1")
    if not qubits:
        raise DomainError("no qubit parameters given")
    E_J = qubits[0].E_J
    if any(not math.isclose(q.E_J, E_J, rel_tol=1e-12) for q in qubits):
        raise DomainError("the common-inductance condition needs identical qubits")

    kappa = _inductive_coupling(c.inductance_nH * 1e-9, E_J, E_J) / E_J
    assert kappa > 0

    def condition(x: float) -> float:
        return math.cos(x) / (n - 1) - kappa * math.sin(x) ** 2

    x = find_root(condition, 0.0, 0.5 * math.pi)
    flux = x / math.pi
    tuned = replace(c, common_flux=flux)
    lam = coupling_lr(E_J, E_J, tuned)
    ebar = effective_ej(E_J, flux)
    residual = ebar / (n - 1) / lam - 1.0
    return CalibrationResult(
        topology="common",
        fluxes=(flux,),
        bias_ratios=(),
        achieved_g=g_from_quarter(lam),
        residuals=(residual,),
        couplings=(lam,),
        effective_ej=(ebar,),
        max_coupling=coupling_lr(E_J, E_J, replace(c, common_flux=0.5)),
    )
