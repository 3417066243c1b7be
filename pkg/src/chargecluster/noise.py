"""Decoherence rates of charge qubits from a charge-noise power spectrum.

Rates are in 1/ns, angular frequencies in rad/ns, energies in GHz.  A
spectrum S(w) has units of 1/ns so that the dephasing factor is
dimensionless.  Infinite times are represented by ``math.inf`` internally
and serialised as ``null`` with an ``infinite`` flag.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np
from scipy import integrate
from scipy.interpolate import PchipInterpolator

from .errors import DomainError, NumericalError
from .rootfind import expand_bracket, find_root

INFINITE_TIME = math.inf

WHITE = "white"
OHMIC = "ohmic"
ONE_OVER_F = "one_over_f"


@dataclass(frozen=True)
class NoiseSpectrum:
    """White ``S0``, ohmic ``alpha*w*exp(-w/cutoff)``, or ``A/w`` on [omega_ir, omega_uv]."""

    variant: str
    S0: float = 0.0
    alpha: float = 0.0
    cutoff: float = 0.0
    A: float = 0.0
    omega_ir: float = 0.0
    omega_uv: float = 0.0

    def __post_init__(self):
        if self.variant == WHITE:
            if self.S0 < 0:
                raise DomainError("white-noise level must be non-negative")
        elif self.variant == OHMIC:
            if self.alpha < 0 or not self.cutoff > 0:
                raise DomainError("ohmic spectrum needs alpha >= 0 and a positive cutoff")
        elif self.variant == ONE_OVER_F:
            if self.A < 0 or not (0 < self.omega_ir < self.omega_uv):
                raise DomainError("1/f spectrum needs A >= 0 and 0 < omega_ir < omega_uv")
        else:
            raise DomainError(f"unknown spectrum variant {self.variant!r}")

    @classmethod
    def white(cls, S0: float) -> "NoiseSpectrum":
        return cls(WHITE, S0=S0)

    @classmethod
    def ohmic(cls, alpha: float, cutoff: float) -> "NoiseSpectrum":
        return cls(OHMIC, alpha=alpha, cutoff=cutoff)

    @classmethod
    def one_over_f(cls, A: float, omega_ir: float, omega_uv: float) -> "NoiseSpectrum":
        return cls(ONE_OVER_F, A=A, omega_ir=omega_ir, omega_uv=omega_uv)

    @property
    def support(self) -> tuple[float, float]:
        if self.variant == ONE_OVER_F:
            return self.omega_ir, self.omega_uv
        return 0.0, math.inf

    @property
    def is_zero(self) -> bool:
        return {WHITE: self.S0, OHMIC: self.alpha, ONE_OVER_F: self.A}[self.variant] == 0.0

    def __call__(self, w):
        w = np.asarray(w, dtype=float)
        if self.variant == WHITE:
            out = np.where(w >= 0, self.S0, 0.0)
        elif self.variant == OHMIC:
            out = np.where(w >= 0, self.alpha * w * np.exp(-w / self.cutoff), 0.0)
        else:
            inside = (w >= self.omega_ir) & (w <= self.omega_uv)
            out = np.where(inside, self.A / np.where(inside, w, 1.0), 0.0)
        return out if out.ndim else float(out)

    def to_dict(self) -> dict:
        keys = {WHITE: ("S0",), OHMIC: ("alpha", "cutoff"), ONE_OVER_F: ("A", "omega_ir", "omega_uv")}
        return {"variant": self.variant, **{k: getattr(self, k) for k in keys[self.variant]}}

    @classmethod
    def from_dict(cls, d: dict) -> "NoiseSpectrum":
        return cls(**d)


@dataclass(frozen=True)
class QubitNoiseProfile:
    """Operating point (epsilon, Ebar in GHz) of one qubit and its charge noise."""

    epsilon: float
    ebar: float
    spectrum: NoiseSpectrum

    @property
    def A(self) -> float:
        return self.ebar**2 / (self.epsilon**2 + self.ebar**2)

    @property
    def B(self) -> float:
        return self.epsilon**2 / (self.epsilon**2 + self.ebar**2)

    @property
    def omega(self) -> float:
        """Level splitting 2*sqrt(eps^2 + Ebar^2)/hbar in rad/ns."""
        return 4 * math.pi * math.hypot(self.epsilon, self.ebar)


def _check_profile(p: QubitNoiseProfile) -> None:
    if p.epsilon == 0 and p.ebar == 0:
        raise DomainError("epsilon and Ebar both vanish; A and B are undefined")


def relaxation_rate(p: QubitNoiseProfile) -> float:
    """Golden-rule rate A * S(Omega) / 2."""
    _check_profile(p)
    return 0.5 * p.A * float(p.spectrum(p.omega))


_QUAD_RTOL = 1e-10
_LOW_SPAN = 16 * math.pi


def _quad(fn, a, b, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(fn, a, b, epsrel=_QUAD_RTOL, epsabs=0.0, limit=500, **kw)
        except integrate.IntegrationWarning as exc:
            raise NumericalError(f"quadrature on [{a}, {b}] failed: {exc}") from exc
    return val, err


def phase_integral(spectrum: NoiseSpectrum, tau: float) -> float:
    """int dw S(w) sin^2(w tau/2) / (2 pi (w/2)^2), i.e. the dephasing factor at B = 1.

    With u = w*tau the integral becomes (2 tau/pi) int S(u/tau) sin^2(u/2)/u^2 du.
    The first few oscillations are integrated with the sinc form, which is
    regular at u = 0; beyond that sin^2 = (1 - cos u)/2 splits into a smooth
    part and a Fourier-weighted part.
    """
    if tau < 0:
        raise DomainError("tau must be non-negative")
    if tau == 0 or spectrum.is_zero:
        return 0.0
    lo, hi = (x * tau for x in spectrum.support)

    def s(u):
        return spectrum(u / tau)

    total = 0.0
    mid = min(hi, max(lo, _LOW_SPAN))
    if mid > lo:
        # sin^2(u/2)/u^2 = sinc^2(u/2pi)/4 with numpy's normalised sinc
        val, _ = _quad(lambda u: s(u) * 0.25 * np.sinc(u / (2 * math.pi)) ** 2, lo, mid)
        total += val
    if hi > mid:
        smooth, _ = _quad(lambda u: s(u) / u**2, mid, hi)
        # the tail lies in [0, smooth]; skip it when it cannot move the sum
        if smooth <= 1e-16 * total:
            return 2 * tau / math.pi * total
        if math.isinf(hi):
            # QAWF only honours an absolute tolerance
            with warnings.catch_warnings():
                warnings.simplefilter("error", integrate.IntegrationWarning)
                try:
                    osc, _ = integrate.quad(
                        lambda u: s(u) / u**2, mid, hi, weight="cos", wvar=1.0,
                        epsabs=1e-13 * max(smooth, 1e-300), limlst=200,
                    )
                except integrate.IntegrationWarning as exc:
                    raise NumericalError(f"Fourier quadrature failed: {exc}") from exc
        else:
            osc, _ = _quad(lambda u: s(u) / u**2, mid, hi, weight="cos", wvar=1.0)
        total += 0.5 * (smooth - osc)
    return 2 * tau / math.pi * total


def dephasing_factor(p: QubitNoiseProfile, tau: float) -> float:
    """Gaussian-noise dephasing factor eta(tau) = B * phase_integral(S, tau)."""
    _check_profile(p)
    if p.B == 0:
        return 0.0
    return p.B * phase_integral(p.spectrum, tau)


def dephasing_time(p: QubitNoiseProfile, *, tau_max: float = 1e15, rtol: float = 1e-12) -> float:
    """tau at which eta(tau) first reaches 1, bracketed by doubling from 1 ns."""
    _check_profile(p)
    if p.B == 0 or p.spectrum.is_zero:
        return INFINITE_TIME

    def f(tau: float) -> float:
        return dephasing_factor(p, tau) - 1.0

    a, b = expand_bracket(f, 1.0, limit=tau_max)
    return find_root(f, a, b, rtol=rtol)


def dephasing_rate(p: QubitNoiseProfile) -> float:
    t = dephasing_time(p)
    return 0.0 if math.isinf(t) else 1.0 / t


def decoherence_rate(p: QubitNoiseProfile) -> float:
    """Gamma_2 = Gamma_1/2 + Gamma_phi."""
    return 0.5 * relaxation_rate(p) + dephasing_rate(p)


def cluster_T2(rates: Sequence[float]) -> float:
    """1 / sum_i Gamma_2^(i) for qubits decohering independently."""
    if not len(rates):
        raise DomainError("no rates given")
    if any(r < 0 for r in rates):
        raise DomainError("decoherence rates must be non-negative")
    total = math.fsum(rates)
    return INFINITE_TIME if total == 0 else 1.0 / total


def time_to_json(t: float) -> dict:
    if math.isinf(t):
        return {"value": None, "infinite": True}
    return {"value": t, "infinite": False}


@dataclass(frozen=True)
class RateBreakdown:
    A: float
    B: float
    gamma1: float
    gamma_phi: float
    gamma2: float


def rates(p: QubitNoiseProfile, *, omega: float | None = None) -> RateBreakdown:
    """All rates of one profile; ``omega`` pins the frequency at which S is sampled."""
    _check_profile(p)
    w = p.omega if omega is None else omega
    g1 = 0.5 * p.A * float(p.spectrum(w))
    gphi = dephasing_rate(p)
    return RateBreakdown(p.A, p.B, g1, gphi, 0.5 * g1 + gphi)


@dataclass(frozen=True)
class SensitivityReport:
    delta: float
    nominal: RateBreakdown
    low: RateBreakdown
    high: RateBreakdown
    delta_A: float
    delta_B: float
    gamma2_rel_change: float
    weights_only_rel_change: float
    first_order_scale: float

    def to_dict(self) -> dict:
        return asdict(self)


def sensitivity_report(nominal: QubitNoiseProfile, delta: float) -> SensitivityReport:
    """Rates at Josephson energies scaled by 1 -/+ delta with epsilon held fixed.

    ``weights_only_rel_change`` keeps S sampled at the nominal splitting, so
    it isolates the change carried by A and B; ``first_order_scale`` is
    2*delta*(eps/Ebar)^2, the size the A/B shifts take near degeneracy.
    """
    if not 0 <= delta < 1:
        raise DomainError("relative variation must lie in [0, 1)")
    prof = [
        QubitNoiseProfile(nominal.epsilon, nominal.ebar * f, nominal.spectrum)
        for f in (1 - delta, 1.0, 1 + delta)
    ]
    low, mid, high = (rates(q) for q in prof)
    fixed = [rates(q, omega=nominal.omega) for q in prof]

    def rel(a: float, b: float) -> float:
        return 0.0 if a == b else abs(a / b - 1.0) if b else math.inf

    return SensitivityReport(
        delta=delta,
        nominal=mid,
        low=low,
        high=high,
        delta_A=max(abs(low.A - mid.A), abs(high.A - mid.A)),
        delta_B=max(abs(low.B - mid.B), abs(high.B - mid.B)),
        gamma2_rel_change=max(rel(low.gamma2, mid.gamma2), rel(high.gamma2, mid.gamma2)),
        weights_only_rel_change=max(
            rel(fixed[0].gamma2, fixed[1].gamma2), rel(fixed[2].gamma2, fixed[1].gamma2)
        ),
        first_order_scale=2 * delta * (nominal.epsilon / nominal.ebar) ** 2 if nominal.ebar else math.inf,
    )


class DephasingTable:
    """Tabulated inverse of the phase integral for one spectrum.

    The table stores I(tau) = phase_integral(S, tau) on a geometric tau grid
    covering ``B_range`` and inverts eta = B*I(tau) = 1 by monotone cubic
    interpolation in log-log space.  It is meant for sweeps that need T_phi
    for thousands of B values under the same spectrum.
    """

    def __init__(self, spectrum: NoiseSpectrum, B_range: tuple[float, float], points: int = 241):
        if spectrum.is_zero:
            raise DomainError("zero spectrum: dephasing time is infinite for every B")
        b_lo, b_hi = B_range
        if not 0 < b_lo <= b_hi <= 1:
            raise DomainError("B range must lie in (0, 1]")
        self.spectrum = spectrum

        def f_hi(tau):  # smallest tau needed: I(tau) = 1/b_hi
            return phase_integral(spectrum, tau) - 0.5 / b_hi

        def f_lo(tau):
            return phase_integral(spectrum, tau) - 2.0 / b_lo

        t_min = expand_bracket(f_hi, 1.0)[0]
        t_max = expand_bracket(f_lo, 1.0)[1]
        taus = np.geomspace(t_min, t_max, points)
        vals = np.array([phase_integral(spectrum, t) for t in taus])
        if np.any(np.diff(vals) <= 0):
            raise NumericalError("phase integral not increasing over the tabulated range")
        self._inverse = PchipInterpolator(np.log(vals), np.log(taus))
        self._bounds = (vals[0], vals[-1])

    def dephasing_time(self, B):
        B = np.asarray(B, dtype=float)
        target = np.divide(1.0, B, out=np.full(B.shape, np.inf), where=B > 0)
        inside = (target >= self._bounds[0]) & (target <= self._bounds[1])
        if np.any(np.isfinite(target) & ~inside):
            raise DomainError("B outside the tabulated range")
        out = np.full(B.shape, INFINITE_TIME)
        out[inside] = np.exp(self._inverse(np.log(target[inside])))
        return out if out.ndim else float(out)
