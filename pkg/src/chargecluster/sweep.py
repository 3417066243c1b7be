"""Seeded Monte Carlo studies of fabrication spread.

Every sample draws its parameters from its own generator seeded with
``(seed, sample_index)``, so results do not depend on the order or the
process in which samples are evaluated.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np

from .engine import evolve_dense, evolve_diagonal, initial_all_zero
from .errors import CalibrationError, DomainError
from .model import build_physical_chain, build_physical_common
from .noise import DephasingTable, NoiseSpectrum, QubitNoiseProfile, cluster_T2, rates
from .params import (
    ChargeQubitParams,
    CouplerParams,
    calibrate_chain,
    calibrate_common,
)
from .states import closed_form_chain, closed_form_longrange, fidelity

GAUSSIAN = "gaussian"
UNIFORM = "uniform"
DENSE_SWEEP_LIMIT = 10  # "auto" uses the brute-force path up to this size


@dataclass(frozen=True)
class VariationSpec:
    """Relative standard deviations per parameter family and the sampling plan."""

    E_J: float = 0.0
    E_J0: float = 0.0
    L: float = 0.0
    distribution: str = GAUSSIAN
    samples: int = 1
    seed: int = 0
    truncation: float = 3.0

    def __post_init__(self):
        for name in ("E_J", "E_J0", "L"):
            s = getattr(self, name)
            if not 0 <= s <= 0.5:
                raise DomainError(f"relative spread of {name} must lie in [0, 0.5], got {s!r}")
        if self.distribution not in (GAUSSIAN, UNIFORM):
            raise DomainError(f"unknown distribution {self.distribution!r}")
        if self.samples < 1:
            raise DomainError("need at least one sample")

    def rng(self, index: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, index])

    def factors(self, rng: np.random.Generator, sigma: float, size: int) -> np.ndarray:
        """Multiplicative factors 1 + sigma*z; gaussian z is truncated at +/-truncation."""
        if self.distribution == UNIFORM:
            z = rng.uniform(-math.sqrt(3), math.sqrt(3), size)
        else:
            z = rng.standard_normal(size)
            bad = np.abs(z) > self.truncation
            while bad.any():
                z[bad] = rng.standard_normal(int(bad.sum()))
                bad = np.abs(z) > self.truncation
        return 1.0 + sigma * z

    def draw(self, index: int, n_qubits: int, n_couplers: int) -> dict[str, np.ndarray]:
        # all families are drawn in a fixed order so streams stay aligned
        rng = self.rng(index)
        return {
            "E_J": self.factors(rng, self.E_J, n_qubits),
            "E_J0": self.factors(rng, self.E_J0, n_couplers),
            "L": self.factors(rng, self.L, 1),
        }


@dataclass
class SampleResult:
    index: int
    ok: bool
    max_residual: float | None = None
    fidelity: float | None = None
    achieved_g: float | None = None
    t_s: float | None = None
    T2: float | None = None
    max_bias_ratio: float | None = None
    error: str | None = None


@dataclass
class SweepReport:
    kind: str
    samples: list[SampleResult]
    settings: dict = field(default_factory=dict)

    @property
    def fidelities(self) -> np.ndarray:
        return np.array([s.fidelity for s in self.samples if s.ok and s.fidelity is not None])

    @property
    def t2_values(self) -> np.ndarray:
        return np.array([s.T2 for s in self.samples if s.ok and s.T2 is not None])

    @property
    def failures(self) -> int:
        return sum(not s.ok for s in self.samples)

    def aggregates(self) -> dict:
        out: dict = {"samples": len(self.samples), "failures": self.failures}
        f = self.fidelities
        if f.size:
            q = np.quantile(f, [0.05, 0.5, 0.95])
            out.update(
                fidelity_min=float(f.min()),
                fidelity_mean=float(f.mean()),
                fidelity_q05=float(q[0]),
                fidelity_median=float(q[1]),
                fidelity_q95=float(q[2]),
            )
        t2 = self.t2_values
        if t2.size:
            mean = float(t2.mean())
            out.update(
                T2_mean=mean,
                T2_std=float(t2.std(ddof=1)) if t2.size > 1 else 0.0,
                T2_min=float(t2.min()),
                T2_max=float(t2.max()),
            )
            out["T2_cov"] = out["T2_std"] / mean if mean else 0.0
        return out

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "settings": self.settings,
            "aggregates": self.aggregates(),
            "samples": [asdict(s) for s in self.samples],
        }

    def to_csv(self) -> str:
        cols = [f.name for f in SampleResult.__dataclass_fields__.values()]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for s in self.samples:
            w.writerow(["" if getattr(s, c) is None else getattr(s, c) for c in cols])
        return buf.getvalue()


def _evolve_fidelity(terms, n, t, target, method: str) -> float:
    psi0 = initial_all_zero(n)
    x_only = all(term.is_x_only for term in terms)
    if method == "dense" or (method == "auto" and (n <= DENSE_SWEEP_LIMIT or not x_only)):
        psi = evolve_dense(psi0, terms, t)
    else:
        psi = evolve_diagonal(psi0, terms, t)
    return min(1.0, fidelity(psi, target))


def _chain_sample(args) -> SampleResult:
    index, qubits, couplers, v, with_bias, method, noise = args
    n = len(qubits)
    draw = v.draw(index, n, n - 1)
    qs = [replace(q, E_J=q.E_J * f) for q, f in zip(qubits, draw["E_J"])]
    cs = [replace(c, E_J0=c.E_J0 * f) for c, f in zip(couplers, draw["E_J0"])]
    try:
        cal = calibrate_chain(qs, cs, tune_bias=with_bias, strict=False)
    except (CalibrationError, DomainError) as exc:
        return SampleResult(index, False, error=str(exc))
    terms = build_physical_chain(qs, cs, cal)
    fid = _evolve_fidelity(terms, n, cal.t_s, closed_form_chain(n), method)
    t2 = None
    if noise is not None:
        spectrum, eps_ratio = noise
        profiles = [QubitNoiseProfile(eps_ratio * eb, eb, spectrum) for eb in cal.effective_ej]
        t2 = cluster_T2([rates(p).gamma2 for p in profiles])
    return SampleResult(
        index,
        True,
        max_residual=cal.max_residual,
        fidelity=fid,
        achieved_g=cal.achieved_g,
        t_s=cal.t_s,
        T2=t2,
        max_bias_ratio=max((abs(r) for r in cal.bias_ratios), default=0.0),
    )


def _run(fn, jobs, workers: int) -> list[SampleResult]:
    if workers <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def run_chain_sweep(
    qubits: Sequence[ChargeQubitParams],
    couplers: Sequence[CouplerParams],
    v: VariationSpec,
    with_bias: bool,
    *,
    method: str = "auto",
    noise: tuple[NoiseSpectrum, float] | None = None,
    workers: int = 1,
) -> SweepReport:
    """Recalibrate and regenerate the chain cluster state for every sample.

    Each sample is calibrated with fluxes only (``with_bias=False``) or with
    fluxes and bias currents, then the physical Hamiltonian, including any
    residual mismatch, is run for the sample's own t_s = pi/g.  At the
    degeneracy point that Hamiltonian contains only sigma_x terms, so the
    diagonal path is exact; ``method="auto"`` still uses the brute-force
    path up to ``DENSE_SWEEP_LIMIT`` qubits as an independent check.
    """
    if method not in ("auto", "diagonal", "dense"):
        raise DomainError(f"unknown evolution method {method!r}")
    jobs = [
        (i, list(qubits), list(couplers), v, with_bias, method, noise) for i in range(v.samples)
    ]
    samples = _run(_chain_sample, jobs, workers)
    settings = {"n_qubits": len(qubits), "with_bias": with_bias, "variation": asdict(v)}
    return SweepReport("chain", samples, settings)


def _common_sample(args) -> SampleResult:
    index, qubits, coupler, v, method = args
    n = len(qubits)
    draw = v.draw(index, n, 0)
    qs = [replace(q, E_J=q.E_J * f) for q, f in zip(qubits, draw["E_J"])]
    c = replace(coupler, inductance_nH=coupler.inductance_nH * float(draw["L"][0]))
    # a single common flux can only be tuned to the mean qubit
    mean = ChargeQubitParams(qs[0].E_c, float(np.mean([q.E_J for q in qs])), qs[0].n_g)
    try:
        cal = calibrate_common([mean] * n, c, n)
    except (CalibrationError, DomainError) as exc:
        return SampleResult(index, False, error=str(exc))
    terms = build_physical_common(qs, c, cal)
    fid = _evolve_fidelity(terms, n, cal.t_s, closed_form_longrange(n), method)
    return SampleResult(
        index, True, max_residual=cal.max_residual, fidelity=fid, achieved_g=cal.achieved_g, t_s=cal.t_s
    )


def run_common_sweep(
    qubits: Sequence[ChargeQubitParams],
    coupler: CouplerParams,
    v: VariationSpec,
    *,
    method: str = "auto",
    workers: int = 1,
) -> SweepReport:
    """Same study for the shared-inductance array, whose one flux cannot absorb spread."""
    jobs = [(i, list(qubits), coupler, v, method) for i in range(v.samples)]
    samples = _run(_common_sample, jobs, workers)
    settings = {"n_qubits": len(qubits), "variation": asdict(v)}
    return SweepReport("common", samples, settings)


def run_t2_sweep(
    profiles: Sequence[QubitNoiseProfile],
    v: VariationSpec,
) -> SweepReport:
    """Cluster T2 when every qubit's Josephson energy (hence Ebar) is scaled by a drawn factor.

    The charging offset epsilon is held fixed.  Dephasing times come from a
    per-spectrum :class:`DephasingTable`.
    """
    n = len(profiles)
    draws = [v.draw(i, n, 0)["E_J"] for i in range(v.samples)]
    eps = np.array([p.epsilon for p in profiles])
    ebar0 = np.array([p.ebar for p in profiles])
    ebars = np.array(draws) * ebar0  # (samples, n)
    denom = eps**2 + ebars**2
    A, B = ebars**2 / denom, eps**2 / denom
    omega = 4 * math.pi * np.sqrt(denom)

    gamma_phi = np.zeros_like(B)
    by_spec: dict[NoiseSpectrum, list[int]] = {}
    for k, p in enumerate(profiles):
        by_spec.setdefault(p.spectrum, []).append(k)
    gamma1 = np.empty_like(B)
    for spec, cols in by_spec.items():
        gamma1[:, cols] = 0.5 * A[:, cols] * spec(omega[:, cols])
        b = B[:, cols]
        if spec.is_zero or not np.any(b > 0):
            continue
        pos = b[b > 0]
        table = DephasingTable(spec, (float(pos.min()), float(pos.max())))
        t_phi = table.dephasing_time(b)
        gamma_phi[:, cols] = np.where(np.isinf(t_phi), 0.0, 1.0 / t_phi)
    gamma2 = 0.5 * gamma1 + gamma_phi
    samples = [
        SampleResult(i, True, T2=cluster_T2(list(gamma2[i]))) for i in range(v.samples)
    ]
    settings = {"n_qubits": n, "variation": asdict(v)}
    return SweepReport("t2", samples, settings)
