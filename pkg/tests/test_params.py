import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from chargecluster.errors import CalibrationError, DomainError
from chargecluster.params import (
    CONSTANTS,
    ChargeQubitParams,
    CouplerParams,
    calibrate_chain,
    calibrate_common,
    coupling_biased,
    coupling_lr,
    coupling_nn,
    effective_ej,
    epsilon,
    g_from_quarter,
)

PHI0 = 2.067833848e-15
H = 6.62607015e-34

QUBIT = ChargeQubitParams(E_c=100.0, E_J=10.0)
JJ = CouplerParams.large_jj(50.0)


def lr_oracle(E_i, E_j, L_nH, flux):
    """Shared-inductance coupling evaluated in SI units, returned in GHz."""
    ei, ej = E_i * 1e9 * H, E_j * 1e9 * H
    lam = L_nH * 1e-9 * math.pi**2 * ei * ej / PHI0**2 * math.sin(math.pi * flux) ** 2
    return lam / H / 1e9


def nn_oracle(E_i, E_j, f_i, f_j, E_J0, r_b=0.0):
    gamma = math.asin(r_b)
    return (
        E_i * E_j / (4 * E_J0 * math.cos(gamma))
        * math.sin(math.pi * f_i + gamma / 2)
        * math.sin(math.pi * f_j - gamma / 2)
    )


# --- single-qubit quantities


@pytest.mark.parametrize(
    "E_c, n_g, expected", [(100.0, 1.0, 0.0), (100.0, 0.0, -50.0), (80.0, 1.1, 4.0)]
)
def test_epsilon(E_c, n_g, expected):
    assert epsilon(ChargeQubitParams(E_c, 10.0, n_g)) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("flux, expected", [(0.0, 10.0), (0.5, 0.0), (1 / 3, 5.0)])
def test_effective_ej(flux, expected):
    assert effective_ej(10.0, flux) == pytest.approx(expected, abs=1e-12)


def test_effective_ej_exact_zero_at_half():
    assert effective_ej(10.0, 0.5) == 0.0


@pytest.mark.parametrize("flux", [-0.1, 0.6])
def test_effective_ej_rejects_out_of_range(flux):
    with pytest.raises(DomainError):
        effective_ej(10.0, flux)


def test_qubit_validation():
    with pytest.raises(DomainError):
        ChargeQubitParams(E_c=10.0, E_J=10.0)  # E_c/E_J below 5
    with pytest.raises(DomainError):
        ChargeQubitParams(E_c=-1.0, E_J=0.1)


def test_constants():
    assert CONSTANTS.flux_quantum == PHI0
    assert CONSTANTS.planck_h == H


# --- couplings


def test_coupling_nn_nominal():
    assert coupling_nn(10.0, 10.0, 0.5, 0.5, JJ) == pytest.approx(0.5, abs=1e-12)
    assert coupling_nn(10.0, 10.0, 0.5, 0.5, JJ) == pytest.approx(10.0 / 20, abs=1e-12)


def test_coupling_nn_zero_flux():
    assert coupling_nn(10.0, 20.0, 0.0, 0.3, JJ) == 0.0


def test_coupling_nn_quarter_fluxes():
    assert coupling_nn(10.0, 20.0, 0.25, 0.25, JJ) == pytest.approx(0.5, abs=1e-12)


@given(st.floats(0.01, 0.5), st.floats(0.01, 0.5), st.floats(1.0, 100.0), st.floats(1.0, 100.0))
@settings(max_examples=50, deadline=None)
def test_biased_reduces_to_nn_at_zero_bias(fi, fj, ei, ej):
    assert coupling_biased(ei, ej, fi, fj, JJ) == pytest.approx(coupling_nn(ei, ej, fi, fj, JJ), rel=1e-14)


def test_biased_half_ratio():
    expected = (0.5 / math.cos(math.pi / 6)) * math.sin(math.pi / 2 + math.pi / 12) * math.sin(
        math.pi / 2 - math.pi / 12
    )
    got = coupling_biased(10.0, 10.0, 0.5, 0.5, CouplerParams.large_jj(50.0, 0.5))
    assert got == pytest.approx(expected, rel=1e-13)


@given(st.floats(0.05, 0.5), st.floats(0.05, 0.5), st.floats(-0.9, 0.9))
@settings(max_examples=50, deadline=None)
def test_biased_matches_oracle(fi, fj, r):
    got = coupling_biased(10.0, 12.0, fi, fj, CouplerParams.large_jj(50.0, r))
    assert got == pytest.approx(nn_oracle(10.0, 12.0, fi, fj, 50.0, r), rel=1e-12, abs=1e-15)


def test_bias_raises_junction_inductance():
    base = CouplerParams.large_jj(50.0)
    biased = CouplerParams.large_jj(50.0, 0.5)
    assert biased.junction_inductance == pytest.approx(base.junction_inductance / math.cos(math.pi / 6))


def test_coupling_nn_rejects_bias():
    with pytest.raises(DomainError):
        coupling_nn(10.0, 10.0, 0.5, 0.5, CouplerParams.large_jj(50.0, 0.2))


def test_coupling_lr_maximum():
    c = CouplerParams.common_inductance(10.0, 0.5)
    got = coupling_lr(10.0, 10.0, c)
    assert got == pytest.approx(lr_oracle(10.0, 10.0, 10.0, 0.5), rel=1e-12)
    assert got == pytest.approx(1.53, rel=0.01)


def test_coupling_lr_zero_flux_and_linear_in_L():
    assert coupling_lr(10.0, 10.0, CouplerParams.common_inductance(10.0, 0.0)) == 0.0
    one = coupling_lr(10.0, 10.0, CouplerParams.common_inductance(10.0, 0.3))
    two = coupling_lr(10.0, 10.0, CouplerParams.common_inductance(20.0, 0.3))
    assert two == pytest.approx(2 * one, rel=1e-14)


def test_lr_quoted_scale_needs_reduced_sin_squared():
    lam_max = coupling_lr(10.0, 10.0, CouplerParams.common_inductance(10.0, 0.5))
    s2 = 1.1 / lam_max
    assert s2 == pytest.approx(0.72, abs=0.01)
    t_s = math.pi / g_from_quarter(1.1)
    assert t_s == pytest.approx(0.11, rel=0.05)


def test_g_from_quarter_nominal_time():
    assert math.pi / g_from_quarter(0.5) == pytest.approx(0.25, rel=1e-15)


# --- chain calibration


def _bulk_oracle(E, E0):
    """Interior balance with zero bias: E/2 cos x = E^2/(4 E0) sin^2 x, q = E/2 cos x."""
    x = brentq(lambda x: 0.5 * E * math.cos(x) - E * E / (4 * E0) * math.sin(x) ** 2, 0, math.pi / 2, xtol=1e-15)
    return 0.5 * E * math.cos(x), x / math.pi


def _end_bond_oracle(E, E0, n):
    """q at which an end coupler balances without bias (uniform chain)."""
    w_next = 1 if n == 2 else 2

    def f(q):
        fe = math.acos(q / E) / math.pi
        fi = math.acos(w_next * q / E) / math.pi
        return nn_oracle(E, E, fe, fi, E0) - q

    return brentq(f, 1e-9, E / w_next - 1e-12, xtol=1e-15)


def test_bulk_oracle_value():
    q, _ = _bulk_oracle(10.0, 50.0)
    assert q == pytest.approx(0.495098, abs=1e-6)


def test_chain_at_bulk_strength_leaves_interior_unbiased():
    q, phi_int = _bulk_oracle(10.0, 50.0)
    n = 7
    cal = calibrate_chain([QUBIT] * n, [JJ] * (n - 1), g_target=g_from_quarter(q), strict=False)
    site, bond = cal.residuals[:n], cal.residuals[n:]
    assert max(map(abs, site)) <= 1e-9
    assert max(map(abs, bond[1:-1])) <= 1e-9
    assert all(abs(r) <= 1e-6 for r in cal.bias_ratios[1:-1])
    for f in cal.fluxes[1:-1]:
        assert f == pytest.approx(phi_int, abs=1e-9)
    assert cal.fluxes[0] == pytest.approx(math.acos(q / 10.0) / math.pi, abs=1e-12)
    assert cal.t_s == pytest.approx(0.25, rel=0.01)
    # the end couplers are too strong at this strength and bias cannot weaken them
    assert bond[0] > 1e-3 and bond[-1] > 1e-3


def test_default_strength_sits_just_above_bulk_point():
    q_bulk, _ = _bulk_oracle(10.0, 50.0)
    cal = calibrate_chain([QUBIT] * 7, [JJ] * 6)
    assert q_bulk < cal.hbar_g / 4 < 1.01 * q_bulk


@pytest.mark.parametrize("n", [2, 3, 4, 6, 10])
def test_uniform_chain_default_strength(n):
    cal = calibrate_chain([QUBIT] * n, [JJ] * (n - 1))
    assert cal.max_residual <= 1e-9
    assert cal.t_s == pytest.approx(0.25, rel=0.01)
    q = cal.hbar_g / 4
    assert q == pytest.approx(_end_bond_oracle(10.0, 50.0, n), rel=1e-10)


@pytest.mark.parametrize("n", [2, 3])
def test_uniform_short_chain_needs_no_bias(n):
    cal = calibrate_chain([QUBIT] * n, [JJ] * (n - 1), tune_bias=False)
    assert cal.max_residual <= 1e-9


@pytest.mark.parametrize("n", [4, 6])
def test_uniform_long_chain_without_bias_is_infeasible(n):
    with pytest.raises(CalibrationError) as info:
        calibrate_chain([QUBIT] * n, [JJ] * (n - 1), tune_bias=False)
    assert info.value.result is not None
    assert info.value.result.max_residual > 1e-6


def _independent_residuals(qubits, couplers, cal):
    q = cal.hbar_g / 4
    n = len(qubits)
    w = [1] + [2] * (n - 2) + [1]
    out = [q_.E_J * math.cos(math.pi * f) / (wi * q) - 1 for q_, f, wi in zip(qubits, cal.fluxes, w)]
    for k, c in enumerate(couplers):
        lam = nn_oracle(qubits[k].E_J, qubits[k + 1].E_J, cal.fluxes[k], cal.fluxes[k + 1], c.E_J0, cal.bias_ratios[k])
        out.append(lam / q - 1)
    return out


@pytest.mark.parametrize("seed", range(8))
def test_perturbed_chain_closes_with_bias(seed):
    rng = np.random.default_rng(seed)
    n = 6
    qubits = [replace(QUBIT, E_J=10.0 * f) for f in rng.uniform(0.9, 1.1, n)]
    couplers = [JJ] * (n - 1)
    cal = calibrate_chain(qubits, couplers)
    assert cal.max_residual <= 1e-6
    assert max(abs(r) for r in _independent_residuals(qubits, couplers, cal)) <= 1e-6


def test_residuals_are_recomputed_from_settings():
    n = 5
    qubits = [replace(QUBIT, E_J=e) for e in (9.5, 10.3, 10.0, 9.8, 10.6)]
    cal = calibrate_chain(qubits, [JJ] * (n - 1), tune_bias=False, strict=False)
    np.testing.assert_allclose(cal.residuals, _independent_residuals(qubits, [JJ] * (n - 1), cal), atol=1e-12)


def test_infinite_coupler_junction_is_infeasible():
    with pytest.raises(CalibrationError):
        calibrate_chain([QUBIT] * 4, [CouplerParams.large_jj(math.inf)] * 3)


def test_unreachable_target_raises():
    with pytest.raises(CalibrationError):
        calibrate_chain([QUBIT] * 3, [JJ] * 2, g_target=g_from_quarter(20.0))


def test_chain_argument_checks():
    with pytest.raises(DomainError):
        calibrate_chain([QUBIT], [])
    with pytest.raises(DomainError):
        calibrate_chain([QUBIT] * 3, [JJ])


@given(st.lists(st.floats(8.0, 12.0), min_size=2, max_size=7))
@settings(max_examples=25, deadline=None)
def test_calibration_invariants(ejs):
    qubits = [replace(QUBIT, E_J=e) for e in ejs]
    cal = calibrate_chain(qubits, [JJ] * (len(ejs) - 1), strict=False)
    assert cal.achieved_g > 0
    assert cal.t_s == pytest.approx(math.pi / cal.achieved_g, rel=1e-15)
    assert cal.max_residual == max(abs(r) for r in cal.residuals)


def test_to_dict_fields():
    d = calibrate_chain([QUBIT] * 3, [JJ] * 2).to_dict()
    for key in ("topology", "fluxes", "bias_ratios", "achieved_g", "residuals", "t_s", "max_residual"):
        assert key in d


# --- common inductance


def _kappa(E_J, L_nH):
    return L_nH * 1e-9 * math.pi**2 * (E_J * 1e9 * H) / PHI0**2


def test_common_constructed_quarter_flux():
    # kappa = sqrt(2) puts the N = 2 root at x = pi/4
    L_nH = math.sqrt(2) / _kappa(10.0, 1.0)
    cal = calibrate_common([QUBIT] * 2, CouplerParams.common_inductance(L_nH))
    assert cal.fluxes[0] == pytest.approx(0.25, abs=1e-12)


def test_common_hundred_qubits():
    kappa = _kappa(10.0, 10.0)
    x = brentq(lambda x: math.cos(x) / 99 - kappa * math.sin(x) ** 2, 0, math.pi / 2, xtol=1e-15)
    cal = calibrate_common([QUBIT], CouplerParams.common_inductance(10.0), n=100)
    assert math.pi * cal.fluxes[0] == pytest.approx(x, rel=1e-12)
    assert cal.couplings[0] == pytest.approx(lr_oracle(10.0, 10.0, 10.0, x / math.pi), rel=1e-12)
    # frozen oracle values
    assert x == pytest.approx(0.255557, abs=1e-6)
    assert cal.couplings[0] == pytest.approx(0.097730, abs=1e-6)
    assert cal.max_residual <= 1e-12
    assert cal.max_coupling == pytest.approx(1.5294, abs=1e-4)


def test_common_root_decreases_with_n():
    c = CouplerParams.common_inductance(10.0)
    xs = [calibrate_common([QUBIT], c, n=n).fluxes[0] for n in (2, 5, 20, 100, 1000)]
    assert all(a > b for a, b in zip(xs, xs[1:]))


def test_common_rejects_mismatched_or_single():
    c = CouplerParams.common_inductance(10.0)
    with pytest.raises(DomainError):
        calibrate_common([QUBIT, replace(QUBIT, E_J=11.0)], c)
    with pytest.raises(DomainError):
        calibrate_common([QUBIT], c, n=1)
