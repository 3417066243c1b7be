import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from chargecluster.errors import NumericalError
from chargecluster.rootfind import expand_bracket, find_root

CASES = [
    (lambda x: x**3 - 2 * x - 5, 2.0, 3.0),
    (lambda x: math.cos(x) - x, 0.0, 1.0),
    (lambda x: math.exp(x) - 10.0, 0.0, 5.0),
    (lambda x: math.cos(x) / 99 - 0.01 * math.sin(x) ** 2, 0.0, math.pi / 2),
    (lambda x: math.tanh(50 * (x - 0.3)), -1.0, 1.0),
]


@pytest.mark.parametrize("f, lo, hi", CASES)
def test_matches_brentq(f, lo, hi):
    x = find_root(f, lo, hi)
    ref = brentq(f, lo, hi, xtol=1e-15, rtol=1e-15)
    assert x == pytest.approx(ref, rel=1e-13, abs=1e-14)


@pytest.mark.parametrize("f, lo, hi", CASES)
def test_reversed_bracket(f, lo, hi):
    assert find_root(f, hi, lo) == pytest.approx(find_root(f, lo, hi), rel=1e-13, abs=1e-14)


def test_endpoint_root_returned_directly():
    assert find_root(lambda x: x - 1.0, 1.0, 2.0) == 1.0
    assert find_root(lambda x: x - 2.0, 1.0, 2.0) == 2.0


def test_no_sign_change_raises():
    with pytest.raises(NumericalError):
        find_root(lambda x: x * x + 1, -1.0, 1.0)


def test_nan_raises():
    with pytest.raises(NumericalError):
        find_root(lambda x: math.nan, 0.0, 1.0)


@given(st.floats(-1e3, 1e3), st.floats(0.1, 10.0))
@settings(max_examples=60, deadline=None)
def test_linear_root_property(root, slope):
    x = find_root(lambda t: slope * (t - root), root - 7.0, root + 3.0)
    assert abs(x - root) <= 1e-12 * max(1.0, abs(root))


def test_expand_bracket_grows():
    a, b = expand_bracket(lambda t: math.log(t) - 20.0, 1.0)
    assert a < math.exp(20) <= b
    assert b / a == pytest.approx(2.0)


def test_expand_bracket_shrinks_when_start_too_large():
    a, b = expand_bracket(lambda t: t - 1e-3, 1.0)
    assert a < 1e-3 <= b


def test_expand_bracket_limit():
    with pytest.raises(NumericalError):
        expand_bracket(lambda t: -1.0, 1.0, limit=1e6)
