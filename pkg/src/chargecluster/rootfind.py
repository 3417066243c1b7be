"""Scalar root finding on a sign-changing bracket.

Bisection guarantees progress; a secant (regula falsi) step is tried first
and accepted only when it lands strictly inside the current bracket and the
previous step shrank the bracket by at least half.
"""

from __future__ import annotations

import math
from typing import Callable

from .errors import NumericalError


def find_root(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    *,
    xtol: float | None = None,
    rtol: float = 4e-16,
    maxiter: int = 200,
) -> float:
    """Return x in [lo, hi] with f(x) = 0, given f(lo) and f(hi) of opposite sign.

    Stops once the bracket is narrower than ``xtol + rtol*|x|``.  The default
    ``xtol`` is a few ulps of the initial bracket width, which keeps roots at
    or near zero from exhausting ``maxiter``.
    """
    if xtol is None:
        xtol = 4.4e-16 * abs(hi - lo)
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if math.isnan(flo) or math.isnan(fhi) or (flo > 0) == (fhi > 0):
        raise NumericalError(f"no sign change on [{lo!r}, {hi!r}]: f = ({flo!r}, {fhi!r})")

    prev_width = 2.0 * abs(hi - lo)
    for _ in range(maxiter):
        width = abs(hi - lo)
        x = 0.5 * (lo + hi)
        if width <= 0.5 * prev_width:
            sec = hi - fhi * (hi - lo) / (fhi - flo)
            if min(lo, hi) < sec < max(lo, hi):
                x = sec
        prev_width = width
        if x == lo or x == hi:
            return x
        fx = f(x)
        if fx == 0.0:
            return x
        if (fx > 0) == (flo > 0):
            lo, flo = x, fx
        else:
            hi, fhi = x, fx
        if abs(hi - lo) <= xtol + rtol * max(abs(lo), abs(hi)):
            return lo if abs(flo) < abs(fhi) else hi
    raise NumericalError(f"root not converged after {maxiter} iterations on [{lo!r}, {hi!r}]")


def expand_bracket(
    f: Callable[[float], float],
    start: float,
    *,
    factor: float = 2.0,
    limit: float = 1e12,
) -> tuple[float, float]:
    """Grow ``start`` geometrically until f changes sign between successive points.

    Intended for increasing functions with f(0+) < 0, such as a dephasing
    factor minus one. Returns ``(a, b)`` with f(a) < 0 <= f(b).
    """
    x = start
    fx = f(x)
    if fx >= 0.0:
        while fx >= 0.0:
            x /= factor
            if x < start / limit:
                raise NumericalError(f"function non-negative down to {x!r}")
            fx = f(x)
        return x, x * factor
    while fx < 0.0:
        x *= factor
        if x > limit:
            raise NumericalError(f"no sign change found below {limit!r}")
        fx = f(x)
    return x / factor, x
