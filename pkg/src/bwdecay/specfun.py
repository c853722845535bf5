"""Principal-branch exponential integral E1 for complex arguments and the
closed form of the constant-weight half-line decay integral.

Three evaluation methods cover the cut plane:

* power series  ``E1(w) = -gamma - log(w) - sum_k (-w)^k / (k k!)`` for
  ``|w| <= SERIES_RADIUS`` and in a parabolic strip hugging the negative
  real axis, where the terms do not cancel;
* continued fraction for ``e^w E1(w)`` (modified Lentz) everywhere else;
* asymptotic series for ``e^w E1(w)`` when ``Re w >= 0`` and
  ``|w| >= ASYMPTOTIC_RADIUS``.

Error estimates are heuristic (last term / last convergent change plus a
rounding allowance), not rigorous bounds.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .core import BranchCutError, DomainError, ValidationError, require_finite

EULER_GAMMA = 0.57721566490153286061
EPS = 2.220446049250313e-16

# Chosen by minimising the max series/continued-fraction discrepancy on rings
# |w| = R, R in [1, 6]; see docs/derivations.md.
SERIES_RADIUS = 2.0
# Series is also used where |w| + Re(w) <= NEG_AXIS_STRIP (near the negative
# axis the terms share a sign) as long as |w| <= NEG_AXIS_MAX.
NEG_AXIS_STRIP = 3.0
NEG_AXIS_MAX = 40.0
ASYMPTOTIC_RADIUS = 50.0
_CF_MAX_ITER = 20000
_SERIES_MAX_TERMS = 400


@dataclass(frozen=True)
class E1Result:
    value: complex
    method: str
    est_error: float


def choose_method(w: complex) -> str:
    r = abs(w)
    if r <= SERIES_RADIUS:
        return "power_series"
    if w.real < 0 and r + w.real <= NEG_AXIS_STRIP and r <= NEG_AXIS_MAX:
        return "power_series"
    if w.real >= 0 and r >= ASYMPTOTIC_RADIUS:
        return "asymptotic"
    return "continued_fraction"


def _check_argument(w) -> complex:
    require_finite("w", w)
    w = complex(w)
    if w.imag == 0.0 and w.real <= 0.0:
        raise BranchCutError("argument lies on the branch cut (-inf, 0] of E1", w=w)
    return w


def e1_series(w: complex) -> tuple[complex, float]:
    """E1(w) by its power series. Returns (value, est_error)."""
    total = 0j
    abs_total = 0.0
    term = 1 + 0j
    for k in range(1, _SERIES_MAX_TERMS):
        term *= -w / k
        c = term / k
        total += c
        abs_total += abs(c)
        if abs(c) <= EPS * abs(total):
            break
    else:
        raise ValidationError("E1 power series did not converge", w=w)
    value = -EULER_GAMMA - cmath.log(w) - total
    err = abs(c) + 4 * EPS * (abs_total + abs(cmath.log(w)) + EULER_GAMMA)
    return value, err


def e1_scaled_cf(w: complex) -> tuple[complex, float]:
    """e^w E1(w) by the continued fraction

        1/(w+1- 1^2/(w+3- 2^2/(w+5- ...)))

    evaluated with the modified Lentz algorithm. Returns (value, est_error).
    """
    tiny = 1e-300
    b = w + 1
    c = 1 / tiny
    d = 1 / b
    h = d
    for i in range(1, _CF_MAX_ITER):
        a = -float(i * i)
        b += 2
        d = a * d + b
        if d == 0:
            d = tiny
        c = b + a / c
        if c == 0:
            c = tiny
        d = 1 / d
        delta = c * d
        h *= delta
        if abs(delta - 1) <= EPS:
            return h, abs(h) * (abs(delta - 1) + EPS * (4 + math.sqrt(i)))
    raise ValidationError("E1 continued fraction did not converge", w=w)


def e1_scaled_asymptotic(w: complex) -> tuple[complex, float]:
    """e^w E1(w) ~ (1/w) sum_k (-1)^k k!/w^k, truncated before the smallest term."""
    total = 1 + 0j
    term = 1 + 0j
    k = 0
    for k in range(1, 200):
        nxt = term * (-k / w)
        if abs(nxt) >= abs(term):
            break
        term = nxt
        total += term
        if abs(term) <= 0.01 * EPS * abs(total):
            break
    return total / w, (abs(term) + 4 * EPS * k) / abs(w)


def exp_integral_e1_scaled(w) -> E1Result:
    """``e^w E1(w)`` on the principal branch; finite wherever E1 is defined.

    The scaled function is the numerically useful one: it stays O(1/|w|)
    for large |w| in every direction, whereas E1 itself overflows for
    large negative ``Re w``.
    """
    w = _check_argument(w)
    method = choose_method(w)
    if method == "power_series":
        v, err = e1_series(w)
        ew = cmath.exp(w)
        return E1Result(v * ew, method, err * abs(ew) + EPS * abs(v * ew))
    if method == "asymptotic":
        v, err = e1_scaled_asymptotic(w)
        return E1Result(v, method, err)
    v, err = e1_scaled_cf(w)
    return E1Result(v, method, err)


def exp_integral_e1(w) -> E1Result:
    """Principal-branch exponential integral E1(w) for complex ``w``.

    Raises BranchCutError on (-inf, 0] and ValidationError for non-finite
    input.  Points on the cut are rejected rather than assigned a one-sided
    limit.
    """
    w = _check_argument(w)
    method = choose_method(w)
    if method == "power_series":
        v, err = e1_series(w)
        return E1Result(v, method, err)
    if -w.real > 700.0:
        raise DomainError("E1 overflows double precision; use exp_integral_e1_scaled", w=w)
    scaled = exp_integral_e1_scaled(w)
    emw = cmath.exp(-w)
    value = scaled.value * emw
    return E1Result(value, method, scaled.est_error * abs(emw) + EPS * abs(value))


def halfline_kernel_parts(z: complex, t: float) -> tuple[complex, complex, float]:
    """Split of the constant-weight half-line integral into (pole, background, err).

    For ``w = -i z t`` the integral of ``exp(-iEt)/(E - z)`` over E in (0, inf)
    is ``e^w E1(w) + n 2 pi i e^w`` where the winding ``n`` is -1 when the
    path s = i t (E - z) crosses the cut of E1 upwards (t > 0, z in the open
    fourth quadrant), +1 when it crosses downwards (t < 0, z in the open
    first quadrant) and 0 otherwise.
    """
    require_finite("z", z)
    require_finite("t", t)
    z = complex(z)
    t = float(t)
    if t == 0.0:
        raise DomainError("t must be nonzero", t=t)
    if z.imag == 0.0 and z.real >= 0.0:
        raise ValidationError("pole lies on the integration range [0, inf)", z=z)
    w = complex(t * z.imag, -t * z.real)
    if w.imag == 0.0 and w.real < 0.0:
        # pole on the imaginary axis: the integral is continuous there, and the
        # limit from the zero-winding side is the upper edge of the cut for
        # t > 0 and the lower edge for t < 0
        w = complex(w.real, math.copysign(5e-324, t))
    res = exp_integral_e1_scaled(w)
    if t > 0 and z.real > 0 and z.imag < 0:
        pole = -2j * math.pi * cmath.exp(w)
    elif t < 0 and z.real > 0 and z.imag > 0:
        pole = 2j * math.pi * cmath.exp(w)
    else:
        pole = 0j
    return pole, res.value, res.est_error + EPS * abs(pole)


def bw_halfline_kernel(z: complex, t: float) -> complex:
    """Closed form of the integral of exp(-iEt)/(E - z) dE over (0, inf).

    Defined for any ``z`` off [0, inf) and ``t != 0``; the decay case of
    interest is ``t > 0`` with ``z`` in the fourth quadrant.
    """
    pole, background, _ = halfline_kernel_parts(z, t)
    return pole + background
