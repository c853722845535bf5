import cmath
import math

import mpmath
import numpy as np
import pytest

from bwdecay import formfactor as ff
from bwdecay.core import BranchCutError, DomainError, ValidationError
from bwdecay.quadrature import QuadratureConfig, integrate_oscillatory_halfline
from bwdecay.specfun import (
    ASYMPTOTIC_RADIUS,
    SERIES_RADIUS,
    bw_halfline_kernel,
    choose_method,
    e1_scaled_asymptotic,
    e1_scaled_cf,
    e1_series,
    exp_integral_e1,
    exp_integral_e1_scaled,
    halfline_kernel_parts,
)

TIGHT = QuadratureConfig(rel_tol=1e-12, abs_tol=1e-15)


def e1_reference_series(x: float) -> float:
    """-gamma - ln x - sum (-x)^k / (k k!), summed until the terms vanish."""
    total, term, k = 0.0, 1.0, 0
    while True:
        k += 1
        term *= -x / k
        add = term / k
        if abs(add) < 1e-18:
            break
        total += add
    return -0.57721566490153286061 - math.log(x) - total


def mp_e1(w: complex) -> complex:
    with mpmath.workdps(30):
        return complex(mpmath.e1(mpmath.mpc(w.real, w.imag)))


def test_e1_at_one():
    ref = e1_reference_series(1.0)
    assert abs(ref - 0.2193839344) < 1e-10
    assert abs(exp_integral_e1(1.0).value - ref) <= 1e-12


def test_e1_reflection_example():
    w = 2 + 3j
    assert exp_integral_e1(w.conjugate()).value == exp_integral_e1(w).value.conjugate()


def test_e1_asymptotic_example():
    w = 50 + 5j
    scaled = exp_integral_e1_scaled(w).value
    assert abs(w * scaled - 1) <= 2 / abs(w)
    cf, _ = e1_scaled_cf(w)
    assert abs(scaled - cf) <= 1e-13 * abs(cf)


def test_e1_against_mpmath():
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(800):
        r = 10 ** rng.uniform(-3, 2.5)
        th = rng.uniform(-math.pi + 1e-3, math.pi - 1e-3)
        w = r * cmath.exp(1j * th)
        if -w.real > 700:
            continue
        ref = mp_e1(w)
        got = exp_integral_e1(w)
        rel = abs(got.value - ref) / abs(ref)
        worst = max(worst, rel)
        # reported error must cover the true error (with slack for the reference rounding)
        assert abs(got.value - ref) <= max(10 * got.est_error, 4e-16 * abs(ref)), (w, got)
    assert worst < 1e-13


def test_e1_real_axis_is_real():
    for x in (0.01, 0.5, 1.0, 7.0, 60.0):
        v = exp_integral_e1(x).value
        assert v.imag == 0.0
        assert abs(v.real - float(mpmath.e1(x))) <= 2e-15 * abs(v)


def test_e1_cut_above_and_below():
    # approaching the negative axis from above and below gives -Ei(x) -/+ i pi
    x = 2.5
    ei = float(mpmath.ei(x))
    up = exp_integral_e1(complex(-x, 1e-300)).value
    down = exp_integral_e1(complex(-x, -1e-300)).value
    assert abs(up - complex(-ei, -math.pi)) < 1e-14 * abs(up)
    assert abs(down - complex(-ei, math.pi)) < 1e-14 * abs(down)


@pytest.mark.parametrize("w", [0, -1.0, complex(-3.0, 0.0), complex(-1e-300, 0.0)])
def test_e1_on_cut_raises(w):
    with pytest.raises(BranchCutError):
        exp_integral_e1(w)


def test_e1_overflow_is_domain_error():
    with pytest.raises(DomainError):
        exp_integral_e1(complex(-800.0, 1.0))
    # the scaled function is still fine there
    v = exp_integral_e1_scaled(complex(-800.0, 1.0)).value
    assert math.isfinite(abs(v))


def test_e1_rejects_non_finite():
    with pytest.raises(ValidationError):
        exp_integral_e1(complex(math.nan, 1))


def test_method_regions():
    assert choose_method(1 + 1j) == "power_series"
    assert choose_method(-10 + 0.5j) == "power_series"
    assert choose_method(5 + 5j) == "continued_fraction"
    assert choose_method(60 + 0j) == "asymptotic"
    assert choose_method(-60 + 0.5j) == "continued_fraction"


def test_reflection_property():
    rng = np.random.default_rng(3)
    for _ in range(1000):
        w = complex(*rng.uniform(-40, 40, size=2))
        if w.imag == 0:
            continue
        a = exp_integral_e1(w).value
        b = exp_integral_e1(w.conjugate()).value
        assert abs(b - a.conjugate()) <= 4 * np.finfo(float).eps * abs(a)


def test_derivative_property():
    rng = np.random.default_rng(5)
    for _ in range(300):
        r = rng.uniform(0.5, 50)
        th = rng.uniform(-math.pi + 0.01, math.pi - 0.01)
        w = r * cmath.exp(1j * th)
        h = 1e-6 * r
        fd = (exp_integral_e1(w + h).value - exp_integral_e1(w - h).value) / (2 * h)
        exact = -cmath.exp(-w) / w
        assert abs(fd - exact) <= 1e-6 * abs(exact)


def test_series_cf_seam():
    for th in np.linspace(-0.9 * math.pi, 0.9 * math.pi, 73):
        w = SERIES_RADIUS * cmath.exp(1j * th)
        if w.real < 0:
            continue
        s, _ = e1_series(w)
        c, _ = e1_scaled_cf(w)
        assert abs(s - c * cmath.exp(-w)) <= 1e-12 * abs(s)


def test_asymptotic_cf_seam():
    for th in np.linspace(-math.pi / 2, math.pi / 2, 25):
        w = ASYMPTOTIC_RADIUS * cmath.exp(1j * th)
        a, _ = e1_scaled_asymptotic(w)
        c, _ = e1_scaled_cf(w)
        assert abs(a - c) <= 1e-12 * abs(c)


# ---------------------------------------------------------------- kernel


def test_kernel_matches_oracle():
    z = 1 - 0.05j
    k = bw_halfline_kernel(z, 10.0)
    o = integrate_oscillatory_halfline(ff.constant(1.0), z, -10.0, TIGHT)
    assert abs(k - o.value) <= 1e-10 * abs(k)


def test_kernel_watson_limit():
    z = 1 - 0.05j
    t = 1e4
    k = bw_halfline_kernel(z, t)
    assert abs(t * k - 1j / z) <= 1e-3 * abs(1j / z)


def test_kernel_conjugation_against_oracle():
    # conj K(z, t) = int e^{+iEt} / (E - conj z) dE
    z, t = 1 - 0.05j, 3.0
    k = bw_halfline_kernel(z, t)
    o = integrate_oscillatory_halfline(ff.constant(1.0), z.conjugate(), t, TIGHT)
    assert abs(k.conjugate() - o.value) <= 1e-10 * abs(k)


def test_kernel_parts_pole_term_is_full_line():
    z, t = 1 - 0.05j, 7.0
    pole, bg, err = halfline_kernel_parts(z, t)
    assert pole == 2 * math.pi / 1j * cmath.exp(-1j * z * t)
    assert err > 0
    # negative time with a fourth-quadrant pole: no residue
    pole_neg, _, _ = halfline_kernel_parts(z, -t)
    assert pole_neg == 0


@pytest.mark.parametrize("ratio", [2.0, 20.0, 200.0])
@pytest.mark.parametrize("gt", [0.1, 1.0, 10.0, 50.0])
def test_kernel_calibration_grid(ratio, gt):
    z = complex(1.0, -0.5 / ratio)
    t = gt * ratio
    k = bw_halfline_kernel(z, t)
    o = integrate_oscillatory_halfline(ff.constant(1.0), z, -t)
    assert abs(k - o.value) <= 1e-9 * abs(k)


@pytest.mark.parametrize("z", [-1 - 0.5j, -1 + 0.5j, 2 + 0.3j, 0.5j, -0.5j])
@pytest.mark.parametrize("t", [-4.0, 0.3, 5.0])
def test_kernel_other_quadrants(z, t):
    # the winding bookkeeping must hold for poles off the fourth quadrant too
    k = bw_halfline_kernel(z, t)
    o = integrate_oscillatory_halfline(ff.constant(1.0), z, -t, TIGHT)
    assert abs(k - o.value) <= 1e-9 * abs(k)


def test_kernel_domain():
    with pytest.raises(DomainError):
        bw_halfline_kernel(1 - 0.1j, 0.0)
    with pytest.raises(ValidationError):
        bw_halfline_kernel(2.0 + 0j, 1.0)
