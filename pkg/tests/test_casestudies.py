import cmath
import math

import mpmath
import numpy as np
import pytest

from bwdecay import formfactor as ff
from bwdecay.casestudies import (
    CausalityReport,
    ScullyParams,
    TaylorParams,
    causality_scan,
    scully_exact,
    scully_g1,
    scully_profile,
    scully_terms,
    taylor_causality,
    taylor_profile,
)
from bwdecay.core import DomainError, Resonance, ValidationError
from bwdecay.quadrature import QuadratureConfig, integrate_oscillatory_halfline, integrate_partition

R = Resonance(1.0, 0.01)
REFERENCE = ScullyParams(omega=1.0, Gamma=0.01, delta_r=50.0)


def bitwise_zero(values) -> bool:
    v = np.ascontiguousarray(values, dtype=complex)
    return bool(np.all(v.view(np.uint64) == 0))


def test_taylor_wwa_support_and_decay():
    taus = np.array([-300.0, -1.0, 1.0, 50.0, 200.0])
    s = taylor_profile(TaylorParams(R, 0.5 + 2j, taus), "wwa")
    assert bitwise_zero(s.values[:2])
    a2 = s.abs2
    assert abs(a2[3] / a2[2] / math.exp(-R.Gamma * 49.0) - 1) <= 1e-12
    assert abs(a2[4] / a2[3] / math.exp(-R.Gamma * 150.0) - 1) <= 1e-12
    assert abs(a2[2] - abs(2 * math.pi * (0.5 + 2j)) ** 2 * math.exp(-R.Gamma)) <= 1e-12 * a2[2]


def test_taylor_precursor_cross_checked():
    tau = -0.5 / R.Gamma
    s = taylor_profile(TaylorParams(R, 1.0, [tau]), "exact")
    v = s.values[0]
    assert abs(v) > 1e3 * s.errors[0]
    o = integrate_oscillatory_halfline(ff.constant(1.0), R.pole, -tau)
    assert abs(v - cmath.exp(1j * R.E_R * tau) * o.value) <= s.errors[0] + o.est_error


def test_taylor_exact_follows_wwa_after_arrival():
    Rn = Resonance(1.0, 0.001)
    taus = np.array([0.5, 1.0, 2.0, 5.0]) / Rn.Gamma
    p = TaylorParams(Rn, 1.0, taus)
    e = taylor_profile(p, "exact").values
    w = taylor_profile(p, "wwa").values
    assert np.all(np.abs(e / w - 1) <= 0.05)


def test_taylor_params_validation():
    with pytest.raises(ValidationError):
        TaylorParams(R, 1.0, [0.0, 1.0])
    with pytest.raises(ValidationError):
        TaylorParams(R, 1.0, [math.nan])
    with pytest.raises(ValidationError):
        TaylorParams((1.0, 0.1), 1.0, [1.0])
    with pytest.raises(ValidationError):
        taylor_profile(TaylorParams(R, 1.0, [1.0]), "sideways")


def test_scully_wwa_support_and_decay():
    p = ScullyParams(omega=2.0, Gamma=0.05, delta_r=10.0, c=2.0, prefactor=1j)
    taus = np.array([-4.0, -0.1, 1.0, 21.0])
    s = scully_profile(p, taus, "wwa")
    assert bitwise_zero(s.values[:2])
    assert abs(s.abs2[3] / s.abs2[2] / math.exp(-p.Gamma * 20.0) - 1) <= 1e-12
    assert scully_g1(p, p.transit_time * 0.5)[1] == 0


def test_scully_precursor_bookkeeping():
    p = REFERENCE
    t = 0.9 * p.transit_time
    out, inc = scully_terms(p, t)
    # mu_1 = dr/c - t > 0: upper rotation, no residue in the outgoing term
    exact, wwa = scully_g1(p, t)
    assert wwa == 0 and abs(exact) > 0
    o = integrate_oscillatory_halfline(ff.polynomial([0, 0, 1]), p.resonance.pole, p.transit_time - t)
    assert abs(out.value - o.value) <= out.est_error + o.est_error


def test_scully_time_domain():
    with pytest.raises(DomainError):
        scully_g1(REFERENCE, -1.0)
    with pytest.raises(DomainError):
        scully_g1(REFERENCE, REFERENCE.transit_time)
    with pytest.raises(ValidationError):
        scully_profile(REFERENCE, [-60.0], "exact")
    with pytest.raises(ValidationError):
        ScullyParams(omega=1.0, Gamma=0.0, delta_r=1.0)


def test_causality_reference_set():
    tau = -0.1 * REFERENCE.transit_time
    rep = causality_scan(REFERENCE, [tau])
    assert isinstance(rep, CausalityReport)
    assert rep.wwa_precursor == 0.0
    assert rep.max_precursor > 0 and rep.hegerfeldt_flag
    assert rep.max_precursor > rep.threshold
    assert np.all(rep.precursor_curve >= 0)


def test_causality_ignores_positive_taus_and_needs_negative():
    rep = causality_scan(REFERENCE, [-10.0, 5.0])
    assert rep.taus.tolist() == [-10.0]
    with pytest.raises(ValidationError):
        causality_scan(REFERENCE, [1.0, 2.0])


def test_taylor_causality_report():
    rep = taylor_causality(TaylorParams(R, 1.0, [-200.0, -50.0, 10.0]))
    assert rep.hegerfeldt_flag and rep.wwa_precursor == 0.0
    assert rep.taus.tolist() == [-200.0, -50.0]
    assert rep.to_json()["hegerfeldt_flag"] is True


def test_precursor_shrinks_as_resonance_narrows():
    # Gamma tau = -0.5 and Gamma dr/c = 20 held fixed; intensity relative to arrival
    rel = []
    for ratio in (10.0, 100.0, 1000.0):
        p = ScullyParams(omega=1.0, Gamma=1.0 / ratio, delta_r=20.0 * ratio)
        rep = causality_scan(p, [-0.5 / p.Gamma])
        assert rep.hegerfeldt_flag
        rel.append(rep.max_precursor / rep.reference_intensity)
    assert rel[0] > rel[1] > rel[2]


@pytest.mark.parametrize("ratio", [100.0, 1000.0])
def test_exact_converges_to_wwa(ratio):
    p = ScullyParams(omega=1.0, Gamma=1.0 / ratio, delta_r=10.0 * ratio)
    for gt in (0.5, 1.0, 2.0, 5.0):
        exact, wwa = scully_g1(p, p.transit_time + gt / p.Gamma)
        assert abs(exact / wwa - 1) <= 0.05


def test_reference_set_gap_is_incoming_residue():
    # at Gamma dr/c = 0.5 the incoming term's residue is not negligible:
    # exact/wwa = 1 - exp(-2 i z dr/c) + (backgrounds)
    p = REFERENCE
    z = p.resonance.pole
    predicted = 1 - cmath.exp(-2j * z * p.transit_time)
    for gt in (0.5, 1.0, 2.0, 5.0):
        exact, wwa = scully_g1(p, p.transit_time + gt / p.Gamma)
        assert abs(exact / wwa - 1) > 0.5
        assert abs(exact / wwa - predicted) <= 1e-5


def _direct_k_space(p: ScullyParams, t: float, X: float):
    """K_S int_0^inf dk k^2 (e^{ik dr} - e^{-ik dr}) e^{-ickt} / (ck - z), summed
    as one integrand on [0, X] plus elementary tails (mpmath E1) beyond X."""
    z = p.resonance.pole
    c = p.c
    nus = (p.delta_r - c * t, -(p.delta_r + c * t))

    def g(k):
        return k * k * (np.exp(1j * nus[0] * k) - np.exp(1j * nus[1] * k)) / (c * k - z)

    piece = math.pi / (2 * max(abs(v) for v in nus))
    edges = np.linspace(0.0, X, int(math.ceil(X / piece)) + 1)
    body = integrate_partition(g, edges, QuadratureConfig(rel_tol=1e-13, abs_tol=1e-15))
    a = z / c
    tails = []
    for nu in nus:
        inu = 1j * nu
        ph = cmath.exp(inu * X)
        t0 = -ph / inu                       # int_X^inf e^{i nu k} dk   (Abel)
        t1 = -ph * (X / inu - 1 / inu ** 2)  # int_X^inf k e^{i nu k} dk
        with mpmath.workdps(30):
            s0 = -inu * (X - a)
            e1 = complex(mpmath.e1(mpmath.mpc(s0.real, s0.imag)))
        tpole = cmath.exp(inu * a) * e1      # int_X^inf e^{i nu k} / (k - a) dk
        tails.append((t1 + a * t0 + a * a * tpole) / c)
    value = p.prefactor * (body.value + tails[0] - tails[1])
    scale = max(abs(x) for x in tails)
    return value, abs(p.prefactor) * (body.est_error + 1e-14 * scale)


@pytest.mark.parametrize("t", [3.0, 8.0])
def test_splitting_matches_single_integrand(t):
    p = ScullyParams(omega=1.0, Gamma=0.1, delta_r=10.0, c=2.0, prefactor=0.3 - 0.7j)
    r = scully_exact(p, t)
    direct, err = _direct_k_space(p, t, 40.0)
    assert abs(r.value - direct) <= r.est_error + err
