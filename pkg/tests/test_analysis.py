import math

import numpy as np
import pytest

from bwdecay import formfactor as ff
from bwdecay.amplitudes import background, bw_fullline_amp
from bwdecay.analysis import crossover_time, deviation_report, last_decade, tail_exponent
from bwdecay.core import Resonance, ValidationError, make_time_grid

ONE = ff.constant(1.0)


def report_at(ratio: float, gt: float, points: int = 2):
    R = Resonance(1.0, 1.0 / ratio)
    t = gt / R.Gamma
    grid = make_time_grid(t, t * 1.001, points)
    return deviation_report(ONE, R, grid, with_crossover=False)


def test_rel_dev_shrinks_with_ratio():
    narrow = report_at(200.0, 1.0)
    wide = report_at(2.0, 1.0)
    assert narrow.rel_dev[0] < wide.rel_dev[0]


def test_ratio_to_delta_tends_to_one():
    rep = report_at(1000.0, 1.0)
    assert abs(rep.ratio_to_delta[0] - 1) < 1e-2


def test_background_dominates_deep_tail():
    rep = report_at(10.0, 60.0)
    assert rep.rel_dev[0] >= 1


def test_report_invariants():
    R = Resonance(1.0, 0.1)
    grid = make_time_grid(1.0, 2000.0, 40, "logarithmic")
    rep = deviation_report(ff.exp_cutoff(5.0), R, grid)
    assert np.all(rep.rel_dev >= 0) and np.all(np.isfinite(rep.rel_dev))
    assert np.all(np.isfinite(rep.ratio_to_delta))
    # ratio_to_delta = (fullline / (-2 pi i delta)) * (halfline / fullline), first factor exactly 1
    first = rep.fullline.values / (-2j * math.pi * rep.delta.values)
    assert np.max(np.abs(first - 1)) <= 4 * np.finfo(float).eps
    np.testing.assert_allclose(rep.ratio_to_delta, first * rep.halfline.values / rep.fullline.values,
                               rtol=1e-14)
    assert rep.tail_exponent is not None and rep.crossover_time is not None
    js = rep.to_json()
    assert len(js["rel_dev"]) == 40 and js["params"]["E_R"] == 1.0


def test_report_is_deterministic():
    R = Resonance(2.0, 0.3)
    grid = make_time_grid(0.5, 50.0, 12, "logarithmic")
    a = deviation_report(ff.power_law(0.5), R, grid).to_json()
    b = deviation_report(ff.power_law(0.5), R, grid).to_json()
    assert a == b


def test_tail_exponent_synthetic():
    t = np.geomspace(1, 1e3, 30)
    assert abs(tail_exponent(t, 7.5 * t ** -3.0) + 3) <= 1e-10


def test_tail_exponent_validation():
    t = np.geomspace(1, 10, 7)
    with pytest.raises(ValidationError):
        tail_exponent(t, t ** -1)
    t = np.geomspace(1, 10, 10)
    m = t ** -1
    m[3] = 0
    with pytest.raises(ValidationError):
        tail_exponent(t, m)
    with pytest.raises(ValidationError):
        tail_exponent(t, m[:5])


def test_last_decade():
    t = np.geomspace(1, 1000, 31)
    w = last_decade(t)
    assert t[w][0] == pytest.approx(100.0) and w.stop == 31


@pytest.mark.parametrize("f, slope, tol", [(ONE, -1.0, 0.05), (ff.polynomial([0, 1]), -2.0, 0.1)])
def test_background_tail_slopes(f, slope, tol):
    R = Resonance(1.0, 0.1)
    ts = np.geomspace(50 / R.Gamma, 500 / R.Gamma, 20)
    mags = [abs(background(f, R, t).value) for t in ts]
    assert abs(tail_exponent(ts, mags) - slope) <= tol


def _bp(R, t):
    return abs(background(ONE, R, t).value), abs(bw_fullline_amp(ONE, R, t))


def test_crossover_contract():
    R = Resonance(1.0, 0.1)
    tc = crossover_time(ONE, R)
    B, P = _bp(R, tc)
    assert abs(B - P) / P <= 1e-6
    B2, P2 = _bp(R, 2 * tc)
    assert B2 > P2
    Bh, Ph = _bp(R, tc / 2)
    assert Bh < Ph


def test_crossover_grows_with_ratio():
    tcs = [crossover_time(ONE, Resonance(0.1 * ratio, 0.1)) for ratio in (10, 100, 1000)]
    assert tcs[0] < tcs[1] < tcs[2]


def test_crossover_validation():
    with pytest.raises(ValidationError):
        crossover_time(ff.rational([1], [1.25, -1, 1]), Resonance(1.0, 0.1))
    with pytest.raises(ValidationError):
        crossover_time(ONE, Resonance(1.0, 0.1), scan=(1e-2, 1.0))
