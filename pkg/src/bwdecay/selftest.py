"""Acceptance checks, runnable without a test harness (``bwdecay selftest``).

Each ``criterion_N`` returns a :class:`CheckResult`; the pass condition
includes the runtime budget.
"""
from __future__ import annotations

import cmath
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import formfactor as ff
from .amplitudes import (
    bw_fullline_amp,
    bw_halfline_amp,
    background,
    complex_delta_amp,
    decompose,
)
from .analysis import tail_exponent
from .casestudies import (
    ScullyParams,
    TaylorParams,
    causality_scan,
    scully_g1,
    scully_profile,
    taylor_profile,
)
from .core import Resonance, ulp_distance
from .quadrature import DEFAULT_CONFIG, integrate_oscillatory_halfline, rotated_contour_background
from .specfun import (
    ASYMPTOTIC_RADIUS,
    NEG_AXIS_STRIP,
    SERIES_RADIUS,
    bw_halfline_kernel,
    e1_scaled_asymptotic,
    e1_scaled_cf,
    e1_series,
    exp_integral_e1,
)

CALIBRATION_RATIOS = (2.0, 20.0, 200.0)
CALIBRATION_GAMMA_T = (0.1, 1.0, 10.0, 50.0)


def calibration_form_factors() -> dict[str, ff.FormFactor]:
    return {
        "1": ff.constant(1.0),
        "E^2": ff.polynomial([0.0, 0.0, 1.0]),
        "E^1/2": ff.power_law(0.5),
        "exp(-E/5)": ff.exp_cutoff(5.0),
    }


def calibration_cells():
    """(ratio, Gamma t, Resonance, t) with E_R = 1."""
    for ratio in CALIBRATION_RATIOS:
        R = Resonance(1.0, 1.0 / ratio)
        for gt in CALIBRATION_GAMMA_T:
            yield ratio, gt, R, gt / R.Gamma


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float
    budget: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.number}: {self.name} -- {self.detail} ({self.seconds:.2f}s / {self.budget:.0f}s)"


def _timed(number: int, name: str, budget: float, fn: Callable[[], tuple[bool, str]]) -> CheckResult:
    t0 = time.perf_counter()
    ok, detail = fn()
    dt = time.perf_counter() - t0
    return CheckResult(number, name, bool(ok and dt < budget), detail, dt, budget)


def random_form_factor(rng: np.random.Generator) -> ff.FormFactor:
    k = int(rng.integers(6))
    if k == 0:
        return ff.constant(complex(rng.normal(), rng.normal()))
    if k == 1:
        return ff.polynomial(rng.normal(size=int(rng.integers(1, 5))).tolist())
    if k == 2:
        return ff.power_law(float(rng.uniform(-0.9, 3.0)))
    if k == 3:
        return ff.exp_cutoff(float(10 ** rng.uniform(-1, 2)))
    if k == 4:
        # poles in the open left half-plane
        a, b = float(rng.uniform(0.1, 5)), float(rng.uniform(0.1, 5))
        return ff.rational([1.0, float(rng.normal())], [a * a + b * b, 2 * a, 1.0])
    return ff.product(ff.polynomial(rng.normal(size=3).tolist()), ff.exp_cutoff(float(10 ** rng.uniform(0, 1))))


def criterion_1(n: int = 1000, seed: int = 1) -> CheckResult:
    def run():
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(n):
            f = random_form_factor(rng)
            R = Resonance(float(10 ** rng.uniform(-2, 2)), float(10 ** rng.uniform(-3, 1)))
            t = float(10 ** rng.uniform(-2, 2)) / R.Gamma
            full = bw_fullline_amp(f, R, t)
            delta = complex_delta_amp(f, R, t)
            worst = max(worst, ulp_distance(full, -2j * math.pi * delta))
        return worst <= 4, f"max distance {worst:g} ulp over {n} draws (limit 4)"

    return _timed(1, "residue identity fullline == -2 pi i delta", 1.0, run)


def criterion_2() -> CheckResult:
    def run():
        cells = 0
        bad = []
        worst = 0.0
        for name, f in calibration_form_factors().items():
            for ratio, gt, R, t in calibration_cells():
                oracle = bw_halfline_amp(f, R, t, DEFAULT_CONFIG, "direct_oracle")
                d = decompose(f, R, t)
                gap = abs(oracle.value - (d.pole_term + d.background))
                bound = oracle.est_error + d.est_error
                worst = max(worst, gap / bound)
                cells += 1
                if not gap <= bound:
                    bad.append((name, ratio, gt))
        return not bad, f"{cells - len(bad)}/{cells} cells within combined est_error (max gap/bound {worst:.3g})"

    return _timed(2, "decomposition identity oracle == pole + background", 30.0, run)


def criterion_3() -> CheckResult:
    def run():
        worst = 0.0
        one = ff.constant(1.0)
        for ratio, gt, R, t in calibration_cells():
            k = bw_halfline_kernel(R.pole, t)
            o = integrate_oscillatory_halfline(one, R.pole, -t)
            worst = max(worst, abs(k - o.value) / abs(k))
        return worst <= 1e-9, f"max relative gap {worst:.3g} (limit 1e-9)"

    return _timed(3, "closed-form kernel vs oscillatory oracle", 10.0, run)


def narrow_resonance_deviations(ratios=(2.0, 20.0, 200.0, 1000.0), gamma_t: float = 1.0) -> list[float]:
    one = ff.constant(1.0)
    out = []
    for ratio in ratios:
        R = Resonance(1.0, 1.0 / ratio)
        t = gamma_t / R.Gamma
        half = bw_halfline_amp(one, R, t).value
        full = bw_fullline_amp(one, R, t)
        out.append(abs(half / full - 1))
    return out


def criterion_4() -> CheckResult:
    def run():
        devs = narrow_resonance_deviations()
        mono = all(b < a for a, b in zip(devs, devs[1:]))
        shown = ", ".join(f"{d:.3g}" for d in devs)
        return mono and devs[-1] <= 1e-2, f"|half/full - 1| at E_R/Gamma = 2, 20, 200, 1000: {shown}"

    return _timed(4, "narrow-resonance convergence", 10.0, run)


TAIL_RESONANCE = Resonance(1.0, 0.1)


def tail_slopes(points: int = 24) -> tuple[float, float, float]:
    R = TAIL_RESONANCE
    ts = np.geomspace(50 / R.Gamma, 500 / R.Gamma, points)
    slopes = []
    for f in (ff.constant(1.0), ff.polynomial([0.0, 1.0])):
        mags = [abs(background(f, R, t).value) for t in ts.tolist()]
        slopes.append(tail_exponent(ts, mags))
    t60 = 60 / R.Gamma
    lead = 1j / R.pole
    watson = abs(t60 * background(ff.constant(1.0), R, t60).value - lead) / abs(lead)
    return slopes[0], slopes[1], watson


def criterion_5() -> CheckResult:
    def run():
        s1, s2, w = tail_slopes()
        ok = abs(s1 + 1) <= 0.05 and abs(s2 + 2) <= 0.1 and w <= 0.05
        return ok, f"slope(f=1) {s1:.5f}, slope(f=E) {s2:.5f}, |tB/(i/z) - 1| at Gamma t=60 {w:.3g}"

    return _timed(5, "non-exponential tail", 10.0, run)


# reference set for the precursor: omega/Gamma = 100, dr*omega/c = 50
PRECURSOR_PARAMS = ScullyParams(omega=1.0, Gamma=0.01, delta_r=50.0, c=1.0)
# convergence set: same omega/Gamma, Gamma*dr/c = 10 so the incoming-wave residue is ~e^-10
CONVERGENCE_PARAMS = ScullyParams(omega=1.0, Gamma=0.01, delta_r=1000.0, c=1.0)


def _bitwise_zero(values: np.ndarray) -> bool:
    v = np.ascontiguousarray(values, dtype=complex)
    return bool(np.all(v.view(np.uint64) == 0))


def criterion_6() -> CheckResult:
    def run():
        p = PRECURSOR_PARAMS
        neg = -np.linspace(0.9, 0.01, 12) * p.transit_time
        taylor = TaylorParams(Resonance(1.0, 0.01), 1.0, np.concatenate([neg / p.transit_time * 50, [1.0, 10.0]]))
        tw = taylor_profile(taylor, "wwa")
        sw = scully_profile(p, np.concatenate([neg, [1.0, 10.0]]), "wwa")
        zeros_ok = _bitwise_zero(tw.values[tw.times < 0]) and _bitwise_zero(sw.values[sw.times < 0])
        report = causality_scan(p, neg)
        te = taylor_profile(taylor, "exact")
        mask = te.times < 0
        taylor_ok = bool(np.max(np.abs(te.values[mask])) > 1e3 * np.max(te.errors[mask]))
        ok = zeros_ok and report.hegerfeldt_flag and report.wwa_precursor == 0.0 and taylor_ok
        detail = (f"wwa bitwise zero for tau<0: {zeros_ok}; scully max precursor {report.max_precursor:.3g} "
                  f"vs threshold {report.threshold:.3g}; taylor precursor above 1e3 x error: {taylor_ok}")
        return ok, detail

    return _timed(6, "causality dichotomy", 20.0, run)


def exponential_law_checks() -> tuple[float, float]:
    """(worst closed-form ratio error, worst exact-vs-wwa deviation)."""
    worst_ratio = 0.0
    R = Resonance(1.0, 0.01)
    taus = np.array([0.5, 1.0, 2.0, 3.0, 5.0]) / R.Gamma
    tw = taylor_profile(TaylorParams(R, 0.3 - 0.2j, taus), "wwa")
    sp = CONVERGENCE_PARAMS
    sw = scully_profile(sp, taus, "wwa")
    for series, gamma in ((tw, R.Gamma), (sw, sp.Gamma)):
        a2 = series.abs2
        for i in range(len(taus)):
            for j in range(i + 1, len(taus)):
                expect = math.exp(-gamma * (taus[j] - taus[i]))
                worst_ratio = max(worst_ratio, abs(a2[j] / a2[i] / expect - 1))
    worst_dev = 0.0
    for ratio in (100.0, 1000.0):
        Rr = Resonance(1.0, 1.0 / ratio)
        tt = np.array([0.5, 1.0, 2.0, 5.0]) / Rr.Gamma
        te = taylor_profile(TaylorParams(Rr, 1.0, tt), "exact")
        tw2 = taylor_profile(TaylorParams(Rr, 1.0, tt), "wwa")
        worst_dev = max(worst_dev, float(np.max(np.abs(te.values / tw2.values - 1))))
        spr = ScullyParams(omega=1.0, Gamma=1.0 / ratio, delta_r=10.0 * ratio, c=1.0)
        for gt in (0.5, 1.0, 2.0, 5.0):
            exact, wwa = scully_g1(spr, spr.transit_time + gt / spr.Gamma)
            worst_dev = max(worst_dev, abs(exact / wwa - 1))
    return worst_ratio, worst_dev


def criterion_7() -> CheckResult:
    def run():
        r, d = exponential_law_checks()
        return r <= 1e-12 and d <= 0.05, f"closed-form ratio error {r:.3g} (limit 1e-12); exact vs wwa {d:.3g} (limit 0.05)"

    return _timed(7, "exponential law in the causal region", 20.0, run)


def e1_engine_checks(seed: int = 7) -> dict[str, float]:
    rng = np.random.default_rng(seed)
    eps = np.finfo(float).eps
    reflection = 0.0
    for _ in range(1000):
        w = complex(*(10 ** rng.uniform(-2, 2, size=2) * rng.choice([-1, 1], size=2)))
        a = exp_integral_e1(w).value
        b = exp_integral_e1(w.conjugate()).value
        reflection = max(reflection, abs(b - a.conjugate()) / (eps * abs(a)))
    deriv = 0.0
    for _ in range(300):
        r = rng.uniform(0.5, 50)
        th = rng.uniform(-math.pi + 0.01, math.pi - 0.01)
        w = r * cmath.exp(1j * th)
        h = 1e-6 * r
        fd = (exp_integral_e1(w + h).value - exp_integral_e1(w - h).value) / (2 * h)
        exact = -cmath.exp(-w) / w
        deriv = max(deriv, abs(fd - exact) / abs(exact))
    seam = 0.0
    for th in np.linspace(-math.pi, math.pi, 181)[1:-1].tolist():
        w = SERIES_RADIUS * cmath.exp(1j * th)
        if w.real < 0 and abs(w) + w.real <= NEG_AXIS_STRIP:
            continue
        s, _ = e1_series(w)
        c, _ = e1_scaled_cf(w)
        seam = max(seam, abs(s - c * cmath.exp(-w)) / abs(s))
    for x in np.linspace(-39.0, -2.0, 40).tolist():
        # boundary of the negative-axis strip |w| + Re w = NEG_AXIS_STRIP
        y = math.sqrt((NEG_AXIS_STRIP - x) ** 2 - x * x)
        for w in (complex(x, y), complex(x, -y)):
            s, _ = e1_series(w)
            c, _ = e1_scaled_cf(w)
            seam = max(seam, abs(s - c * cmath.exp(-w)) / abs(s))
    for th in np.linspace(-math.pi / 2, math.pi / 2, 31).tolist():
        w = ASYMPTOTIC_RADIUS * cmath.exp(1j * th)
        a, _ = e1_scaled_asymptotic(w)
        c, _ = e1_scaled_cf(w)
        seam = max(seam, abs(a - c) / abs(c))
    return {"reflection_eps": reflection, "derivative": deriv, "seam": seam}


def determinism_check() -> bool:
    f = ff.product(ff.polynomial([0.0, 0.0, 1.0]), ff.exp_cutoff(5.0))
    R = Resonance(2.0, 0.2)
    first = integrate_oscillatory_halfline(f, R.pole, -3.0)
    again = integrate_oscillatory_halfline(f, R.pole, -3.0)
    bg1, _ = rotated_contour_background(f, R.pole, -3.0)
    bg2, _ = rotated_contour_background(f, R.pole, -3.0)
    same = first == again and bg1 == bg2
    ts = np.geomspace(0.5, 400.0, 16).tolist()

    def point(t):
        return bw_halfline_amp(f, R, t).value

    serial = [point(t) for t in ts]
    with ThreadPoolExecutor(max_workers=4) as pool:
        threaded = list(pool.map(point, ts))
    return same and np.array_equal(np.array(serial).view(np.uint64), np.array(threaded).view(np.uint64))


def criterion_8() -> CheckResult:
    def run():
        e = e1_engine_checks()
        det = determinism_check()
        ok = e["reflection_eps"] <= 4 and e["derivative"] <= 1e-6 and e["seam"] <= 1e-12 and det
        detail = (f"reflection {e['reflection_eps']:.2g} eps, derivative {e['derivative']:.2g}, "
                  f"seam {e['seam']:.2g}, bitwise deterministic (incl. threads): {det}")
        return ok, detail

    return _timed(8, "engine hygiene", 30.0, run)


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4,
            criterion_5, criterion_6, criterion_7, criterion_8)


def run_all(echo: Callable[[str], None] = print) -> list[CheckResult]:
    results = []
    for crit in CRITERIA:
        r = crit()
        echo(r.line())
        results.append(r)
    n_ok = sum(r.passed for r in results)
    echo(f"{n_ok}/{len(results)} criteria passed")
    return results
