"""Deviation of the half-line amplitude from its pole term, tail exponent
and the time at which the background overtakes the exponential."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .amplitudes import amplitude_series, background
from .core import AmplitudeSeries, EngineError, Resonance, TimeGrid, ValidationError
from .formfactor import FormFactor, admissibility, eval_complex
from .quadrature import DEFAULT_CONFIG, QuadratureConfig

MIN_TAIL_POINTS = 8


@dataclass(frozen=True)
class DeviationReport:
    grid: TimeGrid
    halfline: AmplitudeSeries
    fullline: AmplitudeSeries
    delta: AmplitudeSeries
    rel_dev: np.ndarray
    ratio_to_delta: np.ndarray
    tail_exponent: Optional[float]
    crossover_time: Optional[float]
    params_echo: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "params": self.params_echo,
            "t": self.grid.samples.tolist(),
            "halfline": {"re": self.halfline.values.real.tolist(),
                         "im": self.halfline.values.imag.tolist(),
                         "est_error": self.halfline.errors.tolist()},
            "fullline": {"re": self.fullline.values.real.tolist(),
                         "im": self.fullline.values.imag.tolist()},
            "complex_delta": {"re": self.delta.values.real.tolist(),
                              "im": self.delta.values.imag.tolist()},
            "rel_dev": self.rel_dev.tolist(),
            "ratio_to_delta": {"re": self.ratio_to_delta.real.tolist(),
                               "im": self.ratio_to_delta.imag.tolist()},
            "tail_exponent": self.tail_exponent,
            "crossover_time": self.crossover_time,
        }


def tail_exponent(times, magnitudes, window: Optional[slice] = None) -> float:
    """Least-squares slope of log|B| against log t over ``window``."""
    t = np.asarray(times, dtype=float)
    m = np.asarray(magnitudes, dtype=float)
    if window is not None:
        t, m = t[window], m[window]
    if t.size != m.size:
        raise ValidationError("times and magnitudes differ in length")
    if t.size < MIN_TAIL_POINTS:
        raise ValidationError(f"tail window needs at least {MIN_TAIL_POINTS} points", points=int(t.size))
    if np.any(t <= 0) or np.any(m <= 0) or not (np.all(np.isfinite(t)) and np.all(np.isfinite(m))):
        raise ValidationError("tail fit needs positive finite times and magnitudes")
    slope, _ = np.polyfit(np.log(t), np.log(m), 1)
    return float(slope)


def last_decade(times) -> slice:
    t = np.asarray(times, dtype=float)
    start = int(np.searchsorted(t, t[-1] / 10.0))
    return slice(start, t.size)


def _log_ratio(f: FormFactor, R: Resonance, t: float, log_pole0: float, cfg) -> float:
    """log|B(t)| - log|P(t)|, with |P| in closed form so it never underflows."""
    b = abs(background(f, R, t, cfg).value)
    if b == 0:
        return -math.inf
    return math.log(b) - (log_pole0 - 0.5 * R.Gamma * t)


def crossover_time(
    f: FormFactor,
    R: Resonance,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    scan: tuple[float, float] = (1e-2, 2e3),
    points_per_decade: int = 12,
) -> float:
    """Time at which |background| overtakes |pole term| for good.

    Scans Gamma t over ``scan`` on a log grid, takes the first switch from
    |B| < |P| to |B| >= |P| and refines it by Brent's method in log t.
    (For f(0) != 0 the background also dominates as t -> 0, where it
    diverges logarithmically; that early regime is skipped.)
    """
    if not admissibility(f, "lower").admissible:
        raise ValidationError("crossover needs a form factor admissible for lower rotation")
    fz = eval_complex(f, R.pole)
    if fz == 0:
        raise ValidationError("f(z_R) = 0: there is no pole term to cross")
    log_pole0 = math.log(2 * math.pi * abs(fz))
    lo, hi = scan
    n = int(round(points_per_decade * math.log10(hi / lo))) + 1
    gts = np.geomspace(lo, hi, n)
    prev_t, prev_h = None, None
    seen_below = False
    for gt in gts.tolist():
        t = gt / R.Gamma
        h = _log_ratio(f, R, t, log_pole0, cfg)
        if h < 0:
            seen_below = True
        elif seen_below and prev_h is not None and prev_h < 0:
            g = lambda x: _log_ratio(f, R, math.exp(x), log_pole0, cfg)
            x = brentq(g, math.log(prev_t), math.log(t), xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=200)
            return math.exp(x)
        prev_t, prev_h = t, h
    raise ValidationError("no crossover from pole-dominated to background-dominated decay in scan range",
                          scan=scan, E_R=R.E_R, Gamma=R.Gamma)


def deviation_report(
    f: FormFactor,
    R: Resonance,
    grid: TimeGrid,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    with_crossover: bool = True,
) -> DeviationReport:
    half = amplitude_series("bw_halfline", f, R, grid, cfg)
    full = amplitude_series("bw_fullline", f, R, grid, cfg)
    delta = amplitude_series("complex_delta", f, R, grid, cfg)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel_dev = np.abs(half.values - full.values) / np.abs(full.values)
        ratio = half.values / (-2j * math.pi * delta.values)
    window = last_decade(grid.samples)
    tail = None
    if window.stop - window.start >= MIN_TAIL_POINTS:
        if admissibility(f, "lower").admissible:
            bmag = np.array([abs(background(f, R, t, cfg).value) for t in grid.samples[window].tolist()])
        else:
            bmag = np.abs(half.values - full.values)[window]
        if np.all(bmag > 0):
            tail = tail_exponent(grid.samples[window], bmag)
    tc = None
    if with_crossover:
        try:
            tc = crossover_time(f, R, cfg)
        except EngineError:
            tc = None
    echo = {"E_R": R.E_R, "Gamma": R.Gamma, "form_factor": f.to_json(),
            "time_grid": {"start": grid.start, "stop": grid.stop, "points": grid.points,
                          "spacing": grid.spacing},
            "quadrature": {"rel_tol": cfg.rel_tol, "abs_tol": cfg.abs_tol,
                           "max_depth": cfg.max_depth, "max_evals": cfg.max_evals}}
    return DeviationReport(grid, half, full, delta, rel_dev, ratio, tail, tc, echo)
