"""The three resonant amplitude models and the pole/background split.

``bw_halfline``   int_0^inf exp(-iEt) f(E)/(E - z_R) dE        (exact, numerical)
``bw_fullline``   (2 pi / i) f(z_R) exp(-i E_R t) exp(-Gamma t/2)   (real line extended)
``complex_delta`` f(z_R) exp(-i E_R t) exp(-Gamma t/2)            (t > 0 only)

The full-line value is exactly -2 pi i times the complex-delta value; the
factor is exposed rather than normalised away.  The half-line integral
equals the full-line value plus a background that decays as a power of t.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import (
    AmplitudeSeries,
    DomainError,
    InadmissibleFormFactorError,
    QuadratureNonConvergence,
    Resonance,
    TimeGrid,
    ValidationError,
    require_finite,
)
from .formfactor import FormFactor, admissibility, eval_complex
from .quadrature import (
    DEFAULT_CONFIG,
    IntegralResult,
    QuadratureConfig,
    integrate_oscillatory_halfline,
    rotated_contour_background,
    rotation_direction,
)

STRATEGIES = ("rotation", "direct_oracle", "auto")
TWO_PI_OVER_I = 2 * math.pi / 1j


@dataclass(frozen=True)
class AmplitudeModel:
    tag: str
    strategy: Optional[str] = None

    def __post_init__(self):
        if self.tag not in ("bw_halfline", "bw_fullline", "complex_delta"):
            raise ValidationError("unknown amplitude model", tag=self.tag)
        if self.tag == "bw_halfline":
            if self.strategy is None:
                object.__setattr__(self, "strategy", "auto")
            elif self.strategy not in STRATEGIES:
                raise ValidationError("unknown strategy", strategy=self.strategy)
        elif self.strategy is not None:
            raise ValidationError("strategy applies to bw_halfline only", tag=self.tag)


@dataclass(frozen=True)
class Decomposition:
    pole_term: complex
    background: complex
    total: complex
    est_error: float


def _positive_time(t) -> float:
    require_finite("t", t)
    t = float(t)
    if not t > 0:
        raise DomainError("complex-delta evolution is defined for t > 0 only", t=t)
    return t


def pole_evolution(R: Resonance, t: float) -> complex:
    """exp(-i E_R t) exp(-Gamma t / 2)."""
    return cmath.exp(-1j * R.E_R * t) * math.exp(-0.5 * R.Gamma * t)


def complex_delta_amp(f: FormFactor, R: Resonance, t: float) -> complex:
    t = _positive_time(t)
    return eval_complex(f, R.pole) * pole_evolution(R, t)


def bw_fullline_amp(f: FormFactor, R: Resonance, t: float) -> complex:
    t = _positive_time(t)
    verdict = admissibility(f, "lower")
    if not verdict.admissible:
        raise InadmissibleFormFactorError(verdict.reason, direction="lower")
    return TWO_PI_OVER_I * eval_complex(f, R.pole) * pole_evolution(R, t)


def _require_usable(res: IntegralResult, what: str, **ctx) -> IntegralResult:
    if not res.usable:
        raise QuadratureNonConvergence(f"{what} did not converge ({res.limited_by})",
                                       est_error=res.est_error, **ctx)
    return res


def bw_halfline_amp(
    f: FormFactor,
    R: Resonance,
    t: float,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    strategy: str = "auto",
) -> IntegralResult:
    """Half-line Breit-Wigner integral at time ``t``.

    ``t < 0`` is accepted (precursor studies): the rotation then goes to the
    upper ray, which sweeps no pole.
    """
    require_finite("t", t)
    t = float(t)
    if t == 0.0:
        raise DomainError("the half-line integral is evaluated at t != 0", t=t)
    if strategy not in STRATEGIES:
        raise ValidationError("unknown strategy", strategy=strategy)
    mu = -t
    if strategy == "auto":
        ok = admissibility(f, rotation_direction(mu)).admissible
        strategy = "rotation" if ok else "direct_oracle"
    if strategy == "direct_oracle":
        res = integrate_oscillatory_halfline(f, R.pole, mu, cfg)
        return _require_usable(res, "oscillatory oracle", t=t)
    bg, plan = rotated_contour_background(f, R.pole, mu, cfg)
    _require_usable(bg, "rotated-contour background", t=t)
    return IntegralResult(plan.residue_term + bg.value, bg.est_error, bg.evals,
                          bg.converged, bg.limited_by)


def background(f: FormFactor, R: Resonance, t: float, cfg: QuadratureConfig = DEFAULT_CONFIG) -> IntegralResult:
    """Rotated-contour remainder: half-line integral minus its pole term."""
    require_finite("t", t)
    bg, _ = rotated_contour_background(f, R.pole, -float(t), cfg)
    return _require_usable(bg, "rotated-contour background", t=t)


def decompose(f: FormFactor, R: Resonance, t: float, cfg: QuadratureConfig = DEFAULT_CONFIG) -> Decomposition:
    pole = bw_fullline_amp(f, R, t)
    bg = background(f, R, t, cfg)
    return Decomposition(pole, bg.value, pole + bg.value, bg.est_error)


def amplitude_series(
    model: str,
    f: FormFactor,
    R: Resonance,
    grid: TimeGrid,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    strategy: str = "auto",
) -> AmplitudeSeries:
    """Evaluate one model on every grid point (in grid order)."""
    times = grid.samples
    values = np.empty(times.size, dtype=complex)
    errors = np.zeros(times.size)
    for i, t in enumerate(times.tolist()):
        if model == "bw_halfline":
            r = bw_halfline_amp(f, R, t, cfg, strategy)
            values[i], errors[i] = r.value, r.est_error
        elif model == "background":
            r = background(f, R, t, cfg)
            values[i], errors[i] = r.value, r.est_error
        elif model == "bw_fullline":
            values[i] = bw_fullline_amp(f, R, t)
        elif model == "complex_delta":
            values[i] = complex_delta_amp(f, R, t)
        else:
            raise ValidationError("unknown model tag", model=model)
    return AmplitudeSeries(model, times, values, errors, grid)


def survival_probability(series: AmplitudeSeries) -> np.ndarray:
    """|A(t)|^2 normalised at the first sample (t = 0 is never on a grid)."""
    p = series.abs2
    if p[0] == 0:
        raise ValidationError("first sample vanishes; cannot normalise", model=series.model)
    return p / p[0]
