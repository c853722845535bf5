"""Decaying wavefront, two-atom field correlation and the precursor scan.

Each scenario is computed exactly (energy integral over [0, inf) only) and
in the extended-real-line form, whose squared magnitude carries a sharp
theta(tau) exp(-Gamma tau) causal front.

Wavefront.  The exact retarded-time profile is

    C_T int_0^inf dE exp(-i (E - E_R) tau) / (E - E_R + i Gamma/2)
        = C_T exp(i E_R tau) * halfline(f = 1, z_R, tau).

The phase sign is the one whose real-line extension gives theta(tau); the
opposite sign closes the contour on the wrong side and yields theta(-tau).

Correlation.  With E = c k the amplitude is

    K_S / c^3 int_0^inf dE E^2 [exp(i E (dr/c - t)) - exp(-i E (dr/c + t))] / (E - z)

with z = omega - i Gamma/2, i.e. two engine calls with phase coefficients
mu_1 = dr/c - t and mu_2 = -(dr/c + t).  The causal closed form keeps the
residue of the outgoing (mu_1) term only:  -2 pi i K_S z^2 / c^3 *
theta(tau) exp(-(i omega + Gamma/2) tau), tau = t - dr/c.  The incoming
(mu_2) term picks up a residue for every t > 0; relative to the outgoing
one it is suppressed by exp(-Gamma dr / c), so the two forms agree only
when Gamma dr / c >> 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .amplitudes import STRATEGIES, bw_halfline_amp
from .core import (
    AmplitudeSeries,
    DomainError,
    Resonance,
    ValidationError,
    as_complex,
    require_finite,
    require_positive,
)
from .formfactor import Constant, Polynomial
from .quadrature import DEFAULT_CONFIG, IntegralResult, QuadratureConfig

PRECURSOR_FACTOR = 1e3
_ONE = Constant(1.0)
_K_SQUARED = Polynomial((0.0, 0.0, 1.0))


def _tau_array(tau) -> np.ndarray:
    arr = np.asarray(tau, dtype=float).ravel()
    if arr.size == 0:
        raise ValidationError("time grid is empty")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("time grid must be finite")
    if np.any(arr == 0):
        raise ValidationError("tau = 0 (the light cone itself) is excluded from grids")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TaylorParams:
    resonance: Resonance
    prefactor: complex = 1.0
    tau_grid: np.ndarray = field(default_factory=lambda: np.array([1.0]))

    def __post_init__(self):
        if not isinstance(self.resonance, Resonance):
            raise ValidationError("resonance must be a Resonance")
        object.__setattr__(self, "prefactor", as_complex(self.prefactor, "prefactor"))
        object.__setattr__(self, "tau_grid", _tau_array(self.tau_grid))


def taylor_profile(p: TaylorParams, mode: str = "exact", cfg: QuadratureConfig = DEFAULT_CONFIG,
                   strategy: str = "auto") -> AmplitudeSeries:
    """Wavefront amplitude against retarded time tau (mode "exact" or "wwa")."""
    R = p.resonance
    tau = p.tau_grid
    values = np.zeros(tau.size, dtype=complex)
    errors = np.zeros(tau.size)
    if mode == "wwa":
        amp = p.prefactor * -2j * math.pi
        for i, s in enumerate(tau.tolist()):
            if s > 0:
                values[i] = amp * math.exp(-0.5 * R.Gamma * s)
        return AmplitudeSeries("bw_fullline", tau, values, errors)
    if mode != "exact":
        raise ValidationError("mode must be 'exact' or 'wwa'", mode=mode)
    if strategy not in STRATEGIES:
        raise ValidationError("unknown strategy", strategy=strategy)
    for i, s in enumerate(tau.tolist()):
        r = bw_halfline_amp(_ONE, R, s, cfg, strategy)
        phase = np.exp(1j * R.E_R * s)
        values[i] = p.prefactor * phase * r.value
        errors[i] = abs(p.prefactor) * r.est_error
    return AmplitudeSeries("bw_halfline", tau, values, errors)


@dataclass(frozen=True)
class ScullyParams:
    omega: float
    Gamma: float
    delta_r: float
    c: float = 1.0
    prefactor: complex = 1.0

    def __post_init__(self):
        for name in ("omega", "Gamma", "delta_r", "c"):
            require_positive(name, getattr(self, name))
            object.__setattr__(self, name, float(getattr(self, name)))
        object.__setattr__(self, "prefactor", as_complex(self.prefactor, "prefactor"))

    @property
    def resonance(self) -> Resonance:
        return Resonance(self.omega, self.Gamma)

    @property
    def transit_time(self) -> float:
        return self.delta_r / self.c

    @property
    def wwa_prefactor(self) -> complex:
        z = self.resonance.pole
        return -2j * math.pi * self.prefactor * z * z / self.c ** 3


def _check_time(t) -> float:
    require_finite("t", t)
    t = float(t)
    if not t > 0:
        raise DomainError("correlation amplitude needs t > 0", t=t)
    return t


def scully_terms(p: ScullyParams, t: float, cfg: QuadratureConfig = DEFAULT_CONFIG) -> tuple[IntegralResult, IntegralResult]:
    """The outgoing (mu_1) and incoming (mu_2) energy integrals, without prefactor."""
    t = _check_time(t)
    R = p.resonance
    if t == p.transit_time:
        raise DomainError("t = dr/c makes the outgoing phase vanish; the integral diverges", t=t)
    # bw_halfline_amp integrates exp(-i E t'), so pass t' = -mu
    out = bw_halfline_amp(_K_SQUARED, R, t - p.transit_time, cfg)
    inc = bw_halfline_amp(_K_SQUARED, R, t + p.transit_time, cfg)
    return out, inc


def scully_exact(p: ScullyParams, t: float, cfg: QuadratureConfig = DEFAULT_CONFIG) -> IntegralResult:
    out, inc = scully_terms(p, t, cfg)
    scale = p.prefactor / p.c ** 3
    return IntegralResult(scale * (out.value - inc.value), abs(scale) * (out.est_error + inc.est_error),
                          out.evals + inc.evals, out.converged and inc.converged,
                          out.limited_by or inc.limited_by)


def scully_wwa(p: ScullyParams, t: float) -> complex:
    t = _check_time(t)
    tau = t - p.transit_time
    if tau <= 0:
        return 0j
    return p.wwa_prefactor * np.exp(complex(-0.5 * p.Gamma * tau, -p.omega * tau))


def scully_g1(p: ScullyParams, t: float, cfg: QuadratureConfig = DEFAULT_CONFIG) -> tuple[complex, complex]:
    """(exact, wwa) correlation amplitudes at lab time ``t``."""
    return scully_exact(p, t, cfg).value, scully_wwa(p, t)


def scully_profile(p: ScullyParams, tau, mode: str = "exact",
                   cfg: QuadratureConfig = DEFAULT_CONFIG) -> AmplitudeSeries:
    """Correlation amplitude against retarded time tau = t - dr/c."""
    tau = _tau_array(tau)
    if np.any(tau <= -p.transit_time):
        raise ValidationError("tau must exceed -dr/c (lab time t > 0)", transit_time=p.transit_time)
    values = np.zeros(tau.size, dtype=complex)
    errors = np.zeros(tau.size)
    for i, s in enumerate(tau.tolist()):
        t = p.transit_time + s
        if mode == "wwa":
            values[i] = scully_wwa(p, t) if s > 0 else 0j
        elif mode == "exact":
            r = scully_exact(p, t, cfg)
            values[i], errors[i] = r.value, r.est_error
        else:
            raise ValidationError("mode must be 'exact' or 'wwa'", mode=mode)
    return AmplitudeSeries("bw_fullline" if mode == "wwa" else "bw_halfline", tau, values, errors)


@dataclass(frozen=True)
class CausalityReport:
    taus: np.ndarray
    precursor_curve: np.ndarray
    errors: np.ndarray
    max_precursor: float
    wwa_precursor: float
    threshold: float
    hegerfeldt_flag: bool
    reference_intensity: float

    def to_json(self) -> dict:
        return {
            "taus": self.taus.tolist(),
            "precursor_curve": self.precursor_curve.tolist(),
            "errors": self.errors.tolist(),
            "max_precursor": self.max_precursor,
            "wwa_precursor": self.wwa_precursor,
            "threshold": self.threshold,
            "hegerfeldt_flag": self.hegerfeldt_flag,
            "reference_intensity": self.reference_intensity,
        }


def _precursor_report(series: AmplitudeSeries, reference_intensity: float) -> CausalityReport:
    curve = series.abs2
    max_err = float(series.errors.max())
    threshold = (PRECURSOR_FACTOR * max_err) ** 2
    max_p = float(curve.max())
    return CausalityReport(
        taus=series.times,
        precursor_curve=curve,
        errors=series.errors,
        max_precursor=max_p,
        wwa_precursor=0.0,
        threshold=threshold,
        hegerfeldt_flag=bool(max_p > threshold),
        reference_intensity=float(reference_intensity),
    )


def _negative_part(tau_grid) -> np.ndarray:
    tau = _tau_array(tau_grid)
    tau = tau[tau < 0]
    if tau.size == 0:
        raise ValidationError("causality scan needs tau < 0 samples")
    return tau


def causality_scan(p: ScullyParams, tau_grid, cfg: QuadratureConfig = DEFAULT_CONFIG) -> CausalityReport:
    """Exact |G|^2 before the light-cone arrival (tau < 0).

    The flag is raised when the largest precursor amplitude exceeds
    PRECURSOR_FACTOR times the largest quadrature error bound on the scan;
    ``threshold`` is that bound squared so it compares with |G|^2 directly.
    ``reference_intensity`` is the causal arrival intensity |G_wwa(0+)|^2.
    """
    series = scully_profile(p, _negative_part(tau_grid), "exact", cfg)
    return _precursor_report(series, abs(p.wwa_prefactor) ** 2)


def taylor_causality(p: TaylorParams, cfg: QuadratureConfig = DEFAULT_CONFIG) -> CausalityReport:
    """The same precursor test for the wavefront, on the tau < 0 part of ``p.tau_grid``."""
    q = TaylorParams(p.resonance, p.prefactor, _negative_part(p.tau_grid))
    series = taylor_profile(q, "exact", cfg)
    return _precursor_report(series, abs(2 * math.pi * p.prefactor) ** 2)
