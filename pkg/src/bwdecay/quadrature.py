"""Numerical integration engines.

* ``integrate_finite`` -- globally adaptive Gauss-Kronrod (7, 15) on [a, b].
* ``integrate_semiinf_decaying`` -- (0, inf) mapped onto (0, 1) by
  ``u = 1 - exp(-rho s)``.
* ``integrate_oscillatory_halfline`` -- brute-force oracle for
  ``int_0^inf f(E) exp(i mu E) / (E - z) dE`` on the real axis.
* ``rotated_contour_background`` -- the same integral moved onto the ray
  ``E = -i s`` (mu < 0) or ``E = +i s`` (mu > 0), plus the residue of the
  pole when the swept quadrant contains it.

Integrands are vectorised: they take a float ndarray and return an ndarray.
Interval contributions are always summed in order of their left endpoint
with ``math.fsum``, so results are bitwise reproducible.

For weights that grow along the real axis (polynomials) the half-line
integral only exists as an Abel limit ``lim_{eps->0} int f e^{-eps E} ...``;
both the oracle tail expansion and the rotated contour produce that limit.
"""
from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import (
    InadmissibleFormFactorError,
    ValidationError,
    require_finite,
    require_positive,
)
from .formfactor import FormFactor, admissibility, eval_complex

log = logging.getLogger(__name__)

EPS = np.finfo(float).eps

# Gauss-Kronrod 15-point abscissae (non-negative half) and weights; the
# 7-point Gauss weights sit on the odd-indexed abscissae.
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])
NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
W_KRONROD = np.concatenate([_WGK[:-1], _WGK[::-1]])
_wg_half = np.zeros(8)
_wg_half[1::2] = _WG
W_GAUSS = np.concatenate([_wg_half[:-1], _wg_half[::-1]])

# multiple of eps * int|g| charged per interval for rounding
ROUNDOFF_FACTOR = 50.0


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    max_depth: int = 40
    max_evals: int = 1_000_000

    def __post_init__(self):
        require_positive("rel_tol", self.rel_tol)
        require_positive("abs_tol", self.abs_tol)
        for name in ("max_depth", "max_evals"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v or v <= 0:
                raise ValidationError(f"{name} must be a positive integer", **{name: v})

    def tolerance(self, value: complex) -> float:
        return max(self.abs_tol, self.rel_tol * abs(value))


DEFAULT_CONFIG = QuadratureConfig()


@dataclass(frozen=True)
class IntegralResult:
    """``limited_by`` says why an unconverged run stopped: "depth" or "evals"
    (caps hit) or "roundoff" (every remaining interval is at its rounding
    floor, so further subdivision cannot help)."""

    value: complex
    est_error: float
    evals: int
    converged: bool
    limited_by: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "value", complex(self.value))
        object.__setattr__(self, "est_error", float(self.est_error))

    def __add__(self, other: "IntegralResult") -> "IntegralResult":
        return IntegralResult(self.value + other.value, self.est_error + other.est_error,
                              self.evals + other.evals, self.converged and other.converged,
                              self.limited_by or other.limited_by)

    def scaled(self, factor: complex) -> "IntegralResult":
        factor = complex(factor)
        return IntegralResult(self.value * factor, self.est_error * abs(factor),
                              self.evals, self.converged, self.limited_by)

    @property
    def usable(self) -> bool:
        """Converged, or stopped only by rounding (the error bound is still honest)."""
        return self.converged or (self.limited_by == "roundoff" and math.isfinite(self.est_error))


def _csum(values: np.ndarray) -> complex:
    return complex(math.fsum(values.real.tolist()), math.fsum(values.imag.tolist()))


def _gk15(g: Callable, a: np.ndarray, b: np.ndarray):
    """Apply the 15-point rule to every [a_i, b_i]; returns (value, err, floor)."""
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    x = c[:, None] + h[:, None] * NODES[None, :]
    fx = np.asarray(g(x.ravel()), dtype=complex).reshape(x.shape)
    if not np.all(np.isfinite(fx)):
        bad = x[~np.isfinite(fx)][0]
        raise ValidationError("integrand is not finite", at=float(bad))
    resk = (fx * W_KRONROD).sum(axis=1) * h
    resg = (fx * W_GAUSS).sum(axis=1) * h
    resabs = (np.abs(fx) * W_KRONROD).sum(axis=1) * h
    mean = (fx * W_KRONROD).sum(axis=1) * 0.5
    resasc = (np.abs(fx - mean[:, None]) * W_KRONROD).sum(axis=1) * h
    err = np.abs(resk - resg)
    m = (resasc > 0) & (err > 0)
    err[m] = resasc[m] * np.minimum(1.0, (200.0 * err[m] / resasc[m]) ** 1.5)
    floor = ROUNDOFF_FACTOR * EPS * resabs
    return resk, err, floor


def wynn_epsilon(seq: list[complex]) -> tuple[complex, float]:
    """Wynn's epsilon extrapolation of a sequence; returns (limit, error)."""
    n = len(seq)
    prev = [0j] * (n + 1)
    cur = list(seq)
    estimates = []
    for k in range(1, n):
        nxt = []
        for j in range(len(cur) - 1):
            diff = cur[j + 1] - cur[j]
            if diff == 0:
                return cur[j + 1], 0.0 if not estimates else abs(cur[j + 1] - estimates[-1])
            nxt.append(prev[j + 1] + 1 / diff)
        prev, cur = cur, nxt
        if k % 2 == 0 and cur:
            estimates.append(cur[-1])
    if len(estimates) < 2:
        return seq[-1], math.inf
    err = abs(estimates[-1] - estimates[-2])
    if len(estimates) >= 3:
        err += abs(estimates[-1] - estimates[-3])
    return estimates[-1], err


def integrate_partition(g: Callable, edges, cfg: QuadratureConfig = DEFAULT_CONFIG) -> IntegralResult:
    """Adaptive integration over consecutive intervals given by ``edges``.

    Every interval whose error exceeds its length-proportional share of the
    tolerance is bisected; intervals whose error is already at the rounding
    floor are left alone.  If the depth cap stops refinement (typically an
    integrable endpoint singularity), the sequence of refinement-round totals
    is extrapolated with Wynn's epsilon algorithm.
    """
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2 or not np.all(np.isfinite(edges)):
        raise ValidationError("need at least two finite edges")
    if not np.all(np.diff(edges) > 0):
        raise ValidationError("edges must be strictly increasing")
    a, b = edges[:-1], edges[1:]
    length = edges[-1] - edges[0]
    val, err, floor = _gk15(g, a, b)
    depth = np.zeros(a.size, dtype=int)
    evals = 15 * a.size
    limited_by = None
    history: list[complex] = []
    while True:
        order = np.argsort(a, kind="stable")
        a, b, val, err, floor, depth = a[order], b[order], val[order], err[order], floor[order], depth[order]
        total = _csum(val)
        history.append(total)
        charged = np.maximum(err, floor)
        est = math.fsum(charged.tolist())
        tol = cfg.tolerance(total)
        if est <= tol:
            break
        share = tol * (b - a) / length
        wanted = (charged > share) & (err > floor)
        split = wanted & (depth < cfg.max_depth)
        if not np.any(split):
            # what is left above the rounding floors decides the label
            excess = math.fsum(err[err > floor].tolist())
            limited_by = "depth" if np.any(wanted) and excess > tol else "roundoff"
            break
        n_split = int(split.sum())
        if evals + 30 * n_split > cfg.max_evals:
            limited_by = "evals"
            break
        sa, sb, sd = a[split], b[split], depth[split] + 1
        mid = 0.5 * (sa + sb)
        na = np.concatenate([sa, mid])
        nb = np.concatenate([mid, sb])
        nv, ne, nf = _gk15(g, na, nb)
        evals += 15 * na.size
        keep = ~split
        a = np.concatenate([a[keep], na])
        b = np.concatenate([b[keep], nb])
        val = np.concatenate([val[keep], nv])
        err = np.concatenate([err[keep], ne])
        floor = np.concatenate([floor[keep], nf])
        depth = np.concatenate([depth[keep], sd, sd])
    if limited_by == "depth" and len(history) >= 5:
        limit, xerr = wynn_epsilon(history[-10:])
        floor_sum = math.fsum(floor.tolist())
        # the unsplittable intervals' own estimates bound what extrapolation removed
        xerr = max(xerr, floor_sum)
        if xerr + floor_sum <= cfg.tolerance(limit) and xerr < est:
            total, est, limited_by = limit, xerr + floor_sum, None
    if limited_by is not None:
        log.debug("adaptive quadrature stopped (%s): est=%g tol=%g evals=%d", limited_by, est, tol, evals)
    converged = limited_by is None
    return IntegralResult(total, est + 2 * EPS * abs(total), evals, converged, limited_by)


def integrate_finite(g: Callable, a: float, b: float, cfg: QuadratureConfig = DEFAULT_CONFIG) -> IntegralResult:
    """Adaptive Gauss-Kronrod estimate of the integral of ``g`` over [a, b]."""
    require_finite("a", a)
    require_finite("b", b)
    if not a < b:
        raise ValidationError("need a < b", a=a, b=b)
    return integrate_partition(g, [a, b], cfg)


def _unit_edges(n: int = 8) -> np.ndarray:
    return np.linspace(0.0, 1.0, n + 1)


def integrate_semiinf_decaying(g: Callable, rho: float, cfg: QuadratureConfig = DEFAULT_CONFIG) -> IntegralResult:
    """Integral of ``g`` over (0, inf) for ``g`` decaying like exp(-rho s).

    Uses ``u = 1 - exp(-rho s)``, so ``ds = du / (rho (1 - u))``.
    """
    require_positive("rho", rho)

    def h(u):
        one_minus = 1.0 - u
        s = -np.log1p(-u) / rho
        return np.asarray(g(s), dtype=complex) / (rho * one_minus)

    return integrate_partition(h, _unit_edges(), cfg)


def integrate_damped(g: Callable, rho: float, cfg: QuadratureConfig = DEFAULT_CONFIG) -> IntegralResult:
    """Integral of ``g(s) exp(-rho s)`` over (0, inf) with the damping
    absorbed exactly by the substitution: it equals
    ``(1/rho) int_0^1 g(-log(1 - u)/rho) du``.
    """
    require_positive("rho", rho)

    def h(u):
        return np.asarray(g(-np.log1p(-u) / rho), dtype=complex)

    return integrate_partition(h, _unit_edges(), cfg).scaled(1.0 / rho)


# ---------------------------------------------------------------- contour


@dataclass(frozen=True)
class RotationPlan:
    phase_coefficient: float
    direction: str
    pole_swept: bool
    residue_term: complex


def rotation_direction(mu: float) -> str:
    return "upper" if mu > 0 else "lower"


def _check_pole_and_phase(z, mu) -> tuple[complex, float]:
    require_finite("z", z)
    require_finite("mu", mu)
    z, mu = complex(z), float(mu)
    if mu == 0.0:
        raise ValidationError("phase coefficient mu must be nonzero", mu=mu)
    if z.imag == 0.0 and z.real >= 0.0:
        raise ValidationError("pole lies on the integration range [0, inf)", z=z)
    return z, mu


def rotation_plan(f: FormFactor, z: complex, mu: float) -> RotationPlan:
    z, mu = _check_pole_and_phase(z, mu)
    direction = rotation_direction(mu)
    if z.real == 0.0:
        raise ValidationError("pole lies on the rotated ray", z=z, direction=direction)
    if direction == "lower":
        swept = z.real > 0 and z.imag < 0
        sign = -1
    else:
        swept = z.real > 0 and z.imag > 0
        sign = 1
    residue = 0j
    if swept:
        residue = sign * 2j * math.pi * eval_complex(f, z) * cmath.exp(1j * mu * z)
    return RotationPlan(mu, direction, swept, residue)


def rotated_contour_background(
    f: FormFactor, z: complex, mu: float, cfg: QuadratureConfig = DEFAULT_CONFIG
) -> tuple[IntegralResult, RotationPlan]:
    """Background integral along the rotated ray and the rotation bookkeeping.

    With ``I`` the half-line integral of ``f(E) exp(i mu E)/(E - z)``,
    ``I = plan.residue_term + background.value``.
    """
    z, mu = _check_pole_and_phase(z, mu)
    direction = rotation_direction(mu)
    verdict = admissibility(f, direction)
    if not verdict.admissible:
        raise InadmissibleFormFactorError(verdict.reason, direction=direction)
    plan = rotation_plan(f, z, mu)
    rho = abs(mu)
    # E = d*s with d = -i (lower) or +i (upper); dE = d ds, exp(i mu E) = exp(-rho s)
    d = -1j if direction == "lower" else 1j

    def g(s):
        e = d * s
        return f.values(e) * d / (e - z)

    bg = integrate_damped(g, rho, cfg)
    if plan.pole_swept:
        bg = IntegralResult(bg.value, bg.est_error + 4 * EPS * abs(plan.residue_term),
                            bg.evals, bg.converged, bg.limited_by)
    return bg, plan


# ----------------------------------------------------------------- oracle

# minimum number of radians of phase covered before the tail expansion
ORACLE_MIN_PHASE = 64.0
_TAYLOR_POINTS = 128
_MAX_TAIL_TERMS = 120


def _singularity_radius(f: FormFactor, z: complex) -> float:
    r = abs(z)
    for p in f.poles:
        r = max(r, abs(p))
    return max(r, 1e-300)


def _tail_expansion(f: FormFactor, z: complex, mu: float, X: float, target: float):
    """Integral of f(E) e^{i mu E}/(E - z) over (X, inf) by repeated
    integration by parts:  -e^{i mu X} sum_k (-1)^k g^(k)(X) / (i mu)^(k+1).

    Derivatives come from Taylor coefficients sampled on a circle of radius
    X/2 about X (FFT of a Cauchy integral).  Returns (value, error) or None
    when the terms stop decreasing before reaching ``target``.
    """
    r = 0.5 * X
    theta = 2 * np.pi * np.arange(_TAYLOR_POINTS) / _TAYLOR_POINTS
    zeta = X + r * np.exp(1j * theta)
    gz = f.values(zeta) / (zeta - z)
    coeffs = np.fft.fft(gz) / _TAYLOR_POINTS  # c_k r^k
    aliasing = EPS * float(np.max(np.abs(gz)))
    total = 0j
    terms = []
    fact_over = 1.0 / (1j * mu)  # k! / (i mu)^(k+1) built incrementally
    prev = math.inf
    last = math.inf
    for k in range(min(_MAX_TAIL_TERMS, _TAYLOR_POINTS // 2)):
        if k > 0:
            fact_over *= k / (1j * mu * r)
        term = ((-1) ** k) * coeffs[k] * fact_over
        mag = abs(term)
        if mag > prev:
            last = prev
            break
        total += term
        terms.append(mag)
        prev = mag
        last = mag
        if mag <= 1e-3 * target:
            break
    err = 2 * last + aliasing * abs(1 / mu) * 4
    if err > target:
        return None
    phase = cmath.exp(1j * mu * X)
    return -phase * total, err


def integrate_oscillatory_halfline(
    f: FormFactor, z: complex, mu: float, cfg: QuadratureConfig = DEFAULT_CONFIG
) -> IntegralResult:
    """Real-axis evaluation of ``int_0^inf f(E) exp(i mu E)/(E - z) dE``.

    [0, E_max] is cut into pieces no longer than pi/(2|mu|), each integrated
    adaptively; the phase is measured from ``c = max(Re z, 0)`` so that the
    rounding of ``mu * E`` stays small near the pole.  The remainder beyond
    E_max comes from an integration-by-parts expansion whose error bound is
    kept below a tenth of max(abs_tol, rel_tol * |g(E_max)| / |mu|).
    """
    z, mu = _check_pole_and_phase(z, mu)
    rho = abs(mu)
    c = max(z.real, 0.0)
    zc = z - c
    X = max(4.0 * _singularity_radius(f, z), ORACLE_MIN_PHASE / rho)
    tail = None
    for _ in range(12):
        # the tail is about g(X)/mu; ask for rel_tol of that, or abs_tol
        scale = abs(complex(f.values(np.array([X + 0j]))[0]) / (X - z)) / rho
        target = max(cfg.abs_tol, cfg.rel_tol * scale) / 10
        tail = _tail_expansion(f, z, mu, X, target)
        if tail is not None:
            break
        X *= 2
    if tail is None:
        log.warning("oracle tail expansion failed to reach %g", target)
        tail = (0j, math.inf)
    piece = math.pi / (2 * rho)
    n_left = math.ceil(c / piece) if c > 0 else 0
    n_right = max(1, math.ceil((X - c) / piece))
    if 15 * (n_left + n_right) > cfg.max_evals:
        log.warning("oracle partition needs %d evaluations, cap is %d", 15 * (n_left + n_right), cfg.max_evals)
        return IntegralResult(0j, math.inf, 0, False, "evals")
    right = np.linspace(0.0, X - c, n_right + 1)
    if n_left:
        edges = np.concatenate([np.linspace(-c, 0.0, n_left + 1)[:-1], right])
    else:
        edges = right

    def g(u):
        return f.values(c + u) * np.exp(1j * mu * u) / (u - zc)

    body = integrate_partition(g, edges, cfg).scaled(cmath.exp(1j * mu * c))
    value = body.value + tail[0]
    est = body.est_error + tail[1]
    converged = body.converged and est <= cfg.tolerance(value)
    limited_by = body.limited_by
    if not converged and limited_by is None:
        limited_by = "roundoff" if math.isfinite(tail[1]) else "evals"
    return IntegralResult(value, est, body.evals + _TAYLOR_POINTS, converged, limited_by)
