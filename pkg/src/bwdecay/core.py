"""Shared value types, validation helpers and the error taxonomy.

Units: hbar = 1, so energies and inverse times share one unit.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional

import numpy as np


class ErrorKind(str, Enum):
    VALIDATION = "validation"
    DOMAIN = "domain"
    INADMISSIBLE_FORM_FACTOR = "inadmissible_form_factor"
    QUADRATURE_NONCONVERGENCE = "quadrature_nonconvergence"
    BRANCH_CUT_HIT = "branch_cut_hit"


class EngineError(Exception):
    """Base class for every error raised by the engine.

    ``kind`` is one of :class:`ErrorKind`; ``context`` carries the offending
    inputs so that callers (the CLI in particular) can report them.
    """

    kind: ErrorKind = ErrorKind.VALIDATION

    def __init__(self, message: str, **context: Any):
        super().__init__(message)
        self.message = message
        self.context = context

    def one_line(self) -> str:
        ctx = " ".join(f"{k}={v!r}" for k, v in sorted(self.context.items()))
        return f"error kind={self.kind.value} message={self.message!r}" + (f" {ctx}" if ctx else "")


class ValidationError(EngineError, ValueError):
    kind = ErrorKind.VALIDATION


class DomainError(EngineError, ValueError):
    kind = ErrorKind.DOMAIN


class InadmissibleFormFactorError(EngineError):
    kind = ErrorKind.INADMISSIBLE_FORM_FACTOR


class QuadratureNonConvergence(EngineError, ArithmeticError):
    kind = ErrorKind.QUADRATURE_NONCONVERGENCE


class BranchCutError(EngineError, ValueError):
    kind = ErrorKind.BRANCH_CUT_HIT


def require_finite(name: str, value: Any) -> None:
    """Raise ValidationError unless ``value`` (real or complex) is finite."""
    try:
        ok = cmath.isfinite(complex(value))
    except (TypeError, ValueError):
        raise ValidationError(f"{name} is not a number", **{name: value}) from None
    if not ok:
        raise ValidationError(f"{name} must be finite", **{name: value})


def require_positive(name: str, value: float) -> None:
    require_finite(name, value)
    if isinstance(value, complex) or not value > 0:
        raise ValidationError(f"{name} must be a real number > 0", **{name: value})


@dataclass(frozen=True)
class Resonance:
    """Resonance with real position ``E_R`` and width ``Gamma``."""

    E_R: float
    Gamma: float

    def __post_init__(self):
        require_positive("E_R", self.E_R)
        require_positive("Gamma", self.Gamma)
        object.__setattr__(self, "E_R", float(self.E_R))
        object.__setattr__(self, "Gamma", float(self.Gamma))

    @property
    def pole(self) -> complex:
        """Complex pole E_R - i Gamma/2 (open fourth quadrant)."""
        return complex(self.E_R, -0.5 * self.Gamma)

    def scaled(self, lam: float) -> "Resonance":
        return Resonance(lam * self.E_R, lam * self.Gamma)


def make_resonance(E_R: float, Gamma: float) -> Resonance:
    return Resonance(E_R, Gamma)


SPACINGS = ("linear", "logarithmic")


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing grid of positive times."""

    start: float
    stop: float
    points: int
    spacing: str = "linear"
    samples: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        require_positive("start", self.start)
        require_finite("stop", self.stop)
        if not self.stop > self.start:
            raise ValidationError("stop must exceed start", start=self.start, stop=self.stop)
        if isinstance(self.points, bool) or int(self.points) != self.points or self.points < 2:
            raise ValidationError("points must be an integer >= 2", points=self.points)
        if self.spacing not in SPACINGS:
            raise ValidationError("spacing must be 'linear' or 'logarithmic'", spacing=self.spacing)
        n = int(self.points)
        if self.spacing == "linear":
            s = np.linspace(self.start, self.stop, n)
        else:
            s = np.geomspace(self.start, self.stop, n)
        # pin the endpoints exactly; geomspace can be off by an ulp
        s[0], s[-1] = self.start, self.stop
        if not np.all(np.diff(s) > 0):
            raise ValidationError("grid is not strictly increasing (too many points for the range)",
                                  start=self.start, stop=self.stop, points=n)
        s.setflags(write=False)
        object.__setattr__(self, "points", n)
        object.__setattr__(self, "samples", s)

    def __len__(self) -> int:
        return self.points

    def __iter__(self):
        return iter(self.samples.tolist())


def make_time_grid(start: float, stop: float, points: int, spacing: str = "linear") -> TimeGrid:
    return TimeGrid(start, stop, points, spacing)


MODEL_TAGS = ("bw_halfline", "bw_fullline", "complex_delta", "background")


@dataclass(frozen=True)
class AmplitudeSeries:
    """Complex amplitude sampled at ``times`` for one model.

    ``times`` is usually ``grid.samples``; case studies use retarded-time
    grids that may contain negative samples, in which case ``grid`` is None.
    """

    model: str
    times: np.ndarray
    values: np.ndarray
    errors: Optional[np.ndarray] = None
    grid: Optional[TimeGrid] = None

    def __post_init__(self):
        if self.model not in MODEL_TAGS:
            raise ValidationError("unknown model tag", model=self.model)
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=complex)
        if values.shape != times.shape:
            raise ValidationError("values and times differ in length",
                                  n_values=values.size, n_times=times.size)
        if not np.all(np.isfinite(values)):
            raise ValidationError("amplitude values must be finite", model=self.model)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        if self.errors is not None:
            errors = np.asarray(self.errors, dtype=float)
            if errors.shape != times.shape or not np.all(np.isfinite(errors)) or np.any(errors < 0):
                raise ValidationError("errors must be finite, non-negative, one per sample",
                                      model=self.model)
            object.__setattr__(self, "errors", errors)

    def __len__(self) -> int:
        return self.times.size

    @property
    def abs2(self) -> np.ndarray:
        v = self.values
        return v.real * v.real + v.imag * v.imag


def as_complex(value: Any, name: str = "value") -> complex:
    """Parse a complex from a number or a ``[re, im]`` pair and check finiteness."""
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValidationError(f"{name} must be a number or [re, im]", **{name: value})
        value = complex(float(value[0]), float(value[1]))
    require_finite(name, value)
    return complex(value)


def ulp_distance(a: complex, b: complex) -> float:
    """Largest componentwise distance between two complex numbers in units of
    the last place of the larger component."""
    a, b = complex(a), complex(b)
    scale = max(abs(a.real), abs(a.imag), abs(b.real), abs(b.imag))
    if scale == 0.0:
        return 0.0
    return max(abs(a.real - b.real), abs(a.imag - b.imag)) / math.ulp(scale)
