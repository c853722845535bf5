"""Closed catalog of analytic weights f(E) on the scattering spectrum [0, inf).

Every member continues analytically into the right half-plane and grows at
most polynomially there, which is what lets the half-line integral be
rotated onto the imaginary axis.  Gaussian cutoffs are absent on purpose:
``exp(-E^2)`` blows up along the imaginary axis.

JSON form (coefficients ascending in powers of E; a complex number may be
written as ``[re, im]``)::

    {"kind": "constant", "value": 1.0}
    {"kind": "polynomial", "coeffs": [1, 0, 1]}
    {"kind": "rational", "numerator": [1], "denominator": [1, 1]}
    {"kind": "power_law", "alpha": 0.5}
    {"kind": "exp_cutoff", "scale": 5.0}
    {"kind": "product", "factors": [{...}, {...}]}
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from .core import (
    BranchCutError,
    DomainError,
    ValidationError,
    as_complex,
    require_finite,
)

DIRECTIONS = ("lower", "upper")


class FormFactor:
    """Base class. Subclasses implement ``values`` on complex arrays."""

    kind: str = ""

    def values(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @property
    def poles(self) -> tuple[complex, ...]:
        return ()

    def __call__(self, z):
        return eval_complex(self, z)

    def __mul__(self, other: "FormFactor") -> "Product":
        return product(self, other)

    def to_json(self) -> dict:
        raise NotImplementedError

    # overridden where E = 0 is excluded
    def _check_point(self, z: complex) -> None:
        pass


def _coeffs(name: str, seq: Sequence[Any]) -> tuple[complex, ...]:
    if not isinstance(seq, (list, tuple)) or len(seq) == 0:
        raise ValidationError(f"{name} must be a non-empty list of coefficients", **{name: seq})
    out = tuple(as_complex(c, name) for c in seq)
    # trailing zeros change nothing but the reported degree
    while len(out) > 1 and out[-1] == 0:
        out = out[:-1]
    return out


def _jnum(c: complex):
    return c.real if c.imag == 0 else [c.real, c.imag]


@dataclass(frozen=True)
class Constant(FormFactor):
    value: complex = 1.0
    kind = "constant"

    def __post_init__(self):
        object.__setattr__(self, "value", as_complex(self.value, "value"))

    def values(self, z):
        return np.full(np.shape(z), self.value, dtype=complex)

    def to_json(self):
        return {"kind": self.kind, "value": _jnum(self.value)}


@dataclass(frozen=True)
class Polynomial(FormFactor):
    coeffs: tuple = (1.0,)
    kind = "polynomial"

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _coeffs("coeffs", self.coeffs))

    def values(self, z):
        return P.polyval(np.asarray(z, dtype=complex), np.asarray(self.coeffs))

    def to_json(self):
        return {"kind": self.kind, "coeffs": [_jnum(c) for c in self.coeffs]}


@dataclass(frozen=True)
class Rational(FormFactor):
    numerator: tuple = (1.0,)
    denominator: tuple = (1.0,)
    pole_set: tuple = field(init=False, default=())
    kind = "rational"

    def __post_init__(self):
        num = _coeffs("numerator", self.numerator)
        den = _coeffs("denominator", self.denominator)
        if all(c == 0 for c in den):
            raise ValidationError("denominator is identically zero")
        roots = tuple(complex(r) for r in P.polyroots(np.asarray(den))) if len(den) > 1 else ()
        for r in roots:
            tol = 1e-12 * max(1.0, abs(r))
            if abs(r.imag) <= tol and r.real >= -tol:
                raise ValidationError("denominator vanishes on [0, inf)", pole=r)
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "denominator", den)
        object.__setattr__(self, "pole_set", tuple(sorted(roots, key=lambda c: (c.real, c.imag))))

    @property
    def poles(self):
        return self.pole_set

    def values(self, z):
        z = np.asarray(z, dtype=complex)
        return P.polyval(z, np.asarray(self.numerator)) / P.polyval(z, np.asarray(self.denominator))

    def _check_point(self, z):
        for p in self.pole_set:
            if abs(z - p) <= 1e-12 * max(1.0, abs(p)):
                raise DomainError("form factor evaluated at a pole of the rational factor", z=z, pole=p)

    def to_json(self):
        return {"kind": self.kind,
                "numerator": [_jnum(c) for c in self.numerator],
                "denominator": [_jnum(c) for c in self.denominator]}


@dataclass(frozen=True)
class PowerLaw(FormFactor):
    """``E**alpha`` with the principal branch (cut along the negative axis)."""

    alpha: float = 1.0
    kind = "power_law"

    def __post_init__(self):
        require_finite("alpha", self.alpha)
        if isinstance(self.alpha, complex) or not self.alpha > -1:
            raise ValidationError("power_law exponent must be real and > -1", alpha=self.alpha)
        object.__setattr__(self, "alpha", float(self.alpha))

    @property
    def entire(self) -> bool:
        return self.alpha >= 0 and self.alpha == int(self.alpha)

    def values(self, z):
        return np.power(np.asarray(z, dtype=complex), self.alpha)

    def _check_point(self, z):
        if z == 0:
            if self.alpha < 0:
                raise DomainError("E**alpha with alpha < 0 is singular at E = 0", alpha=self.alpha)
            return
        if not self.entire and z.imag == 0 and z.real < 0:
            raise BranchCutError("power_law evaluated on its branch cut", z=z, alpha=self.alpha)

    def to_json(self):
        return {"kind": self.kind, "alpha": self.alpha}


@dataclass(frozen=True)
class ExpCutoff(FormFactor):
    """``exp(-E/scale)``."""

    scale: float = 1.0
    kind = "exp_cutoff"

    def __post_init__(self):
        require_finite("scale", self.scale)
        if isinstance(self.scale, complex) or not self.scale > 0:
            raise ValidationError("exp_cutoff scale must be > 0", scale=self.scale)
        object.__setattr__(self, "scale", float(self.scale))

    def values(self, z):
        return np.exp(-np.asarray(z, dtype=complex) / self.scale)

    def to_json(self):
        return {"kind": self.kind, "scale": self.scale}


@dataclass(frozen=True)
class Product(FormFactor):
    factors: tuple = ()
    kind = "product"

    def __post_init__(self):
        flat: list[FormFactor] = []
        for f in self.factors:
            if not isinstance(f, FormFactor):
                raise ValidationError("product factors must be form factors", factor=f)
            flat.extend(f.factors if isinstance(f, Product) else (f,))
        if not flat:
            raise ValidationError("product needs at least one factor")
        object.__setattr__(self, "factors", tuple(flat))

    @property
    def poles(self):
        return tuple(p for f in self.factors for p in f.poles)

    def values(self, z):
        out = self.factors[0].values(z)
        for f in self.factors[1:]:
            out = out * f.values(z)
        return out

    def _check_point(self, z):
        for f in self.factors:
            f._check_point(z)

    def to_json(self):
        return {"kind": self.kind, "factors": [f.to_json() for f in self.factors]}


def constant(value=1.0) -> Constant:
    return Constant(value)


def polynomial(coeffs) -> Polynomial:
    return Polynomial(tuple(coeffs))


def rational(numerator, denominator) -> Rational:
    return Rational(tuple(numerator), tuple(denominator))


def power_law(alpha: float) -> PowerLaw:
    return PowerLaw(alpha)


def exp_cutoff(scale: float) -> ExpCutoff:
    return ExpCutoff(scale)


def product(*factors: FormFactor) -> Product:
    return Product(tuple(factors))


def eval_real(f: FormFactor, E: float) -> complex:
    """f(E) for real E >= 0."""
    require_finite("E", E)
    if isinstance(E, complex) or E < 0:
        raise DomainError("eval_real needs a real E >= 0", E=E)
    E = float(E)
    f._check_point(complex(E))
    v = complex(f.values(np.array([E + 0j]))[0])
    if _real_valued(f):
        v = complex(v.real, 0.0)
    return v


def eval_complex(f: FormFactor, z) -> complex:
    """Analytic continuation of f to complex ``z``."""
    require_finite("z", z)
    z = complex(z)
    f._check_point(z)
    v = complex(f.values(np.array([z]))[0])
    if not (math.isfinite(v.real) and math.isfinite(v.imag)):
        raise DomainError("form factor is not finite at z", z=z)
    return v


def _real_valued(f: FormFactor) -> bool:
    """True when f is real on (0, inf)."""
    if isinstance(f, Constant):
        return f.value.imag == 0
    if isinstance(f, Polynomial):
        return all(c.imag == 0 for c in f.coeffs)
    if isinstance(f, Rational):
        return all(c.imag == 0 for c in f.numerator + f.denominator)
    if isinstance(f, Product):
        return all(_real_valued(g) for g in f.factors)
    return True


def is_real_valued(f: FormFactor) -> bool:
    return _real_valued(f)


def value_at_zero(f: FormFactor) -> complex:
    """f(0), or the limit when it exists; power laws with alpha < 0 raise."""
    return eval_real(f, 0.0)


@dataclass(frozen=True)
class Admissibility:
    admissible: bool
    direction: str
    reason: str


def _in_quadrant(p: complex, direction: str) -> bool:
    # closed quadrant swept between [0, inf) and the rotated ray
    if p.real < 0:
        return False
    return p.imag <= 0 if direction == "lower" else p.imag >= 0


def admissibility(f: FormFactor, direction: str) -> Admissibility:
    """Can the half-line integral of f be rotated to the ray E = -i s (lower)
    or E = +i s (upper)?

    Every catalog kind grows at most polynomially in the closed right
    half-plane (``|exp(-E/L)| <= 1`` there), so the closing arc vanishes
    against the exponential damping; the only obstruction is a rational
    pole inside the swept quadrant, whose residue the rotation would miss.
    """
    if direction not in DIRECTIONS:
        raise ValidationError("direction must be 'lower' or 'upper'", direction=direction)
    factors = f.factors if isinstance(f, Product) else (f,)
    for g in factors:
        for p in g.poles:
            if _in_quadrant(p, direction):
                return Admissibility(False, direction,
                                     f"rational pole {p} lies in the swept {direction} quadrant")
    kinds = sorted({g.kind for g in factors})
    return Admissibility(True, direction,
                         f"{'/'.join(kinds)}: analytic with polynomial growth in the swept quadrant")


def from_json(obj: Any) -> FormFactor:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ValidationError("form factor must be an object with a 'kind' field", value=obj)
    kind = obj["kind"]
    allowed = {
        "constant": {"value"},
        "polynomial": {"coeffs"},
        "rational": {"numerator", "denominator"},
        "power_law": {"alpha"},
        "exp_cutoff": {"scale"},
        "product": {"factors"},
    }
    if kind not in allowed:
        raise ValidationError("unknown form factor kind", kind=kind)
    extra = set(obj) - allowed[kind] - {"kind"}
    missing = allowed[kind] - set(obj)
    if kind == "constant":
        missing.discard("value")
    if extra or missing:
        raise ValidationError("bad form factor fields", kind=kind,
                              unknown=sorted(extra), missing=sorted(missing))
    if kind == "constant":
        return Constant(obj.get("value", 1.0))
    if kind == "polynomial":
        return Polynomial(tuple(obj["coeffs"]) if isinstance(obj["coeffs"], list) else obj["coeffs"])
    if kind == "rational":
        return Rational(tuple(obj["numerator"]), tuple(obj["denominator"]))
    if kind == "power_law":
        return PowerLaw(obj["alpha"])
    if kind == "exp_cutoff":
        return ExpCutoff(obj["scale"])
    if not isinstance(obj["factors"], list):
        raise ValidationError("product factors must be a list")
    return Product(tuple(from_json(o) for o in obj["factors"]))
