"""Exact trigonometric vector fields on the circle.

A field is v(theta) d/dtheta with v a truncated Fourier series held with
rational coefficients.  Products expand through product-to-sum identities,
so bracket identities can be checked coefficient by coefficient; nothing
in this module rounds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import zip_longest
from typing import Union

import numpy as np

Rational = Union[int, str, Fraction]

_ZERO = Fraction(0)
_HALF = Fraction(1, 2)


def _frac(value: Rational) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, str)):
        return Fraction(value)
    raise TypeError(f"expected int, str or Fraction, got {type(value).__name__}")


@dataclass(frozen=True, eq=False)
class TrigPoly:
    """Truncated Fourier series c0 + sum_n (a_n cos nt + b_n sin nt).

    Coefficient tuples hold exactly ``max_mode`` entries each.  Trailing
    zero modes are legal; equality compares mode by mode after zero
    extension, so the same field in two lengths is one value.
    """

    c0: Fraction
    cos_coeffs: tuple[Fraction, ...]
    sin_coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "c0", _frac(self.c0))
        object.__setattr__(self, "cos_coeffs", tuple(_frac(a) for a in self.cos_coeffs))
        object.__setattr__(self, "sin_coeffs", tuple(_frac(b) for b in self.sin_coeffs))
        if len(self.cos_coeffs) != len(self.sin_coeffs):
            raise ValueError("cos and sin coefficient tuples must have equal length")

    # ---- constructors ----

    @staticmethod
    def zero() -> "TrigPoly":
        return TrigPoly(_ZERO, (), ())

    @staticmethod
    def constant(coeff: Rational = 1) -> "TrigPoly":
        """The rigid-rotation field coeff * d/dtheta."""
        return TrigPoly(_frac(coeff), (), ())

    @staticmethod
    def cosine(mode: int, coeff: Rational = 1) -> "TrigPoly":
        if mode < 0:
            raise ValueError("mode must be >= 0")
        if mode == 0:
            return TrigPoly.constant(coeff)
        cos = [_ZERO] * mode
        cos[mode - 1] = _frac(coeff)
        return TrigPoly(_ZERO, tuple(cos), (_ZERO,) * mode)

    @staticmethod
    def sine(mode: int, coeff: Rational = 1) -> "TrigPoly":
        if mode < 1:
            raise ValueError("mode must be >= 1")
        sin = [_ZERO] * mode
        sin[mode - 1] = _frac(coeff)
        return TrigPoly(_ZERO, (_ZERO,) * mode, tuple(sin))

    @staticmethod
    def from_coeffs(c0: Rational, cos, sin) -> "TrigPoly":
        cos = tuple(_frac(a) for a in cos)
        sin = tuple(_frac(b) for b in sin)
        n = max(len(cos), len(sin))
        cos = cos + (_ZERO,) * (n - len(cos))
        sin = sin + (_ZERO,) * (n - len(sin))
        return TrigPoly(_frac(c0), cos, sin)

    # ---- structure ----

    @property
    def max_mode(self) -> int:
        return len(self.cos_coeffs)

    def effective_max_mode(self) -> int:
        """Highest mode with a nonzero coefficient (0 for constant fields)."""
        for n in range(self.max_mode, 0, -1):
            if self.cos_coeffs[n - 1] != 0 or self.sin_coeffs[n - 1] != 0:
                return n
        return 0

    def is_zero(self) -> bool:
        return self.c0 == 0 and self.effective_max_mode() == 0

    def mode(self, n: int) -> tuple[Fraction, Fraction]:
        """(cos, sin) coefficient pair of mode n; mode 0 returns (c0, 0)."""
        if n == 0:
            return self.c0, _ZERO
        if n <= self.max_mode:
            return self.cos_coeffs[n - 1], self.sin_coeffs[n - 1]
        return _ZERO, _ZERO

    def trimmed(self) -> "TrigPoly":
        n = self.effective_max_mode()
        return TrigPoly(self.c0, self.cos_coeffs[:n], self.sin_coeffs[:n])

    def coefficient_vector(self, cap: int) -> list[Fraction]:
        """(c0, a_1..a_cap, b_1..b_cap), zero-extended; needs cap >= content."""
        if self.effective_max_mode() > cap:
            raise ValueError("coefficient_vector cap below field content")
        vec = [self.c0]
        vec.extend(self.cos_coeffs[n] if n < self.max_mode else _ZERO for n in range(cap))
        vec.extend(self.sin_coeffs[n] if n < self.max_mode else _ZERO for n in range(cap))
        return vec

    # ---- equality ----

    def __eq__(self, other) -> bool:
        if not isinstance(other, TrigPoly):
            return NotImplemented
        if self.c0 != other.c0:
            return False
        for a, b in zip_longest(self.cos_coeffs, other.cos_coeffs, fillvalue=_ZERO):
            if a != b:
                return False
        for a, b in zip_longest(self.sin_coeffs, other.sin_coeffs, fillvalue=_ZERO):
            if a != b:
                return False
        return True

    def __hash__(self):
        t = self.trimmed()
        return hash((t.c0, t.cos_coeffs, t.sin_coeffs))

    # ---- linear structure ----

    def __add__(self, other: "TrigPoly") -> "TrigPoly":
        cos = tuple(a + b for a, b in zip_longest(self.cos_coeffs, other.cos_coeffs, fillvalue=_ZERO))
        sin = tuple(a + b for a, b in zip_longest(self.sin_coeffs, other.sin_coeffs, fillvalue=_ZERO))
        return TrigPoly(self.c0 + other.c0, cos, sin)

    def __sub__(self, other: "TrigPoly") -> "TrigPoly":
        return self + (-other)

    def __neg__(self) -> "TrigPoly":
        return self.scale(-1)

    def scale(self, factor: Rational) -> "TrigPoly":
        f = _frac(factor)
        return TrigPoly(
            f * self.c0,
            tuple(f * a for a in self.cos_coeffs),
            tuple(f * b for b in self.sin_coeffs),
        )

    # ---- products and derivative ----

    def __mul__(self, other: "TrigPoly") -> "TrigPoly":
        """Pointwise product, expanded exactly via product-to-sum."""
        n_out = self.max_mode + other.max_mode
        cos = [_ZERO] * (n_out + 1)  # index 0 carries the constant term
        sin = [_ZERO] * (n_out + 1)

        def add_cos(k: int, amount: Fraction):
            cos[abs(k)] += amount

        def add_sin(k: int, amount: Fraction):
            if k > 0:
                sin[k] += amount
            elif k < 0:
                sin[-k] -= amount
            # sin(0) == 0: drop

        a = (self.c0,) + self.cos_coeffs
        b = (_ZERO,) + self.sin_coeffs
        c = (other.c0,) + other.cos_coeffs
        d = (_ZERO,) + other.sin_coeffs
        for m in range(len(a)):
            for n in range(len(c)):
                s, diff = m + n, m - n
                cc = a[m] * c[n]
                if cc:  # cos*cos = (cos(m-n) + cos(m+n)) / 2
                    add_cos(diff, cc * _HALF)
                    add_cos(s, cc * _HALF)
                ss = b[m] * d[n]
                if ss:  # sin*sin = (cos(m-n) - cos(m+n)) / 2
                    add_cos(diff, ss * _HALF)
                    add_cos(s, -ss * _HALF)
                cs = a[m] * d[n]
                if cs:  # cos(m)*sin(n) = (sin(m+n) - sin(m-n)) / 2
                    add_sin(s, cs * _HALF)
                    add_sin(diff, -cs * _HALF)
                sc = b[m] * c[n]
                if sc:  # sin(m)*cos(n) = (sin(m+n) + sin(m-n)) / 2
                    add_sin(s, sc * _HALF)
                    add_sin(diff, sc * _HALF)
        return TrigPoly(cos[0], tuple(cos[1:]), tuple(sin[1:]))

    def derivative(self) -> "TrigPoly":
        cos = tuple(n * b for n, b in enumerate(self.sin_coeffs, start=1))
        sin = tuple(-n * a for n, a in enumerate(self.cos_coeffs, start=1))
        return TrigPoly(_ZERO, cos, sin)

    # ---- presentation / serialization ----

    def pretty(self) -> str:
        parts = []
        if self.c0:
            parts.append(str(self.c0))
        for n in range(1, self.max_mode + 1):
            a, b = self.mode(n)
            if a:
                parts.append(f"{a} cos{n}")
            if b:
                parts.append(f"{b} sin{n}")
        return " + ".join(parts) if parts else "0"

    def __repr__(self):
        return f"TrigPoly({self.pretty()!r})"

    def to_json_dict(self) -> dict:
        return {
            "c0": str(self.c0),
            "cos": [str(a) for a in self.cos_coeffs],
            "sin": [str(b) for b in self.sin_coeffs],
        }

    @staticmethod
    def from_json_dict(data: dict) -> "TrigPoly":
        return TrigPoly.from_coeffs(data.get("c0", 0), data.get("cos", ()), data.get("sin", ()))


def bracket(v: TrigPoly, w: TrigPoly) -> TrigPoly:
    """Circle bracket [v, w] = (v' w - w' v) d/dtheta.

    Note the sign: this is the right-translation convention, the negative
    of the commutator that a left-action convention would give.  All
    closure and steering code in this package uses it consistently.
    """
    return v.derivative() * w - w.derivative() * v


def evaluate(v: TrigPoly, theta: float) -> float:
    """Float value of v at a single angle."""
    if not math.isfinite(theta):
        raise ValueError("theta must be finite")
    total = float(v.c0)
    for n in range(1, v.max_mode + 1):
        a, b = v.mode(n)
        if a:
            total += float(a) * math.cos(n * theta)
        if b:
            total += float(b) * math.sin(n * theta)
    return total


def sample(v: TrigPoly, thetas: np.ndarray) -> np.ndarray:
    """Vectorized evaluation on an array of angles."""
    thetas = np.asarray(thetas, dtype=float)
    out = np.full_like(thetas, float(v.c0))
    for n in range(1, v.max_mode + 1):
        a, b = v.mode(n)
        if a:
            out += float(a) * np.cos(n * thetas)
        if b:
            out += float(b) * np.sin(n * thetas)
    return out
