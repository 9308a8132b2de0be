"""Extended nonnegative reals carried in log space.

A value is either finite (stored as its natural log, ``-inf`` meaning zero) or
``+inf`` together with a short text witness that records which exponent
comparison decided the divergence.  Infinity is absorbing for sum, product and
max.  The one exception is ``0 * inf``, which follows the measure-theoretic
convention and returns zero.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import total_ordering


def _logaddexp(a: float, b: float) -> float:
    if a == -math.inf:
        return b
    if b == -math.inf:
        return a
    hi, lo = (a, b) if a >= b else (b, a)
    return hi + math.log1p(math.exp(lo - hi))


@total_ordering
@dataclass(frozen=True)
class ExtReal:
    log_value: float
    witness: str | None = None

    def __post_init__(self):
        lv = float(self.log_value)
        if math.isnan(lv):
            raise ValueError("ExtReal log value is NaN")
        if lv == math.inf and not self.witness:
            raise ValueError("an infinite ExtReal needs a witness")
        if lv < math.inf and self.witness is not None:
            object.__setattr__(self, "witness", None)
        object.__setattr__(self, "log_value", lv)

    # constructors
    @classmethod
    def from_log(cls, log_value: float) -> "ExtReal":
        return cls(float(log_value))

    @classmethod
    def from_value(cls, value: float) -> "ExtReal":
        if value < 0:
            raise ValueError("ExtReal is nonnegative")
        if value == 0:
            return cls(-math.inf)
        if math.isinf(value):
            return cls(math.inf, "overflowed input")
        return cls(math.log(value))

    @classmethod
    def zero(cls) -> "ExtReal":
        return cls(-math.inf)

    @classmethod
    def one(cls) -> "ExtReal":
        return cls(0.0)

    @classmethod
    def infinity(cls, witness: str) -> "ExtReal":
        return cls(math.inf, witness)

    # predicates
    @property
    def is_infinite(self) -> bool:
        return self.log_value == math.inf

    @property
    def is_finite(self) -> bool:
        return not self.is_infinite

    @property
    def is_zero(self) -> bool:
        return self.log_value == -math.inf

    @property
    def sign(self) -> int:
        return 0 if self.is_zero else 1

    @property
    def value(self) -> float:
        """Linear value; may overflow to ``inf`` or underflow to 0."""
        if self.is_infinite:
            return math.inf
        try:
            return math.exp(self.log_value)
        except OverflowError:
            return math.inf

    # arithmetic
    def __add__(self, other: "ExtReal | float") -> "ExtReal":
        other = _coerce(other)
        if self.is_infinite:
            return self
        if other.is_infinite:
            return other
        return ExtReal(_logaddexp(self.log_value, other.log_value))

    __radd__ = __add__

    def __mul__(self, other: "ExtReal | float") -> "ExtReal":
        other = _coerce(other)
        if self.is_zero or other.is_zero:
            return ExtReal.zero()
        if self.is_infinite:
            return self
        if other.is_infinite:
            return other
        return ExtReal(self.log_value + other.log_value)

    __rmul__ = __mul__

    def maximum(self, other: "ExtReal | float") -> "ExtReal":
        other = _coerce(other)
        if self.is_infinite:
            return self
        if other.is_infinite:
            return other
        return self if self.log_value >= other.log_value else other

    def power(self, p: float) -> "ExtReal":
        """``self ** p`` for ``p > 0``."""
        if p <= 0:
            raise ValueError("power needs p > 0")
        if self.is_infinite or self.is_zero:
            return self
        return ExtReal(self.log_value * p)

    def root(self, p: float) -> "ExtReal":
        return self.power(1.0 / p)

    # ordering
    def __eq__(self, other) -> bool:
        if not isinstance(other, (ExtReal, int, float)):
            return NotImplemented
        other = _coerce(other)
        return self.log_value == other.log_value

    def __lt__(self, other) -> bool:
        other = _coerce(other)
        return self.log_value < other.log_value

    def __hash__(self) -> int:
        return hash(self.log_value)

    def __repr__(self) -> str:
        if self.is_infinite:
            return f"ExtReal(inf, witness={self.witness!r})"
        return f"ExtReal(log={self.log_value:.12g})"

    def to_csv_fields(self) -> tuple[str, str]:
        """(log value token, witness) for CSV output."""
        if self.is_infinite:
            return "inf", self.witness or ""
        if self.is_zero:
            return "-inf", ""
        return repr(self.log_value), ""


def _coerce(x) -> ExtReal:
    if isinstance(x, ExtReal):
        return x
    return ExtReal.from_value(float(x))


def ext_sum(values) -> ExtReal:
    total = ExtReal.zero()
    for v in values:
        total = total + v
    return total


def ext_max(values) -> ExtReal:
    best = ExtReal.zero()
    for v in values:
        best = best.maximum(v)
    return best
