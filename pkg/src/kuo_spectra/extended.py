"""A tagged extended real number.

Characteristic quantities of a profile may be infinite when the set they are
taken over is empty.  Those cases are carried as an explicit tag instead of a
float sentinel so that downstream code has to decide what an infinite value
means for it.
"""

import math
from dataclasses import dataclass

FINITE = "finite"
POS_INF = "+inf"
NEG_INF = "-inf"


@dataclass(frozen=True)
class ExtendedReal:
    kind: str
    value: float = 0.0

    def __post_init__(self):
        if self.kind not in (FINITE, POS_INF, NEG_INF):
            raise ValueError(f"unknown extended real kind {self.kind!r}")
        if self.kind == FINITE and not math.isfinite(self.value):
            raise ValueError("finite extended real needs a finite value")

    @classmethod
    def finite(cls, x):
        return cls(FINITE, float(x))

    @classmethod
    def pos_inf(cls):
        return cls(POS_INF)

    @classmethod
    def neg_inf(cls):
        return cls(NEG_INF)

    @property
    def is_finite(self):
        return self.kind == FINITE

    def to_float(self):
        if self.kind == FINITE:
            return self.value
        return math.inf if self.kind == POS_INF else -math.inf

    def scale(self, factor):
        """Multiply by a nonzero finite real."""
        if factor == 0:
            raise ValueError("scaling an extended real by zero")
        if self.is_finite:
            return ExtendedReal.finite(self.value * factor)
        flip = factor < 0
        if (self.kind == POS_INF) != flip:
            return ExtendedReal.pos_inf()
        return ExtendedReal.neg_inf()

    def to_json(self):
        return self.value if self.is_finite else self.kind

    @classmethod
    def from_json(cls, obj):
        if obj in (POS_INF, NEG_INF):
            return cls(obj)
        return cls.finite(obj)

    def _key(self, other):
        if isinstance(other, ExtendedReal):
            return other.to_float()
        return float(other)

    def __lt__(self, other):
        return self.to_float() < self._key(other)

    def __le__(self, other):
        return self.to_float() <= self._key(other)

    def __gt__(self, other):
        return self.to_float() > self._key(other)

    def __ge__(self, other):
        return self.to_float() >= self._key(other)

    def __repr__(self):
        return f"ExtendedReal({self.value!r})" if self.is_finite else f"ExtendedReal({self.kind!r})"


def ext_min(a, b):
    return a if a <= b else b


def ext_max(a, b):
    return a if a >= b else b
