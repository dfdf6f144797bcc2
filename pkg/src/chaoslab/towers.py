"""Level-index numbers for quantities like 2^2^...^t that overflow every float.

A positive ``Tower(h, t)`` stands for exp2 applied h times to the float t.
Values are normalised so that h is minimal, which makes ordering a
lexicographic comparison of (h, t).  Small integers stay exact in the
``exact`` slot until they outgrow ``EXACT_BITS``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import total_ordering
from typing import Optional, Union

EXACT_BITS = 4096
T_LIMIT = 1000.0  # normalise while t < T_LIMIT and h >= 1


@total_ordering
@dataclass(frozen=True)
class Tower:
    h: int
    t: float
    exact: Optional[int] = None

    @classmethod
    def of(cls, v: Union[int, float, "Tower"]) -> "Tower":
        if isinstance(v, Tower):
            return v
        if isinstance(v, int):
            if v <= 0:
                raise ValueError("towers hold positive numbers")
            if v.bit_length() <= EXACT_BITS:
                return cls(0, float(v), v) if v.bit_length() <= 1000 else cls(1, math.log2(v), v)
            return cls(1, _log2_int(v))
        if not v > 0:
            raise ValueError("towers hold positive numbers")
        if v >= 2.0**T_LIMIT:
            return cls(1, math.log2(v))
        return cls(0, float(v))

    @classmethod
    def exp2(cls, x: Union[int, float, "Tower"]) -> "Tower":
        """2^x for positive x (exact when x is a small int)."""
        if isinstance(x, int) and x <= EXACT_BITS:
            return cls.of(1 << x) if x >= 0 else cls(0, 2.0**x)
        x = cls.of(x)
        if x.h == 0 and x.t < T_LIMIT:
            return cls(0, 2.0**x.t)
        return cls(x.h + 1, x.t)

    def log2(self) -> "Tower | float":
        """log2 of the value; a float when it fits, else a Tower."""
        if self.exact is not None:
            return _log2_int(self.exact)
        if self.h == 0:
            return math.log2(self.t)
        if self.h == 1:
            return self.t
        return Tower(self.h - 1, self.t)

    def __float__(self) -> float:
        if self.h == 0:
            return self.t
        return math.inf

    def key(self) -> tuple:
        return (self.h, self.t)

    def __lt__(self, other) -> bool:
        o = Tower.of(other)
        if self.exact is not None and o.exact is not None:
            return self.exact < o.exact
        return self.key() < o.key()

    def __eq__(self, other) -> bool:
        if not isinstance(other, (Tower, int, float)):
            return NotImplemented
        o = Tower.of(other)
        if self.exact is not None and o.exact is not None:
            return self.exact == o.exact
        return self.key() == o.key()

    def __hash__(self):
        return hash(self.key())

    def describe(self) -> str:
        if self.exact is not None and self.exact.bit_length() <= 64:
            return str(self.exact)
        if self.h == 0:
            return repr(self.t)
        if self.h <= 3:
            return "2^" * self.h + f"{self.t:.6g}"
        return f"tower(height={self.h}, top={self.t:.6g})"


def _log2_int(v: int) -> float:
    shift = max(v.bit_length() - 64, 0)
    return math.log2(v >> shift) + shift


def log2_of(v: Union[int, Tower]) -> "Tower | float":
    return Tower.of(v).log2() if not isinstance(v, int) else _log2_int(v)


def add_log2(x: "Tower | float", c: float) -> "Tower | float":
    """log2-domain shift of a magnitude: x + c where x may be a tower.

    At tower heights >= 1 the float c is below the resolution of x and is
    absorbed.
    """
    if isinstance(x, Tower):
        if x.h == 0:
            return x.t + c
        return x
    return x + c


def scale(x: "Tower | float", c: float) -> "Tower | float":
    """c * x for c > 0 with the same absorption rule in the exponent."""
    if isinstance(x, Tower):
        if x.h == 0:
            return x.t * c
        if x.h == 1:
            return Tower(1, x.t + math.log2(c))
        return x
    return x * c


def compare(x: "Tower | float", y: "Tower | float") -> int:
    """Sign of x - y for magnitudes given as floats or towers."""
    if not isinstance(x, Tower) and not isinstance(y, Tower):
        return (x > y) - (x < y)
    if not isinstance(x, Tower) and x <= 0:
        return -1
    if not isinstance(y, Tower) and y <= 0:
        return 1
    xt, yt = Tower.of(x), Tower.of(y)
    return (xt > yt) - (xt < yt)
