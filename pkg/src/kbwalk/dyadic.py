"""Exact dyadic rationals ``num / 2**exp``.

Every event probability in this package has a power-of-two denominator, so
they are carried as (odd numerator, exponent) pairs instead of floats.
Arithmetic closes over the dyadic rationals for ``+``, ``-`` and ``*``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


def _normalize(num: int, exp: int) -> tuple[int, int]:
    if num == 0:
        return 0, 0
    # strip common factors of two; exponent may not go below 0
    tz = (num & -num).bit_length() - 1
    shift = min(tz, exp)
    return num >> shift, exp - shift


@dataclass(frozen=True, order=False)
class Dyadic:
    """Exact number ``num / 2**exp`` stored in lowest terms.

    ``num`` is odd unless the value is zero (then ``exp == 0``) or the value
    is an integer with ``exp == 0``.
    """

    num: int
    exp: int = 0

    def __post_init__(self) -> None:
        if self.exp < 0:
            raise ValueError(f"exponent must be non-negative, got {self.exp}")
        n, e = _normalize(self.num, self.exp)
        object.__setattr__(self, "num", n)
        object.__setattr__(self, "exp", e)

    @classmethod
    def of(cls, value: "Dyadic | Fraction | int") -> "Dyadic":
        if isinstance(value, Dyadic):
            return value
        if isinstance(value, int):
            return cls(value, 0)
        frac = Fraction(value)
        den = frac.denominator
        if den & (den - 1):
            raise ValueError(f"{value} is not a dyadic rational")
        return cls(frac.numerator, den.bit_length() - 1)

    @classmethod
    def from_count(cls, count: int, bits: int) -> "Dyadic":
        """Probability of ``count`` outcomes among ``2**bits`` equally likely ones."""
        return cls(count, bits)

    def as_fraction(self) -> Fraction:
        return Fraction(self.num, 1 << self.exp)

    def __float__(self) -> float:
        return float(self.as_fraction())

    def _align(self, other: "Dyadic") -> tuple[int, int, int]:
        e = max(self.exp, other.exp)
        return self.num << (e - self.exp), other.num << (e - other.exp), e

    def __add__(self, other):
        if not isinstance(other, (Dyadic, int)):
            return NotImplemented
        other = Dyadic.of(other)
        a, b, e = self._align(other)
        return Dyadic(a + b, e)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, (Dyadic, int)):
            return NotImplemented
        other = Dyadic.of(other)
        a, b, e = self._align(other)
        return Dyadic(a - b, e)

    def __rsub__(self, other):
        if not isinstance(other, int):
            return NotImplemented
        return Dyadic.of(other) - self

    def __mul__(self, other):
        if not isinstance(other, (Dyadic, int)):
            return NotImplemented
        other = Dyadic.of(other)
        return Dyadic(self.num * other.num, self.exp + other.exp)

    __rmul__ = __mul__

    def __neg__(self) -> "Dyadic":
        return Dyadic(-self.num, self.exp)

    def __eq__(self, other) -> bool:
        if isinstance(other, Dyadic):
            return self.num == other.num and self.exp == other.exp
        if isinstance(other, (int, Fraction)):
            return self.as_fraction() == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.as_fraction())

    def __lt__(self, other) -> bool:
        return self.as_fraction() < Dyadic.of(other).as_fraction()

    def __le__(self, other) -> bool:
        return self.as_fraction() <= Dyadic.of(other).as_fraction()

    def __gt__(self, other) -> bool:
        return self.as_fraction() > Dyadic.of(other).as_fraction()

    def __ge__(self, other) -> bool:
        return self.as_fraction() >= Dyadic.of(other).as_fraction()

    def __str__(self) -> str:
        if self.exp == 0:
            return str(self.num)
        return f"{self.num}/2^{self.exp}"

    def to_json(self) -> dict:
        """Wire form: numerator as a decimal string, never a float."""
        return {"num": str(self.num), "exp": self.exp}

    @classmethod
    def from_json(cls, obj: dict) -> "Dyadic":
        return cls(int(obj["num"]), int(obj["exp"]))


ZERO = Dyadic(0)
ONE = Dyadic(1)


def dyadic_sum(values) -> Dyadic:
    total = ZERO
    for v in values:
        total = total + v
    return total
