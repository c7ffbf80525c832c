"""Exact dyadic probabilities.

Every probability that shows up in the guess accounting is of the form
``k / 2**e``; keeping the numerator and the exponent as Python integers
means sums and comparisons never round.
"""

from __future__ import annotations

from fractions import Fraction
from functools import total_ordering
from numbers import Rational


def _as_fraction(value) -> Fraction:
    if isinstance(value, ExactProb):
        return value.as_fraction()
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    raise TypeError(f"cannot compare ExactProb with {type(value).__name__}")


@total_ordering
class ExactProb:
    """A non-negative dyadic rational ``numerator / 2**log2_denominator``.

    Stored in lowest terms: the numerator is odd, or zero with exponent 0.
    Values above one are allowed for intermediate union-bound sums; use
    :meth:`is_probability` where the [0, 1] range matters.
    """

    __slots__ = ("numerator", "log2_denominator")

    def __init__(self, numerator: int, log2_denominator: int = 0):
        if numerator < 0 or log2_denominator < 0:
            raise ValueError("ExactProb needs a non-negative numerator and exponent")
        if numerator == 0:
            log2_denominator = 0
        else:
            shift = min((numerator & -numerator).bit_length() - 1, log2_denominator)
            numerator >>= shift
            log2_denominator -= shift
        object.__setattr__(self, "numerator", numerator)
        object.__setattr__(self, "log2_denominator", log2_denominator)

    def __setattr__(self, name, value):
        raise AttributeError("ExactProb is immutable")

    @classmethod
    def zero(cls) -> ExactProb:
        return cls(0)

    @classmethod
    def one(cls) -> ExactProb:
        return cls(1)

    @classmethod
    def pow2(cls, exponent: int) -> ExactProb:
        """``2**-exponent``."""
        return cls(1, exponent)

    @classmethod
    def from_fraction(cls, value) -> ExactProb:
        frac = Fraction(value)
        den = frac.denominator
        if den & (den - 1):
            raise ValueError(f"{frac} is not a dyadic rational")
        return cls(frac.numerator, den.bit_length() - 1)

    @property
    def denominator(self) -> int:
        return 1 << self.log2_denominator

    def as_fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    def is_probability(self) -> bool:
        return self.numerator <= self.denominator

    def _align(self, other: ExactProb) -> tuple[int, int, int]:
        e = max(self.log2_denominator, other.log2_denominator)
        return (
            self.numerator << (e - self.log2_denominator),
            other.numerator << (e - other.log2_denominator),
            e,
        )

    def __add__(self, other):
        if isinstance(other, int):
            other = ExactProb(other)
        if not isinstance(other, ExactProb):
            return NotImplemented
        a, b, e = self._align(other)
        return ExactProb(a + b, e)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, int):
            other = ExactProb(other)
        if not isinstance(other, ExactProb):
            return NotImplemented
        a, b, e = self._align(other)
        if b > a:
            raise ValueError("ExactProb subtraction would go negative")
        return ExactProb(a - b, e)

    def __rsub__(self, other):
        if isinstance(other, int):
            return ExactProb(other) - self
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, int):
            return ExactProb(self.numerator * other, self.log2_denominator)
        if not isinstance(other, ExactProb):
            return NotImplemented
        return ExactProb(self.numerator * other.numerator,
                         self.log2_denominator + other.log2_denominator)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> ExactProb:
        if k < 0:
            raise ValueError("negative powers are not dyadic")
        return ExactProb(self.numerator ** k, self.log2_denominator * k)

    def __eq__(self, other):
        if isinstance(other, ExactProb):
            return (self.numerator == other.numerator
                    and self.log2_denominator == other.log2_denominator)
        try:
            return self.as_fraction() == _as_fraction(other)
        except TypeError:
            return NotImplemented

    def __lt__(self, other):
        if isinstance(other, ExactProb):
            a, b, _ = self._align(other)
            return a < b
        try:
            return self.as_fraction() < _as_fraction(other)
        except TypeError:
            return NotImplemented

    def __hash__(self):
        return hash(self.as_fraction())

    def __float__(self):
        return float(self.as_fraction())

    def __repr__(self):
        return f"ExactProb({self.numerator}, {self.log2_denominator})"

    def __str__(self):
        if self.log2_denominator == 0:
            return str(self.numerator)
        return f"{self.numerator}/2^{self.log2_denominator}"
