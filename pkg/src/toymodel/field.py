"""Arithmetic in the prime field F_p."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .errors import FieldError


@lru_cache(maxsize=None)
def is_prime(n: int) -> bool:
    """Trial division; moduli here are small."""
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def check_prime(p: int) -> int:
    if isinstance(p, bool) or not isinstance(p, int):
        raise FieldError(f"modulus must be an int, got {p!r}")
    if not is_prime(p):
        raise FieldError(f"modulus {p} is not prime")
    return p


@dataclass(frozen=True, order=True)
class FieldElement:
    """An element of F_p. ``value`` is reduced into [0, p) on construction."""

    value: int
    modulus: int

    def __post_init__(self):
        check_prime(self.modulus)
        object.__setattr__(self, "value", int(self.value) % self.modulus)

    def _coerce(self, other) -> FieldElement:
        if isinstance(other, FieldElement):
            if other.modulus != self.modulus:
                raise FieldError(
                    f"modulus mismatch: {self.modulus} vs {other.modulus}"
                )
            return other
        if isinstance(other, int):
            return FieldElement(other, self.modulus)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return FieldElement(self.value + other.value, self.modulus)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return FieldElement(self.value - other.value, self.modulus)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return FieldElement(self.value * other.value, self.modulus)

    __rmul__ = __mul__

    def __neg__(self):
        return FieldElement(-self.value, self.modulus)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def inverse(self) -> FieldElement:
        if self.value == 0:
            raise FieldError("zero has no multiplicative inverse")
        # Fermat: a^(p-2) = a^-1 for prime p
        return FieldElement(pow(self.value, self.modulus - 2, self.modulus), self.modulus)

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"FieldElement({self.value} mod {self.modulus})"


def fp_add(a: FieldElement, b: FieldElement) -> FieldElement:
    return a + b


def fp_mul(a: FieldElement, b: FieldElement) -> FieldElement:
    return a * b


def fp_inv(a: FieldElement) -> FieldElement:
    return a.inverse()


def elements(p: int) -> list[FieldElement]:
    """All elements of F_p in increasing order."""
    check_prime(p)
    return [FieldElement(v, p) for v in range(p)]
