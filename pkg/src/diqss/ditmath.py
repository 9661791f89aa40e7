"""Arithmetic over Z_d, roots of unity on the half-step grid, and the game target.

Phases are carried as integer exponents of the primitive ``2d``-th root of
unity (``omega ** (1/2)``) and only turned into complex numbers at the very
end, so products of many phases never accumulate rounding drift.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence, Union


class ModulusMismatch(ValueError):
    pass


@dataclass(frozen=True)
class Dit:
    value: int
    d: int

    def __post_init__(self):
        if self.d < 2:
            raise ValueError(f"modulus must be >= 2, got {self.d}")
        if not 0 <= self.value < self.d:
            raise ValueError(f"dit value {self.value} outside [0, {self.d - 1}]")

    def __add__(self, other: "Dit") -> "Dit":
        return mod_add(self, other)

    def __neg__(self) -> "Dit":
        return Dit((-self.value) % self.d, self.d)

    def __int__(self) -> int:
        return self.value


@dataclass(frozen=True)
class HalfExponent:
    """``omega ** (numerator / 2)`` with ``omega = exp(2 pi i / d)``."""

    numerator: int
    d: int

    def __add__(self, other: "HalfExponent") -> "HalfExponent":
        _check_modulus(self.d, other.d)
        return HalfExponent(self.numerator + other.numerator, self.d)

    def __neg__(self) -> "HalfExponent":
        return HalfExponent(-self.numerator, self.d)

    def __eq__(self, other) -> bool:
        if not isinstance(other, HalfExponent):
            return NotImplemented
        return self.d == other.d and (self.numerator - other.numerator) % (2 * self.d) == 0

    def __hash__(self) -> int:
        return hash((self.numerator % (2 * self.d), self.d))

    @classmethod
    def whole(cls, k: int, d: int) -> "HalfExponent":
        """``omega ** k`` for integer ``k``."""
        return cls(2 * k, d)


class _Bottom:
    """The undefined target value of an odd-weight game input."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "⊥"

    def __reduce__(self):
        return (_Bottom, ())


BOT = _Bottom()

FValue = Union[Dit, _Bottom]


@dataclass(frozen=True)
class GameInput:
    bits: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "bits", tuple(int(b) for b in self.bits))
        if len(self.bits) < 2:
            raise ValueError("a game input needs at least two players")
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError(f"game input bits must be 0/1, got {self.bits}")

    @classmethod
    def parse(cls, s: str) -> "GameInput":
        return cls(tuple(int(c) for c in s))

    @property
    def weight(self) -> int:
        return sum(self.bits)

    def __len__(self) -> int:
        return len(self.bits)


def _check_modulus(d1: int, d2: int) -> None:
    if d1 != d2:
        raise ModulusMismatch(f"modulus mismatch: {d1} vs {d2}")


def mod_add(a: Dit, b: Dit) -> Dit:
    _check_modulus(a.d, b.d)
    return Dit((a.value + b.value) % a.d, a.d)


def mod_sum(dits: Sequence[Dit], d: int) -> Dit:
    total = Dit(0, d)
    for x in dits:
        total = mod_add(total, x)
    return total


def phase(numerator: int, d: int) -> complex:
    """Complex value of ``omega ** (numerator / 2)``; exact on the eighth-turns."""
    k = numerator % (2 * d)
    # snap the quarter turns so that e.g. omega**(d/2) is exactly -1
    if (4 * k) % (2 * d) == 0:
        return (1, 1j, -1, -1j)[(4 * k) // (2 * d)]
    return cmath.exp(1j * math.pi * k / d)


def omega_pow(t: HalfExponent) -> complex:
    return phase(t.numerator, t.d)


def chi(n: int, j: Dit) -> complex:
    """Character ``chi_n(j) = omega ** (-n j)`` of Z_d."""
    return phase(-2 * n * j.value, j.d)


def f_exponent(bits: Sequence[int], d: int) -> int | None:
    """Integer form of :func:`game_f`: ``None`` for odd weight."""
    w = sum(bits)
    if w % 2:
        return None
    return (w // 2) % d


def game_f(x: GameInput, d: int) -> FValue:
    j = f_exponent(x.bits, d)
    if j is None:
        return BOT
    return Dit(j, d)


def all_inputs(n: int) -> list[tuple[int, ...]]:
    """All ``2**n`` setting strings, first party as the most significant bit."""
    return [tuple((i >> (n - 1 - k)) & 1 for k in range(n)) for i in range(2**n)]


def smallest_prime_at_least(m: int) -> int:
    from sympy import nextprime

    return int(nextprime(m - 1))
