"""Bit strings, LeadingOnes, mutation operators and prior-noise models.

Position ``i`` of a bit string (0-based) is bit ``i`` of an integer, so the
leftmost position of the usual textual notation is the least significant
bit.  ``BitString.from_str("1101")`` therefore has ``LO = 2``.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable

from .rng import RngStream


class ConfigurationError(ValueError):
    """A model or run parameter violates its documented range."""


@dataclass(frozen=True)
class BitString:
    n: int
    value: int

    def __post_init__(self):
        if self.n < 1:
            raise ConfigurationError(f"bit string length must be positive, got {self.n}")
        if not 0 <= self.value < (1 << self.n):
            raise ValueError(f"value {self.value} does not fit in {self.n} bits")

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "BitString":
        bits = list(bits)
        value = 0
        for i, b in enumerate(bits):
            if b not in (0, 1):
                raise ValueError(f"bit {i} is {b!r}, expected 0 or 1")
            value |= b << i
        return cls(len(bits), value)

    @classmethod
    def from_str(cls, text: str) -> "BitString":
        return cls.from_bits(int(c) for c in text)

    @classmethod
    def ones(cls, n: int) -> "BitString":
        return cls(n, (1 << n) - 1)

    @classmethod
    def zeros(cls, n: int) -> "BitString":
        return cls(n, 0)

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple((self.value >> i) & 1 for i in range(self.n))

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i: int) -> int:
        if not -self.n <= i < self.n:
            raise IndexError(i)
        return (self.value >> (i % self.n)) & 1

    def __str__(self) -> str:
        return "".join(map(str, self.bits))

    def flip(self, positions: Iterable[int]) -> "BitString":
        mask = 0
        for p in positions:
            mask ^= 1 << p
        return BitString(self.n, self.value ^ mask)

    def is_ones(self) -> bool:
        return self.value == (1 << self.n) - 1

    def hamming(self, other: "BitString") -> int:
        return (self.value ^ other.value).bit_count()


def leading_ones(x: BitString) -> int:
    """Length of the longest all-ones prefix of ``x``."""
    # lowest zero bit of x is the lowest set bit of x + 1
    v = x.value
    return min(((v + 1) & ~v).bit_length() - 1, x.n)


class NoiseKind(str, Enum):
    NONE = "none"
    ONE_BIT = "one-bit"
    BITWISE = "bitwise"


class MutationKind(str, Enum):
    ONE_BIT = "one-bit"
    STANDARD = "standard"


@dataclass(frozen=True)
class NoiseModel:
    """Prior noise applied to a bit string before it is evaluated.

    ``ONE_BIT``: with probability ``q`` flip one uniformly chosen bit.
    ``BITWISE``: flip every bit independently with probability ``q / n``.
    """

    kind: NoiseKind = NoiseKind.NONE
    q: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", NoiseKind(self.kind))
        if self.kind is not NoiseKind.NONE and not self.q >= 0:
            raise ConfigurationError(f"noise strength q must be non-negative, got {self.q}")
        if self.kind is NoiseKind.ONE_BIT and self.q > 1:
            raise ConfigurationError(f"one-bit noise needs 0 <= q <= 1, got q={self.q}")

    @classmethod
    def none(cls) -> "NoiseModel":
        return cls(NoiseKind.NONE, 0.0)

    @classmethod
    def one_bit(cls, q: float) -> "NoiseModel":
        return cls(NoiseKind.ONE_BIT, q)

    @classmethod
    def bitwise(cls, q: float) -> "NoiseModel":
        return cls(NoiseKind.BITWISE, q)

    def validate(self, n: int) -> None:
        if self.kind is NoiseKind.BITWISE and self.q > n:
            raise ConfigurationError(
                f"bitwise noise needs 0 <= q <= n so that q/n is a probability, got q={self.q}, n={n}"
            )


@dataclass(frozen=True)
class MutationOp:
    kind: MutationKind = MutationKind.STANDARD
    chi: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", MutationKind(self.kind))
        if self.kind is MutationKind.STANDARD and not self.chi > 0:
            raise ConfigurationError(f"mutation strength chi must be positive, got {self.chi}")

    @classmethod
    def one_bit(cls) -> "MutationOp":
        return cls(MutationKind.ONE_BIT, 0.0)

    @classmethod
    def standard(cls, chi: float) -> "MutationOp":
        return cls(MutationKind.STANDARD, chi)

    def validate(self, n: int) -> None:
        if self.kind is MutationKind.STANDARD and self.chi > n:
            raise ConfigurationError(f"standard mutation needs 0 < chi <= n, got chi={self.chi}, n={n}")


def mutate(x: BitString, op: MutationOp, rng: RngStream) -> BitString:
    if op.kind is MutationKind.ONE_BIT:
        return BitString(x.n, x.value ^ (1 << rng.below(x.n)))
    return x.flip(rng.flip_positions(x.n, op.chi / x.n))


def apply_noise(x: BitString, noise: NoiseModel, rng: RngStream) -> BitString:
    if noise.kind is NoiseKind.NONE:
        return x
    if noise.kind is NoiseKind.ONE_BIT:
        # the coin is always drawn, the position only when it comes up
        if rng.random() < noise.q:
            return BitString(x.n, x.value ^ (1 << rng.below(x.n)))
        return x
    return x.flip(rng.flip_positions(x.n, noise.q / x.n))


def noisy_fitness(x: BitString, noise: NoiseModel, rng: RngStream) -> int:
    return leading_ones(apply_noise(x, noise, rng))


def random_bitstring(n: int, rng: RngStream) -> BitString:
    return BitString.from_bits(rng.random_bits(n))
