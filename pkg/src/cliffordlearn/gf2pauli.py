"""n-qubit Pauli operators in the symplectic GF(2) representation.

A Pauli is stored as two packed bit vectors (Python ints, bit ``q`` is qubit
``q``) plus a phase exponent ``e`` so that the operator is ``i**e`` times the
literal tensor product of the letters I, X, Y, Z.  Qubit 0 is the leftmost
letter of the text form and the most significant tensor factor of the dense
matrix.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

__all__ = [
    "DEFAULT_DENSE_LIMIT",
    "DimensionError",
    "DenseLimitError",
    "PauliParseError",
    "PauliOperator",
    "GeneratorIndex",
    "X_TYPE",
    "Z_TYPE",
    "dense_limit",
    "generators",
    "pauli_mul",
    "commutes",
    "decompose_into_generators",
    "to_dense",
    "parse_pauli",
    "format_pauli",
    "single_qubit_matrix",
    "label_index",
    "pauli_from_index",
]

DEFAULT_DENSE_LIMIT = 6
_DENSE_LIMIT_ENV = "CLIFFORDLEARN_DENSE_LIMIT"

_I2 = np.eye(2, dtype=complex)
_X2 = np.array([[0, 1], [1, 0]], dtype=complex)
_Y2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z2 = np.array([[1, 0], [0, -1]], dtype=complex)
_LETTER_MATRICES = {"I": _I2, "X": _X2, "Y": _Y2, "Z": _Z2}
_PHASE_FACTORS = (1, 1j, -1, -1j)
_PHASE_PREFIX = ("+", "+i", "-", "-i")

_PAULI_RE = re.compile(r"([+-])(i?)([IXYZ]+)")


class DimensionError(ValueError):
    """Operands act on different numbers of qubits."""


class DenseLimitError(ValueError):
    """A dense object was requested above the configured qubit limit."""


class PauliParseError(ValueError):
    def __init__(self, text: str, position: int, reason: str):
        super().__init__(f"cannot parse Pauli {text!r} at position {position}: {reason}")
        self.text = text
        self.position = position


def dense_limit() -> int:
    """Largest qubit count for dense matrices (env override allowed)."""
    value = os.environ.get(_DENSE_LIMIT_ENV)
    return int(value) if value else DEFAULT_DENSE_LIMIT


def check_dense(n: int, limit: int | None = None) -> None:
    limit = dense_limit() if limit is None else limit
    if n > limit:
        raise DenseLimitError(f"n={n} exceeds the dense limit {limit}")


@dataclass(frozen=True)
class PauliOperator:
    n: int
    x_bits: int = 0
    z_bits: int = 0
    phase: int = 0

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("qubit count must be non-negative")
        mask = (1 << self.n) - 1
        if self.x_bits & ~mask or self.z_bits & ~mask or self.x_bits < 0 or self.z_bits < 0:
            raise ValueError("bit vector longer than n")
        if self.phase not in (0, 1, 2, 3):
            raise ValueError(f"phase exponent must be in 0..3, got {self.phase}")

    @classmethod
    def identity(cls, n: int) -> PauliOperator:
        return cls(n)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str) -> PauliOperator:
        bit = 1 << qubit
        x = bit if letter in "XY" else 0
        z = bit if letter in "YZ" else 0
        return cls(n, x, z)

    @property
    def is_hermitian(self) -> bool:
        # literal letters are Hermitian, so only the prefactor matters
        return self.phase % 2 == 0

    @property
    def weight(self) -> int:
        return (self.x_bits | self.z_bits).bit_count()

    def sign_free(self) -> PauliOperator:
        return PauliOperator(self.n, self.x_bits, self.z_bits, 0)

    def with_phase(self, phase: int) -> PauliOperator:
        return PauliOperator(self.n, self.x_bits, self.z_bits, phase % 4)

    def letter(self, qubit: int) -> str:
        x = (self.x_bits >> qubit) & 1
        z = (self.z_bits >> qubit) & 1
        return "IXZY"[x | (z << 1)]

    def letters(self) -> str:
        return "".join(self.letter(q) for q in range(self.n))

    def symplectic(self) -> tuple[int, int]:
        return self.x_bits, self.z_bits

    def __mul__(self, other: PauliOperator) -> PauliOperator:
        return pauli_mul(self, other)

    def __str__(self) -> str:
        return format_pauli(self)


X_TYPE = "X"
Z_TYPE = "Z"


class GeneratorIndex(NamedTuple):
    kind: str
    qubit: int

    def pauli(self, n: int) -> PauliOperator:
        if not 0 <= self.qubit < n:
            raise ValueError(f"qubit {self.qubit} out of range for n={n}")
        return PauliOperator.single(n, self.qubit, self.kind)

    def __str__(self) -> str:
        return f"{self.kind}@{self.qubit}"


def generators(n: int) -> list[GeneratorIndex]:
    """All X-type generators ascending, then all Z-type ascending."""
    return [GeneratorIndex(X_TYPE, q) for q in range(n)] + [
        GeneratorIndex(Z_TYPE, q) for q in range(n)
    ]


def _xz_exponent(p: PauliOperator) -> int:
    # i**e * X^x Z^z form: literal Y = i X Z
    return (p.phase + (p.x_bits & p.z_bits).bit_count()) & 3


def _from_xz(n: int, x: int, z: int, e: int) -> PauliOperator:
    return PauliOperator(n, x, z, (e - (x & z).bit_count()) & 3)


def _check_same_n(a: PauliOperator, b: PauliOperator) -> None:
    if a.n != b.n:
        raise DimensionError(f"qubit counts differ: {a.n} != {b.n}")


def pauli_mul(a: PauliOperator, b: PauliOperator) -> PauliOperator:
    _check_same_n(a, b)
    e = _xz_exponent(a) + _xz_exponent(b) + 2 * (a.z_bits & b.x_bits).bit_count()
    return _from_xz(a.n, a.x_bits ^ b.x_bits, a.z_bits ^ b.z_bits, e)


def commutes(a: PauliOperator, b: PauliOperator) -> bool:
    _check_same_n(a, b)
    return ((a.x_bits & b.z_bits).bit_count() + (a.z_bits & b.x_bits).bit_count()) % 2 == 0


def _iter_bits(v: int) -> Iterator[int]:
    while v:
        low = v & -v
        yield low.bit_length() - 1
        v ^= low


def decompose_into_generators(p: PauliOperator) -> tuple[list[GeneratorIndex], int]:
    """Return ``(gens, alpha)`` with ``p == i**alpha * prod(gens)`` in list order.

    X-type factors come first, ascending by qubit, then Z-type factors; this is
    exactly the X^x Z^z normal form, so alpha is the xz exponent of ``p``.
    """
    gens = [GeneratorIndex(X_TYPE, q) for q in _iter_bits(p.x_bits)]
    gens += [GeneratorIndex(Z_TYPE, q) for q in _iter_bits(p.z_bits)]
    return gens, _xz_exponent(p)


def single_qubit_matrix(letter: str) -> np.ndarray:
    return _LETTER_MATRICES[letter]


def to_dense(p: PauliOperator, limit: int | None = None) -> np.ndarray:
    check_dense(p.n, limit)
    out = np.array([[_PHASE_FACTORS[p.phase]]], dtype=complex)
    for q in range(p.n):
        out = np.kron(out, _LETTER_MATRICES[p.letter(q)])
    return out


def parse_pauli(text: str) -> PauliOperator:
    m = _PAULI_RE.fullmatch(text)
    if m is None:
        if not text or text[0] not in "+-":
            raise PauliParseError(text, 0, "expected sign '+' or '-'")
        pos = 1
        if pos < len(text) and text[pos] == "i":
            pos += 1
        if pos == len(text):
            raise PauliParseError(text, pos, "expected at least one of I, X, Y, Z")
        for j in range(pos, len(text)):
            if text[j] not in "IXYZ":
                raise PauliParseError(text, j, f"unexpected character {text[j]!r}")
        raise PauliParseError(text, 0, "malformed")  # pragma: no cover
    sign, imag, letters = m.groups()
    phase = (2 if sign == "-" else 0) + (1 if imag else 0)
    x = z = 0
    for q, ch in enumerate(letters):
        if ch in "XY":
            x |= 1 << q
        if ch in "YZ":
            z |= 1 << q
    return PauliOperator(len(letters), x, z, phase)


def format_pauli(p: PauliOperator) -> str:
    return _PHASE_PREFIX[p.phase] + p.letters()


_DIGIT = {"I": 0, "X": 1, "Y": 2, "Z": 3}


def label_index(p: PauliOperator) -> int:
    """Base-4 index of the sign-free label, qubit 0 most significant, digits IXYZ."""
    idx = 0
    for q in range(p.n):
        idx = 4 * idx + _DIGIT[p.letter(q)]
    return idx


def pauli_from_index(n: int, index: int) -> PauliOperator:
    x = z = 0
    for q in range(n - 1, -1, -1):
        digit = index & 3
        index >>= 2
        if digit in (1, 2):
            x |= 1 << q
        if digit in (2, 3):
            z |= 1 << q
    return PauliOperator(n, x, z)
