"""Truth vectors, truth functions, and their order-theoretic properties.

Vectors of bits are ordered componentwise; a truth function is stored as its
full output table indexed by the input vector read as a binary number
(leftmost component most significant, so index 0 is the all-zeros input).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterator, Optional

ENUMERATION_ARITY_CAP = 4


@dataclass(frozen=True)
class TruthVector:
    """A fixed-length sequence of bits."""

    bits: tuple[int, ...]

    def __post_init__(self):
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError(f"truth vector entries must be 0 or 1: {self.bits!r}")

    @classmethod
    def of(cls, *bits: int) -> "TruthVector":
        return cls(tuple(bits))

    @classmethod
    def from_index(cls, index: int, length: int) -> "TruthVector":
        if not 0 <= index < (1 << length):
            raise ValueError(f"index {index} out of range for length {length}")
        return cls(tuple((index >> (length - 1 - i)) & 1 for i in range(length)))

    @classmethod
    def zeros(cls, length: int) -> "TruthVector":
        return cls((0,) * length)

    @classmethod
    def ones(cls, length: int) -> "TruthVector":
        return cls((1,) * length)

    @property
    def index(self) -> int:
        """The vector read as a binary number, leftmost bit most significant."""
        value = 0
        for b in self.bits:
            value = (value << 1) | b
        return value

    def __len__(self) -> int:
        return len(self.bits)

    def __getitem__(self, i: int) -> int:
        return self.bits[i]

    def __str__(self) -> str:
        return "".join(str(b) for b in self.bits)


def _require_equal_length(a: TruthVector, b: TruthVector) -> None:
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")


def tv_leq(a: TruthVector, b: TruthVector) -> bool:
    """Componentwise order: every entry of a is <= the matching entry of b."""
    _require_equal_length(a, b)
    return all(x <= y for x, y in zip(a.bits, b.bits))


def tv_meet(a: TruthVector, b: TruthVector) -> TruthVector:
    """Componentwise minimum (the infimum for tv_leq)."""
    _require_equal_length(a, b)
    return TruthVector(tuple(min(x, y) for x, y in zip(a.bits, b.bits)))


def tv_join(a: TruthVector, b: TruthVector) -> TruthVector:
    """Componentwise maximum."""
    _require_equal_length(a, b)
    return TruthVector(tuple(max(x, y) for x, y in zip(a.bits, b.bits)))


@dataclass(frozen=True)
class TruthFunction:
    """An n-ary function from bit vectors to bits, stored as its table.

    table[i] is the output on the input whose binary encoding is i; arity 0
    (a constant) is permitted and has a one-entry table.
    """

    arity: int
    table: tuple[int, ...]

    def __post_init__(self):
        if self.arity < 0:
            raise ValueError("arity must be nonnegative")
        if len(self.table) != 1 << self.arity:
            raise ValueError(
                f"table length {len(self.table)} does not match arity {self.arity}"
            )
        if any(b not in (0, 1) for b in self.table):
            raise ValueError("table entries must be 0 or 1")

    @classmethod
    def from_bits(cls, bits: str) -> "TruthFunction":
        """Build from a table bit string; the arity is inferred from its length."""
        n = len(bits).bit_length() - 1
        if 1 << n != len(bits):
            raise ValueError(f"table length {len(bits)} is not a power of two")
        return cls(n, tuple(int(c) for c in bits))

    def __call__(self, a: TruthVector) -> int:
        if len(a) != self.arity:
            raise ValueError(f"arity mismatch: function is {self.arity}-ary, got {len(a)}")
        return self.table[a.index]

    def on_index(self, index: int) -> int:
        return self.table[index]

    def on_bits(self, bits: tuple[int, ...]) -> int:
        return self(TruthVector(bits))

    def table_string(self) -> str:
        return "".join(str(b) for b in self.table)

    def to_json(self) -> str:
        return json.dumps({"arity": self.arity, "table": self.table_string()})

    @classmethod
    def from_json(cls, text: str) -> "TruthFunction":
        data = json.loads(text)
        if not isinstance(data, dict) or set(data) != {"arity", "table"}:
            raise ValueError("expected an object with keys 'arity' and 'table'")
        arity, table = data["arity"], data["table"]
        if not isinstance(arity, int) or not isinstance(table, str):
            raise ValueError("'arity' must be an integer and 'table' a bit string")
        if any(c not in "01" for c in table):
            raise ValueError("'table' must contain only 0 and 1")
        if len(table) != 1 << arity:
            raise ValueError(f"table length {len(table)} does not match arity {arity}")
        return cls(arity, tuple(int(c) for c in table))


def is_supermultiplicative(
    f: TruthFunction,
) -> tuple[bool, Optional[tuple[TruthVector, TruthVector]]]:
    """Whether two 1-valued inputs always have a 1-valued meet.

    When not, returns the lexicographically least violating pair (vectors
    compared as tuples, pairs by first component).
    """
    ones = [i for i, bit in enumerate(f.table) if bit]
    for ia in ones:
        for ib in ones:
            if not f.table[ia & ib]:
                return False, (
                    TruthVector.from_index(ia, f.arity),
                    TruthVector.from_index(ib, f.arity),
                )
    return True, None


def is_monotonic(f: TruthFunction) -> bool:
    """Whether the function preserves the componentwise order."""
    size = 1 << f.arity
    for i in range(size):
        for j in range(size):
            # i & j == i means the i-vector is componentwise below the j-vector
            if i & j == i and f.table[i] > f.table[j]:
                return False
    return True


def nary_meet_closure(f: TruthFunction, n: int) -> bool:
    """Whether the meet of any n inputs mapped to 1 is also mapped to 1.

    Brute force over all n-tuples of 1-valued inputs.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    ones = [i for i, bit in enumerate(f.table) if bit]
    full = (1 << f.arity) - 1

    def rec(depth: int, acc: int) -> bool:
        if depth == n:
            return bool(f.table[acc])
        return all(rec(depth + 1, acc & i) for i in ones)

    return rec(0, full)


def enumerate_truth_functions(
    arity: int, cap: int = ENUMERATION_ARITY_CAP
) -> Iterator[TruthFunction]:
    """All truth functions of the given arity, in table order."""
    if arity < 0:
        raise ValueError("arity must be nonnegative")
    if arity > cap:
        raise ValueError(f"arity {arity} exceeds enumeration cap {cap}")
    size = 1 << arity
    for k in range(1 << size):
        table = tuple((k >> (size - 1 - i)) & 1 for i in range(size))
        yield TruthFunction(arity, table)


BUILTINS: dict[str, TruthFunction] = {
    "not": TruthFunction(1, (1, 0)),
    "and": TruthFunction(2, (0, 0, 0, 1)),
    "or": TruthFunction(2, (0, 1, 1, 1)),
    "imp": TruthFunction(2, (1, 1, 0, 1)),
    "xor": TruthFunction(2, (0, 1, 1, 0)),
    "iff": TruthFunction(2, (1, 0, 0, 1)),
}


def builtin(name: str) -> TruthFunction:
    """The standard table for one of: not, and, or, imp, xor, iff."""
    try:
        return BUILTINS[name]
    except KeyError:
        raise ValueError(
            f"unknown builtin connective {name!r}; known: {', '.join(BUILTINS)}"
        ) from None
