"""Mixed-radix arithmetic over a finite product of cyclic groups.

A radix sequence ``(p_0, ..., p_N)`` fixes the group ``Z_{p_0} x ... x Z_{p_N}``
and the integers ``0 <= n < M`` with ``M = p_0 * ... * p_N``.  Frequencies are
written least-significant digit first::

    n = n_0 m_0 + n_1 m_1 + ... + n_N m_N,   m_0 = 1,  m_{k+1} = m_k p_k.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

# Every grid array is indexed by int64; keep M well inside that range.
MAX_SIZE = 2**62


@dataclass(frozen=True)
class RadixSequence:
    """The sequence ``p`` together with its cumulative products ``m``."""

    p: tuple[int, ...]
    m: tuple[int, ...] = field(init=False, repr=False)

    def __post_init__(self):
        p = tuple(int(v) for v in self.p)
        if not p:
            raise ValueError("radix sequence must be non-empty")
        if any(v < 2 for v in p):
            raise ValueError(f"every p_j must be >= 2, got {list(p)}")
        m = [1]
        for v in p:
            m.append(m[-1] * v)
            if m[-1] > MAX_SIZE:
                raise OverflowError(f"product of radix {list(p)} exceeds {MAX_SIZE}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "m", tuple(m))

    @property
    def M(self) -> int:
        return self.m[-1]

    @property
    def N(self) -> int:
        """Index of the last level (the sequence has ``N + 1`` entries)."""
        return len(self.p) - 1

    @property
    def levels(self) -> int:
        return len(self.p)

    def atom_size(self, k: int) -> int:
        """Number of finest atoms inside one level-``k`` atom."""
        return self.M // self.m[k]

    def to_json(self) -> str:
        return json.dumps(list(self.p))

    @classmethod
    def from_json(cls, text: str) -> "RadixSequence":
        data = json.loads(text)
        if not isinstance(data, list) or not all(isinstance(v, int) for v in data):
            raise ValueError("radix JSON must be an array of integers")
        return cls(tuple(data))

    @classmethod
    def coerce(cls, radix) -> "RadixSequence":
        if isinstance(radix, cls):
            return radix
        return cls(tuple(radix))


@dataclass(frozen=True)
class IntervalZ:
    """Half-open integer interval ``[a, b)``."""

    a: int
    b: int

    def __post_init__(self):
        if self.a < 0 or self.b < self.a:
            raise ValueError(f"invalid interval [{self.a}, {self.b})")

    @property
    def empty(self) -> bool:
        return self.a == self.b

    def __len__(self) -> int:
        return self.b - self.a

    def __contains__(self, n) -> bool:
        return self.a <= n < self.b

    def as_range(self) -> range:
        return range(self.a, self.b)


def _check_value(n, radix: RadixSequence, name="n"):
    if not 0 <= n < radix.M:
        raise ValueError(f"{name}={n} outside [0, {radix.M})")


def to_digits(n: int, radix) -> tuple[int, ...]:
    """Digits ``(n_0, ..., n_N)`` of ``n``, least significant first."""
    radix = RadixSequence.coerce(radix)
    n = int(n)
    _check_value(n, radix)
    digits = []
    for p in radix.p:
        n, d = divmod(n, p)
        digits.append(d)
    return tuple(digits)


def from_digits(digits: Sequence[int], radix) -> int:
    radix = RadixSequence.coerce(radix)
    if len(digits) != radix.levels:
        raise ValueError(f"expected {radix.levels} digits, got {len(digits)}")
    value = 0
    for d, p, m in zip(digits, radix.p, radix.m):
        if not 0 <= d < p:
            raise ValueError(f"digit {d} out of range for base {p}")
        value += int(d) * m
    return value


def digit_table(radix) -> np.ndarray:
    """Array of shape ``(M, N + 1)``; row ``n`` holds the digits of ``n``."""
    radix = RadixSequence.coerce(radix)
    n = np.arange(radix.M, dtype=np.int64)
    m = np.asarray(radix.m[:-1], dtype=np.int64)
    p = np.asarray(radix.p, dtype=np.int64)
    return (n[:, None] // m[None, :]) % p[None, :]


def frequency_digit(n, k: int, radix) -> np.ndarray:
    """Digit ``n_k`` of (an array of) frequencies."""
    radix = RadixSequence.coerce(radix)
    return (np.asarray(n) // radix.m[k]) % radix.p[k]


def dotplus(a: int, b: int, radix) -> int:
    """Digit-wise sum modulo ``p_j``; the group law behind ``w_a w_b = w_{a+b}``."""
    radix = RadixSequence.coerce(radix)
    _check_value(a, radix, "a")
    _check_value(b, radix, "b")
    da, db = to_digits(a, radix), to_digits(b, radix)
    return from_digits([(x + y) % p for x, y, p in zip(da, db, radix.p)], radix)


def dotminus(n: int, radix) -> int:
    """Inverse of ``n`` for :func:`dotplus`."""
    radix = RadixSequence.coerce(radix)
    _check_value(n, radix)
    return from_digits([(-d) % p for d, p in zip(to_digits(n, radix), radix.p)], radix)


def dotplus_array(a, b, radix) -> np.ndarray:
    """Vectorised :func:`dotplus` without range checks."""
    radix = RadixSequence.coerce(radix)
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    out = np.zeros(np.broadcast(a, b).shape, dtype=np.int64)
    for p, m in zip(radix.p, radix.m):
        out += ((a // m + b // m) % p) * m
    return out
