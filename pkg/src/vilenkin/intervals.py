"""Combinatorics of frequency intervals.

* :func:`decompose` splits ``[a, b)`` into the singleton ``{a}``, the pieces
  ``J_j`` (digit ``j`` in ``[0, beta_j)``, higher digits frozen at those of
  ``b``), the pieces ``J~_j`` (digit ``j`` in ``[alpha_j + 1, p_j - 1]``,
  higher digits frozen at those of ``a``) and the tail piece ``J~_t`` at the
  highest level ``t`` where the digits of ``a`` and ``b`` differ.
* :func:`reindex` groups tail pieces by level and frozen tail.
* :func:`widen`, :func:`whitney`, :func:`transfer_back` and :func:`split7`
  move between digit ranges and real subintervals of ``[0, 1]``.
* :func:`build_phi` is the smooth cutoff used by the smooth multipliers.

Real endpoints are kept as :class:`fractions.Fraction` whenever the inputs
are rational, so lattice points ``j / p`` on a boundary are assigned to
exactly one half-open member.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Optional

import numpy as np

from .radix import IntervalZ, RadixSequence, to_digits

PLATEAU = 2.0
COLLAR = 0.01


@dataclass(frozen=True)
class Piece:
    """Template interval: digit ``level`` in ``[lo, hi]``, digits above frozen.

    ``tail`` is the value of the frozen digits (a multiple of
    ``m_{level+1}``); digits below ``level`` are free.
    """

    kind: str
    level: int
    lo: int
    hi: int
    tail: int
    interval: IntervalZ

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "level": self.level,
            "digits": [self.lo, self.hi],
            "tail": self.tail,
            "interval": [self.interval.a, self.interval.b],
        }


def template_piece(kind: str, level: int, lo: int, hi: int, tail: int, radix) -> Piece:
    radix = RadixSequence.coerce(radix)
    m = radix.m[level]
    return Piece(kind, level, lo, hi, tail, IntervalZ(tail + lo * m, tail + (hi + 1) * m))


@dataclass
class DecompositionPieces:
    a: int
    b: int
    t: int
    J: list[Piece] = field(default_factory=list)
    Jt: list[Piece] = field(default_factory=list)
    tail: Optional[Piece] = None

    @property
    def singleton(self) -> IntervalZ:
        return IntervalZ(self.a, self.a + 1)

    def pieces(self) -> Iterator[Piece]:
        yield from self.J
        yield from self.Jt
        if self.tail is not None:
            yield self.tail

    def intervals(self) -> list[IntervalZ]:
        return [self.singleton] + [pc.interval for pc in self.pieces()]

    def to_dict(self) -> dict:
        return {
            "interval": [self.a, self.b],
            "t": self.t,
            "singleton": self.a,
            "J": [pc.to_dict() for pc in self.J],
            "Jt": [pc.to_dict() for pc in self.Jt],
            "tail": None if self.tail is None else self.tail.to_dict(),
        }


def decompose(a: int, b: int, radix) -> DecompositionPieces:
    """Decompose ``[a, b)`` into ``{a}``, ``J_j``, ``J~_j`` and ``J~_t``."""
    radix = RadixSequence.coerce(radix)
    if not 0 <= a < b <= radix.M:
        raise ValueError(f"need 0 <= a < b <= {radix.M}, got [{a}, {b})")
    p = list(radix.p)
    m = list(radix.m)
    alpha = list(to_digits(a, radix))
    if b == radix.M:
        # b needs one more digit; the extra level never carries a piece
        beta = [0] * radix.levels + [1]
        alpha.append(0)
        p.append(2)
    else:
        beta = list(to_digits(b, radix))
    t = max(j for j in range(len(p)) if alpha[j] != beta[j])

    def frozen(digits, j):
        return sum(digits[l] * m[l] for l in range(j + 1, len(p)) if l < radix.levels)

    out = DecompositionPieces(a, b, t)
    for j in range(t - 1, -1, -1):
        if beta[j] != 0:
            out.J.append(template_piece("J", j, 0, beta[j] - 1, frozen(beta, j), radix))
    for j in range(t):
        if alpha[j] != p[j] - 1:
            out.Jt.append(template_piece("Jt", j, alpha[j] + 1, p[j] - 1, frozen(alpha, j), radix))
    if alpha[t] + 1 <= beta[t] - 1:
        out.tail = template_piece("tail", t, alpha[t] + 1, beta[t] - 1, frozen(alpha, t), radix)
    return out


def check_disjoint(intervals: Iterable[IntervalZ]) -> None:
    """Raise ``ValueError`` if two non-empty intervals overlap."""
    ivs = sorted((iv for iv in intervals if not iv.empty), key=lambda iv: iv.a)
    for left, right in zip(ivs, ivs[1:]):
        if right.a < left.b:
            raise ValueError(f"intervals [{left.a}, {left.b}) and [{right.a}, {right.b}) overlap")


def decompose_family(intervals, radix) -> list[DecompositionPieces]:
    ivs = [iv if isinstance(iv, IntervalZ) else IntervalZ(*iv) for iv in intervals]
    check_disjoint(ivs)
    return [decompose(iv.a, iv.b, radix) for iv in ivs]


def reindex(decomps: Iterable[DecompositionPieces], kinds=("tail",)) -> dict:
    """Group pieces of the given kinds by ``(level, tail)``.

    Returns a dict ``(t, kappa) -> list[Piece]`` sorted by digit range.  Within
    a group the digit ranges must be disjoint; overlap raises ``ValueError``.
    """
    decomps = list(decomps)
    check_disjoint(IntervalZ(d.a, d.b) for d in decomps)
    groups = defaultdict(list)
    for d in decomps:
        for pc in d.pieces():
            if pc.kind in kinds:
                groups[(pc.level, pc.tail)].append(pc)
    out = {}
    for key in sorted(groups):
        members = sorted(groups[key], key=lambda pc: pc.lo)
        for left, right in zip(members, members[1:]):
            if right.lo <= left.hi:
                raise ValueError(f"digit ranges overlap in group {key}")
        out[key] = members
    return out


@dataclass(frozen=True)
class RealInterval:
    """Interval of the real line with open/closed ends."""

    lo: object
    hi: object
    closed_lo: bool = False
    closed_hi: bool = False

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"empty real interval ({self.lo}, {self.hi})")

    @property
    def length(self):
        return self.hi - self.lo

    @property
    def center(self):
        return (self.lo + self.hi) / 2

    def __contains__(self, x) -> bool:
        above = x >= self.lo if self.closed_lo else x > self.lo
        below = x <= self.hi if self.closed_hi else x < self.hi
        return above and below

    def dilate(self, factor) -> "RealInterval":
        """Same centre, length multiplied by ``factor`` (closed)."""
        half = self.length * factor / 2
        return RealInterval(self.center - half, self.center + half, True, True)

    def contains_interval(self, other: "RealInterval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def indicator(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        lo, hi = float(self.lo), float(self.hi)
        left = x >= lo if self.closed_lo else x > lo
        right = x <= hi if self.closed_hi else x < hi
        return left & right

    def to_list(self) -> list:
        return [float(self.lo), float(self.hi)]


def widen(p_t: int, lo: int, hi: int) -> RealInterval:
    """``((lo - 1/2) / p_t, (hi + 1/2) / p_t)`` for the digit range ``[lo, hi]``."""
    if not 0 <= lo <= hi < p_t:
        raise ValueError(f"need 0 <= lo <= hi < {p_t}, got [{lo}, {hi}]")
    return RealInterval(Fraction(2 * lo - 1, 2 * p_t), Fraction(2 * hi + 1, 2 * p_t))


def _unit_breakpoints(depth: int) -> list[Fraction]:
    third = Fraction(1, 3)
    left = [third / 2 ** (k + 1) for k in range(depth - 1, -1, -1)]
    right = [1 - u for u in reversed(left)]
    return left + [third, 2 * third] + right


def whitney(iv: RealInterval, min_length=None, max_depth: int = 60) -> list[RealInterval]:
    """Whitney family of ``iv``, left to right, as half-open ``[lo, hi)`` members.

    The members are the affine image of ``[2^-(k+1)/3, 2^-k/3]``,
    ``[1/3, 2/3]`` and ``[1 - 2^-k/3, 1 - 2^-(k+1)/3]``.  Dyadic members
    shorter than ``min_length`` are dropped (with ``min_length = 1/(4p)`` no
    lattice point ``j/p`` of a widened interval is lost).
    """
    length = iv.length
    depth = 0
    while depth < max_depth:
        member = length / 3 / 2 ** (depth + 1)
        if min_length is not None and member < min_length:
            break
        depth += 1
    points = [iv.lo + length * u for u in _unit_breakpoints(depth)]
    return [RealInterval(x, y, True, False) for x, y in zip(points, points[1:])]


def lattice_digits(iv: RealInterval, p_t: int) -> range:
    """Digits ``j`` in ``[0, p_t)`` with ``j / p_t`` in ``iv``."""
    js = [j for j in _candidate_digits(iv, p_t) if Fraction(j, p_t) in iv]
    return range(js[0], js[-1] + 1) if js else range(0)


def _candidate_digits(iv, p_t):
    lo = max(0, math.floor(iv.lo * p_t) - 1)
    hi = min(p_t - 1, math.ceil(iv.hi * p_t) + 1)
    return range(lo, hi + 1)


def transfer_back(iv: RealInterval, t: int, kappa: int, radix) -> IntervalZ:
    """Frequencies with digit ``t`` in ``{j : j/p_t in iv}`` and tail ``kappa``.

    Returns an empty interval when ``iv`` holds no lattice point.
    """
    radix = RadixSequence.coerce(radix)
    js = lattice_digits(iv, radix.p[t])
    if not js:
        return IntervalZ(kappa, kappa)
    m = radix.m[t]
    return IntervalZ(kappa + js[0] * m, kappa + (js[-1] + 1) * m)


def split7(iv: RealInterval, parts: int = 7) -> list[RealInterval]:
    """``parts`` consecutive equal half-open subintervals of ``iv``."""
    step = iv.length / parts
    points = [iv.lo + step * i for i in range(parts)] + [iv.hi]
    return [RealInterval(x, y, True, False) for x, y in zip(points, points[1:])]


def _smooth_step(u):
    # 1 for u <= 0, 0 for u >= 1, C-infinity and decreasing in between
    u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(u < 1, np.exp(-1.0 / np.where(u < 1, 1 - u, 1.0)), 0.0)
        b = np.where(u > 0, np.exp(-1.0 / np.where(u > 0, u, 1.0)), 0.0)
    return a / (a + b)


def build_phi(plateau: float = PLATEAU, collar: float = COLLAR):
    """Even cutoff: 1 on ``[-plateau, plateau]``, 0 off ``[-plateau-collar, plateau+collar]``."""

    def phi(x):
        return _smooth_step((np.abs(np.asarray(x, dtype=float)) - plateau) / collar)

    phi.plateau = plateau
    phi.support = plateau + collar
    return phi


phi = build_phi()


@dataclass(frozen=True)
class RefinedPiece:
    """One lattice-non-empty member of the refinement of a group piece."""

    source: int
    real: RealInterval
    interval: IntervalZ
    part: int = 0


def refine_group(pieces: list[Piece], radix) -> list[RefinedPiece]:
    """Whitney-refine every piece of one ``(t, kappa)`` group and transfer back."""
    radix = RadixSequence.coerce(radix)
    out = []
    for s, pc in enumerate(pieces):
        p_t = radix.p[pc.level]
        for member in whitney(widen(p_t, pc.lo, pc.hi), Fraction(1, 4 * p_t)):
            iv = transfer_back(member, pc.level, pc.tail, radix)
            if not iv.empty:
                out.append(RefinedPiece(s, member, iv))
    return out


def split_refined(refined: list[RefinedPiece], pieces: list[Piece], radix) -> list[RefinedPiece]:
    """Split each refined member into 7 and keep the lattice-non-empty parts."""
    radix = RadixSequence.coerce(radix)
    out = []
    for rp in refined:
        pc = pieces[rp.source]
        for j, part in enumerate(split7(rp.real)):
            iv = transfer_back(part, pc.level, pc.tail, radix)
            if not iv.empty:
                out.append(RefinedPiece(rp.source, part, iv, j))
    return out


def scale_and_reference(part: RealInterval, p_t: int) -> tuple[int, int]:
    """Scale ``r`` with ``2^r/p_t <= |part| < 2^{r+1}/p_t`` and the least
    ``n >= 1`` with ``2^r n / p_t`` in ``part``."""
    length = part.length * p_t
    if length < 1:
        raise ValueError("part shorter than the lattice spacing")
    r = 0
    while 2 ** (r + 1) <= length:
        r += 1
    n = max(1, math.floor(part.lo * p_t / 2**r))
    while Fraction(2**r * n, p_t) not in part:
        n += 1
        if Fraction(2**r * n, p_t) > part.hi:
            raise ValueError("no reference point in part")
    return r, n
