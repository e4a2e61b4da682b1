"""Multiplier operators on grid functions.

All operators act on the last axis of an array of shape ``(..., M)``; any
leading axes are batch axes.  Norms use the atom measure ``1/M``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .intervals import check_disjoint, decompose, phi as default_phi
from .radix import IntervalZ, RadixSequence, frequency_digit
from .transform import atom_digit, forward_fast, inverse_fast, vilenkin_char


class FrequencySet:
    """Finite union of disjoint half-open frequency intervals."""

    def __init__(self, intervals: Iterable = ()):
        ivs = [iv if isinstance(iv, IntervalZ) else IntervalZ(*iv) for iv in intervals]
        check_disjoint(ivs)
        self.intervals = tuple(sorted((iv for iv in ivs if not iv.empty), key=lambda iv: iv.a))

    @classmethod
    def singleton(cls, n: int) -> "FrequencySet":
        return cls([IntervalZ(n, n + 1)])

    @classmethod
    def from_indices(cls, indices) -> "FrequencySet":
        idx = sorted(set(int(i) for i in indices))
        runs, start = [], None
        for i, n in enumerate(idx):
            if start is None:
                start = n
            if i + 1 == len(idx) or idx[i + 1] != n + 1:
                runs.append(IntervalZ(start, n + 1))
                start = None
        return cls(runs)

    def __contains__(self, n) -> bool:
        return any(n in iv for iv in self.intervals)

    def __len__(self) -> int:
        return sum(len(iv) for iv in self.intervals)

    def __eq__(self, other) -> bool:
        return isinstance(other, FrequencySet) and self.intervals == other.intervals

    def __repr__(self) -> str:
        return f"FrequencySet({[(iv.a, iv.b) for iv in self.intervals]})"

    def mask(self, M: int) -> np.ndarray:
        out = np.zeros(M, dtype=bool)
        for iv in self.intervals:
            if iv.b > M:
                raise ValueError(f"interval [{iv.a}, {iv.b}) exceeds M={M}")
            out[iv.a:iv.b] = True
        return out

    def union(self, other: "FrequencySet") -> "FrequencySet":
        return FrequencySet(self.intervals + other.intervals)

    def to_list(self) -> list:
        return [[iv.a, iv.b] for iv in self.intervals]


def _as_set(A) -> FrequencySet:
    if isinstance(A, FrequencySet):
        return A
    if isinstance(A, IntervalZ):
        return FrequencySet([A])
    if len(A) == 2 and all(isinstance(v, (int, np.integer)) for v in A):
        return FrequencySet([tuple(A)])
    return FrequencySet(A)


def family_masks(family: Sequence, M: int) -> np.ndarray:
    """Boolean ``(S, M)`` masks of a family, rejecting overlapping members."""
    masks = np.array([_as_set(A).mask(M) for A in family], dtype=bool).reshape(len(family), M)
    if np.any(masks.sum(axis=0) > 1):
        raise ValueError("frequency sets of the family are not pairwise disjoint")
    return masks


def lp_norm(values, p: float, axis=-1) -> np.ndarray:
    """``(mean |f|^p)^{1/p}``; ``p = inf`` gives the sup norm."""
    a = np.abs(np.asarray(values))
    if np.isinf(p):
        return a.max(axis=axis)
    if p < 1:
        raise ValueError("p must be >= 1")
    return np.mean(a**p, axis=axis) ** (1.0 / p)


def pointwise_l2(h) -> np.ndarray:
    """``|h(x)|_{l^2}`` for a vector function of shape ``(S, M)``."""
    return np.sqrt(np.sum(np.abs(np.asarray(h)) ** 2, axis=0))


def inner(f, g) -> complex:
    """``<f, g> = (1/M) sum f conj(g)``, summed over all axes."""
    f, g = np.asarray(f), np.asarray(g)
    return complex(np.sum(f * np.conj(g)) / f.shape[-1])


def multiplier(f, symbol, radix) -> np.ndarray:
    radix = RadixSequence.coerce(radix)
    return inverse_fast(forward_fast(f, radix) * symbol, radix)


def project(f, A, radix) -> np.ndarray:
    """``P_A f``: keep the Vilenkin coefficients with frequency in ``A``."""
    radix = RadixSequence.coerce(radix)
    return multiplier(f, _as_set(A).mask(radix.M), radix)


def expectation(f, k: int, radix, method: str = "average") -> np.ndarray:
    """Conditional expectation on the level-``k`` atoms.

    ``method="average"`` averages over atoms; ``method="projector"`` applies
    ``P_{[0, m_k)}``.  The two agree.
    """
    radix = RadixSequence.coerce(radix)
    if not 0 <= k <= radix.levels:
        raise IndexError(f"level {k} outside [0, {radix.levels}]")
    f = np.asarray(f, dtype=complex)
    if method == "projector":
        return project(f, [(0, radix.m[k])], radix)
    if method != "average":
        raise ValueError(f"unknown method {method!r}")
    size = radix.atom_size(k)
    blocks = f.reshape(f.shape[:-1] + (radix.m[k], size))
    return np.repeat(blocks.mean(axis=-1), size, axis=-1)


def delta(f, k: int, radix) -> np.ndarray:
    """Martingale difference ``E_{k+1} - E_k``."""
    return expectation(f, k + 1, radix) - expectation(f, k, radix)


def delta_block_mask(k: int, l: int, radix) -> np.ndarray:
    """Frequencies of ``Delta_{k,l}``; ``l`` is read modulo ``p_k`` and
    ``l = 0`` gives ``E_k``."""
    radix = RadixSequence.coerce(radix)
    n = np.arange(radix.M)
    return (n // radix.m[k + 1] == 0) & (frequency_digit(n, k, radix) == l % radix.p[k])


def delta_kl(f, k: int, l: int, radix) -> np.ndarray:
    radix = RadixSequence.coerce(radix)
    if not 0 <= k < radix.levels:
        raise IndexError(f"level {k} outside [0, {radix.levels})")
    return multiplier(f, delta_block_mask(k, l, radix), radix)


def q_mask(j: int, beta: int, radix) -> np.ndarray:
    radix = RadixSequence.coerce(radix)
    p = radix.p[j]
    if not 1 <= beta <= p - 1:
        raise ValueError(f"beta={beta} outside [1, {p - 1}]")
    n = np.arange(radix.M)
    return (n // radix.m[j + 1] == 0) & (frequency_digit(n, j, radix) >= p - beta)


def q_block(h, j: int, beta: int, radix) -> np.ndarray:
    """Sum of the ``beta`` highest blocks ``Delta_{j, p_j - beta} + ... + Delta_{j, p_j - 1}``."""
    return multiplier(h, q_mask(j, beta, radix), radix)


def character(n: int, radix) -> np.ndarray:
    radix = RadixSequence.coerce(radix)
    return vilenkin_char(n, np.arange(radix.M), radix)


@dataclass(frozen=True)
class PlanEntry:
    """One row ``(b_s, Theta_s)`` of the plan of ``G``; ``beta_j`` are the digits of ``b``."""

    b: int
    levels: tuple[int, ...]

    def betas(self, radix) -> tuple[int, ...]:
        radix = RadixSequence.coerce(radix)
        return tuple(int(frequency_digit(self.b, j, radix)) for j in self.levels)


def plan_from_intervals(intervals, radix) -> list[PlanEntry]:
    """Plan of the ``J``-pieces of a family of disjoint intervals ``[a_s, b_s)``.

    Rows whose ``b_s = M`` carry no ``J`` pieces and are dropped.
    """
    radix = RadixSequence.coerce(radix)
    ivs = [iv if isinstance(iv, IntervalZ) else IntervalZ(*iv) for iv in intervals]
    check_disjoint(ivs)
    plan = []
    for iv in ivs:
        d = decompose(iv.a, iv.b, radix)
        if d.J:
            plan.append(PlanEntry(iv.b, tuple(sorted(pc.level for pc in d.J))))
    return plan


def _validate_plan(plan, radix):
    for e in plan:
        if not 0 <= e.b < radix.M:
            raise ValueError(f"plan entry b={e.b} outside [0, {radix.M})")
        for j, beta in zip(e.levels, e.betas(radix)):
            if not 0 <= j < radix.levels or beta == 0:
                raise ValueError(f"level {j} has zero digit in b={e.b}")


def _plan_symbol(entry: PlanEntry, radix) -> np.ndarray:
    sym = np.zeros(radix.M, dtype=bool)
    for j, beta in zip(entry.levels, entry.betas(radix)):
        sym |= q_mask(j, beta, radix)
    return sym


def g_forward(f, plan: Sequence[PlanEntry], radix) -> np.ndarray:
    """``G f = (sum_{j in Theta_s} Q_{j,s}[conj(w_{b_s}) f])_s``, shape ``(S, M)``."""
    radix = RadixSequence.coerce(radix)
    _validate_plan(plan, radix)
    f = np.asarray(f, dtype=complex)
    out = np.empty((len(plan), radix.M), dtype=complex)
    for s, e in enumerate(plan):
        out[s] = multiplier(np.conj(character(e.b, radix)) * f, _plan_symbol(e, radix), radix)
    return out


def g_star(h, plan: Sequence[PlanEntry], radix) -> np.ndarray:
    """Adjoint ``G* h = sum_s w_{b_s} sum_{j in Theta_s} Q_{j,s} h_s``."""
    radix = RadixSequence.coerce(radix)
    _validate_plan(plan, radix)
    h = np.asarray(h, dtype=complex)
    if h.shape != (len(plan), radix.M):
        raise ValueError(f"h must have shape ({len(plan)}, {radix.M})")
    out = np.zeros(radix.M, dtype=complex)
    for s, e in enumerate(plan):
        out += character(e.b, radix) * multiplier(h[s], _plan_symbol(e, radix), radix)
    return out


def plan_to_json(plan: Sequence[PlanEntry]) -> str:
    return json.dumps([{"b": e.b, "levels": list(e.levels)} for e in plan])


def plan_from_json(text: str) -> list[PlanEntry]:
    return [PlanEntry(int(row["b"]), tuple(row["levels"])) for row in json.loads(text)]


def square_components(f, family, radix) -> np.ndarray:
    """``(P_{I_s} f)_s`` with shape ``(S, M)`` (or ``(..., S, M)`` for batched ``f``)."""
    radix = RadixSequence.coerce(radix)
    masks = family_masks(family, radix.M)
    spec = forward_fast(f, radix)
    return inverse_fast(spec[..., None, :] * masks, radix)


def square_function(f, family, radix) -> np.ndarray:
    """Pointwise ``(sum_s |P_{I_s} f|^2)^{1/2}`` for pairwise disjoint ``I_s``."""
    comps = square_components(f, family, radix)
    return np.sqrt(np.sum(np.abs(comps) ** 2, axis=-2))


def partial_sum_ratio(fs, cutoffs, p: float, radix) -> float:
    """``||(sum_l |P_{[0, m_l]} f_l|^2)^{1/2}||_p / ||(sum_l |f_l|^2)^{1/2}||_p``."""
    radix = RadixSequence.coerce(radix)
    fs = np.asarray(fs, dtype=complex)
    out = np.stack([project(f, [(0, min(int(c) + 1, radix.M))], radix) for f, c in zip(fs, cutoffs)])
    return float(lp_norm(pointwise_l2(out), p) / lp_norm(pointwise_l2(fs), p))


@dataclass(frozen=True)
class SmoothMultiplierSpec:
    """Smooth multiplier at level ``t`` on the frequencies with tail ``kappa``.

    The symbol is ``phi(n_t / 2^r - n_ref)`` where ``n_t`` is digit ``t``.
    """

    t: int
    kappa: int
    r: int
    n_ref: int

    def validate(self, radix) -> None:
        radix = RadixSequence.coerce(radix)
        if not 0 <= self.t < radix.levels:
            raise ValueError(f"level {self.t} out of range")
        if self.kappa % radix.m[self.t + 1] or not 0 <= self.kappa < radix.M:
            raise ValueError(f"kappa={self.kappa} is not a tail above level {self.t}")
        if self.r < 0:
            raise ValueError("scale r must be >= 0")

    def to_dict(self) -> dict:
        return {"t": self.t, "kappa": self.kappa, "r": self.r, "n_ref": self.n_ref}


def smooth_symbol(spec: SmoothMultiplierSpec, radix, phi=default_phi) -> np.ndarray:
    radix = RadixSequence.coerce(radix)
    spec.validate(radix)
    n = np.arange(radix.M)
    tail = n - n % radix.m[spec.t + 1]
    values = phi(frequency_digit(n, spec.t, radix) / 2**spec.r - spec.n_ref)
    return np.where(tail == spec.kappa, values, 0.0)


def smooth_multiplier(f, spec: SmoothMultiplierSpec, radix, phi=default_phi) -> np.ndarray:
    return multiplier(f, smooth_symbol(spec, radix, phi), radix)


def smooth_multiplier_tilde(f, spec: SmoothMultiplierSpec, radix, phi=default_phi) -> np.ndarray:
    """``sum_{u in Z} phi(u / 2^r - n_ref) Delta_{t,u}[conj(w_kappa) f]``.

    ``Delta_{t,u}`` is read as ``Delta_{t, u mod p_t}`` with ``Delta_{t,0} = E_t``.
    """
    radix = RadixSequence.coerce(radix)
    spec.validate(radix)
    p = radix.p[spec.t]
    reach = int(np.ceil(phi.support * 2**spec.r)) + 1
    u = np.arange(spec.n_ref * 2**spec.r - reach, spec.n_ref * 2**spec.r + reach + 1)
    weights = np.zeros(p)
    np.add.at(weights, u % p, phi(u / 2**spec.r - spec.n_ref))
    n = np.arange(radix.M)
    symbol = np.where(n // radix.m[spec.t + 1] == 0, weights[frequency_digit(n, spec.t, radix)], 0.0)
    g = np.conj(character(spec.kappa, radix)) * np.asarray(f, dtype=complex)
    return multiplier(g, symbol, radix)


def r_modulate(g, spec: SmoothMultiplierSpec, radix) -> np.ndarray:
    """Multiply by ``exp(-2 pi i 2^r n_ref a_t(x) / p_t)`` on each level-``t`` child."""
    radix = RadixSequence.coerce(radix)
    a = atom_digit(np.arange(radix.M), spec.t, radix)
    p = radix.p[spec.t]
    phase = (2**spec.r * spec.n_ref * a) % p / p
    return np.asarray(g, dtype=complex) * np.exp(-2j * np.pi * phase)

