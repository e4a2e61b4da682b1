"""Generalized intervals, maximal functions, A_p constants and the
l^2-valued Calderon-Zygmund decomposition.

A generalized interval at level ``k`` is a proper circular run of the
``p_k`` level-``(k+1)`` children of one level-``k`` atom.  All averages use
the atom measure, and every child holds the same number of finest atoms, so
run averages are plain means of child averages.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .operators import pointwise_l2
from .radix import RadixSequence
from .transform import atom_digit

logger = logging.getLogger(__name__)

GRAM_COND_LIMIT = 1e8


@dataclass(frozen=True)
class GeneralizedInterval:
    k: int
    parent: int
    start: int
    length: int

    def offsets(self, p_k: int) -> np.ndarray:
        return (self.start + np.arange(self.length)) % p_k

    def atoms(self, radix) -> np.ndarray:
        """Finest atom indices covered, in increasing order."""
        radix = RadixSequence.coerce(radix)
        p = radix.p[self.k]
        B = radix.atom_size(self.k + 1)
        children = self.parent * p + np.sort(self.offsets(p))
        return (children[:, None] * B + np.arange(B)[None, :]).ravel()

    def measure(self, radix) -> float:
        radix = RadixSequence.coerce(radix)
        return self.length / radix.m[self.k + 1]

    def validate(self, radix) -> None:
        radix = RadixSequence.coerce(radix)
        if not 0 <= self.k < radix.levels:
            raise ValueError(f"level {self.k} out of range")
        if not 0 <= self.parent < radix.m[self.k]:
            raise ValueError(f"parent {self.parent} out of range at level {self.k}")
        if not 1 <= self.length < radix.p[self.k]:
            raise ValueError("a generalized interval must be a non-empty proper run")
        if not 0 <= self.start < radix.p[self.k]:
            raise ValueError("start out of range")

    def to_list(self) -> list:
        return [self.k, self.parent, self.start, self.length]


def triple(omega: GeneralizedInterval, radix) -> GeneralizedInterval:
    """Arc with the same centre and three times the length, saturating at the parent.

    A saturated result has ``length == p_k`` and is the whole parent atom, so
    it is not itself a generalized interval.
    """
    radix = RadixSequence.coerce(radix)
    p = radix.p[omega.k]
    if 3 * omega.length >= p:
        return GeneralizedInterval(omega.k, omega.parent, 0, p)
    return GeneralizedInterval(omega.k, omega.parent, (omega.start - omega.length) % p, 3 * omega.length)


def generalized_intervals(radix) -> Iterator[GeneralizedInterval]:
    radix = RadixSequence.coerce(radix)
    for k, p in enumerate(radix.p):
        for parent in range(radix.m[k]):
            for length in range(1, p):
                for start in range(p):
                    yield GeneralizedInterval(k, parent, start, length)


def _child_means(a: np.ndarray, k: int, radix: RadixSequence) -> np.ndarray:
    # a: (..., M) -> (..., m_k, p_k) means over each level-(k+1) child
    B = radix.atom_size(k + 1)
    return a.reshape(a.shape[:-1] + (radix.m[k], radix.p[k], B)).mean(axis=-1)


def _run_means(c: np.ndarray, length: int) -> np.ndarray:
    # mean over the circular run starting at every offset; c: (..., p)
    p = c.shape[-1]
    cs = np.concatenate([np.zeros(c.shape[:-1] + (1,)), np.cumsum(np.concatenate([c, c], -1), -1)], -1)
    return (cs[..., length:length + p] - cs[..., :p]) / length


def _cover_max(vals: np.ndarray, length: int) -> np.ndarray:
    # for each child offset, max of vals over the runs of this length containing it
    out = vals.copy()
    for d in range(1, length):
        out = np.maximum(out, np.roll(vals, d, axis=-1))
    return out


def _broadcast_children(level_vals: np.ndarray, k: int, radix: RadixSequence) -> np.ndarray:
    return np.repeat(level_vals.reshape(-1), radix.atom_size(k + 1))


def maximal(f, q: float, radix) -> np.ndarray:
    """``M_q f``: sup of ``(avg_w |f|^q)^{1/q}`` over generalized intervals and the whole space."""
    radix = RadixSequence.coerce(radix)
    if q < 1:
        raise ValueError("q must be >= 1")
    a = np.abs(np.asarray(f)) ** q
    best = np.full(radix.M, a.mean())
    for k in range(radix.levels):
        c = _child_means(a, k, radix)
        level_best = np.zeros_like(c)
        for length in range(1, radix.p[k]):
            level_best = np.maximum(level_best, _cover_max(_run_means(c, length), length))
        best = np.maximum(best, _broadcast_children(level_best, k, radix))
    return best ** (1.0 / q)


def maximal_brute(f, q: float, radix) -> np.ndarray:
    """Exhaustive oracle for :func:`maximal`."""
    radix = RadixSequence.coerce(radix)
    a = np.abs(np.asarray(f)) ** q
    best = np.full(radix.M, a.mean())
    for omega in generalized_intervals(radix):
        idx = omega.atoms(radix)
        best[idx] = np.maximum(best[idx], a[idx].mean())
    return best ** (1.0 / q)


def _as_vector(g) -> np.ndarray:
    g = np.asarray(g, dtype=complex)
    return g[None, :] if g.ndim == 1 else g


def _geometric_median(x: np.ndarray, axes: tuple, iters: int = 60) -> np.ndarray:
    # Weiszfeld iteration started at the mean; x: (S, ..., L, B) with data on ``axes``
    c = x.mean(axis=axes, keepdims=True)
    for _ in range(iters):
        d = np.sqrt(np.sum(np.abs(x - c) ** 2, axis=0, keepdims=True))
        w = 1.0 / np.maximum(d, 1e-300)
        c = np.sum(w * x, axis=axes, keepdims=True) / np.sum(w, axis=axes, keepdims=True)
    return c


def sharp_maximal(g, radix, center: str = "mean") -> np.ndarray:
    """Sharp maximal function of an ``(S, M)`` (or scalar ``(M,)``) function.

    ``center="mean"`` subtracts ``g_omega``; ``center="median"`` subtracts an
    approximate l^2 geometric median, giving (an upper bound for) the
    inf-over-constants variant.
    """
    radix = RadixSequence.coerce(radix)
    g = _as_vector(g)
    S = g.shape[0]
    best = np.zeros(radix.M)
    for k in range(radix.levels):
        p, B = radix.p[k], radix.atom_size(k + 1)
        g4 = g.reshape(S, radix.m[k], p, B)
        level_best = np.zeros((radix.m[k], p))
        for length in range(1, p):
            idx = (np.arange(p)[:, None] + np.arange(length)[None, :]) % p
            x = g4[:, :, idx, :]  # (S, m_k, p starts, length, B)
            if center == "mean":
                c = x.mean(axis=(3, 4), keepdims=True)
            elif center == "median":
                c = _geometric_median(x, (3, 4))
            else:
                raise ValueError(f"unknown center {center!r}")
            osc = np.sqrt(np.sum(np.abs(x - c) ** 2, axis=0)).mean(axis=(2, 3))
            level_best = np.maximum(level_best, _cover_max(osc, length))
        best = np.maximum(best, _broadcast_children(level_best, k, radix))
    return best


def sharp_maximal_brute(g, radix) -> np.ndarray:
    radix = RadixSequence.coerce(radix)
    g = _as_vector(g)
    best = np.zeros(radix.M)
    for omega in generalized_intervals(radix):
        idx = omega.atoms(radix)
        x = g[:, idx]
        osc = pointwise_l2(x - x.mean(axis=1, keepdims=True)).mean()
        best[idx] = np.maximum(best[idx], osc)
    return best


def ap_constant(w, p: float, radix) -> float:
    """``sup_omega avg(w) * avg(w^{1-p'})^{p-1}`` over generalized intervals."""
    radix = RadixSequence.coerce(radix)
    w = np.asarray(w, dtype=float)
    if np.any(~np.isfinite(w)) or np.any(w <= 0):
        raise ValueError("weight must be strictly positive and finite")
    if p <= 1:
        raise ValueError("p must be > 1")
    dual = w ** (1.0 - p / (p - 1.0))
    best = 0.0
    for k in range(radix.levels):
        cw, cd = _child_means(w, k, radix), _child_means(dual, k, radix)
        for length in range(1, radix.p[k]):
            val = _run_means(cw, length) * _run_means(cd, length) ** (p - 1)
            best = max(best, float(val.max()))
    return best


def ap_constant_brute(w, p: float, radix) -> float:
    radix = RadixSequence.coerce(radix)
    w = np.asarray(w, dtype=float)
    dual = w ** (1.0 - p / (p - 1.0))
    best = 0.0
    for omega in generalized_intervals(radix):
        idx = omega.atoms(radix)
        best = max(best, float(w[idx].mean() * dual[idx].mean() ** (p - 1)))
    return best


@dataclass
class CZResult:
    good: np.ndarray
    bad: np.ndarray
    selection: list
    lam: float
    gamma: np.ndarray
    radix: RadixSequence
    fallbacks: list = field(default_factory=list)

    def union_mask(self) -> np.ndarray:
        mask = np.zeros(self.radix.M, dtype=bool)
        for omega in self.selection:
            mask[omega.atoms(self.radix)] = True
        return mask

    def constants(self, h) -> dict:
        """Constants achieved in the three constant-bearing conditions."""
        h = _as_vector(h)
        norm_h = pointwise_l2(h)
        c14 = 0.0
        for omega in self.selection:
            idx = omega.atoms(self.radix)
            denom = norm_h[idx].sum()
            if denom > 0:
                c14 = max(c14, float(pointwise_l2(self.bad[:, idx]).sum() / denom))
        l1 = norm_h.mean()
        return {
            "good_sup": float(pointwise_l2(self.good).max() / self.lam),
            "good_l1": float(pointwise_l2(self.good).mean() / l1) if l1 > 0 else 0.0,
            "bad_local_l1": c14,
        }

    def residuals(self, h) -> dict:
        """Deviation from each exact condition (all zero up to round-off)."""
        h = _as_vector(h)
        M = self.radix.M
        structure = 0.0
        seen = np.zeros(M, dtype=int)
        cancel = 0.0
        for omega in self.selection:
            try:
                omega.validate(self.radix)
            except ValueError:
                structure = 1.0
            idx = omega.atoms(self.radix)
            seen[idx] += 1
            v = np.exp(2j * np.pi * atom_digit(idx, omega.k, self.radix) / self.radix.p[omega.k])
            for s in range(h.shape[0]):
                if (omega, s) in self.fallbacks:
                    continue
                b = self.bad[s, idx]
                scale = max(1.0, np.abs(h[s, idx]).mean())
                cancel = max(cancel, abs(b.mean()) / scale,
                             abs((b * v ** self.gamma[omega.k, s]).mean()) / scale)
        total = pointwise_l2(h).mean()
        measure = sum(omega.measure(self.radix) for omega in self.selection)
        return {
            "decomposition": float(np.abs(self.good + self.bad - h).max()),
            "bad_support": float(np.abs(self.bad[:, ~self.union_mask()]).max(initial=0.0)),
            "cancellation": float(cancel),
            "structure": structure + float(max(0, seen.max(initial=0) - 1)),
            "measure_excess": float(max(0.0, measure - total / self.lam)),
        }

    def to_json(self, h=None) -> str:
        data = {
            "lambda": self.lam,
            "selection": [omega.to_list() for omega in self.selection],
            "fallbacks": [[omega.to_list(), s] for omega, s in self.fallbacks],
        }
        if h is not None:
            data["constants"] = self.constants(h)
        return json.dumps(data)


def _circular_runs(marked: np.ndarray) -> list[list[int]]:
    p = len(marked)
    if marked.all():
        raise RuntimeError("every child is above the threshold; parent average exceeds lambda")
    # rotate so that offset 0 is unmarked, then runs never wrap
    shift = int(np.argmin(marked))
    runs, cur = [], []
    for i in range(p):
        o = (shift + i) % p
        if marked[o]:
            cur.append(o)
        elif cur:
            runs.append(cur)
            cur = []
    if cur:
        runs.append(cur)
    return runs


def _grow_runs(c: np.ndarray, lam: float, cap: float = 2.0) -> list[list[int]]:
    """Runs of children with average in ``(lam, cap * lam]``.

    Start from the maximal runs of children above ``lam`` and absorb
    neighbours (merging with a touching run) while a run averages more than
    ``cap * lam``.  Every run keeps an average above ``lam``.
    """
    p = len(c)
    runs = _circular_runs(c > lam)
    owner = {o: i for i, run in enumerate(runs) for o in run}
    while True:
        heavy = [i for i, run in enumerate(runs) if run and c[run].mean() > cap * lam]
        if not heavy:
            break
        i = heavy[0]
        run = runs[i]
        left, right = (run[0] - 1) % p, (run[-1] + 1) % p
        side = left if c[left] <= c[right] else right
        if side in owner and owner[side] != i:
            j = owner[side]
            other = runs[j]
            merged = other + run if side == left else run + other
            runs[j] = []
        else:
            merged = [side] + run if side == left else run + [side]
        if len(merged) >= p:
            raise RuntimeError("run grew to the whole parent; parent average exceeds lambda")
        runs[i] = merged
        for o in merged:
            owner[o] = i
    return [run for run in runs if run]


def _project_out(x: np.ndarray, v: np.ndarray, use_character: bool):
    """Residual of ``x`` after projecting on ``span{1, conj(v)}`` (normalized measure).

    Returns ``(residual, fell_back)``.
    """
    base = x.mean()
    # a constant character (single-child run) needs no second direction
    if not use_character or np.allclose(v, v[0], rtol=0, atol=1e-14):
        return x - base, False
    u = np.conj(v) - np.conj(v).mean()
    mu = abs(v.mean())
    if mu >= 1 or (1 + mu) / (1 - mu) > GRAM_COND_LIMIT:
        return x - base, True
    coef = (x * np.conj(u)).mean() / (np.abs(u) ** 2).mean()
    return x - base - coef * u, False


def _gamma_table(gamma, radix: RadixSequence, S: int) -> np.ndarray:
    if gamma is None:
        return np.zeros((radix.levels, S), dtype=int)
    if isinstance(gamma, dict):
        table = np.zeros((radix.levels, S), dtype=int)
        for (k, s), v in gamma.items():
            table[k, s] = v
    else:
        table = np.asarray(gamma, dtype=int).reshape(radix.levels, S)
    for k, p in enumerate(radix.p):
        if np.any((table[k] < 0) | (table[k] >= p)):
            raise ValueError(f"gamma at level {k} must lie in [0, {p})")
    return table


def cz_decompose(h, lam: float, radix, gamma=None) -> CZResult:
    """Calderon-Zygmund decomposition ``h = good + bad`` at height ``lam``.

    ``gamma`` gives the integers ``gamma_{k,s}`` either as an array of shape
    ``(N + 1, S)`` or as a dict ``(k, s) -> int``; the bad part on each
    selected ``omega`` at level ``k`` has zero mean and is orthogonal to
    ``conj(r_k^{gamma_{k,s}})`` in every component ``s``.
    """
    radix = RadixSequence.coerce(radix)
    h = _as_vector(h)
    S = h.shape[0]
    if h.shape[1] != radix.M:
        raise ValueError(f"h must have {radix.M} columns")
    table = _gamma_table(gamma, radix, S)
    norm = pointwise_l2(h)
    if norm.mean() > lam:
        raise ValueError(f"||h||_1 = {norm.mean():.6g} exceeds lambda = {lam:.6g}")
    covered = np.zeros(radix.M, dtype=bool)
    bad = np.zeros_like(h)
    selection, fallbacks = [], []
    for k in range(radix.levels):
        p = radix.p[k]
        c = _child_means(norm, k, radix)
        parent_covered = covered.reshape(radix.m[k], -1)[:, 0]
        for parent in np.flatnonzero(~parent_covered & (c > lam).any(axis=1)):
            for run in _grow_runs(c[parent], lam):
                omega = GeneralizedInterval(k, int(parent), run[0], len(run))
                idx = omega.atoms(radix)
                covered[idx] = True
                v = np.exp(2j * np.pi * atom_digit(idx, k, radix) / p)
                for s in range(S):
                    res, fell = _project_out(h[s, idx], v ** table[k, s], table[k, s] != 0)
                    bad[s, idx] = res
                    if fell:
                        fallbacks.append((omega, s))
                selection.append(omega)
    if fallbacks:
        logger.warning("cz_decompose: %d constant-only projections (ill-conditioned Gram)", len(fallbacks))
    return CZResult(h - bad, bad, selection, float(lam), table, radix, fallbacks)


def sharp_vs_maximal_experiment(g, p: float, radix) -> dict:
    """Ratio ``int (M_1 g)^p / (int (g^#)^p + (int |g|)^p)``."""
    radix = RadixSequence.coerce(radix)
    if p <= 1:
        raise ValueError("p must be > 1")
    g = _as_vector(g)
    norm = pointwise_l2(g)
    lhs = float(np.mean(maximal(norm, 1, radix) ** p))
    sharp = float(np.mean(sharp_maximal(g, radix) ** p))
    mass = float(norm.mean() ** p)
    return {"lhs": lhs, "sharp": sharp, "mass": mass, "ratio": lhs / (sharp + mass) if lhs else 0.0}
