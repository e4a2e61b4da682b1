"""Computations on a single cyclic group ``Z_p`` with counting measure.

Covers circular distance and annuli, the cotangent partial-sum identity and
the cotangent operator on arcs, the smoothed kernels ``K(n, m)`` with their
decay estimate, the exponential-sum estimate, arc projectors with weighted
Littlewood-Paley ratios, and the Poisson kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np
import scipy.linalg

from .intervals import phi as default_phi


def _check_modulus(p: int) -> int:
    p = int(p)
    if p < 2:
        raise ValueError(f"modulus must be >= 2, got {p}")
    return p


def dist_p(a, b, p: int):
    """Circular distance: ``|c|`` for the representative ``c`` of ``a - b`` in ``(-p/2, p/2]``."""
    p = _check_modulus(p)
    c = np.mod(np.asarray(a) - np.asarray(b), p)
    c = np.where(2 * c > p, c - p, c)
    out = np.abs(c)
    return int(out) if out.ndim == 0 else out


def annulus(x: int, z: int, k: int, p: int) -> np.ndarray:
    """Points ``y`` with ``2^k d < dist(y, z) <= 2^{k+1} d`` where ``d = dist(x, z)``."""
    p = _check_modulus(p)
    d = dist_p(x, z, p)
    if d == 0:
        raise ValueError("annulus needs x != z")
    y = np.arange(p)
    dy = dist_p(y, z, p)
    return y[(dy > 2**k * d) & (dy <= 2 ** (k + 1) * d)]


def cot_partial_sum_direct(p: int, alpha: int, t: int) -> complex:
    """``sum_{l=p-alpha}^{p-1} exp(2 pi i l t / p)`` by summation."""
    l = np.arange(p - alpha, p)
    return complex(np.exp(2j * np.pi * l * t / p).sum())


def cot_partial_sum(p: int, alpha: int, t: int) -> complex:
    """Closed form of :func:`cot_partial_sum_direct` through ``cot(pi t / p)``."""
    p = _check_modulus(p)
    if not 0 <= alpha < p:
        raise ValueError("alpha must lie in [0, p)")
    if t % p == 0:
        raise ValueError("p divides t: the cotangent has a pole")
    e = np.exp(-2j * np.pi * alpha * t / p)
    cot = 1.0 / math.tan(math.pi * t / p)
    return complex(0.5 * e - 0.5 + 0.5j * e * cot - 0.5j * cot)


def hilbert_cot(masses, positions, t: int, p: int, scale: float = 1.0) -> complex:
    """``scale * sum_j G_j cot(pi (t - j) / p)`` for atom masses ``G_j`` on an arc.

    ``positions`` are the arc points ``j`` carrying the integrals ``G_j``;
    ``scale`` is ``m_k`` when ``Z_p`` is the level-``k`` child set.
    """
    p = _check_modulus(p)
    positions = np.asarray(positions)
    if np.any(np.mod(positions - t, p) == 0):
        raise ValueError("target lies on the arc")
    masses = np.asarray(masses, dtype=complex)
    return complex(scale * np.sum(masses / np.tan(np.pi * (t - positions) / p)))


def hilbert_decay_ratio(masses, start: int, t: int, p: int, scale: float = 1.0) -> float:
    """``|H(t)| dist(t, start)^2 / (scale p L sum|G_j|)`` for masses on the arc ``[start, start+L)``.

    For mean-zero masses this stays bounded once ``t`` is away from the arc.
    """
    masses = np.asarray(masses, dtype=complex)
    L = len(masses)
    positions = (start + np.arange(L)) % p
    total = np.abs(masses).sum()
    if total == 0:
        return 0.0
    value = abs(hilbert_cot(masses, positions, t, p, scale))
    return float(value * dist_p(t, start, p) ** 2 / (scale * p * max(L - 1, 1) * total))


def psi_r(t, r: int, p: int, phi=default_phi) -> np.ndarray:
    """``sum_l phi(l / 2^r) exp(2 pi i l t / p)`` over the support of ``phi``."""
    p = _check_modulus(p)
    reach = math.ceil(phi.support * 2**r)
    l = np.arange(-reach, reach + 1)
    w = phi(l / 2**r)
    t = np.asarray(t, dtype=float)
    return np.tensordot(np.exp(2j * np.pi * np.multiply.outer(t, l) / p), w, axes=([-1], [0]))


@lru_cache(maxsize=256)
def psi_table(r: int, p: int, phi=default_phi) -> np.ndarray:
    """``psi_r`` on all of ``Z_p``: fold the weights mod ``p`` and invert the DFT."""
    reach = math.ceil(phi.support * 2**r)
    l = np.arange(-reach, reach + 1)
    folded = np.zeros(p)
    np.add.at(folded, np.mod(l, p), phi(l / 2**r))
    table = p * np.fft.ifft(folded)
    table.flags.writeable = False
    return table


@dataclass(frozen=True)
class KernelSpec:
    p: int
    r: int
    n_ref: int

    def __post_init__(self):
        _check_modulus(self.p)
        if self.r < 0 or 2**self.r > self.p:
            raise ValueError(f"need 0 <= r and 2^r <= p, got r={self.r}, p={self.p}")
        if not 0 < self.n_ref * 2**self.r < self.p:
            raise ValueError(f"need 0 < n_ref < p / 2^r, got n_ref={self.n_ref}")

    @property
    def band(self) -> str:
        """``"low"`` when ``n_ref <= p / 2^{r+1}``, otherwise ``"high"``."""
        return "low" if self.n_ref * 2 ** (self.r + 1) <= self.p else "high"


def kernel(spec: KernelSpec, n, m, phi=default_phi) -> np.ndarray:
    """``K(n, m) = (1/p) exp(-2 pi i 2^r n_ref m / p) psi_r(n - m)``."""
    n, m = np.asarray(n), np.asarray(m)
    phase = np.mod(2**spec.r * spec.n_ref * m, spec.p) / spec.p
    psi = psi_table(spec.r, spec.p, phi)[np.mod(n - m, spec.p)]
    return np.exp(-2j * np.pi * phase) * psi / spec.p


def kernel_matrix(spec: KernelSpec, phi=default_phi) -> np.ndarray:
    idx = np.arange(spec.p)
    return kernel(spec, idx[:, None], idx[None, :], phi)


def kernel_operator_norm(spec: KernelSpec, phi=default_phi) -> float:
    """Spectral norm of ``g -> sum_m K(., m) g(m)`` on ``l^2(Z_p)``."""
    return float(np.linalg.norm(kernel_matrix(spec, phi), 2))


def _kernel_differences(x: int, z: int, k: int, specs: Sequence[KernelSpec], phi=default_phi):
    p = specs[0].p
    if any(s.p != p for s in specs):
        raise ValueError("all kernels must share the modulus")
    y = annulus(x, z, k, p)
    d = np.stack([kernel(s, z, y, phi) - kernel(s, x, y, phi) for s in specs]) if len(y) else np.zeros((len(specs), 0))
    return y, d


def kernel_decay_check(x: int, z: int, k: int, lam: Mapping, specs: Mapping, phi=default_phi) -> tuple[float, float]:
    """Return ``(lhs, unit)`` where ``unit = 2^{-5k/3} sum|lam|^2 / dist(x, z)``.

    ``lhs = sum_{y in I_k(x,z)} |sum_key lam[key] (K_key(z,y) - K_key(x,y))|^2``;
    the decay estimate asserts ``lhs <= A^2 unit``.
    """
    keys = sorted(specs)
    coeffs = np.array([lam[key] for key in keys], dtype=complex)
    energy = float(np.sum(np.abs(coeffs) ** 2))
    if energy == 0:
        raise ValueError("coefficients must not all vanish")
    p = specs[keys[0]].p
    _, d = _kernel_differences(x, z, k, [specs[key] for key in keys], phi)
    lhs = float(np.sum(np.abs(coeffs @ d) ** 2))
    return lhs, 2 ** (-5 * k / 3) * energy / dist_p(x, z, p)


def kernel_decay_worst(x: int, z: int, k: int, specs: Sequence[KernelSpec], phi=default_phi) -> float:
    """Largest ``lhs / unit`` over all coefficient vectors (top eigenvalue)."""
    _, d = _kernel_differences(x, z, k, specs, phi)
    if d.shape[1] == 0:
        return 0.0
    top = float(np.linalg.eigvalsh(d.conj() @ d.T)[-1])
    return top * dist_p(x, z, specs[0].p) * 2 ** (5 * k / 3)


def band_indices(p: int, r: int, band: str) -> np.ndarray:
    """Reference indices ``j`` of one band: ``(0, p/2^{r+1}]`` or ``(p/2^{r+1}, p/2^r)``."""
    j = np.arange(1, p // 2**r + 1)
    low = j * 2 ** (r + 1) <= p
    if band == "low":
        return j[low]
    if band == "high":
        return j[~low & (j * 2**r < p)]
    raise ValueError(f"unknown band {band!r}")


def expsum_window(p: int, r: int) -> int:
    return p // 2**r


def expsum_bound_check(p: int, r: int, a: int, b: int, lam: Mapping) -> tuple[float, float]:
    """``(lhs, scale)``: ``lhs = sum_{y=a}^b |sum_j lam_j e^{-2 pi i 2^r j y / p}|^2`` and
    ``scale = (p / 2^{1+r}) sum|lam_j|^2``; the estimate is ``lhs <= C scale``."""
    p = _check_modulus(p)
    if b - a + 1 != expsum_window(p, r):
        raise ValueError(f"window must hold floor(p/2^r) = {expsum_window(p, r)} points")
    js = np.array(sorted(lam))
    coeffs = np.array([lam[j] for j in js], dtype=complex)
    y = np.arange(a, b + 1)
    phase = np.mod(2**r * np.multiply.outer(y, js), p) / p
    lhs = float(np.sum(np.abs(np.exp(-2j * np.pi * phase) @ coeffs) ** 2))
    return lhs, p / 2 ** (1 + r) * float(np.sum(np.abs(coeffs) ** 2))


def expsum_worst(p: int, r: int, a: int, js) -> float:
    """Worst ``lhs / scale`` over coefficients supported on ``js``."""
    js = np.asarray(js)
    y = np.arange(a, a + expsum_window(p, r))
    e = np.exp(-2j * np.pi * np.mod(2**r * np.multiply.outer(y, js), p) / p)
    return float(np.linalg.eigvalsh(e.conj().T @ e)[-1] / (p / 2 ** (1 + r)))


def geometric_sum_moduli(p: int, r: int, a: int, js) -> np.ndarray:
    """``|sum_{y in window} e^{2 pi i 2^r (m - j) y / p}|`` for distinct ``m, j`` in ``js``
    with ``|m - j| < p / 2^{1+r}``."""
    js = np.asarray(js)
    diff = np.subtract.outer(js, js).ravel()
    diff = np.unique(diff[(diff != 0) & (np.abs(diff) * 2 ** (1 + r) < p)])
    y = np.arange(a, a + expsum_window(p, r))
    phase = np.mod(2**r * np.multiply.outer(diff, y), p) / p
    return np.abs(np.exp(2j * np.pi * phase).sum(axis=1))


@dataclass(frozen=True)
class Arc:
    """Circular run ``start, start+1, ..., start+length-1`` in ``Z_p``."""

    start: int
    length: int

    def indices(self, p: int) -> np.ndarray:
        if not 1 <= self.length <= p:
            raise ValueError(f"arc length must lie in [1, {p}]")
        return (self.start + np.arange(self.length)) % p

    def mask(self, p: int) -> np.ndarray:
        out = np.zeros(p, dtype=bool)
        out[self.indices(p)] = True
        return out


def arc_projector(h, arc: Arc) -> np.ndarray:
    """Zero every DFT coefficient outside ``arc`` (frequency ``n`` is ``e^{2 pi i n x / p}``)."""
    h = np.asarray(h, dtype=complex)
    return np.fft.ifft(np.fft.fft(h, axis=-1) * arc.mask(h.shape[-1]), axis=-1)


def a2_constant_zp(v) -> float:
    """``sup`` over arcs (including ``Z_p``) of ``avg(v) avg(1/v)``."""
    v = np.asarray(v, dtype=float)
    if np.any(~np.isfinite(v)) or np.any(v <= 0):
        raise ValueError("weight must be strictly positive and finite")
    p = len(v)
    cv = np.concatenate([[0.0], np.cumsum(np.tile(v, 2))])
    ci = np.concatenate([[0.0], np.cumsum(np.tile(1 / v, 2))])
    best = 0.0
    for L in range(1, p + 1):
        val = (cv[L:L + p] - cv[:p]) * (ci[L:L + p] - ci[:p]) / L**2
        best = max(best, float(val.max()))
    return best


def a2_constant_brute(v) -> float:
    v = np.asarray(v, dtype=float)
    p = len(v)
    best = 0.0
    for L in range(1, p + 1):
        for s in range(p):
            idx = Arc(s, L).indices(p)
            best = max(best, float(v[idx].mean() * (1 / v[idx]).mean()))
    return best


def power_weight(p: int, a: float) -> np.ndarray:
    """``v(l) = (1 + dist_p(l, 0))^a``."""
    return (1.0 + dist_p(np.arange(p), 0, p)) ** a


def lacunary_intervals(ratio: float = 2.0, smallest: float = 0.0) -> list[tuple[float, float]]:
    """``[ratio^{-(s+1)}, ratio^{-s})`` for ``s = 0, 1, ...`` down to ``smallest``."""
    if ratio <= 1:
        raise ValueError("lacunary ratio must exceed 1")
    out, s = [], 0
    while ratio ** (-s) > smallest and s < 200:
        out.append((ratio ** (-(s + 1)), ratio ** (-s)))
        s += 1
    return out


def check_lacunary(intervals, min_ratio: float = 1.5) -> None:
    """Disjoint subintervals of ``(0, 1]`` whose right endpoints shrink by ``min_ratio``."""
    ivs = sorted(((float(lo), float(hi)) for lo, hi in intervals), key=lambda t: -t[1])
    for lo, hi in ivs:
        if not 0 < lo < hi <= 1:
            raise ValueError(f"interval ({lo}, {hi}) is not inside (0, 1]")
    for (lo1, hi1), (lo2, hi2) in zip(ivs, ivs[1:]):
        if hi2 > lo1:
            raise ValueError("intervals overlap")
        if hi1 / hi2 < min_ratio:
            raise ValueError(f"endpoints {hi1} and {hi2} are not lacunary")


def arcs_from_intervals(p: int, intervals) -> list[Arc]:
    """Frequency arcs ``{n : lo <= n / p < hi}``, dropping empty ones."""
    arcs = []
    for lo, hi in intervals:
        a, b = math.ceil(lo * p), math.ceil(hi * p)
        if b > a:
            arcs.append(Arc(a, b - a))
    return arcs


def _resolve_arcs(p: int, lacunary) -> list[Arc]:
    if lacunary is None or isinstance(lacunary, (int, float)):
        intervals = lacunary_intervals(2.0 if lacunary is None else float(lacunary), 1.0 / (2 * p))
    else:
        intervals = list(lacunary)
        check_lacunary(intervals)
    return arcs_from_intervals(p, intervals)


def weighted_lp_experiment(p: int, lacunary, v, h) -> tuple[float, float, float]:
    """``(lhs, rhs, lhs/rhs)`` for ``sum_s sum_x |P_{I_s} h|^2 v`` against ``sum |h|^2 v``.

    ``lacunary`` is a ratio (default 2) or an explicit list of ``(lo, hi)``.
    """
    v = np.asarray(v, dtype=float)
    h = np.asarray(h, dtype=complex)
    if v.shape != (p,) or h.shape != (p,):
        raise ValueError("weight and function must have length p")
    arcs = _resolve_arcs(p, lacunary)
    lhs = float(sum(np.sum(np.abs(arc_projector(h, arc)) ** 2 * v) for arc in arcs))
    rhs = float(np.sum(np.abs(h) ** 2 * v))
    return lhs, rhs, lhs / rhs


def weighted_lp_worst(p: int, lacunary, v) -> float:
    """Largest ratio over all ``h``.

    In the frequency domain ``sum |h|^2 v = c^* C c`` with the circulant
    ``C[j, k] = hat v(j - k)``, and the left side keeps the blocks of ``C``
    that pair two frequencies of the same arc; the answer is the top
    generalized eigenvalue of that pair.
    """
    v = np.asarray(v, dtype=float)
    arcs = _resolve_arcs(p, lacunary)
    vhat = np.fft.fft(v)
    idx = np.arange(p)
    C = vhat[np.mod(idx[:, None] - idx[None, :], p)]
    label = np.full(p, -1)
    for s, arc in enumerate(arcs):
        label[arc.indices(p)] = s
    same = (label[:, None] == label[None, :]) & (label[:, None] >= 0)
    top = scipy.linalg.eigh(np.where(same, C, 0), C, eigvals_only=True, subset_by_index=[p - 1, p - 1])
    return float(top[0])


def poisson_kernel(theta, delta: float) -> np.ndarray:
    """``sum_n e^{-delta |n|} e^{2 pi i n theta}`` in closed form."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    q = math.exp(-delta)
    return (1 - q * q) / (1 - 2 * q * np.cos(2 * np.pi * np.asarray(theta, dtype=float)) + q * q)


def poisson_series(theta, delta: float, terms: int = 2000) -> np.ndarray:
    n = np.arange(-terms, terms + 1)
    theta = np.asarray(theta, dtype=float)
    return np.real(np.exp(2j * np.pi * np.multiply.outer(theta, n)) @ np.exp(-delta * np.abs(n)))


def poisson_l2_quadrature(delta: float, nodes: int = 2**16) -> float:
    """Composite midpoint rule for ``int_0^1 Q_delta^2``."""
    theta = (np.arange(nodes) + 0.5) / nodes
    return float(np.mean(poisson_kernel(theta, delta) ** 2))


def poisson_l2_exact(delta: float) -> float:
    q2 = math.exp(-2 * delta)
    return (1 + q2) / (1 - q2)
