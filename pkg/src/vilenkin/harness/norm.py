"""Lower bounds for ``L^p -> L^p(l^2)`` operator norms by dual-map ascent."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..operators import family_masks
from ..radix import RadixSequence
from ..transform import GridFunction, forward_fast, inverse_fast


class SquareFunctionOperator:
    """``f -> (P_{A_s} f)_s`` for a disjoint family of frequency sets."""

    def __init__(self, family: Sequence, radix, name: str = "square"):
        self.radix = RadixSequence.coerce(radix)
        self.family = list(family)
        self.masks = family_masks(self.family, self.radix.M) if self.family else np.zeros((0, self.radix.M), bool)
        self.name = name

    @property
    def M(self) -> int:
        return self.radix.M

    def apply(self, f) -> np.ndarray:
        """``(..., M) -> (..., S, M)``."""
        spec = forward_fast(f, self.radix)
        return inverse_fast(spec[..., None, :] * self.masks, self.radix)

    def adjoint(self, h) -> np.ndarray:
        """``(..., S, M) -> (..., M)``; the adjoint for the atom measure."""
        spec = forward_fast(h, self.radix)
        return inverse_fast(np.sum(spec * self.masks, axis=-2), self.radix)


def _norm(f, p: float) -> np.ndarray:
    return np.mean(np.abs(f) ** p, axis=-1) ** (1.0 / p)


def _vector_norm(h, p: float) -> np.ndarray:
    return _norm(np.sqrt(np.sum(np.abs(h) ** 2, axis=-2)), p)


def ratio(op, f, p: float) -> np.ndarray:
    """``||op f||_p / ||f||_p`` for a batch of inputs."""
    f = np.asarray(f, dtype=complex)
    return _vector_norm(op.apply(f), p) / _norm(f, p)


@dataclass
class NormEstimate:
    value: float
    argmax: GridFunction
    p: float
    trace: list = field(default_factory=list)

    def verify(self, op) -> float:
        """Recompute the ratio achieved by the stored certificate."""
        return float(ratio(op, self.argmax.values[None, :], self.p)[0])

    def to_dict(self) -> dict:
        return {"value": self.value, "p": self.p, "iterations": len(self.trace), "trace": self.trace}


def _starts(M: int, restarts: int, rng: np.random.Generator) -> np.ndarray:
    f = rng.standard_normal((restarts, M)) + 1j * rng.standard_normal((restarts, M))
    # a point mass and a sparse start help on spiky extremizers
    if restarts > 1:
        f[0] = 0
        f[0, rng.integers(M)] = 1
    if restarts > 2:
        f[1] *= rng.random(M) < 0.1
        f[1, rng.integers(M)] += 1
    return f


def estimate_norm(op, p: float, restarts: int = 32, iterations: int = 100,
                  rng: np.random.Generator | int | None = 0, tol: float = 1e-12) -> NormEstimate:
    """Multi-start ascent for ``sup ||op f||_p / ||f||_p`` with ``p >= 2``.

    Each step maps ``f`` to the dual element of ``Y = op f`` in
    ``L^{p'}(l^2)``, pulls it back through the adjoint and maps the result
    to its dual element in ``L^p``.  For ``p = 2`` this is power iteration on
    ``op^* op``.  The returned value is achieved by the stored certificate.
    """
    if p < 2:
        raise ValueError("estimate_norm expects p >= 2")
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    M = op.M
    if len(getattr(op, "family", [None])) == 0:
        return NormEstimate(0.0, GridFunction(op.radix, np.ones(M)), p, [0.0])
    q = p / (p - 1)
    f = _starts(M, restarts, rng)
    f /= _norm(f, p)[:, None]
    best_val, best_f, trace = -1.0, f[0], []
    stall = 0
    for it in range(iterations + 1):
        Y = op.apply(f)
        vals = _vector_norm(Y, p)
        i = int(np.argmax(vals))
        if vals[i] > best_val * (1 + tol):
            stall = 0
        else:
            stall += 1
        if vals[i] > best_val:
            best_val, best_f = float(vals[i]), f[i].copy()
        trace.append(best_val)
        if best_val == 0.0 or stall >= 5 or it == iterations:
            break
        mag = np.sqrt(np.sum(np.abs(Y) ** 2, axis=-2, keepdims=True))
        z = op.adjoint(mag ** (p - 2) * Y)
        az = np.abs(z)
        f = np.where(az > 0, np.where(az > 0, az, 1.0) ** (q - 2) * z, 0)
        norms = _norm(f, p)
        dead = norms == 0
        if np.any(dead):
            f[dead] = _starts(M, int(dead.sum()) + 2, rng)[2:]
            norms = _norm(f, p)
        f /= norms[:, None]
    best_val = float(ratio(op, best_f[None, :], p)[0])
    return NormEstimate(best_val, GridFunction(op.radix, best_f), p, trace)
