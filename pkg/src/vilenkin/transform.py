"""Vilenkin-Fourier transform on the finest atoms of the filtration.

A function on ``[0, 1)`` that is constant on the ``M`` atoms
``[x/M, (x+1)/M)`` is stored as a complex vector of length ``M``.  The point
digits of atom ``x`` are ``a_j(x) = (x // (M / m_{j+1})) mod p_j``, so ``a_0``
is the most significant one; this matches the identification
``(a_0, a_1, ...) -> sum_j a_j / (p_0 ... p_j)``.

Forward transforms carry the factor ``1/M`` (inner product with atom measure
``1/M``); inverse transforms carry none.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .radix import RadixSequence


def atom_digit(x, k: int, radix) -> np.ndarray:
    """Digit ``a_k`` of (an array of) atom indices."""
    radix = RadixSequence.coerce(radix)
    return (np.asarray(x) // (radix.M // radix.m[k + 1])) % radix.p[k]


def atom_digit_table(radix) -> np.ndarray:
    """Array of shape ``(M, N + 1)`` with ``a_j(x)`` in row ``x``."""
    radix = RadixSequence.coerce(radix)
    x = np.arange(radix.M, dtype=np.int64)
    return np.stack([atom_digit(x, k, radix) for k in range(radix.levels)], axis=1)


def rademacher(k: int, x, radix) -> np.ndarray:
    """Generalised Rademacher function ``r_k`` evaluated at atom(s) ``x``."""
    radix = RadixSequence.coerce(radix)
    if not 0 <= k < radix.levels:
        raise IndexError(f"level {k} outside [0, {radix.levels})")
    x = np.asarray(x)
    if np.any((x < 0) | (x >= radix.M)):
        raise IndexError("atom index out of range")
    return np.exp(2j * np.pi * atom_digit(x, k, radix) / radix.p[k])


def vilenkin_char(n, x, radix) -> np.ndarray:
    """``w_n(x) = prod_j r_j(x)^{n_j}``, broadcasting over ``n`` and ``x``."""
    radix = RadixSequence.coerce(radix)
    n = np.asarray(n, dtype=np.int64)
    x = np.asarray(x, dtype=np.int64)
    if np.any((n < 0) | (n >= radix.M)) or np.any((x < 0) | (x >= radix.M)):
        raise IndexError("index out of range")
    phase = np.zeros(np.broadcast(n, x).shape)
    for k, (p, m) in enumerate(zip(radix.p, radix.m)):
        # reduce the digit product mod p before dividing to keep phases small
        phase = phase + ((n // m) % p) * atom_digit(x, k, radix) % p / p
    return np.exp(2j * np.pi * phase)


def character_matrix(radix) -> np.ndarray:
    """Dense ``(M, M)`` matrix ``W[n, x] = w_n(x)``."""
    radix = RadixSequence.coerce(radix)
    idx = np.arange(radix.M)
    return vilenkin_char(idx[:, None], idx[None, :], radix)


def forward_naive(values, radix) -> np.ndarray:
    """Reference transform ``(1/M) sum_x f(x) conj(w_n(x))`` in ``O(M^2)``."""
    radix = RadixSequence.coerce(radix)
    values = np.asarray(values, dtype=complex)
    return values @ character_matrix(radix).conj().T / radix.M


def inverse_naive(coeffs, radix) -> np.ndarray:
    radix = RadixSequence.coerce(radix)
    coeffs = np.asarray(coeffs, dtype=complex)
    return coeffs @ character_matrix(radix)


def _dft_matrix(p: int, sign: int) -> np.ndarray:
    j = np.arange(p)
    return np.exp(sign * 2j * np.pi * np.outer(j, j) / p)


def _per_digit(arr: np.ndarray, radix: RadixSequence, sign: int) -> np.ndarray:
    # arr has shape (..., p_0, ..., p_N); each axis is transformed independently.
    lead = arr.ndim - radix.levels
    for k, p in enumerate(radix.p):
        axis = lead + k
        arr = np.moveaxis(np.tensordot(arr, _dft_matrix(p, sign), axes=([axis], [1])), -1, axis)
    return arr


def forward_fast(values, radix) -> np.ndarray:
    """Tensor-product transform, one length-``p_j`` DFT per digit axis.

    The group is a direct product, so no twiddle factors appear; this is not
    the cyclic FFT of ``Z_M``.  Leading axes of ``values`` are batch axes.
    Axes are processed in order ``0..N``.
    """
    radix = RadixSequence.coerce(radix)
    values = np.asarray(values, dtype=complex)
    batch = values.shape[:-1]
    arr = values.reshape(batch + radix.p)
    arr = _per_digit(arr, radix, -1) / radix.M
    # axis k now carries n_k; n = sum n_k m_k is a Fortran-order flattening
    return _flatten_frequency(arr, batch, radix)


def inverse_fast(coeffs, radix) -> np.ndarray:
    radix = RadixSequence.coerce(radix)
    coeffs = np.asarray(coeffs, dtype=complex)
    batch = coeffs.shape[:-1]
    arr = _unflatten_frequency(coeffs, batch, radix)
    arr = _per_digit(arr, radix, +1)
    return arr.reshape(batch + (radix.M,))


def _flatten_frequency(arr, batch, radix):
    nb = len(batch)
    perm = tuple(range(nb)) + tuple(nb + k for k in reversed(range(radix.levels)))
    return np.ascontiguousarray(arr.transpose(perm)).reshape(batch + (radix.M,))


def _unflatten_frequency(coeffs, batch, radix):
    nb = len(batch)
    arr = coeffs.reshape(batch + tuple(reversed(radix.p)))
    perm = tuple(range(nb)) + tuple(nb + k for k in reversed(range(radix.levels)))
    return arr.transpose(perm)


def forward(values, radix, method: str = "fast") -> np.ndarray:
    if method == "fast":
        return forward_fast(values, radix)
    if method == "naive":
        return forward_naive(values, radix)
    raise ValueError(f"unknown method {method!r}")


def inverse(coeffs, radix, method: str = "fast") -> np.ndarray:
    if method == "fast":
        return inverse_fast(coeffs, radix)
    if method == "naive":
        return inverse_naive(coeffs, radix)
    raise ValueError(f"unknown method {method!r}")


def walsh_paley(values) -> np.ndarray:
    """Walsh-Paley coefficients of a length ``2^N`` vector, for cross-checks.

    Builds the Paley-ordered Walsh functions from the bits of the frequency
    and of the dyadic point and sums directly.
    """
    values = np.asarray(values, dtype=complex)
    M = values.shape[-1]
    N = M.bit_length() - 1
    if 1 << N != M:
        raise ValueError("length must be a power of two")
    n = np.arange(M)
    x = np.arange(M)
    # Paley order: frequency bit j pairs with the j-th binary digit of x/M
    parity = np.zeros((M, M), dtype=np.int64)
    for j in range(N):
        parity += ((n[:, None] >> j) & 1) * ((x[None, :] >> (N - 1 - j)) & 1)
    return values @ ((-1.0) ** parity).T / M


def _encode(vec) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(vec, dtype=complex)]


def _decode(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("expected an array of [re, im] pairs")
    return arr[:, 0] + 1j * arr[:, 1]


@dataclass
class GridFunction:
    """Step function on the ``M`` finest atoms."""

    radix: RadixSequence
    values: np.ndarray

    def __post_init__(self):
        self.radix = RadixSequence.coerce(self.radix)
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (self.radix.M,):
            raise ValueError(f"expected {self.radix.M} values, got {self.values.shape}")

    def l2_norm(self) -> float:
        return float(np.sqrt(np.mean(np.abs(self.values) ** 2)))

    def spectrum(self, method: str = "fast") -> "Spectrum":
        return Spectrum(self.radix, forward(self.values, self.radix, method))

    def to_json(self) -> str:
        return json.dumps({"radix": list(self.radix.p), "values": _encode(self.values)})

    @classmethod
    def from_json(cls, text: str) -> "GridFunction":
        data = json.loads(text)
        return cls(RadixSequence(tuple(data["radix"])), _decode(data["values"]))


@dataclass
class Spectrum:
    """Vilenkin coefficients indexed by frequency ``0 <= n < M``."""

    radix: RadixSequence
    coeffs: np.ndarray

    def __post_init__(self):
        self.radix = RadixSequence.coerce(self.radix)
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.shape != (self.radix.M,):
            raise ValueError(f"expected {self.radix.M} coefficients, got {self.coeffs.shape}")

    def function(self, method: str = "fast") -> GridFunction:
        return GridFunction(self.radix, inverse(self.coeffs, self.radix, method))

    def to_json(self) -> str:
        return json.dumps({"radix": list(self.radix.p), "coeffs": _encode(self.coeffs)})

    @classmethod
    def from_json(cls, text: str) -> "Spectrum":
        data = json.loads(text)
        return cls(RadixSequence(tuple(data["radix"])), _decode(data["coeffs"]))
