"""Input checks shared by the estimator wrappers.

``sklearn.utils.check_array`` rejects complex data, so grid batches are
validated here instead.
"""

from __future__ import annotations

import numpy as np

from .radix import RadixSequence


def check_grid_batch(X, radix: RadixSequence, name: str = "X") -> np.ndarray:
    """Return ``X`` as a complex ``(n_samples, M)`` array.

    A single length-``M`` vector is promoted to one sample.
    """
    arr = np.asarray(X)
    if arr.dtype == object:
        raise TypeError(f"{name} must be numeric")
    arr = arr.astype(complex, copy=False)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 1-D or 2-D, got shape {arr.shape}")
    if arr.shape[1] != radix.M:
        raise ValueError(f"{name} has {arr.shape[1]} features, expected M={radix.M}")
    if arr.shape[0] == 0:
        raise ValueError(f"{name} has no samples")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or infinity")
    return arr


def check_radix(radix) -> RadixSequence:
    if radix is None:
        raise ValueError("radix must be given")
    return RadixSequence.coerce(radix)
