"""Experiment configuration and seeded random interval families."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Any, Optional

import numpy as np

from ..radix import IntervalZ, RadixSequence
from ..intervals import check_disjoint

DEFAULT_BUDGETS = {
    "square": 10.0,
    "subineq": 10.0,
    "refine": 3.0,
    "cz": 64.0,
    "sharp": 64.0,
    "expsum": 16.0,
    "kernel_decay_spread": 2.0,
    "lacunary": 32.0,
}


@dataclass
class ExperimentConfig:
    """Inputs of one harness run.

    ``radix`` is a list of radix sequences (a single flat list is accepted
    and wrapped).  ``intervals`` is either an explicit list of ``[a, b)``
    pairs shared by every radix, or ``{"count": n}`` for seeded random
    families (``families`` of them per radix).  ``params`` carries
    experiment-specific knobs.
    """

    radix: list = field(default_factory=lambda: [[2, 2, 2, 2]])
    intervals: Any = field(default_factory=lambda: {"count": 4})
    families: int = 1
    p_exponents: list = field(default_factory=lambda: [2.0, 4.0, 8.0])
    restarts: int = 32
    iterations: int = 100
    budgets: dict = field(default_factory=dict)
    seed: int = 0
    output: Optional[str] = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.radix and all(isinstance(v, (int, np.integer)) for v in self.radix):
            self.radix = [list(self.radix)]
        self.radix = [list(RadixSequence(tuple(r)).p) for r in self.radix]
        self.p_exponents = [float(p) for p in self.p_exponents]
        self.budgets = {**DEFAULT_BUDGETS, **{k: float(v) for k, v in self.budgets.items()}}
        self.seed = int(self.seed)
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.restarts < 1 or self.iterations < 0:
            raise ValueError("restarts must be >= 1 and iterations >= 0")
        if isinstance(self.intervals, list):
            ivs = [IntervalZ(*iv) for iv in self.intervals]
            check_disjoint(ivs)
            for r in self.radix:
                M = RadixSequence(tuple(r)).M
                if any(iv.b > M or iv.empty for iv in ivs):
                    raise ValueError(f"explicit intervals must be non-empty and inside [0, {M})")
        elif not (isinstance(self.intervals, dict) and int(self.intervals.get("count", 0)) >= 1):
            raise ValueError('intervals must be a list of [a, b) pairs or {"count": n}')

    def require_p_at_least(self, bound: float) -> None:
        if any(p < bound for p in self.p_exponents):
            raise ValueError(f"every exponent must be >= {bound}")

    def budget(self, name: str) -> float:
        return self.budgets[name]

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_json(fh.read())

    def rng(self, *key: int) -> np.random.Generator:
        """Independent stream for the trial identified by ``key``."""
        return np.random.default_rng(np.random.SeedSequence([self.seed, *key]))

    def families_for(self, radix_index: int) -> list[list[IntervalZ]]:
        if isinstance(self.intervals, list):
            return [[IntervalZ(*iv) for iv in self.intervals]]
        M = RadixSequence(tuple(self.radix[radix_index])).M
        count = int(self.intervals["count"])
        return [random_family(M, count, self.rng(radix_index, f, 0xFA)) for f in range(self.families)]


def random_family(M: int, count: int, rng: np.random.Generator, max_tries: int = 1000) -> list[IntervalZ]:
    """Up to ``count`` pairwise disjoint non-empty intervals in ``[0, M)``.

    Candidate pairs are drawn uniformly and rejected when they overlap an
    accepted interval.
    """
    accepted: list[IntervalZ] = []
    for _ in range(max_tries):
        if len(accepted) == count:
            break
        a, b = sorted(int(v) for v in rng.choice(M + 1, size=2, replace=False))
        iv = IntervalZ(a, b)
        if all(iv.b <= other.a or other.b <= iv.a for other in accepted):
            accepted.append(iv)
    return sorted(accepted, key=lambda iv: iv.a)
