"""Model parameters, duplication-length sources and repeat-length histograms.

Lengths are integers measured in bases. Every source distribution is
normalized by explicit summation over its finite support, so exponents at or
below one are as valid as steep ones.

Power-law exponents use the convention ``pmf(m) ~ m**(-gamma)`` with
``gamma > 0``. Figure captions that quote a negative exponent (``-2.4``,
``-3.0``) map onto ``gamma=2.4`` and ``gamma=3.0`` here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import ClassVar, Mapping

import numpy as np

from .errors import InputError

COUNTING_MODES = ("occurrences", "classes")


def phi1(gamma: float, N: int) -> float:
    """Return the truncated zeta normalization ``sum_{k=1}^{N} k**(-gamma)``.

    This equals ``zeta(gamma) - zeta(gamma, N + 1)`` wherever the Riemann
    zeta converges, and stays well defined for ``gamma <= 1``.
    """
    if int(N) != N or N < 1:
        raise InputError(f"phi1 needs a positive integer N, got {N!r}")
    k = np.arange(1, int(N) + 1, dtype=np.float64)
    return math.fsum(k ** (-float(gamma)))


class SourceDistribution:
    """Duplication length distribution ``P(m)`` on a finite integer support."""

    kind: ClassVar[str] = ""

    def _weights(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    @cached_property
    def _table(self) -> tuple[np.ndarray, np.ndarray, float]:
        lengths, weights = self._weights()
        norm = math.fsum(weights)
        probs = weights / norm
        return lengths, probs, norm

    @property
    def lengths(self) -> np.ndarray:
        return self._table[0]

    @property
    def probs(self) -> np.ndarray:
        return self._table[1]

    @property
    def normalization(self) -> float:
        """Sum of the unnormalized weights over the support."""
        return self._table[2]

    @property
    def min_length(self) -> int:
        return int(self.lengths[0])

    @property
    def max_length(self) -> int:
        return int(self.lengths[-1])

    def pmf(self, m: int) -> float:
        if m <= 0:
            raise InputError(f"lengths are positive integers, got {m}")
        lo = self.min_length
        if m < lo or m > self.max_length:
            return 0.0
        return float(self.probs[m - lo])

    @cached_property
    def first_moment(self) -> float:
        return math.fsum(self.lengths * self.probs)

    @cached_property
    def _cdf(self) -> np.ndarray:
        cdf = np.cumsum(self.probs)
        cdf[-1] = 1.0
        return cdf

    def sample(self, rng: np.random.Generator, size: int | None = None):
        """Draw lengths by inverse-CDF lookup."""
        u = rng.random(size)
        idx = np.searchsorted(self._cdf, u, side="right")
        idx = np.minimum(idx, len(self.lengths) - 1)
        out = self.lengths[idx]
        return int(out) if size is None else out

    def to_dict(self) -> dict:
        raise NotImplementedError

    @staticmethod
    def from_dict(d: Mapping) -> "SourceDistribution":
        try:
            kind = d["type"]
            if kind == "monoscale":
                return Monoscale(int(d["D"]))
            if kind == "powerlaw":
                return PowerLaw(float(d["gamma"]), int(d["N"]))
            if kind == "shifted_powerlaw":
                return ShiftedPowerLaw(float(d["m0"]), float(d["gamma"]), int(d["N"]))
            if kind == "uniform":
                return UniformInterval(int(d["lo"]), int(d["hi"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"bad source description {dict(d)!r}: {exc}") from exc
        raise InputError(f"unknown source type {kind!r}")


@dataclass(frozen=True, eq=True)
class Monoscale(SourceDistribution):
    D: int
    kind: ClassVar[str] = "monoscale"

    def __post_init__(self):
        if self.D < 1:
            raise InputError(f"monoscale length must be >= 1, got {self.D}")

    def _weights(self):
        return np.array([self.D], dtype=np.int64), np.array([1.0])

    def sample(self, rng, size=None):
        return self.D if size is None else np.full(size, self.D, dtype=np.int64)

    def to_dict(self):
        return {"type": self.kind, "D": self.D}


@dataclass(frozen=True, eq=True)
class PowerLaw(SourceDistribution):
    """``P(m) = m**(-gamma) / phi1(gamma, N)`` on ``m = 1..N``."""

    gamma: float
    N: int
    kind: ClassVar[str] = "powerlaw"

    def __post_init__(self):
        if self.N < 1:
            raise InputError(f"power-law cutoff must be >= 1, got {self.N}")
        if self.gamma <= 0:
            raise InputError(
                f"gamma must be positive (pmf ~ m**-gamma); got {self.gamma}. "
                "Negative caption exponents map to gamma = -exponent.")

    def _weights(self):
        m = np.arange(1, self.N + 1, dtype=np.int64)
        return m, m.astype(np.float64) ** (-self.gamma)

    @property
    def phi1(self) -> float:
        return self.normalization

    def to_dict(self):
        return {"type": self.kind, "gamma": self.gamma, "N": self.N}


@dataclass(frozen=True, eq=True)
class ShiftedPowerLaw(SourceDistribution):
    """``P(m) ~ 1 / (m0 + m**gamma)`` on ``m = 1..N``."""

    m0: float
    gamma: float
    N: int
    kind: ClassVar[str] = "shifted_powerlaw"

    def __post_init__(self):
        if self.N < 1:
            raise InputError(f"cutoff must be >= 1, got {self.N}")
        if self.gamma <= 0 or self.m0 < 0:
            raise InputError(f"need gamma > 0 and m0 >= 0, got {self.gamma}, {self.m0}")

    def _weights(self):
        m = np.arange(1, self.N + 1, dtype=np.int64)
        return m, 1.0 / (self.m0 + m.astype(np.float64) ** self.gamma)

    def to_dict(self):
        return {"type": self.kind, "m0": self.m0, "gamma": self.gamma, "N": self.N}


@dataclass(frozen=True, eq=True)
class UniformInterval(SourceDistribution):
    lo: int
    hi: int
    kind: ClassVar[str] = "uniform"

    def __post_init__(self):
        if not 1 <= self.lo <= self.hi:
            raise InputError(f"need 1 <= lo <= hi, got [{self.lo}, {self.hi}]")

    def _weights(self):
        m = np.arange(self.lo, self.hi + 1, dtype=np.int64)
        return m, np.ones(len(m))

    def to_dict(self):
        return {"type": self.kind, "lo": self.lo, "hi": self.hi}


# m0 values used for the shifted power-law comparison runs.
SHIFTED_POWERLAW_PRESETS = (10.0, 35.0, 75.0, 250.0)


def shifted_powerlaw_presets(gamma: float = 2.4, N: int = 10**5) -> list[ShiftedPowerLaw]:
    return [ShiftedPowerLaw(m0, gamma, N) for m0 in SHIFTED_POWERLAW_PRESETS]


def source_pmf(source: SourceDistribution, m: int) -> float:
    return source.pmf(m)


def first_moment(source: SourceDistribution) -> float:
    return source.first_moment


def sample_length(source: SourceDistribution, rng: np.random.Generator) -> int:
    return source.sample(rng)


@dataclass(frozen=True)
class ModelParams:
    """Full parameterization of the balance equations.

    ``lam`` is the per-base duplication rate; when omitted it is derived as
    ``beta / L``.
    """

    L: int
    beta: float
    mu: float
    source: SourceDistribution
    a: int = 1
    lam: float | None = None

    def __post_init__(self):
        if self.L < 2:
            raise InputError(f"L must be >= 2, got {self.L}")
        if self.a < 1:
            raise InputError(f"a must be >= 1, got {self.a}")
        # beta = 0 is a valid simulation setting; the balance equations reject it
        if not self.beta >= 0:
            raise InputError(f"beta must be non-negative, got {self.beta}")
        if self.mu < 0:
            raise InputError(f"mu must be non-negative, got {self.mu}")
        if self.lam is None:
            object.__setattr__(self, "lam", self.beta / self.L)
        elif not math.isclose(self.lam * self.L, self.beta, rel_tol=1e-12):
            raise InputError(f"lam*L={self.lam * self.L} disagrees with beta={self.beta}")
        if self.source.min_length < 1 or self.source.max_length > self.L:
            raise InputError(
                f"source support [{self.source.min_length}, {self.source.max_length}] "
                f"is not inside [1, {self.L}]")

    @property
    def M1(self) -> float:
        return self.source.first_moment

    def to_dict(self) -> dict:
        return {"L": self.L, "beta": self.beta, "mu": self.mu, "a": self.a,
                "lam": self.lam, "source": self.source.to_dict()}

    @classmethod
    def from_dict(cls, d: Mapping) -> "ModelParams":
        try:
            return cls(L=int(d["L"]), beta=float(d["beta"]), mu=float(d["mu"]),
                       source=SourceDistribution.from_dict(d["source"]),
                       a=int(d.get("a", 1)))
        except KeyError as exc:
            raise InputError(f"model parameters missing field {exc}") from exc


@dataclass(frozen=True)
class LengthHistogram:
    """Ensemble-averaged count of supermaximal repeats per length.

    ``sigma`` is the alphabet size of the analysed sequences when known; it
    selects the logarithm base for random-sequence peak checks.
    """

    counts: Mapping[int, float] = field(default_factory=dict)
    realizations: int = 1
    counting_mode: str = "occurrences"
    sigma: int | None = None

    def __post_init__(self):
        if self.counting_mode not in COUNTING_MODES:
            raise InputError(f"counting_mode must be one of {COUNTING_MODES}")
        if self.realizations < 1:
            raise InputError("realizations must be positive")
        clean = {}
        for m, c in self.counts.items():
            if int(m) != m or m < 1:
                raise InputError(f"histogram length {m!r} is not a positive integer")
            if not c >= 0:
                raise InputError(f"histogram count {c!r} at m={m} is negative")
            clean[int(m)] = float(c)
        object.__setattr__(self, "counts", dict(sorted(clean.items())))

    @classmethod
    def from_arrays(cls, lengths, counts, **kw) -> "LengthHistogram":
        return cls({int(m): float(c) for m, c in zip(lengths, counts) if c != 0}, **kw)

    def to_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        m = np.fromiter(self.counts.keys(), dtype=np.int64, count=len(self.counts))
        c = np.fromiter(self.counts.values(), dtype=np.float64, count=len(self.counts))
        return m, c

    def dense(self, m_max: int | None = None) -> np.ndarray:
        """Counts as a vector indexed by ``m`` (entry 0 unused)."""
        if m_max is None:
            m_max = max(self.counts, default=0)
        out = np.zeros(m_max + 1)
        for m, c in self.counts.items():
            if m <= m_max:
                out[m] = c
        return out

    def __len__(self):
        return len(self.counts)

    def get(self, m: int) -> float:
        return self.counts.get(m, 0.0)

    @property
    def total(self) -> float:
        return math.fsum(self.counts.values())

    @property
    def mode(self) -> int:
        """Length with the largest count (smallest length on ties)."""
        if not self.counts:
            raise InputError("empty histogram has no mode")
        return max(self.counts.items(), key=lambda kv: (kv[1], -kv[0]))[0]

    @property
    def max_length(self) -> int:
        return max((m for m, c in self.counts.items() if c > 0), default=0)

    def merge(self, other: "LengthHistogram") -> "LengthHistogram":
        """Realization-weighted mean of two histograms."""
        if other.counting_mode != self.counting_mode:
            raise InputError("cannot merge histograms with different counting modes")
        n1, n2 = self.realizations, other.realizations
        n = n1 + n2
        keys = set(self.counts) | set(other.counts)
        merged = {m: (n1 * self.get(m) + n2 * other.get(m)) / n for m in keys}
        sigma = self.sigma if self.sigma == other.sigma else None
        return LengthHistogram(merged, n, self.counting_mode, sigma)

    def scaled(self, factor: float) -> "LengthHistogram":
        return LengthHistogram({m: c * factor for m, c in self.counts.items()},
                               self.realizations, self.counting_mode, self.sigma)
