"""Stochastic duplication/substitution dynamics on a fixed-length chromosome.

Each unit of time applies ``Poisson(beta * dt)`` duplications (copy a window
of sampled length ``m`` over another window of the same length) followed by
``Poisson(L * mu * dt)`` point substitutions, each of which always changes
the base. Repeat-length histograms are measured every ``sample_interval``
steps once ``burn_in`` steps have elapsed.

A realization is a pure function of ``(seed, realization_index)``.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence as Seq

import numpy as np

from .errors import InputError
from .model import COUNTING_MODES, LengthHistogram, ModelParams
from .repeats import Sequence, repeat_length_histogram

logger = logging.getLogger(__name__)

TOPOLOGIES = ("circular", "linear")
DUPLICATION_MODES = ("poisson", "single")
MAX_SAMPLES = 200


@dataclass(eq=False)
class Chromosome:
    """Mutable genome of fixed length; events edit ``symbols`` in place."""

    symbols: np.ndarray
    sigma: int = 2
    topology: str = "circular"

    def __post_init__(self):
        if self.topology not in TOPOLOGIES:
            raise InputError(f"topology must be one of {TOPOLOGIES}")
        self.symbols = np.ascontiguousarray(self.symbols, dtype=np.uint8)

    def __len__(self):
        return len(self.symbols)

    @classmethod
    def random(cls, L: int, rng: np.random.Generator, sigma: int = 2,
               topology: str = "circular") -> "Chromosome":
        return cls(rng.integers(0, sigma, size=L, dtype=np.uint8), sigma, topology)

    @classmethod
    def from_string(cls, text: str, sigma: int = 2, topology: str = "linear") -> "Chromosome":
        return cls(np.array([int(ch) for ch in text], dtype=np.uint8), sigma, topology)

    def to_string(self) -> str:
        return "".join(str(int(c)) for c in self.symbols)

    def sequence(self) -> Sequence:
        return Sequence(self.symbols.astype(np.int32), self.sigma)

    def copy(self) -> "Chromosome":
        return Chromosome(self.symbols.copy(), self.sigma, self.topology)


def duplication_event(chrom: Chromosome, m: int, src: int, dst: int) -> Chromosome:
    """Copy the length-``m`` window at ``src`` over the one at ``dst``.

    The source window is snapshotted before writing, so overlapping windows
    receive the original template.
    """
    L = len(chrom)
    if m > L:
        logger.warning("duplication of length %d skipped: longer than L=%d", m, L)
        return chrom
    s = chrom.symbols
    if chrom.topology == "linear":
        if not (0 <= src <= L - m and 0 <= dst <= L - m):
            raise InputError(f"linear windows must start in [0, {L - m}]")
        s[dst:dst + m] = s[src:src + m].copy()
    else:
        idx_src = (src + np.arange(m)) % L
        idx_dst = (dst + np.arange(m)) % L
        s[idx_dst] = s[idx_src]  # fancy indexing already copies the source
    return chrom


def random_duplication(chrom: Chromosome, source, rng: np.random.Generator):
    """Draw ``(m, src, dst)`` and apply it; returns the triple or ``None`` if skipped."""
    L = len(chrom)
    m = int(source.sample(rng))
    if m > L:
        logger.warning("sampled duplication length %d exceeds L=%d; skipped", m, L)
        return None
    span = L if chrom.topology == "circular" else L - m + 1
    src, dst = (int(v) for v in rng.integers(0, span, size=2))
    duplication_event(chrom, m, src, dst)
    return m, src, dst


def substitute_at(chrom: Chromosome, positions, rng: np.random.Generator) -> Chromosome:
    """Change the base at each position to a uniformly chosen different symbol.

    Repeated positions are hit sequentially.
    """
    positions = np.asarray(positions, dtype=np.int64)
    if len(positions) == 0:
        return chrom
    shift = rng.integers(1, chrom.sigma, size=len(positions))
    # shifts at a repeated position compose additively mod sigma
    hit, inv = np.unique(positions, return_inverse=True)
    total = np.bincount(inv, weights=shift).astype(np.int64)
    chrom.symbols[hit] = (chrom.symbols[hit].astype(np.int64) + total) % chrom.sigma
    return chrom


def substitution_events(chrom: Chromosome, mu: float, dt: float,
                        rng: np.random.Generator) -> int:
    """Apply ``Poisson(L mu dt)`` substitutions; returns how many were drawn."""
    if mu == 0:
        return 0
    lam = len(chrom) * mu * dt
    if not np.isfinite(lam):
        raise InputError("L * mu * dt must be finite")
    n = int(rng.poisson(lam))
    if n:
        substitute_at(chrom, rng.integers(0, len(chrom), size=n), rng)
    return n


@dataclass(frozen=True)
class SimConfig:
    params: ModelParams
    steps: int
    burn_in: int = 0
    sample_interval: int | None = None
    realizations: int = 1
    seed: int = 0
    topology: str = "circular"
    counting_mode: str = "occurrences"
    sigma: int = 2
    duplication_mode: str = "poisson"
    realization_offset: int = 0

    def __post_init__(self):
        if self.steps < 1:
            raise InputError("steps must be positive")
        if not 0 <= self.burn_in < self.steps:
            raise InputError("need 0 <= burn_in < steps")
        if self.sample_interval is None:
            auto = max(1, math.ceil((self.steps - self.burn_in) / MAX_SAMPLES))
            object.__setattr__(self, "sample_interval", auto)
        if not 1 <= self.sample_interval <= self.steps - self.burn_in:
            raise InputError("need 1 <= sample_interval <= steps - burn_in")
        if self.realizations < 1:
            raise InputError("realizations must be positive")
        if not 0 <= self.seed < 2**64:
            raise InputError("seed must be a 64-bit unsigned integer")
        if self.topology not in TOPOLOGIES:
            raise InputError(f"topology must be one of {TOPOLOGIES}")
        if self.counting_mode not in COUNTING_MODES:
            raise InputError(f"counting_mode must be one of {COUNTING_MODES}")
        if self.duplication_mode not in DUPLICATION_MODES:
            raise InputError(f"duplication_mode must be one of {DUPLICATION_MODES}")
        if not 2 <= self.sigma <= 255:
            raise InputError("sigma must lie in [2, 255]")

    @property
    def sample_times(self) -> list[int]:
        return list(range(self.burn_in, self.steps + 1, self.sample_interval))

    def to_dict(self) -> dict:
        return {"params": self.params.to_dict(), "steps": self.steps,
                "burn_in": self.burn_in, "sample_interval": self.sample_interval,
                "realizations": self.realizations, "seed": self.seed,
                "topology": self.topology, "counting_mode": self.counting_mode,
                "sigma": self.sigma, "duplication_mode": self.duplication_mode,
                "realization_offset": self.realization_offset}

    @classmethod
    def from_dict(cls, d: Mapping) -> "SimConfig":
        d = dict(d)
        try:
            params = ModelParams.from_dict(d.pop("params"))
            return cls(params=params, **d)
        except (KeyError, TypeError) as exc:
            raise InputError(f"bad simulation config: {exc}") from exc


def realization_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


@dataclass
class RealizationResult:
    index: int
    times: list[int]
    histograms: list[LengthHistogram]

    def time_average(self) -> LengthHistogram:
        return average_histograms(self.histograms)


def average_histograms(hists: Seq[LengthHistogram]) -> LengthHistogram:
    """Plain mean of sample histograms; the result counts as one realization."""
    if not hists:
        raise InputError("nothing to average")
    keys = sorted(set().union(*(h.counts for h in hists)))
    n = len(hists)
    mean = {m: math.fsum(h.get(m) for h in hists) / n for m in keys}
    return LengthHistogram(mean, 1, hists[0].counting_mode, hists[0].sigma)


def run_realization(config: SimConfig, realization_index: int = 0) -> RealizationResult:
    p = config.params
    rng = realization_rng(config.seed, realization_index)
    chrom = Chromosome.random(p.L, rng, config.sigma, config.topology)
    samples = set(config.sample_times)
    times, hists = [], []

    def record(t):
        times.append(t)
        hists.append(repeat_length_histogram(chrom.sequence(), config.counting_mode))

    if 0 in samples:
        record(0)
    for t in range(1, config.steps + 1):
        if config.duplication_mode == "poisson":
            k = int(rng.poisson(p.beta)) if p.beta > 0 else 0
        else:
            k = 1 if p.beta > 0 else 0
        for _ in range(k):
            random_duplication(chrom, p.source, rng)
        substitution_events(chrom, p.mu, 1.0, rng)
        if t in samples:
            record(t)
    return RealizationResult(realization_index, times, hists)


def _run_one(args):
    config, index = args
    return run_realization(config, index)


@dataclass
class EnsembleResult:
    """Per-realization time averages plus the sample series they came from."""

    per_realization: dict[int, LengthHistogram]
    series: dict[int, RealizationResult] = field(default_factory=dict)

    @property
    def realizations(self) -> int:
        return len(self.per_realization)

    def _matrix(self):
        idx = sorted(self.per_realization)
        keys = sorted(set().union(*(self.per_realization[i].counts for i in idx)))
        mat = np.array([[self.per_realization[i].get(m) for m in keys] for i in idx])
        return keys, mat

    @property
    def mean(self) -> LengthHistogram:
        keys, mat = self._matrix()
        first = next(iter(self.per_realization.values()))
        return LengthHistogram(dict(zip(keys, mat.mean(axis=0).tolist())),
                               self.realizations, first.counting_mode, first.sigma)

    @property
    def stderr(self) -> dict[int, float]:
        """Standard error of the ensemble mean per length (``ddof=1``)."""
        keys, mat = self._matrix()
        n = len(mat)
        if n < 2:
            return {m: math.nan for m in keys}
        se = mat.std(axis=0, ddof=1) / math.sqrt(n)
        return dict(zip(keys, se.tolist()))

    def merge(self, other: "EnsembleResult") -> "EnsembleResult":
        overlap = set(self.per_realization) & set(other.per_realization)
        if overlap:
            raise InputError(f"realization indices overlap: {sorted(overlap)[:5]}")
        per = {**self.per_realization, **other.per_realization}
        return EnsembleResult(dict(sorted(per.items())),
                              dict(sorted({**self.series, **other.series}.items())))


def run_ensemble(config: SimConfig, workers: int = 1, keep_series: bool = True) -> EnsembleResult:
    """Run realizations ``offset .. offset + realizations - 1`` independently."""
    indices = range(config.realization_offset, config.realization_offset + config.realizations)
    jobs = [(config, i) for i in indices]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = [_run_one(j) for j in jobs]
    results.sort(key=lambda r: r.index)
    per = {r.index: r.time_average() for r in results}
    series = {r.index: r for r in results} if keep_series else {}
    return EnsembleResult(per, series)


def histogram_distance(a: LengthHistogram, b: LengthHistogram) -> float:
    keys = set(a.counts) | set(b.counts)
    diff = math.fsum(abs(a.get(m) - b.get(m)) for m in keys)
    scale = 0.5 * (a.total + b.total)
    return 0.0 if scale == 0 else 0.5 * diff / scale


def stationarity_check(series: Seq[LengthHistogram], epsilon: float = 0.01,
                       k: int = 5) -> tuple[bool, list[float]]:
    """Compare consecutive cumulative time averages.

    The distance is half the L1 difference over the mean total, so disjoint
    histograms of equal mass are at distance 1. Stationary once the last
    ``k`` distances (or all of them, if fewer exist) are below ``epsilon``.
    """
    if len(series) < 2:
        raise InputError("stationarity needs at least two samples")
    dists = []
    running = series[0]
    for n, h in enumerate(series[1:], start=1):
        nxt = _cumulative(running, h, n)
        dists.append(histogram_distance(running, nxt))
        running = nxt
    tail = dists[-k:]
    return all(d < epsilon for d in tail), dists


def _cumulative(avg: LengthHistogram, h: LengthHistogram, n: int) -> LengthHistogram:
    """Mean of ``n`` samples summarized by ``avg`` extended with ``h``."""
    keys = set(avg.counts) | set(h.counts)
    return LengthHistogram({m: (n * avg.get(m) + h.get(m)) / (n + 1) for m in keys},
                           1, avg.counting_mode, avg.sigma)


def with_realizations(config: SimConfig, realizations: int, offset: int = 0) -> SimConfig:
    return replace(config, realizations=realizations, realization_offset=offset)
