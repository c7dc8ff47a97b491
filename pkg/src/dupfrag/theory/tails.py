"""Tail laws, random-sequence peak statistics and rate arithmetic."""
from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import InputError

YEARS_PER_MY = 1e6


@dataclass(frozen=True)
class TailEstimate:
    """Stationary tail ``S(m) = 2 M1 beta / (mu m**3)`` of the repeat counts."""

    M1: float
    beta: float
    mu: float

    @property
    def amplitude(self) -> float:
        return 2.0 * self.M1 * self.beta / self.mu

    def S(self, m):
        return self.amplitude / m**3

    def heuristic_S(self, m):
        """Single-copy fragment estimate, half the exact amplitude."""
        return 0.5 * self.amplitude / m**3

    def fragments(self, t):
        """Fragments cut from one duplication of length ``M1`` after time ``t``."""
        return self.M1 * self.mu * t

    def mean_fragment(self, t):
        return self.M1 / self.fragments(t)


def tail_estimate(M1: float, beta: float, mu: float) -> TailEstimate:
    if not mu > 0:
        raise InputError("a stationary fragmentation tail needs mu > 0")
    return TailEstimate(M1, beta, mu)


def random_peak_stats(L: int, sigma: int = 2) -> tuple[float, float]:
    """Peak position ``log_sigma L`` and maximum-length estimate ``2 log_sigma L``."""
    if L < 2:
        raise InputError("L must be >= 2")
    peak = math.log(L) / math.log(sigma)
    return peak, 2.0 * peak


@dataclass(frozen=True)
class RateEstimate:
    """Chain from per-gene duplication rate to the age of the repeat tail.

    Rates are per million years. ``time_unit`` is the mean time between
    duplications in years.
    """

    beta0: float
    L0: float
    lambda0: float
    beta: float
    time_unit: float
    dup_bases_per_My: float
    age_My: float


def estimate_rates(gene_dup_rate_per_gene_per_My: float, gene_count: float,
                   coding_fraction: float, genome_length: float, M1: float,
                   tail_bases: float, target_length: float | None = None) -> RateEstimate:
    """Biological rate arithmetic.

    ``target_length`` is the length the per-base rate is applied to (for
    example a repeat-masked chromosome); it defaults to ``genome_length``,
    which makes ``beta = beta0 / coding_fraction``.
    """
    values = (gene_dup_rate_per_gene_per_My, gene_count, genome_length, M1, tail_bases)
    if any(not v > 0 for v in values):
        raise InputError("all rate inputs must be positive")
    if not 0 < coding_fraction <= 1:
        raise InputError("coding_fraction must lie in (0, 1]")
    beta0 = gene_dup_rate_per_gene_per_My * gene_count
    L0 = coding_fraction * genome_length
    lambda0 = beta0 / L0
    beta = lambda0 * (genome_length if target_length is None else target_length)
    dup = M1 * beta
    return RateEstimate(beta0=beta0, L0=L0, lambda0=lambda0, beta=beta,
                        time_unit=YEARS_PER_MY / beta, dup_bases_per_My=dup,
                        age_My=tail_bases / dup)
