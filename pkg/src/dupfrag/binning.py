"""Logarithmic binning of integer-length histograms."""
from __future__ import annotations

import numpy as np

from .errors import InputError
from .model import LengthHistogram


def bin_index(m, bins_per_decade: int = 10) -> np.ndarray:
    """Index ``k`` of the bin ``[10**(k/b), 10**((k+1)/b))`` holding each ``m``."""
    m = np.asarray(m, dtype=np.float64)
    k = np.floor(bins_per_decade * np.log10(m)).astype(np.int64)
    # guard against log10 rounding at exact edges such as m = 10, 100
    k = np.where(10.0 ** ((k + 1) / bins_per_decade) <= m, k + 1, k)
    k = np.where(10.0 ** (k / bins_per_decade) > m, k - 1, k)
    return k


def bin_edges(k, bins_per_decade: int = 10) -> tuple[np.ndarray, np.ndarray]:
    k = np.asarray(k, dtype=np.float64)
    return 10.0 ** (k / bins_per_decade), 10.0 ** ((k + 1) / bins_per_decade)


def log_bin(hist: LengthHistogram, bins_per_decade: int = 10) -> list[tuple[float, float]]:
    """``(center, density)`` per non-empty geometric bin.

    Centers are geometric means of the bin edges and densities are summed
    counts divided by the bin width.
    """
    if bins_per_decade < 1:
        raise InputError("bins_per_decade must be >= 1")
    if len(hist) == 0:
        raise InputError("cannot log-bin an empty histogram")
    m, c = hist.to_arrays()
    k = bin_index(m, bins_per_decade)
    uniq, inv = np.unique(k, return_inverse=True)
    sums = np.bincount(inv, weights=c)
    lo, hi = bin_edges(uniq, bins_per_decade)
    keep = sums > 0
    centers = np.sqrt(lo * hi)[keep]
    dens = (sums / (hi - lo))[keep]
    return list(zip(centers.tolist(), dens.tolist()))
