"""Power-law fits to the tail of a repeat-length histogram."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from ..binning import bin_index
from ..errors import InputError
from ..model import LengthHistogram

MIN_BINS = 8


@dataclass(frozen=True)
class TailFit:
    slope: float
    log_amplitude: float  # log10 of the amplitude
    r2: float
    n_bins: int

    @property
    def amplitude(self) -> float:
        return 10.0 ** self.log_amplitude


def fit_power_law_tail(hist: LengthHistogram, m_lo: int, m_hi: int,
                       bins_per_decade: int = 10) -> TailFit:
    """Fit ``count(m) = A m**slope`` on ``[m_lo, m_hi]`` over log-binned data.

    Least squares in log count per bin, where the model prediction for a bin
    is ``A`` times the exact sum of ``m**slope`` over the integers the bin
    covers. A pure power law is therefore recovered exactly, which a
    geometric-center regression is not for bins holding only a few integers.
    """
    if not 1 <= m_lo < m_hi:
        raise InputError(f"need 1 <= m_lo < m_hi, got [{m_lo}, {m_hi}]")
    m_all = np.arange(int(m_lo), int(m_hi) + 1)
    counts = hist.dense(int(m_hi))[m_all]
    k = bin_index(m_all, bins_per_decade)
    uniq, inv = np.unique(k, return_inverse=True)
    sums = np.bincount(inv, weights=counts)
    nonzero = sums > 0
    if nonzero.sum() < MIN_BINS:
        raise InputError(f"only {int(nonzero.sum())} non-empty bins in [{m_lo}, {m_hi}]; "
                         f"need {MIN_BINS}")
    y = np.log10(sums[nonzero])
    logm = np.log(m_all.astype(np.float64))

    def predicted(s):
        per_bin = np.bincount(inv, weights=np.exp(s * logm), minlength=len(uniq))
        return np.log10(per_bin[nonzero])

    def sse(s):
        r = y - predicted(s)
        return float(np.sum((r - r.mean()) ** 2))

    res = minimize_scalar(sse, bounds=(-12.0, 6.0), method="bounded",
                          options={"xatol": 1e-12, "maxiter": 500})
    s = float(res.x)
    offset = float(np.mean(y - predicted(s)))
    ss_res = sse(s)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return TailFit(slope=s, log_amplitude=offset, r2=r2, n_bins=int(nonzero.sum()))
