"""Supermaximal repeats and their length histograms.

A supermaximal repeat is a substring occurring at least twice that is a
maximal repeat and is not a substring of any other maximal repeat. In suffix
array terms these are the LCP intervals holding no nested interval (a run of
equal LCP values larger than both neighbours) whose occurrences are preceded
by pairwise distinct symbols.

Symbols ``0..sigma-1`` are ordinary bases. Codes ``>= sigma`` are sentinels;
each sentinel code appears at most once, so no repeat can contain one.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence as Seq

import numpy as np
from pydivsufsort import divsufsort, kasai

from .errors import InputError
from .model import COUNTING_MODES, LengthHistogram

BRUTE_FORCE_LIMIT = 2048


@dataclass(frozen=True, eq=False)
class Sequence:
    """Immutable symbol string over ``range(sigma)`` plus unique sentinels."""

    symbols: np.ndarray
    sigma: int

    def __post_init__(self):
        sym = np.ascontiguousarray(self.symbols, dtype=np.int32)
        if sym.ndim != 1:
            raise InputError("sequence symbols must be one-dimensional")
        if len(sym) and sym.min() < 0:
            raise InputError("symbol codes must be non-negative")
        sentinels = sym[sym >= self.sigma]
        if len(np.unique(sentinels)) != len(sentinels):
            raise InputError("sentinel codes must be pairwise distinct")
        sym.setflags(write=False)
        object.__setattr__(self, "symbols", sym)

    def __len__(self):
        return len(self.symbols)

    def __eq__(self, other):
        return (isinstance(other, Sequence) and self.sigma == other.sigma
                and np.array_equal(self.symbols, other.symbols))

    @property
    def n_sentinels(self) -> int:
        return int(np.count_nonzero(self.symbols >= self.sigma))

    @classmethod
    def from_string(cls, text: str, alphabet: str | None = None) -> "Sequence":
        """Encode ``text`` by position in ``alphabet`` (sorted characters by default)."""
        if alphabet is None:
            alphabet = "".join(sorted(set(text))) or "01"
        index = {ch: i for i, ch in enumerate(alphabet)}
        try:
            codes = [index[ch] for ch in text]
        except KeyError as exc:
            raise InputError(f"symbol {exc} not in alphabet {alphabet!r}") from exc
        return cls(np.array(codes, dtype=np.int32), max(len(alphabet), 1))

    @classmethod
    def random(cls, length: int, sigma: int, rng: np.random.Generator) -> "Sequence":
        return cls(rng.integers(0, sigma, size=length, dtype=np.int32), sigma)

    @classmethod
    def join(cls, parts: Iterable[np.ndarray], sigma: int) -> "Sequence":
        """Concatenate symbol arrays with a fresh sentinel between neighbours."""
        pieces = []
        next_sentinel = sigma
        for part in parts:
            if pieces:
                pieces.append(np.array([next_sentinel], dtype=np.int32))
                next_sentinel += 1
            pieces.append(np.asarray(part, dtype=np.int32))
        if not pieces:
            return cls(np.zeros(0, dtype=np.int32), sigma)
        return cls(np.concatenate(pieces), sigma)


class Repeat(NamedTuple):
    length: int
    positions: tuple[int, ...]


@dataclass(frozen=True)
class RepeatSet:
    """Supermaximal repeats sorted by length then first position."""

    repeats: tuple[Repeat, ...] = ()

    @classmethod
    def of(cls, items: Iterable[tuple[int, Seq[int]]]) -> "RepeatSet":
        reps = [Repeat(int(m), tuple(sorted(int(p) for p in pos))) for m, pos in items]
        return cls(tuple(sorted(reps)))

    def __len__(self):
        return len(self.repeats)

    def __iter__(self):
        return iter(self.repeats)


def _as_sequence(seq) -> Sequence:
    if isinstance(seq, Sequence):
        return seq
    if isinstance(seq, str):
        return Sequence.from_string(seq)
    raise InputError(f"expected Sequence or str, got {type(seq).__name__}")


def build_suffix_array(seq) -> np.ndarray:
    """Start positions of all suffixes in lexicographic order."""
    seq = _as_sequence(seq)
    if len(seq) == 0:
        return np.zeros(0, dtype=np.int64)
    # divsufsort needs a writable buffer
    return divsufsort(seq.symbols.copy()).astype(np.int64)


def build_lcp(seq, sa) -> np.ndarray:
    """``lcp[i]`` is the common prefix length of suffixes ``sa[i-1]`` and ``sa[i]``."""
    seq = _as_sequence(seq)
    sa = np.asarray(sa, dtype=np.int64)
    if len(sa) != len(seq):
        raise InputError(f"suffix array length {len(sa)} != sequence length {len(seq)}")
    lcp = np.zeros(len(sa), dtype=np.int64)
    if len(sa) > 1:
        nxt = kasai(seq.symbols.copy(), sa)
        lcp[1:] = nxt[:-1]
    return lcp


def _supermaximal_intervals(seq: Sequence):
    """Return ``(lengths, lo, hi, sa)`` for every supermaximal LCP interval.

    ``sa[lo[k]:hi[k] + 1]`` are the occurrence positions of repeat ``k``.
    """
    n = len(seq)
    empty = np.zeros(0, dtype=np.int64)
    if n < 2:
        return empty, empty, empty, build_suffix_array(seq)
    sa = build_suffix_array(seq)
    lcp = build_lcp(seq, sa)

    # maximal runs of equal values in lcp[1:]
    body = lcp[1:]
    change = np.flatnonzero(np.diff(body)) + 1
    run_start = np.concatenate(([0], change)) + 1
    run_end = np.concatenate((change, [len(body)]))
    value = lcp[run_start]
    before = lcp[run_start - 1]
    after = np.append(lcp, 0)[run_end + 1]
    keep = (value > 0) & (before < value) & (after < value)
    value, lo, hi = value[keep], run_start[keep] - 1, run_end[keep]
    if len(value) == 0:
        return empty, empty, empty, sa

    # left-diversity; candidate intervals are disjoint so this is O(n)
    sizes = hi - lo + 1
    owner = np.repeat(np.arange(len(lo)), sizes)
    offsets = np.cumsum(sizes) - sizes
    idx = np.arange(sizes.sum()) - np.repeat(offsets, sizes) + np.repeat(lo, sizes)
    pos = sa[idx]
    sym = seq.symbols
    left = np.where(pos > 0, sym[np.maximum(pos - 1, 0)], -1)
    real = (left >= 0) & (left < seq.sigma)
    key = owner[real] * np.int64(seq.sigma) + left[real]
    key.sort()
    dup_owner = key[1:][key[1:] == key[:-1]] // seq.sigma
    ok = np.ones(len(lo), dtype=bool)
    ok[dup_owner] = False
    return value[ok], lo[ok], hi[ok], sa


def supermaximal_repeats(seq) -> RepeatSet:
    seq = _as_sequence(seq)
    lengths, lo, hi, sa = _supermaximal_intervals(seq)
    return RepeatSet.of((m, sa[a:b + 1]) for m, a, b in zip(lengths, lo, hi))


def repeat_length_histogram(seq, counting_mode: str = "occurrences") -> LengthHistogram:
    """Histogram of supermaximal repeat lengths.

    ``occurrences`` adds every copy (a repeat seen twice contributes 2);
    ``classes`` adds one per distinct repeat.
    """
    if counting_mode not in COUNTING_MODES:
        raise InputError(f"counting_mode must be one of {COUNTING_MODES}")
    seq = _as_sequence(seq)
    lengths, lo, hi, _ = _supermaximal_intervals(seq)
    weights = (hi - lo + 1) if counting_mode == "occurrences" else np.ones(len(lo))
    if len(lengths) == 0:
        return LengthHistogram({}, counting_mode=counting_mode, sigma=seq.sigma)
    counts = np.bincount(lengths, weights=weights)
    nz = np.flatnonzero(counts)
    return LengthHistogram.from_arrays(nz, counts[nz], counting_mode=counting_mode,
                                       sigma=seq.sigma)


def brute_force_supermaximal(seq) -> RepeatSet:
    """Supermaximal repeats by enumerating repeated substrings directly.

    Slow by design; inputs are capped at ``BRUTE_FORCE_LIMIT`` symbols.
    """
    seq = _as_sequence(seq)
    n = len(seq)
    if n > BRUTE_FORCE_LIMIT:
        raise InputError(f"brute force is limited to {BRUTE_FORCE_LIMIT} symbols, got {n}")
    sym = seq.symbols.tolist()
    sigma = seq.sigma

    # every repeated substring with all of its (possibly overlapping) occurrences
    repeated: dict[tuple, list[int]] = {}
    level: dict[tuple, list[int]] = {}
    for i, c in enumerate(sym):
        if c < sigma:
            level.setdefault((c,), []).append(i)
    while level:
        level = {k: v for k, v in level.items() if len(v) >= 2}
        repeated.update(level)
        nxt: dict[tuple, list[int]] = {}
        for key, positions in level.items():
            k = len(key)
            for p in positions:
                if p + k < n and sym[p + k] < sigma:
                    nxt.setdefault(key + (sym[p + k],), []).append(p)
        level = nxt

    def extendable(positions, k, step):
        seen = set()
        for p in positions:
            q = p - 1 if step < 0 else p + k
            if q < 0 or q >= n or sym[q] >= sigma:
                return False
            seen.add(sym[q])
        return len(seen) == 1

    maximal = [(key, pos) for key, pos in repeated.items()
               if not extendable(pos, len(key), -1) and not extendable(pos, len(key), 1)]

    def contains(big, small):
        k = len(small)
        return any(big[i:i + k] == small for i in range(len(big) - k + 1))

    result = []
    for key, pos in maximal:
        if not any(len(other) > len(key) and contains(other, key) for other, _ in maximal):
            result.append((len(key), pos))
    return RepeatSet.of(result)
