"""FASTA ingestion, histogram CSV files and run manifests."""
from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import json
import os
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from . import __version__
from .errors import InputError
from .model import COUNTING_MODES, LengthHistogram
from .repeats import Sequence

FASTA_ALPHABET = "ACGT"
CSV_HEADER = ["m", "count", "realizations", "counting_mode"]


class MaskPolicy(str, Enum):
    SKIP_MASKED = "skip_masked"
    KEEP_MASKED = "keep_masked"


# byte classes for FASTA sequence lines
_BASE, _SOFT, _SPLIT, _BAD = 0, 1, 2, 3
_CLASS = np.full(256, _BAD, dtype=np.int8)
_CODE = np.zeros(256, dtype=np.int32)
for _i, _ch in enumerate(FASTA_ALPHABET):
    _CLASS[ord(_ch)], _CODE[ord(_ch)] = _BASE, _i
    _CLASS[ord(_ch.lower())], _CODE[ord(_ch.lower())] = _SOFT, _i
# N and the remaining IUPAC ambiguity codes cut the sequence
for _ch in "NRYKMSWBDHVU":
    _CLASS[ord(_ch)] = _SPLIT
    _CLASS[ord(_ch.lower())] = _SPLIT


@dataclass
class FastaRecord:
    name: str
    sequence: Sequence


def _encode_record(chunks: list[tuple[int, bytes]], policy: MaskPolicy) -> Sequence:
    raw = b"".join(c for _, c in chunks)
    arr = np.frombuffer(raw, dtype=np.uint8)
    cls = _CLASS[arr]
    bad = np.flatnonzero(cls == _BAD)
    if len(bad):
        offset = int(bad[0])
        for line_no, chunk in chunks:
            if offset < len(chunk):
                ch = chr(chunk[offset])
                raise InputError(f"invalid FASTA character {ch!r}", line=line_no)
            offset -= len(chunk)
    if policy == MaskPolicy.SKIP_MASKED:
        keep = cls == _BASE
    else:
        keep = (cls == _BASE) | (cls == _SOFT)
    codes = _CODE[arr][keep]
    kept_idx = np.flatnonzero(keep)
    # a gap in the kept positions marks an excision; one sentinel per gap
    gaps = np.flatnonzero(np.diff(kept_idx) > 1) + 1
    sentinels = len(FASTA_ALPHABET) + np.arange(len(gaps), dtype=np.int32)
    return Sequence(np.insert(codes, gaps, sentinels), len(FASTA_ALPHABET))


def parse_fasta_records(path, mask_policy=MaskPolicy.SKIP_MASKED) -> list[FastaRecord]:
    policy = MaskPolicy(mask_policy)
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read FASTA file {path}: {exc}") from exc
    if not data.strip():
        raise InputError(f"FASTA file {path} is empty")
    records: list[FastaRecord] = []
    name = None
    chunks: list[tuple[int, bytes]] = []
    for line_no, line in enumerate(data.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith(b";"):
            continue
        if line.startswith(b">"):
            if name is not None:
                records.append(FastaRecord(name, _encode_record(chunks, policy)))
            name = line[1:].decode("utf-8", "replace").strip()
            chunks = []
        else:
            if name is None:
                raise InputError("sequence data before the first '>' header", line=line_no)
            chunks.append((line_no, line))
    if name is None:
        raise InputError(f"no FASTA records in {path}")
    records.append(FastaRecord(name, _encode_record(chunks, policy)))
    return records


def parse_fasta(path, mask_policy=MaskPolicy.SKIP_MASKED) -> list[Sequence]:
    """Sequences over ``A, C, G, T`` (codes 0..3) with sentinels at every cut.

    Lowercase is soft-masked. Under ``skip_masked`` masked bases and N (or
    other ambiguity) runs are removed and replaced by one sentinel each; under
    ``keep_masked`` lowercase is read as ordinary bases and only N runs cut.
    """
    return [r.sequence for r in parse_fasta_records(path, mask_policy)]


def join_records(seqs: Iterable[Sequence]) -> Sequence:
    """One sequence from several, renumbering sentinels so they stay unique."""
    parts = []
    sigma = None
    next_code = None
    for s in seqs:
        sigma = s.sigma if sigma is None else sigma
        if s.sigma != sigma:
            raise InputError("cannot join sequences over different alphabets")
        if next_code is None:
            next_code = sigma
        sym = s.symbols.astype(np.int64).copy()
        sent = sym >= sigma
        if parts:
            parts.append(np.array([next_code]))
            next_code += 1
        sym[sent] = next_code + np.arange(int(sent.sum()))
        next_code += int(sent.sum())
        parts.append(sym)
    if sigma is None:
        raise InputError("nothing to join")
    return Sequence(np.concatenate(parts).astype(np.int32), sigma)


def write_fasta(path, records: Mapping[str, str], width: int = 60) -> None:
    with open(path, "w") as fh:
        for name, text in records.items():
            fh.write(f">{name}\n")
            for i in range(0, len(text), width):
                fh.write(text[i:i + width] + "\n")


def _histogram_rows(obj):
    if isinstance(obj, LengthHistogram):
        return obj.counts.items(), obj.realizations, obj.counting_mode, obj.sigma
    # a stationary solution: theory counts use the occurrence convention
    lengths, f = obj.lengths, np.maximum(obj.f, 0.0)
    return zip(lengths.tolist(), f.tolist()), 1, "occurrences", None


def write_histogram_csv(obj, path) -> None:
    """Write a histogram or stationary solution as ``m,count,realizations,counting_mode``.

    A trailing ``sigma`` column is added when the alphabet size is known.
    """
    rows, realizations, mode, sigma = _histogram_rows(obj)
    header = CSV_HEADER + (["sigma"] if sigma is not None else [])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for m, c in rows:
            row = [int(m), repr(float(c)), realizations, mode]
            if sigma is not None:
                row.append(sigma)
            w.writerow(row)


def read_histogram_csv(path) -> LengthHistogram:
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    counts: dict[int, float] = {}
    realizations, mode, sigma = 1, "occurrences", None
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:4]] != CSV_HEADER:
            raise InputError(f"expected header {','.join(CSV_HEADER)}", line=1)
        has_sigma = len(header) > 4 and header[4].strip() == "sigma"
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise InputError(f"expected {len(header)} fields, got {len(row)}", line=line_no)
            try:
                m = int(row[0])
                c = float(row[1])
                realizations = int(row[2])
                sigma = int(row[4]) if has_sigma else None
            except ValueError as exc:
                raise InputError(f"malformed row: {exc}", line=line_no) from exc
            mode = row[3].strip()
            if mode not in COUNTING_MODES:
                raise InputError(f"unknown counting mode {mode!r}", line=line_no)
            if m < 1:
                raise InputError(f"length {m} is not positive", line=line_no)
            if not c >= 0:
                raise InputError(f"negative count {row[1]}", line=line_no)
            if m in counts:
                raise InputError(f"duplicate length {m}", line=line_no)
            counts[m] = c
    return LengthHistogram(counts, realizations, mode, sigma)


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


@dataclass
class RunManifest:
    """Everything needed to regenerate a command's output files."""

    command: str
    config: dict
    seed: int | None = None
    version: str = __version__
    timestamp: str = field(
        default_factory=lambda: _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"))
    inputs: dict[str, str] = field(default_factory=dict)
    outputs: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"command": self.command, "config": self.config, "seed": self.seed,
                "version": self.version, "timestamp": self.timestamp,
                "inputs": self.inputs, "outputs": self.outputs}

    def write(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def read(cls, path) -> "RunManifest":
        try:
            with open(path) as fh:
                d = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read manifest {path}: {exc}") from exc
        if "config" not in d:
            # a bare config file
            return cls(command=d.get("command", ""), config=d, seed=d.get("seed"))
        return cls(command=d.get("command", ""), config=d["config"], seed=d.get("seed"),
                   version=d.get("version", __version__),
                   timestamp=d.get("timestamp", ""), inputs=d.get("inputs", {}),
                   outputs=d.get("outputs", []))

    def record_input(self, path) -> None:
        self.inputs[os.fspath(path)] = file_digest(path)
