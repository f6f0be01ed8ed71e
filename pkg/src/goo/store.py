"""On-disk segment store: binary segment formats, manifest, resume planning.

Layout of a run directory:

    manifest.txt            line-oriented index, rewritten atomically
    prime_root-00000.bin    fixed-width (p, r) pair segments
    a_values-00000.bin      delta-compressed ascending integer segments

Both segment kinds tile [1, R) where R is derived from the run's bound via
``x_limit``. Every manifest entry carries a SHA-256 digest of the exact file
bytes; reads verify the digest before decoding, so silent corruption turns
into a loud ``CorruptSegmentError`` instead of wrong numbers.
"""

import hashlib
import os
import re
import struct
from dataclasses import dataclass, replace
from math import isqrt
from pathlib import Path
from typing import Iterator, Optional, Union

import numpy as np

from .records import ASegment, PrimeRootBlock

MANIFEST_NAME = "manifest.txt"
MANIFEST_VERSION = 1
SEGMENT_VERSION = 1

PRIME_MAGIC = b"GOOP"
A_MAGIC = b"GOOA"

KIND_PRIME = "prime_root"
KIND_A = "a_values"

_HEADER = struct.Struct("<4sBQQQ")  # magic, version, lo, hi, count
_U64 = struct.Struct("<Q")

_FILENAME_RE = re.compile(r"^[A-Za-z0-9._-]+$")


class StoreError(Exception):
    """Base class for storage failures."""


class ManifestError(StoreError):
    """Missing or unparseable manifest."""


class VersionMismatchError(StoreError):
    """Format version newer than this code understands."""


class CorruptSegmentError(StoreError):
    """Digest mismatch or undecodable segment bytes."""


class GapError(StoreError):
    """The manifest's segments do not tile the requested range."""


# ---------------------------------------------------------------------------
# geometry


def x_limit(bound_b: int) -> int:
    """Smallest x whose square-plus-one reaches the bound.

    Candidates are 1 <= x < x_limit; x_limit is the first x with
    x^2 + 1 >= bound_b, so every stored value v satisfies v^2 + 1 < bound_b.
    """
    if bound_b < 3:
        raise ValueError("bound must be at least 3")
    return isqrt(bound_b - 2) + 1


def prime_segment_ranges(bound_b: int, segment_len: int) -> list:
    """Ranges [lo, hi) for the prime-root segments, tiling [1, x_limit).

    Boundaries sit at 1 mod 4 so each full segment holds exactly
    segment_len candidates of the form 4t + 1.
    """
    limit = x_limit(bound_b)
    span = 4 * segment_len
    out = []
    lo = 1
    while lo < limit:
        hi = min(lo + span, limit)
        out.append((lo, hi))
        lo = hi
    return out


def a_segment_ranges(bound_b: int, segment_len: int) -> list:
    """Ranges [lo, hi) for the A-value segments, tiling [1, x_limit).

    Each full segment spans 2 * segment_len integers: segment_len even
    candidates, plus the lone odd candidate x = 1 in the first segment.
    """
    limit = x_limit(bound_b)
    span = 2 * segment_len
    out = []
    lo = 1
    while lo < limit:
        hi = min(span if lo == 1 else lo + span, limit)
        out.append((lo, hi))
        lo = hi
    return out


# ---------------------------------------------------------------------------
# segment codecs


def encode_prime_segment(block: PrimeRootBlock) -> bytes:
    if block.lo is None or block.hi is None:
        raise ValueError("block range must be set before encoding")
    count = len(block)
    head = _HEADER.pack(PRIME_MAGIC, SEGMENT_VERSION, block.lo, block.hi, count)
    pairs = np.empty(2 * count, dtype="<u8")
    pairs[0::2] = block.p
    pairs[1::2] = block.r
    return head + pairs.tobytes()


def decode_prime_segment(data: bytes) -> PrimeRootBlock:
    if len(data) < _HEADER.size:
        raise CorruptSegmentError("prime segment shorter than header")
    magic, version, lo, hi, count = _HEADER.unpack_from(data)
    if magic != PRIME_MAGIC:
        raise CorruptSegmentError(f"bad magic {magic!r}")
    if version != SEGMENT_VERSION:
        raise VersionMismatchError(f"prime segment version {version}")
    if len(data) != _HEADER.size + 16 * count:
        raise CorruptSegmentError(
            f"prime segment length {len(data)} does not match count {count}"
        )
    pairs = np.frombuffer(data, dtype="<u8", offset=_HEADER.size)
    p = pairs[0::2].astype(np.int64)
    r = pairs[1::2].astype(np.int64)
    if count:
        if p[0] < lo or p[-1] >= hi:
            raise CorruptSegmentError("prime outside declared range")
        if np.any(np.diff(p) <= 0):
            raise CorruptSegmentError("primes not strictly ascending")
    return PrimeRootBlock(lo=lo, hi=hi, p=p, r=r)


def _encode_deltas(deltas: np.ndarray) -> bytes:
    """LEB128-style varints: 7 payload bits per byte, high bit = continue."""
    if deltas.size == 0:
        return b""
    top = int(deltas.max())
    if int(deltas.min()) <= 0:
        raise ValueError("deltas must be positive")
    if top < 1 << 7:
        return deltas.astype(np.uint8).tobytes()
    if top < 1 << 21:
        # vectorized 1-3 byte encoder; gaps never get near 2^21 in practice
        nbytes = 1 + (deltas >= 1 << 7) + (deltas >= 1 << 14)
        ends = np.cumsum(nbytes)
        starts = ends - nbytes
        buf = np.zeros(int(ends[-1]), dtype=np.uint8)
        buf[starts] = (deltas & 0x7F) | np.where(nbytes > 1, 0x80, 0)
        two = nbytes >= 2
        buf[starts[two] + 1] = ((deltas[two] >> 7) & 0x7F) | np.where(
            nbytes[two] > 2, 0x80, 0
        )
        three = nbytes >= 3
        buf[starts[three] + 2] = (deltas[three] >> 14) & 0x7F
        return buf.tobytes()
    out = bytearray()
    for d in deltas.tolist():
        while d >= 0x80:
            out.append((d & 0x7F) | 0x80)
            d >>= 7
        out.append(d)
    return bytes(out)


def _decode_deltas(payload: bytes, expect: int) -> np.ndarray:
    buf = np.frombuffer(payload, dtype=np.uint8)
    if buf.size == 0:
        if expect:
            raise CorruptSegmentError("varint payload missing")
        return np.zeros(0, dtype=np.int64)
    if buf.size and buf[-1] & 0x80:
        raise CorruptSegmentError("truncated varint at end of segment")
    ends = np.flatnonzero(~(buf & 0x80).astype(bool))
    if ends.size != expect:
        raise CorruptSegmentError(
            f"expected {expect} deltas, payload holds {ends.size}"
        )
    if not (buf & 0x80).any():
        out = buf.astype(np.int64)
    else:
        starts = np.empty_like(ends)
        starts[0] = 0
        starts[1:] = ends[:-1] + 1
        lengths = ends - starts + 1
        out = np.zeros(expect, dtype=np.int64)
        for width in range(1, int(lengths.max()) + 1):
            sel = lengths >= width
            out[sel] |= (buf[starts[sel] + width - 1].astype(np.int64) & 0x7F) << (
                7 * (width - 1)
            )
    if np.any(out <= 0):
        raise CorruptSegmentError("zero delta: values must strictly ascend")
    return out


def encode_a_segment(segment: ASegment) -> bytes:
    count = len(segment)
    head = _HEADER.pack(A_MAGIC, SEGMENT_VERSION, segment.lo, segment.hi, count)
    if count == 0:
        return head
    values = np.asarray(segment.values, dtype=np.int64)
    return head + _U64.pack(int(values[0])) + _encode_deltas(np.diff(values))


def decode_a_segment(data: bytes) -> ASegment:
    if len(data) < _HEADER.size:
        raise CorruptSegmentError("a-value segment shorter than header")
    magic, version, lo, hi, count = _HEADER.unpack_from(data)
    if magic != A_MAGIC:
        raise CorruptSegmentError(f"bad magic {magic!r}")
    if version != SEGMENT_VERSION:
        raise VersionMismatchError(f"a-value segment version {version}")
    if count == 0:
        if len(data) != _HEADER.size:
            raise CorruptSegmentError("empty segment carries payload")
        return ASegment(lo=lo, hi=hi, values=np.zeros(0, dtype=np.int64))
    if len(data) < _HEADER.size + _U64.size:
        raise CorruptSegmentError("missing first value")
    (first,) = _U64.unpack_from(data, _HEADER.size)
    if first >= 1 << 63:
        raise CorruptSegmentError("first value overflows int64")
    deltas = _decode_deltas(data[_HEADER.size + _U64.size :], count - 1)
    values = np.empty(count, dtype=np.int64)
    values[0] = first
    if count > 1:
        np.cumsum(deltas, out=values[1:])
        values[1:] += first
    if values[0] < lo or values[-1] >= hi:
        raise CorruptSegmentError("value outside declared range")
    return ASegment(lo=lo, hi=hi, values=values)


# ---------------------------------------------------------------------------
# manifest


@dataclass(frozen=True)
class ManifestEntry:
    kind: str
    lo: int
    hi: int
    count: int
    digest: str
    filename: str


@dataclass
class RunManifest:
    bound_b: int
    segment_len: int
    status: str  # "in_progress" | "complete"
    entries: list

    def entries_of(self, kind: str) -> list:
        return sorted(
            (e for e in self.entries if e.kind == kind), key=lambda e: e.lo
        )

    @property
    def complete(self) -> bool:
        return self.status == "complete"


def serialize_manifest(manifest: RunManifest) -> str:
    lines = [
        f"goo-manifest {MANIFEST_VERSION}",
        f"bound_b {manifest.bound_b}",
        f"segment_len {manifest.segment_len}",
        f"status {manifest.status}",
    ]
    ordered = manifest.entries_of(KIND_PRIME) + manifest.entries_of(KIND_A)
    for e in ordered:
        lines.append(
            f"segment {e.kind} {e.lo} {e.hi} {e.count} {e.digest} {e.filename}"
        )
    return "\n".join(lines) + "\n"


def parse_manifest(text: str) -> RunManifest:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ManifestError("empty manifest")
    head = lines[0].split()
    if len(head) != 2 or head[0] != "goo-manifest":
        raise ManifestError(f"bad manifest header: {lines[0]!r}")
    try:
        version = int(head[1])
    except ValueError:
        raise ManifestError(f"bad manifest version: {head[1]!r}") from None
    if version != MANIFEST_VERSION:
        raise VersionMismatchError(f"manifest version {version}")

    fields = {}
    entries = []
    for ln in lines[1:]:
        parts = ln.split()
        if parts[0] == "segment":
            if len(parts) != 7:
                raise ManifestError(f"bad segment line: {ln!r}")
            kind, lo, hi, count, digest, filename = parts[1:]
            if kind not in (KIND_PRIME, KIND_A):
                raise ManifestError(f"unknown segment kind {kind!r}")
            if not _FILENAME_RE.match(filename) or "/" in filename:
                raise ManifestError(f"unsafe filename {filename!r}")
            try:
                entries.append(
                    ManifestEntry(kind, int(lo), int(hi), int(count), digest, filename)
                )
            except ValueError:
                raise ManifestError(f"bad segment line: {ln!r}") from None
        elif len(parts) == 2:
            fields[parts[0]] = parts[1]
        else:
            raise ManifestError(f"bad manifest line: {ln!r}")
    for key in ("bound_b", "segment_len", "status"):
        if key not in fields:
            raise ManifestError(f"manifest missing {key}")
    try:
        bound_b = int(fields["bound_b"])
        segment_len = int(fields["segment_len"])
    except ValueError:
        raise ManifestError("non-integer bound or segment length") from None
    status = fields["status"]
    if status not in ("in_progress", "complete"):
        raise ManifestError(f"bad status {status!r}")
    return RunManifest(bound_b, segment_len, status, entries)


def _atomic_write(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(data)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


# ---------------------------------------------------------------------------
# the store


class SegmentStore:
    """One sieve run's directory. Single writer; readers are thread-safe.

    Commits are atomic: segment bytes land via temp-file rename, then the
    manifest is rewritten (also via rename) to mention them. A crash
    between the two leaves an orphan file that a resume simply rewrites.
    """

    def __init__(self, root: Path, manifest: RunManifest):
        self.root = Path(root)
        self.manifest = manifest
        self._range_index = {
            KIND_PRIME: {
                rng: i
                for i, rng in enumerate(
                    prime_segment_ranges(manifest.bound_b, manifest.segment_len)
                )
            },
            KIND_A: {
                rng: i
                for i, rng in enumerate(
                    a_segment_ranges(manifest.bound_b, manifest.segment_len)
                )
            },
        }
        self._a_cache: dict = {}

    # -- lifecycle ----------------------------------------------------

    @classmethod
    def create(
        cls, root: Union[str, Path], bound_b: int, segment_len: int
    ) -> "SegmentStore":
        root = Path(root)
        root.mkdir(parents=True, exist_ok=True)
        for stale in root.glob(f"{KIND_PRIME}-*.bin"):
            stale.unlink()
        for stale in root.glob(f"{KIND_A}-*.bin"):
            stale.unlink()
        manifest = RunManifest(int(bound_b), int(segment_len), "in_progress", [])
        store = cls(root, manifest)
        store._write_manifest()
        return store

    @classmethod
    def open(cls, root: Union[str, Path]) -> "SegmentStore":
        root = Path(root)
        path = root / MANIFEST_NAME
        if not path.is_file():
            raise ManifestError(f"no manifest at {path}")
        return cls(root, parse_manifest(path.read_text(encoding="utf-8")))

    def _write_manifest(self) -> None:
        _atomic_write(
            self.root / MANIFEST_NAME,
            serialize_manifest(self.manifest).encode("utf-8"),
        )

    def finalize(self) -> None:
        self.manifest.status = "complete"
        self._write_manifest()

    # -- writes ---------------------------------------------------------

    def _commit(self, kind: str, lo: int, hi: int, count: int, data: bytes) -> ManifestEntry:
        index = self._range_index[kind].get((lo, hi))
        if index is None:
            raise ValueError(
                f"range [{lo},{hi}) is not a {kind} segment for this run"
            )
        filename = f"{kind}-{index:05d}.bin"
        _atomic_write(self.root / filename, data)
        entry = ManifestEntry(kind, lo, hi, count, _sha256(data), filename)
        self.manifest.entries = [
            e for e in self.manifest.entries if (e.kind, e.lo) != (kind, lo)
        ]
        self.manifest.entries.append(entry)
        self._write_manifest()
        return entry

    def write_prime_segment(self, block: PrimeRootBlock) -> ManifestEntry:
        return self._commit(
            KIND_PRIME, block.lo, block.hi, len(block), encode_prime_segment(block)
        )

    def write_a_segment(self, segment: ASegment) -> ManifestEntry:
        return self._commit(
            KIND_A, segment.lo, segment.hi, len(segment), encode_a_segment(segment)
        )

    # -- reads ----------------------------------------------------------

    def _load(self, entry: ManifestEntry) -> bytes:
        path = self.root / entry.filename
        try:
            data = path.read_bytes()
        except FileNotFoundError:
            raise CorruptSegmentError(f"segment file missing: {entry.filename}") from None
        if _sha256(data) != entry.digest:
            raise CorruptSegmentError(f"digest mismatch in {entry.filename}")
        return data

    def read_prime_blocks(self, upto: Optional[int] = None) -> Iterator[PrimeRootBlock]:
        """Yield prime-root blocks ascending, digest-checked, tiling from 1.

        Stops once coverage reaches ``upto`` (default: everything present).
        Raises GapError if the blocks on disk do not tile contiguously.
        """
        covered = 1
        for entry in self.manifest.entries_of(KIND_PRIME):
            if upto is not None and covered >= upto:
                return
            if entry.lo != covered:
                raise GapError(
                    f"prime segments jump from {covered} to {entry.lo}"
                )
            yield decode_prime_segment(self._load(entry))
            covered = entry.hi
        if upto is not None and covered < upto:
            raise GapError(f"prime segments end at {covered}, need {upto}")

    def read_a_segments(self, start: int = 1) -> Iterator[ASegment]:
        """Yield A-value segments whose range ends beyond ``start``.

        The yielded segments must tile [start, x_limit); holes raise GapError.
        """
        limit = x_limit(self.manifest.bound_b)
        want = max(start, 1)
        covered = None
        for entry in self.manifest.entries_of(KIND_A):
            if entry.hi <= want:
                continue
            if covered is None:
                if entry.lo > want:
                    raise GapError(
                        f"no a-value segment covers {want} (first is {entry.lo})"
                    )
            elif entry.lo != covered:
                raise GapError(
                    f"a-value segments jump from {covered} to {entry.lo}"
                )
            yield decode_a_segment(self._load(entry))
            covered = entry.hi
        if covered is None or covered < limit:
            raise GapError(
                f"a-value segments end at {covered}, need {limit}"
            )

    def read_a_stream(self, start: int = 1) -> Iterator[int]:
        """Yield every stored A value >= start, ascending."""
        for segment in self.read_a_segments(start):
            values = segment.values
            if len(values) and values[0] < start:
                values = values[np.searchsorted(values, start) :]
            yield from values.tolist()

    def entry_values(self, entry: ManifestEntry) -> np.ndarray:
        """Decoded values of one a-value entry, digest-checked, cached."""
        hit = self._a_cache.get(entry.filename)
        if hit is None:
            hit = decode_a_segment(self._load(entry)).values
            if len(self._a_cache) >= 8:
                self._a_cache.pop(next(iter(self._a_cache)))
            self._a_cache[entry.filename] = hit
        return hit

    def lookup_a(self, value: int) -> bool:
        """Membership test against the stored set, one segment decode away."""
        for entry in self.manifest.entries_of(KIND_A):
            if entry.lo <= value < entry.hi:
                values = self.entry_values(entry)
                i = int(np.searchsorted(values, value))
                return i < len(values) and int(values[i]) == value
        raise GapError(f"no a-value segment covers {value}")

    # -- resume -----------------------------------------------------------

    def _entry_valid(self, entry: ManifestEntry) -> bool:
        path = self.root / entry.filename
        if not path.is_file():
            return False
        data = path.read_bytes()
        if _sha256(data) != entry.digest:
            return False
        if len(data) < _HEADER.size:
            return False
        magic, version, lo, hi, count = _HEADER.unpack_from(data)
        expected = PRIME_MAGIC if entry.kind == KIND_PRIME else A_MAGIC
        return (
            magic == expected
            and version == SEGMENT_VERSION
            and (lo, hi, count) == (entry.lo, entry.hi, entry.count)
        )

    def resume_plan(self) -> list:
        """(kind, lo, hi) tuples still needing work, prime kind first.

        A segment is re-listed when it is absent from the manifest, its file
        is missing, or the stored bytes no longer match their digest.
        """
        plan = []
        by_key = {(e.kind, e.lo, e.hi): e for e in self.manifest.entries}
        for kind, ranges in (
            (KIND_PRIME, prime_segment_ranges(self.manifest.bound_b, self.manifest.segment_len)),
            (KIND_A, a_segment_ranges(self.manifest.bound_b, self.manifest.segment_len)),
        ):
            for lo, hi in ranges:
                entry = by_key.get((kind, lo, hi))
                if entry is None or not self._entry_valid(entry):
                    plan.append((kind, lo, hi))
        return plan
