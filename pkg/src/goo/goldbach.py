"""Streaming verifier for the additive decomposition property of A.

For each member a_n (n >= 2) find the least back-offset j such that
a_n - a_{n-j} is itself a member. The conjecture under test says such a j
always exists; a member with no decomposition at all is a counterexample
and is reported loudly, never papered over.

The verifier is windowed: recent members sit in a deque, membership of
small differences comes from a bitset, and differences beyond the bitset
fall back to the segment store. Observed j values are tiny in practice
(the record below 10^16 is 52), so the window almost never matters; it
exists so memory stays flat on arbitrarily long streams.
"""

import math
from collections import Counter, deque
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, TextIO

import numpy as np

from .analytics import DEFAULT_HL_CONSTANT
from .store import KIND_A, SegmentStore


class CounterexampleFound(Exception):
    """A member admits no decomposition a_n = a_i + (member)."""

    def __init__(self, n: int, a_n: int):
        self.n = n
        self.a_n = a_n
        super().__init__(
            f"member #{n} = {a_n} has no i < n with a_n - a_i in the set"
        )


class WindowExhaustedError(RuntimeError):
    """The in-memory window ran out and no store was attached."""


@dataclass(frozen=True)
class VerifierConfig:
    window_len: int = 1 << 16
    member_bound: int = 1 << 31  # differences up to here answered by bitset

    def __post_init__(self):
        if self.window_len < 2:
            raise ValueError("window_len must be at least 2")
        if self.member_bound < 4 or self.member_bound % 2:
            raise ValueError("member_bound must be even and at least 4")


class ChampionRecord(tuple):
    """(n, a_n, j) for a new record value of j."""

    __slots__ = ()

    def __new__(cls, n: int, a_n: int, j: int):
        return super().__new__(cls, (n, a_n, j))

    n = property(lambda self: self[0])
    a_n = property(lambda self: self[1])
    j = property(lambda self: self[2])


class VerifierState:
    """Incremental membership structures over the prefix seen so far."""

    def __init__(
        self,
        config: Optional[VerifierConfig] = None,
        store: Optional[SegmentStore] = None,
    ):
        self.config = config or VerifierConfig()
        self.store = store
        self.window: deque = deque(maxlen=self.config.window_len)
        self.count = 0
        self.last = 0
        self.has_one = False
        self.has_two = False
        self._bits = bytearray()
        self.max_j = 1  # start above the vacuous j=1 so it never "wins"
        self.champions: list = []
        self.j_histogram: Counter = Counter()

    def push(self, a: int) -> None:
        if a <= self.last:
            raise ValueError(f"stream must strictly ascend, got {a} after {self.last}")
        self.last = a
        self.count += 1
        self.window.append(a)
        if a == 1:
            self.has_one = True
        elif a == 2:
            self.has_two = True
        elif a <= self.config.member_bound:
            i = a >> 1
            byte = i >> 3
            if byte >= len(self._bits):
                want = max(1024, 2 * len(self._bits))
                while want <= byte:
                    want *= 2
                want = min(want, (self.config.member_bound >> 4) + 1)
                self._bits.extend(bytes(want - len(self._bits)))
            self._bits[byte] |= 1 << (i & 7)

    def is_member(self, d: int) -> bool:
        """Is d among the members pushed so far? Valid for 1 <= d < last."""
        if d == 1:
            return self.has_one
        if d == 2:
            return self.has_two
        if d & 1:
            return False  # odd members beyond 1 would need d^2+1 even
        if d <= self.config.member_bound:
            i = d >> 1
            byte = i >> 3
            return byte < len(self._bits) and bool(
                self._bits[byte] & (1 << (i & 7))
            )
        if self.store is not None:
            return self.store.lookup_a(d)
        raise WindowExhaustedError(
            f"difference {d} exceeds member_bound "
            f"{self.config.member_bound} and no store is attached"
        )

    def record(self, a: int, j: int) -> None:
        n = self.count + 1  # index this member will have once pushed
        self.j_histogram[j] += 1
        if j > self.max_j:
            self.max_j = j
            self.champions.append(ChampionRecord(n, a, j))


def j_of(state: VerifierState, value: int) -> int:
    """Least j >= 1 with value - (j-th most recent member) a member.

    Scans the window newest-first, then walks older segments from the
    attached store. Exhausting the entire prefix raises
    CounterexampleFound; exhausting just the window with no store raises
    WindowExhaustedError.
    """
    w = state.window
    m = len(w)
    for i in range(1, m + 1):
        if state.is_member(value - w[m - i]):
            return i
    if m == state.count:  # window still holds the whole prefix
        raise CounterexampleFound(state.count + 1, value)
    if state.store is None:
        raise WindowExhaustedError(
            f"window of {m} exhausted at member {value} with no store attached"
        )
    i = m
    for older in _descend_below(state.store, w[0]):
        i += 1
        if state.is_member(value - older):
            return i
    raise CounterexampleFound(state.count + 1, value)


def _descend_below(store: SegmentStore, below: int) -> Iterator[int]:
    """Stored members < below, descending."""
    for entry in reversed(store.manifest.entries_of(KIND_A)):
        if entry.lo >= below:
            continue
        values = store.entry_values(entry)
        cut = int(np.searchsorted(values, below))
        for v in values[:cut][::-1].tolist():
            yield v


@dataclass
class VerificationReport:
    members: int
    verified: int
    last_member: int
    max_j: int
    champions: list
    j_histogram: dict

    def summary(self) -> str:
        lines = [
            f"members seen:      {self.members}",
            f"decompositions:    {self.verified}",
            f"largest member:    {self.last_member}",
            f"largest offset j:  {self.max_j}",
            f"champions:         {len(self.champions)}",
        ]
        return "\n".join(lines)


def verify_stream(
    values: Iterable[int],
    *,
    config: Optional[VerifierConfig] = None,
    store: Optional[SegmentStore] = None,
    progress=None,
    progress_every: int = 1_000_000,
) -> VerificationReport:
    """Check every member of an ascending complete stream of A.

    The stream must start at 1 and contain every member up to its end;
    the decomposition search is only meaningful against the full prefix.
    Raises CounterexampleFound if some member has no decomposition.
    """
    state = VerifierState(config, store)
    it = iter(values)
    first = next(it, None)
    if first is None:
        raise ValueError("empty stream")
    if first != 1:
        raise ValueError(f"stream must start at the first member 1, got {first}")
    state.push(1)
    for a in it:
        j = j_of(state, a)
        state.record(a, j)
        state.push(a)
        if progress is not None and state.count % progress_every == 0:
            progress(f"verified through member #{state.count} = {a}")
    hist = dict(sorted(state.j_histogram.items()))
    return VerificationReport(
        members=state.count,
        verified=max(0, state.count - 1),
        last_member=state.last,
        max_j=max(hist) if hist else 0,
        champions=list(state.champions),
        j_histogram=hist,
    )


def write_champions_csv(champions: Iterable[ChampionRecord], out: TextIO) -> None:
    out.write("n,a_n,j\n")
    for c in champions:
        out.write(f"{c.n},{c.a_n},{c.j}\n")


@dataclass(frozen=True)
class ChampionTableRow:
    n: int
    a_n: int
    expected_a_n: int
    j: int
    j_over_log_n: float


def champion_table(
    champions: Iterable[ChampionRecord], hl_constant: float = DEFAULT_HL_CONSTANT
) -> list:
    """Annotate champions with the density-model prediction for a_n.

    The model says the n-th member sits near (2/C) * n * log2(2n / C)
    where C is the Hardy-Littlewood constant for this prime family; the
    last column compares the record offset j against log n.
    """
    rows = []
    for c in champions:
        expected = round((2.0 / hl_constant) * c.n * math.log2(2.0 * c.n / hl_constant))
        rows.append(
            ChampionTableRow(
                n=c.n,
                a_n=c.a_n,
                expected_a_n=int(expected),
                j=c.j,
                j_over_log_n=round(c.j / math.log(c.n), 2),
            )
        )
    return rows


def format_champion_table(rows: Iterable[ChampionTableRow]) -> str:
    rows = list(rows)
    head = ("n", "a_n", "model a_n", "j", "j/log n")
    cells = [
        (str(r.n), str(r.a_n), str(r.expected_a_n), str(r.j), f"{r.j_over_log_n:.2f}")
        for r in rows
    ]
    widths = [max(len(h), *(len(c[i]) for c in cells)) if cells else len(h)
              for i, h in enumerate(head)]
    out = ["  ".join(h.rjust(w) for h, w in zip(head, widths))]
    for c in cells:
        out.append("  ".join(v.rjust(w) for v, w in zip(c, widths)))
    return "\n".join(out)
