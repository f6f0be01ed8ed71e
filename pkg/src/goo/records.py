"""Record types shared by the sieves and the segment store."""

from dataclasses import dataclass
from typing import Iterator, NamedTuple, Optional

import numpy as np


class PrimeRootRecord(NamedTuple):
    """A prime p = 1 (mod 4) with the canonical square root r of -1 mod p
    (the root below p/2; the mate is p - r)."""

    p: int
    r: int


@dataclass
class PrimeRootBlock:
    """A run of prime-root records covering the integer interval [lo, hi).

    Columnar storage: two parallel int64 arrays, ascending in p. The range
    is what makes streams auditable — consumers can prove they saw every
    prime below a bound by checking that block ranges tile it.
    """

    lo: Optional[int]
    hi: Optional[int]
    p: np.ndarray
    r: np.ndarray

    def __len__(self) -> int:
        return int(self.p.size)

    def __iter__(self) -> Iterator[PrimeRootRecord]:
        for p, r in zip(self.p.tolist(), self.r.tolist()):
            yield PrimeRootRecord(p, r)

    def records(self) -> list:
        return list(self)


@dataclass
class ASegment:
    """Ascending members of A = {a : a^2+1 prime} within [lo, hi)."""

    lo: int
    hi: int
    values: np.ndarray

    def __len__(self) -> int:
        return int(self.values.size)

    def __iter__(self) -> Iterator[int]:
        return iter(self.values.tolist())
