"""Constructive checks and scans for families of integer polynomials.

The interesting families here are shifted squares (c*y + s)^2 + 1: when do
several of them take prime values at the same argument? Tools:

* ``bunyakovsky_check``  -- no prime divides the product at every argument
  (the local obstruction test for simultaneous primality).
* ``residue_certificate`` -- exact root set of one polynomial mod p, which
  is how an obstruction is exhibited when one exists.
* ``construct_shifts``   -- build shift lists whose square family has no
  local obstruction, dodging a caller-supplied set.
* ``simultaneous_prime_scan`` -- enumerate arguments where every family
  member is prime, with running counts for density comparison.
"""

import bisect
import math
from dataclasses import dataclass
from math import gcd, isqrt
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np

from .modarith import crt_pair
from .oracle import is_prime_64

_SCAN_FILTER_LIMIT = 97  # pre-filter removes multiples of primes up to here


class ValueOverflowError(OverflowError):
    """Polynomial values would leave the exact 64-bit range."""


class SearchBudgetExceededError(RuntimeError):
    """Candidate scan hit its cap before finding enough shifts."""


@dataclass(frozen=True)
class IntPolynomial:
    """Integer polynomial; coefficients leading-first, constant term last."""

    coefficients: tuple

    def __post_init__(self):
        coeffs = tuple(int(c) for c in self.coefficients)
        if len(coeffs) < 2:
            raise ValueError("degree must be at least 1")
        if coeffs[0] <= 0:
            raise ValueError("leading coefficient must be positive")
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @classmethod
    def shifted_square(cls, scale: int, shift: int) -> "IntPolynomial":
        """(scale*y + shift)^2 + 1 as an explicit quadratic."""
        if scale == 0:
            raise ValueError("scale must be nonzero")
        return cls((scale * scale, 2 * scale * shift, shift * shift + 1))

    def __call__(self, y: int) -> int:
        acc = 0
        for c in self.coefficients:
            acc = acc * y + c
        return acc

    def eval_mod(self, y: int, mod: int) -> int:
        acc = 0
        for c in self.coefficients:
            acc = (acc * y + c) % mod
        return acc

    def eval_array(self, y: np.ndarray) -> np.ndarray:
        acc = np.zeros_like(y)
        for c in self.coefficients:
            acc = acc * y + c
        return acc

    def __str__(self) -> str:
        deg = self.degree
        parts = []
        for i, c in enumerate(self.coefficients):
            if c == 0:
                continue
            power = deg - i
            mag = abs(c)
            if power == 0:
                body = str(mag)
            else:
                y = "y" if power == 1 else f"y^{power}"
                body = y if mag == 1 else f"{mag}{y}"
            sign = "-" if c < 0 else "+"
            parts.append((sign, body))
        if not parts:
            return "0"
        head_sign, head = parts[0]
        text = ("-" if head_sign == "-" else "") + head
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text


def parse_polynomial(text: str) -> IntPolynomial:
    """Two grammars: "a_k,...,a_0" raw coefficients, or "sq:c,s" meaning
    (c*y + s)^2 + 1."""
    text = text.strip()
    if text.startswith("sq:"):
        body = text[3:]
        parts = body.split(",")
        if len(parts) != 2:
            raise ValueError(f"sq: form wants two integers, got {body!r}")
        try:
            scale, shift = (int(p.strip()) for p in parts)
        except ValueError:
            raise ValueError(f"bad shifted-square spec {text!r}") from None
        return IntPolynomial.shifted_square(scale, shift)
    try:
        coeffs = tuple(int(p.strip()) for p in text.split(","))
    except ValueError:
        raise ValueError(f"bad coefficient list {text!r}") from None
    return IntPolynomial(coeffs)


def _product_coefficients(polys: Sequence[IntPolynomial]) -> list:
    prod = [1]
    for poly in polys:
        nxt = [0] * (len(prod) + poly.degree)
        for i, a in enumerate(prod):
            if a == 0:
                continue
            for j, b in enumerate(poly.coefficients):
                nxt[i + j] += a * b
        prod = nxt
    return prod


def _primes_upto(n: int) -> list:
    if n < 2:
        return []
    sieve = bytearray([1]) * (n + 1)
    sieve[0:2] = b"\x00\x00"
    for p in range(2, isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p :: p] = bytes(len(sieve[p * p :: p]))
    return [i for i in range(2, n + 1) if sieve[i]]


def _prime_factors(n: int) -> set:
    out = set()
    n = abs(n)
    for p in range(2, isqrt(n) + 1):
        while n % p == 0:
            out.add(p)
            n //= p
        if n == 1:
            break
    if n > 1:
        out.add(n)
    return out


def bunyakovsky_check(polys: Sequence[IntPolynomial]) -> Optional[int]:
    """Smallest prime dividing prod f_i(a) for every a, or None if none.

    Only primes up to the product's total degree can vanish by having
    enough roots; beyond that the product must be zero as a polynomial
    mod p, which happens exactly when p divides every product coefficient.
    Both routes are covered.
    """
    polys = list(polys)
    if not polys:
        raise ValueError("need at least one polynomial")
    total_degree = sum(p.degree for p in polys)
    candidates = set(_primes_upto(total_degree))
    content = gcd(*(abs(c) for c in _product_coefficients(polys))) if polys else 0
    candidates |= {p for p in _prime_factors(content) if p > total_degree}
    for p in sorted(candidates):
        if all(
            math.prod(f.eval_mod(a, p) for f in polys) % p == 0 for a in range(p)
        ):
            return p
    return None


def residue_certificate(poly: IntPolynomial, p: int) -> set:
    """Exact root set {a in [0, p) : f(a) = 0 mod p}, by exhaustive scan."""
    if p < 2 or p >= 10**6 or not is_prime_64(p):
        raise ValueError(f"p must be a prime below 10^6, got {p}")
    y = np.arange(p, dtype=np.int64)
    acc = np.zeros_like(y)
    for c in poly.coefficients:
        acc = (acc * y + c) % p
    return set(np.flatnonzero(acc == 0).tolist())


def construct_shifts(
    k: int,
    avoid: Union[Callable[[int], bool], Iterable[int], None] = None,
    *,
    budget: int = 10**6,
) -> list:
    """k ascending shifts, first 0, all sharing one residue mod P.

    P is the product of primes p <= 2k and the residue b is chosen by CRT
    so b^2 + 1 is a unit mod each p; then the family (x - b_i)^2 + 1 over
    the returned b_i has no local obstruction. Values in ``avoid`` (a set
    or a predicate) are skipped; scanning more than ``budget`` candidates
    raises SearchBudgetExceededError.
    """
    if k < 1:
        raise ValueError("k must be positive")
    if avoid is None:
        in_avoid = lambda v: False
    elif callable(avoid):
        in_avoid = avoid
    else:
        members = set(avoid)
        in_avoid = lambda v: v in members

    residue, modulus = 0, 1
    for p in _primes_upto(2 * k):
        for r in range(p):
            if (r * r + 1) % p != 0:
                residue, modulus = crt_pair(residue, modulus, r, p)
                break

    # the base residue can be taken as 0: 0^2 + 1 = 1 is a unit everywhere
    assert residue == 0, "residue 0 always survives, CRT should keep it"
    shifts = []
    candidate = 0
    scanned = 0
    while len(shifts) < k:
        if scanned > budget:
            raise SearchBudgetExceededError(
                f"scanned {scanned} candidates for {k} shifts, found {len(shifts)}"
            )
        if not in_avoid(candidate):
            shifts.append(candidate)
        candidate += modulus
        scanned += 1
    return shifts


@dataclass(frozen=True)
class ScanCheckpoint:
    y: int
    hits: int
    fitted_constant: float  # hits * log(y)^k / y, the density-shape fit


@dataclass
class ScanResult:
    polynomials: tuple
    y_limit: int
    hits: list
    checkpoints: list

    @property
    def count(self) -> int:
        return len(self.hits)


def simultaneous_prime_scan(
    polys: Sequence[IntPolynomial],
    y_limit: int,
    *,
    chunk: int = 1 << 15,
) -> ScanResult:
    """All y in [0, y_limit] where every f_i(y) is prime, values distinct.

    Distinctness matters: two polynomials hitting the *same* prime (as
    {y^2+1, (y-2)^2+1} both do at y = 1, value 2) is a degenerate
    coincidence, not simultaneous primality of the family.

    A vectorized residue pre-filter removes multiples of small primes;
    survivors get the deterministic 64-bit primality test. Checkpoints at
    powers of ten record running counts against the c*y/log^k(y) shape.
    """
    polys = list(polys)
    if len(set(p.coefficients for p in polys)) != len(polys):
        raise ValueError("polynomials must be pairwise distinct")
    bad = bunyakovsky_check(polys)
    if bad is not None:
        raise ValueError(
            f"family has a local obstruction: every value divisible by {bad}"
        )
    if y_limit < 0:
        raise ValueError("y_limit must be nonnegative")
    bound = max(
        sum(abs(c) * y_limit ** (p.degree - i) for i, c in enumerate(p.coefficients))
        for p in polys
    )
    if bound >= 1 << 63:
        raise ValueOverflowError(
            f"values reach {bound:.3e} at y = {y_limit}, past the 64-bit range"
        )

    filter_primes = _primes_upto(_SCAN_FILTER_LIMIT)
    marks = sorted(
        {10**d for d in range(1, 19) if 10**d <= y_limit} | {y_limit}
    )
    hits: list = []
    checkpoints: list = []
    k = len(polys)
    mark_idx = 0

    for lo in range(0, y_limit + 1, chunk):
        hi = min(lo + chunk - 1, y_limit)
        y = np.arange(lo, hi + 1, dtype=np.int64)
        values = [p.eval_array(y) for p in polys]
        ok = np.ones(y.size, dtype=bool)
        for v in values:
            ok &= v >= 2
        for i in range(k):
            for j in range(i + 1, k):
                ok &= values[i] != values[j]
        for q in filter_primes:
            for v in values:
                ok &= ~((v % q == 0) & (v != q))
        for yi in y[ok].tolist():
            if all(is_prime_64(int(p(yi))) for p in polys):
                hits.append(yi)
        while mark_idx < len(marks) and marks[mark_idx] <= hi:
            m = marks[mark_idx]
            n = _count_upto(hits, m)
            fitted = n * math.log(m) ** k / m if m > 1 and n else 0.0
            checkpoints.append(ScanCheckpoint(y=m, hits=n, fitted_constant=fitted))
            mark_idx += 1

    return ScanResult(
        polynomials=tuple(polys), y_limit=y_limit, hits=hits, checkpoints=checkpoints
    )


def _count_upto(sorted_list: list, value: int) -> int:
    return bisect.bisect_right(sorted_list, value)


def scan_csv(result: ScanResult) -> str:
    """One row per hit: argument, each value, and the all-prime flag."""
    k = len(result.polynomials)
    lines = ["y," + ",".join(f"f{i}" for i in range(k)) + ",all_prime"]
    for y in result.hits:
        vals = ",".join(str(p(y)) for p in result.polynomials)
        lines.append(f"{y},{vals},1")
    return "\n".join(lines) + "\n"
