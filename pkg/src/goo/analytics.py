"""Counting statistics for the members of A = {a : a^2 + 1 prime}.

Two classical density models for the count of members a with a^2 + 1 <= x:

* a square-root model          c * sqrt(x) / log(x)
* a logarithmic-integral model (c / 2) * li(sqrt(x))

where c is the Hardy-Littlewood constant for this quadratic family,
an Euler product over odd primes. ``count_table`` streams the member set
once and reports the observed count against both models.
"""

import math
from dataclasses import dataclass
from math import isqrt
from typing import Iterable, Optional

import numpy as np

EULER_GAMMA = 0.5772156649015329

# Truncated Euler product over odd primes, carried to more digits than the
# table rendering needs; compute_cq re-derives it for validation.
DEFAULT_HL_CONSTANT = 1.3728134628182


class DomainError(ValueError):
    """Argument outside the function's mathematical domain."""


class StreamTooShortError(ValueError):
    """The member stream does not cover the largest requested point."""


@dataclass(frozen=True)
class HardyLittlewoodConstant:
    c_q: float = DEFAULT_HL_CONSTANT
    note: str = (
        "truncated Euler product over odd primes p: (1 - chi(p)/(p-1)), "
        "chi(p) = +1 when p = 1 mod 4 else -1; validate via compute_cq"
    )


def compute_cq(prime_limit) -> float:
    """Truncated Euler product defining the constant, over odd p <= limit.

    Converges like 1/limit, so 10^5 gives ~4 digits and 10^8 ~6. Used to
    cross-check DEFAULT_HL_CONSTANT, not to replace it.
    """
    limit = int(prime_limit)
    if limit < 3:
        raise ValueError("prime_limit must be at least 3")
    from .sieve import small_primes

    odd = small_primes(limit)[1:]
    chi = np.where(odd % 4 == 1, 1.0, -1.0)
    p = odd.astype(np.float64)
    return float(np.exp(np.log1p(-chi / (p - 1.0)).sum()))


def li(t: float) -> float:
    """Principal-value logarithmic integral, li(t) = PV int_0^t du/log u.

    Ramanujan's exponentially convergent series around gamma + log log t.
    Alternating terms peak near n = log t and then die factorially, so a
    few hundred terms cover any t this package ever evaluates.
    """
    t = float(t)
    if t <= 1.0:
        raise DomainError(f"li requires t > 1, got {t}")
    lt = math.log(t)
    series = 0.0
    fact_pow = 1.0  # lt^n / (n! * 2^(n-1))
    inner = 0.0  # sum of 1/(2k+1) for 2k+1 <= n
    for n in range(1, 400):
        fact_pow *= lt / n
        if n > 1:
            fact_pow /= 2.0
        if n & 1:
            inner += 1.0 / n
        term = fact_pow * inner
        if n & 1:
            series += term
        else:
            series -= term
        if n > lt and abs(term) < 1e-18 * abs(series):
            break
    return EULER_GAMMA + math.log(lt) + math.sqrt(t) * series


def count_model_sqrt(x: float, c_q: float = DEFAULT_HL_CONSTANT) -> float:
    """Square-root density model: c * sqrt(x) / log(x). Needs x > 1."""
    if x <= 1.0:
        raise DomainError(f"model requires x > 1, got {x}")
    return c_q * math.sqrt(x) / math.log(x)


def count_model_li(x: float, c_q: float = DEFAULT_HL_CONSTANT) -> float:
    """Logarithmic-integral density model: (c / 2) * li(sqrt(x))."""
    if x <= 1.0:
        raise DomainError(f"model requires x > 1, got {x}")
    return 0.5 * c_q * li(math.sqrt(x))


@dataclass(frozen=True)
class CountTableRow:
    x: int
    pi_q: int  # members a with a^2 + 1 <= x
    ratio_f: float  # pi_q / sqrt model
    ratio_g: float  # pi_q / li model


def count_table(
    a_stream: Iterable[int],
    points: Iterable[int],
    *,
    covered_to: Optional[int] = None,
    c_q: float = DEFAULT_HL_CONSTANT,
) -> list:
    """Observed member counts against both density models, one pass.

    ``points`` are thresholds on x = a^2 + 1, ascending, each >= 10.
    ``covered_to`` (exclusive) declares how far the stream is complete;
    pass it whenever known so truncated data fails loudly instead of
    producing quietly-low counts.
    """
    pts = [int(p) for p in points]
    if not pts:
        return []
    if any(b <= a for a, b in zip(pts, pts[1:])):
        raise ValueError("points must be strictly ascending")
    if pts[0] < 10:
        raise ValueError("points below 10 are not meaningful here")
    thresholds = [isqrt(x - 1) for x in pts]
    if covered_to is not None and covered_to <= thresholds[-1]:
        raise StreamTooShortError(
            f"stream covers members below {covered_to}, "
            f"largest point needs them through {thresholds[-1]}"
        )

    counts = []
    k = 0
    n = 0
    prev = 0
    for a in a_stream:
        a = int(a)
        if a <= prev:
            raise ValueError(f"member stream must strictly ascend, got {a} after {prev}")
        prev = a
        while k < len(thresholds) and a > thresholds[k]:
            counts.append(n)
            k += 1
        if k == len(thresholds):
            break
        n += 1
    while k < len(thresholds):
        if covered_to is None or covered_to > thresholds[k]:
            counts.append(n)
            k += 1
        else:  # pragma: no cover - guarded above, kept for safety
            raise StreamTooShortError(
                f"stream ended at {prev}, point {pts[k]} needs coverage "
                f"through {thresholds[k]}"
            )

    return [
        CountTableRow(
            x=x,
            pi_q=c,
            ratio_f=c / count_model_sqrt(x, c_q),
            ratio_g=c / count_model_li(x, c_q),
        )
        for x, c in zip(pts, counts)
    ]


def format_count_table(rows: Iterable[CountTableRow]) -> str:
    rows = list(rows)
    head = ("x", "count", "count/sqrt-model", "count/li-model")
    cells = [
        (_fmt_power(r.x), str(r.pi_q), f"{r.ratio_f:.5f}", f"{r.ratio_g:.5f}")
        for r in rows
    ]
    widths = [
        max(len(h), *(len(c[i]) for c in cells)) if cells else len(h)
        for i, h in enumerate(head)
    ]
    out = ["  ".join(h.rjust(w) for h, w in zip(head, widths))]
    for c in cells:
        out.append("  ".join(v.rjust(w) for v, w in zip(c, widths)))
    return "\n".join(out)


def count_table_csv(rows: Iterable[CountTableRow]) -> str:
    lines = ["x,count,ratio_sqrt_model,ratio_li_model"]
    for r in rows:
        lines.append(f"{r.x},{r.pi_q},{r.ratio_f:.6f},{r.ratio_g:.6f}")
    return "\n".join(lines) + "\n"


def _fmt_power(x: int) -> str:
    if x >= 10:
        k = round(math.log10(x))
        if 10**k == x:
            return f"10^{k}"
    return str(x)
