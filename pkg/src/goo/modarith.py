"""Scalar modular arithmetic: products, powers, roots of -1, CRT.

All functions take plain ints and assume the caller respects the stated
ranges; Python's arbitrary-precision ints make the wide intermediate
products exact without further care.
"""

from math import gcd


class NotOneModFourError(ValueError):
    """p is not congruent to 1 mod 4, so -1 has no square root mod p."""


class NoRootFoundError(ArithmeticError):
    """No candidate base produced a root of -1; p is almost certainly
    composite, which callers must treat as data corruption."""


class NotCoprimeError(ValueError):
    """CRT moduli share a factor."""


def mul_mod(a: int, b: int, m: int) -> int:
    """(a*b) mod m, exact for any operand size."""
    return a * b % m


def pow_mod(base: int, exp: int, m: int) -> int:
    """base^exp mod m by square-and-multiply; exp = 0 gives 1."""
    return pow(base, exp, m)


def _candidate_bases(cap: int):
    # primes 2, 3, 5, 7, ... up to cap, by trial division; cap is tiny
    for n in range(2, cap + 1):
        if all(n % d for d in range(2, int(n**0.5) + 1)):
            yield n


def sqrt_minus_one(p: int, base_cap: int = 1000) -> int:
    """Canonical square root of -1 mod p for a prime p = 1 (mod 4).

    Tries t = n^((p-1)/4) for bases n = 2, 3, 5, 7, ... and accepts the
    first t with t^2 = -1 (mod p). A fixed base is not enough: the base
    must be a quadratic non-residue mod p, so roughly every second prime
    works. Returns min(t, p-t), the root below p/2.
    """
    if p % 4 != 1:
        raise NotOneModFourError(f"p={p} is not 1 mod 4")
    exp = (p - 1) // 4
    for base in _candidate_bases(base_cap):
        t = pow(base % p, exp, p)
        if t * t % p == p - 1:
            return min(t, p - t)
    raise NoRootFoundError(
        f"no base <= {base_cap} yields a root of -1 mod {p}; "
        f"{p} is likely composite (corrupt input)"
    )


def crt_pair(r1: int, m1: int, r2: int, m2: int) -> tuple:
    """The unique x mod m1*m2 with x = r1 (mod m1) and x = r2 (mod m2)."""
    if gcd(m1, m2) != 1:
        raise NotCoprimeError(f"moduli {m1} and {m2} share a factor")
    # lift r1 by a multiple of m1 chosen mod m2
    t = (r2 - r1) * pow(m1, -1, m2) % m2
    m = m1 * m2
    return ((r1 + m1 * t) % m, m)
