"""Brute-force reference answers, used to pin down the fast paths.

Everything in this module trades speed for obviousness: trial division,
linear scans, bisection over plain lists. The sieve and verifier are tested
against these functions, so nothing here may share code with them.
"""

from bisect import bisect_left

# Below this, trial division is exact and cheap enough; at or above it we
# switch to a fixed-witness strong-pseudoprime test.
_TRIAL_CUTOFF = 10**10

# Deterministic for every n < 3.3e24, which covers the full 64-bit range.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)

_BRUTE_A_CAP = 10**7

_trial_primes: list | None = None


def _trial_prime_table() -> list:
    """Primes up to sqrt(_TRIAL_CUTOFF), from a plain byte sieve."""
    global _trial_primes
    if _trial_primes is None:
        limit = 10**5
        flags = bytearray([1]) * (limit + 1)
        flags[0] = flags[1] = 0
        for i in range(2, int(limit**0.5) + 1):
            if flags[i]:
                flags[i * i :: i] = bytes(len(range(i * i, limit + 1, i)))
        _trial_primes = [i for i in range(2, limit + 1) if flags[i]]
    return _trial_primes


def _strong_probable_prime(n: int, base: int) -> bool:
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    x = pow(base, d, n)
    if x == 1 or x == n - 1:
        return True
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return True
    return False


def is_prime_64(n: int) -> bool:
    """Exact primality for 0 <= n < 2^64.

    Trial division below 10^10, a deterministic Miller-Rabin witness set
    above it.
    """
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    if n < _TRIAL_CUTOFF:
        for p in _trial_prime_table():
            if p * p > n:
                return True
            if n % p == 0:
                return n == p
        return True
    for a in _MR_WITNESSES:
        if not _strong_probable_prime(n, a):
            return False
    return True


def brute_a(limit: int) -> list:
    """All a <= limit with a^2+1 prime, by testing every candidate.

    Guarded at 10^7 because the cost is quadratic-ish in the limit; the
    sieve is the tool for anything larger.
    """
    if limit > _BRUTE_A_CAP:
        raise ValueError(f"brute_a limit {limit} exceeds cap {_BRUTE_A_CAP}")
    return [a for a in range(1, limit + 1) if is_prime_64(a * a + 1)]


def brute_j(a_list: list, n: int) -> int:
    """j for the n-th member of A (n is 1-based), by linear scan.

    a_list must be a complete ascending prefix of A covering index n.
    Returns the least i >= 1 with a_n - a_{n-i} in A.
    """
    if n < 2 or n > len(a_list):
        raise ValueError(f"n={n} out of range for a list of {len(a_list)}")
    a_n = a_list[n - 1]
    for i in range(1, n):
        d = a_n - a_list[n - 1 - i]
        k = bisect_left(a_list, d)
        if k < len(a_list) and a_list[k] == d:
            return i
    raise ValueError(f"no j exists for a_n={a_n} within the given prefix")
