"""Integer factorization under an explicit work budget.

Trial division up to ``TRIAL_LIMIT`` and then Brent's variant of Pollard rho.
Anything that survives both raises :class:`FactorizationBudgetExceeded`;
callers treat that as "skip", never as a partial answer.
"""
from __future__ import annotations

import math
from functools import lru_cache

from .errors import FactorizationBudgetExceeded

TRIAL_LIMIT = 10**6
RHO_ITERATIONS = 200_000

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


@lru_cache(maxsize=1)
def small_primes(limit: int = TRIAL_LIMIT) -> tuple[int, ...]:
    sieve = bytearray([1]) * (limit + 1)
    sieve[0:2] = b"\x00\x00"
    for p in range(2, math.isqrt(limit) + 1):
        if sieve[p]:
            sieve[p * p :: p] = bytearray(len(range(p * p, limit + 1, p)))
    return tuple(i for i, flag in enumerate(sieve) if flag)


def is_probable_prime(n: int) -> bool:
    """Miller-Rabin; deterministic below 3.3e24 with the fixed bases."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _brent(n: int, c: int, max_iter: int) -> int | None:
    y, r, q, g = 2, 1, 1, 1
    x = ys = y
    f = lambda v: (v * v + c) % n  # noqa: E731
    spent = 0
    while g == 1:
        x = y
        for _ in range(r):
            y = f(y)
        k = 0
        while k < r and g == 1:
            ys = y
            for _ in range(min(128, r - k)):
                y = f(y)
                q = q * abs(x - y) % n
            g = math.gcd(q, n)
            k += 128
        spent += r
        r *= 2
        if spent > max_iter:
            return None
    if g == n:
        while True:
            ys = f(ys)
            g = math.gcd(abs(x - ys), n)
            if g > 1:
                break
    return g if g != n else None


def _split(n: int, budget: int) -> list[int]:
    if n == 1:
        return []
    if is_probable_prime(n):
        return [n]
    r = math.isqrt(n)
    if r * r == n:
        return _split(r, budget) * 2
    for c in range(1, 8):
        d = _brent(n, c, budget)
        if d is not None and 1 < d < n:
            return _split(d, budget) + _split(n // d, budget)
    raise FactorizationBudgetExceeded(f"could not split {n.bit_length()}-bit cofactor")


def factorize(n: int, trial_limit: int = TRIAL_LIMIT,
              rho_iterations: int = RHO_ITERATIONS) -> dict[int, int]:
    """Prime factorization of ``|n|`` as ``{prime: exponent}``.

    Raises:
        ValueError: for ``n == 0``.
        FactorizationBudgetExceeded: if Pollard rho gives up on a cofactor.
    """
    n = abs(int(n))
    if n == 0:
        raise ValueError("cannot factor 0")
    out: dict[int, int] = {}
    for p in small_primes(max(trial_limit, 2)):
        if p > trial_limit or p * p > n:
            break
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out[p] = e
    if n > 1:
        for p in _split(n, rho_iterations):
            out[p] = out.get(p, 0) + 1
    return dict(sorted(out.items()))
