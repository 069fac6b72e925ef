"""Elementary integer arithmetic: primality, factoring, symbols.

Factoring is deliberately desk-scale: trial division up to a fixed bound
followed by Pollard rho with an iteration cap.  Anything that survives both
raises FactorizationFailure rather than silently returning a composite.
"""

import functools
import math
import random

from .errors import FactorizationFailure, NotPrimePower

TRIAL_DIVISION_BOUND = 10 ** 6
POLLARD_RHO_MAX_ITER = 2 ** 22


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin (valid for n < 3.3 * 10^24)."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_rho(n: int, rng: random.Random) -> int:
    """One Pollard-rho attempt; returns a nontrivial factor or raises."""
    if n % 2 == 0:
        return 2
    for _ in range(24):
        c = rng.randrange(1, n)
        x = y = rng.randrange(2, n)
        d = 1
        count = 0
        while d == 1:
            count += 1
            if count > POLLARD_RHO_MAX_ITER:
                break
            x = (x * x + c) % n
            y = (y * y + c) % n
            y = (y * y + c) % n
            d = math.gcd(abs(x - y), n)
        if 1 < d < n:
            return d
    raise FactorizationFailure(f"pollard rho gave up on {n}")


def factorint(n: int, rho_seed: int = 1) -> dict:
    """Factor |n| into primes, {p: exponent}.  Raises FactorizationFailure
    when the desk-scale strategy (trial division then rho) is exhausted."""
    n = abs(n)
    if n == 0:
        raise ValueError("cannot factor 0")
    out: dict = {}
    for p in (2, 3, 5):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    d = 7
    increments = (4, 2, 4, 2, 4, 6, 2, 6)
    idx = 0
    while d * d <= n and d <= TRIAL_DIVISION_BOUND:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += increments[idx]
        idx = (idx + 1) % 8
    if n == 1:
        return out
    rng = random.Random(rho_seed)
    stack = [n]
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if is_prime(m):
            out[m] = out.get(m, 0) + 1
            continue
        f = _pollard_rho(m, rng)
        stack.append(f)
        stack.append(m // f)
    return out


def prime_power_decompose(q: int) -> tuple:
    """Write q = p^n with p prime; raises NotPrimePower otherwise."""
    if q < 2:
        raise NotPrimePower(f"{q} is not a prime power")
    for n in range(int(math.log2(q)), 0, -1):
        p = round(q ** (1.0 / n))
        for cand in (p - 1, p, p + 1):
            if cand >= 2 and cand ** n == q and is_prime(cand):
                return cand, n
    raise NotPrimePower(f"{q} is not a prime power")


def squarefree_decompose(n: int, rho_seed: int = 1) -> tuple:
    """Return (f, m) with |n| = f^2 * m and m squarefree."""
    fac = factorint(n, rho_seed)
    f = 1
    m = 1
    for p, e in fac.items():
        f *= p ** (e // 2)
        if e % 2:
            m *= p
    return f, m


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a/n)."""
    if n == 0:
        return 1 if a in (1, -1) else 0
    if n < 0:
        return (-1 if a < 0 else 1) * kronecker(a, -n)
    t = 1
    while n % 2 == 0:
        n //= 2
        if a % 2 == 0:
            return 0
        if a % 8 in (3, 5):
            t = -t
    a %= n
    while a != 0:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                t = -t
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            t = -t
        a %= n
    return t if n == 1 else 0


def isqrt_exact(n: int):
    """Integer square root if n is a perfect square, else None."""
    if n < 0:
        return None
    r = math.isqrt(n)
    return r if r * r == n else None


@functools.lru_cache(maxsize=64)
def primes_up_to(bound: int) -> list:
    """All primes <= bound (simple sieve; cached, do not mutate)."""
    if bound < 2:
        return []
    sieve = bytearray([1]) * (bound + 1)
    sieve[0] = sieve[1] = 0
    for i in range(2, math.isqrt(bound) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(sieve[i * i :: i]))
    return [i for i in range(bound + 1) if sieve[i]]
