"""Exact integer arithmetic shared by every other module.

Primality, factorisation, p-adic valuations, and the Kronecker and Hilbert
symbols. Rationals are plain :class:`fractions.Fraction` values, which are
always kept in lowest terms with a positive denominator.
"""
from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator

Rat = Fraction

INFINITY = math.inf

# First 13 primes: a deterministic Miller-Rabin base set for n < 3.317e24.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_MR_DETERMINISTIC_LIMIT = 3_317_044_064_679_887_385_961_981
_MR_RANDOM_ROUNDS = 40
_TRIAL_DIVISION_LIMIT = 10**6


@dataclass(frozen=True)
class Factorization:
    sign: int
    factors: tuple[tuple[int, int], ...]

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(self.factors)

    def value(self) -> int:
        result = self.sign
        for p, e in self.factors:
            result *= p**e
        return result

    def primes(self) -> list[int]:
        return [p for p, _ in self.factors]

    def exponent(self, p: int) -> int:
        for prime, e in self.factors:
            if prime == p:
                return e
        return 0

    def to_dict(self) -> dict:
        return {"sign": self.sign, "factors": [[p, e] for p, e in self.factors]}


# ---------------------------------------------------------------------------
# Primes
# ---------------------------------------------------------------------------
@lru_cache(maxsize=8)
def primes_up_to(limit: int) -> tuple[int, ...]:
    if limit < 2:
        return ()
    sieve = bytearray([1]) * (limit + 1)
    sieve[0] = sieve[1] = 0
    for p in range(2, math.isqrt(limit) + 1):
        if sieve[p]:
            sieve[p * p :: p] = bytearray(len(range(p * p, limit + 1, p)))
    return tuple(i for i, flag in enumerate(sieve) if flag)


def _strong_probable_prime(n: int, a: int, d: int, s: int) -> bool:
    x = pow(a, d, n)
    if x == 1 or x == n - 1:
        return True
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return True
    return False


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in _MR_WITNESSES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    bases: tuple[int, ...] = _MR_WITNESSES
    if n >= _MR_DETERMINISTIC_LIMIT:
        rng = random.Random(n)
        bases += tuple(rng.randrange(2, n - 1) for _ in range(_MR_RANDOM_ROUNDS))
    return all(_strong_probable_prime(n, a, d, s) for a in bases)


def next_prime(n: int) -> int:
    candidate = max(2, n + 1)
    while not is_prime(candidate):
        candidate += 1
    return candidate


def _brent(n: int) -> int:
    """Return a non-trivial factor of the odd composite ``n``.

    Brent's cycle detection over x -> x^2 + c, with the random stream seeded
    from ``n`` so that repeated runs take the same path.
    """
    if n % 2 == 0:
        return 2
    rng = random.Random(n)
    batch = 128
    while True:
        y = rng.randrange(1, n)
        c = rng.randrange(1, n)
        g = r = q = 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(batch, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += batch
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g


def factor(n: int) -> Factorization:
    """Complete factorisation: trial division to 10**6, then Pollard-Brent."""
    if n == 0:
        raise ValueError("cannot factor 0")
    sign = -1 if n < 0 else 1
    n = abs(n)
    counts: Counter[int] = Counter()
    for p in primes_up_to(_TRIAL_DIVISION_LIMIT):
        if p * p > n:
            break
        while n % p == 0:
            counts[p] += 1
            n //= p
    stack = [n] if n > 1 else []
    while stack:
        m = stack.pop()
        if is_prime(m):
            counts[m] += 1
            continue
        root = math.isqrt(m)
        if root * root == m:
            stack.extend((root, root))
            continue
        d = _brent(m)
        stack.extend((d, m // d))
    return Factorization(sign, tuple(sorted(counts.items())))


def prime_divisors(n: int) -> list[int]:
    return factor(n).primes()


def divisors(n: int) -> list[int]:
    if n <= 0:
        raise ValueError(f"divisors of non-positive {n}")
    result = [1]
    for p, e in factor(n):
        result = [d * p**k for d in result for k in range(e + 1)]
    return sorted(result)


def is_square(n: int) -> bool:
    if n < 0:
        return False
    root = math.isqrt(n)
    return root * root == n


def is_squarefree(n: int) -> bool:
    if n == 0:
        return False
    return all(e == 1 for _, e in factor(n))


def valuation(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("valuation of 0 is infinite")
    n = abs(n)
    e = 0
    while n % p == 0:
        n //= p
        e += 1
    return e


def rational_valuation(x: Fraction, p: int) -> int:
    x = Fraction(x)
    return valuation(x.numerator, p) - valuation(x.denominator, p)


def as_integer(x: Fraction | int) -> int | None:
    """Return ``x`` as an int when it is integral, else ``None``."""
    x = Fraction(x)
    return x.numerator if x.denominator == 1 else None


# ---------------------------------------------------------------------------
# Symbols
# ---------------------------------------------------------------------------
def kronecker(a: int, n: int) -> int:
    if n == 0:
        return 1 if abs(a) == 1 else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    twos = 0
    while n % 2 == 0:
        n //= 2
        twos += 1
    if twos:
        if a % 2 == 0:
            return 0
        if twos % 2 == 1 and a % 8 in (3, 5):
            result = -result
    # Jacobi symbol (a | n) for odd n > 0
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def _split_off(a: int, p: int) -> tuple[int, int]:
    e = 0
    while a % p == 0:
        a //= p
        e += 1
    return e, a


def hilbert_symbol(a: int, b: int, p: int | float) -> int:
    """The Hilbert symbol (a, b)_p for p a prime or :data:`INFINITY`."""
    if a == 0 or b == 0:
        raise ValueError("Hilbert symbol needs non-zero arguments")
    if p == INFINITY:
        return -1 if a < 0 and b < 0 else 1
    p = int(p)
    alpha, u = _split_off(a, p)
    beta, v = _split_off(b, p)
    if p != 2:
        sign = -1 if (alpha * beta) % 2 == 1 and p % 4 == 3 else 1
        if beta % 2 == 1:
            sign *= kronecker(u, p)
        if alpha % 2 == 1:
            sign *= kronecker(v, p)
        return sign

    def eps(x: int) -> int:
        return ((x - 1) // 2) % 2

    def omega(x: int) -> int:
        return ((x * x - 1) // 8) % 2

    exponent = eps(u) * eps(v) + alpha * omega(v) + beta * omega(u)
    return -1 if exponent % 2 else 1


def hilbert_places(a: int, b: int) -> list[int | float]:
    """Places where (a, b)_p could be non-trivial: primes of 2ab and infinity."""
    places: list[int | float] = sorted(set(prime_divisors(2 * a * b)))
    places.append(INFINITY)
    return places
