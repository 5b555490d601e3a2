"""Valuations of J(d1, d2) from ideal counts in O_{d1}.

Every value here is an exact :class:`~fractions.Fraction`; the sign of J is
never determined on this side. Valuations are of J^(8 / (w1 w2)).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from core_arith import Factorization, as_integer, factor, hilbert_symbol, kronecker, prime_divisors, valuation
from quadratic import Disc, class_number, count_A, make_disc
from utils import format_rational

PROVED = "proved"
CONJECTURAL = "conjectural"
ORACLE_ONLY = "oracle-only"

_STATUS_RANK = {PROVED: 0, CONJECTURAL: 1, ORACLE_ONLY: 2}


class HypothesisViolated(ValueError):
    """The closed form does not apply to this (d1, d2, l, m)."""


class EpsilonUndefined(ValueError):
    pass


class InconsistentSupport(RuntimeError):
    pass


@dataclass(frozen=True)
class PairContext:
    d1: Disc
    d2: Disc

    def __post_init__(self):
        if self.d1.d == self.d2.d:
            raise ValueError("d1 and d2 must be distinct")

    @classmethod
    def of(cls, d1: int, d2: int) -> PairContext:
        return cls(make_disc(d1), make_disc(d2))

    @property
    def product(self) -> int:
        return self.d1.d * self.d2.d

    def swapped(self) -> PairContext:
        return PairContext(self.d2, self.d1)

    def __str__(self) -> str:
        return f"({self.d1.d}, {self.d2.d})"


@dataclass(frozen=True)
class XSlot:
    x: int
    m: int
    c: int
    mult: int


@dataclass(frozen=True)
class Term:
    x: int
    m: int
    mult: int
    support: Optional[int]
    value: Optional[Fraction]
    status: str = PROVED

    def to_dict(self) -> dict:
        return {
            "x": self.x,
            "m": self.m,
            "mult": self.mult,
            "support": self.support,
            "value": format_rational(self.value),
            "status": self.status,
        }


@dataclass(frozen=True)
class ValuationResult:
    ell: int
    value: Optional[Fraction]
    status: str
    terms: tuple[Term, ...] = field(default_factory=tuple)
    h_term: Fraction = Fraction(0)

    def to_dict(self) -> dict:
        return {
            "ell": self.ell,
            "value": format_rational(self.value),
            "status": self.status,
            "h_term": format_rational(self.h_term),
            "terms": [term.to_dict() for term in self.terms if term.value],
        }


def worse_status(a: str, b: str) -> str:
    return a if _STATUS_RANK[a] >= _STATUS_RANK[b] else b


# ---------------------------------------------------------------------------
# Admissible x and the support of F(m)
# ---------------------------------------------------------------------------
def enumerate_x(ctx: PairContext) -> list[XSlot]:
    """All x >= 0 with x^2 <= d1 d2 and x = d1 d2 mod 2; x > 0 stands for +-x."""
    big = ctx.product
    slots = []
    for x in range(big % 2, math.isqrt(big) + 1, 2):
        m = (big - x * x) // 4
        slots.append(XSlot(x=x, m=m, c=1 if x == 0 else 2, mult=1 if x == 0 else 2))
    return slots


def _prime_square_ratio(big: int, small: int) -> Optional[int]:
    """l when big = small * l^(2k) with k > 0, else None."""
    if big % small:
        return None
    ratio = big // small
    if ratio == 1:
        return None
    root = math.isqrt(ratio)
    if root * root != ratio:
        return None
    primes = prime_divisors(root)
    return primes[0] if len(primes) == 1 else None


def _square_ratio_prime(ctx: PairContext) -> Optional[int]:
    return _prime_square_ratio(ctx.d2.d, ctx.d1.d) or _prime_square_ratio(ctx.d1.d, ctx.d2.d)


def support_prime(ctx: PairContext, m: int) -> Optional[int]:
    if m == 0:
        return _square_ratio_prime(ctx)
    d1 = ctx.d1.d
    obstructed = [p for p in prime_divisors(2 * d1 * m) if hilbert_symbol(d1, -m, p) == -1]
    if len(obstructed) % 2 == 0:
        raise InconsistentSupport(f"even number of finite places for ({d1}, {-m})")
    if len(obstructed) == 1 and m % obstructed[0] == 0:
        return obstructed[0]
    return None


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------
def rho(ctx: PairContext, ell: int, m: int) -> int:
    d1, f1, f2 = ctx.d1.d, ctx.d1.f, ctx.d2.f
    for p in prime_divisors(d1):
        if f1 % p and p != ell and hilbert_symbol(d1, -m, p) == -1:
            return 0
    shared = prime_divisors(math.gcd(m, d1))
    return 2 ** sum(1 for p in shared if f2 % p or p == ell)


def epsilon_ell(d1: Disc, ell: int, n: Fraction | int) -> int:
    """Local ideal-count factor at l; no ideal has a norm that is fractional or below one."""
    value = as_integer(n)
    if value is None or value <= 0:
        return 0
    if d1.d % ell == 0:
        return 2
    if valuation(value, ell) % 2:
        return 0
    return 1


def ramification_index(disc: Disc, ell: int) -> int:
    return 2 if disc.d_fund % ell == 0 else 1


def doubly_ramified_at_two(ctx: PairContext, ell: int) -> bool:
    return ell == 2 and ctx.d1.d_fund % 2 == 0 and ctx.d2.d_fund % 2 == 0


def H_term(ctx: PairContext, ell: int) -> Fraction:
    if _prime_square_ratio(ctx.d2.d, ctx.d1.d) == ell:
        return Fraction(2, ctx.d1.w) * class_number(ctx.d1)
    if _prime_square_ratio(ctx.d1.d, ctx.d2.d) == ell:
        return Fraction(2, ctx.d2.w) * class_number(ctx.d2)
    return Fraction(0)


def v_F(ctx: PairContext, ell: int, m: int) -> ValuationResult:
    """v_l(F(m)) when l is prime to f1 and m is prime to f1."""
    d1, d2 = ctx.d1, ctx.d2
    if d1.f % ell == 0:
        raise HypothesisViolated(f"{ell} divides the conductor of {d1.d}")
    if m == 0:
        return ValuationResult(ell, H_term(ctx, ell), PROVED)
    if math.gcd(m, d1.f) != 1:
        raise HypothesisViolated(f"m = {m} shares a factor with the conductor of {d1.d}")
    status = CONJECTURAL if doubly_ramified_at_two(ctx, ell) else PROVED
    if support_prime(ctx, m) != ell:
        return ValuationResult(ell, Fraction(0), status)
    weight = rho(ctx, ell, m)
    if not weight:
        return ValuationResult(ell, Fraction(0), status)
    if d2.f % ell == 0:
        value = Fraction(weight * count_A(d1, d2.f, ell, Fraction(m, ell)))
    else:
        total = 0
        r = 1
        while ell**r <= m:
            total += count_A(d1, d2.f, ell, Fraction(m, ell**r))
            r += 1
        value = Fraction(weight * total, ramification_index(d1, ell))
    return ValuationResult(ell, value, status)


def _orientation(ctx: PairContext, ell: int, m: int) -> Optional[PairContext]:
    for candidate in (ctx, ctx.swapped()):
        if candidate.d1.f % ell and math.gcd(m, candidate.d1.f) == 1:
            return candidate
    return None


def v_J(ctx: PairContext, ell: int) -> ValuationResult:
    """v_l(J^(8/(w1 w2))) as H plus the per-x closed forms, x > 0 counted twice."""
    total = Fraction(0)
    status = PROVED
    terms = []
    h_value = H_term(ctx, ell)
    for slot in enumerate_x(ctx):
        if slot.m == 0:
            terms.append(Term(slot.x, 0, slot.mult, _square_ratio_prime(ctx), h_value))
            total += slot.mult * h_value
            continue
        support = support_prime(ctx, slot.m)
        if support != ell:
            terms.append(Term(slot.x, slot.m, slot.mult, support, Fraction(0)))
            continue
        oriented = _orientation(ctx, ell, slot.m)
        if oriented is None:
            logging.debug({"event": "closed_form_unavailable", "pair": str(ctx), "ell": ell, "m": slot.m})
            terms.append(Term(slot.x, slot.m, slot.mult, support, None, ORACLE_ONLY))
            return ValuationResult(ell, None, ORACLE_ONLY, tuple(terms), h_value)
        result = v_F(oriented, ell, slot.m)
        term_status = result.status
        # the general closed form is derived for l > 2 once the first order is non-maximal
        if ell == 2 and oriented.d1.f > 1:
            term_status = worse_status(term_status, CONJECTURAL)
        status = worse_status(status, term_status)
        terms.append(Term(slot.x, slot.m, slot.mult, support, result.value, term_status))
        total += slot.mult * result.value
    return ValuationResult(ell, total, status, tuple(terms), h_value)


def candidate_primes(ctx: PairContext) -> list[int]:
    """Every prime that can divide J(d1, d2)."""
    primes: set[int] = set()
    ratio_prime = _square_ratio_prime(ctx)
    if ratio_prime:
        primes.add(ratio_prime)
    for slot in enumerate_x(ctx):
        if slot.m:
            support = support_prime(ctx, slot.m)
            if support:
                primes.add(support)
    return sorted(primes)


# ---------------------------------------------------------------------------
# Local factors and the closed-form endomorphism count
# ---------------------------------------------------------------------------
def local_factors_product(ctx: PairContext, ell: int, m: int, r: int) -> int:
    d1, f2 = ctx.d1, ctx.d2.f
    if math.gcd(m, d1.f) != 1:
        raise HypothesisViolated(f"m = {m} shares a factor with the conductor of {d1.d}")
    result = epsilon_ell(d1, ell, Fraction(m, ell**r))
    if not result:
        return 0
    for p, v in factor(m):
        if p == ell:
            continue
        chi = kronecker(d1.d, p)
        if chi == 1:
            result *= 2 if f2 % p == 0 else 1 + v
        elif chi == -1:
            result *= 1 if f2 % p and v % 2 == 0 else 0
        elif hilbert_symbol(d1.d, -m, p) != 1:
            return 0
        elif f2 % p:
            result *= 2
        else:
            result *= 1 if v == 2 else 0
        if not result:
            return 0
    return result


def weighted_Snm(ctx: PairContext, ell: int, m: int, n: int) -> Fraction:
    """Closed form for the number of degree-l^n endomorphism candidates with invariant m."""
    d1 = ctx.d1
    r = n if d1.d % ell == 0 else 2 * n - 1
    c = 1 if 4 * m == ctx.product else 2
    weight = Fraction(c * d1.w, 2) * rho(ctx, ell, m)
    return weight * count_A(d1, ctx.d2.f, ell, Fraction(m, ell**r))


# ---------------------------------------------------------------------------
# The classical epsilon-product
# ---------------------------------------------------------------------------
def _epsilon(ctx: PairContext, p: int) -> int:
    d1, d2 = ctx.d1.d, ctx.d2.d
    if d1 % p:
        return kronecker(d1, p)
    if d2 % p:
        return kronecker(d2, p)
    raise EpsilonUndefined(f"{p} divides both {d1} and {d2}")


def gz_classic_F(ctx: PairContext, m: int) -> Factorization:
    """F(m) = prod_{n | m} n^eps(m/n), eps extended multiplicatively."""
    if m <= 0:
        raise ValueError("gz_classic_F needs m > 0")
    parts = factor(m).factors
    eps = {p: _epsilon(ctx, p) for p, _ in parts}
    exponents: dict[int, int] = {p: 0 for p, _ in parts}

    def walk(i: int, chosen: tuple[int, ...]) -> None:
        if i == len(parts):
            sign = 1
            for (p, e), k in zip(parts, chosen):
                sign *= eps[p] ** (e - k)
            for (p, _), k in zip(parts, chosen):
                exponents[p] += k * sign
            return
        for k in range(parts[i][1] + 1):
            walk(i + 1, chosen + (k,))

    walk(0, ())
    return Factorization(1, tuple((p, e) for p, e in sorted(exponents.items()) if e))


def classic_v_J(ctx: PairContext, ell: int) -> Fraction:
    if ctx.d1.f != 1 or ctx.d2.f != 1 or math.gcd(ctx.d1.d, ctx.d2.d) != 1:
        raise HypothesisViolated("the classical formula needs coprime fundamental discriminants")
    total = 0
    for slot in enumerate_x(ctx):
        if slot.m:
            total += slot.mult * gz_classic_F(ctx, slot.m).exponent(ell)
    return Fraction(total)


# ---------------------------------------------------------------------------
# Coprime-conductor conjecture
# ---------------------------------------------------------------------------
def _d_at(ctx: PairContext, p: int) -> Disc:
    return ctx.d1 if ctx.d1.f % p else ctx.d2


def _conjecture_epsilon(ctx: PairContext, ell: int, m: int) -> Fraction:
    f = ctx.d1.f * ctx.d2.f
    d_ell = _d_at(ctx, ell).d
    v = valuation(m, ell)
    if f % ell and d_ell % ell == 0:
        return Fraction(v)
    if f % ell and d_ell % ell and v % 2:
        return Fraction(v + 1, 2)
    if d_ell % ell and v % 2 == 0:
        return Fraction(0)
    return Fraction(1)


def _conjecture_local(ctx: PairContext, p: int, v: int, m: int) -> int:
    f = ctx.d1.f * ctx.d2.f
    d_p = _d_at(ctx, p).d
    chi = kronecker(d_p, p)
    divides_f = f % p == 0
    if chi == 1:
        return 2 if divides_f else 1 + v
    if chi == -1:
        return 1 if not divides_f and v % 2 == 0 else 0
    if hilbert_symbol(d_p, -m, p) != 1:
        return 0
    if not divides_f:
        return 2
    return 1 if v == 2 else 0


def conjecture_v_J(ctx: PairContext, ell: int) -> Fraction:
    if math.gcd(ctx.d1.f, ctx.d2.f) != 1:
        raise HypothesisViolated("conductors must be coprime")
    total = Fraction(0)
    h_value = H_term(ctx, ell)
    for slot in enumerate_x(ctx):
        if slot.m == 0:
            total += slot.mult * h_value
            continue
        eps = _conjecture_epsilon(ctx, ell, slot.m)
        if not eps:
            continue
        product = 1
        for p, v in factor(slot.m):
            if p != ell:
                product *= _conjecture_local(ctx, p, v, slot.m)
        total += slot.mult * eps * product
    return total
