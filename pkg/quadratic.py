"""Imaginary quadratic orders O_d, their forms, ideals and class groups.

Elements of K = Q(sqrt d) are coordinate pairs ``(x0, x1)`` meaning
``x0 + x1 * w`` with ``w = (d + sqrt d) / 2``; ``w**2 = d*w - N0`` where
``N0 = (d*d - d) / 4``. Coordinates may be ints or Fractions.

Integral ideals are stored in Hermite normal form ``(n, u, c)``: the lattice
spanned by ``n`` and ``u + c*w`` with ``c | n``, ``c | u`` and ``0 <= u < n``.
Equality of ideals is equality of these triples.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

from core_arith import as_integer, divisors, factor, kronecker, prime_divisors, valuation
from lattice import hnf, in_lattice, rational_hnf

Elt = tuple  # (x0, x1) over {1, w}


@dataclass(frozen=True)
class Disc:
    d: int
    f: int
    d_fund: int
    w: int

    @property
    def n0(self) -> int:
        return (self.d * self.d - self.d) // 4

    @property
    def is_fundamental(self) -> bool:
        return self.f == 1

    def s(self, ell: int) -> int:
        return valuation(self.f, ell)

    def depleted(self, ell: int) -> int:
        """d with the l-part of the conductor removed."""
        return self.d // ell ** (2 * self.s(ell))

    def splitting(self, p: int) -> int:
        """1 split, -1 inert, 0 ramified (for p not dividing the conductor)."""
        return kronecker(self.d_fund, p)

    def to_dict(self) -> dict:
        return {"d": self.d, "f": self.f, "d_fund": self.d_fund, "w": self.w}


@lru_cache(maxsize=4096)
def make_disc(d: int) -> Disc:
    if d >= 0 or d % 4 not in (0, 1):
        raise ValueError(f"{d} is not an imaginary quadratic discriminant")
    f = 1
    for p, e in factor(d):
        f *= p ** (e // 2)
    d0 = d // (f * f)
    if d0 % 4 != 1:
        f //= 2
        d0 *= 4
    w = 6 if d == -3 else 4 if d == -4 else 2
    return Disc(d=d, f=f, d_fund=d0, w=w)


# ---------------------------------------------------------------------------
# Element arithmetic
# ---------------------------------------------------------------------------
def elt_mul(disc: Disc, x: Elt, y: Elt) -> Elt:
    x0, x1 = x
    y0, y1 = y
    return (x0 * y0 - disc.n0 * x1 * y1, x0 * y1 + x1 * y0 + disc.d * x1 * y1)


def elt_conj(disc: Disc, x: Elt) -> Elt:
    x0, x1 = x
    return (x0 + disc.d * x1, -x1)


def elt_norm(disc: Disc, x: Elt):
    x0, x1 = x
    return x0 * x0 + disc.d * x0 * x1 + disc.n0 * x1 * x1


def elt_trace(disc: Disc, x: Elt):
    x0, x1 = x
    return 2 * x0 + disc.d * x1


def elt_scale(k, x: Elt) -> Elt:
    return (k * x[0], k * x[1])


def elt_add(x: Elt, y: Elt) -> Elt:
    return (x[0] + y[0], x[1] + y[1])


def sqrt_d(disc: Disc) -> Elt:
    return (-disc.d, 2)


# ---------------------------------------------------------------------------
# Forms
# ---------------------------------------------------------------------------
@dataclass(frozen=True, order=True)
class QuadForm:
    a: int
    b: int
    c: int

    @property
    def disc(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    @property
    def is_reduced(self) -> bool:
        a, b, c = self.a, self.b, self.c
        if not (abs(b) <= a <= c):
            return False
        if (abs(b) == a or a == c) and b < 0:
            return False
        return True

    def reduce(self) -> QuadForm:
        a, b, c = self.a, self.b, self.c
        while True:
            if not (-a < b <= a):
                k = (a - b) // (2 * a)
                b, c = b + 2 * a * k, a * k * k + b * k + c
            if a > c:
                a, b, c = c, -b, a
                continue
            if a == c and b < 0:
                b = -b
            return QuadForm(a, b, c)

    def inverse(self) -> QuadForm:
        return QuadForm(self.a, -self.b, self.c).reduce()

    def __str__(self) -> str:
        return f"({self.a},{self.b},{self.c})"


def reduced_forms(disc: Disc) -> list[QuadForm]:
    d = disc.d
    forms = []
    a = 1
    while 3 * a * a <= -d:
        for b in range(-a + 1, a + 1):
            if (b - d) % 2:
                continue
            num = b * b - d
            if num % (4 * a):
                continue
            c = num // (4 * a)
            if c < a or (a == c and b < 0):
                continue
            if math.gcd(math.gcd(a, b), c) != 1:
                continue
            forms.append(QuadForm(a, b, c))
        a += 1
    return sorted(forms, key=lambda form: (form.a, abs(form.b), -form.b))


def class_number(disc: Disc) -> int:
    return len(reduced_forms(disc))


# ---------------------------------------------------------------------------
# Ideals
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class IdealLat:
    disc: Disc
    n: int
    u: int
    c: int

    @property
    def norm(self) -> int:
        return self.n * self.c

    def basis(self) -> tuple[Elt, Elt]:
        return ((self.n, 0), (self.u, self.c))

    def contains(self, x: Elt) -> bool:
        x0, x1 = Fraction(x[0]), Fraction(x[1])
        k = x1 / self.c
        if k.denominator != 1:
            return False
        return ((x0 - k * self.u) / self.n).denominator == 1

    @cached_property
    def invertible(self) -> bool:
        return is_invertible(self)

    def __str__(self) -> str:
        return f"[{self.n}, {self.u}+{self.c}w]"


def _ideal_from_rows(disc: Disc, rows: Iterable[Elt]) -> IdealLat:
    # HNF on (x1, x0) puts the lattice in the shape (c, u), (0, n).
    reduced = hnf([[int(x1), int(x0)] for x0, x1 in rows])
    if len(reduced) != 2:
        raise ValueError("elements do not span a rank-2 lattice")
    (c, u), (_, n) = reduced
    return IdealLat(disc, n, u, c)


def ideal_from_lattice(disc: Disc, rows: Iterable[Elt]) -> IdealLat:
    ideal = _ideal_from_rows(disc, rows)
    w = (0, 1)
    for b in ideal.basis():
        if not ideal.contains(elt_mul(disc, w, b)):
            raise ValueError("lattice is not an ideal of O_d")
    return ideal


def ideal_from_generators(disc: Disc, gens: Sequence[Elt]) -> IdealLat:
    w = (0, 1)
    rows: list[Elt] = []
    for g in gens:
        rows.append(g)
        rows.append(elt_mul(disc, g, w))
    return _ideal_from_rows(disc, rows)


def unit_ideal(disc: Disc) -> IdealLat:
    return IdealLat(disc, 1, 0, 1)


def principal_ideal(disc: Disc, x: Elt) -> IdealLat:
    return ideal_from_generators(disc, [x])


def different(disc: Disc) -> IdealLat:
    """The ideal sqrt(d) * O, of norm |d|."""
    return principal_ideal(disc, sqrt_d(disc))


def ideal_mul(a: IdealLat, b: IdealLat) -> IdealLat:
    disc = a.disc
    return _ideal_from_rows(disc, [elt_mul(disc, x, y) for x in a.basis() for y in b.basis()])


def ideal_pow(a: IdealLat, k: int) -> IdealLat:
    result = unit_ideal(a.disc)
    for _ in range(k):
        result = ideal_mul(result, a)
    return result


def ideal_conj(a: IdealLat) -> IdealLat:
    return _ideal_from_rows(a.disc, [elt_conj(a.disc, x) for x in a.basis()])


def ideal_norm(a: IdealLat) -> int:
    return a.norm


def ideal_add(a: IdealLat, b: IdealLat) -> IdealLat:
    return _ideal_from_rows(a.disc, list(a.basis()) + list(b.basis()))


def ideal_scale(a: IdealLat, k: int) -> IdealLat:
    return IdealLat(a.disc, a.n * abs(k), a.u * abs(k), a.c * abs(k))


def ideal_contained(a: IdealLat, b: IdealLat) -> bool:
    """True when ``a`` is a subset of ``b``."""
    return all(b.contains(x) for x in a.basis())


def order_element(disc: Disc, conductor: int) -> Elt:
    """Generator w' of the order of conductor ``conductor | f``, over {1, w}."""
    ratio = Fraction(conductor, disc.f)
    d_small = disc.d_fund * conductor * conductor
    return (Fraction(d_small) / 2 - ratio * disc.d / 2, ratio)


def multiplier_conductor(a: IdealLat) -> int:
    """Conductor of the multiplier ring {x in K : x a in a}."""
    disc = a.disc
    g = disc.f
    for p in prime_divisors(disc.f):
        while g % p == 0:
            w_prime = order_element(disc, g // p)
            if all(a.contains(elt_mul(disc, w_prime, x)) for x in a.basis()):
                g //= p
            else:
                break
    return g


def is_invertible(a: IdealLat) -> bool:
    return multiplier_conductor(a) == a.disc.f


def ideals_of_norm(disc: Disc, norm: int) -> list[IdealLat]:
    """All integral ideals of the given norm; check ``.invertible`` on each."""
    if norm < 1:
        return []
    found = []
    for c in divisors(norm):
        if norm % (c * c):
            continue
        n = norm // c
        for u in range(0, n, c):
            candidate = IdealLat(disc, n, u, c)
            w_times = elt_mul(disc, (0, 1), (u, c))
            if candidate.contains(w_times):
                found.append(candidate)
    return found


def primary_decompose(a: IdealLat) -> list[tuple[int, IdealLat]]:
    if a.norm == 1:
        return []
    parts = []
    for p, e in factor(a.norm):
        local = ideal_scale(unit_ideal(a.disc), p**e)
        parts.append((p, ideal_add(a, local)))
    return parts


# ---------------------------------------------------------------------------
# Ideal <-> form correspondence
# ---------------------------------------------------------------------------
def form_to_ideal(disc: Disc, form: QuadForm) -> IdealLat:
    """[a, (-b + sqrt d)/2] in HNF."""
    a = form.a
    u = ((-form.b - disc.d) // 2) % a
    return IdealLat(disc, a, u, 1)


def ideal_to_form(a: IdealLat) -> QuadForm:
    """Form of the primitive part a/c = [A, u/c + w]; not reduced."""
    big_a = a.n // a.c
    u = a.u // a.c
    b = -(2 * u + a.disc.d)
    c = (b * b - a.disc.d) // (4 * big_a)
    return QuadForm(big_a, b, c)


def class_of(a: IdealLat) -> QuadForm:
    if not a.invertible:
        raise ValueError(f"ideal {a} is not invertible")
    return ideal_to_form(a).reduce()


def compose(disc: Disc, f: QuadForm, g: QuadForm) -> QuadForm:
    return class_of(ideal_mul(form_to_ideal(disc, f), form_to_ideal(disc, g)))


def identity_form(disc: Disc) -> QuadForm:
    return class_of(unit_ideal(disc))


def form_power(disc: Disc, form: QuadForm, k: int) -> QuadForm:
    result = identity_form(disc)
    for _ in range(k):
        result = compose(disc, result, form)
    return result


def squares_of_classes(disc: Disc) -> set[QuadForm]:
    return {compose(disc, form, form) for form in reduced_forms(disc)}


@dataclass(frozen=True)
class ClassGroup:
    disc: Disc
    forms: tuple[QuadForm, ...]
    table: tuple[tuple[int, ...], ...]

    @property
    def order(self) -> int:
        return len(self.forms)

    @property
    def two_rank(self) -> int:
        squares = {self.table[i][i] for i in range(self.order)}
        return (self.order // len(squares)).bit_length() - 1

    def element_order(self, i: int) -> int:
        k, current = 1, i
        while current != 0:
            current = self.table[current][i]
            k += 1
        return k


def class_group(disc: Disc) -> ClassGroup:
    """Reduced forms (identity first) with their composition table by index."""
    forms = tuple(reduced_forms(disc))
    position = {form: i for i, form in enumerate(forms)}
    table = tuple(
        tuple(position[compose(disc, f, g)] for g in forms) for f in forms
    )
    return ClassGroup(disc, forms, table)


def class_representatives(disc: Disc, coprime_to: int = 1) -> dict[QuadForm, IdealLat]:
    """One invertible ideal per class, of smallest norm coprime to ``coprime_to``."""
    wanted = set(reduced_forms(disc))
    reps: dict[QuadForm, IdealLat] = {}
    norm = 1
    while len(reps) < len(wanted):
        if math.gcd(norm, coprime_to) == 1:
            for ideal in ideals_of_norm(disc, norm):
                if not ideal.invertible:
                    continue
                form = class_of(ideal)
                reps.setdefault(form, ideal)
        norm += 1
    return reps


# ---------------------------------------------------------------------------
# Constrained ideal counts
# ---------------------------------------------------------------------------
def _local_count(d1: Disc, f2: int, ell: int, p: int, v: int) -> int:
    split = d1.splitting(p)
    if p == ell or f2 % p:
        if split == 1:
            return v + 1
        if split == -1:
            return 1 if v % 2 == 0 else 0
        return 1
    if d1.d % p:
        return 2 if split == 1 else 0
    return 1 if v <= 2 else 0


def _count_A_fast(d1: Disc, f2: int, ell: int, norm: int) -> int:
    total = 1
    for p, v in factor(norm):
        total *= _local_count(d1, f2, ell, p, v)
        if not total:
            return 0
    return total


def _count_A_brute(d1: Disc, f2: int, ell: int, norm: int) -> int:
    shared = prime_divisors(math.gcd(norm, f2))
    no_p = [p for p in shared if p != ell and d1.d % p]
    no_cube = [p for p in shared if p != ell and d1.d % p == 0]
    cubes = [ideal_pow(prime, 3) for p in no_cube for prime in ideals_of_norm(d1, p)]
    count = 0
    for b in ideals_of_norm(d1, norm):
        if not b.invertible:
            continue
        if any(ideal_contained(b, ideal_scale(unit_ideal(d1), p)) for p in no_p):
            continue
        if any(ideal_contained(b, cube) for cube in cubes):
            continue
        count += 1
    return count


def count_A(d1: Disc, f2: int, ell: int, norm: Fraction | int, brute: bool = False) -> int:
    n = as_integer(norm)
    if n is None or n <= 0:
        return 0
    if brute or math.gcd(n, d1.f) != 1:
        return _count_A_brute(d1, f2, ell, n)
    return _count_A_fast(d1, f2, ell, n)


def embed_rows(disc: Disc, gens: Sequence[Elt]) -> list[tuple[Fraction, Fraction]]:
    """Rational HNF of the Z-span of arbitrary (possibly fractional) elements."""
    return [tuple(row) for row in rational_hnf([[Fraction(x0), Fraction(x1)] for x0, x1 in gens])]


def in_span(rows: Sequence[Sequence[Fraction]], x: Elt) -> bool:
    return in_lattice(rows, [Fraction(x[0]), Fraction(x[1])])
