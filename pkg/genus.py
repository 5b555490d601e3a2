"""Genus theory for imaginary quadratic orders.

The genus map sends integers prime to the conductor to a vector of +-1
characters, one per odd prime of d plus the dyadic characters selected by d
modulo 16 and 32. Components on integers sharing a prime with d are evaluated
through the Hilbert symbol (d, n)_p, which agrees with the character table on
units and extends it to multiples of p.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from core_arith import hilbert_symbol, kronecker, prime_divisors, valuation
from quadratic import (
    Disc,
    IdealLat,
    different,
    elt_norm,
    ideal_add,
    ideal_scale,
    is_invertible,
    unit_ideal,
)


@dataclass(frozen=True)
class GenusVector:
    labels: tuple[str, ...]
    bits: tuple[int, ...]

    @property
    def is_trivial(self) -> bool:
        return all(bit == 1 for bit in self.bits)

    def component(self, label: str) -> int:
        return self.bits[self.labels.index(label)]

    def drop(self, label: str) -> GenusVector:
        keep = [i for i, name in enumerate(self.labels) if name != label]
        return GenusVector(tuple(self.labels[i] for i in keep), tuple(self.bits[i] for i in keep))

    def to_dict(self) -> dict:
        return dict(zip(self.labels, self.bits))

    def __str__(self) -> str:
        return "(" + ", ".join(f"{name}:{'+' if bit == 1 else '-'}" for name, bit in zip(self.labels, self.bits)) + ")"


# ---------------------------------------------------------------------------
# Characters
# ---------------------------------------------------------------------------
def _chi_minus4(a: int) -> int:
    return 1 if a % 4 == 1 else -1


def _chi_8(a: int) -> int:
    return 1 if a % 8 in (1, 7) else -1


def _chi_minus8(a: int) -> int:
    return 1 if a % 8 in (1, 3) else -1


_DYADIC = {"-4": _chi_minus4, "8": _chi_8, "-8": _chi_minus8}


def _dyadic_labels(d: int) -> tuple[str, ...]:
    if d % 4 == 1 or d % 16 == 4:
        return ()
    if d % 16 == 12 or d % 32 == 16:
        return ("-4",)
    if d % 32 == 8:
        return ("8",)
    if d % 32 == 24:
        return ("-8",)
    return ("-4", "8")


def genus_labels(disc: Disc) -> tuple[str, ...]:
    odd = tuple(str(p) for p in prime_divisors(disc.d) if p != 2)
    return odd + _dyadic_labels(disc.d)


def genus_k(disc: Disc) -> int:
    return len(genus_labels(disc))


def _label_prime(label: str) -> int:
    return 2 if label in _DYADIC else int(label)


def _component(d: int, label: str, a: int) -> int:
    p = _label_prime(label)
    if a % p == 0:
        return hilbert_symbol(d, a, p)
    if p == 2:
        return _DYADIC[label](a)
    return kronecker(a, p)


def psi(disc: Disc, a: int) -> GenusVector:
    if a == 0:
        raise ValueError("psi is undefined at 0")
    if math.gcd(a, disc.f) != 1:
        raise ValueError(f"{a} shares a factor with the conductor {disc.f}")
    labels = genus_labels(disc)
    return GenusVector(labels, tuple(_component(disc.d, label, a) for label in labels))


def _check_local(disc: Disc, p: int) -> None:
    if disc.d % p:
        raise ValueError(f"{p} does not divide {disc.d}")
    if disc.f % p == 0:
        raise ValueError(f"{p} divides the conductor of {disc.d}")


def _psi_p_at_p(d: int, p: int) -> int:
    if p == 2:
        star = d // 4 if d % 16 == 12 else d // 8
        return kronecker(2, star)
    sign = -1 if p % 4 == 3 else 1
    return kronecker(d // (sign * p), p)


def _label_for(disc: Disc, p: int) -> str:
    if p != 2:
        return str(p)
    return _dyadic_labels(disc.d)[0]


def psi_p(disc: Disc, p: int, n: int) -> int:
    """The p-component of the genus map, extended to multiples of p."""
    _check_local(disc, p)
    if n == 0:
        raise ValueError("psi_p is undefined at 0")
    k = valuation(n, p)
    unit = n // p**k
    if p == 2:
        value = _DYADIC[_label_for(disc, 2)](unit)
    else:
        value = kronecker(unit, p)
    return value * _psi_p_at_p(disc.d, p) ** k


def psi_hat_ell(disc: Disc, ell: int, n: int) -> GenusVector:
    _check_local(disc, ell)
    if n == 0:
        raise ValueError("psi is undefined at 0")
    if math.gcd(n, disc.f) != 1:
        raise ValueError(f"{n} shares a factor with the conductor {disc.f}")
    dropped = _label_for(disc, ell)
    labels = tuple(label for label in genus_labels(disc) if label != dropped)
    return GenusVector(labels, tuple(_component(disc.d, label, n) for label in labels))


def is_in_ker_psi(disc: Disc, m: int) -> bool:
    return psi(disc, m).is_trivial


# ---------------------------------------------------------------------------
# Genus of an ideal
# ---------------------------------------------------------------------------
def _box(radius: int):
    for x in range(-radius, radius + 1):
        for y in range(-radius, radius + 1):
            if max(abs(x), abs(y)) == radius:
                yield x, y


def local_generator(part: IdealLat, p: int, v: int) -> tuple[int, int]:
    """Smallest alpha in the p-primary part with v_p(N alpha) = v exactly.

    Candidates run over growing boxes of lattice coordinates, lexicographic
    within each box, and must have N(alpha) / p^v prime to the conductor.
    """
    f = part.disc.f
    (n, _), (u, c) = part.basis()
    radius = 1
    while True:
        for x, y in _box(radius):
            alpha = (x * n + y * u, y * c)
            norm = elt_norm(part.disc, alpha)
            if norm == 0 or valuation(norm, p) != v:
                continue
            if math.gcd(norm // p**v, f) == 1:
                return alpha
        radius += 1


def genus_of(a: IdealLat) -> GenusVector:
    """Genus of an invertible ideal, moving primes of the conductor away first."""
    if not is_invertible(a):
        raise ValueError(f"ideal {a} is not invertible")
    disc = a.disc
    norm = Fraction(a.norm)
    for p in prime_divisors(math.gcd(a.norm, disc.f)):
        v = valuation(a.norm, p)
        part = ideal_add(a, ideal_scale(unit_ideal(disc), p**v))
        alpha = local_generator(part, p, v)
        norm = norm / p**v * Fraction(elt_norm(disc, alpha), p**v)
    return psi(disc, int(norm))


def square_class_test(a: IdealLat) -> bool:
    return genus_of(a).is_trivial


# ---------------------------------------------------------------------------
# Norm-one residues and the count of matching multipliers
# ---------------------------------------------------------------------------
def norm_one_classes(disc: Disc) -> frozenset[tuple[int, int]]:
    """Residues gamma mod sqrt(d)O with N(gamma) = 1 mod d, as (x0, x1) pairs."""
    if disc.d in (-3, -4):
        raise ValueError("norm_one_classes needs d < -4")
    modulus = different(disc)
    return frozenset(
        (x0, x1)
        for x0, x1 in product(range(modulus.n), range(modulus.c))
        if (elt_norm(disc, (x0, x1)) - 1) % disc.d == 0
    )


def _v(n: int, p: int) -> float:
    return math.inf if n == 0 else valuation(n, p)


def rho_tilde(disc: Disc, s: int, t: int) -> int:
    d = disc.d
    v2d = _v(d, 2)
    dyadic = 1
    if (d % 16 == 12 and (s - t) % 2 == 0) or (d % 8 == 0 and _v(s, 2) >= v2d - 2):
        dyadic *= 2
    if d % 32 == 0 and (s - 2 * t) % 4 == 0:
        dyadic *= 2
    odd = sum(1 for p in prime_divisors(d) if p != 2 and _v(s, p) >= valuation(d, p))
    return dyadic * 2**odd
