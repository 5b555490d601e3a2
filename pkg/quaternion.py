"""Maximal orders of the definite quaternion algebra ramified at l.

The algebra is presented as pairs [alpha, beta] = alpha + beta*j over
K = Q(sqrt d) with j alpha j^-1 = conj(alpha) and j^2 = jsq, where
jsq = -l*q when l is inert in O_d and -q when l ramifies. Elements are
stored as two K-coordinate pairs; lattices as 4x4 rational HNF bases over
the ambient basis {1, w, j, w*j}.
"""
from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Optional, Sequence

from fpylll import GSO, Enumeration, EnumerationError, EvaluatorStrategy, IntegerMatrix

from config import config
from core_arith import is_prime, next_prime, prime_divisors
from genus import is_in_ker_psi, psi_hat_ell, psi_p
from gz_valuation import PairContext
from lattice import coordinates, determinant, in_lattice, index, rational_hnf, rational_kernel
from quadratic import (
    Disc,
    Elt,
    IdealLat,
    class_representatives,
    elt_add,
    elt_conj,
    elt_mul,
    elt_norm,
    elt_scale,
    elt_trace,
    ideals_of_norm,
    make_disc,
    sqrt_d,
    unit_ideal,
)

Vector = tuple[Fraction, Fraction, Fraction, Fraction]


class SearchExhausted(RuntimeError):
    """A bounded search for q or lambda ran past its cap."""


# ---------------------------------------------------------------------------
# The algebra
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class QuatElem:
    alpha: Elt
    beta: Elt

    def to_vector(self) -> Vector:
        return tuple(Fraction(x) for x in (*self.alpha, *self.beta))

    @classmethod
    def from_vector(cls, v: Sequence[Fraction]) -> QuatElem:
        return cls((Fraction(v[0]), Fraction(v[1])), (Fraction(v[2]), Fraction(v[3])))

    def __str__(self) -> str:
        return f"[{self.alpha[0]}+{self.alpha[1]}w, {self.beta[0]}+{self.beta[1]}w]"


@dataclass(frozen=True)
class QuatAlg:
    disc: Disc
    ell: int
    q: int
    jsq: int

    @property
    def ramified(self) -> bool:
        return self.disc.d % self.ell == 0

    @property
    def q_ideal(self) -> IdealLat:
        return next(a for a in ideals_of_norm(self.disc, self.q) if a.invertible)

    @property
    def ell_ideal(self) -> IdealLat:
        """The prime above l (ramified case only)."""
        return next(a for a in ideals_of_norm(self.disc, self.ell) if a.invertible)

    def one(self) -> QuatElem:
        return QuatElem((Fraction(1), Fraction(0)), (Fraction(0), Fraction(0)))

    def mul(self, x: QuatElem, y: QuatElem) -> QuatElem:
        d = self.disc
        alpha = elt_add(elt_mul(d, x.alpha, y.alpha), elt_scale(self.jsq, elt_mul(d, x.beta, elt_conj(d, y.beta))))
        beta = elt_add(elt_mul(d, x.alpha, y.beta), elt_mul(d, x.beta, elt_conj(d, y.alpha)))
        return QuatElem(alpha, beta)

    def conj(self, x: QuatElem) -> QuatElem:
        return QuatElem(elt_conj(self.disc, x.alpha), elt_scale(-1, x.beta))

    def trd(self, x: QuatElem) -> Fraction:
        return Fraction(elt_trace(self.disc, x.alpha))

    def nrd(self, x: QuatElem) -> Fraction:
        return Fraction(elt_norm(self.disc, x.alpha) - self.jsq * elt_norm(self.disc, x.beta))

    def bilinear(self, x: QuatElem, y: QuatElem) -> Fraction:
        return self.trd(self.mul(x, self.conj(y))) / 2

    def to_dict(self) -> dict:
        return {"d": self.disc.d, "ell": self.ell, "q": self.q, "jsq": self.jsq}


def _check_ell(disc: Disc, ell: int) -> None:
    if not is_prime(ell):
        raise ValueError(f"{ell} is not prime")
    if disc.f % ell == 0:
        raise ValueError(f"{ell} divides the conductor of {disc.d}")
    if disc.splitting(ell) == 1:
        raise ValueError(f"{ell} splits in O_{disc.d}")


def _q_admissible(disc: Disc, ell: int, q: int) -> bool:
    if disc.d % q == 0 or q == ell or disc.splitting(q) != 1:
        return False
    if disc.d % ell:
        return is_in_ker_psi(disc, -ell * q)
    return psi_hat_ell(disc, ell, -q).is_trivial and psi_p(disc, ell, -q) == -1


def choose_q(disc: Disc, ell: int) -> int:
    """Smallest prime q giving j^2 = -l*q (inert) or -q (ramified)."""
    _check_ell(disc, ell)
    q = 2
    while q <= config.CHOOSE_Q_BOUND:
        if _q_admissible(disc, ell, q):
            logging.debug({"event": "q_chosen", "d": disc.d, "ell": ell, "q": q})
            return q
        q = next_prime(q)
    raise SearchExhausted(f"no admissible q below {config.CHOOSE_Q_BOUND} for d={disc.d}, l={ell}")


def make_algebra(disc: Disc | int, ell: int) -> QuatAlg:
    disc = disc if isinstance(disc, Disc) else make_disc(disc)
    q = choose_q(disc, ell)
    jsq = -q if disc.d % ell == 0 else -ell * q
    return QuatAlg(disc, ell, q, jsq)


def _lambda_modulus(alg: QuatAlg) -> tuple[int, int]:
    if alg.ramified:
        return -alg.q, abs(alg.disc.d) // alg.ell
    return -alg.ell * alg.q, abs(alg.disc.d)


def lambda_ok(alg: QuatAlg, lam: Elt) -> bool:
    target, modulus = _lambda_modulus(alg)
    return alg.q_ideal.contains(lam) and (elt_norm(alg.disc, lam) - target) % modulus == 0


def _box(radius: int) -> Iterator[tuple[int, int]]:
    for x in range(-radius, radius + 1):
        for y in range(-radius, radius + 1):
            yield x, y


def find_lambda(alg: QuatAlg, q_ideal: Optional[IdealLat] = None) -> Elt:
    """Smallest lambda in q_ideal, in the order (box radius, x, y), with the norm congruence.

    lambda = x * n + y * (u + c w) over the HNF basis of the ideal; the box
    radius doubles from 2 up to the configured cap.
    """
    q_ideal = q_ideal or alg.q_ideal
    target, modulus = _lambda_modulus(alg)
    (n, _), (u, c) = q_ideal.basis()
    radius = 2
    while radius <= config.LAMBDA_BOX_CAP:
        for x, y in _box(radius):
            lam = (x * n + y * u, y * c)
            if (elt_norm(alg.disc, lam) - target) % modulus == 0:
                if not lambda_ok(alg, lam):
                    raise ArithmeticError(f"lambda {lam} failed its own congruence check")
                logging.debug({"event": "lambda_found", "d": alg.disc.d, "ell": alg.ell, "lambda": [lam[0], lam[1]]})
                return lam
        radius *= 2
    raise SearchExhausted(f"no lambda within the box cap {config.LAMBDA_BOX_CAP}")


# ---------------------------------------------------------------------------
# Lattices in K and in the algebra
# ---------------------------------------------------------------------------
def _k_span(gens: Sequence[Elt]) -> list[Elt]:
    return [tuple(row) for row in rational_hnf([[Fraction(x[0]), Fraction(x[1])] for x in gens])]


def _k_mul(disc: Disc, a: Sequence[Elt], b: Sequence[Elt]) -> list[Elt]:
    return _k_span([elt_mul(disc, x, y) for x in a for y in b])


def _ideal_rows(a: IdealLat) -> list[Elt]:
    return [tuple(Fraction(v) for v in x) for x in a.basis()]


def _ideal_inverse(a: IdealLat) -> list[Elt]:
    return _k_span([elt_scale(Fraction(1, a.norm), elt_conj(a.disc, x)) for x in a.basis()])


def _in_order(disc: Disc, x: Elt) -> bool:
    return Fraction(x[0]).denominator == 1 and Fraction(x[1]).denominator == 1


@dataclass(frozen=True)
class QuatLat:
    alg: QuatAlg
    rows: tuple[Vector, ...]

    def basis(self) -> list[QuatElem]:
        return [QuatElem.from_vector(row) for row in self.rows]

    def contains(self, x: QuatElem) -> bool:
        return in_lattice(self.rows, x.to_vector())


def make_lattice(alg: QuatAlg, gens: Sequence[QuatElem]) -> QuatLat:
    rows = rational_hnf([x.to_vector() for x in gens])
    if len(rows) != 4:
        raise ValueError(f"expected a rank-4 lattice, got rank {len(rows)}")
    return QuatLat(alg, tuple(rows))


def _embed(elements: Sequence[Elt]) -> list[QuatElem]:
    zero = (Fraction(0), Fraction(0))
    return [QuatElem(tuple(Fraction(v) for v in x), zero) for x in elements]


def _span_mul(alg: QuatAlg, left: Sequence[QuatElem], right: Sequence[QuatElem]) -> QuatLat:
    return make_lattice(alg, [alg.mul(x, y) for x in left for y in right])


def lat_mul(first: QuatLat, second: QuatLat) -> QuatLat:
    if first.alg != second.alg:
        raise ValueError("lattices live in different algebras")
    return _span_mul(first.alg, first.basis(), second.basis())


def conjugate_order(order: QuatLat, a: IdealLat) -> QuatLat:
    """a^-1 R a with a embedded diagonally as [x, 0]."""
    alg = order.alg
    left = _span_mul(alg, _embed(_ideal_inverse(a)), order.basis())
    return _span_mul(alg, left.basis(), _embed(_ideal_rows(a)))


def is_order(lat: QuatLat) -> bool:
    alg = lat.alg
    if not lat.contains(alg.one()):
        return False
    basis = lat.basis()
    for x in basis:
        if alg.trd(x).denominator != 1 or alg.nrd(x).denominator != 1:
            return False
        for y in basis:
            if not lat.contains(alg.mul(x, y)):
                return False
    return True


def reduced_discriminant_sq(lat: QuatLat) -> int:
    """|det(Trd(e_i conj(e_j)))| over the lattice basis."""
    alg = lat.alg
    basis = lat.basis()
    gram = [[alg.trd(alg.mul(x, alg.conj(y))) for y in basis] for x in basis]
    value = abs(determinant(gram))
    if value.denominator != 1:
        raise ValueError("lattice is not integral for the trace form")
    return int(value)


def intersect_with_field(lat: QuatLat) -> list[Elt]:
    """The K-lattice {alpha : [alpha, 0] in L}."""
    relations = rational_kernel([[row[2], row[3]] for row in lat.rows])
    alphas = []
    for rel in relations:
        a0 = sum(c * row[0] for c, row in zip(rel, lat.rows))
        a1 = sum(c * row[1] for c, row in zip(rel, lat.rows))
        alphas.append((Fraction(a0), Fraction(a1)))
    return _k_span(alphas)


def lattice_index(sub: QuatLat, sup: QuatLat) -> Fraction:
    return index(sub.rows, sup.rows)


# ---------------------------------------------------------------------------
# R_n(a, lambda) and the auxiliary order
# ---------------------------------------------------------------------------
def _beta_lattice(alg: QuatAlg, a: IdealLat, n: int) -> list[Elt]:
    """q^-1 * r * D^-1 * conj(a) * a^-1, with r = l^(n-1) (inert) or l_prime^n (ramified)."""
    disc = alg.disc
    q_inv = _ideal_inverse(alg.q_ideal)
    if alg.ramified:
        r = [(Fraction(1), Fraction(0))]
        for _ in range(n):
            r = _k_mul(disc, r, _ideal_rows(alg.ell_ideal))
    else:
        r = _k_span([(Fraction(alg.ell ** (n - 1)), Fraction(0)), (Fraction(0), Fraction(alg.ell ** (n - 1)))])
    d_inv = _k_span([elt_scale(Fraction(1, disc.d), elt_mul(disc, sqrt_d(disc), x)) for x in ((1, 0), (0, 1))])
    twist = _k_mul(disc, [tuple(Fraction(v) for v in elt_conj(disc, x)) for x in a.basis()], _ideal_inverse(a))
    return _k_mul(disc, _k_mul(disc, q_inv, r), _k_mul(disc, d_inv, twist))


def _check_lambda_for(alg: QuatAlg, lam: Elt, a: IdealLat) -> None:
    disc = alg.disc
    target, modulus = _lambda_modulus(alg)
    if (elt_norm(disc, lam) - target) % modulus:
        raise ValueError(f"N({lam}) is not {target} mod {modulus}")
    twist = _k_mul(disc, [tuple(Fraction(v) for v in elt_conj(disc, x)) for x in a.basis()], _ideal_inverse(a))
    for x in _k_mul(disc, [lam], _k_mul(disc, _ideal_inverse(alg.q_ideal), twist)):
        if not _in_order(disc, x):
            raise ValueError(f"lambda {lam} does not carry q^-1 conj(a) a^-1 into O")


def build_R(alg: QuatAlg, lam: Elt, a: Optional[IdealLat] = None, n: int = 1) -> QuatLat:
    """{[alpha, beta] : beta in the twisted inverse different, alpha - lambda*beta in O}."""
    if n < 1:
        raise ValueError("n must be at least 1")
    _check_ell(alg.disc, alg.ell)
    a = a or unit_ideal(alg.disc)
    if math.gcd(a.norm, alg.disc.f) != 1 or not a.invertible:
        raise ValueError(f"ideal {a} must be invertible and prime to the conductor")
    _check_lambda_for(alg, lam, a)
    disc = alg.disc
    gens = _embed([(1, 0), (0, 1)])
    for b in _beta_lattice(alg, a, n):
        gens.append(QuatElem(elt_mul(disc, lam, b), b))
    return make_lattice(alg, gens)


def build_R_tilde(alg: QuatAlg, a: Optional[IdealLat] = None) -> QuatLat:
    """{[alpha, beta] : alpha in O, beta in conj(a) a^-1}."""
    a = a or unit_ideal(alg.disc)
    disc = alg.disc
    zero = (Fraction(0), Fraction(0))
    twist = _k_mul(disc, [tuple(Fraction(v) for v in elt_conj(disc, x)) for x in a.basis()], _ideal_inverse(a))
    return make_lattice(alg, _embed([(1, 0), (0, 1)]) + [QuatElem(zero, b) for b in twist])


def scale_add_order(alg: QuatAlg, base: QuatLat, factor: Sequence[Elt]) -> QuatLat:
    """O + factor * base for a K-lattice ``factor`` acting on the left."""
    gens = _embed([(1, 0), (0, 1)])
    gens += [alg.mul(x, y) for x in _embed(factor) for y in base.basis()]
    return make_lattice(alg, gens)


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------
def _particular_solution(coeffs: Sequence[int], rhs: int) -> Optional[list[int]]:
    """Integer c with sum c_i * coeffs_i == rhs."""
    g, sol = 0, [0] * len(coeffs)
    for i, a in enumerate(coeffs):
        if a == 0:
            continue
        # extended gcd of g and a
        old_r, r = g, a
        old_s, s = 1, 0
        old_t, t = 0, 1
        while r:
            k = old_r // r
            old_r, r = r, old_r - k * r
            old_s, s = s, old_s - k * s
            old_t, t = t, old_t - k * t
        if old_r < 0:
            old_r, old_s, old_t = -old_r, -old_s, -old_t
        sol = [x * old_s for x in sol]
        sol[i] = old_t
        g = old_r
    if g == 0:
        return [0] * len(coeffs) if rhs == 0 else None
    if rhs % g:
        return None
    return [x * (rhs // g) for x in sol]


def _homogenised_gram(
    gram: list[list[Fraction]], shift: list[Fraction], bound: Fraction
) -> tuple[list[list[int]], Fraction]:
    """Integer Gram matrix of Q(y + z*shift) + (bound + 1)*z^2 and the matching radius.

    Points with this form below the radius have |z| <= 1, and those with
    z = +-1 cover every y with Q(y + shift) <= bound.
    """
    n = len(gram)
    den = math.lcm(*(s.denominator for s in shift))
    lifted = [s * den for s in shift]
    cross = [sum(gram[i][k] * lifted[k] for k in range(n)) / den for i in range(n)]
    corner = sum(cross[i] * lifted[i] for i in range(n)) / den + bound + 1
    full = [row[:] + [cross[i]] for i, row in enumerate(gram)] + [cross + [corner]]
    scale = math.lcm(*(v.denominator for row in full for v in row))
    return [[int(v * scale) for v in row] for row in full], (2 * bound + Fraction(3, 2)) * scale


def _short_points(gram: list[list[Fraction]], shift: list[Fraction], bound: Fraction) -> list[tuple[int, ...]]:
    """Integer y with Q(y + shift) <= bound, plus a few beyond it for the caller to filter."""
    matrix, radius = _homogenised_gram(gram, shift, bound)
    size = len(matrix)
    gso = GSO.Mat(IntegerMatrix.from_matrix(matrix), gram=True)
    gso.update_gso()

    count = min(64, config.ENUM_SOLUTION_CAP)
    while True:
        enum = Enumeration(gso, count, EvaluatorStrategy.BEST_N_SOLUTIONS)
        try:
            solutions = enum.enumerate(0, size, float(radius), 0)
        except EnumerationError:
            solutions = []
        if len(solutions) < count:
            break
        if count >= config.ENUM_SOLUTION_CAP:
            raise SearchExhausted(f"more than {count} lattice points within the norm bound")
        count *= 2

    points = set()
    for _, coords in solutions:
        coords = [int(round(c)) for c in coords]
        z = coords[-1]
        if abs(z) != 1:
            continue
        points.add(tuple(z * c for c in coords[:-1]))
    return sorted(points)


def enumerate_trace_norm(lat: QuatLat, tr: int, nm: Fraction | int) -> list[QuatElem]:
    """Every x in L with Trd(x) = tr and Nrd(x) = nm."""
    nm = Fraction(nm)
    if nm <= 0:
        raise ValueError("norm must be positive")
    alg = lat.alg
    basis = lat.basis()
    traces = [alg.trd(x) for x in basis]
    den = math.lcm(*(t.denominator for t in traces), Fraction(tr).denominator)
    scaled = [int(t * den) for t in traces]
    start = _particular_solution(scaled, int(Fraction(tr) * den))
    if start is None:
        return []
    target = nm - Fraction(tr) ** 2 / 4
    if target < 0:
        return []

    directions = []
    for rel in rational_kernel([[t] for t in scaled]):
        directions.append(QuatElem.from_vector([sum(c * row[k] for c, row in zip(rel, lat.rows)) for k in range(4)]))
    base = QuatElem.from_vector([sum(c * row[k] for c, row in zip(start, lat.rows)) for k in range(4)])
    # base - tr/2 lies in the trace-zero space, spanned over Q by the directions
    centred = base.to_vector()
    centred = (centred[0] - Fraction(tr, 2), *centred[1:])
    shift = coordinates([v.to_vector()[1:] for v in directions], list(centred[1:]))
    if shift is None:
        raise ArithmeticError("trace slice directions are degenerate")
    gram = [[alg.bilinear(u, v) for v in directions] for u in directions]

    found = []
    for y in _short_points(gram, shift, target):
        vector = list(base.to_vector())
        for c, v in zip(y, directions):
            vector = [a + c * b for a, b in zip(vector, v.to_vector())]
        x = QuatElem.from_vector(vector)
        if alg.trd(x) == tr and alg.nrd(x) == nm:
            found.append(x)
    return found


# ---------------------------------------------------------------------------
# Brute-force S_{n,m}
# ---------------------------------------------------------------------------
def twisted_trace(alg: QuatAlg, x: QuatElem) -> Fraction:
    """t = Trd(w * conj(x)) with w = (d + sqrt d) / 2 embedded diagonally."""
    disc = alg.disc
    return Fraction(elt_trace(disc, elt_mul(disc, (0, 1), elt_conj(disc, x.alpha))))


def is_optimal(lat: QuatLat, x: QuatElem, ell: int, f2: int) -> bool:
    """[(Q + Qx) cap L : Z + Zx] has no prime factor other than l."""
    for p in prime_divisors(f2):
        if p == ell:
            continue
        for k in range(p):
            shifted = QuatElem.from_vector([(a + (k if i == 0 else 0)) / p for i, a in enumerate(x.to_vector())])
            if lat.contains(shifted):
                return False
    return True


@dataclass(frozen=True)
class SnmCounts:
    d1: int
    d2: int
    ell: int
    n: int
    by_m: dict

    def count(self, m: int) -> int:
        return self.by_m.get(m, 0)

    def to_dict(self) -> dict:
        return {
            "d1": self.d1,
            "d2": self.d2,
            "ell": self.ell,
            "n": self.n,
            "counts": {str(m): c for m, c in sorted(self.by_m.items())},
        }


@lru_cache(maxsize=64)
def order_family(d1: Disc | int, ell: int, n: int) -> tuple[QuatAlg, tuple[QuatLat, ...]]:
    """R_n(a) for one representative a per class, as conjugates of R_n(O)."""
    disc = d1 if isinstance(d1, Disc) else make_disc(d1)
    alg = make_algebra(disc, ell)
    base = build_R(alg, find_lambda(alg), unit_ideal(disc), n)
    reps = class_representatives(disc, coprime_to=disc.f * ell * alg.q)
    return alg, tuple(conjugate_order(base, a) for _, a in sorted(reps.items()))


def count_Snm(d1: Disc | int, d2: Disc | int, ell: int, n: int) -> SnmCounts:
    """Brute-force counts of S_{n,m} for every m at once, summed over classes."""
    ctx = PairContext(
        d1 if isinstance(d1, Disc) else make_disc(d1),
        d2 if isinstance(d2, Disc) else make_disc(d2),
    )
    alg, orders = order_family(ctx.d1, ell, n)
    big_d = ctx.product
    norm = Fraction(ctx.d2.d * ctx.d2.d - ctx.d2.d, 4)
    tally: Counter = Counter()
    for order in orders:
        for x in enumerate_trace_norm(order, ctx.d2.d, norm):
            if not is_optimal(order, x, ell, ctx.d2.f):
                continue
            t = twisted_trace(alg, x)
            m = (big_d - (big_d - 2 * t) ** 2) / 4
            if m.denominator != 1 or m < 0:
                raise ArithmeticError(f"element {x} gives a non-integral m = {m}")
            tally[int(m)] += 1
    return SnmCounts(ctx.d1.d, ctx.d2.d, ell, n, dict(tally))


def brute_force_Snm(d1: Disc | int, d2: Disc | int, ell: int, m: int, n: int) -> int:
    return count_Snm(d1, d2, ell, n).count(m)
