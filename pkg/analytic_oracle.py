"""Ground truth for J(d1, d2) from the q-expansion of j.

The q-series coefficients are exact integers generated from E4 and E6 and
cached. Each evaluation carries one accumulated error radius (ball style),
and the product of differences is rounded to the nearest integer only once
the radius plus the rounding gap is below the configured threshold twice in
a row.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Union

import mpmath
from mpmath import mp, mpc, mpf

from config import config
from core_arith import Factorization, primes_up_to
from quadratic import Disc, QuadForm, make_disc, reduced_forms
from utils import ORACLE_PRECISION, ORACLE_SECONDS, format_rational

MIN_PRECISION = 64

# j-coefficient majorant c_n <= exp(4 pi sqrt n), valid for every n >= 1.
_MAJORANT = 4 * math.pi
_IM_TAU_FLOOR = math.sqrt(3) / 2 - 1e-12


class NonIntegral(RuntimeError):
    """The float product never settled on an integer within the precision schedule."""


class CofactorRemains(RuntimeError):
    """Trial division up to d1*d2/4 left a cofactor other than +-1."""


# ---------------------------------------------------------------------------
# Exact q-series
# ---------------------------------------------------------------------------
def _series_mul(a: list[int], b: list[int], n: int) -> list[int]:
    out = [0] * (n + 1)
    for i, x in enumerate(a[: n + 1]):
        if not x:
            continue
        for j, y in enumerate(b[: n + 1 - i]):
            out[i + j] += x * y
    return out


def _series_inverse(a: list[int], n: int) -> list[int]:
    """Inverse of a series with constant term 1, exact over Z."""
    if a[0] != 1:
        raise ValueError("series inverse needs a unit constant term")
    inv = [0] * (n + 1)
    inv[0] = 1
    for k in range(1, n + 1):
        inv[k] = -sum(a[i] * inv[k - i] for i in range(1, min(k, len(a) - 1) + 1))
    return inv


def _sigma(k: int, n: int) -> list[int]:
    out = [0] * (n + 1)
    for d in range(1, n + 1):
        power = d**k
        for multiple in range(d, n + 1, d):
            out[multiple] += power
    return out


def eisenstein_series(weight: int, n: int) -> list[int]:
    """E4 or E6 to order q^n."""
    if weight == 4:
        scale, k = 240, 3
    elif weight == 6:
        scale, k = -504, 5
    else:
        raise ValueError("only weights 4 and 6 are needed")
    sig = _sigma(k, n)
    return [1] + [scale * s for s in sig[1:]]


@lru_cache(maxsize=16)
def delta_over_q(n: int, route: str = "eisenstein") -> tuple[int, ...]:
    """Delta(q) / q to order q^n, either as (E4^3 - E6^2) / 1728 or as prod (1 - q^k)^24."""
    if route == "eisenstein":
        e4 = eisenstein_series(4, n + 1)
        e6 = eisenstein_series(6, n + 1)
        e4_cubed = _series_mul(_series_mul(e4, e4, n + 1), e4, n + 1)
        e6_squared = _series_mul(e6, e6, n + 1)
        diff = [x - y for x, y in zip(e4_cubed, e6_squared)]
        if diff[0] or any(c % 1728 for c in diff):
            raise ArithmeticError("E4^3 - E6^2 is not divisible by 1728")
        return tuple(c // 1728 for c in diff[1:])
    if route == "eta":
        euler = [0] * (n + 1)
        euler[0] = 1
        k = 1
        while k * (3 * k - 1) // 2 <= n:
            sign = -1 if k % 2 else 1
            for pentagonal in (k * (3 * k - 1) // 2, k * (3 * k + 1) // 2):
                if pentagonal <= n:
                    euler[pentagonal] = sign
            k += 1
        result = [1] + [0] * n
        power = euler
        exponent = 24
        while exponent:
            if exponent & 1:
                result = _series_mul(result, power, n)
            power = _series_mul(power, power, n)
            exponent >>= 1
        return tuple(result)
    raise ValueError(f"unknown route {route!r}")


@lru_cache(maxsize=16)
def j_coefficients(n: int, route: str = "eisenstein") -> tuple[int, ...]:
    """(c_0, ..., c_n) with j = 1/q + sum c_k q^k."""
    e4 = eisenstein_series(4, n + 1)
    e4_cubed = _series_mul(_series_mul(e4, e4, n + 1), e4, n + 1)
    jq = _series_mul(e4_cubed, _series_inverse(list(delta_over_q(n + 1, route)), n + 1), n + 1)
    if jq[0] != 1:
        raise ArithmeticError("j does not start with 1/q")
    return tuple(jq[1:])


def _coefficients_for(n: int) -> tuple[int, ...]:
    size = 64
    while size < n:
        size *= 2
    return j_coefficients(size)


# ---------------------------------------------------------------------------
# Balls
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class BigComplex:
    """re + i*im at ``prec`` mantissa bits, with an absolute error radius ``rad``."""

    re: mpf
    im: mpf
    prec: int
    rad: mpf = mpf(0)

    @classmethod
    def exact(cls, value: int | complex, prec: int) -> BigComplex:
        with mp.workprec(prec):
            z = mpc(value)
            return cls(z.real, z.imag, prec, mpf(0))

    @property
    def value(self) -> mpc:
        with mp.workprec(self.prec):
            return mpc(self.re, self.im)

    def _combine(self, other: BigComplex, op) -> BigComplex:
        prec = max(self.prec, other.prec)
        with mp.workprec(prec):
            a = mpc(self.re, self.im)
            b = mpc(other.re, other.im)
            z, rad = op(a, b, mpf(self.rad), mpf(other.rad))
            rad += abs(z) * mpmath.ldexp(1, 2 - prec)
            return BigComplex(z.real, z.imag, prec, rad)

    def __sub__(self, other: BigComplex) -> BigComplex:
        return self._combine(other, lambda a, b, ra, rb: (a - b, ra + rb))

    def __mul__(self, other: BigComplex) -> BigComplex:
        return self._combine(other, lambda a, b, ra, rb: (a * b, abs(a) * rb + abs(b) * ra + ra * rb))

    def nearest_integer(self) -> tuple[int, mpf]:
        """Closest integer to the centre and the distance |z - n|."""
        with mp.workprec(self.prec):
            n = int(mpmath.nint(self.re))
            return n, abs(mpc(self.re - n, self.im))


def _to_fraction(x: mpf) -> Fraction:
    if not x:
        return Fraction(0)
    man, exp = x.man_exp
    return Fraction(man) * Fraction(2) ** exp


# ---------------------------------------------------------------------------
# Heegner points and j
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class HeegnerPoint:
    form: QuadForm

    @property
    def d(self) -> int:
        return self.form.disc

    @property
    def imag(self) -> float:
        return math.sqrt(-self.d) / (2 * self.form.a)

    def tau(self, prec: int) -> BigComplex:
        a, b = self.form.a, self.form.b
        with mp.workprec(prec):
            z = mpc(mpf(-b), mpmath.sqrt(-self.d)) / (2 * a)
            return BigComplex(z.real, z.imag, prec, mpmath.ldexp(abs(z), 2 - prec))

    def q(self, prec: int) -> mpc:
        """exp(2 pi i tau) computed from the form, without forming tau first."""
        a, b = self.form.a, self.form.b
        with mp.workprec(prec):
            r = mpmath.exp(-mp.pi * mpmath.sqrt(-self.d) / a)
            theta = -mp.pi * b / a
            return mpc(r * mpmath.cos(theta), r * mpmath.sin(theta))

    def __str__(self) -> str:
        return f"({-self.form.b} + sqrt({self.d})) / {2 * self.form.a}"


def heegner_points(disc: Disc) -> list[HeegnerPoint]:
    return [HeegnerPoint(form) for form in reduced_forms(disc)]


def _truncation(imag: float, prec: int) -> int:
    """Smallest N >= 4 whose tail sum_{n > N} c_n |q|^n is below 2^-(prec + 10)."""
    target = -(prec + 10) * math.log(2)
    two_pi_y = 2 * math.pi * imag
    n = 4
    while True:
        k = n + 1
        log_term = _MAJORANT * math.sqrt(k) - two_pi_y * k
        log_ratio = _MAJORANT / (2 * math.sqrt(k)) - two_pi_y
        if log_ratio < 0 and log_term - math.log1p(-math.exp(log_ratio)) < target:
            return n
        n += 1


def j_invariant(tau: Union[HeegnerPoint, BigComplex], prec: int) -> BigComplex:
    """j(tau) with |returned - j(tau)| <= returned.rad < 2^(-prec)."""
    if prec < MIN_PRECISION:
        raise ValueError(f"precision must be at least {MIN_PRECISION} bits, got {prec}")
    if isinstance(tau, HeegnerPoint):
        imag = tau.imag
    else:
        imag = float(tau.im)
    if imag < _IM_TAU_FLOOR:
        raise ValueError(f"Im(tau) = {imag} is below sqrt(3)/2")

    n_terms = _truncation(imag * (1 - 1e-12), prec)
    coeffs = _coefficients_for(n_terms)[: n_terms + 1]

    with mp.workprec(64):
        abs_q = mpmath.exp(-2 * mp.pi * mpf(imag)) * (1 + mpmath.ldexp(1, -40))
        size = 1 / abs_q
        slope = 1 / abs_q
        power = mpf(1)
        for k, c in enumerate(coeffs):
            size += abs(c) * power
            slope += k * abs(c) * power
            power *= abs_q
        guard = int(mpmath.ceil(mpmath.log((4 * n_terms + 8) * (size + slope), 2))) + 12

    wp = prec + max(guard, 0)
    with mp.workprec(wp):
        if isinstance(tau, HeegnerPoint):
            q = tau.q(wp)
        else:
            q = mpmath.expjpi(2 * mpc(tau.re, tau.im))
        acc = mpc(coeffs[-1])
        for c in reversed(coeffs[:-1]):
            acc = acc * q + c
        z = acc + 1 / q
        rounding = (4 * n_terms + 8) * (size + slope) * mpmath.ldexp(1, -wp)
        tail = mpmath.ldexp(1, -(prec + 10))
        rad = rounding + tail
        if not isinstance(tau, HeegnerPoint) and tau.rad:
            rad += slope * abs_q * 2 * mp.pi * tau.rad
        return BigComplex(z.real, z.imag, wp, rad)


# ---------------------------------------------------------------------------
# J(d1, d2)
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class JProduct:
    value: int
    sign: int
    precision_used: int
    rounding_gap: Fraction

    def to_dict(self) -> dict:
        return {
            "value": str(self.value),
            "sign": self.sign,
            "precision_used": self.precision_used,
            "rounding_gap": format_rational(self.rounding_gap),
        }


def _as_disc(d: Union[Disc, int]) -> Disc:
    return d if isinstance(d, Disc) else make_disc(d)


def estimate_bits(d1: Disc, d2: Disc) -> int:
    """Upper estimate of log2 |J(d1, d2)| from the leading 1/q term."""
    sizes1 = [max(2 * math.pi * p.imag / math.log(2), 11.0) for p in heegner_points(d1)]
    sizes2 = [max(2 * math.pi * p.imag / math.log(2), 11.0) for p in heegner_points(d2)]
    return math.ceil(sum(max(a, b) + 2 for a in sizes1 for b in sizes2))


def _product_at(points1: list[HeegnerPoint], points2: list[HeegnerPoint], prec: int) -> BigComplex:
    values1 = [j_invariant(p, prec) for p in points1]
    values2 = [j_invariant(p, prec) for p in points2]
    total = BigComplex.exact(1, prec)
    for a in values1:
        for b in values2:
            total = total * (a - b)
    return total


def J_product(d1: Union[Disc, int], d2: Union[Disc, int], prec_bits: int | None = None) -> JProduct:
    """prod over Heegner points (j(tau1) - j(tau2)) as an exact integer."""
    d1, d2 = _as_disc(d1), _as_disc(d2)
    if d1.d == d2.d:
        raise ValueError("d1 and d2 must be distinct")
    points1, points2 = heegner_points(d1), heegner_points(d2)
    threshold = config.GZ_ROUNDING_GAP
    prec = prec_bits or config.GZ_PRECISION_BITS + estimate_bits(d1, d2)
    pair = [d1.d, d2.d]

    with ORACLE_SECONDS.time():
        for _ in range(config.ORACLE_MAX_DOUBLINGS + 1):
            accepted = []
            for bits in (prec, prec + config.GZ_PRECISION_STEP):
                ball = _product_at(points1, points2, bits)
                n, gap = ball.nearest_integer()
                if _to_fraction(gap + ball.rad) >= threshold:
                    break
                accepted.append((n, gap))
            if len(accepted) == 2 and accepted[0][0] == accepted[1][0]:
                n, gap = accepted[0]
                ORACLE_PRECISION.observe(prec)
                logging.info({"event": "oracle_converged", "pair": pair, "bits": prec, "digits": len(str(abs(n)))})
                return JProduct(n, -1 if n < 0 else 1, prec, _to_fraction(gap))
            logging.info({"event": "oracle_precision_raised", "pair": pair, "from": prec, "to": 2 * prec})
            prec *= 2
    raise NonIntegral(f"J{tuple(pair)} did not round to an integer within the precision schedule")


@lru_cache(maxsize=1024)
def _full_factor(d1: int, d2: int) -> Factorization:
    value = J_product(d1, d2).value
    if value == 0:
        raise NonIntegral(f"J({d1}, {d2}) rounded to 0")
    remaining = abs(value)
    factors = []
    for p in primes_up_to(d1 * d2 // 4):
        if remaining == 1:
            break
        e = 0
        while remaining % p == 0:
            remaining //= p
            e += 1
        if e:
            factors.append((p, e))
    if remaining != 1:
        raise CofactorRemains(f"J({d1}, {d2}) has cofactor {remaining} beyond d1*d2/4")
    return Factorization(-1 if value < 0 else 1, tuple(factors))


def full_factor_J(d1: Union[Disc, int], d2: Union[Disc, int]) -> Factorization:
    d1, d2 = _as_disc(d1), _as_disc(d2)
    if d1.d == d2.d:
        raise ValueError("d1 and d2 must be distinct")
    return _full_factor(d1.d, d2.d)


def v_J_oracle(d1: Union[Disc, int], d2: Union[Disc, int], ell: int) -> Fraction:
    """v_l(J^(8 / (w1 w2))) read off the exact factorisation."""
    d1, d2 = _as_disc(d1), _as_disc(d2)
    return Fraction(8, d1.w * d2.w) * full_factor_J(d1, d2).exponent(ell)
