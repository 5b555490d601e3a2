import math
import sys
from fractions import Fraction
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))


def test_j_coefficients_start_with_known_values():
    from analytic_oracle import j_coefficients

    assert j_coefficients(4)[:5] == (744, 196884, 21493760, 864299970, 20245856256)


def test_delta_routes_agree_exactly():
    from analytic_oracle import delta_over_q, j_coefficients

    eisenstein = delta_over_q(11, "eisenstein")
    eta = delta_over_q(11, "eta")
    assert eisenstein[:12] == eta[:12]
    assert eisenstein[:6] == (1, -24, 252, -1472, 4830, -6048)
    assert j_coefficients(11, "eisenstein") == j_coefficients(11, "eta")


def test_heegner_points_examples():
    from analytic_oracle import heegner_points
    from quadratic import make_disc

    (rho,) = heegner_points(make_disc(-3))
    assert math.isclose(rho.imag, math.sqrt(3) / 2)
    (i,) = heegner_points(make_disc(-4))
    assert (i.form.a, i.form.b) == (1, 0)
    imags = sorted(p.imag for p in heegner_points(make_disc(-23)))
    assert math.isclose(imags[0], math.sqrt(23) / 4)
    assert math.isclose(imags[1], math.sqrt(23) / 4)
    assert math.isclose(imags[2], math.sqrt(23) / 2)


def test_heegner_point_count_matches_class_number():
    from analytic_oracle import heegner_points
    from quadratic import class_number, make_disc

    for d in range(-300, -2):
        if d % 4 in (0, 1):
            disc = make_disc(d)
            points = heegner_points(disc)
            assert len(points) == class_number(disc)
            assert all(p.imag >= math.sqrt(3) / 2 - 1e-12 for p in points)


@pytest.mark.parametrize("d, expected", [(-3, 0), (-4, 1728), (-7, -3375), (-8, 8000), (-11, -32768)])
def test_j_invariant_at_class_number_one_points(d, expected):
    from analytic_oracle import heegner_points, j_invariant
    from quadratic import make_disc

    (point,) = heegner_points(make_disc(d))
    value = j_invariant(point, 128)
    n, gap = value.nearest_integer()
    assert n == expected
    assert float(gap) < 2**-40
    assert float(value.rad) < 2**-100


def test_j_invariant_rejects_low_precision():
    from analytic_oracle import heegner_points, j_invariant
    from quadratic import make_disc

    with pytest.raises(ValueError):
        j_invariant(heegner_points(make_disc(-4))[0], 32)


def test_j_invariant_accepts_a_ball_for_tau():
    from analytic_oracle import heegner_points, j_invariant
    from quadratic import make_disc

    (point,) = heegner_points(make_disc(-4))
    n, _ = j_invariant(point.tau(160), 128).nearest_integer()
    assert n == 1728


@pytest.mark.parametrize("d1, d2, expected", [(-3, -4, -1728), (-3, -7, 3375), (-4, -7, 5103)])
def test_j_product_examples(d1, d2, expected):
    from analytic_oracle import J_product

    result = J_product(d1, d2)
    assert result.value == expected
    assert result.sign == (1 if expected > 0 else -1)
    assert result.rounding_gap < Fraction(1, 4)


@pytest.mark.parametrize("d1, d2", [(-3, -12), (-7, -23), (-15, -20), (-4, -39), (-7, -847)])
def test_j_product_is_stable_under_more_precision(d1, d2):
    from analytic_oracle import J_product

    first = J_product(d1, d2)
    assert first.value != 0
    again = J_product(d1, d2, prec_bits=first.precision_used + 64)
    assert again.value == first.value


def test_j_product_raises_when_gap_never_closes(monkeypatch):
    from analytic_oracle import J_product, NonIntegral
    from config import config

    monkeypatch.setattr(config, "GZ_ROUNDING_GAP", Fraction(0))
    monkeypatch.setattr(config, "ORACLE_MAX_DOUBLINGS", 0)
    with pytest.raises(NonIntegral):
        J_product(-3, -4)


def test_j_product_rejects_equal_discriminants():
    from analytic_oracle import J_product

    with pytest.raises(ValueError):
        J_product(-7, -7)


def test_v_j_oracle_examples():
    from analytic_oracle import full_factor_J, v_J_oracle

    assert v_J_oracle(-3, -4, 2) == 2
    assert v_J_oracle(-3, -4, 3) == 1
    assert v_J_oracle(-3, -4, 5) == 0
    assert full_factor_J(-3, -4).to_dict() == {"sign": -1, "factors": [[2, 6], [3, 3]]}
    assert 11 in full_factor_J(-7, -847).primes()


@pytest.mark.parametrize("d1, d2", [(-3, -4), (-7, -8), (-15, -20), (-23, -31), (-3, -27), (-7, -847)])
def test_every_prime_of_j_divides_some_m(d1, d2):
    from analytic_oracle import full_factor_J
    from gz_valuation import PairContext, enumerate_x

    ms = [slot.m for slot in enumerate_x(PairContext.of(d1, d2)) if slot.m > 0]
    for p in full_factor_J(d1, d2).primes():
        assert any(m % p == 0 for m in ms), (d1, d2, p)


def _small_discriminants(bound):
    return [d for d in range(-bound, -2) if d % 4 in (0, 1)]


def test_closed_forms_match_the_oracle_on_small_pairs():
    from analytic_oracle import full_factor_J, v_J_oracle
    from gz_valuation import PROVED, PairContext, candidate_primes, v_J

    discs = _small_discriminants(28)
    for i, d1 in enumerate(discs):
        for d2 in discs[i + 1 :]:
            ctx = PairContext.of(d1, d2)
            primes = set(candidate_primes(ctx)) | set(full_factor_J(d1, d2).primes())
            for ell in sorted(primes):
                result = v_J(ctx, ell)
                if result.status == PROVED:
                    assert result.value == v_J_oracle(d1, d2, ell), (d1, d2, ell)


def test_conjecture_matches_the_oracle_for_coprime_conductors():
    from analytic_oracle import full_factor_J, v_J_oracle
    from gz_valuation import PairContext, candidate_primes, conjecture_v_J

    discs = _small_discriminants(28)
    for i, d1 in enumerate(discs):
        for d2 in discs[i + 1 :]:
            ctx = PairContext.of(d1, d2)
            if math.gcd(ctx.d1.f, ctx.d2.f) != 1:
                continue
            primes = set(candidate_primes(ctx)) | set(full_factor_J(d1, d2).primes())
            for ell in sorted(primes):
                assert conjecture_v_J(ctx, ell) == v_J_oracle(d1, d2, ell), (d1, d2, ell)


def test_j_product_serialises_value_as_text():
    from analytic_oracle import J_product

    payload = J_product(-3, -4).to_dict()
    assert payload["value"] == "-1728"
    assert payload["sign"] == -1
