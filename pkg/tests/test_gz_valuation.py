import sys
from fractions import Fraction
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))


def _ctx(d1, d2):
    from gz_valuation import PairContext

    return PairContext.of(d1, d2)


def test_pair_context_rejects_equal_discriminants():
    from gz_valuation import PairContext

    with pytest.raises(ValueError):
        PairContext.of(-7, -7)


def test_enumerate_x_lists_slots_with_multiplicity():
    from gz_valuation import XSlot, enumerate_x

    assert enumerate_x(_ctx(-3, -4)) == [XSlot(0, 3, 1, 1), XSlot(2, 2, 2, 2)]
    slots = enumerate_x(_ctx(-7, -847))
    assert slots[-1].x == 77 and slots[-1].m == 0 and slots[-1].mult == 2
    assert all(slot.m >= 0 for slot in slots)


def test_support_prime_examples():
    from gz_valuation import support_prime

    ctx = _ctx(-231, -1155)
    assert support_prime(ctx, 3**2 * 11**2 * 61) == 3
    assert support_prime(ctx, 3**2 * 11**2 * 59) == 11
    assert support_prime(_ctx(-7, -847), 0) == 11
    assert support_prime(_ctx(-847, -7), 0) == 11
    assert support_prime(_ctx(-12, -27), 0) is None
    assert support_prime(_ctx(-3, -4), 3) == 3
    assert support_prime(_ctx(-3, -4), 2) == 2


def test_rho_examples():
    from gz_valuation import rho

    assert rho(_ctx(-20, -3), 2, 10) == 0
    assert rho(_ctx(-231, -1155), 3, 3**2 * 11**2 * 61) == 4
    assert rho(_ctx(-7, -3), 3, 2) == 1


def test_epsilon_ell_examples():
    from gz_valuation import epsilon_ell
    from quadratic import make_disc

    assert epsilon_ell(make_disc(-7), 3, Fraction(3, 2)) == 0
    assert epsilon_ell(make_disc(-4), 2, 6) == 2
    assert epsilon_ell(make_disc(-7), 3, 3) == 0
    assert epsilon_ell(make_disc(-7), 3, 9) == 1
    assert epsilon_ell(make_disc(-7), 3, 0) == 0
    assert epsilon_ell(make_disc(-7), 3, -9) == 0
    assert epsilon_ell(make_disc(-4), 2, -6) == 0


def test_h_term_examples():
    from gz_valuation import H_term

    assert H_term(_ctx(-7, -847), 11) == 1
    assert H_term(_ctx(-3, -12), 2) == Fraction(1, 3)
    assert H_term(_ctx(-12, -3), 2) == Fraction(1, 3)
    assert H_term(_ctx(-3, -4), 2) == 0
    assert H_term(_ctx(-3, -12), 3) == 0


def test_v_f_examples():
    from gz_valuation import PROVED, v_F

    assert v_F(_ctx(-3, -12), 2, 0).value == Fraction(1, 3)
    result = v_F(_ctx(-3, -4), 2, 2)
    assert result.value == 1 and result.status == PROVED
    # l divides f2: one factor of l is removed from m
    assert v_F(_ctx(-3, -12), 2, 8).value == 1


def test_v_f_raises_when_hypotheses_fail():
    from gz_valuation import HypothesisViolated, v_F

    with pytest.raises(HypothesisViolated):
        v_F(_ctx(-12, -3), 2, 8)
    with pytest.raises(HypothesisViolated):
        v_F(_ctx(-27, -3), 5, 18)


def test_v_f_is_zero_off_the_support():
    from gz_valuation import enumerate_x, support_prime, v_F

    for d1, d2 in [(-3, -4), (-7, -8), (-15, -20), (-23, -31), (-3, -27)]:
        ctx = _ctx(d1, d2)
        for slot in enumerate_x(ctx):
            if slot.m == 0:
                continue
            for ell in (2, 3, 5, 7, 11, 13):
                if ctx.d1.f % ell == 0:
                    continue
                if support_prime(ctx, slot.m) != ell:
                    assert v_F(ctx, ell, slot.m).value == 0


def test_v_f_is_conjectural_when_two_ramifies_twice():
    from gz_valuation import CONJECTURAL, v_F

    assert v_F(_ctx(-4, -8), 2, 1).status == CONJECTURAL


@pytest.mark.parametrize(
    "d1, d2, ell, expected",
    [
        (-3, -4, 2, Fraction(2)),
        (-3, -4, 3, Fraction(1)),
        (-3, -12, 2, Fraction(8, 3)),
        (-3, -12, 3, Fraction(2)),
        (-3, -12, 5, Fraction(2)),
        (-3, -27, 2, Fraction(10)),
        (-3, -27, 3, Fraction(2, 3)),
        (-3, -27, 5, Fraction(2)),
        (-4, -7, 7, Fraction(1)),
        (-4, -7, 3, Fraction(6)),
    ],
)
def test_v_j_matches_known_factorisations(d1, d2, ell, expected):
    from gz_valuation import PROVED, v_J

    result = v_J(_ctx(d1, d2), ell)
    assert result.value == expected
    assert result.status == PROVED


def test_v_j_counts_the_square_ratio_slot_twice():
    from gz_valuation import v_J

    result = v_J(_ctx(-7, -847), 11)
    assert result.h_term == 1
    assert result.value >= 2


def test_v_j_swaps_orientation_when_l_divides_first_conductor():
    from gz_valuation import v_J

    assert v_J(_ctx(-12, -3), 2).value == Fraction(8, 3)
    assert v_J(_ctx(-27, -3), 3).value == Fraction(2, 3)


def test_v_j_is_conjectural_at_two_when_first_order_is_not_maximal():
    from gz_valuation import CONJECTURAL, PROVED, v_J

    result = v_J(_ctx(-27, -4), 2)
    assert result.status == CONJECTURAL
    (term,) = [term for term in result.terms if term.m == 2]
    assert term.support == 2
    assert term.status == CONJECTURAL
    assert v_J(_ctx(-4, -27), 2).status == PROVED


def test_v_j_reports_oracle_only_when_no_orientation_applies():
    from gz_valuation import ORACLE_ONLY, v_J

    result = v_J(_ctx(-12, -48), 2)
    assert (result.value is None) == (result.status == ORACLE_ONLY)


def test_gz_classic_f_examples():
    from gz_valuation import gz_classic_F

    ctx = _ctx(-3, -4)
    assert gz_classic_F(ctx, 1).factors == ()
    assert gz_classic_F(ctx, 2).factors == ((2, 1),)
    assert gz_classic_F(ctx, 3).factors == ((3, 1),)


def test_gz_classic_f_rejects_shared_primes():
    from gz_valuation import EpsilonUndefined, gz_classic_F

    with pytest.raises(EpsilonUndefined):
        gz_classic_F(_ctx(-3, -15), 3)


@pytest.mark.parametrize("d1, d2", [(-3, -4), (-3, -8), (-4, -7), (-7, -8), (-8, -15), (-7, -23), (-11, -19), (-15, -23)])
def test_classical_product_agrees_with_ideal_counts(d1, d2):
    from gz_valuation import candidate_primes, classic_v_J, enumerate_x, gz_classic_F, v_J

    ctx = _ctx(d1, d2)
    primes = set(candidate_primes(ctx))
    for slot in enumerate_x(ctx):
        if slot.m:
            fact = gz_classic_F(ctx, slot.m)
            assert len(fact.factors) <= 1
            primes.update(fact.primes())
    for ell in sorted(primes):
        assert classic_v_J(ctx, ell) == v_J(ctx, ell).value, (d1, d2, ell)


@pytest.mark.parametrize("d1", [-3, -4, -7, -8, -11, -15, -19, -20, -23, -24])
@pytest.mark.parametrize("d2", [-12, -16, -27, -28, -35, -40, -43, -44, -51, -52])
def test_local_factors_product_matches_rho_times_count(d1, d2):
    from core_arith import kronecker
    from gz_valuation import enumerate_x, local_factors_product, rho, support_prime
    from quadratic import count_A

    ctx = _ctx(d1, d2)
    if ctx.d1.d == ctx.d2.d:
        return
    for slot in enumerate_x(ctx):
        if slot.m == 0:
            continue
        ell = support_prime(ctx, slot.m)
        if ell is None or kronecker(ctx.d1.d, ell) == 1 or ctx.d1.f % ell == 0:
            continue
        for r in (1, 2, 3):
            lhs = rho(ctx, ell, slot.m) * count_A(ctx.d1, ctx.d2.f, ell, Fraction(slot.m, ell**r))
            assert lhs == local_factors_product(ctx, ell, slot.m, r), (d1, d2, slot.m, ell, r)


def test_local_factors_product_vanishes_for_fractional_norm():
    from gz_valuation import local_factors_product

    assert local_factors_product(_ctx(-7, -3), 3, 18, 1) == 0
    assert local_factors_product(_ctx(-7, -3), 3, 2, 1) == 0


def test_weighted_snm_uses_c_and_units():
    from gz_valuation import weighted_Snm

    # m = 3 is the x = 0 slot of (-3, -4): C = 1, w1 = 6, rho = 2, A(1) = 1
    assert weighted_Snm(_ctx(-3, -4), 3, 3, 1) == 6
    # m = 2, x = 2: C = 2, w1 = 6, rho = 1, A(2 / 2) = 1
    assert weighted_Snm(_ctx(-3, -4), 2, 2, 1) == 6


@pytest.mark.parametrize(
    "d1, d2, ell, expected",
    [
        (-3, -4, 2, Fraction(2)),
        (-3, -4, 3, Fraction(1)),
        (-3, -12, 2, Fraction(8, 3)),
        (-3, -12, 3, Fraction(2)),
        (-3, -12, 5, Fraction(2)),
        (-3, -27, 2, Fraction(10)),
        (-3, -27, 3, Fraction(2, 3)),
        (-3, -27, 5, Fraction(2)),
    ],
)
def test_conjecture_matches_known_factorisations(d1, d2, ell, expected):
    from gz_valuation import conjecture_v_J

    assert conjecture_v_J(_ctx(d1, d2), ell) == expected


def test_conjecture_requires_coprime_conductors():
    from gz_valuation import HypothesisViolated, conjecture_v_J

    with pytest.raises(HypothesisViolated):
        conjecture_v_J(_ctx(-12, -16), 2)


def test_valuation_result_serialises_rationals():
    from gz_valuation import v_J

    payload = v_J(_ctx(-3, -12), 2).to_dict()
    assert payload["value"] == "8/3"
    assert payload["status"] == "proved"
    assert payload["h_term"] == "1/3"
    assert {term["m"] for term in payload["terms"]} == {0, 8}
