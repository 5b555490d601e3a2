import sys
from fractions import Fraction
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))


def test_make_disc_extracts_conductor_and_units():
    from quadratic import make_disc

    assert make_disc(-3).to_dict() == {"d": -3, "f": 1, "d_fund": -3, "w": 6}
    assert make_disc(-4).w == 4
    twelve = make_disc(-12)
    assert (twelve.f, twelve.d_fund, twelve.w) == (2, -3, 2)
    seven = make_disc(-847)
    assert (seven.f, seven.d_fund) == (11, -7)
    assert make_disc(-16).d_fund == -4
    assert make_disc(-32).f == 2


@pytest.mark.parametrize("d", [5, 0, -5, -2, -1])
def test_make_disc_rejects_invalid_values(d):
    from quadratic import make_disc

    with pytest.raises(ValueError):
        make_disc(d)


def test_disc_depleted_removes_ell_part_of_conductor():
    from quadratic import make_disc

    disc = make_disc(-3 * 36)
    assert disc.s(2) == 1
    assert disc.depleted(2) == -27
    assert disc.depleted(3) == -12


def test_reduced_forms_examples():
    from quadratic import QuadForm, class_number, make_disc, reduced_forms

    assert reduced_forms(make_disc(-3)) == [QuadForm(1, 1, 1)]
    assert reduced_forms(make_disc(-23)) == [QuadForm(1, 1, 6), QuadForm(2, 1, 3), QuadForm(2, -1, 3)]
    assert class_number(make_disc(-15)) == 2
    assert class_number(make_disc(-4 * 5 * 5)) == 2
    assert class_number(make_disc(-3 * 49)) == 2


def test_element_norm_is_multiplicative():
    from quadratic import elt_conj, elt_mul, elt_norm, elt_trace, make_disc

    disc = make_disc(-23)
    x, y = (3, -2), (Fraction(1, 2), 5)
    assert elt_norm(disc, elt_mul(disc, x, y)) == elt_norm(disc, x) * elt_norm(disc, y)
    assert elt_mul(disc, x, elt_conj(disc, x)) == (elt_norm(disc, x), 0)
    assert elt_trace(disc, (0, 1)) == -23


def test_ideals_of_norm_matches_splitting():
    from quadratic import ideals_of_norm, make_disc, unit_ideal

    minus7 = make_disc(-7)
    assert ideals_of_norm(minus7, 1) == [unit_ideal(minus7)]
    assert len([a for a in ideals_of_norm(make_disc(-15), 2) if a.invertible]) == 2
    assert len([a for a in ideals_of_norm(minus7, 4) if a.invertible]) == 3
    assert ideals_of_norm(make_disc(-23), 5) == []


def test_non_invertible_ideal_when_norm_meets_conductor():
    from quadratic import ideals_of_norm, make_disc

    disc = make_disc(-12)
    # the conductor ideal 2 O_{-3} = [2, 1 + w] has index 2 in O_{-12}
    (conductor_ideal,) = ideals_of_norm(disc, 2)
    assert (conductor_ideal.n, conductor_ideal.u, conductor_ideal.c) == (2, 1, 1)
    assert conductor_ideal.invertible is False
    assert [(a.n, a.u, a.c, a.invertible) for a in ideals_of_norm(disc, 4)] == [(2, 0, 2, True)]


def test_ideal_identities():
    from quadratic import (
        different,
        ideal_conj,
        ideal_mul,
        ideal_norm,
        ideals_of_norm,
        make_disc,
        principal_ideal,
        unit_ideal,
    )

    disc = make_disc(-23)
    p2 = ideals_of_norm(disc, 2)[0]
    assert ideal_mul(unit_ideal(disc), p2) == p2
    assert ideal_norm(different(disc)) == 23
    assert ideal_mul(p2, ideal_conj(p2)) == principal_ideal(disc, (2, 0))
    assert ideal_norm(ideal_mul(p2, p2)) == 4


def test_class_of_prime_above_two_for_d_minus_23():
    from quadratic import QuadForm, class_of, ideals_of_norm, make_disc

    disc = make_disc(-23)
    classes = {class_of(a) for a in ideals_of_norm(disc, 2)}
    assert classes == {QuadForm(2, 1, 3), QuadForm(2, -1, 3)}


def test_class_of_rejects_non_invertible_ideal():
    from quadratic import class_of, ideals_of_norm, make_disc

    disc = make_disc(-12)
    (bad,) = ideals_of_norm(disc, 2)
    with pytest.raises(ValueError):
        class_of(bad)


@pytest.mark.parametrize("d", [-23, -47, -56, -84, -96, -108, -135, -164, -300])
def test_class_number_matches_invertible_ideal_classes(d):
    from quadratic import class_number, class_of, ideals_of_norm, make_disc

    disc = make_disc(d)
    seen = set()
    for norm in range(1, abs(d) + 1):
        for a in ideals_of_norm(disc, norm):
            if a.invertible:
                seen.add(class_of(a))
    assert len(seen) == class_number(disc)


def test_class_group_table_is_a_group():
    from quadratic import class_group, make_disc

    group = class_group(make_disc(-47))
    assert group.order == 5
    assert group.two_rank == 0
    assert all(group.element_order(i) in (1, 5) for i in range(5))
    assert sorted(group.table[0]) == list(range(5))

    klein = class_group(make_disc(-420))
    assert klein.order == 8
    assert klein.two_rank == 3


def test_primary_decompose_of_six():
    from quadratic import ideal_mul, make_disc, primary_decompose, principal_ideal, unit_ideal

    disc = make_disc(-23)
    assert primary_decompose(unit_ideal(disc)) == []
    six = principal_ideal(disc, (6, 0))
    parts = primary_decompose(six)
    assert [(p, part.norm) for p, part in parts] == [(2, 4), (3, 9)]
    assert ideal_mul(parts[0][1], parts[1][1]) == six


def test_primary_decompose_of_prime_is_itself():
    from quadratic import ideals_of_norm, make_disc, primary_decompose

    prime = ideals_of_norm(make_disc(-15), 2)[0]
    assert primary_decompose(prime) == [(2, prime)]


def test_count_a_examples():
    from quadratic import count_A, make_disc

    minus7 = make_disc(-7)
    assert count_A(minus7, 1, 3, Fraction(3, 2)) == 0
    assert count_A(minus7, 1, 3, 0) == 0
    assert count_A(minus7, 1, 3, 4) == 3
    assert count_A(minus7, 2, 3, 4) == 2


@pytest.mark.parametrize("d1", [-3, -4, -7, -8, -15, -20, -23, -24, -35, -39, -40, -84, -120])
@pytest.mark.parametrize("f2", [1, 2, 3, 5, 6])
def test_count_a_fast_path_matches_enumeration(d1, f2):
    from quadratic import count_A, make_disc

    disc = make_disc(d1)
    for ell in (2, 3, 5):
        for norm in range(1, 41):
            assert count_A(disc, f2, ell, norm) == count_A(disc, f2, ell, norm, brute=True), (d1, f2, ell, norm)


def test_compose_through_ideals_is_associative():
    from quadratic import compose, make_disc, reduced_forms

    disc = make_disc(-71)
    forms = reduced_forms(disc)
    for f in forms:
        for g in forms:
            for h in forms:
                assert compose(disc, compose(disc, f, g), h) == compose(disc, f, compose(disc, g, h))
