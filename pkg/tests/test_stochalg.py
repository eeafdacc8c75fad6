import math
import random
from fractions import Fraction

import numpy as np
import pytest

from sbseries.stochalg import (
    HPoly,
    Interp,
    WordPoly,
    append_letter,
    expectation,
    format_wordpoly,
    ms_leading_order,
    parse_wordpoly,
    product,
    second_moment,
    strat_to_ito,
    time_integrate,
)

from oracles import eval_wordpoly_samples, simulate_words

F = Fraction
ITO = Interp.ITO
STRAT = Interp.STRATONOVICH


def w(interp, word, coeff=1):
    return WordPoly.from_word(word, interp, coeff)


def scalar(interp, k2, coeff=1):
    return WordPoly.from_scalar(HPoly.h_power(k2, coeff), interp)


def test_all_zero_words_normalize_to_h_scalars():
    p = WordPoly(ITO, {(0, 0, 0): HPoly.one()})
    assert p == scalar(ITO, 6, F(1, 6))
    assert p.words() == {()}


def test_hpoly_basics():
    a = HPoly({1: F(1, 2), 2: 1})
    b = HPoly({1: F(-1, 2)})
    assert (a + b) == HPoly({2: 1})
    assert (a * b).items() == [(2, F(-1, 4)), (3, F(-1, 2))]
    assert HPoly({3: 1}).min_exponent() == F(3, 2)
    assert HPoly().min_exponent() is None
    assert abs(HPoly({1: 1}).eval(0.25) - 0.5) < 1e-15


def test_append_letter_examples():
    assert append_letter(WordPoly.unit(ITO), 1) == w(ITO, (1,))
    assert append_letter(scalar(ITO, 2), 1) == w(ITO, (0, 1))
    assert append_letter(WordPoly.zero(ITO), 2) == WordPoly.zero(ITO)


def test_append_letter_distributes_scalars_over_words():
    # h * I[1] integrated against dW_1: s W(s) has word expansion (01)+(10)
    p = scalar(ITO, 2) * w(ITO, (1,))
    assert append_letter(w(ITO, (1,), coeff=1) * HPoly.h_power(2), 1) == (
        w(ITO, (0, 1, 1)) + w(ITO, (1, 0, 1)) + 2 * w(ITO, (1, 1, 1)) + w(ITO, (0, 0, 1))
    )
    del p


def test_append_letter_rejects_half_odd_scalars():
    with pytest.raises(ValueError):
        append_letter(scalar(ITO, 1), 1)
    with pytest.raises(ValueError):
        append_letter(WordPoly.unit(ITO), -1)


def test_time_integrate_examples():
    assert time_integrate(w(ITO, (1,)), 1) == w(ITO, (1, 0))
    assert time_integrate(WordPoly.unit(ITO), 3) == scalar(ITO, 6, F(1, 6))
    assert time_integrate(w(ITO, (1, 1)), 1) == w(ITO, (1, 1, 0))


def test_time_integrate_unit_gives_cauchy_scalars():
    for n in range(7):
        assert time_integrate(WordPoly.unit(ITO), n) == scalar(
            ITO, 2 * n, F(1, math.factorial(n))
        )


def test_time_integrate_half_power_scalar():
    # int_0^h s^(3/2) ds = (2/5) h^(5/2)
    assert time_integrate(scalar(ITO, 3), 1) == scalar(ITO, 5, F(2, 5))


def test_word_orientation_anchor():
    # int_0^h (h-s) dW_1(s) = I[1,0]: the kernel is one time integration
    # of I[1], and expanding h*I[1] - I[0,1] must give the same word.
    lhs = scalar(ITO, 2) * w(ITO, (1,)) - w(ITO, (0, 1))
    assert product(scalar(ITO, 2), w(ITO, (1,))) - w(ITO, (0, 1)) == w(ITO, (1, 0))
    assert time_integrate(w(ITO, (1,)), 1) == w(ITO, (1, 0))
    del lhs


def test_product_examples():
    assert product(w(ITO, (1,)), w(ITO, (1,))) == 2 * w(ITO, (1, 1)) + scalar(ITO, 2)
    assert product(w(STRAT, (1,)), w(STRAT, (1,))) == 2 * w(STRAT, (1, 1))
    p = 3 * w(ITO, (1, 0)) + scalar(ITO, 1)
    assert product(p, WordPoly.unit(ITO)) == p
    assert product(w(ITO, (1,)), scalar(ITO, 2)) == w(ITO, (0, 1)) + w(ITO, (1, 0))


def test_product_interpretation_mismatch():
    with pytest.raises(ValueError):
        product(w(ITO, (1,)), w(STRAT, (1,)))


def test_product_mean_of_cross_terms_with_time_letters():
    # E[I[1] I[1,0]] = h^2/2: words sharing Wiener letters but differing in
    # time letters are not orthogonal, which is why the orthogonality
    # property below is restricted to words without 0-letters.
    e = expectation(product(w(ITO, (1,)), w(ITO, (1, 0))))
    assert e == HPoly.h_power(4, F(1, 2))


def test_strat_to_ito_examples():
    assert strat_to_ito(w(STRAT, (1, 1))) == w(ITO, (1, 1)) + scalar(ITO, 2, F(1, 2))
    assert strat_to_ito(w(STRAT, (1, 0))) == w(ITO, (1, 0))
    assert strat_to_ito(w(STRAT, (1,))) == w(ITO, (1,))
    assert strat_to_ito(w(STRAT, (1, 1, 1))) == (
        w(ITO, (1, 1, 1)) + F(1, 2) * w(ITO, (0, 1)) + F(1, 2) * w(ITO, (1, 0))
    )
    # deterministic inner integrand: correction uses the running time integral
    assert strat_to_ito(w(STRAT, (0, 1, 1))) == w(ITO, (0, 1, 1)) + scalar(
        ITO, 4, F(1, 4)
    )
    with pytest.raises(ValueError):
        strat_to_ito(w(ITO, (1,)))


def test_expectation_examples():
    assert expectation(w(ITO, (1,))) == HPoly.zero()
    assert expectation(w(STRAT, (1, 1))) == HPoly.h_power(2, F(1, 2))
    assert expectation(scalar(ITO, 4, F(1, 2))) == HPoly.h_power(4, F(1, 2))
    assert expectation(w(ITO, (1, 0))) == HPoly.zero()


def test_second_moment_examples():
    assert second_moment(w(ITO, (1,))) == HPoly.h_power(2)
    assert second_moment(WordPoly.zero(ITO)) == HPoly.zero()
    assert second_moment(w(ITO, (1,)) * HPoly.h_power(1)) == HPoly.h_power(4)
    assert second_moment(w(ITO, (1, 0))) == HPoly.h_power(6, F(1, 3))
    assert second_moment(w(STRAT, (1, 1))) == HPoly.h_power(4, F(1, 2))


def test_ms_leading_order_examples():
    assert ms_leading_order(w(ITO, (1,))) == F(1, 2)
    assert ms_leading_order(w(ITO, (1, 0))) == F(3, 2)
    assert ms_leading_order(WordPoly.zero(ITO)) == math.inf
    # zero in law but not syntactically: h I[1] - I[0,1] - I[1,0]
    p = scalar(ITO, 2) * w(ITO, (1,)) - w(ITO, (0, 1)) - w(ITO, (1, 0))
    assert ms_leading_order(p) == math.inf


def _random_word(rng, max_len=4, noises=2):
    n = rng.randint(1, max_len)
    return tuple(rng.randint(0, noises) for _ in range(n))


@pytest.mark.parametrize("interp", [ITO, STRAT])
def test_product_commutative_associative(interp):
    rng = random.Random(2024)
    for _ in range(60):
        a = w(interp, _random_word(rng))
        b = w(interp, _random_word(rng))
        c = w(interp, _random_word(rng))
        assert product(a, b) == product(b, a)
        assert product(product(a, b), c) == product(a, product(b, c))


def test_strat_to_ito_is_algebra_morphism():
    rng = random.Random(99)
    for _ in range(40):
        a = w(STRAT, _random_word(rng, 3))
        b = w(STRAT, _random_word(rng, 3))
        lhs = strat_to_ito(product(a, b))
        rhs = product(strat_to_ito(a), strat_to_ito(b))
        assert lhs == rhs


def test_distinct_word_orthogonality_without_time_letters():
    # Ito iterated integrals with purely Wiener letters are orthogonal
    words = []
    for n in range(1, 4):
        stack = [()]
        for _ in range(n):
            stack = [u + (l,) for u in stack for l in (1, 2)]
        words.extend(stack)
    for v in words:
        for u in words:
            if u == v:
                continue
            assert expectation(product(w(ITO, v), w(ITO, u))) == HPoly.zero()


def test_monte_carlo_oracle_small():
    polys = [
        w(ITO, (1, 1)) + 2 * w(ITO, (0, 1)),
        w(STRAT, (1, 1)),
        scalar(ITO, 1) * w(ITO, (2,)) + w(ITO, (1, 2)),
    ]
    n_paths = 40000
    for i, p in enumerate(polys):
        words = [word for word in p.words() if word]
        samples = simulate_words(
            words, p.interp.value, h=1.0, n_sub=256, n_paths=n_paths,
            seed=500 + i, noises=2,
        )
        vals = eval_wordpoly_samples(p, samples, h=1.0)
        est_mean = vals.mean()
        se_mean = vals.std(ddof=1) / math.sqrt(n_paths)
        assert abs(est_mean - expectation(p).eval(1.0)) <= 4 * se_mean + 1e-12
        sq = vals**2
        est_m2 = sq.mean()
        se_m2 = sq.std(ddof=1) / math.sqrt(n_paths)
        assert abs(est_m2 - second_moment(p).eval(1.0)) <= 4 * se_m2 + 1e-12


def test_format_examples():
    p = F(3, 2) * (w(ITO, (1, 1, 0)) * HPoly.h_power(1))
    assert format_wordpoly(p) == "3/2 * h^(1/2) * I[1,1,0]"
    assert format_wordpoly(WordPoly.zero(ITO)) == "0"
    assert format_wordpoly(WordPoly.unit(ITO)) == "1"
    assert format_wordpoly(scalar(ITO, 2)) == "h"
    assert format_wordpoly(w(ITO, (1,)) - w(ITO, (1, 1)) * HPoly.h_power(-1)) == (
        "I[1] - h^(-1/2) * I[1,1]"
    )
    assert format_wordpoly(scalar(ITO, 4, F(1, 2)) + w(ITO, (0, 1), -1)) == (
        "1/2 * h^2 - I[0,1]"
    )


def test_parse_round_trip():
    rng = random.Random(31)
    for _ in range(40):
        terms = {}
        for _ in range(rng.randint(1, 4)):
            word = _random_word(rng, 3) if rng.random() < 0.8 else ()
            k2 = rng.randint(-2, 4)
            coeff = F(rng.choice([-3, -2, -1, 1, 2, 3]), rng.choice([1, 2, 3]))
            terms[word] = terms.get(word, HPoly.zero()) + HPoly.h_power(k2, coeff)
        p = WordPoly(ITO, terms)
        assert parse_wordpoly(format_wordpoly(p), ITO) == p


def test_parse_accepts_spaced_and_compact_forms():
    a = parse_wordpoly("I[1] - h^(-1/2)*I[1,1]", ITO)
    b = parse_wordpoly("I[1] - h^(-1/2) * I[1,1]", ITO)
    assert a == b
    assert parse_wordpoly("1", ITO) == WordPoly.unit(ITO)
    assert parse_wordpoly("h^2", ITO) == scalar(ITO, 4)
    assert parse_wordpoly("2/3 * h", ITO) == scalar(ITO, 2, F(2, 3))


def test_parse_errors_carry_positions():
    with pytest.raises(ValueError, match="position"):
        parse_wordpoly("I[1] + * I[2]", ITO)
    with pytest.raises(ValueError, match="position"):
        parse_wordpoly("I[1,]", ITO)
    with pytest.raises(ValueError, match="position"):
        parse_wordpoly("h^(1/3) * I[1]", ITO)
    with pytest.raises(ValueError):
        parse_wordpoly("", ITO)
    with pytest.raises(ValueError, match="position"):
        parse_wordpoly("I[1] I[2]", ITO)
