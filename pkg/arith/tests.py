import functools
import math
from fractions import Fraction

from django.test import SimpleTestCase

from arith.exact import (
    PartsExceedTotal,
    ZeroInput,
    ZeroSum,
    multinomial,
    prime_valuation,
    rational_sum_of_reciprocal_products,
    squarefree_part,
    two_adic_valuation,
)
from arith.quadratic import QuadraticEigenvalue


@functools.lru_cache(maxsize=None)
def _multinomial_recursive(n, a, b):
    """Pascal-style recursion over the three part counts, used as an oracle."""
    if min(a, b, n - a - b) < 0:
        return 0
    if n == 0:
        return 1
    return (
        _multinomial_recursive(n - 1, a - 1, b)
        + _multinomial_recursive(n - 1, a, b - 1)
        + _multinomial_recursive(n - 1, a, b)
    )


class ReciprocalProductTests(SimpleTestCase):
    def test_two_term_sum(self):
        self.assertEqual(rational_sum_of_reciprocal_products([0, 1]), Fraction(-1, 2))

    def test_consecutive_four(self):
        self.assertEqual(rational_sum_of_reciprocal_products([0, 1, 2, 3]), Fraction(-3, 4))

    def test_gapped_set(self):
        self.assertEqual(rational_sum_of_reciprocal_products([0, 1, 4, 5]), Fraction(-15, 4))

    def test_order_does_not_matter(self):
        self.assertEqual(
            rational_sum_of_reciprocal_products([5, 0, 4, 1]),
            rational_sum_of_reciprocal_products([0, 1, 4, 5]),
        )

    def test_consecutive_runs_follow_closed_form(self):
        for top in range(1, 9):
            expected = Fraction((-1) ** top * math.factorial(top), 2 ** top)
            self.assertEqual(rational_sum_of_reciprocal_products(range(top + 1)), expected)

    def test_zero_sum_is_rejected(self):
        with self.assertRaises(ZeroSum):
            rational_sum_of_reciprocal_products([0, 2])

    def test_repeated_entries_rejected(self):
        with self.assertRaises(ValueError):
            rational_sum_of_reciprocal_products([1, 1, 2])


class ValuationTests(SimpleTestCase):
    def test_integer(self):
        self.assertEqual(two_adic_valuation(8), 3)

    def test_denominator_power(self):
        self.assertEqual(two_adic_valuation(Fraction(-3, 4)), -2)

    def test_reduced_before_counting(self):
        self.assertEqual(two_adic_valuation(Fraction(6, 10)), 0)

    def test_other_prime(self):
        self.assertEqual(prime_valuation(Fraction(18, 5), 3), 2)
        self.assertEqual(prime_valuation(Fraction(18, 25), 5), -2)

    def test_zero_input(self):
        with self.assertRaises(ZeroInput):
            two_adic_valuation(0)


class MultinomialTests(SimpleTestCase):
    def test_grid_node_occupancy(self):
        self.assertEqual(multinomial(5, (1, 1)), 20)

    def test_corner(self):
        self.assertEqual(multinomial(8, (0, 0)), 1)

    def test_large_entry(self):
        self.assertEqual(multinomial(16, (5, 5)), 2018016)
        self.assertEqual(multinomial(16, (5, 5)), 286 * 84 ** 2)

    def test_factorial_beyond_64_bits(self):
        self.assertEqual(multinomial(32, (16,)), math.comb(32, 16))
        self.assertGreater(math.factorial(32), 2 ** 64)

    def test_parts_exceed_total(self):
        with self.assertRaises(PartsExceedTotal):
            multinomial(3, (2, 2))

    def test_matches_pascal_recursion(self):
        for n in range(0, 17):
            for a in range(0, n + 1):
                for b in range(0, n - a + 1):
                    self.assertEqual(multinomial(n, (a, b)), _multinomial_recursive(n, a, b))


class RationalHelpersTests(SimpleTestCase):
    def test_round_trip(self):
        a, c = Fraction(7, 12), Fraction(-5, 18)
        self.assertEqual((a + c) - c, a)

    def test_squarefree_part(self):
        self.assertEqual(squarefree_part(8), (2, 2))
        self.assertEqual(squarefree_part(12), (3, 2))
        self.assertEqual(squarefree_part(1), (1, 1))
        self.assertEqual(squarefree_part(2 ** 15 * 9), (2, 2 ** 7 * 3))

    def test_squarefree_part_rejects_nonpositive(self):
        with self.assertRaises(ValueError):
            squarefree_part(0)


class QuadraticEigenvalueTests(SimpleTestCase):
    def test_value(self):
        self.assertAlmostEqual(QuadraticEigenvalue(0, 2, 2).value, math.sqrt(2))
        self.assertEqual(QuadraticEigenvalue(0, -4, 4).value, -4.0)

    def test_gap(self):
        low = QuadraticEigenvalue(0, -4, 4)
        high = QuadraticEigenvalue(0, 2, 4)
        self.assertEqual(low.gap_to(high), 3)

    def test_invalid_delta(self):
        with self.assertRaises(ValueError):
            QuadraticEigenvalue(0, 1, 0)

    def test_str(self):
        self.assertEqual(str(QuadraticEigenvalue(1, -3, 2)), "(1-3*sqrt(2))/2")
