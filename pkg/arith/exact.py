"""
Exact integer and rational helpers shared by every other app.

Python ints are arbitrary precision and ``fractions.Fraction`` keeps
numerator/denominator in lowest terms with a positive denominator, so they
serve directly as the workbench's BigInt and Rational types.
"""
import math
from fractions import Fraction

from sympy import factorint


class ArithmeticDomainError(Exception):
    """Base error for exact arithmetic operations."""


class ZeroSum(ArithmeticDomainError):
    """Raised when the reciprocal-product sum vanishes and R is undefined."""


class ZeroInput(ArithmeticDomainError):
    """Raised when a valuation of zero is requested."""


class PartsExceedTotal(ArithmeticDomainError):
    """Raised when multinomial parts add up to more than n."""


def rational_sum_of_reciprocal_products(lambdas) -> Fraction:
    """
    Compute R = 1 / sum_l (-1)^l / prod_{m != l} (l - m) exactly.

    Args:
        lambdas: distinct integers, at least two of them

    Returns:
        R as a Fraction in lowest terms

    Raises:
        ValueError: If fewer than two or repeated entries are given
        ZeroSum: If the defining sum is exactly zero
    """
    values = [int(x) for x in lambdas]
    if len(values) < 2:
        raise ValueError("At least two integers are required.")
    if len(set(values)) != len(values):
        raise ValueError(f"Entries must be distinct: {values}")

    total = Fraction(0)
    for lam in values:
        product = 1
        for mu in values:
            if mu != lam:
                product *= lam - mu
        sign = -1 if lam % 2 else 1
        total += Fraction(sign, product)

    if total == 0:
        raise ZeroSum(f"Reciprocal-product sum is zero for {values}")
    return 1 / total


def prime_valuation(x, p: int) -> int:
    """Return v such that x = p^v * (a/b) with a, b coprime to p."""
    value = Fraction(x)
    if value == 0:
        raise ZeroInput("Valuation of zero is undefined.")

    def count(n: int) -> int:
        n = abs(n)
        v = 0
        while n % p == 0:
            n //= p
            v += 1
        return v

    return count(value.numerator) - count(value.denominator)


def two_adic_valuation(x) -> int:
    return prime_valuation(x, 2)


def multinomial(n: int, parts) -> int:
    """
    n! / (prod parts_i! * (n - sum parts)!).

    Raises:
        PartsExceedTotal: If sum(parts) > n
    """
    parts = [int(k) for k in parts]
    if any(k < 0 for k in parts) or n < 0:
        raise ValueError("Multinomial arguments must be nonnegative.")
    rest = n - sum(parts)
    if rest < 0:
        raise PartsExceedTotal(f"Parts {parts} exceed total {n}")

    result = 1
    remaining = n
    for k in parts + [rest]:
        result *= math.comb(remaining, k)
        remaining -= k
    return result


def squarefree_part(n: int) -> tuple[int, int]:
    """Split a positive integer as n = s * r**2 with s squarefree."""
    if n <= 0:
        raise ValueError(f"Expected a positive integer, got {n}")
    s, r = 1, 1
    for prime, exponent in factorint(n).items():
        r *= prime ** (exponent // 2)
        if exponent % 2:
            s *= prime
    return s, r
