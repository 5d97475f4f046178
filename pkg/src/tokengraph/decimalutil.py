"""Exact decimal arithmetic for token amounts.

On-chain transfer values arrive as base-unit integers up to 2**256, i.e.
78 decimal digits. The default decimal context (28 significant digits)
would silently round them, so every operation here runs under an explicit
wide context. Sums and products stay exact; only quotients (price shares,
normalized series) round, at 34 significant digits.
"""
from __future__ import annotations

from decimal import Context, Decimal, ROUND_HALF_EVEN
from typing import Iterable

# 78 digits covers uint256; doubled for products of two such values.
EXACT_PREC = 160
QUOTIENT_PREC = 34

EXACT_CTX = Context(prec=EXACT_PREC, rounding=ROUND_HALF_EVEN)
QUOTIENT_CTX = Context(prec=QUOTIENT_PREC, rounding=ROUND_HALF_EVEN)

ZERO = Decimal(0)
ONE = Decimal(1)


def shift_point(value: int, places: int) -> Decimal:
    """``value / 10**places`` computed exactly by shifting the exponent.

    No context is involved, so arbitrarily large integers survive intact.
    """
    if places < 0:
        raise ValueError(f"decimal shift must be non-negative, got {places}")
    sign, digits, exponent = Decimal(value).as_tuple()
    return Decimal((sign, digits, exponent - places))


def dsum(values: Iterable[Decimal]) -> Decimal:
    total = ZERO
    for value in values:
        total = EXACT_CTX.add(total, value)
    return total


def dmul(a: Decimal, b: Decimal) -> Decimal:
    return EXACT_CTX.multiply(a, b)


def ddiv(numerator: Decimal, denominator: Decimal) -> Decimal:
    return QUOTIENT_CTX.divide(numerator, denominator)


def fmt(value: Decimal) -> str:
    """Fixed-point text form; never scientific notation."""
    return format(value, "f")
