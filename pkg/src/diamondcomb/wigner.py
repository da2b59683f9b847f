"""Wigner 3-j and 6-j symbols by the Racah sum formula.

Arguments may be ints, floats, or ``Fraction`` values that are integer or
half-integer. Internally every quantity is doubled so the sum runs over
exact integers, and the square-root prefactor is accumulated as an exact
``Fraction``; only the final value is converted to float.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import factorial, sqrt

__all__ = ["wigner_3j", "wigner_6j", "clebsch_gordan", "twice", "triangle"]


def twice(x) -> int:
    """Return ``2*x`` as an int, rejecting anything not a half-integer."""
    d = 2 * Fraction(x)
    if d.denominator != 1:
        raise ValueError(f"{x!r} is not an integer or half-integer")
    return int(d)


def triangle(a2: int, b2: int, c2: int) -> bool:
    """Triangle rule on doubled angular momenta (including integer perimeter)."""
    return abs(a2 - b2) <= c2 <= a2 + b2 and (a2 + b2 + c2) % 2 == 0


def _check_jm(j2: int, m2: int) -> None:
    if j2 < 0:
        raise ValueError(f"negative angular momentum j={j2 / 2}")
    if abs(m2) > j2:
        raise ValueError(f"|m|={abs(m2) / 2} exceeds j={j2 / 2}")
    if (j2 - m2) % 2:
        raise ValueError(f"j={j2 / 2} and m={m2 / 2} differ in integer/half-integer parity")


def _delta(a2: int, b2: int, c2: int) -> Fraction:
    # triangle coefficient Δ(abc), squared form
    a, b, c = (a2 + b2 - c2) // 2, (a2 - b2 + c2) // 2, (-a2 + b2 + c2) // 2
    return Fraction(factorial(a) * factorial(b) * factorial(c),
                    factorial((a2 + b2 + c2) // 2 + 1))


@lru_cache(maxsize=65536)
def _w3j(j1: int, j2: int, j3: int, m1: int, m2: int, m3: int) -> float:
    if m1 + m2 + m3 != 0 or not triangle(j1, j2, j3):
        return 0.0
    # integer (undoubled) Racah parameters
    t1 = (j2 - m1 - j3) // 2
    t2 = (j1 + m2 - j3) // 2
    t3 = (j1 + j2 - j3) // 2
    t4 = (j1 - m1) // 2
    t5 = (j2 + m2) // 2
    total = Fraction(0)
    for t in range(max(0, t1, t2), min(t3, t4, t5) + 1):
        den = (factorial(t) * factorial(t - t1) * factorial(t - t2)
               * factorial(t3 - t) * factorial(t4 - t) * factorial(t5 - t))
        total += Fraction((-1) ** t, den)
    if total == 0:
        return 0.0
    pref = _delta(j1, j2, j3) * (
        factorial((j1 + m1) // 2) * factorial((j1 - m1) // 2)
        * factorial((j2 + m2) // 2) * factorial((j2 - m2) // 2)
        * factorial((j3 + m3) // 2) * factorial((j3 - m3) // 2))
    sign = -1 if ((j1 - j2 - m3) // 2) % 2 else 1
    # value = sign * total * sqrt(pref); square exactly, then one sqrt
    sq = total * total * pref
    return sign * (1 if total > 0 else -1) * sqrt(sq.numerator) / sqrt(sq.denominator)


def wigner_3j(j1, j2, j3, m1, m2, m3) -> float:
    """Wigner 3-j symbol ``(j1 j2 j3; m1 m2 m3)``.

    Returns exactly 0.0 for legal arguments that violate the triangle rule or
    ``m1 + m2 + m3 = 0``. Raises ``ValueError`` for negative ``j``,
    ``|m| > j``, non-half-integers, or mismatched j/m parity.
    """
    d = [twice(x) for x in (j1, j2, j3, m1, m2, m3)]
    for j, m in zip(d[:3], d[3:]):
        _check_jm(j, m)
    return _w3j(*d)


@lru_cache(maxsize=65536)
def _w6j(a: int, b: int, c: int, d: int, e: int, f: int) -> float:
    triads = ((a, b, c), (a, e, f), (d, b, f), (d, e, c))
    if not all(triangle(*t) for t in triads):
        return 0.0
    s = [sum(t) // 2 for t in triads]
    p = [(a + b + d + e) // 2, (a + c + d + f) // 2, (b + c + e + f) // 2]
    total = Fraction(0)
    for t in range(max(s), min(p) + 1):
        den = factorial(p[0] - t) * factorial(p[1] - t) * factorial(p[2] - t)
        for x in s:
            den *= factorial(t - x)
        total += Fraction((-1) ** t * factorial(t + 1), den)
    if total == 0:
        return 0.0
    pref = Fraction(1)
    for t in triads:
        pref *= _delta(*t)
    sq = total * total * pref
    return (1 if total > 0 else -1) * sqrt(sq.numerator) / sqrt(sq.denominator)


def wigner_6j(j1, j2, j3, j4, j5, j6) -> float:
    """Wigner 6-j symbol ``{j1 j2 j3; j4 j5 j6}``; zero if any triad fails."""
    d = [twice(x) for x in (j1, j2, j3, j4, j5, j6)]
    if any(x < 0 for x in d):
        raise ValueError("negative angular momentum in 6-j symbol")
    return _w6j(*d)


def clebsch_gordan(j1, m1, j2, m2, j, m) -> float:
    """``<j1 m1; j2 m2 | j m>`` in the Condon-Shortley convention."""
    phase = twice(j1) - twice(j2) + twice(m)
    sign = -1 if (phase // 2) % 2 else 1
    return sign * sqrt(twice(j) + 1) * wigner_3j(j1, j2, j, m1, m2, -m)
