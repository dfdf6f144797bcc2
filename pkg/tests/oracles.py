"""Independent reference computations used by the tests.

Everything here is plain Python (ints, Fractions, Decimal, math) so that it
shares no code path with the package.
"""
from __future__ import annotations

import math
from decimal import Decimal, getcontext
from fractions import Fraction


def count_in(members: set[int], a: int, b: int) -> int:
    return sum(1 for v in range(a, b + 1) if v in members)


def lower_density_samples(members: set[int], N: int) -> list[Fraction]:
    run, out = 0, []
    for n in range(1, N + 1):
        run += n in members
        out.append(Fraction(run, n))
    return out


def banach_window_extrema(members: set[int], s: int, n_max: int) -> tuple[int, int]:
    """(min, max) of |A ∩ [n+1, n+s]| over 0 <= n <= n_max, by sliding a window."""
    c = count_in(members, 1, s)
    lo = hi = c
    for n in range(1, n_max + 1):
        c += (n + s in members) - (n in members)
        lo, hi = min(lo, c), max(hi, c)
    return lo, hi


def zelje_members(bound: int) -> set[int]:
    """Union of [a_n, a_(n+1)] over even n, a_n = 2^(1^2) + ... + 2^(n^2), cut at bound."""
    a = [0]
    for i in range(1, 12):
        a.append(a[-1] + 2 ** (i * i))
    out: set[int] = set()
    for n in range(2, len(a) - 1, 2):
        if a[n] > bound:
            break
        out.update(range(a[n], min(a[n + 1], bound) + 1))
    return out


def beta_ratio_exact(n: int) -> Fraction:
    """prod_{k<=n} 2k/(2k-1) as an exact fraction."""
    v = Fraction(1)
    for k in range(1, n + 1):
        v *= Fraction(2 * k, 2 * k - 1)
    return v


def log2_fraction(v: Fraction) -> float:
    num, den = v.numerator, v.denominator
    sn, sd = max(num.bit_length() - 60, 0), max(den.bit_length() - 60, 0)
    return math.log2(num >> sn) + sn - math.log2(den >> sd) - sd


def sparse_forward_orbit_log2(weights: list[Fraction], J: int) -> list[float]:
    """log2 ||F^j e_1|| for j = 1..J by moving a sparse {index: value} vector."""
    x = {1: Fraction(1)}
    out = []
    for _ in range(J):
        x = {k + 1: weights[k - 1] * v for k, v in x.items()}
        (value,) = x.values()
        out.append(log2_fraction(abs(value)))
    return out


def floor_pow_ln(n: int, power: int, digits: int = 80) -> int:
    """floor(n^power * ln n) in Decimal arithmetic."""
    if n <= 1:
        return 0
    getcontext().prec = digits
    return int((Decimal(n) ** power * Decimal(n).ln()).to_integral_value(rounding="ROUND_FLOOR"))


def pripazise_step(b: int, n: int) -> int:
    """floor(2^(b/2) / n^2) via exact rationals (b even) or isqrt."""
    if b % 2 == 0:
        return (2 ** (b // 2)) // (n * n)
    return math.isqrt(2**b // n**4)
