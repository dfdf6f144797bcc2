"""Builders for the explicit block-weight and scheduled-operator constructions.

Each builder returns a ``Construction`` holding the weight sequence (or
operator system), its block specification and a JSON-ready certificate of
the structural conditions that were verified.  Quantities that outgrow every
machine type are handled as exact Python ints while small and as level-index
towers afterwards.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Optional, Union

import mpmath
import numpy as np

from .chaos_analysis import ScheduledSystem
from .densities import GrowthSequence
from .errors import ConstructionInconsistent, InvalidParameter, ScaleRejected, UnknownConstruction
from .index_sets import Complement, manjoza_bounds, manjoza_set
from .shift_core import BlockWeights, _log2_pow2m1, blocks_e1_cesaro_log2
from .towers import Tower, add_log2, compare, scale

Magnitude = Union[int, Tower]
DEFAULT_CAP = 2**62


def _clip(v: Magnitude, cap: int) -> int:
    if isinstance(v, int):
        return min(v, cap + 1)
    return cap + 1


def _log2(v: Magnitude) -> "float | Tower":
    if isinstance(v, int):
        return Tower.of(v).log2()
    return v.log2()


def _describe(v: Magnitude) -> str:
    if isinstance(v, int):
        return str(v) if v.bit_length() <= 64 else f"2^{_log2(v):.6g}"
    return v.describe()


def _mag_json(v: "float | Tower | Fraction") -> Any:
    if isinstance(v, Tower):
        return v.describe()
    if isinstance(v, Fraction):
        return str(v)
    return float(v)


@dataclass
class BlockSpec:
    """Alternating up-blocks (weight 2, lengths b_n) and down-blocks (weight 1/2, lengths a_n)."""

    name: str
    mode: str
    b_rule: str
    a_rule: str
    lengths: Callable[[int], tuple[Magnitude, Magnitude]] = field(repr=False)
    units: str = "plain"

    def boundaries(self, n: int) -> tuple[int, int]:
        """Exact end positions of up-block n and down-block n (small blocks only)."""
        pos = 0
        up = down = 0
        for q in range(1, n + 1):
            b, a = self.lengths(q)
            if not (isinstance(b, int) and isinstance(a, int)):
                raise ScaleRejected(f"block {q} is only known symbolically")
            up = pos + b
            down = up + a
            pos = down
        return up, down

    def ordering(self, n: int) -> list[bool]:
        """b_q < a_q < b_{q+1} for q = 1..n, compared through log2 values."""
        out = []
        for q in range(1, n + 1):
            b, a = self.lengths(q)
            b_next, _ = self.lengths(q + 1)
            out.append(compare(_log2(b), _log2(a)) < 0 and compare(_log2(a), _log2(b_next)) < 0)
        return out

    def to_dict(self, count: int = 4) -> dict:
        blocks = []
        for q in range(1, count + 1):
            b, a = self.lengths(q)
            blocks.append({"n": q, "b": _describe(b), "a": _describe(a)})
        return {"name": self.name, "mode": self.mode, "b_rule": self.b_rule, "a_rule": self.a_rule,
                "units": self.units, "first_blocks": blocks}


@dataclass
class Construction:
    name: str
    params: dict
    weights: Optional[BlockWeights] = None
    spec: Optional[BlockSpec] = None
    system: Any = None
    expected: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def certificate(self) -> dict:
        cert = {"construction": self.name, "params": self.params, "checks": self.checks,
                "expected": self.expected}
        if self.spec is not None:
            cert["blocks"] = self.spec.to_dict()
        if self.weights is not None:
            cert["weights_horizon"] = self.weights.horizon
        cert.update(self.extra)
        return cert


# ------------------------------------------------------------------ primer

def primer_spec(mode: str = "surrogate") -> BlockSpec:
    if mode == "surrogate":
        return BlockSpec("primer", mode, "2^((2n-1)^2)", "2^((2n)^2)",
                         lambda n: (2 ** ((2 * n - 1) ** 2), 2 ** ((2 * n) ** 2)))
    if mode == "paper":
        return BlockSpec("primer", mode, "2^2^((2n-1)^2)", "2^2^((2n)^2)",
                         lambda n: (_tower_length(2 ** ((2 * n - 1) ** 2)), _tower_length(2 ** ((2 * n) ** 2))))
    raise InvalidParameter(f"primer mode must be surrogate or paper, got {mode!r}")


def _tower_length(exponent: int) -> Magnitude:
    """2^exponent as an exact int when small, else as a tower."""
    if exponent <= 4096:
        return 1 << exponent
    return Tower.exp2(exponent)


def membership_windows_check(w: BlockWeights, J: int = 10**5, level: int = 0) -> dict:
    """Compare {j <= J : ||T^j e_1|| <= 2^level} from a running weight product
    against the exact window union computed from block boundaries."""
    J = int(J)
    if J > w.horizon:
        raise ScaleRejected(f"weights reach only {w.horizon}")
    steps = w.log2_weight(np.arange(1, J + 1, dtype=np.int64)).astype(np.int64)
    running = np.cumsum(steps)
    brute = running <= level
    windows = w.sublevel_windows(level, J)
    computed = np.zeros(J, dtype=bool)
    for lo, hi in windows:
        computed[lo - 1:hi] = True
    mismatch = np.nonzero(brute != computed)[0]
    return {"J": J, "level": level, "windows": [list(x) for x in windows], "equal": bool(mismatch.size == 0),
            "first_mismatch": int(mismatch[0]) + 1 if mismatch.size else None}


def primer_cesaro_checkpoints(w: BlockWeights, spec: BlockSpec, horizon: Optional[int] = None) -> dict:
    """Cesàro means of ||T^j e_1|| at the ends of down-blocks against the
    lower bound (2^(b_n - a_(n-1)) - 1) / (2 n a_n)."""
    horizon = int(horizon or w.horizon)
    rows = []
    pos = 0
    a_prev = 0
    n = 1
    while True:
        b, a = spec.lengths(n)
        if not (isinstance(b, int) and isinstance(a, int)):
            break
        N = pos + b + a
        if N > horizon or N > w.positions[-1]:
            break
        mean = blocks_e1_cesaro_log2(w, N)
        gap = b - a_prev
        bound = (_log2_pow2m1(gap) if gap > 0 else -math.inf) - math.log2(2 * n * a)
        rows.append({"n": n, "N": N, "log2_mean": mean, "log2_bound": bound, "exceeds": bool(mean > bound)})
        pos, a_prev, n = N, a, n + 1
    increasing = all(r2["log2_mean"] > r1["log2_mean"] for r1, r2 in zip(rows, rows[1:]))
    return {"rows": rows, "strictly_increasing": bool(increasing and len(rows) >= 2),
            "all_exceed_bound": all(r["exceeds"] for r in rows)}


def build_primer(mode: str = "surrogate", horizon: int = DEFAULT_CAP, window_J: int = 10**5) -> Construction:
    spec = primer_spec(mode)
    horizon = int(horizon)
    if mode == "surrogate":
        third_end = spec.boundaries(1)[1] + spec.lengths(2)[0]
        if horizon < third_end:
            raise ScaleRejected(f"horizon {horizon} holds fewer than 3 blocks (needs >= {third_end})")
    w = BlockWeights(lambda q: tuple(_clip(v, horizon) for v in spec.lengths(q)), cap=horizon,
                     config={"rule": "blocks", "construction": "primer", "mode": mode})
    checks = {"ordering": all(spec.ordering(4))}
    if mode == "surrogate":
        checks["membership_windows"] = membership_windows_check(w, min(window_J, w.horizon))
        checks["cesaro"] = primer_cesaro_checkpoints(w, spec)
    return Construction("primer", {"mode": mode, "horizon": horizon}, w, spec,
                        expected={"lambda_chaotic": "every lambda in (0, 1]", "cesaro": "unbounded"},
                        checks=checks)


# --------------------------------------------------------------- primexsimex

def _F(n: int, lam: float) -> int:
    """floor(n^(4/lam) ln n), exact."""
    if n <= 1:
        return 0
    with mpmath.workdps(80):
        return int(mpmath.floor(mpmath.power(n, mpmath.mpf(4) / mpmath.mpf(lam)) * mpmath.log(n)))


def build_primexsimex(lam: float, n_check: int = 1000, horizon: int = DEFAULT_CAP) -> Construction:
    """Blocks stored in doubled units: 2a_n and 2b_n are exact integers."""
    if not 0 < lam <= 1:
        raise InvalidParameter(f"lambda must lie in (0, 1], got {lam}")
    F = [_F(n, lam) for n in range(0, n_check + 2)]
    a2 = [0] + [F[n + 1] - F[n] for n in range(1, n_check + 1)]
    b2 = [0] + [a2[n - 1] + 3 * n * n - 3 * n + 1 for n in range(1, n_check + 1)]
    sb = sa = 0
    bad = []
    for n in range(1, n_check + 1):
        sb += b2[n]
        sa += a2[n]
        if sb != F[n] + n**3 or sa != F[n + 1]:
            bad.append(n)
    if bad:
        raise ConstructionInconsistent(f"boundary identities fail at n = {bad[:5]}")
    odd = [n for n in range(1, n_check + 1) if a2[n] % 2]
    ext: dict[int, tuple[int, int]] = {}

    def lengths(q: int) -> tuple[int, int]:
        if q <= n_check:
            return b2[q], a2[q]
        if q not in ext:
            a_prev = _F(q, lam) - _F(q - 1, lam)
            ext[q] = (a_prev + 3 * q * q - 3 * q + 1, _F(q + 1, lam) - _F(q, lam))
        return ext[q]

    spec = BlockSpec("primexsimex", "paper", "2b_n = 2a_(n-1) + 3n^2 - 3n + 1",
                     "2a_n = F(n+1) - F(n), F(n) = floor(n^(4/lambda) ln n)", lengths, units="doubled")
    w = BlockWeights(lambda q: tuple(max(1, _clip(v, horizon)) for v in lengths(q)), cap=horizon,
                     config={"rule": "blocks", "construction": "primexsimex", "lambda": lam})
    checks = {"identities_checked_to": n_check, "identities_hold": True,
              "odd_doubled_a": {"count": len(odd), "first": odd[:10]},
              "sample": {"2(b_1+b_2)": F[2] + 8 if n_check >= 2 else None}}
    return Construction("primexsimex", {"lambda": lam, "n_check": n_check}, w, spec,
                        expected={"lambda_chaotic": True, "lambda_prime_chaotic": False}, checks=checks)


# ---------------------------------------------------------------- pripazise

def _recursion_step(b: Magnitude, n: int) -> Magnitude:
    """floor(n^-2 2^(b/2)), exact while 2^(b/2) has at most 8192 bits."""
    if isinstance(b, int) and b <= 16384:
        # floor(sqrt(2^b) / n^2) = isqrt(floor(2^b / n^4))
        v = math.isqrt((1 << b) // n**4)
        return v if v.bit_length() <= 4096 else Tower.of(v)
    half = scale(_log2_value(b), 0.5)
    return Tower.exp2(add_log2(half, -2 * math.log2(n)))


def _log2_value(v: Magnitude) -> "float | Tower":
    """The magnitude itself as a float or tower (not its logarithm)."""
    return Tower.of(v) if isinstance(v, int) and v.bit_length() > 1000 else (float(v) if isinstance(v, int) else v)


def _mag_add(x: Magnitude, y: Magnitude) -> Magnitude:
    if isinstance(x, int) and isinstance(y, int):
        s = x + y
        return s if s.bit_length() <= 4096 else Tower.of(s)
    tx, ty = Tower.of(x), Tower.of(y)
    return tx if tx >= ty else ty


def _signed(value: "float | Tower", negative: bool) -> tuple[int, "float | Tower"]:
    if isinstance(value, Tower):
        return (-1 if negative else 1), value
    v = -value if negative else value
    return (1 if v > 0 else -1 if v < 0 else 0), abs(v)


def _signed_lt(x: tuple, y: tuple) -> bool:
    """x < y for (sign, magnitude) pairs."""
    sx, mx = x
    sy, my = y
    if sx != sy:
        return sx < sy
    c = compare(mx, my)
    return c > 0 if sx < 0 else c < 0


def _signed_json(x: tuple) -> Any:
    s, m = x
    if isinstance(m, Tower):
        return ("-" if s < 0 else "") + m.describe()
    return s * float(m)


def pripazise_seed(max_seed: int = 64) -> int:
    """Smallest b_1 for which the recursion increases over its next three steps."""
    for s in range(2, max_seed + 1):
        seq = [s]
        for n in range(1, 4):
            seq.append(_recursion_step(seq[-1], n))
        if all(compare(_log2(seq[i]) if seq[i] else -1.0, _log2(seq[i + 1]) if seq[i + 1] else -1.0) < 0
               for i in range(3)):
            return s
    raise ScaleRejected("no seed up to max_seed makes the recursion increasing")


def build_pripazise(a: float = 1.0, b: float = 0.5, k_max: int = 6, mangupe_n: int = 12,
                    horizon: int = DEFAULT_CAP) -> Construction:
    if not a > 0:
        raise InvalidParameter("a must be positive")
    if not 0 < b < 1:
        raise InvalidParameter(f"b must lie in (0, 1), got {b}")
    literal = [2]
    for n in range(1, 3):
        nxt = _recursion_step(literal[-1], n)
        literal.append(nxt)
    seed = pripazise_seed()
    n_total = 4**k_max + k_max + 2
    bs: list[Magnitude] = [0, seed]
    for n in range(1, n_total):
        bs.append(_recursion_step(bs[n], n))
    sums: list[Magnitude] = [0]
    for n in range(1, n_total + 1):
        sums.append(_mag_add(sums[-1], bs[n]) if n > 1 else bs[1])
    special = {4**k + 1: k for k in range(1, k_max + 1)}
    log2_2a: dict[int, "float | Tower"] = {}  # log2(2 a_n) = (k S)^b at special n
    as_: list[Magnitude] = [0]
    for n in range(1, n_total + 1):
        if n in special:
            k = special[n]
            S = sums[n]
            if isinstance(S, int) and S.bit_length() <= 1000:
                X: "float | Tower" = float(k * S) ** b
            else:
                X = Tower.exp2(scale(add_log2(_log2(S), math.log2(k)), b))
                if X.h == 0:
                    X = X.t
            log2_2a[n] = X
            as_.append(Tower.exp2(add_log2(X, -1.0)) if compare(X, 4096.0) > 0 else
                       int(math.ceil(2.0 ** (float(X) - 1))))
        else:
            b_n = bs[n]
            as_.append(b_n + 1 if isinstance(b_n, int) else b_n)
    n_check = n_total - 1

    # (i) and (ii) on the prefix: exact ints while possible, then log2 and
    # log2-log2 comparisons that keep the coefficients of log2 b_n
    cond_i, cond_ii = [], []
    for n in range(1, n_check + 1):
        lo_ok, hi_ok, ii_ok = _pripazise_step_checks(bs, as_, n, special.get(n), b)
        cond_i.append(bool(lo_ok and hi_ok))
        cond_ii.append(bool(ii_ok))
    n1 = next((n for n in range(1, n_check + 1) if all(cond_i[n - 1:]) and all(cond_ii[n - 1:])), None)

    # (iii): log2 of 2^(b_n/2) / (n b_(n+1)); >= log2 n by the floor in the recursion
    iii = []
    for n in range(1, min(n_check, 40) + 1):
        bn, bn1 = bs[n], bs[n + 1]
        if isinstance(bn, int) and isinstance(bn1, int) and bn <= 16384:
            iii.append(bn / 2 - math.log2(n) - _log2(bn1))
        else:
            iii.append(math.log2(n))
    iii_ok = all(y > x for x, y in zip(iii[-5:], iii[-4:]))

    # (iv) and (v) per k
    iv, v = [], []
    for k in range(1, k_max + 1):
        m = 4**k + k
        iv.append(_condition_iv_log2(bs, as_, m, [j for j in special if j <= m], b))
        X = log2_2a[4**k + 1]
        # (log2 2a_n)^(1/b) = k S_n by construction of a_n, so the ratio is 1/k
        v.append({"k": k, "n": 4**k + 1, "ratio": str(Fraction(1, k)), "log2_2a": _mag_json(X)})
    iv_ok = all(_signed_lt(y, x) for x, y in zip(iv[-5:], iv[-4:])) and iv[-1][0] < 0

    # mangupe-derane: n^sigma b_n / (log2 2 b_(n+1))^(1/b) -> 0
    mangupe = {}
    for sigma in (1, 2):
        rows = []
        for n in range(1, mangupe_n + 1):
            rows.append(_mangupe_log2(bs[n], bs[n + 1], n, sigma, b))
        ok = all(_signed_lt(y, x) for x, y in zip(rows[-5:], rows[-4:]))
        mangupe[str(sigma)] = {"log2_samples": [_signed_json(r) for r in rows], "decreasing_last5": ok}

    w = BlockWeights(lambda q: (_clip(bs[q], horizon), _clip(as_[q], horizon)) if q < len(bs) - 1
                     else (horizon + 1, horizon + 1), cap=horizon,
                     config={"rule": "blocks", "construction": "pripazise", "a": a, "b": b})
    checks = {
        "literal_prefix": [x if isinstance(x, int) else x.describe() for x in literal],
        "degenerate_literal": not (literal[0] < literal[1] < literal[2]),
        "start_shift": {"b_1": seed, "reason": "literal recursion from b_1 = 2 is not increasing"},
        "condition_i": {"holds_from_n1": n1 is not None, "n1": n1, "checked_to": n_check},
        "condition_ii": {"holds_from_n1": n1 is not None, "n1": n1},
        "condition_iii": {"log2_ratio_lower_bounds": iii[-5:], "increasing": iii_ok},
        "condition_iv": {"log2_ratio": [_signed_json(x) for x in iv], "decreasing_to_zero": iv_ok},
        "condition_v": v,
        "mangupe_derane": mangupe,
        "first_b": [_describe(x) for x in bs[1:8]],
    }
    return Construction("pripazise", {"a": a, "b": b, "k_max": k_max}, w, None,
                        expected={"growth": f"2^({a} n^{b})"}, checks=checks,
                        extra={"growth": GrowthSequence.logscale(a, b).to_config()})


def _lin_lt(c1: float, d1: float, c2: float, d2: float, L: "float | Tower") -> bool:
    """c1 L + d1 < c2 L + d2 for L a float or a tower (L beyond every float)."""
    if isinstance(L, Tower):
        return c1 < c2 or (c1 == c2 and d1 < d2)
    return c1 * L + d1 < c2 * L + d2


def _pripazise_step_checks(bs, as_, n: int, k: Optional[int], b: float) -> tuple[bool, bool, bool]:
    """(b_n < a_n, a_n < b_(n+1), b_(n+1) >= 2 a_n)."""
    bn, an, bn1 = bs[n], as_[n], bs[n + 1]
    if isinstance(bn, int) and isinstance(an, int) and isinstance(bn1, int):
        return bn < an, an < bn1, bn1 >= 2 * an
    if k is None:
        lo = True  # a_n := b_n + 1
        La, Lb1 = _log2(an), _log2(bn1)
        if not isinstance(Lb1, Tower) and not isinstance(La, Tower):
            return lo, La < Lb1, Lb1 >= 1 + La
        # log2 b_(n+1) = b_n/2 - 2 log2 n - delta against log2 a_n ~ log2 b_n
        return lo, compare(La, Lb1) < 0, compare(add_log2(La, 1.0), Lb1) < 0
    # special n: log2 log2 a_n ~ b (log2 k + log2 S_n), log2 log2 b_(n+1) ~ log2 b_n - 1
    L = _log2(bn)
    ok = _lin_lt(b, b * math.log2(k) + 1e-9, 1.0, -1.0 - 1e-9, L)
    # b_n < a_n  <=>  log2 log2 b_n < b (log2 k + log2 S_n)
    lo = True if isinstance(L, Tower) else math.log2(L) < b * (math.log2(k) + L)
    return lo, ok, ok


def _condition_iv_log2(bs, as_, m: int, specials: list[int], b: float) -> tuple:
    """log2 of (a_1 + ... + a_m) / (log2 2 b_(m+1))^(1/b) as (sign, magnitude)."""
    Lm = _log2(bs[m])
    if isinstance(bs[m], int) and isinstance(bs[m + 1], int):
        total = sum(x for x in as_[1:m + 1])
        return _signed(_log2(total) - math.log2(1 + _log2(bs[m + 1])) / b, False)
    # largest summand: a special a_j beats b_m only when j = m or b_m is still a float
    top_special = None
    for j in specials:
        La = _log2(as_[j])
        if j == m or not isinstance(Lm, Tower):
            if compare(La, Lm) > 0:
                top_special = La
    den = (1 / b) * (Lm - 1) if not isinstance(Lm, Tower) else scale(Lm, 1 / b)
    if top_special is not None:
        return _diff(add_log2(top_special, math.log2(m)), den)
    if not isinstance(Lm, Tower):
        return _signed(-(1 / b - 1) * Lm + math.log2(m) + 1 + 1 / b, False)
    return -1, scale(Lm, 1 / b - 1)


def _log_log2_double(v: Magnitude) -> "float | Tower":
    """log2(log2(2 v)) = log2(1 + log2 v)."""
    L = _log2(v)
    if isinstance(L, Tower):
        return L.log2()
    return math.log2(1 + L)


def _diff(p: "float | Tower", q: "float | Tower") -> tuple:
    """(sign, magnitude) of p - q; at tower scale the larger term dominates."""
    if not isinstance(p, Tower) and not isinstance(q, Tower):
        return _signed(p - q, False)
    c = compare(p, q)
    if c > 0:
        return 1, p
    if c < 0:
        return -1, q
    return 0, 0.0


def _mangupe_log2(bn: Magnitude, bn1: Magnitude, n: int, sigma: int, b: float) -> tuple:
    """log2 of n^sigma b_n / (log2 2 b_(n+1))^(1/b) as (sign, magnitude).

    Exact when both terms are small; otherwise log2(1 + log2 b_(n+1)) equals
    log2(b_n) - 1 up to a term below 2^-(log2 b_n - 8), so the value is
    sigma log2 n + 1/b - (1/b - 1) log2 b_n.
    """
    Ln = _log2(bn)
    if isinstance(bn, int) and isinstance(bn1, int):
        return _signed(sigma * math.log2(n) + Ln - math.log2(1 + _log2(bn1)) / b, False)
    if not isinstance(Ln, Tower):
        return _signed(sigma * math.log2(n) + 1 / b - (1 / b - 1) * Ln, False)
    return -1, scale(Ln, 1 / b - 1)


# ------------------------------------------------------------------ manjoza

def build_manjoza(lam: float = 0.5, lam_prime: float = 0.25, prefix_n: int = 1000) -> Construction:
    if not (0 < lam_prime < lam <= 1):
        raise InvalidParameter("need 0 < lambda' < lambda <= 1")
    S = manjoza_set(lam)
    system = ScheduledSystem(S, 2.0)
    Sc = Complement(S)
    rows = []
    for n in (2, 10, 100, prefix_n):
        a_n, b_n = manjoza_bounds(n, lam)
        rows.append({"n": n, "a_n": a_n, "count_upto_a_n": int(Sc.count_upto(a_n)),
                     "count_before_b_n": int(Sc.count_upto(b_n - 1)), "triangular_n": n * (n + 1) // 2,
                     "triangular_n_minus_1": n * (n - 1) // 2})
    # S^c meets [1, a_n] in the gaps [a_i, b_i), i = 2..n-1, plus a_n itself
    exact = all(r["count_upto_a_n"] == r["triangular_n_minus_1"] and r["count_before_b_n"] == r["triangular_n"] - 1
                for r in rows)
    expected = {f"LowerM(S^c), m_n = n^(1/{lam})": "TendsToZero",
                f"LowerM(S^c), m_n = n^(1/{lam_prime})": "DivergesToInfinity"}
    return Construction("manjoza", {"lambda": lam, "lambda_prime": lam_prime}, None, None, system,
                        expected=expected, checks={"prefix_counts": rows, "prefix_counts_exact": exact},
                        extra={"set": S.to_config()})


BUILDERS = {"primer": build_primer, "primexsimex": build_primexsimex, "pripazise": build_pripazise,
            "manjoza": build_manjoza}


def build(name: str, **params) -> Construction:
    try:
        fn = BUILDERS[name]
    except KeyError:
        raise UnknownConstruction(f"unknown construction {name!r}; known: {sorted(BUILDERS)}") from None
    return fn(**params)
