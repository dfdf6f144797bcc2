"""Subsets of the positive integers with exact, structure-aware counting.

Every set answers ``count_upto(n) = |A ∩ [1, n]|`` exactly and reports the
points where its indicator changes.  Density estimators only ever touch those
two primitives, so their cost tracks the description of the set rather than
the horizon.
"""
from __future__ import annotations

import math
import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

import mpmath
import numpy as np

from .errors import HorizonExceeded, InsufficientData, InvalidParameter, UnknownConstruction

MAX_CAP = 2**63 - 1

IntArray = np.ndarray


def _as_int_array(n) -> tuple[IntArray, bool]:
    arr = np.asarray(n)
    scalar = arr.ndim == 0
    if arr.dtype.kind not in "iu":
        if arr.dtype.kind == "O":
            arr = arr.astype(np.int64)
        else:
            raise TypeError(f"integer input required, got {arr.dtype}")
    return np.atleast_1d(arr.astype(np.int64, copy=False)), scalar


def _ret(arr: IntArray, scalar: bool):
    return int(arr[0]) if scalar else arr


class IndexSet(ABC):
    """Immutable subset of {1, 2, ...} known exactly up to ``cap``."""

    cap: int = MAX_CAP

    @abstractmethod
    def _count_upto(self, n: IntArray) -> IntArray:
        """Vectorised |A ∩ [1, n]| for 0 <= n <= cap."""

    @abstractmethod
    def _change_points(self, lo: int, hi: int) -> IntArray:
        """Superset of {x in [lo, hi] : 1_A(x) != 1_A(x + 1)}."""

    @abstractmethod
    def to_config(self) -> dict:
        ...

    def check_horizon(self, n: int) -> None:
        if n > self.cap:
            raise HorizonExceeded(f"index {n} exceeds the set's horizon cap {self.cap}")

    def count_upto(self, n):
        arr, scalar = _as_int_array(n)
        if arr.size and int(arr.max()) > self.cap:
            raise HorizonExceeded(f"index {int(arr.max())} exceeds the set's horizon cap {self.cap}")
        out = self._count_upto(np.maximum(arr, 0))
        return _ret(out, scalar)

    def count_in_interval(self, a, b):
        """Exact |A ∩ [a, b]|; vectorised over matching arrays."""
        a_arr, sa = _as_int_array(a)
        b_arr, sb = _as_int_array(b)
        if np.any(a_arr < 1) or np.any(b_arr < 1):
            raise InvalidParameter("interval endpoints must be positive integers")
        if np.any(a_arr > b_arr):
            raise InvalidParameter("interval requires a <= b")
        out = self.count_upto(b_arr) - self.count_upto(a_arr - 1)
        return _ret(out, sa and sb)

    def contains(self, x):
        arr, scalar = _as_int_array(x)
        out = (self.count_upto(arr) - self.count_upto(arr - 1)).astype(bool)
        return bool(out[0]) if scalar else out

    def change_points(self, lo: int, hi: int) -> IntArray:
        lo = max(int(lo), 0)
        hi = int(hi)
        if hi < lo:
            return np.empty(0, dtype=np.int64)
        self.check_horizon(hi)
        pts = self._change_points(lo, hi)
        pts = pts[(pts >= lo) & (pts <= hi)]
        return np.unique(pts)

    def runs(self, a: int, b: int) -> tuple[IntArray, IntArray]:
        """Maximal runs [start, end] of members inside [a, b]."""
        self.check_horizon(b)
        cuts = np.concatenate(([a - 1], self.change_points(a, b - 1), [b]))
        cuts = np.unique(cuts)
        starts = cuts[:-1] + 1
        ends = cuts[1:]
        member = self.contains(starts)
        starts, ends = starts[member], ends[member]
        if starts.size > 1:
            # merge runs split by spurious change points
            brk = np.nonzero(starts[1:] != ends[:-1] + 1)[0]
            starts = np.concatenate((starts[:1], starts[brk + 1]))
            ends = np.concatenate((ends[brk], ends[-1:]))
        return starts, ends

    def members(self, a: int, b: int, limit: Optional[int] = None) -> IntArray:
        starts, ends = self.runs(a, b)
        out: list[IntArray] = []
        total = 0
        for s, e in zip(starts.tolist(), ends.tolist()):
            take = e - s + 1
            if limit is not None:
                take = min(take, limit - total)
            out.append(np.arange(s, s + take, dtype=np.int64))
            total += take
            if limit is not None and total >= limit:
                break
        return np.concatenate(out) if out else np.empty(0, dtype=np.int64)


class Explicit(IndexSet):
    def __init__(self, values: Iterable[int], cap: Optional[int] = None):
        vals = np.asarray(list(values), dtype=np.int64)
        if vals.size and (vals[0] < 1 or np.any(np.diff(vals) <= 0)):
            raise InvalidParameter("explicit values must be strictly increasing positive integers")
        self.values = vals
        self.values.setflags(write=False)
        if cap is None:
            cap = int(vals[-1]) if vals.size else MAX_CAP
        self.cap = int(cap)

    @classmethod
    def from_file(cls, path: str | Path, cap: Optional[int] = None) -> "Explicit":
        text = Path(path).read_text().split()
        return cls((int(t) for t in text), cap=cap)

    def _count_upto(self, n):
        return np.searchsorted(self.values, n, side="right").astype(np.int64)

    def _change_points(self, lo, hi):
        i = np.searchsorted(self.values, lo, side="left")
        j = np.searchsorted(self.values, hi + 1, side="right")
        e = self.values[i:j]
        return np.concatenate((e - 1, e))

    def to_config(self):
        return {"kind": "explicit", "values": self.values.tolist(), "cap": self.cap}


class MonotoneFormula(IndexSet):
    """{n_k : k >= 1} for a strictly increasing integer rule ``fn``.

    ``fn`` maps an int64 array of k values to int64 values and must be exact
    for 1 <= k <= k_max.  ``inverse`` is an optional approximate inverse used
    as a starting guess; results are always corrected against ``fn``.
    """

    def __init__(self, fn: Callable[[IntArray], IntArray], k_max: int, cap: int,
                 inverse: Optional[Callable[[IntArray], IntArray]] = None,
                 config: Optional[dict] = None):
        self.fn = fn
        self.k_max = int(k_max)
        self.cap = int(cap)
        self.inverse = inverse
        self._config = config or {"kind": "formula"}

    def _count_upto(self, n):
        k_max = self.k_max
        if self.inverse is None:
            lo = np.zeros_like(n)
            hi = np.full_like(n, k_max)
            while True:
                active = lo < hi
                if not active.any():
                    break
                mid = (lo + hi + 1) // 2
                ok = self.fn(np.where(active, mid, 1)) <= n
                lo = np.where(active & ok, mid, lo)
                hi = np.where(active & ~ok, mid - 1, hi)
            return lo
        g = np.clip(self.inverse(n), 0, k_max).astype(np.int64)
        while True:
            can = g < k_max
            up = can & (self.fn(np.where(can, g + 1, 1)) <= n)
            if not up.any():
                break
            g = g + up
        while True:
            pos = g > 0
            down = pos & (self.fn(np.where(pos, g, 1)) > n)
            if not down.any():
                break
            g = g - down
        return g

    def terms(self, k_lo: int, k_hi: int) -> IntArray:
        k_hi = min(int(k_hi), self.k_max)
        if k_hi < k_lo:
            return np.empty(0, dtype=np.int64)
        return self.fn(np.arange(int(k_lo), k_hi + 1, dtype=np.int64))

    def _change_points(self, lo, hi):
        k0 = int(self._count_upto(np.array([max(lo - 1, 0)]))[0]) + 1
        k1 = int(self._count_upto(np.array([min(hi + 1, self.cap)]))[0])
        e = self.terms(k0, k1)
        return np.concatenate((e - 1, e))

    def to_config(self):
        return dict(self._config)


def _power_formula(q: float) -> MonotoneFormula:
    if not q >= 1:
        raise InvalidParameter(f"power sets need q >= 1, got {q}")
    if float(q).is_integer():
        qi = int(q)
        k_max = math.isqrt(MAX_CAP) if qi == 2 else int(round(MAX_CAP ** (1.0 / qi)))
        while (k_max + 1) ** qi <= MAX_CAP:
            k_max += 1
        while k_max**qi > MAX_CAP:
            k_max -= 1

        def fn(k):
            return k**qi

        def inverse(n):
            return np.floor(np.power(n.astype(np.float64), 1.0 / qi)).astype(np.int64)

        cap = min(MAX_CAP, (k_max + 1) ** qi - 1)
        return MonotoneFormula(fn, k_max, cap, inverse, {"kind": "formula", "rule": "power", "q": qi})
    # non-integer exponent: float64 floors are exact only below 2**53
    limit = 2**53
    k_max = int(limit ** (1.0 / q))
    while math.floor(k_max**q) > limit:
        k_max -= 1

    def fn(k):
        return np.floor(np.power(k.astype(np.float64), q)).astype(np.int64)

    def inverse(n):
        return np.floor(np.power(n.astype(np.float64), 1.0 / q)).astype(np.int64)

    cap = int(math.floor((k_max + 1) ** q)) - 1
    return MonotoneFormula(fn, k_max, cap, inverse, {"kind": "formula", "rule": "power", "q": float(q)})


def _linear_formula(a: int, b: int = 0) -> MonotoneFormula:
    a, b = int(a), int(b)
    if a < 1 or a + b < 1:
        raise InvalidParameter("linear sets need a >= 1 and a + b >= 1")
    k_max = (MAX_CAP - b) // a

    def fn(k):
        return a * k + b

    def inverse(n):
        return np.floor_divide(n - b, a)

    return MonotoneFormula(fn, k_max, MAX_CAP, inverse, {"kind": "formula", "rule": "linear", "a": a, "b": b})


def _exp2_formula() -> MonotoneFormula:
    def fn(k):
        return np.left_shift(np.int64(1), k)

    def inverse(n):
        safe = np.maximum(n, 1)
        return np.where(n >= 1, np.floor(np.log2(safe.astype(np.float64))), 0).astype(np.int64)

    return MonotoneFormula(fn, 62, MAX_CAP, inverse, {"kind": "formula", "rule": "exp2"})


def formula_set(rule: str, **params) -> MonotoneFormula:
    if rule == "power":
        return _power_formula(float(params.get("q", 2)))
    if rule == "linear":
        return _linear_formula(params.get("a", 1), params.get("b", 0))
    if rule == "exp2":
        return _exp2_formula()
    raise UnknownConstruction(f"unknown formula rule {rule!r}")


class BlockUnion(IndexSet):
    """Union of ordered disjoint intervals [x_q, y_q].

    Blocks come either from a finite list or from a generator ``q -> (x, y)``
    (q = 1, 2, ...) that is enumerated lazily.  Endpoints may be Python ints
    larger than the cap; they are clipped when stored.
    """

    def __init__(self, blocks: Optional[Sequence[tuple[int, int]]] = None,
                 generator: Optional[Callable[[int], tuple[int, int]]] = None,
                 cap: int = MAX_CAP, config: Optional[dict] = None):
        if (blocks is None) == (generator is None):
            raise InvalidParameter("give exactly one of blocks or generator")
        self.cap = int(cap)
        self._generator = generator
        self._config = config or {"kind": "blocks", "blocks": [list(b) for b in (blocks or [])]}
        self._lock = threading.Lock()
        self._starts: list[int] = []
        self._ends: list[int] = []
        self._exhausted = generator is None
        self._next_q = 1
        if blocks is not None:
            for x, y in blocks:
                self._push(int(x), int(y))
        self._freeze()

    def _push(self, x: int, y: int) -> bool:
        if x < 1 or y < x:
            raise InvalidParameter(f"invalid block [{x}, {y}]")
        if self._ends and x <= self._ends[-1]:
            raise InvalidParameter("blocks must be ordered and disjoint")
        if x > self.cap:
            self._exhausted = True
            return False
        self._starts.append(x)
        self._ends.append(min(y, self.cap))
        if y >= self.cap:
            self._exhausted = True
            return False
        return True

    def _freeze(self):
        self._s = np.asarray(self._starts, dtype=np.int64)
        self._e = np.asarray(self._ends, dtype=np.int64)
        lengths = self._e - self._s + 1
        self._cum = np.concatenate(([0], np.cumsum(lengths)))[:-1].astype(np.int64)

    def _ensure(self, bound: int) -> None:
        if self._exhausted or (self._ends and self._ends[-1] >= bound):
            return
        with self._lock:
            while not self._exhausted and (not self._ends or self._ends[-1] < bound):
                x, y = self._generator(self._next_q)
                self._next_q += 1
                if not self._push(int(x), int(y)):
                    break
            self._freeze()

    def blocks_upto(self, bound: int) -> tuple[IntArray, IntArray]:
        self._ensure(bound)
        k = np.searchsorted(self._s, bound, side="right")
        return self._s[:k], self._e[:k]

    def _count_upto(self, n):
        if n.size == 0:
            return n.copy()
        self._ensure(int(n.max()))
        i = np.searchsorted(self._s, n, side="right") - 1
        safe = np.maximum(i, 0)
        if self._s.size == 0:
            return np.zeros_like(n)
        part = np.minimum(n, self._e[safe]) - self._s[safe] + 1
        return np.where(i >= 0, self._cum[safe] + part, 0)

    def _change_points(self, lo, hi):
        self._ensure(hi + 1)
        s, e = self._s, self._e
        m = (e >= lo - 1) & (s <= hi + 2)
        return np.concatenate((s[m] - 1, e[m]))

    def to_config(self):
        return dict(self._config)


class Complement(IndexSet):
    def __init__(self, base: IndexSet):
        self.base = base
        self.cap = base.cap

    def _count_upto(self, n):
        return n - self.base._count_upto(n)

    def _change_points(self, lo, hi):
        return self.base._change_points(lo, hi)

    def to_config(self):
        return {"kind": "complement", "of": self.base.to_config()}


class Union(IndexSet):
    """Union of two sets, counted through a cached run table."""

    def __init__(self, left: IndexSet, right: IndexSet):
        self.left, self.right = left, right
        self.cap = min(left.cap, right.cap)
        self._lock = threading.Lock()
        self._bound = 0
        self._cuts = np.array([0], dtype=np.int64)
        self._member = np.zeros(0, dtype=bool)
        self._prefix = np.zeros(1, dtype=np.int64)

    def _member_at(self, x):
        a = self.left._count_upto(x) - self.left._count_upto(x - 1)
        b = self.right._count_upto(x) - self.right._count_upto(x - 1)
        return (a + b) > 0

    def _build(self, bound: int) -> None:
        if bound <= self._bound:
            return
        with self._lock:
            target = min(self.cap, max(bound, 2 * self._bound, 1024))
            pts = np.concatenate(([0], self.left._change_points(0, target),
                                  self.right._change_points(0, target), [target]))
            cuts = np.unique(pts[(pts >= 0) & (pts <= target)])
            member = self._member_at(cuts[:-1] + 1)
            lengths = np.diff(cuts) * member
            self._cuts = cuts
            self._member = member
            self._prefix = np.concatenate(([0], np.cumsum(lengths))).astype(np.int64)
            self._bound = target

    def _count_upto(self, n):
        if n.size == 0:
            return n.copy()
        self._build(int(n.max()))
        i = np.clip(np.searchsorted(self._cuts, n, side="left") - 1, 0, len(self._member) - 1)
        out = self._prefix[i] + self._member[i] * (n - self._cuts[i])
        return np.where(n <= 0, 0, out)

    def _change_points(self, lo, hi):
        return np.concatenate((self.left._change_points(lo, hi), self.right._change_points(lo, hi)))

    def to_config(self):
        return {"kind": "union", "left": self.left.to_config(), "right": self.right.to_config()}


@dataclass(frozen=True)
class GapProfile:
    N: int
    gap_bound: int
    right_ends: IntArray  # right element of each gap
    gaps: IntArray

    def max_gap_up_to(self, M: int) -> int:
        k = int(np.searchsorted(self.right_ends, M, side="right"))
        return int(self.gaps[:k].max()) if k else 1

    @property
    def syndetic(self) -> bool:
        return self.max_gap_up_to(self.N) <= self.gap_bound


def gap_profile(A: IndexSet, N: int, gap_bound: int) -> GapProfile:
    if A.count_upto(N) < 2:
        raise InsufficientData("need at least two elements below N to measure gaps")
    starts, ends = A.runs(1, N)
    right = starts[1:]
    gaps = starts[1:] - ends[:-1]
    # gaps inside a run are 1; represent them so max_gap_up_to is defined early
    return GapProfile(int(N), int(gap_bound), right.astype(np.int64), gaps.astype(np.int64))


def is_syndetic_up_to(A: IndexSet, N: int, gap_bound: int) -> tuple[bool, GapProfile]:
    prof = gap_profile(A, N, gap_bound)
    return prof.syndetic, prof


# ---------------------------------------------------------------- named sets

def _floor_exact(expr: Callable[[], mpmath.mpf]) -> int:
    with mpmath.workdps(60):
        return int(mpmath.floor(expr()))


def manjoza_bounds(n: int, lam: float) -> tuple[int, int]:
    """(a_n, b_n) with a_n = floor(n^(2/lam) ln n), b_n = a_n + n."""
    with mpmath.workdps(60):
        a = int(mpmath.floor(mpmath.power(n, mpmath.mpf(2) / mpmath.mpf(lam)) * mpmath.log(n)))
    return a, a + n


def manjoza_set(lam: float) -> BlockUnion:
    if not 0 < lam <= 1:
        raise InvalidParameter(f"lambda must lie in (0, 1], got {lam}")

    def gen(q: int) -> tuple[int, int]:
        # block q is [b_{n-1}, a_n - 1] with n = q + 1
        n = q + 1
        _, b_prev = manjoza_bounds(n - 1, lam)
        a_n, _ = manjoza_bounds(n, lam)
        return b_prev, a_n - 1

    return BlockUnion(generator=gen, config={"kind": "paper", "name": "manjoza_S", "params": {"lambda": lam}})


def zelje_partial_sums(count: int, base: int = 2, exponent: str = "k^2") -> list[int]:
    """a_n = sum_{i<=n} base^(e(i)) for n = 1..count as exact integers."""
    out, acc = [], 0
    for i in range(1, count + 1):
        if exponent == "k^2":
            e = i * i
        elif exponent == "k":
            e = i
        elif exponent == "2^k^2":
            e = 2 ** (i * i)
            if e > 4096:
                # beyond any representable horizon; keep a sentinel that exceeds the cap
                acc += 2**4096
                out.append(acc)
                continue
        else:
            raise InvalidParameter(f"unknown zelje exponent rule {exponent!r}")
        acc += base**e
        out.append(acc)
    return out


def zelje_set(base: int = 2, exponent: str = "k^2") -> BlockUnion:
    if base < 2:
        raise InvalidParameter("zelje base must be >= 2")

    def gen(q: int) -> tuple[int, int]:
        n = 2 * q
        a = zelje_partial_sums(n + 1, base, exponent)
        return a[n - 1], a[n]

    params = {"surrogate_base": base, "surrogate_exp": exponent}
    return BlockUnion(generator=gen, config={"kind": "paper", "name": "zelje_A", "params": params})


PAPER_SETS = ("zelje_A", "manjoza_S", "squares", "power_q", "custom_blocks", "evens", "naturals", "multiples")


def build_paper_set(name: str, params: Optional[dict] = None) -> IndexSet:
    params = dict(params or {})
    if name == "squares":
        return formula_set("power", q=2)
    if name == "power_q":
        return formula_set("power", q=float(params.get("q", 2)))
    if name == "evens":
        return formula_set("linear", a=2, b=0)
    if name == "naturals":
        return formula_set("linear", a=1, b=0)
    if name == "multiples":
        return formula_set("linear", a=int(params.get("m", 3)), b=0)
    if name == "manjoza_S":
        lam = float(params.get("lambda", params.get("lam", 0.5)))
        return manjoza_set(lam)
    if name == "zelje_A":
        base = int(params.get("surrogate_base", 2))
        exp = str(params.get("surrogate_exp", "k^2")).replace("²", "^2")
        return zelje_set(base, exp)
    if name == "custom_blocks":
        blocks = params.get("blocks")
        if not blocks:
            raise InvalidParameter("custom_blocks needs a non-empty 'blocks' list")
        return BlockUnion(blocks=[tuple(b) for b in blocks])
    raise UnknownConstruction(f"unknown set {name!r}")


def from_config(cfg: dict) -> IndexSet:
    kind = cfg.get("kind")
    if kind == "explicit":
        if "file" in cfg:
            return Explicit.from_file(cfg["file"], cap=cfg.get("cap"))
        return Explicit(cfg.get("values", []), cap=cfg.get("cap"))
    if kind == "formula":
        params = {k: v for k, v in cfg.items() if k not in ("kind", "rule")}
        return formula_set(cfg["rule"], **params)
    if kind == "blocks":
        return BlockUnion(blocks=[tuple(b) for b in cfg["blocks"]])
    if kind == "paper":
        return build_paper_set(cfg["name"], cfg.get("params"))
    if kind == "complement":
        return Complement(from_config(cfg["of"]))
    if kind == "union":
        return Union(from_config(cfg["left"]), from_config(cfg["right"]))
    raise UnknownConstruction(f"unknown set kind {kind!r}")
