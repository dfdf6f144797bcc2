"""Pair and vector density profiles, finite-horizon chaos classification and
the computable sufficient criteria.

Every verdict is tri-state (Satisfied, Refuted, Inconclusive) and stamped
with the horizon and schedule of the density estimates behind it.  Distances
are handled as log2 values so that orbits far beyond float range still
compare exactly against the threshold grid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .densities import (K_TAIL, THETA, DensityEstimate, DensityKind, GrowthSequence, Schedule,
                        estimate_density)
from .errors import (HypothesisViolated, IncompleteProfile, InvalidParameter, SpacingRejected,
                     TruncationTooShort, WitnessRejected)
from .index_sets import BlockUnion, Complement, Explicit, IndexSet, Union
from .shift_core import (BlockWeights, OrbitTrace, SequenceVector, ShiftOperator, Space, log2_norm,
                         log2_sum, orbit, prefix_seminorm)

DELTA_GRID = tuple(range(-20, 21))  # log2 of the thresholds
FRECHET_M = 24
SATISFIED, REFUTED, INCONCLUSIVE = "Satisfied", "Refuted", "Inconclusive"


def _as_vector(v, space: Space = "c0") -> SequenceVector:
    if isinstance(v, SequenceVector):
        return v
    return SequenceVector(np.atleast_1d(np.asarray(v, dtype=np.float64)), space)


def _frechet_log2(semi_log2: np.ndarray) -> np.ndarray:
    """log2 of sum_m 2^-m p_m / (1 + p_m) from log2 p_m along the last axis."""
    m = np.arange(1, semi_log2.shape[-1] + 1, dtype=np.float64)
    with np.errstate(over="ignore"):
        terms = -m - np.logaddexp2(0.0, -semi_log2)
    return log2_sum(terms, axis=-1)


# ------------------------------------------------------------------ systems

class System:
    """A sequence (T_j) acting on a sequence space, seen through orbit norms.

    Subclasses provide ``log2_norms(z, J)``: log2 of ||T_j z|| (Banach mode)
    or of the Fréchet metric d(T_j z, 0), for j = 1..J.  Because every T_j is
    linear, pair distances are norms of T_j (x - y).
    """

    mode = "banach"
    space: Space = 2.0
    linear = True

    def log2_norms(self, z: SequenceVector, J: int) -> np.ndarray:
        raise NotImplementedError

    def log2_seminorm(self, z: SequenceVector, J: int, m: int) -> np.ndarray:
        """log2 p_m(T_j z); Banach systems use the norm for every m."""
        return self.log2_norms(z, J)

    def log2_distances(self, x, y, J: int) -> np.ndarray:
        return self.log2_norms(_as_vector(x, self.space) - _as_vector(y, self.space), J)

    def near_set(self, x, y, log2_delta: float, J: int):
        """Optional structural (key, near set); None means use the trace."""
        return None

    def describe(self) -> dict:
        return {"system": type(self).__name__, "mode": self.mode, "space": self.space}


class ShiftSystem(System):
    """Orbit T_j = S^j of one weighted shift."""

    def __init__(self, op: ShiftOperator, mode: str = "banach", M: int = FRECHET_M,
                 tail_dim: Optional[int] = None):
        if mode not in ("banach", "frechet"):
            raise InvalidParameter("mode must be banach or frechet")
        self.op, self.mode, self.M, self.tail_dim = op, mode, int(M), tail_dim
        self.space = op.space

    def trace(self, z: SequenceVector, J: int, j_values=None) -> OrbitTrace:
        return orbit(self.op, z, J, mode=self.mode, M=self.M, j_values=j_values, tail_dim=self.tail_dim)

    def log2_norms(self, z, J):
        tr = self.trace(z, J)
        if self.mode == "frechet":
            return _frechet_log2(tr.seminorms)
        return tr.log2_norm

    def log2_seminorm(self, z, J, m):
        if self.mode == "banach":
            return self.log2_norms(z, J)
        if m > self.M:
            raise InvalidParameter(f"seminorm index {m} exceeds M = {self.M}")
        return self.trace(z, J).seminorms[:, m - 1]

    def _e1_multiple(self, x, y) -> Optional[float]:
        """|c| when x - y = c e_1 under a block-weight forward shift, else None."""
        if self.mode != "banach" or self.op.direction != "forward" or not isinstance(self.op.weights, BlockWeights):
            return None
        z = _as_vector(x, self.space) - _as_vector(y, self.space)
        nz = np.nonzero(z.coords)[0]
        if nz.size == 1 and nz[0] == 0:
            return abs(float(z.coords[0]))
        return None

    def near_set(self, x, y, log2_delta, J):
        c = self._e1_multiple(x, y)
        if c is None:
            return None
        w = self.op.weights
        if J > w.horizon:
            raise TruncationTooShort(f"block weights known up to {w.horizon}, asked {J}")
        # c 2^beta(j) < 2^d  <=>  beta(j) < d - log2 c, beta integer
        level = math.ceil(float(log2_delta) - math.log2(c)) - 1
        windows = w.sublevel_windows(level, w.horizon)
        cap = w.horizon
        return ("level", level), BlockUnion(blocks=windows, cap=cap) if windows else Explicit([], cap=cap)

    def describe(self):
        d = super().describe()
        d.update(direction=self.op.direction, weights=self.op.weights.to_config())
        return d


class ScalarSystem(System):
    """T_j = c_j I on the scalar field, c_j = factor on A and 0 off A.

    ``factor`` is a constant or the string "index" (c_j = j).  Near and far
    sets are built structurally from A, so horizons up to the index cap are
    cheap.
    """

    space = "c0"

    def __init__(self, A: IndexSet, factor=2.0):
        if factor != "index" and float(factor) <= 0:
            raise InvalidParameter("factor must be positive or 'index'")
        self.A, self.factor = A, factor

    @staticmethod
    def _gap(x, y) -> float:
        return abs(float(_as_vector(x).coords[0]) - float(_as_vector(y).coords[0]))

    def log2_norms(self, z, J):
        j = np.arange(1, int(J) + 1, dtype=np.int64)
        a = abs(float(_as_vector(z).coords[0]))
        on = self.A.contains(j)
        with np.errstate(divide="ignore"):
            base = np.log2(j.astype(np.float64)) if self.factor == "index" else np.full(j.size, math.log2(self.factor))
            out = np.where(on, base + (math.log2(a) if a > 0 else -np.inf), -np.inf)
        return out

    def near_set(self, x, y, log2_delta, J):
        gap = self._gap(x, y)
        everything = Complement(Explicit([], cap=self.A.cap))
        if gap == 0:
            return ("all",), everything
        delta = Fraction(2) ** int(log2_delta) if float(log2_delta).is_integer() else Fraction(2.0**log2_delta)
        g = Fraction(gap)
        if self.factor != "index":
            if Fraction(self.factor) * g < delta:
                return ("all",), everything
            return ("offA",), Complement(self.A)
        # j * gap < delta  <=>  j <= t
        t = math.ceil(delta / g) - 1
        if t < 1:
            return ("offA",), Complement(self.A)
        t = min(t, self.A.cap)
        starts, ends = self.A.runs(1, t)
        if starts.size == 0:
            return ("offA",), Complement(self.A)
        head = BlockUnion(blocks=list(zip(starts.tolist(), ends.tolist())), cap=self.A.cap)
        return ("offA+", int(t)), Union(Complement(self.A), head)

    def describe(self):
        d = super().describe()
        d.update(factor=self.factor, A=self.A.to_config())
        return d


class ScheduledSystem(System):
    """T_j = T^j on S and 2^-j T on S^c, with T = w * backward shift on c0.

    Norms use the exact c0 identity ||T^j z|| = w^j sup_{n > j} |z_n| for the
    stored coordinates plus the vector's tail bound beyond them.
    """

    space = "c0"

    def __init__(self, S: IndexSet, w: float = 2.0):
        self.S, self.w = S, float(w)

    def _log2_tail_sup(self, z: SequenceVector, j: np.ndarray) -> np.ndarray:
        a = np.abs(z.coords)
        suffix = np.maximum.accumulate(a[::-1])[::-1]  # suffix[i] = sup_{n >= i+1} |z_n|
        beyond = z.tail_bound(z.dim) if z.tail_bound is not None else 0.0
        idx = j  # sup over n >= j + 1 starts at array index j
        inside = np.where(idx < z.dim, suffix[np.minimum(idx, z.dim - 1)], 0.0)
        val = np.maximum(inside, beyond)
        with np.errstate(divide="ignore"):
            return np.log2(val)

    def log2_norms(self, z, J):
        j = np.arange(1, int(J) + 1, dtype=np.int64)
        lw = math.log2(self.w)
        on = self.S.contains(j)
        full = j * lw + self._log2_tail_sup(z, j)
        single = -j.astype(np.float64) + lw + self._log2_tail_sup(z, np.ones_like(j))
        return np.where(on, full, single)

    def describe(self):
        d = super().describe()
        d.update(w=self.w, S=self.S.to_config())
        return d


class RdcSystem(System):
    """l^1 system with (T_j x)_1 = w_j x_j and (T_j x)_n = x_{j+n-1} for n >= 2.

    w_j = j^3 + 1 on B and 1 off B.
    """

    space = 1.0

    def __init__(self, B: IndexSet):
        self.B = B

    def log2_norms(self, z, J):
        j = np.arange(1, int(J) + 1, dtype=np.int64)
        a = np.abs(z.coords)
        if z.tail is not None:
            raise InvalidParameter("the rdc system needs a finitely supported vector")
        a = np.pad(a, (0, max(0, int(J) + 1 - a.size)))
        tails = np.concatenate((np.cumsum(a[::-1])[::-1], [0.0]))  # tails[i] = sum_{n >= i+1} |x_n|
        jf = j.astype(np.float64)
        w = np.where(self.B.contains(j), jf**3 + 1, 1.0)
        total = w * a[j - 1] + tails[j]
        with np.errstate(divide="ignore"):
            return np.log2(total)

    def describe(self):
        d = super().describe()
        d.update(B=self.B.to_config())
        return d


class ExplicitSystem(System):
    """Arbitrary linear maps j -> T_j given as a callable on coordinate arrays."""

    def __init__(self, maps: Callable[[int, np.ndarray], np.ndarray], space: Space = 2.0):
        self.maps, self.space = maps, space

    def log2_norms(self, z, J):
        out = np.empty(int(J))
        for j in range(1, int(J) + 1):
            v = np.abs(np.asarray(self.maps(j, z.coords), dtype=np.float64))
            with np.errstate(divide="ignore"):
                out[j - 1] = log2_norm(np.log2(v), self.space) if v.size else -np.inf
        return out


def rdc_system(B: Optional[IndexSet] = None) -> tuple[RdcSystem, Callable[[int], SequenceVector]]:
    """The rdc system with B = union of [4^k, 2*4^k] and its witness vector."""
    if B is None:
        B = BlockUnion(generator=lambda k: (4**k, 2 * 4**k), config={"kind": "paper", "name": "rdc_B"})
    system = RdcSystem(B)

    def vector(dim: int) -> SequenceVector:
        j = np.arange(1, dim + 1, dtype=np.int64)
        coords = np.where(B.contains(j), 1.0 / j.astype(np.float64) ** 2, 0.0)
        return SequenceVector(coords, 1.0, label="rdc")

    return system, vector


# ------------------------------------------------------------ pair profiles

FUNCTIONS = {"F": ("LowerM", "near"), "G": ("LowerM", "far"), "H": ("UpperM", "near"),
             "I": ("UpperM", "far"), "BF": ("BanachLowerLM", "near"), "BG": ("BanachLowerLM", "far"),
             "BI": ("BanachUpperL", "far")}
ORDINARY = ("F", "G", "H", "I")


def single_horizon(growth: GrowthSequence, J: int) -> int:
    """Largest n with floor(m_n) <= J."""
    return int(growth.inverse_ceil(np.array([int(J) + 1]))[0]) - 1


@dataclass
class PairProfile:
    J: int
    delta_log2: tuple
    growth: GrowthSequence
    near: dict  # log2 delta -> IndexSet
    far: dict
    near_counts: dict
    estimates: dict  # (function, log2 delta) -> DensityEstimate
    theta: float = THETA
    K: int = K_TAIL
    mode: str = "banach"
    lookback: bool = True
    all_zero: bool = False
    notes: list = field(default_factory=list)

    def get(self, fn: str, d) -> DensityEstimate:
        try:
            return self.estimates[(fn, d)]
        except KeyError:
            raise IncompleteProfile(f"profile lacks {fn} at log2 delta = {d}") from None

    def has(self, fn: str) -> bool:
        return all((fn, d) in self.estimates for d in self.delta_log2)

    @property
    def functions(self) -> list[str]:
        return [f for f in FUNCTIONS if self.has(f)]

    def to_dict(self) -> dict:
        return {"J": self.J, "delta_log2": list(self.delta_log2), "growth": self.growth.to_config(),
                "mode": self.mode, "theta": self.theta, "K": self.K, "lookback": self.lookback,
                "near_counts": {str(d): c for d, c in self.near_counts.items()},
                "estimates": {f"{fn}@{d}": est.to_dict() for (fn, d), est in self.estimates.items()},
                "notes": list(self.notes)}


def pair_profile(system: System, x, y, J: int, delta_grid: Sequence = DELTA_GRID,
                 functions: Sequence[str] = ORDINARY, growth: Optional[GrowthSequence] = None,
                 theta: float = THETA, K: int = K_TAIL, threads: Optional[int] = None,
                 lookback: bool = True) -> PairProfile:
    """Near/far sets and their density estimates at every threshold 2^d."""
    growth = growth or GrowthSequence.identity()
    J = int(J)
    grid = tuple(sorted(delta_grid))
    for fn in functions:
        if fn not in FUNCTIONS:
            raise InvalidParameter(f"unknown profile function {fn!r}")
    near, far, counts, keys = {}, {}, {}, {}
    structural = system.near_set(x, y, grid[0], J) is not None
    all_zero = False
    if structural:
        for d in grid:
            key, s = system.near_set(x, y, d, J)
            near[d], far[d] = s, Complement(s)
            counts[d] = int(s.count_upto(J))
            keys[d] = key
        z = _as_vector(x, system.space) - _as_vector(y, system.space)
        all_zero = not np.any(z.coords) and z.tail is None
    else:
        dist = system.log2_distances(x, y, J)
        all_zero = bool(np.all(dist == -np.inf))
        for d in grid:
            mask = dist < d
            idx = np.nonzero(mask)[0] + 1
            near[d] = Explicit(idx, cap=J)
            far[d] = Explicit(np.nonzero(~mask)[0] + 1, cap=J)
            counts[d] = int(idx.size)
            keys[d] = ("count", int(idx.size))
    for d in grid:
        if counts[d] + int(far[d].count_upto(J)) != J:
            raise AssertionError("near and far sets must partition [1, J]")
    n_single = single_horizon(growth, J)
    cache: dict = {}
    estimates = {}
    for fn in functions:
        tag, side = FUNCTIONS[fn]
        kind = DensityKind(tag, growth)
        for d in grid:
            ck = (tag, side, keys[d])
            if ck not in cache:
                target = near[d] if side == "near" else far[d]
                if kind.single:
                    sched = Schedule.single(n_single, lookback=lookback)
                    cache[ck] = estimate_density(target, kind, n_single, sched, theta, K, threads)
                else:
                    cache[ck] = estimate_density(target, kind, J, None, theta, K, threads)
            estimates[(fn, d)] = cache[ck]
    notes = []
    if system.mode == "frechet":
        notes.append("Fréchet mode: uniformity over scalar multiples is heuristic")
    if structural:
        notes.append("near/far sets built structurally from the system")
    return PairProfile(J, grid, growth, near, far, counts, estimates, theta, K, system.mode, lookback,
                       all_zero, notes)


# ------------------------------------------------------------ tri-state logic

def _and(*vals):
    if any(v is False for v in vals):
        return False
    if all(v is True for v in vals):
        return True
    return None


def _or(vals):
    vals = list(vals)
    if any(v is True for v in vals):
        return True
    if vals and all(v is False for v in vals):
        return False
    return None


def is_zero(est: DensityEstimate, lower_bound_only: bool = False):
    """True/False/None for 'the density is 0'."""
    v = est.verdict
    if v.status == "TendsToZero":
        return None if lower_bound_only else True
    if v.status == "DivergesToInfinity":
        return False
    if v.status == "ConvergesTo":
        return False if v.value >= est.verdict.theta else None
    return None


def is_positive(est: DensityEstimate):
    v = est.verdict
    if v.status == "DivergesToInfinity":
        return True
    if v.status == "ConvergesTo":
        return True if v.value >= v.theta else None
    if v.status == "TendsToZero":
        return None if est.kind.lower_bound_only else False
    return None


def _value(est: DensityEstimate) -> Optional[float]:
    v = est.verdict
    if v.status == "TendsToZero":
        return 0.0
    if v.status == "ConvergesTo":
        return v.value
    if v.status == "DivergesToInfinity":
        return math.inf
    return None


@dataclass
class TypeVerdict:
    status: str
    witness: dict = field(default_factory=dict)
    reason: str = ""

    def to_dict(self) -> dict:
        d = {"status": self.status}
        if self.witness:
            d["witness"] = self.witness
        if self.reason:
            d["reason"] = self.reason
        return d


@dataclass
class ChaosVerdict:
    verdicts: dict
    horizon: int
    schedule: dict
    notes: list = field(default_factory=list)

    def __getitem__(self, key: str) -> TypeVerdict:
        return self.verdicts[key]

    def to_dict(self) -> dict:
        return {"horizon": self.horizon, "schedule": self.schedule, "notes": list(self.notes),
                "verdicts": {k: v.to_dict() for k, v in self.verdicts.items()}}


PAIR_TYPES = ("DC-type-1", "DC1", "DC2", "DC2.5", "DC3", "DC2Bd", "DC2Bd+",
              "R0", "R1", "R1+", "R1^+", "R2", "R2+", "R2Bd", "R2Bd+", "R2-", "LiYorke")
_NEEDS = {"DC-type-1": "FG", "DC1": "FG", "DC2": "GI", "DC2.5": "FH", "DC3": "FH", "DC2Bd": ("G", "BI"),
          "DC2Bd+": ("G", "BI"), "R0": ("BF", "BG"), "R1": ("BF", "G"), "R1+": ("BF", "G"),
          "R1^+": ("BF", "G"), "R2": ("BG", "I"), "R2+": ("BG", "I"), "R2Bd": ("BG", "BI"),
          "R2Bd+": ("BG", "BI"), "R2-": ("F", "BG"), "LiYorke": ("H", "I")}


class _Classifier:
    def __init__(self, p: PairProfile):
        self.p = p
        self.grid = p.delta_log2
        self.tol = 1e-3

    def st(self, fn, d):
        return self.p.get(fn, d).verdict.status

    def zero(self, fn, d):
        return is_zero(self.p.get(fn, d), self.p.get(fn, d).kind.lower_bound_only)

    def pos(self, fn, d):
        val = is_positive(self.p.get(fn, d))
        if val is None and fn == "I" and self.p.has("F"):
            # lower m-density of the near set zero forces the far set's upper m-density >= liminf m_n/n > 0
            if self.zero("F", d) is True:
                return True
        return val

    def identically_zero(self, fn):
        vals = [self.zero(fn, d) for d in self.grid]
        res = _and(*vals)
        wit = {f"{fn}@{d}": self.st(fn, d) for d in self.grid}
        return res, wit

    def exists(self, pred, uniform: bool):
        """Some grid sigma with pred(sigma) (for all delta >= sigma when uniform)."""
        results = []
        best = None
        for i, d in enumerate(self.grid):
            if uniform:
                r = _and(*[pred(e) for e in self.grid[i:]])
            else:
                r = pred(d)
            results.append(r)
            if r is True and best is None:
                best = d
        return _or(results), best

    def sandwich(self, deltas):
        """Some c with F(d) < c < H(d) for all d in ``deltas``."""
        fv = [_value(self.p.get("F", d)) for d in deltas]
        hv = [_value(self.p.get("H", d)) for d in deltas]
        if any(v is None for v in fv + hv):
            # a refutation is still possible from converged values alone
            known = [(f, h) for f, h in zip(fv, hv) if f is not None and h is not None]
            if known and max(f for f, _ in known) >= min(h for _, h in known) + self.tol:
                return False, None
            return None, None
        lo, hi = max(fv), min(hv)
        if lo + self.tol < hi - self.tol:
            c = (lo + hi) / 2 if math.isfinite(hi) else lo + 1.0
            return True, c
        if lo >= hi:
            return False, None
        return None, None


def classify_pair(profile: PairProfile, types: Optional[Sequence[str]] = None) -> ChaosVerdict:
    """Classify one pair against the chaos taxonomy at the profile's horizon.

    Uniform-sigma types (DC1, R0, R1^+, R2-, R2+, the +-variants) are checked
    over scalar multiples of the pair, which in Banach mode reduces to the
    condition holding at every grid threshold above sigma.  Without
    ``types`` every type the profile has data for is classified.
    """
    if types is None:
        types = [t for t in PAIR_TYPES if all(profile.has(fn) for fn in _NEEDS[t])]
    types = list(types)
    for t in types:
        if t not in _NEEDS:
            raise InvalidParameter(f"unknown chaos type {t!r}")
        for fn in _NEEDS[t]:
            if not profile.has(fn):
                raise IncompleteProfile(f"type {t} needs {fn} in the profile")
    c = _Classifier(profile)
    out = {}
    cache = {}

    def G0():
        if "G0" not in cache:
            cache["G0"] = c.identically_zero("G")
        return cache["G0"]

    def BG0():
        if "BG0" not in cache:
            cache["BG0"] = c.identically_zero("BG")
        return cache["BG0"]

    def verdict(res, witness: dict, failing: str) -> TypeVerdict:
        if res is True:
            return TypeVerdict(SATISFIED, witness)
        if res is False:
            return TypeVerdict(REFUTED, witness, failing)
        return TypeVerdict(INCONCLUSIVE, witness, "a needed density verdict is Inconclusive")

    g = profile.growth
    if g.is_identity and g.scale == 1.0:
        liminf_ratio = 1.0
    elif g.rule == "power" and g.exponent > 1.0:
        liminf_ratio = math.inf
    else:
        liminf_ratio = g.liminf_ratio(min(single_horizon(g, profile.J), 2**20))

    for t in types:
        if t in ("DC-type-1", "DC1"):
            g, gw = G0()
            f, s = c.exists(lambda d: c.zero("F", d), uniform=(t == "DC1"))
            out[t] = verdict(_and(g, f), {"G_identically_zero": g, "sigma_log2": s},
                             "G is not identically zero" if g is False else "no sigma with F(sigma) = 0")
        elif t in ("DC2", "DC2Bd", "DC2Bd+", "R2", "R2+", "R2Bd", "R2Bd+"):
            base, bw = (BG0() if t.startswith("R") else G0())
            fn = "BI" if "Bd" in t else "I"
            f, s = c.exists(lambda d: c.pos(fn, d), uniform=t.endswith("+"))
            out[t] = verdict(_and(base, f), {"base_identically_zero": base, "sigma_log2": s},
                             "base density not identically zero" if base is False else f"no sigma with {fn}(sigma) > 0")
        elif t == "DC2.5":
            res, wit = [], None
            for k in range(1, len(c.grid) + 1):
                r, cc = c.sandwich(c.grid[:k])
                res.append(r)
                if r is True and wit is None:
                    wit = {"c": cc, "r_log2": c.grid[k - 1]}
            out[t] = verdict(_or(res), wit or {}, "no c separates F and H near zero")
        elif t == "DC3":
            res, wit = [], None
            for k in range(len(c.grid) - 1):
                r, cc = c.sandwich(c.grid[k:k + 2])
                res.append(r)
                if r is True and wit is None:
                    wit = {"c": cc, "a_log2": c.grid[k], "b_log2": c.grid[k + 1]}
            out[t] = verdict(_or(res), wit or {}, "no interval where c separates F and H")
        elif t in ("R0", "R1^+", "R2-"):
            first = "F" if t == "R2-" else "BF"
            f, s = c.exists(lambda d: c.zero(first, d), uniform=True)
            base, _ = BG0() if t in ("R0", "R2-") else G0()
            out[t] = verdict(_and(f, base), {"sigma_log2": s, "base_identically_zero": base},
                             f"no uniform sigma with {first}(sigma) = 0" if f is False else "base density not zero")
        elif t in ("R1", "R1+"):
            f, s = c.exists(lambda d: c.zero("BF", d), uniform=False)
            if t == "R1+":
                g, _ = G0()
                wit = {"sigma_log2": s, "G_identically_zero": g}
            else:
                res = []
                for k in range(1, len(c.grid) + 1):
                    vals = [_value(profile.get("G", d)) for d in c.grid[:k]]
                    if any(v is None for v in vals):
                        res.append(None)
                    else:
                        res.append(max(vals) + c.tol < liminf_ratio)
                g = _or(res)
                wit = {"sigma_log2": s, "liminf_m_over_n": liminf_ratio if math.isfinite(liminf_ratio) else "inf"}
            out[t] = verdict(_and(f, g), wit, "no sigma with BF(sigma) = 0" if f is False else "G bound fails")
        elif t == "LiYorke":
            if profile.all_zero:
                out[t] = TypeVerdict(REFUTED, {}, "all distances vanish")
                continue
            near_small = c.pos("H", c.grid[0])
            f, s = c.exists(lambda d: c.pos("I", d), uniform=False)
            res = _and(near_small, f)
            out[t] = TypeVerdict(SATISFIED, {"sigma_log2": s}) if res is True else \
                TypeVerdict(INCONCLUSIVE, {}, "finite traces cannot refute Li-Yorke pairs")
    # implication consistency: a satisfied DC1/DC-type-1 shares G with DC2
    for strong in ("DC1", "DC-type-1"):
        if strong in out and "DC2" in out and out[strong].status == SATISFIED and out["DC2"].status == REFUTED:
            out["DC2"] = TypeVerdict(INCONCLUSIVE, out["DC2"].witness, f"conflicts with {strong}")
    if profile.all_zero:
        for t, v in out.items():
            if t != "LiYorke" and v.status != REFUTED:
                out[t] = TypeVerdict(REFUTED, v.witness, "all distances vanish")
    sched = {"J": profile.J, "single_horizon": single_horizon(profile.growth, profile.J),
             "lookback": profile.lookback, "growth": profile.growth.to_config()}
    return ChaosVerdict(out, profile.J, sched, list(profile.notes))


# --------------------------------------------------------- vector classes

@dataclass
class Flag:
    status: str
    witness: Optional[IndexSet] = None
    estimate: Optional[DensityEstimate] = None
    level_log2: Optional[float] = None
    deepest_log2: Optional[float] = None
    reason: str = ""

    def to_dict(self, preview: int = 0) -> dict:
        d = {"status": self.status}
        if self.level_log2 is not None:
            d["level_log2"] = self.level_log2
        if self.deepest_log2 is not None:
            d["deepest_level_log2"] = self.deepest_log2
        if self.estimate is not None:
            d["complement_density"] = self.estimate.verdict.to_dict()
        if self.witness is not None and preview:
            d["witness_head"] = self.witness.members(1, self.witness.cap, limit=preview).tolist()
        if self.reason:
            d["reason"] = self.reason
        return d


@dataclass
class VectorClass:
    flags: dict
    horizon: int
    growth: GrowthSequence
    notes: list = field(default_factory=list)

    def __getitem__(self, key: str) -> Flag:
        return self.flags[key]

    def to_dict(self, preview: int = 0) -> dict:
        return {"horizon": self.horizon, "growth": self.growth.to_config(), "notes": list(self.notes),
                "flags": {k: v.to_dict(preview) for k, v in self.flags.items()}}


def _flag_from(res, witness=None, est=None, level=None, deepest=None, reason="") -> Flag:
    status = SATISFIED if res is True else REFUTED if res is False else INCONCLUSIVE
    return Flag(status, witness, est, level, deepest, reason if status != SATISFIED else "")


def _witness_search(trace: np.ndarray, J: int, levels: Sequence[float], below: bool, tag: str,
                    growth: GrowthSequence, theta: float, K: int, lookback: bool):
    """Try witness sets {trace < level} (below) or {trace > level} on a ladder."""
    first, deepest = None, None
    last = None
    for lv in levels:
        mask = trace < lv if below else trace > lv
        W = Explicit(np.nonzero(mask)[0] + 1, cap=J)
        comp = Complement(W)
        kind = DensityKind(tag, growth)
        if kind.single:
            n = single_horizon(growth, J)
            est = estimate_density(comp, kind, n, Schedule.single(n, lookback=lookback), theta, K)
        else:
            est = estimate_density(comp, kind, J, None, theta, K)
        z = is_zero(est)
        enough = int(mask.sum()) > K
        res = _and(z, enough if z is True else None) if z is not False else False
        if last is None:
            last = (res, W, est, lv)
        if res is True:
            if first is None:
                first = (res, W, est, lv)
            deepest = lv
        else:
            break
    if first is not None:
        return _flag_from(True, first[1], first[2], first[3], deepest)
    res, W, est, lv = last
    return _flag_from(res, W, est, lv, None, "complement density of the witness is not zero")


def classify_vector(system: System, x, J: int, growth: Optional[GrowthSequence] = None,
                    m: int = 1, theta: float = THETA, K: int = K_TAIL, reiterative: bool = True,
                    lookback: bool = True) -> VectorClass:
    """Search sublevel/superlevel witness sets of the orbit trace.

    Near-to-zero uses A = {j : ||T_j x|| < theta * 2^-10k}, unboundedness
    uses B = {j : p_m(T_j x) > 2^10k / theta} for k = 0, 1, 2; a flag holds
    when the witness's complement has density verdict TendsToZero.
    """
    growth = growth or GrowthSequence.identity()
    x = _as_vector(x, system.space)
    J = int(J)
    norms = system.log2_norms(x, J)
    semi = system.log2_seminorm(x, J, m) if system.mode == "frechet" else norms
    lt = math.log2(theta)
    low = [lt - 10 * k for k in range(3)]
    high = [-lt + 10 * k for k in range(3)]
    flags = {}
    args = (growth, theta, K, lookback)
    flags["dist_near_zero"] = _witness_search(norms, J, low, True, "LowerM", *args)
    flags["dist_unbounded"] = _witness_search(semi, J, high, False, "LowerM", *args)
    if reiterative:
        flags["reit_near_zero"] = _witness_search(norms, J, low, True, "BanachLowerLM", *args)
        flags["reit_unbounded"] = _witness_search(semi, J, high, False, "BanachLowerLM", *args)

    def both(a, b, why):
        st = {SATISFIED: True, REFUTED: False, INCONCLUSIVE: None}
        return _flag_from(_and(st[flags[a].status], st[flags[b].status]), reason=why)

    flags["irregular"] = both("dist_near_zero", "dist_unbounded", "needs near-to-zero and unbounded")
    if reiterative:
        flags["reit_type0"] = both("reit_near_zero", "reit_unbounded", "needs both reiterative flags")
        flags["reit_type1^+"] = both("dist_near_zero", "reit_unbounded", "needs near-to-zero and reiterative unboundedness")
        flags["reit_type2-"] = both("reit_near_zero", "dist_unbounded", "needs reiterative near-to-zero and unboundedness")
    small = int(np.sum(norms < lt))
    big = int(np.sum(semi > -lt))
    if small > K and big > K:
        flags["LiYorke_irregular"] = Flag(SATISFIED)
    elif np.all(np.isfinite(norms)) and (np.ptp(norms) == 0 if norms.size else True):
        flags["LiYorke_irregular"] = Flag(REFUTED, reason="orbit norm is constant")
    else:
        flags["LiYorke_irregular"] = Flag(INCONCLUSIVE, reason="needs more than K small and K large values")
    notes = []
    if system.mode == "frechet":
        notes.append(f"unboundedness measured with seminorm p_{m}")
    return VectorClass(flags, J, growth, notes)


# ---------------------------------------------------------------- DCC check

@dataclass
class DCCReport:
    ok: bool
    clauses: dict
    per_k: list

    def to_dict(self) -> dict:
        return {"ok": self.ok, "clauses": self.clauses, "per_k": self.per_k}


def dcc_check(op: ShiftOperator, eps: float, B: IndexSet, x_list: Sequence[SequenceVector],
              y_list: Sequence[SequenceVector], N_list: Sequence[int], growth: Optional[GrowthSequence] = None,
              combos: Optional[Sequence[dict]] = None, density_horizon: Optional[int] = None,
              trace_horizon: int = 2**16, theta: float = THETA, K: int = K_TAIL, tol: float = 1e-12) -> DCCReport:
    """Verify a DCC witness package for one operator clause by clause.

    Block-weight forward shifts with basis-multiple witnesses are checked in
    exact integer arithmetic over the whole block structure; other operators
    fall back to orbit traces up to ``trace_horizon``.
    """
    growth = growth or GrowthSequence.identity()
    if not eps > 0:
        raise WitnessRejected("clause eps: eps must be positive")
    if not (len(x_list) == len(y_list) == len(N_list)) or not x_list:
        raise WitnessRejected("clause data: x_k, y_k and N_k lists must be nonempty and equally long")
    if any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise WitnessRejected("clause data: N_k must be strictly increasing")
    combos = combos or [{k + 1: 1.0} for k in range(len(x_list))]
    clauses = {}
    exact = op.direction == "forward" and isinstance(op.weights, BlockWeights)

    def e1_scale(v: SequenceVector):
        nz = np.nonzero(v.coords)[0]
        if v.tail is None and nz.size == 1 and nz[0] == 0:
            return abs(float(v.coords[0]))
        return None

    # density of B^c
    Bc = Complement(B)
    hor = int(density_horizon or min(B.cap, 2**62))
    n = single_horizon(growth, hor)
    est = estimate_density(Bc, DensityKind("LowerM", growth), n, Schedule.single(n, lookback=True), theta, K)
    clauses["density_Bc"] = {"ok": est.verdict.status == "TendsToZero", "verdict": est.verdict.to_dict()}

    # T^n x_k -> 0 along B
    conv = []
    for k, xk in enumerate(x_list, start=1):
        c = e1_scale(xk)
        if exact and c is not None:
            starts, ends = B.runs(1, hor) if not isinstance(B, BlockUnion) else B.blocks_upto(hor)
            tops = [op.weights.max_beta(int(a), int(b)) for a, b in zip(starts.tolist(), ends.tolist())
                    if b <= op.weights.positions[-1]]
            worst = max(tops) + math.log2(c) if tops else -math.inf
            # beyond the K-th element of B every norm must sit below theta
            conv.append({"k": k, "ok": worst < math.log2(theta), "max_log2_norm_on_B": worst})
        else:
            tr = orbit(op, xk, trace_horizon).log2_norm
            members = B.members(1, trace_horizon)
            vals = tr[members - 1][K:]
            conv.append({"k": k, "ok": bool(vals.size) and bool(np.all(vals < math.log2(theta))),
                         "max_log2_norm_on_B": float(vals.max()) if vals.size else None})
    clauses["convergence_on_B"] = {"ok": all(c["ok"] for c in conv), "per_k": conv}

    # y_k in the span of the x_n
    span_ok = []
    for k, (yk, combo) in enumerate(zip(y_list, combos), start=1):
        acc = SequenceVector(np.zeros(1), yk.space)
        for idx, coef in combo.items():
            acc = acc + x_list[idx - 1].scale(coef)
        diff = (yk - acc).coords
        span_ok.append(bool(np.all(np.abs(diff) <= tol)))
    clauses["y_in_span"] = {"ok": all(span_ok), "per_k": span_ok}

    # counting inequality, exact per k
    per_k = []
    le = math.log2(eps)
    for k, (yk, Nk) in enumerate(zip(y_list, N_list), start=1):
        M = int(growth.floor(np.array([Nk]))[0])
        c = e1_scale(yk)
        if exact and c is not None:
            # ||T^j y_k|| = c 2^beta(j) > eps  <=>  beta(j) > log2(eps / c)
            level = le - math.log2(c)
            if not float(level).is_integer():
                level = math.floor(level)
            low = op.weights.count_sublevel(int(level), M)
            big = M - low
        else:
            tr = orbit(op, yk, M).log2_norm
            big = int(np.sum(tr > le))
        lhs = M - big
        ok = Fraction(lhs) <= Fraction(int(Nk), k)
        per_k.append({"k": k, "N_k": int(Nk), "m_N_k": M, "lhs": lhs, "rhs": str(Fraction(int(Nk), k)), "ok": ok})
    clauses["counting"] = {"ok": all(r["ok"] for r in per_k)}
    ok = all(v["ok"] for v in clauses.values())
    return DCCReport(ok, clauses, per_k)


# ------------------------------------------------------- series criteria

def _series_verdict(log2_terms: np.ndarray, tail_target: float = 1e-6) -> dict:
    """Convergence evidence for sum 2^terms from ratio and power-law tail fits."""
    t = np.asarray(log2_terms, dtype=np.float64)
    t = t[np.isfinite(t)]
    if t.size < 8:
        return {"status": INCONCLUSIVE, "reason": "too few terms"}
    partial = float(log2_sum(t))
    h = t[t.size // 2:]
    ratios = np.diff(h)
    k = np.arange(t.size // 2 + 1, t.size + 1, dtype=np.float64)
    if np.all(ratios < 0) and ratios[-1] <= ratios[0] + 1e-12 and ratios[-1] < -1e-3:
        r = 2.0 ** ratios[-1]
        tail = float(2.0 ** h[-1] * r / (1 - r))
        return {"status": "converges", "test": "ratio", "log2_partial_sum": partial, "tail_bound": tail,
                "tail_below_target": bool(tail < tail_target)}
    slope = float(np.polyfit(np.log2(k), h, 1)[0])
    if slope < -1.05:
        tail = float(2.0 ** h[-1] * k[-1] / (-slope - 1))
        return {"status": "converges", "test": "power", "slope": slope, "log2_partial_sum": partial,
                "tail_bound": tail, "tail_below_target": bool(tail < tail_target)}
    if slope >= -1.0:
        return {"status": "diverges", "test": "power", "slope": slope, "log2_partial_sum": partial}
    return {"status": INCONCLUSIVE, "slope": slope, "log2_partial_sum": partial}


@dataclass
class CriterionReport:
    satisfied: Optional[bool]
    details: dict

    @property
    def status(self) -> str:
        return SATISFIED if self.satisfied is True else REFUTED if self.satisfied is False else INCONCLUSIVE

    def to_dict(self) -> dict:
        return {"status": self.status, **self.details}


def rikardinjo_criterion(weights, a: Callable[[np.ndarray], np.ndarray] | float = 1.0, K: int = 64,
                         N: int = 10**5, space: Space = 1.0) -> CriterionReport:
    """Scan lower bounds for B_k = sup_n a_{k+n} w_n...w_{n+k-1}, then test sum 1/B_k^e.

    The exponent e is 2 on l^2 and 1 otherwise.
    """
    a_fn = (lambda n: np.full(np.shape(n), float(a))) if not callable(a) else a
    n = np.arange(1, int(N) + 1, dtype=np.int64)
    logB = np.empty(int(K))
    arg = np.empty(int(K), dtype=np.int64)
    for k in range(1, int(K) + 1):
        with np.errstate(divide="ignore"):
            la = np.log2(np.asarray(a_fn(n + k), dtype=np.float64))
        vals = la + weights.window_log2(n, k)
        i = int(np.argmax(vals))
        logB[k - 1], arg[k - 1] = vals[i], n[i]
    e = 2.0 if space == 2 or space == 2.0 else 1.0
    terms = -e * logB
    ver = _series_verdict(terms)
    sat = True if ver["status"] == "converges" else False if ver["status"] == "diverges" else None
    stable = bool(np.all(arg[-min(8, K):] < N))
    details = {"exponent": e, "log2_B_lower": logB.tolist(), "argmax_n": arg.tolist(), "series": ver,
               "note": "B_k values are scan lower bounds over n <= N",
               "scan_stable": stable,
               "message": "criterion satisfied (numerically indicated)" if sat else "criterion not satisfied"}
    return CriterionReport(sat, details)


def series_criterion(weights, S: IndexSet, growth: Optional[GrowthSequence] = None, space: Space = 1.0,
                     horizon: int = 10**6, theta: float = THETA, K: int = K_TAIL) -> CriterionReport:
    """Summability of sum_{n in S} (w_1...w_n)^-1 e_n plus d_m(S^c) = 0."""
    growth = growth or GrowthSequence.identity()
    members = S.members(1, int(horizon))
    logs = -np.asarray(weights.beta_log(members), dtype=np.float64)
    if space == "c0":
        tail = logs[-max(K, members.size // 2):] if members.size else logs
        ok = bool(tail.size) and bool(np.all(tail < math.log2(theta))) and tail[-1] <= tail[0]
        bad = bool(tail.size) and bool(np.all(tail >= math.log2(theta)))
        series = {"status": "converges" if ok else "diverges" if bad else INCONCLUSIVE,
                  "test": "coordinates tend to zero"}
    else:
        series = _series_verdict(float(space) * logs)
    n = single_horizon(growth, int(horizon))
    est = estimate_density(Complement(S), DensityKind("LowerM", growth), n, Schedule.single(n), theta, K)
    z = is_zero(est)
    conv = True if series["status"] == "converges" else False if series["status"] == "diverges" else None
    sat = _and(conv, z)
    details = {"series": series, "density_Sc": est.verdict.to_dict(),
               "failing": [] if sat else [c for c, v in (("series", conv), ("density", z)) if v is False]}
    return CriterionReport(sat, details)


# ---------------------------------------------------------- propa bound

def propa_bound_check(norm_T: float, growth: GrowthSequence, trace: OrbitTrace, n_k: Sequence[int]) -> dict:
    """Evaluate (1/m)[m - n + n ||T||^n] <= 2 and the trace's Cesàro mean at m = m_{n_k}."""
    if norm_T <= 0:
        raise InvalidParameter("operator norm bound must be positive")
    lt = math.log2(norm_T)
    top = max(int(v) for v in n_k)
    ns = np.arange(1, top + 1, dtype=np.int64)
    m_log = np.log2(growth.values(ns).astype(np.float64))
    need = np.log2(ns.astype(np.float64)) + ns * lt
    bad = np.nonzero(m_log < need - 1e-12)[0]
    if bad.size:
        n0 = int(ns[bad[0]])
        raise HypothesisViolated(f"m_n >= n ||T||^n fails at n = {n0}")
    rows = []
    for nk in n_k:
        m = int(growth.floor(np.array([nk]))[0])
        bound_log = float(np.logaddexp2(math.log2(max(m - nk, 0)) if m > nk else -math.inf,
                                        math.log2(nk) + nk * lt)) - math.log2(m)
        row = {"n_k": int(nk), "m": m, "log2_bound": bound_log, "bound_le_2": bound_log <= 1 + 1e-12}
        if trace.dense and trace.J >= m:
            mean = float(log2_sum(trace.log2_norm[:m]) - math.log2(m))
            row["log2_cesaro_mean"] = mean
            row["mean_le_bound"] = mean <= bound_log + 1e-12
        rows.append(row)
    return {"hypothesis": "m_n >= n ||T||^n holds on the sampled range", "rows": rows,
            "ok": all(r["bound_le_2"] and r.get("mean_le_bound", True) for r in rows)}


# ------------------------------------------------------- scrambled vectors

@dataclass
class ScrambledVector:
    vector: SequenceVector
    used: list
    certificate: dict


def build_scrambled_vector(x_list: Sequence[SequenceVector], r: Sequence[int], beta: Sequence[int],
                           growth: Optional[GrowthSequence] = None, j_seq: Optional[Sequence[int]] = None,
                           seminorm: Optional[Callable[[np.ndarray, int], float]] = None,
                           rel_cutoff: float = 1e-15) -> ScrambledVector:
    """x_beta = sum_q beta_{r_q} x_{r_q} / 2^{r_q}, truncated at a relative cutoff.

    With ``growth`` and ``j_seq`` the spacing r_{q+1} >= 1 + r_q + m_{j_{r_q + 1}}
    is verified (``j_seq[k-1]`` is j_k).
    """
    r = [int(v) for v in r]
    if any(b <= a for a, b in zip(r, r[1:])) or not r or r[0] < 1:
        raise InvalidParameter("r must be a strictly increasing list of positive integers")
    p = seminorm or prefix_seminorm(x_list[0].space if x_list else 2.0)
    for k, xk in enumerate(x_list, start=1):
        if p(xk.coords, k) > 1 + 1e-12:
            raise InvalidParameter(f"p_{k}(x_{k}) exceeds 1")
    spacing = []
    if growth is not None and j_seq is not None:
        for a, b in zip(r, r[1:]):
            if a + 1 > len(j_seq):
                raise SpacingRejected(f"no j data for index {a + 1}")
            need = 1 + a + int(growth.floor(np.array([j_seq[a]]))[0])
            spacing.append({"r_q": a, "r_next": b, "required": need, "ok": b >= need})
            if b < need:
                raise SpacingRejected(f"r_(q+1) = {b} < 1 + r_q + m_(j_(r_q + 1)) = {need}")
    mask = list(beta)
    used = []
    dim = 1
    for q, rq in enumerate(r):
        if rq > len(x_list):
            break
        if 2.0 ** -(rq - r[0]) < rel_cutoff:
            break
        if mask[rq - 1] if rq - 1 < len(mask) else 0:
            used.append(rq)
            dim = max(dim, x_list[rq - 1].dim)
    coords = np.zeros(dim)
    for rq in used:
        xv = x_list[rq - 1].coords
        coords[: xv.size] += xv / 2.0**rq
    space = x_list[0].space if x_list else 2.0
    cert = {"r": r, "used": used, "spacing": spacing, "p_k_bounds_ok": True}
    return ScrambledVector(SequenceVector(coords, space, label="x_beta"), used, cert)
