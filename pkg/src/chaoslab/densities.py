"""Finite-horizon estimators for ordinary, (m_n)- and Banach-type densities.

Single-limit kinds sample the exact ratio |A ∩ [1, floor(m_n)]| / n.
Double-limit kinds sample, for each scheduled window scale s, the exact
extremum over a declared n-range of |A ∩ [n+1, n+floor(m_s)]| / s.  The
extremum is found from the set's change points, so it is exact over the
range and never a sub-sample.
"""
from __future__ import annotations

import math
import warnings as _warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import HorizonExceeded, InvalidParameter
from .index_sets import Complement, IndexSet, MonotoneFormula

THETA = 1e-3
K_TAIL = 5
INF_MARK = 1e6
CONVERGE_TOL = 1e-3
DENSE_LIMIT = 2**22
CHUNK = 2**21


RATIO_POINTS = 2**20


def _ratio_points(lo: int, hi: int) -> np.ndarray:
    """Every n in [lo, hi] when that is at most RATIO_POINTS values, else a
    dense head plus a geometric grid."""
    if hi - lo < RATIO_POINTS:
        return np.arange(lo, hi + 1, dtype=np.float64)
    head = np.arange(lo, lo + RATIO_POINTS // 2, dtype=np.float64)
    geo = np.unique(np.round(np.geomspace(lo, hi, RATIO_POINTS // 2)))
    return np.union1d(head, geo)


@dataclass(frozen=True)
class GrowthSequence:
    """Nondecreasing scale (m_n) with m_1 >= 1.

    rule is one of identity, power (exponent = 1/lambda), logscale
    (m_n = 2^(a n^b)), table, formula.  ``scale`` multiplies every term.
    """

    rule: str = "identity"
    exponent: float = 1.0
    a: float = 1.0
    b: float = 0.5
    table: Optional[tuple] = None
    fn: Optional[Callable] = field(default=None, compare=False)
    scale: float = 1.0

    @classmethod
    def identity(cls) -> "GrowthSequence":
        return cls("identity")

    @classmethod
    def power(cls, q: float) -> "GrowthSequence":
        if q < 1:
            raise InvalidParameter(f"power growth needs exponent >= 1, got {q}")
        return cls("power", exponent=float(q))

    @classmethod
    def from_lambda(cls, lam: float) -> "GrowthSequence":
        if not 0 < lam <= 1:
            raise InvalidParameter(f"lambda must lie in (0, 1], got {lam}")
        return cls.power(1.0 / lam)

    @classmethod
    def logscale(cls, a: float, b: float) -> "GrowthSequence":
        if a <= 0 or not 0 < b < 1:
            raise InvalidParameter("logscale growth needs a > 0 and b in (0, 1)")
        return cls("logscale", a=float(a), b=float(b))

    def scaled(self, c: float) -> "GrowthSequence":
        if c <= 0:
            raise InvalidParameter("scale factor must be positive")
        return GrowthSequence(self.rule, self.exponent, self.a, self.b, self.table, self.fn, self.scale * c)

    @property
    def is_identity(self) -> bool:
        return self.rule == "identity" or (self.rule == "power" and self.exponent == 1.0)

    def values(self, n) -> np.ndarray:
        n = np.asarray(n, dtype=np.float64)
        if self.rule == "identity":
            out = n
        elif self.rule == "power":
            out = np.power(n, self.exponent)
        elif self.rule == "logscale":
            out = np.exp2(self.a * np.power(n, self.b))
        elif self.rule == "table":
            tab = np.asarray(self.table, dtype=np.float64)
            out = tab[np.asarray(n, dtype=np.int64) - 1]
        elif self.rule == "formula":
            out = np.asarray(self.fn(n), dtype=np.float64)
        else:
            raise InvalidParameter(f"unknown growth rule {self.rule!r}")
        return out * self.scale

    def floor(self, n) -> np.ndarray:
        """floor(m_n) as int64, exact for identity and integer powers."""
        n_int = np.asarray(n, dtype=np.int64)
        if self.scale == 1.0:
            if self.rule == "identity":
                return n_int.copy()
            if self.rule == "power" and self.exponent.is_integer():
                q = int(self.exponent)
                if n_int.size and float(np.max(n_int)) ** q >= 2.0**63:
                    raise HorizonExceeded("floor(m_n) exceeds the 64-bit index range")
                return n_int**q
        vals = self.values(n_int)
        if np.any(vals >= 2.0**63):
            raise HorizonExceeded("floor(m_n) exceeds the 64-bit index range")
        return np.floor(vals).astype(np.int64)

    def _floor_saturating(self, n: np.ndarray) -> np.ndarray:
        """floor(m_n), with terms past the 64-bit range reported as 2^63 - 1."""
        big = self.values(n) >= 2.0**63
        out = self.floor(np.where(big, 1, n))
        return np.where(big, np.int64(2**63 - 1), out)

    def inverse_ceil(self, x) -> np.ndarray:
        """Smallest n >= 1 with floor(m_n) >= x, by vectorised bisection."""
        x = np.asarray(x, dtype=np.int64)
        if self.rule == "identity" and self.scale == 1.0:
            return np.maximum(x, 1)
        top = np.int64(2**63 - 1)
        f = self._floor_saturating
        lo = np.ones_like(x)
        hi = np.ones_like(x)
        short = f(hi) < x
        while short.any():
            if np.any(short & (hi == top)):
                raise HorizonExceeded("no index n in the 64-bit range reaches the requested m_n")
            hi = np.where(short, np.where(hi >= 2**62, top, hi * 2), hi)
            short = f(hi) < x
        while True:
            open_ = lo < hi
            if not open_.any():
                return lo
            mid = lo + (hi - lo) // 2
            ok = f(mid) >= x
            hi = np.where(open_ & ok, mid, hi)
            lo = np.where(open_ & ~ok, mid + 1, lo)

    def class_r_diagnostic(self, N: int) -> float:
        """min over n <= N of m_n / n (sampled geometrically past 2^20 points)."""
        n = _ratio_points(1, int(N))
        return float(np.min(self.values(n) / n))

    def liminf_ratio(self, N: int) -> float:
        """Tail estimate of liminf m_n / n (min over [N/2, N])."""
        n = _ratio_points(max(1, int(N) // 2), int(N))
        return float(np.min(self.values(n) / n))

    def to_config(self) -> dict:
        d = {"rule": self.rule}
        if self.rule == "power":
            d["exponent"] = self.exponent
        if self.rule == "logscale":
            d.update(a=self.a, b=self.b)
        if self.rule == "table":
            d["table"] = list(self.table)
        if self.scale != 1.0:
            d["scale"] = self.scale
        return d


SINGLE_KINDS = ("LowerD", "UpperD", "LowerM", "UpperM")
DOUBLE_KINDS = ("BanachLower", "BanachUpper", "BanachLowerLM", "BanachLowerUM",
                "BanachUpperL", "BanachUpperU", "BanachLowerL_limsup")
# inner reduction and outer limit for each double kind
_INNER = {"BanachLower": "min_all", "BanachUpper": "max_all", "BanachLowerLM": "min_tail",
          "BanachLowerUM": "min_tail", "BanachUpperL": "max_all", "BanachUpperU": "max_all",
          "BanachLowerL_limsup": "max_tail"}
_OUTER = {"LowerD": "lower", "UpperD": "upper", "LowerM": "lower", "UpperM": "upper",
          "BanachLower": "lower", "BanachUpper": "upper", "BanachLowerLM": "lower",
          "BanachLowerUM": "upper", "BanachUpperL": "lower", "BanachUpperU": "upper",
          "BanachLowerL_limsup": "lower"}


@dataclass(frozen=True)
class DensityKind:
    tag: str
    growth: GrowthSequence = GrowthSequence()

    def __post_init__(self):
        if self.tag not in SINGLE_KINDS + DOUBLE_KINDS:
            raise InvalidParameter(f"unknown density kind {self.tag!r}")
        if self.tag in ("LowerD", "UpperD", "BanachLower", "BanachUpper") and not self.growth.is_identity:
            raise InvalidParameter(f"{self.tag} uses the identity scale")

    @property
    def single(self) -> bool:
        return self.tag in SINGLE_KINDS

    @property
    def outer(self) -> str:
        return _OUTER[self.tag]

    @property
    def inner(self) -> Optional[str]:
        return _INNER.get(self.tag)

    @property
    def lower_bound_only(self) -> bool:
        return self.tag in ("BanachUpperL", "BanachUpperU", "BanachUpper")

    def to_config(self) -> dict:
        return {"tag": self.tag, "growth": self.growth.to_config()}


@dataclass(frozen=True)
class Verdict:
    status: str  # ConvergesTo | DivergesToInfinity | TendsToZero | Inconclusive
    value: Optional[float] = None
    tolerance: Optional[float] = None
    theta: float = THETA
    K: int = K_TAIL

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


def assign_verdict(values: Sequence[float], outer: str = "lower", theta: float = THETA,
                   K: int = K_TAIL, tol: float = CONVERGE_TOL) -> Verdict:
    v = np.asarray(values, dtype=np.float64)
    if v.size < K:
        return Verdict("Inconclusive", theta=theta, K=K)
    tail = v[-K:]
    if np.all(tail < theta) and tail[-1] <= tail[0]:
        return Verdict("TendsToZero", value=float(tail.max()), tolerance=theta, theta=theta, K=K)
    if tail.max() - tail.min() <= tol:
        val = float(tail.min() if outer == "lower" else tail.max())
        return Verdict("ConvergesTo", value=val, tolerance=tol, theta=theta, K=K)
    # values of at most 1 are consistent with a bounded limit
    records = all(v[i] > v[:i].max() for i in range(v.size - K, v.size) if i > 0)
    if records and v.size > K and v[-1] > 1:
        return Verdict("DivergesToInfinity", theta=theta, K=K)
    return Verdict("Inconclusive", theta=theta, K=K)


@dataclass(frozen=True)
class DensitySample:
    index: int  # n for single kinds, s for double kinds
    value: float
    count: int
    norm: int
    arg: int  # n attaining the reported value
    n_max: Optional[int] = None
    infinite: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Schedule:
    """Declared evaluation grid.

    Single kinds: ``points`` are bucket ends and each sample is the exact
    extremum of the ratio inside (previous point, point].  Dense schedules
    scan every n; sparse ones evaluate the set's change points only.  With
    ``lookback`` each sample becomes the extremum over all buckets lying in
    [sqrt(point), point], a liminf/limsup proxy that lets sets oscillating on
    super-geometric scales show their extremes at every late sample (it can
    only over-estimate a liminf and under-estimate a limsup).  Double kinds:
    window scales ``s_values`` with scan limits ``n_max``.
    """

    points: tuple = ()
    dense: bool = True
    s_values: tuple = ()
    n_max: tuple = ()
    lookback: bool = False

    @classmethod
    def single(cls, horizon: int, per_octave: int = 16, dense: Optional[bool] = None,
               lookback: bool = False) -> "Schedule":
        horizon = int(horizon)
        if horizon < 1:
            raise InvalidParameter("horizon must be positive")
        octaves = math.log2(horizon) if horizon > 1 else 0.0
        count = max(2, int(octaves * per_octave) + 1)
        pts = np.unique(np.round(np.exp2(np.linspace(0, octaves, count))).astype(np.int64))
        pts = pts[(pts >= 1) & (pts <= horizon)]
        if pts[-1] != horizon:
            pts = np.append(pts, horizon)
        if dense is None:
            dense = horizon <= DENSE_LIMIT
        return cls(points=tuple(int(p) for p in pts), dense=dense, lookback=lookback)

    @classmethod
    def double(cls, growth: GrowthSequence, horizon: int, scan_factor: int = 100,
               n_max_fn: Optional[Callable[[int, int], int]] = None, S: Optional[int] = None) -> "Schedule":
        """Geometric s-grid 2^0..2^S, N_max(s) >= scan_factor * floor(m_s).

        Without an explicit ``S`` the grid stops at the last s whose scan
        stays within ``horizon``.
        """
        if scan_factor < 100:
            raise InvalidParameter("scan_factor must be at least 100")
        s_vals, n_vals = [], []
        i = 0
        while True:
            s = 2**i
            if S is not None and i > S:
                break
            L = int(growth.floor(np.array([s]))[0])
            nm = scan_factor * L
            if n_max_fn is not None:
                nm = max(nm, int(n_max_fn(s, L)))
            if S is None and nm + L > horizon:
                break
            s_vals.append(s)
            n_vals.append(nm)
            i += 1
            if i > 62:
                break
        return cls(s_values=tuple(s_vals), n_max=tuple(n_vals))

    def to_dict(self) -> dict:
        if self.s_values:
            return {"s_values": list(self.s_values), "n_max": list(self.n_max)}
        return {"points": len(self.points), "first": self.points[0] if self.points else None,
                "last": self.points[-1] if self.points else None, "dense": self.dense,
                "lookback": self.lookback}


@dataclass
class DensityEstimate:
    kind: DensityKind
    samples: list
    verdict: Verdict
    schedule: Schedule
    notes: list = field(default_factory=list)

    @property
    def values(self) -> np.ndarray:
        return np.array([s.value for s in self.samples])

    def to_dict(self) -> dict:
        return {"kind": self.kind.to_config(), "schedule": self.schedule.to_dict(),
                "samples": [s.to_dict() for s in self.samples], "verdict": self.verdict.to_dict(),
                "notes": list(self.notes)}

    def csv_rows(self) -> list[dict]:
        rows = []
        for s in self.samples:
            rows.append({"kind": self.kind.tag, "s": s.index, "n_max": s.n_max if s.n_max is not None else s.arg,
                         "value": "inf" if s.infinite else repr(s.value), "verdict": self.verdict.status})
        return rows


# ------------------------------------------------------------ core counting

def m_counts(A: IndexSet, growth: GrowthSequence, n) -> np.ndarray:
    """|A ∩ [1, floor(m_n)]| for each n (exact)."""
    ends = growth.floor(np.asarray(n, dtype=np.int64))
    return A.count_upto(ends)


def window_counts(A: IndexSet, n, L: int) -> np.ndarray:
    """|A ∩ [n+1, n+L]| for each n (exact)."""
    n = np.asarray(n, dtype=np.int64)
    return A.count_upto(n + L) - A.count_upto(n)


def window_extremum(A: IndexSet, L: int, lo: int, hi: int, mode: str) -> tuple[int, int]:
    """Exact (max or min count, arg n) of |A ∩ [n+1, n+L]| over n in [lo, hi].

    The count changes slope only where n or n+L is a change point of A, so
    the extremum sits at one of those positions or at the range ends.
    """
    A.check_horizon(hi + L)
    best_val, best_arg = None, None
    pick = np.argmax if mode == "max" else np.argmin

    def consider(cands):
        nonlocal best_val, best_arg
        cands = cands[(cands >= lo) & (cands <= hi)]
        if cands.size == 0:
            return
        vals = window_counts(A, cands, L)
        i = int(pick(vals))
        v = int(vals[i])
        if best_val is None or (v > best_val if mode == "max" else v < best_val) or (
                v == best_val and int(cands[i]) < best_arg):
            best_val, best_arg = v, int(cands[i])

    consider(np.array([lo, hi], dtype=np.int64))
    # stream the change points in chunks so very long scans stay bounded in memory
    start = lo
    stop = hi + L
    step = CHUNK
    while start <= stop:
        end = min(stop, start + step)
        pts = A.change_points(start, end)
        if pts.size:
            consider(pts)
            consider(pts - L)
        start = end + 1
        # adapt the index stride so each chunk holds roughly CHUNK change points
        if pts.size < CHUNK // 4:
            step *= 2
        elif pts.size > CHUNK:
            step = max(1, step // 2)
    return best_val, best_arg


# --------------------------------------------------------------- estimators

def _single_samples(A: IndexSet, kind: DensityKind, sched: Schedule) -> tuple[list[DensitySample], list[str]]:
    pts = np.asarray(sched.points, dtype=np.int64)
    end = int(kind.growth.floor(pts[-1:])[0])
    A.check_horizon(end)
    lower = kind.outer == "lower"
    notes: list[str] = []
    samples = []
    prev = 0
    for p in pts.tolist():
        if sched.dense:
            best = _dense_bucket(A, kind.growth, prev + 1, p, lower)
        else:
            best = _sparse_bucket(A, kind.growth, prev + 1, p, lower)
            if best is None:
                c = int(m_counts(A, kind.growth, np.array([p]))[0])
                best = (c / p, c, p)
                if not notes:
                    notes.append("some buckets held too many change points; their sample is the end value")
        samples.append(_mk_sample(p, best[1], best[2], best[2]))
        prev = p
    if sched.lookback:
        samples = _apply_lookback(samples, pts, lower)
    return samples, notes


def _better(a: float, b: float, lower: bool) -> bool:
    return a < b if lower else a > b


def _dense_bucket(A, growth, lo: int, p: int, lower: bool):
    best = None
    while lo <= p:
        hi = min(p, lo + CHUNK - 1)
        n = np.arange(lo, hi + 1, dtype=np.int64)
        c = m_counts(A, growth, n)
        r = c / n
        i = int(np.argmin(r) if lower else np.argmax(r))
        cand = (float(r[i]), int(c[i]), int(n[i]))
        if best is None or _better(cand[0], best[0], lower):
            best = cand
        lo = hi + 1
    return best


def _sparse_bucket(A, growth, lo: int, p: int, lower: bool):
    """Exact extremum over n in [lo, p] from the change points of A.

    Between consecutive crossings of a change point the count is constant
    (ratio decreasing) or grows with floor(m_n) (ratio monotone for the
    supported scales), so the extremum sits next to a crossing.
    """
    m_lo, m_hi = (int(v) for v in growth.floor(np.array([lo, p])))
    cps = A.change_points(max(m_lo - 1, 0), m_hi)
    if cps.size > CHUNK:
        return None
    first = growth.inverse_ceil(cps + 1)
    cands = np.unique(np.concatenate(([lo, p], first, first - 1)))
    cands = cands[(cands >= lo) & (cands <= p)]
    c = m_counts(A, growth, cands)
    r = c / cands
    i = int(np.argmin(r) if lower else np.argmax(r))
    return float(r[i]), int(c[i]), int(cands[i])


def _apply_lookback(samples: list, pts: np.ndarray, lower: bool) -> list:
    starts = np.concatenate(([1], pts[:-1] + 1))
    out = []
    for i, p in enumerate(pts.tolist()):
        first = int(np.searchsorted(starts, math.isqrt(p), side="left"))
        best = samples[i]
        for smp in samples[first:i]:
            if _better(smp.value, best.value, lower):
                best = smp
        out.append(DensitySample(index=int(p), value=best.value, count=best.count, norm=best.norm,
                                 arg=best.arg, infinite=best.infinite))
    return out


def _mk_sample(index: int, count: int, norm: int, arg: int, n_max: Optional[int] = None) -> DensitySample:
    value = count / norm
    return DensitySample(index=int(index), value=value, count=int(count), norm=int(norm), arg=int(arg),
                         n_max=n_max, infinite=value > INF_MARK)


def _double_sample(A: IndexSet, kind: DensityKind, s: int, n_max: int) -> DensitySample:
    L = int(kind.growth.floor(np.array([s]))[0])
    inner = kind.inner
    mode = "min" if inner.startswith("min") else "max"
    lo = n_max // 2 if inner.endswith("tail") else 0
    c, arg = window_extremum(A, L, lo, n_max, mode)
    return _mk_sample(s, c, s, arg, n_max=n_max)


def _threads(threads: Optional[int]) -> int:
    import os

    if threads is None:
        env = os.environ.get("CHAOSLAB_THREADS")
        threads = int(env) if env else 1
    return max(1, int(threads))


def estimate_density(A: IndexSet, kind: DensityKind, horizon: int, schedule: Optional[Schedule] = None,
                     theta: float = THETA, K: int = K_TAIL, threads: Optional[int] = None) -> DensityEstimate:
    horizon = int(horizon)
    notes = []
    if kind.single:
        sched = schedule or Schedule.single(horizon)
        samples, notes = _single_samples(A, kind, sched)
        notes.append("each sample is the extremum of the exact ratio over its bucket")
        if sched.lookback:
            notes.append("lookback: samples are extrema over buckets inside [sqrt(n), n]")
    else:
        if schedule is None and kind.tag == "BanachLowerL_limsup":
            # the inner limsup settles only once gaps outgrow the window, so scan to m_s^2
            sched = Schedule.double(kind.growth, horizon, n_max_fn=lambda s, L: L * L)
        else:
            sched = schedule or Schedule.double(kind.growth, horizon)
        if not sched.s_values:
            raise HorizonExceeded("horizon too small for a single window scale")
        A.check_horizon(max(n + int(kind.growth.floor(np.array([s]))[0])
                            for s, n in zip(sched.s_values, sched.n_max)))
        if kind.growth.liminf_ratio(max(sched.s_values) * 2) <= 0:
            notes.append("warning: scale does not look like class R")
        n_thr = _threads(threads)
        jobs = list(zip(sched.s_values, sched.n_max))
        if n_thr > 1:
            with ThreadPoolExecutor(n_thr) as ex:
                samples = list(ex.map(lambda sn: _double_sample(A, kind, *sn), jobs))
        else:
            samples = [_double_sample(A, kind, s, n) for s, n in jobs]
        if kind.inner.endswith("tail"):
            notes.append("inner liminf/limsup approximated over the scan tail [N_max/2, N_max]")
        if kind.lower_bound_only:
            notes.append("inner sup is exact over n <= N_max, hence a lower bound for the sup over all n")
    verdict = assign_verdict([s.value for s in samples], kind.outer, theta, K)
    return DensityEstimate(kind, samples, verdict, sched, notes)


# ----------------------------------------------------------- closed forms

@dataclass(frozen=True)
class ClosedFormEstimate:
    value: float
    arg_k: int
    L: float  # smallest L with n_k <= L k^q witnessed on the sampled range
    bounded: bool
    verdict: Verdict


def closed_form_lower_q_density(A: MonotoneFormula, q: float, K: int, theta: float = THETA,
                                window: int = K_TAIL) -> ClosedFormEstimate:
    """Tail minimum of k / n_k^(1/q) for k <= K, plus the boundedness witness."""
    if q < 1:
        raise InvalidParameter("q must be >= 1")
    K = min(int(K), A.k_max)
    k = np.arange(1, K + 1, dtype=np.int64)
    nk = A.terms(1, K).astype(np.float64)
    ratio = k / np.power(nk, 1.0 / q)
    tail = slice(K // 2, K)
    i = int(np.argmin(ratio[tail])) + K // 2
    L_vals = nk / np.power(k.astype(np.float64), q)
    L = float(L_vals.max())
    # bounded when the witnessed L stops growing over the second half
    bounded = bool(L_vals[K // 2:].max() <= L_vals[: max(K // 2, 1)].max() * (1 + 1e-9))
    grid = np.unique(np.round(np.geomspace(1, K, min(K, 200))).astype(np.int64)) - 1
    verdict = assign_verdict(np.minimum.accumulate(ratio[::-1])[::-1][grid], "lower", theta, window)
    return ClosedFormEstimate(float(ratio[i]), int(k[i]), L, bounded, verdict)


# ---------------------------------------------------------- checks/reports

@dataclass
class DualityReport:
    ok: bool
    points_checked: int
    windows_checked: int
    failures: list

    def to_dict(self) -> dict:
        return asdict(self)


def duality_check(A: IndexSet, horizon: int, schedule: Optional[Schedule] = None) -> DualityReport:
    """Lower sample of A plus upper sample of A^c equals one, as integers."""
    Ac = Complement(A)
    failures = []
    sched = schedule or Schedule.single(horizon)
    pts = np.arange(1, int(horizon) + 1, dtype=np.int64) if sched.dense else np.asarray(sched.points, np.int64)
    checked = 0
    for lo in range(0, pts.size, CHUNK):
        n = pts[lo:lo + CHUNK]
        bad = np.nonzero(A.count_upto(n) + Ac.count_upto(n) != n)[0]
        failures.extend(("single", int(n[b])) for b in bad[:10])
        checked += n.size
    dsched = Schedule.double(GrowthSequence.identity(), horizon)
    for s, nm in zip(dsched.s_values, dsched.n_max):
        for lo in (0, nm // 2):
            cmin, _ = window_extremum(A, s, lo, nm, "min")
            cmax, _ = window_extremum(Ac, s, lo, nm, "max")
            if Fraction(cmin, s) + Fraction(cmax, s) != 1:
                failures.append(("banach", s, lo))
    return DualityReport(not failures, checked, 2 * len(dsched.s_values), failures)


@dataclass
class ChainReport:
    ok: bool
    estimates: dict
    warnings: list

    def to_dict(self) -> dict:
        return {"ok": self.ok, "warnings": self.warnings,
                "verdicts": {k: v.verdict.to_dict() for k, v in self.estimates.items()}}


CHAIN = ("BanachLower", "LowerD", "UpperD", "BanachUpper")


def chain_check(A: IndexSet, horizon: int, tol: float = 0.05, threads: Optional[int] = None) -> ChainReport:
    """Check 0 <= Bd_lower <= d_lower <= d_upper <= Bd_upper <= 1 on converged verdicts."""
    # lookback keeps LowerD/UpperD honest for sets oscillating on super-geometric scales
    single = Schedule.single(horizon, lookback=True)
    ests = {tag: estimate_density(A, DensityKind(tag), horizon, single if tag in ("LowerD", "UpperD") else None,
                                  threads=threads) for tag in CHAIN}
    vals = {}
    warns = []
    for tag, est in ests.items():
        v = est.verdict
        if v.status == "ConvergesTo":
            vals[tag] = v.value
        elif v.status == "TendsToZero":
            vals[tag] = 0.0
        else:
            warns.append(f"{tag}: {v.status}, ordering not asserted")
    ok = True
    known = [(t, vals[t]) for t in CHAIN if t in vals]
    for t, v in known:
        if v < -tol or v > 1 + tol:
            ok = False
    for (t1, v1), (t2, v2) in zip(known, known[1:]):
        if v1 > v2 + tol:
            ok = False
            warns.append(f"ordering violated: {t1}={v1} > {t2}={v2}")
    return ChainReport(ok, ests, warns)


def parse_kind(name: str, q: Optional[float] = None, lam: Optional[float] = None,
               growth: Optional[GrowthSequence] = None) -> DensityKind:
    """Map CLI-style names (lower, upper-m, banach-upper-l, ...) to kinds."""
    table = {"lower": "LowerD", "upper": "UpperD", "banach-lower": "BanachLower", "banach-upper": "BanachUpper",
             "lower-m": "LowerM", "upper-m": "UpperM", "banach-lower-lm": "BanachLowerLM",
             "banach-lower-um": "BanachLowerUM", "banach-upper-l": "BanachUpperL",
             "banach-upper-u": "BanachUpperU", "banach-lower-limsup": "BanachLowerL_limsup"}
    tag = table.get(name, name)
    if growth is None:
        if q is not None:
            growth = GrowthSequence.power(q)
        elif lam is not None:
            growth = GrowthSequence.from_lambda(lam)
        else:
            growth = GrowthSequence.identity()
    if tag in ("LowerD", "UpperD", "BanachLower", "BanachUpper"):
        if not growth.is_identity:
            _warnings.warn(f"{tag} ignores the supplied growth sequence")
        growth = GrowthSequence.identity()
    return DensityKind(tag, growth)
