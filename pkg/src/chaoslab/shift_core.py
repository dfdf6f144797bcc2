"""Weighted shift orbits, seminorms and the Fréchet metric, in base-2 log domain.

Conventions: coordinates are 1-based in the maths and 0-based in arrays
(``coords[0]`` is x_1).  The forward shift maps x to (0, w_1 x_1, w_2 x_2, ...)
and the backward shift maps x to (w_1 x_2, w_2 x_3, ...), so that
(T^j x)_n = w_n ... w_{n+j-1} x_{n+j}.
"""
from __future__ import annotations

import bisect
import math
import threading
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import InvalidParameter, TruncationTooShort

Space = Union[float, str]  # p >= 1 for l^p, or "c0"

LOG2_CLAMP = 1000.0


@dataclass(frozen=True, order=True)
class LogMagnitude:
    """Nonnegative real stored as log2; ``-inf`` encodes zero."""

    log2: float

    @classmethod
    def zero(cls) -> "LogMagnitude":
        return cls(-math.inf)

    @classmethod
    def from_linear(cls, x: float) -> "LogMagnitude":
        if x < 0:
            raise InvalidParameter("magnitudes are nonnegative")
        return cls(math.log2(x) if x > 0 else -math.inf)

    @property
    def is_zero(self) -> bool:
        return self.log2 == -math.inf

    def __mul__(self, other: "LogMagnitude") -> "LogMagnitude":
        return LogMagnitude(self.log2 + other.log2)

    def __add__(self, other: "LogMagnitude") -> "LogMagnitude":
        return LogMagnitude(float(np.logaddexp2(self.log2, other.log2)))

    def linear(self) -> tuple[float, bool]:
        """(value, overflowed); values beyond 2^1000 are clamped."""
        if self.log2 > LOG2_CLAMP:
            return 2.0**LOG2_CLAMP, True
        return 2.0**self.log2, False


def log2_sum(log_terms: np.ndarray, axis=None) -> np.ndarray:
    """log2 of sum of 2^terms, stable for any magnitude."""
    log_terms = np.asarray(log_terms, dtype=np.float64)
    if log_terms.size == 0:
        if axis is None:
            return np.float64(-np.inf)
        return np.full(np.delete(log_terms.shape, axis), -np.inf)
    return np.logaddexp2.reduce(log_terms, axis=axis)


def log2_norm(log_abs: np.ndarray, space: Space, axis=None) -> np.ndarray:
    """log2 of the l^p / c0 norm of a vector given log2|coords|."""
    if space == "c0":
        return np.max(log_abs, axis=axis, initial=-np.inf)
    p = float(space)
    return log2_sum(p * np.asarray(log_abs), axis=axis) / p


# ----------------------------------------------------------------- weights

class WeightSequence:
    """Positive weights w_1, w_2, ... with cumulative log2 products.

    ``beta_log(n)`` returns sum_{i<=n} log2 w_i (zero at n = 0).
    """

    exact = False
    decreasing_to_one = False

    def log2_weight(self, n: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def beta_log(self, n) -> np.ndarray:
        raise NotImplementedError

    def window_log2(self, n, j) -> np.ndarray:
        """log2 of w_n w_{n+1} ... w_{n+j-1}."""
        n = np.asarray(n, dtype=np.int64)
        return self.beta_log(n + j - 1) - self.beta_log(n - 1)

    def tail_window_bound(self, n0: int, j: int) -> Optional[float]:
        """Upper bound on window_log2(n, j) over all n >= n0, if known."""
        return None

    def to_config(self) -> dict:
        raise NotImplementedError


class ConstantWeights(WeightSequence):
    def __init__(self, w: float):
        if w <= 0:
            raise InvalidParameter("weights must be positive")
        self.w = float(w)
        self._l = math.log2(self.w)
        self.exact = float(self._l).is_integer()

    def log2_weight(self, n):
        return np.full(np.shape(n), self._l)

    def beta_log(self, n):
        n = np.asarray(n, dtype=np.int64)
        if self.exact:
            return n * int(self._l)
        return n * self._l

    def tail_window_bound(self, n0, j):
        return j * self._l

    def to_config(self):
        return {"rule": "const", "w": self.w}


class FormulaWeights(WeightSequence):
    """Weights given by a vectorised log2 rule, with cached prefix sums."""

    def __init__(self, log2_fn: Callable[[np.ndarray], np.ndarray], config: dict,
                 decreasing_to_one: bool = False):
        self.log2_fn = log2_fn
        self._config = config
        self.decreasing_to_one = decreasing_to_one
        self._lock = threading.Lock()
        self._prefix = np.zeros(1)

    def log2_weight(self, n):
        return self.log2_fn(np.asarray(n, dtype=np.float64))

    def _extend(self, n_max: int) -> None:
        if n_max < self._prefix.size:
            return
        with self._lock:
            if n_max < self._prefix.size:
                return
            size = max(n_max + 1, 2 * self._prefix.size)
            n = np.arange(1, size, dtype=np.float64)
            self._prefix = np.concatenate(([0.0], np.cumsum(self.log2_fn(n))))

    def beta_log(self, n):
        n = np.asarray(n, dtype=np.int64)
        if n.size == 0:
            return np.zeros(0)
        self._extend(int(n.max()))
        return self._prefix[n]

    def tail_window_bound(self, n0, j):
        if self.decreasing_to_one:
            return float(self.window_log2(np.array([n0]), j)[0])
        return None

    def to_config(self):
        return dict(self._config)


def ratio_weights() -> FormulaWeights:
    """w_n = 2n / (2n - 1)."""
    return FormulaWeights(lambda n: np.log2(2 * n) - np.log2(2 * n - 1), {"rule": "ratio"}, decreasing_to_one=True)


def power_weights(j: float) -> FormulaWeights:
    """w_n = n^j."""
    return FormulaWeights(lambda n: j * np.log2(n), {"rule": "power", "j": j})


def exp2_weights(c: float = 1.0) -> FormulaWeights:
    """w_n = 2^(c n)."""
    return FormulaWeights(lambda n: c * n, {"rule": "exp2", "c": c})


class BlockWeights(WeightSequence):
    """Alternating blocks of 2's (lengths b_1, b_2, ...) and 1/2's (a_1, a_2, ...).

    Block lengths are exact Python ints; positions beyond ``cap`` are not
    materialised, and queries there raise.  ``beta_log`` is an exact integer.
    """

    exact = True

    def __init__(self, lengths: Callable[[int], tuple[int, int]], n_pairs: Optional[int] = None,
                 cap: int = 2**62, config: Optional[dict] = None):
        self._lengths = lengths
        self.cap = int(cap)
        self._config = config or {"rule": "blocks"}
        pos, beta = [0], [0]
        self.pairs: list[tuple[int, int]] = []
        q = 1
        while (n_pairs is None or q <= n_pairs) and pos[-1] < self.cap:
            b, a = (int(v) for v in lengths(q))
            if b < 1 or a < 1:
                raise InvalidParameter(f"block lengths must be positive, got b={b}, a={a} at pair {q}")
            self.pairs.append((b, a))
            pos.append(pos[-1] + b)
            beta.append(beta[-1] + b)
            pos.append(pos[-1] + a)
            beta.append(beta[-1] - a)
            q += 1
        self.positions = pos  # exact block boundaries, python ints
        self.betas = beta
        k = int(np.searchsorted(np.array([min(p, self.cap) for p in pos], dtype=np.int64), self.cap))
        self._pos = np.array([min(p, self.cap) for p in pos[:k + 1]], dtype=np.int64)
        self._beta = np.array(beta[:k + 1], dtype=object)
        self.horizon = int(self._pos[-1])
        self._beta64 = np.array([int(v) for v in beta[:k + 1]], dtype=np.int64) if all(
            abs(v) < 2**62 for v in beta[:k + 1]) else None

    def log2_weight(self, n):
        n = np.asarray(n, dtype=np.int64)
        i = np.searchsorted(self._pos, n, side="left") - 1  # block containing n
        return np.where(i % 2 == 0, 1, -1)

    def beta_log(self, n):
        n = np.asarray(n, dtype=np.int64)
        if n.size and int(n.max()) > self.horizon:
            raise TruncationTooShort(f"block weights known up to {self.horizon}, asked {int(n.max())}")
        i = np.clip(np.searchsorted(self._pos, n, side="right") - 1, 0, len(self._pos) - 2)
        sign = np.where(i % 2 == 0, 1, -1)
        base = self._beta64[i] if self._beta64 is not None else self._beta[i].astype(np.float64)
        return base + sign * (n - self._pos[i])

    def tail_window_bound(self, n0, j):
        return float(j)

    def boundaries(self) -> tuple[list, list]:
        """Exact block boundary positions and the log2 product at each."""
        return self.positions, self.betas

    def sublevel_windows(self, level: int, J: int) -> list[tuple[int, int]]:
        """Maximal intervals of j in [1, J] with beta_log(j) <= level, exact."""
        out: list[list[int]] = []
        for k in range(len(self.positions) - 1):
            p0, p1 = self.positions[k], self.positions[k + 1]
            if p0 + 1 > J:
                break
            b0 = self.betas[k]
            up = k % 2 == 0
            # beta at j in (p0, p1] is b0 +/- (j - p0)
            if up:
                lo, hi = p0 + 1, min(p1, p0 + (level - b0)) if level >= b0 + 1 else p0
            else:
                lo, hi = max(p0 + 1, p0 + (b0 - level)), p1
            lo, hi = max(lo, 1), min(hi, J)
            if lo <= hi:
                if out and out[-1][1] + 1 == lo:
                    out[-1][1] = hi
                else:
                    out.append([lo, hi])
        return [tuple(w) for w in out]

    def beta_exact(self, j: int) -> int:
        """beta_log(j) as an exact Python int, for any j inside the block list."""
        j = int(j)
        k = bisect.bisect_right(self.positions, j) - 1
        if k >= len(self.positions) - 1 and j > self.positions[-1]:
            raise TruncationTooShort(f"block weights known up to {self.positions[-1]}, asked {j}")
        k = min(k, len(self.positions) - 2)
        step = j - self.positions[k]
        return self.betas[k] + (step if k % 2 == 0 else -step)

    def max_beta(self, lo: int, hi: int) -> int:
        """Exact max of beta_log over [lo, hi]; beta is piecewise linear."""
        cands = [lo, hi] + [p for p in self.positions if lo <= p <= hi]
        return max(self.beta_exact(c) for c in cands)

    def count_sublevel(self, level: int, M: int) -> int:
        """|{1 <= j <= M : beta_log(j) <= level}|, exact."""
        if M > self.positions[-1]:
            raise TruncationTooShort(f"block weights known up to {self.positions[-1]}, asked {M}")
        return sum(hi - lo + 1 for lo, hi in self.sublevel_windows(level, M))

    def to_config(self):
        return dict(self._config)


def parse_weights(spec: str) -> WeightSequence:
    """Parse CLI weight specs: const:W, ratio:2n/(2n-1), power:J, exp2:C."""
    rule, _, arg = spec.partition(":")
    if rule == "const":
        return ConstantWeights(float(arg or 1))
    if rule == "ratio":
        if arg.replace(" ", "") not in ("", "2n/(2n-1)"):
            raise InvalidParameter(f"only ratio:2n/(2n-1) is supported, got {spec!r}")
        return ratio_weights()
    if rule == "power":
        return power_weights(float(arg or 1))
    if rule == "exp2":
        return exp2_weights(float(arg or 1))
    raise InvalidParameter(f"unknown weight spec {spec!r}")


def weights_from_config(cfg: dict) -> WeightSequence:
    rule = cfg.get("rule")
    if rule == "const":
        return ConstantWeights(cfg.get("w", 1.0))
    if rule == "ratio":
        return ratio_weights()
    if rule == "power":
        return power_weights(cfg.get("j", 1.0))
    if rule == "exp2":
        return exp2_weights(cfg.get("c", 1.0))
    raise InvalidParameter(f"unknown weight rule {rule!r}")


# ----------------------------------------------------------------- vectors

@dataclass(frozen=True)
class SequenceVector:
    """Truncated sequence in l^p or c0, optionally with an evaluable tail.

    ``tail`` maps 1-based indices n (any n) to x_n; ``tail_bound(N)`` bounds
    sum_{n>N} |x_n|^p (l^p) or sup_{n>N} |x_n| (c0).
    """

    coords: np.ndarray
    space: Space = 2.0
    tail: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, compare=False)
    tail_bound: Optional[Callable[[int], float]] = field(default=None, compare=False)
    label: str = "x"

    def __post_init__(self):
        object.__setattr__(self, "coords", np.asarray(self.coords, dtype=np.float64))
        if self.space != "c0" and float(self.space) < 1:
            raise InvalidParameter("l^p needs p >= 1")

    @property
    def dim(self) -> int:
        return int(self.coords.size)

    def value(self, n: np.ndarray) -> np.ndarray:
        """x_n for 1-based n, using the tail beyond the stored coordinates."""
        n = np.asarray(n, dtype=np.int64)
        out = np.zeros(n.shape)
        inside = n <= self.dim
        out[inside] = self.coords[n[inside] - 1]
        if self.tail is not None and np.any(~inside):
            out[~inside] = self.tail(n[~inside])
        return out

    def __add__(self, other: "SequenceVector") -> "SequenceVector":
        m = max(self.dim, other.dim)
        return SequenceVector(_pad(self.coords, m) + _pad(other.coords, m), self.space)

    def __sub__(self, other: "SequenceVector") -> "SequenceVector":
        m = max(self.dim, other.dim)
        return SequenceVector(_pad(self.coords, m) - _pad(other.coords, m), self.space)

    def scale(self, c: float) -> "SequenceVector":
        tail = None if self.tail is None else (lambda n, f=self.tail: c * f(n))
        bound = None
        if self.tail_bound is not None:
            p = 1.0 if self.space == "c0" else float(self.space)
            bound = lambda N, g=self.tail_bound: abs(c) ** p * g(N)
        return SequenceVector(c * self.coords, self.space, tail, bound, self.label)


def _pad(a: np.ndarray, m: int) -> np.ndarray:
    return np.pad(a, (0, m - a.size))


def basis_vector(k: int, dim: Optional[int] = None, space: Space = 2.0) -> SequenceVector:
    dim = dim or k
    c = np.zeros(dim)
    c[k - 1] = 1.0
    return SequenceVector(c, space, label=f"e{k}")


def power_tail_vector(p: float, eps: float, dim: int = 2**20) -> SequenceVector:
    """x_n = n^(-(1+eps)/p) in l^p, with an integral tail bound."""
    if not p >= 1 or not 0 < eps:
        raise InvalidParameter("power tail needs p >= 1 and eps > 0")
    alpha = (1 + eps) / p
    n = np.arange(1, dim + 1, dtype=np.float64)

    def tail(m):
        return np.power(np.asarray(m, dtype=np.float64), -alpha)

    def bound(N):
        # sum_{n>N} n^(-1-eps) <= N^(-eps)/eps
        return float(N) ** (-eps) / eps

    return SequenceVector(np.power(n, -alpha), float(p), tail, bound, f"power-tail:p={p},eps={eps}")


def harmonic_vector(dim: int = 2**20) -> SequenceVector:
    """x_n = 1/n in c0."""
    n = np.arange(1, dim + 1, dtype=np.float64)
    return SequenceVector(1.0 / n, "c0", lambda m: 1.0 / np.asarray(m, dtype=np.float64),
                          lambda N: 1.0 / (N + 1), "harmonic")


def parse_vector(spec: str, space: Space = 2.0, dim: Optional[int] = None) -> SequenceVector:
    """Parse CLI vector specs: e1, e<k>, power-tail:p=2,eps=0.1, harmonic."""
    if spec.startswith("e") and spec[1:].isdigit():
        k = int(spec[1:])
        return basis_vector(k, dim or k, space)
    if spec.startswith("power-tail"):
        params = dict(kv.split("=") for kv in spec.partition(":")[2].split(",") if kv)
        return power_tail_vector(float(params.get("p", 2)), float(params.get("eps", 0.1)), dim or 2**20)
    if spec == "harmonic":
        return harmonic_vector(dim or 2**20)
    raise InvalidParameter(f"unknown vector spec {spec!r}")


# -------------------------------------------------------------- operators

@dataclass(frozen=True)
class ShiftOperator:
    direction: str  # "forward" | "backward"
    weights: WeightSequence
    space: Space = 2.0

    def __post_init__(self):
        if self.direction not in ("forward", "backward"):
            raise InvalidParameter("direction must be forward or backward")

    def apply(self, coords: np.ndarray) -> np.ndarray:
        """One application on a finite coordinate array (brute force)."""
        coords = np.asarray(coords, dtype=np.float64)
        n = np.arange(1, coords.size + 1)
        w = np.exp2(self.weights.log2_weight(n).astype(np.float64))
        if self.direction == "forward":
            return np.concatenate(([0.0], w * coords))
        return w[:-1] * coords[1:]


@dataclass
class OrbitTrace:
    """log2 ||T^j x|| at the recorded j, plus optional bounds and seminorms."""

    j: np.ndarray
    log2_norm: np.ndarray
    mode: str = "banach"
    log2_upper: Optional[np.ndarray] = None
    seminorms: Optional[np.ndarray] = None  # shape (len(j), M): log2 p_m(T^j x)
    meta: dict = field(default_factory=dict)

    @property
    def J(self) -> int:
        return int(self.j[-1]) if self.j.size else 0

    @property
    def dense(self) -> bool:
        return self.j.size > 0 and self.j[0] == 1 and np.all(np.diff(self.j) == 1)

    def csv_rows(self) -> list[dict]:
        rows = []
        for i, j in enumerate(self.j.tolist()):
            row = {"j": j, "log2_norm": repr(float(self.log2_norm[i]))}
            if self.seminorms is not None:
                for m in range(self.seminorms.shape[1]):
                    row[f"p_{m + 1}"] = repr(float(self.seminorms[i, m]))
            rows.append(row)
        return rows


def _forward_logs(op: ShiftOperator, x: SequenceVector, j: np.ndarray):
    support = np.nonzero(x.coords)[0] + 1
    if support.size == 0:
        return np.full((j.size, 0), -np.inf), support
    logx = np.log2(np.abs(x.coords[support - 1]))
    # (F^j x)_{k+j} = w_k ... w_{k+j-1} x_k
    logs = logx[None, :] + op.weights.window_log2(support[None, :], j[:, None])
    return logs, support


def orbit(op: ShiftOperator, x: SequenceVector, J: int, mode: str = "banach", M: int = 8,
          j_values: Optional[Sequence[int]] = None, output_dim: int = 1,
          tail_dim: Optional[int] = None) -> OrbitTrace:
    """Orbit norms of x under op for j = 1..J (or the given j_values).

    Forward orbits need finitely supported x.  Backward orbits of a
    zero-tail vector need ``x.dim >= J + output_dim``; with an evaluable tail
    the norm is summed to ``tail_dim`` coordinates and the remainder is
    bracketed, giving ``log2_upper``.
    """
    J = int(J)
    if J < 1:
        raise InvalidParameter("J must be >= 1")
    j = np.arange(1, J + 1, dtype=np.int64) if j_values is None else np.asarray(sorted(set(j_values)), np.int64)
    if mode not in ("banach", "frechet"):
        raise InvalidParameter("mode must be banach or frechet")
    space = x.space
    meta = {"direction": op.direction, "weights": op.weights.to_config(), "vector": x.label,
            "space": space, "mode": mode}
    upper = None
    semi = None
    if op.direction == "forward":
        if x.tail is not None:
            raise InvalidParameter("forward orbits need a finitely supported vector")
        if x.label == "e1" and np.count_nonzero(x.coords) == 1 and x.coords[0] == 1.0:
            norms = op.weights.beta_log(j).astype(np.float64)
            meta["shortcut"] = "beta_log"
            if mode == "frechet":
                m = np.arange(1, M + 1)
                # coordinate j+1 carries the whole mass
                semi = np.where(j[:, None] + 1 <= m[None, :], norms[:, None], -np.inf)
            return OrbitTrace(j, norms, mode, None, semi, meta)
        logs, support = _forward_logs(op, x, j)
        norms = log2_norm(logs, space, axis=1)
        if mode == "frechet":
            pos = support[None, :] + j[:, None]
            semi = np.stack([log2_norm(np.where(pos <= m, logs, -np.inf), space, axis=1)
                             for m in range(1, M + 1)], axis=1)
        return OrbitTrace(j, norms, mode, None, semi, meta)

    # backward: (T^j x)_n = w_n...w_{n+j-1} x_{n+j}
    if x.tail is None:
        if x.dim < J + output_dim:
            raise TruncationTooShort(f"zero-tail vector of length {x.dim} is shorter than J + output_dim = {J + output_dim}")
        D = x.dim
    else:
        D = int(tail_dim or max(x.dim, 2**20))
    norms = np.empty(j.size)
    upper = np.empty(j.size) if x.tail is not None else None
    p = 1.0 if space == "c0" else float(space)
    if mode == "frechet":
        semi = np.empty((j.size, M))
    n_all = np.arange(1, D + 1, dtype=np.int64)
    for i, jj in enumerate(j.tolist()):
        if x.tail is None:
            n = n_all[: max(D - jj, 0)]
        else:
            n = n_all
        with np.errstate(divide="ignore"):
            lx = np.log2(np.abs(x.value(n + jj)))
        logs = lx + op.weights.window_log2(n, jj)
        norms[i] = log2_norm(logs, space)
        if x.tail is not None:
            tb = x.tail_bound(D + jj) if x.tail_bound is not None else math.inf
            wb = op.weights.tail_window_bound(D + 1, jj)
            if wb is None or not math.isfinite(tb):
                upper[i] = math.inf
            elif space == "c0":
                upper[i] = max(norms[i], math.log2(tb) + wb if tb > 0 else -math.inf)
            else:
                extra = math.log2(tb) + p * wb if tb > 0 else -math.inf
                upper[i] = float(np.logaddexp2(p * norms[i], extra)) / p
        if mode == "frechet":
            for m in range(1, M + 1):
                semi[i, m - 1] = log2_norm(logs[:m], space)
    return OrbitTrace(j, norms, mode, upper, semi, meta)


def cesaro_mean(trace: OrbitTrace, N: int) -> LogMagnitude:
    """(1/N) sum_{j<=N} ||T^j x||, computed as log2-sum-exp minus log2 N."""
    if not trace.dense or N > trace.J:
        raise InvalidParameter("Cesàro means need a dense trace covering N")
    return LogMagnitude(float(log2_sum(trace.log2_norm[:N]) - math.log2(N)))


def cesaro_curve(trace: OrbitTrace) -> np.ndarray:
    """log2 Cesàro mean at every N of a dense trace."""
    if not trace.dense:
        raise InvalidParameter("Cesàro curves need a dense trace")
    cum = np.logaddexp2.accumulate(trace.log2_norm)
    return cum - np.log2(trace.j.astype(np.float64))


def blocks_e1_cesaro_log2(w: BlockWeights, N: int) -> float:
    """log2 of (1/N) sum_{j=1}^N 2^beta(j) in closed form over the blocks.

    Works for any N reachable by the block list (exact python-int positions),
    not just the materialised int64 range.
    """
    total = -math.inf
    pos, beta = w.positions, w.betas
    for k in range(len(pos) - 1):
        p0, p1 = pos[k], pos[k + 1]
        if p0 >= N:
            break
        length = min(p1, N) - p0
        b0 = beta[k]
        if k % 2 == 0:
            # sum_{t=1}^{L} 2^(b0+t) = 2^(b0+1)(2^L - 1)
            part = b0 + 1 + _log2_pow2m1(length)
        else:
            # sum_{t=1}^{L} 2^(b0-t) = 2^(b0-L)(2^L - 1)
            part = b0 - length + _log2_pow2m1(length)
        total = float(np.logaddexp2(total, float(part)))
    return total - math.log2(N)


def _log2_pow2m1(L: int) -> float:
    """log2(2^L - 1) for positive integer L."""
    if L > 60:
        return float(L)
    return math.log2(2.0**L - 1)


# ---------------------------------------------------------- Fréchet metric

def prefix_seminorm(space: Space = 2.0) -> Callable[[np.ndarray, int], float]:
    """p_m(x) = norm of (x_1, ..., x_m)."""

    def p(v: np.ndarray, m: int) -> float:
        head = np.abs(np.asarray(v)[:m])
        if head.size == 0:
            return 0.0
        if space == "c0":
            return float(head.max())
        q = float(space)
        return float(np.sum(head**q) ** (1 / q))

    return p


@dataclass(frozen=True)
class FrechetStructure:
    seminorm: Callable[[np.ndarray, int], float] = field(default_factory=prefix_seminorm)
    mode: str = "frechet"  # "frechet" uses the series metric, "banach" uses ||x - y||
    space: Space = 2.0

    def seminorms(self, v: np.ndarray, M: int) -> np.ndarray:
        return np.array([self.seminorm(v, m) for m in range(1, M + 1)])


@dataclass(frozen=True)
class MetricValue:
    value: float  # partial sum
    upper: float  # partial sum plus the certified remainder

    def __float__(self):
        return self.value


def frechet_distance(fs: FrechetStructure, x, y, M: int = 53) -> MetricValue:
    """sum_{n<=M} 2^-n p_n(x-y)/(1+p_n(x-y)); remainder below 2^-M."""
    xv = x.coords if isinstance(x, SequenceVector) else np.asarray(x, dtype=np.float64)
    yv = y.coords if isinstance(y, SequenceVector) else np.asarray(y, dtype=np.float64)
    m = max(xv.size, yv.size)
    diff = _pad(xv, m) - _pad(yv, m)
    if fs.mode == "banach":
        v = fs.seminorm(diff, m)
        return MetricValue(v, v)
    # prefix seminorms in one pass
    if fs.seminorm is None:
        raise InvalidParameter("seminorm required")
    p = fs.seminorms(diff, M)
    w = np.exp2(-np.arange(1, M + 1, dtype=np.float64))
    s = float(np.sum(w * p / (1 + p)))
    return MetricValue(s, s + 2.0**-M)


# ------------------------------------------------------ named diagnostics

def beta_ratio_log2(n) -> np.ndarray:
    """log2 beta(n) for w_n = 2n/(2n-1), via cumulative sums."""
    return ratio_weights().beta_log(n)


def stirling_check(n: int) -> float:
    """beta(n) / sqrt(pi n) for w_n = 2n/(2n-1)."""
    lb = float(beta_ratio_log2(np.array([int(n)]))[0])
    return 2.0 ** (lb - 0.5 * math.log2(math.pi * n))


@dataclass
class GrowthReport:
    slope: float
    slope_upper_trace: float
    expected_exponent: float
    j: np.ndarray
    log2_norm: np.ndarray
    c_fit: float
    grid_ok: bool
    grid: list

    def to_dict(self) -> dict:
        return {"slope": self.slope, "slope_upper_trace": self.slope_upper_trace,
                "expected_exponent": self.expected_exponent, "c_fit": self.c_fit,
                "pointwise_inequality_holds": self.grid_ok, "points": len(self.grid)}


def growth_bound_check(p: float = 2.0, eps: float = 0.1, J: int = 10**5, points: int = 60,
                       tail_dim: int = 2**21, weights: Optional[WeightSequence] = None,
                       grid_size: int = 10) -> GrowthReport:
    """Fit the log-log slope of ||T^j x|| over j in [J/10, J] and test the
    pointwise bound beta(n+j)/beta(n-1) >= c sqrt(1 + j/n) on a grid."""
    if not p > 1 or not 0 < eps < 1:
        raise InvalidParameter("need p > 1 and eps in (0, 1)")
    w = weights or ratio_weights()
    x = power_tail_vector(p, eps, dim=tail_dim)
    js = np.unique(np.round(np.geomspace(max(J // 10, 1), J, points)).astype(np.int64))
    tr = orbit(ShiftOperator("backward", w, p), x, J, j_values=js, tail_dim=tail_dim)
    mid = 0.5 * (tr.log2_norm + tr.log2_upper) if tr.log2_upper is not None else tr.log2_norm
    lj = np.log2(js.astype(np.float64))
    slope = float(np.polyfit(lj, mid, 1)[0])
    slope_up = float(np.polyfit(lj, tr.log2_upper, 1)[0]) if tr.log2_upper is not None else slope
    # pointwise inequality on a log-spaced (n, j) grid
    ns = np.unique(np.round(np.geomspace(1, J, grid_size)).astype(np.int64))
    jj = np.unique(np.round(np.geomspace(1, J, grid_size)).astype(np.int64))
    grid = []
    rb = ratio_weights()
    for n in ns.tolist():
        for j in jj.tolist():
            lhs = float(rb.beta_log(np.array([n + j]))[0] - rb.beta_log(np.array([n - 1]))[0])
            grid.append((n, j, lhs - 0.5 * math.log2(1 + j / n)))
    c_fit = 2.0 ** min(g[2] for g in grid)
    grid_ok = c_fit > 0 and all(g[2] >= math.log2(c_fit) - 1e-12 for g in grid)
    return GrowthReport(slope, slope_up, (1 - eps) / (2 * p), js, mid, c_fit, grid_ok, grid)
