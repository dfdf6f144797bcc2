"""Randomized desk-scale pair configurations for the profile invariants."""
import json

import numpy as np

from chaoslab.chaos_analysis import ScalarSystem, ShiftSystem, pair_profile
from chaoslab.index_sets import BlockUnion
from chaoslab.shift_core import ConstantWeights, SequenceVector, ShiftOperator, power_weights, ratio_weights

VALUES = [-2.0, -1.0, 0.0, 0.5, 1.0, 3.0]


def _blocks(rng, J):
    pos, blocks = 0, []
    while pos < 4 * J:
        lo = pos + int(rng.integers(1, 20))
        hi = lo + int(rng.integers(0, 20))
        blocks.append((lo, hi))
        pos = hi + 1
    return BlockUnion(blocks=blocks, cap=4 * J)


def random_config(rng):
    """A random desk-scale system, pair and threshold grid."""
    J = int(rng.integers(32, 257))
    grid = tuple(sorted({int(d) for d in rng.integers(-12, 13, size=4)}))
    if rng.random() < 0.3:
        factor = ["index", 2.0, 0.5][int(rng.integers(3))]
        x, y = (SequenceVector(np.array([float(rng.choice([0.0, 0.25, 1.0, 3.0]))]), "c0") for _ in range(2))
        return ScalarSystem(_blocks(rng, J), factor), x, y, J, grid
    w = [ConstantWeights(float(rng.choice([0.5, 1.0, 2.0]))), power_weights(float(rng.choice([0.5, 1.0]))),
         ratio_weights()][int(rng.integers(3))]
    direction = "forward" if rng.random() < 0.5 else "backward"
    space = [1.0, 2.0, "c0"][int(rng.integers(3))]
    dim = int(rng.integers(1, 9))
    x = rng.choice(VALUES, size=dim)
    y = x.copy() if rng.random() < 0.1 else rng.choice(VALUES, size=dim)
    if direction == "backward":
        # backward orbits read J coordinates past the support
        x, y = np.pad(x, (0, J + 1 - dim)), np.pad(y, (0, J + 1 - dim))
    return (ShiftSystem(ShiftOperator(direction, w, space)), SequenceVector(x, space), SequenceVector(y, space),
            J, grid)


def profile_json(system, x, y, J, grid) -> str:
    return json.dumps(pair_profile(system, x, y, J, grid).to_dict(), sort_keys=True)


def profile_invariants(system, x, y, J, grid) -> dict:
    """Partition, delta-monotonicity, symmetry and translation for one configuration."""
    prof = pair_profile(system, x, y, J, grid)
    n = np.arange(1, J + 1)
    partition = monotone = True
    prev = None
    for d in prof.delta_log2:
        near, far = prof.near[d].contains(n), prof.far[d].contains(n)
        partition &= bool(np.all(near ^ far)) and prof.near_counts[d] + int(far.sum()) == J
        if prev is not None:
            d0, near0 = prev
            f0, f1 = prof.get("F", d0).samples, prof.get("F", d).samples
            i0, i1 = prof.get("I", d0).samples, prof.get("I", d).samples
            monotone &= (bool(np.all(near[near0])) and all(b.value >= a.value for a, b in zip(f0, f1))
                         and all(b.value <= a.value for a, b in zip(i0, i1)))
        prev = (d, near)
    a = json.dumps(prof.to_dict(), sort_keys=True)
    zero = SequenceVector(np.zeros(1), system.space)
    return {"partition": partition, "monotone": monotone, "symmetric": a == profile_json(system, y, x, J, grid),
            "translation": a == profile_json(system, x - y, zero, J, grid)}
