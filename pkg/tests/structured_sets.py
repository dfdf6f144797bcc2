"""The 50 structured index sets used by the duality and chain criteria."""
import numpy as np

from chaoslab.index_sets import BlockUnion, Complement, Union, formula_set, manjoza_set, zelje_set

LINEAR = ((1, 0), (2, 0), (2, -1), (3, 1), (4, 2), (5, 0), (6, -5), (7, 3), (10, 0), (3, -2))


def structured_sets() -> list[tuple[str, object]]:
    out = [(f"power q={q}", formula_set("power", q=q)) for q in (1.5, 2, 2.5, 3)]
    out += [(f"linear {a}k{b:+d}", formula_set("linear", a=a, b=b)) for a, b in LINEAR]
    out += [("exp2", formula_set("exp2")), ("zelje", zelje_set()), ("manjoza", manjoza_set(0.5))]
    rng = np.random.default_rng(20240611)
    for i in range(8):
        pos, blocks = 0, []
        while pos < 4 * 10**6:
            lo = pos + int(rng.integers(1, 2000))
            hi = lo + int(rng.integers(0, 3000))
            blocks.append((lo, hi))
            pos = hi + 1
        out.append((f"random blocks #{i}", BlockUnion(blocks=blocks, cap=4 * 10**6)))
    out.append(("octave blocks", BlockUnion(generator=lambda k: (4**k, 2 * 4**k))))
    base = list(out)
    out += [(f"complement of {name}", Complement(A)) for name, A in base[:18]]
    out += [(f"{n1} or {n2}", Union(A1, A2)) for (n1, A1), (n2, A2) in zip(base[0:14:2], base[1:14:2])]
    return out[:50]
