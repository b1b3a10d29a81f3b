"""Regenerate tests/data/wilcoxon_cases.json.

Each case is a paired sample of length 5-12 with deliberate ties and zero
differences. The two-sided p-value is computed by enumerating every sign
pattern of the average ranks, independently of the library code.
"""
import itertools
import json
from pathlib import Path

import numpy as np
from scipy.stats import rankdata

OUT = Path(__file__).resolve().parents[1] / "tests" / "data" / "wilcoxon_cases.json"


def enumerate_p(a, b):
    d = np.asarray(a) - np.asarray(b)
    d = d[d != 0]
    ranks = rankdata(np.abs(d))
    w_plus = ranks[d > 0].sum()
    stat = min(w_plus, ranks.sum() - w_plus)
    hits = 0
    for signs in itertools.product((0, 1), repeat=d.size):
        hits += ranks[np.array(signs, dtype=bool)].sum() <= stat + 1e-9
    return float(stat), min(1.0, 2 * hits / 2**d.size)


def main():
    rng = np.random.default_rng(20240601)
    cases = []
    while len(cases) < 100:
        n = int(rng.integers(5, 13))
        kind = len(cases) % 3
        b = rng.integers(0, 20, n).astype(float)
        if kind == 0:
            a = b + rng.normal(0.3, 1.0, n).round(3)
        elif kind == 1:
            a = b + rng.integers(-3, 4, n)  # heavy ties and zeros
        else:
            a = b + rng.choice([-2.5, -1.0, 1.0, 2.5, 4.0], n)
        if np.count_nonzero(a - b) < 5:
            continue
        stat, p = enumerate_p(a, b)
        cases.append({"a": a.tolist(), "b": b.tolist(), "statistic": stat, "p_two_sided": p})
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(cases, indent=1))
    print(f"wrote {len(cases)} cases to {OUT}")


if __name__ == "__main__":
    main()
