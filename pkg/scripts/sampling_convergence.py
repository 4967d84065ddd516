#!/usr/bin/env python3
"""Empirical cylinder frequencies against exact masses, by sample size.

Draws nested batches from one seeded stream and reports the worst z-score
over all cylinders of each depth.  Worst scores should hover around 2-3
and not grow with the sample size.
"""

import argparse
import math
from collections import Counter

from kusuoka.measure import kusuoka_measure, nu, sample_many
from kusuoka.symbolic import all_words
from kusuoka.systems import get_builtin


def worst_z(words, m, depth, total):
    counts = Counter(w[:depth] for w in words)
    out = 0.0
    for w in all_words(m.system.n_symbols, depth):
        p = float(nu(m, w))
        sigma = math.sqrt(p * (1 - p) / total)
        out = max(out, abs(counts[w] / total - p) / sigma)
    return out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--builtin", default="sg")
    ap.add_argument("--depth", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-count", type=int, default=200_000)
    args = ap.parse_args()

    system = get_builtin(args.builtin)
    m = kusuoka_measure(system)
    words = sample_many(m, args.depth, args.max_count, args.seed)

    print(f"system {args.builtin}, seed {args.seed}, depth <= {args.depth}")
    header = "count".rjust(9) + "".join(f"  depth {d}" for d in range(1, args.depth + 1))
    print(header)
    count = 1000
    while count <= args.max_count:
        batch = words[:count]
        row = f"{count:9d}"
        for d in range(1, args.depth + 1):
            row += f"  {worst_z(batch, m, d, count):7.2f}"
        print(row)
        count *= 4


if __name__ == "__main__":
    main()
