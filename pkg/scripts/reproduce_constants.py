#!/usr/bin/env python3
"""Print every headline constant of the gasket family in one run.

Everything below is recomputed from scratch; exact values print as radical
strings, Monte Carlo tables carry their seeds.  Takes a few seconds.
"""

import argparse
import time

from kusuoka.exactnum import format_exact
from kusuoka.gasket import generate_system
from kusuoka.matsys import sg_system, validate
from kusuoka.measure import kusuoka_measure, mixing_bound_check, nu
from kusuoka.procspace import q_decay_check
from kusuoka.spectral import c_k, theta1, theta2


def show(x):
    return format_exact(x) if hasattr(x, "is_rational") else f"{x:.12g}"


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nmax", type=int, default=6, help="largest subdivision to generate")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--trials", type=int, default=100)
    args = ap.parse_args()

    print("== contraction rates of the averaging map ==")
    for n in range(2, args.nmax + 1):
        t0 = time.perf_counter()
        sys_ = generate_system(n)
        res = theta1(sys_)
        ok = validate(sys_).ok
        print(
            f"  {len(sys_.alphabet):2d}-cell subdivision n={n}:"
            f" theta1 = {res.describe():24s} valid={ok}"
            f"  ({time.perf_counter() - t0:.2f}s)"
        )

    sg = sg_system()
    print("\n== irreducibility and projection decay, 3-map system ==")
    for k in (1, 2):
        print(f"  c_{k} = {show(c_k(sg, k).exact)}")
    t2 = theta2(sg, k_max=2)
    print(f"  theta2 (one-step)  = {show(t2.lemma_exact)} ~ {t2.lemma_value:.12f}")
    print(f"  theta2 (best k)    = {show(t2.thm_exact)}")

    m = kusuoka_measure(sg)
    print("\n== small cylinder masses ==")
    for w in [(0,), (0, 0), (0, 1), (0, 0, 0)]:
        word = "".join(sg.alphabet[s] for s in w)
        print(f"  nu({word}) = {show(nu(m, w))}")

    print("\n== worst correlation gaps vs 2*(4/5)^n ==")
    for row in mixing_bound_check(m, 2, 8):
        print(
            f"  n={row.n:2d}  max|gap| = {float(row.max_gap):.3e}"
            f"  bound = {float(row.gap_bound):.3e}  ok={row.gap_ok}"
        )

    print(f"\n== martingale decay after projection (seed {args.seed}, {args.trials} trials) ==")
    for k in (0, 1, 2):
        rows = q_decay_check(sg, k, j_max=6, trials=args.trials, seed=args.seed)
        ratios = "  ".join(f"j={r.j}:{r.max_ratio:.4f}<={r.bound:.4f}" for r in rows)
        print(f"  k={k}  {ratios}")


if __name__ == "__main__":
    main()
