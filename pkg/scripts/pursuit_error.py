"""Pursuit approximation error against the brute-force best-k baseline.

Plants a geometric ladder of Kerdock terms under noise, runs the greedy
pursuit at each k, and compares its squared residual with the exhaustive
best-k error and with the error bound (1 + eps + 6 k^2 / sqrt(N)) that
the near-orthogonality argument guarantees. The pursuit error should
track the baseline closely for every k up to the planted sparsity and
flatten at the noise floor beyond it.

Usage: python3 scripts/pursuit_error.py [--n 9] [--terms 2] [--noise 0.05]
"""

import argparse

import numpy as np

from kerdock.codebook import CodewordLabel, kerdock_set
from kerdock.field import FieldContext
from kerdock.oracle import best_k_kerdock
from kerdock.pursuit import PursuitParams, sparse_approx
from kerdock.signal import DenseOracle, make_noisy


def run(n: int, nterms: int, noise: float, eps: float, seed: int) -> None:
    ctx = FieldContext.default(n)
    mats = kerdock_set(ctx)
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(mats), size=nterms, replace=False)
    terms = [
        (CodewordLabel(mats[p], int(rng.integers(1 << n)), 0),
         2.0 ** (-i) * np.exp(2j * np.pi * rng.uniform()))
        for i, p in enumerate(picks)
    ]
    sig_energy = sum(abs(c) ** 2 for _, c in terms)
    vals = make_noisy(n, terms, noise_energy=noise * sig_energy, seed=seed)
    ys = np.arange(1 << n, dtype=np.uint32)
    N = 1 << n
    print(f"n={n} terms={nterms} noise/signal={noise} eps={eps}")
    print("k  pursuit-err^2  best-k-err^2  ratio  bound  terms")
    kmax = int(np.sqrt(N)) // 6
    for k in range(1, min(kmax, nterms + 2) + 1):
        rep = sparse_approx(
            DenseOracle(vals), PursuitParams(k=k, eps=eps), seed=seed
        )
        err_sq = float(np.linalg.norm(vals - rep.evaluate(ys)) ** 2)
        _, _, best = best_k_kerdock(ctx, vals, k)
        bound = 1.0 + eps + 6.0 * k * k / np.sqrt(N)
        ratio = err_sq / best**2 if best > 0 else float("inf")
        print(f"{k}  {err_sq:13.6f}  {best ** 2:12.6f}  {ratio:5.3f}  "
              f"{bound:5.3f}  {len(rep.terms)}")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=9)
    ap.add_argument("--terms", type=int, default=2)
    ap.add_argument("--noise", type=float, default=0.05)
    ap.add_argument("--eps", type=float, default=0.1)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    run(args.n, args.terms, args.noise, args.eps, args.seed)


if __name__ == "__main__":
    main()
