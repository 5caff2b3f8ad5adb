"""Decoder recovery rate as a function of noise energy.

Plants a few Hankel codewords, adds noise whose energy is a chosen
fraction of the signal energy, and runs the robust list decoder. One
row per noise level: how often every planted label was recovered, and
the query count. Recovery is expected to hold well past equal parts
signal and noise, then collapse once no codeword stays 1/k-heavy. At
small k the candidate cap can abort first under extreme noise; aborts
are tallied in their own column rather than counted as misses.

Usage: python3 scripts/noise_sweep.py [--n 7] [--terms 2] [--k 10]
"""

import argparse

import numpy as np

from kerdock.codebook import CodewordLabel, HankelMat
from kerdock.decoder import CandidateOverflow, DecoderParams, list_decode_hankel
from kerdock.signal import DenseOracle, make_noisy


def run(n: int, nterms: int, k: int, fractions, trials: int, seed: int) -> None:
    print(f"n={n} terms={nterms} k={k} trials={trials}")
    print("noise/signal  recovered  overflows  mean-queries")
    for frac in fractions:
        hits = overflows = 0
        queries = []
        for trial in range(trials):
            rng = np.random.default_rng([seed, int(frac * 1000), trial])
            labels = set()
            while len(labels) < nterms:
                labels.add((int(rng.integers(1 << (2 * n - 1))),
                            int(rng.integers(1 << n))))
            terms = [
                (CodewordLabel(HankelMat(n, d), e, 0),
                 (0.5 + rng.uniform()) * np.exp(2j * np.pi * rng.uniform()))
                for d, e in labels
            ]
            sig_energy = sum(abs(c) ** 2 for _, c in terms)
            vals = make_noisy(n, terms, noise_energy=frac * sig_energy, seed=trial)
            try:
                results, stats = list_decode_hankel(
                    DenseOracle(vals), DecoderParams(k=k), seed=trial
                )
            except CandidateOverflow:
                overflows += 1
                continue
            got = {(lab.q.diag, lab.ell) for lab, _ in results}
            hits += labels <= got
            queries.append(stats.queries)
        mean_q = sum(queries) / len(queries) if queries else float("nan")
        print(f"{frac:12.2f}  {hits:3d}/{trials:<5d}  {overflows:9d}  {mean_q:12.1f}")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=7)
    ap.add_argument("--terms", type=int, default=2)
    ap.add_argument("--k", type=int, default=10)
    ap.add_argument("--fractions", default="0.0,0.5,1.0,2.0,4.0,8.0")
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    fractions = [float(x) for x in args.fractions.split(",")]
    run(args.n, args.terms, args.k, fractions, args.trials, args.seed)


if __name__ == "__main__":
    main()
