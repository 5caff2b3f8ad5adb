"""List decoding of the Hankel codebook from sampled queries.

Grows j x j Hankel prefix candidates one size at a time: a candidate
survives a level when, on enough restricted subdomains, some tone of the
prefix-demodulated restriction stays heavy. Each extension appends only
the two new reverse-diagonal bits, so the search tree has branching
factor four, and survivors at full size get their linear parts recovered
by tone decoding and their coefficients estimated and pruned.

Two sampling regimes share this skeleton. The robust regime follows the
two-sided testing contract (energy gate, per-suffix tone test, pass
fraction) with budgets sized for adversarial noise; restricted slices
small enough to read outright are tested exactly. The lean regime drives
every decision from one small global position pool, nesting pair probes
across levels so the whole run touches O(pool * n) positions; it is
meant for clean, very sparse signals where query counting is the point,
and it trades list completeness for that budget.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from kerdock.codebook import (
    CodewordLabel,
    HankelMat,
    hankel_exponents_batch,
    pack_hex,
)
from kerdock.rm1 import KmParams, km_list
from kerdock.rng import child_rng
from kerdock.signal import (
    CachingOracle,
    DemodulatedOracle,
    RestrictedOracle,
    SampleOracle,
    estimate_dots,
    estimate_sq_norm,
    fwht,
)

_IPOW = np.array([1, 1j, -1, -1j], dtype=np.complex128)


class CandidateOverflow(RuntimeError):
    """Raised when a level keeps more prefixes than the configured cap.

    The cap guards the poly(k) list-size promise; blowing through it
    means the test constants are mistuned for the signal at hand, and
    aborting with the numbers beats silently degrading.
    """

    def __init__(self, level: int, count: int, cap: int):
        super().__init__(
            f"level {level} kept {count} candidates, cap {cap}; "
            "retune c1/c2 or raise candidate_cap"
        )
        self.level = level
        self.count = count
        self.cap = cap


@dataclass(frozen=True)
class DecoderParams:
    """Decoder configuration.

    k sets the heaviness scale 1/k. c1 (drop-side slack, in (0,1)) and
    c2 (threshold relaxation, > 1) shape the two-sided suffix test; c3
    scales the per-suffix energy gate (k/c3) 2^(j-n) hint^2 and defaults
    to c1/40; c4 is the incoherence budget mu*k <= c4 and must stay at
    most 1/6. suffix_samples defaults to ceil(8k/c1) * ceil(log(2n /
    delta)) and degenerates to exhaustive enumeration whenever 2^(n-j)
    is smaller. Restricted slices of size up to exact_read_limit are
    read in full and tested by transform (deterministic); larger ones
    fall back to the sampled tone search. candidate_cap (default 64 k^3)
    aborts the run via CandidateOverflow instead of trimming.

    profile "lean" switches to the pooled probe regime with pool_bases
    anchor positions; see the module docstring for what that trades away.
    """

    k: int
    c1: float = 0.5
    c2: float = 2.0
    c3: Optional[float] = None
    c4: float = 1.0 / 6.0
    delta: float = 0.01
    suffix_samples: Optional[int] = None
    repeats: int = 1
    candidate_cap: Optional[int] = None
    exact_read_limit: int = 1 << 12
    km_samples: Optional[int] = None
    km_repeats: Optional[int] = None
    threads: int = 1
    profile: str = "robust"
    pool_bases: int = 4

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if not 0.0 < self.c1 < 1.0:
            raise ValueError("c1 must lie in (0, 1)")
        if self.c2 <= 1.0:
            raise ValueError("c2 must exceed 1")
        if self.c3 is not None and self.c3 <= 0.0:
            raise ValueError("c3 must be positive")
        if not 0.0 < self.c4 <= 1.0 / 6.0 + 1e-12:
            raise ValueError("c4 must lie in (0, 1/6]")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if self.repeats < 1 or self.repeats % 2 == 0:
            raise ValueError("repeats must be odd and positive")
        if self.profile not in ("robust", "lean"):
            raise ValueError("profile must be 'robust' or 'lean'")
        if self.pool_bases < 2:
            raise ValueError("pool_bases must be at least 2")

    def resolved_c3(self) -> float:
        return self.c3 if self.c3 is not None else self.c1 / 40.0

    def resolved_cap(self) -> int:
        return (
            self.candidate_cap
            if self.candidate_cap is not None
            else 64 * self.k**3
        )

    def resolved_suffix_samples(self, n: int) -> int:
        if self.suffix_samples is not None:
            return self.suffix_samples
        per = math.ceil(8.0 * self.k / self.c1)
        return per * math.ceil(math.log(2.0 * n / self.delta))


@dataclass
class DecodeStats:
    """Per-level candidate counts and the query bill of one decode."""

    n: int
    k: int
    profile: str
    g: List[int] = field(default_factory=list)
    f: List[int] = field(default_factory=list)
    queries: int = 0
    queries_raw: int = 0
    seconds: float = 0.0


def extend_prefix(diag: int, j: int) -> List[int]:
    """The four (j+1)-sized Hankel extensions of a j-sized diag."""
    return [
        diag | (a << (2 * j - 1)) | (b << (2 * j))
        for a in (0, 1)
        for b in (0, 1)
    ]


def _thresholds(
    params: DecoderParams, n: int, j: int, hint_sq: float
) -> Tuple[float, float, float]:
    """Per-suffix tone threshold, energy gate, and pass-fraction bar."""
    scale = 2.0 ** (j - n) * hint_sq
    tau_sq = scale / (4.0 * params.k * params.c2)
    gate = (params.k / params.resolved_c3()) * scale
    frac = (1.0 + params.c1) / (8.0 * params.k)
    return tau_sq, gate, frac


def _suffix_draw(
    n: int, j: int, limit: int, seed: int, rep: int
) -> np.ndarray:
    """Suffixes to test at one level: exhaustive when they fit the budget."""
    count = 1 << (n - j)
    if count <= limit:
        return np.arange(count, dtype=np.uint32)
    rng = child_rng(seed, "suffix", j, rep)
    return rng.integers(0, count, size=limit, dtype=np.uint32)


def _exact_level_keep(
    oracle: SampleOracle,
    j: int,
    diags: Sequence[int],
    suffixes: np.ndarray,
    tau_sq: float,
    gate: float,
    frac: float,
    threads: int,
) -> np.ndarray:
    """Keep mask from full restricted-slice reads, vectorized over candidates.

    The energy gate is candidate-independent, so gated suffixes count as
    passes for everyone; each remaining slice is demodulated by every
    candidate's quadratic phase and transformed, making the per-suffix
    decision exact.
    """
    width = 1 << j
    ys = np.arange(width, dtype=np.uint32)
    pos = (suffixes.astype(np.uint32)[:, None] << np.uint32(j)) | ys[None, :]
    vals = oracle.query_many(pos.ravel()).reshape(len(suffixes), width)
    energies = np.einsum("sy,sy->s", np.abs(vals), np.abs(vals))
    open_mask = energies <= gate
    gated = int(len(suffixes) - open_mask.sum())
    views = vals[open_mask]
    need = math.ceil(frac * len(suffixes) - 1e-12)
    if len(views) == 0 or gated >= need:
        return np.ones(len(diags), dtype=bool)

    diag_arr = np.asarray(list(diags), dtype=np.uint64)
    bar = tau_sq * width

    def run(chunk: np.ndarray) -> np.ndarray:
        exps = hankel_exponents_batch(chunk, j, ys)
        demod = _IPOW[(-exps.astype(np.int16)) & 3]
        w = views[None, :, :] * demod[:, None, :]
        spec = fwht(w, axis=-1)
        power = (spec.real**2 + spec.imag**2).max(axis=-1)
        passes = (power >= bar).sum(axis=1) + gated
        return passes >= need

    budget = max(1, (48 << 20) // (max(len(views), 1) * width * 16))
    chunks = [
        diag_arr[i : i + budget] for i in range(0, len(diag_arr), budget)
    ]
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(c) for c in chunks]
    return np.concatenate(parts)


def _km_level_keep(
    oracle: SampleOracle,
    j: int,
    diags: Sequence[int],
    suffixes: np.ndarray,
    tau_sq: float,
    gate: float,
    frac: float,
    params: DecoderParams,
    seed: int,
) -> np.ndarray:
    """Keep mask from sampled per-suffix tone decoding (large restrictions).

    Every candidate sees the same suffixes; each open suffix is decoded
    per candidate through the restricted, prefix-demodulated oracle. The
    union bound over candidates needs no independence, so the shared
    suffix draw costs nothing in the failure analysis.
    """
    passes = np.zeros(len(diags), dtype=np.int64)
    need = math.ceil(frac * len(suffixes) - 1e-12)
    gate_samples = max(64, 8 * params.k)
    for si, suffix in enumerate(suffixes.tolist()):
        ro = RestrictedOracle(oracle, int(suffix), j)
        energy = estimate_sq_norm(
            ro, gate_samples, seed=int(child_rng(seed, "gate", j, si).integers(1 << 30))
        )
        if energy > gate:
            passes += 1
            continue
        hint = math.sqrt(max(energy, tau_sq))
        theta = min(1.0, 2.0 * tau_sq / hint**2)
        sub = KmParams(
            theta=theta,
            delta=params.delta,
            samples_per_test=params.km_samples,
            repeats=params.km_repeats,
        )
        for ci, diag in enumerate(diags):
            label = CodewordLabel(HankelMat(j, int(diag)), 0, 0)
            found = km_list(
                DemodulatedOracle(ro, label),
                sub,
                seed=int(child_rng(seed, "subtest", j, si, ci).integers(1 << 30)),
            )
            if found:
                passes[ci] += 1
    return passes >= need


def _robust_levels(
    oracle: SampleOracle, params: DecoderParams, seed: int, stats: DecodeStats
) -> List[int]:
    n = oracle.n
    hint_sq = oracle.norm_hint**2
    limit = params.resolved_suffix_samples(n)
    cap = params.resolved_cap()
    test_set: List[int] = [0, 1]
    kept: List[int] = []
    for j in range(1, n + 1):
        tau_sq, gate, frac = _thresholds(params, n, j, hint_sq)
        votes = np.zeros(len(test_set), dtype=np.int64)
        for rep in range(params.repeats):
            suffixes = _suffix_draw(n, j, limit, seed, rep)
            if (1 << j) <= params.exact_read_limit:
                keep = _exact_level_keep(
                    oracle, j, test_set, suffixes, tau_sq, gate, frac,
                    params.threads,
                )
            else:
                keep = _km_level_keep(
                    oracle, j, test_set, suffixes, tau_sq, gate, frac,
                    params, seed,
                )
            votes += keep
        mask = votes * 2 > params.repeats
        kept = [d for d, m in zip(test_set, mask) if m]
        stats.g.append(len(test_set))
        stats.f.append(len(kept))
        if len(kept) > cap:
            raise CandidateOverflow(j, len(kept), cap)
        if not kept:
            return []
        if j < n:
            test_set = [e for d in kept for e in extend_prefix(d, j)]
    return kept


def _robust_finish(
    oracle: SampleOracle,
    params: DecoderParams,
    seed: int,
    survivors: List[int],
) -> List[Tuple[CodewordLabel, complex]]:
    """Recover linear parts for full-size survivors and prune by dot."""
    n = oracle.n
    hint_sq = oracle.norm_hint**2
    prune = hint_sq / (2.0 * params.k)
    if (1 << n) <= 4 * params.exact_read_limit:
        ys = np.arange(1 << n, dtype=np.uint32)
        vals = oracle.query_many(ys)
        results = []
        for diag in survivors:
            exps = hankel_exponents_batch([diag], n, ys)[0]
            spec = fwht(vals * _IPOW[(-exps.astype(np.int16)) & 3])
            dots = spec / math.sqrt(1 << n)
            for ell in np.flatnonzero(np.abs(dots) ** 2 >= prune):
                results.append(
                    (
                        CodewordLabel(HankelMat(n, int(diag)), int(ell), 0),
                        complex(dots[ell]),
                    )
                )
        return results

    theta = min(1.0, 1.0 / (params.k * params.c2))
    sub = KmParams(
        theta=theta,
        delta=params.delta,
        samples_per_test=params.km_samples,
        repeats=params.km_repeats,
    )
    labels = []
    for diag in survivors:
        base = CodewordLabel(HankelMat(n, int(diag)), 0, 0)
        found = km_list(
            DemodulatedOracle(oracle, base),
            sub,
            seed=int(child_rng(seed, "ells", diag).integers(1 << 30)),
        )
        labels.extend(
            CodewordLabel(HankelMat(n, int(diag)), int(ell), 0)
            for ell, _ in found
        )
    if not labels:
        return []
    samples = min(1 << n, 1 << 14)
    dots = estimate_dots(
        oracle, labels, samples, seed=int(child_rng(seed, "prune").integers(1 << 30))
    )
    return [
        (lab, complex(c))
        for lab, c in zip(labels, dots)
        if abs(c) ** 2 >= prune
    ]


def _lean_decode(
    oracle: SampleOracle, params: DecoderParams, seed: int, stats: DecodeStats
) -> List[Tuple[CodewordLabel, complex]]:
    """Pooled-probe decode: every statistic reads the same few positions.

    The two bits a level-j extension introduces are the new reverse
    diagonals h_{2j-2} (a diagonal entry) and h_{2j-3} (the adjacent
    off-diagonal). Against a single dominant codeword both have
    base-independent witnesses: the squared single difference of the
    demodulated signal along e_{j-1} equals (-1)^{mismatch} / N^2
    exactly (linear parts and unknown rows contribute factors of +-1
    that square away), and the second mixed difference along
    (e_{j-1}, e_{j-2}) isolates the off-diagonal entry the same way. So
    keeping a child only needs the sign of a mean over a handful of
    anchor positions. Probes nest across levels, the linear part falls
    out of the same pair products after full demodulation, and the
    coefficient is read off the whole pool, so the run touches
    O(pool_bases * n) positions total.
    """
    n = oracle.n
    hint_sq = oracle.norm_hint**2
    cap = params.resolved_cap()
    rng = child_rng(seed, "pool")
    nbases = params.pool_bases
    bases = np.unique(rng.integers(0, 1 << n, size=4 * nbases, dtype=np.uint64))
    rng.shuffle(bases)
    bases = bases[:nbases].astype(np.uint32)
    v_base = oracle.query_many(bases)
    pool: List[np.ndarray] = [bases]
    bar = 0.2

    test_set: List[int] = [0, 1]
    kept: List[int] = []
    v_prev: Optional[np.ndarray] = None  # values at bases ^ e_{j-2}
    for j in range(1, n + 1):
        d1 = np.uint32(1 << (j - 1))
        p1 = bases ^ d1
        pool.append(p1)
        v1 = oracle.query_many(p1)
        if j >= 2:
            p2 = p1 ^ np.uint32(1 << (j - 2))
            pool.append(p2)
            v2 = oracle.query_many(p2)
        diag_arr = np.asarray(test_set, dtype=np.uint64)
        e_base = hankel_exponents_batch(diag_arr, j, bases)
        e_p1 = hankel_exponents_batch(diag_arr, j, p1)
        w0 = v_base[None, :] * _IPOW[(-e_base.astype(np.int16)) & 3]
        w1 = v1[None, :] * _IPOW[(-e_p1.astype(np.int16)) & 3]
        t1 = w1 * np.conj(w0)
        sq = t1 * t1
        norm = np.mean(np.abs(sq), axis=1)
        s_diag = np.mean(sq.real, axis=1) / np.maximum(norm, 1e-300)
        keep = s_diag >= bar
        if j >= 2:
            e_p2 = hankel_exponents_batch(diag_arr, j, p2)
            e_prev = hankel_exponents_batch(diag_arr, j, bases ^ (d1 >> 1))
            w2 = v2[None, :] * _IPOW[(-e_p2.astype(np.int16)) & 3]
            wp = v_prev[None, :] * _IPOW[(-e_prev.astype(np.int16)) & 3]
            mixed = w2 * np.conj(w1) * np.conj(wp) * w0
            norm = np.mean(np.abs(mixed), axis=1)
            s_off = np.mean(mixed.real, axis=1) / np.maximum(norm, 1e-300)
            keep &= s_off >= bar
        kept = [d for d, m in zip(test_set, keep) if m]
        stats.g.append(len(test_set))
        stats.f.append(len(kept))
        if len(kept) > cap:
            raise CandidateOverflow(j, len(kept), cap)
        if not kept:
            return []
        v_prev = v1
        if j < n:
            test_set = [e for d in kept for e in extend_prefix(d, j)]

    # linear part: sign of the pair correlation along each coordinate
    results: List[Tuple[CodewordLabel, complex]] = []
    positions = np.unique(np.concatenate(pool))
    pos_vals = oracle.query_many(positions)
    for diag in kept:
        exps = hankel_exponents_batch([diag], n, positions)[0]
        wall = pos_vals * _IPOW[(-exps.astype(np.int16)) & 3]
        base_idx = np.searchsorted(positions, bases)
        ell = 0
        for r in range(n):
            partner = np.searchsorted(positions, bases ^ np.uint32(1 << r))
            corr = np.mean(wall[partner] * np.conj(wall[base_idx]))
            if corr.real < 0.0:
                ell |= 1 << r
        label = CodewordLabel(HankelMat(n, int(diag)), ell, 0)
        eell = 2 * (np.bitwise_count(positions & np.uint32(ell)) & 1)
        phases = wall * _IPOW[(-eell.astype(np.int16)) & 3]
        chat = complex(np.mean(phases) * math.sqrt(1 << n))
        if abs(chat) ** 2 >= hint_sq / (2.0 * params.k):
            results.append((label, chat))
    return results


def list_decode_hankel(
    oracle: SampleOracle, params: DecoderParams, seed: int = 0
) -> Tuple[List[Tuple[CodewordLabel, complex]], DecodeStats]:
    """All Hankel codewords carrying a 1/k energy fraction, with estimates.

    Returns (results, stats) where results holds (label, coefficient)
    pairs sorted by descending estimated energy. The oracle is wrapped in
    a cache, so repeated positions are charged once; stats.queries is the
    count of distinct positions read and stats.queries_raw the total
    request volume. Degenerate inputs (n < 2 or k >= 2^n) are decoded
    densely. Raises CandidateOverflow when a level exceeds the cap.
    """
    t0 = time.perf_counter()
    cached = oracle if isinstance(oracle, CachingOracle) else CachingOracle(oracle)
    n = cached.n
    stats = DecodeStats(n=n, k=params.k, profile=params.profile)

    if n < 2 or params.k >= (1 << n):
        results = _dense_fallback(cached, params)
    elif params.profile == "lean":
        results = _lean_decode(cached, params, seed, stats)
    else:
        survivors = _robust_levels(cached, params, seed, stats)
        results = _robust_finish(cached, params, seed, survivors)

    results.sort(key=lambda t: (-abs(t[1]) ** 2, t[0].q.diag, t[0].ell))
    stats.queries = cached.distinct_count
    stats.queries_raw = cached.query_count
    stats.seconds = time.perf_counter() - t0
    return results, stats


def _dense_fallback(
    oracle: SampleOracle, params: DecoderParams
) -> List[Tuple[CodewordLabel, complex]]:
    n = oracle.n
    if n > 7:
        raise ValueError("dense fallback limited to n <= 7")
    ys = np.arange(1 << n, dtype=np.uint32)
    vals = oracle.query_many(ys)
    prune = oracle.norm_hint**2 / (2.0 * params.k)
    results = []
    for diag in range(1 << (2 * n - 1)):
        exps = hankel_exponents_batch([diag], n, ys)[0]
        spec = fwht(vals * _IPOW[(-exps.astype(np.int16)) & 3])
        dots = spec / math.sqrt(1 << n)
        for ell in np.flatnonzero(np.abs(dots) ** 2 >= prune):
            results.append(
                (
                    CodewordLabel(HankelMat(n, diag), int(ell), 0),
                    complex(dots[ell]),
                )
            )
    return results


def format_decode_report(
    results: Sequence[Tuple[CodewordLabel, complex]], stats: DecodeStats
) -> str:
    """Line-oriented report: one output per line, then the stats block.

    Wall time is deliberately excluded so identical runs are
    byte-identical; callers wanting timing print stats.seconds
    themselves.
    """
    n = stats.n
    lines = []
    for label, c in results:
        diag = label.q.diag if isinstance(label.q, HankelMat) else None
        qhex = (
            pack_hex(diag, 2 * n - 1)
            if diag is not None
            else pack_hex(sum(r << (i * n) for i, r in enumerate(label.q.rows)), n * n)
        )
        lines.append(
            f"{qhex} {label.ell:x} {c.real:.12g} {c.imag:.12g} {abs(c)**2:.12g}"
        )
    lines.append(f"# levels {len(stats.g)}")
    for j, (g, f) in enumerate(zip(stats.g, stats.f), start=1):
        lines.append(f"# level {j} tested {g} kept {f}")
    lines.append(f"# queries {stats.queries} raw {stats.queries_raw}")
    return "\n".join(lines) + "\n"
