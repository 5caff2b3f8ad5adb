"""Dense exhaustive references and structural verifiers.

Everything here trades time for certainty: exact dot products over whole
codebooks, exhaustive membership and rank counts, brute-force best-k
approximations. The sublinear decoders are tested against these, never the
other way around.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from kerdock.codebook import (
    CodewordLabel,
    HankelMat,
    SymMat,
    check_commute,
    dense_codeword,
    dense_exponents,
    gf2_inv,
    gf2_matmul,
    gf2_rank,
    gf2_rank_batch,
    gray_codeword,
    kerdock_set,
    lf_kerdock,
    pair_dot,
    poly_mul,
    predict_dot_magnitude,
    trace_kerdock,
)
from kerdock.field import FieldContext
from kerdock.rng import child_rng
from kerdock.signal import fwht

__all__ = [
    "dense_dot_table",
    "dense_heavy_set",
    "best_k_kerdock",
    "restricted_max_tone",
    "verify_kerdock_set",
    "count_hankel_by_rank",
    "verify_dickson",
    "verify_independence",
    "verify_gray_independence",
    "verify_commute_equivalence",
    "verify_homomorphism",
]

_I_POWERS = np.array([1, 1j, -1, -1j], dtype=np.complex128)

# family name -> iterator over Hankel diag values (None = single zero matrix)
_FAMILIES = ("rm1", "kerdock", "hankel")


def _family_diags(family: str, ctx: Optional[FieldContext], n: int) -> np.ndarray:
    if family == "rm1":
        return np.array([0], dtype=np.int64)
    if family == "kerdock":
        if ctx is None:
            ctx = FieldContext.default(n)
        return np.array(sorted(m.diag for m in kerdock_set(ctx)), dtype=np.int64)
    if family == "hankel":
        return np.arange(1 << (2 * n - 1), dtype=np.int64)
    raise ValueError(f"unknown family {family!r}; expected one of {_FAMILIES}")


def _hankel_exponents_block(diags: np.ndarray, n: int) -> np.ndarray:
    """Quadratic exponents mod 4, shape (len(diags), 2^n), vectorized."""
    ys = np.arange(1 << n, dtype=np.uint32)[None, :]
    mask = np.uint32((1 << n) - 1)
    d = diags.astype(np.uint32)[:, None]
    total = np.zeros((len(diags), 1 << n), dtype=np.uint32)
    for i in range(n):
        sel = (ys >> np.uint32(i)) & np.uint32(1)
        rows = (d >> np.uint32(i)) & mask
        total += sel * np.bitwise_count(rows & ys)
    return (total & 3).astype(np.uint8)


def dense_dot_table(
    values: np.ndarray,
    family: str = "hankel",
    ctx: Optional[FieldContext] = None,
    block: int = 4096,
):
    """Exact <s, phi_(Q,l)> for every label of the family, eps = 0.

    Yields (diags_block, dots_block) with dots of shape (len(block), 2^n);
    dots_block[a, l] is the inner product against the codeword (Q_a, l).
    """
    values = np.asarray(values, dtype=np.complex128)
    n = int(values.size - 1).bit_length()
    if values.size != 1 << n:
        raise ValueError("signal length must be a power of two")
    diags = _family_diags(family, ctx, n)
    scale = 1.0 / np.sqrt(1 << n)
    for start in range(0, len(diags), block):
        chunk = diags[start : start + block]
        exps = _hankel_exponents_block(chunk, n)
        demod = values[None, :] * np.conj(_I_POWERS[exps])
        dots = fwht(demod, axis=1) * scale
        yield chunk, dots


def dense_heavy_set(
    values: np.ndarray,
    threshold_sq: float,
    family: str = "hankel",
    ctx: Optional[FieldContext] = None,
) -> List[Tuple[CodewordLabel, complex]]:
    """All labels whose exact |<s, phi>|^2 meets threshold_sq, sorted by (Q, l)."""
    n = int(np.asarray(values).size - 1).bit_length()
    out = []
    for chunk, dots in dense_dot_table(values, family, ctx):
        hits = np.nonzero(np.abs(dots) ** 2 >= threshold_sq)
        for a, ell in zip(*hits):
            lab = CodewordLabel(HankelMat(n, int(chunk[a])), int(ell), 0)
            out.append((lab, complex(dots[a, ell])))
    return out


def restricted_max_tone(values: np.ndarray, q, j: int) -> np.ndarray:
    """For each (n-j)-bit suffix, the exact max over tones of |<R demod, psi>|^2.

    The demodulation uses the zero extension of the leading j x j block of q,
    so this is the quantity the prefix tests estimate.
    """
    values = np.asarray(values, dtype=np.complex128)
    n = int(values.size - 1).bit_length()
    sub = HankelMat(j, q.diag & ((1 << (2 * j - 1)) - 1)) if isinstance(q, HankelMat) else q
    exps = dense_exponents(sub, j).astype(np.uint8)
    resh = values.reshape(1 << (n - j), 1 << j)
    demod = resh * np.conj(_I_POWERS[exps])[None, :]
    dots = fwht(demod, axis=1) / np.sqrt(1 << j)
    return np.max(np.abs(dots) ** 2, axis=1)


def best_k_kerdock(
    ctx: FieldContext, values: np.ndarray, k: int
) -> Tuple[List[CodewordLabel], np.ndarray, float]:
    """Greedy brute-force k-term Kerdock approximation with joint refit.

    Each round scans every Kerdock codeword's exact dot against the residual
    and takes the largest (ties broken by (Q, l) order); coefficients are then
    refit jointly by least squares. Returns (labels, coefficients, error norm).
    """
    values = np.asarray(values, dtype=np.complex128)
    chosen: List[CodewordLabel] = []
    vectors: List[np.ndarray] = []
    residual = values.copy()
    for _ in range(k):
        best = None
        for chunk, dots in dense_dot_table(residual, "kerdock", ctx):
            mags = np.abs(dots)
            a, ell = np.unravel_index(np.argmax(mags), mags.shape)
            cand = (float(mags[a, ell]), int(chunk[a]), int(ell))
            if best is None or cand[0] > best[0] + 1e-15 or (
                abs(cand[0] - best[0]) <= 1e-15 and (cand[1], cand[2]) < (best[1], best[2])
            ):
                best = cand
        _, diag, ell = best
        lab = CodewordLabel(HankelMat(ctx.n, diag), ell, 0)
        if any(lab == c for c in chosen):
            break
        chosen.append(lab)
        vectors.append(dense_codeword(lab))
        basis = np.array(vectors)
        gram = basis.conj() @ basis.T
        rhs = basis.conj() @ values
        coeffs = np.linalg.solve(gram, rhs)
        residual = values - coeffs @ basis
    return chosen, coeffs, float(np.linalg.norm(residual))


# Structural verifiers -----------------------------------------------------


def verify_kerdock_set(ctx: FieldContext) -> Dict[str, bool]:
    """Exhaustive membership and rank checks of the linear-feedback family."""
    mats = kerdock_set(ctx)
    n = ctx.n
    contains_zero = any(m.diag == 0 for m in mats)
    nonzero_full = all(
        gf2_rank(m.rows) == n for m in mats if m.diag != 0
    )
    sums_full = True
    for i, a in enumerate(mats):
        for b in mats[i + 1 :]:
            if gf2_rank((a ^ b).rows) != n:
                sums_full = False
                break
        if not sums_full:
            break
    trace_match = {m.diag for m in mats} == {
        trace_kerdock(ctx, x).diag for x in range(1 << n)
    }
    size_ok = len({m.diag for m in mats}) == 1 << n
    return {
        "contains_zero": contains_zero,
        "nonzero_full_rank": nonzero_full,
        "pairwise_sums_full_rank": sums_full,
        "matches_trace_construction": trace_match,
        "size_2n": size_ok,
    }


def count_hankel_by_rank(n: int) -> Dict[int, int]:
    """Histogram of GF(2) rank over all 2^(2n-1) Hankel matrices."""
    if n > 9:
        raise ValueError("exhaustive rank count limited to n <= 9")
    diags = np.arange(1 << (2 * n - 1), dtype=np.uint32)
    mask = np.uint32((1 << n) - 1)
    rows = np.stack([(diags >> np.uint32(i)) & mask for i in range(n)], axis=1)
    ranks = gf2_rank_batch(rows, n)
    counts = np.bincount(ranks, minlength=n + 1)
    return {r: int(c) for r, c in enumerate(counts)}


def verify_dickson(
    n: int, num_pairs: int, seed: int = 0, tol: float = 1e-9
) -> Dict[str, object]:
    """Sampled check that RM(2) inner products obey the rank law.

    For every sampled label pair the exact |<phi_1, phi_2>| must be 0 or
    2^(-rank(Q1 xor Q2)/2), and must land on the branch that
    predict_dot_magnitude derives from the labels alone. Equal linear
    parts force the nonzero branch whenever the Q-difference has full
    rank; for degenerate differences the zero branch does occur even at
    equal l (the report counts those), so the nonzero guarantee is only
    asserted on the full-rank subpopulation.
    """
    rng = child_rng(seed, "dickson", n)
    failures = []
    branch_mismatches = []
    zero_with_equal_ell = 0
    full_rank_equal_ell = 0
    full_rank_equal_ell_zero = 0
    checked = 0
    for trial in range(num_pairs):
        rows1 = _random_sym_rows(rng, n)
        rows2 = _random_sym_rows(rng, n)
        same_ell = trial % 2 == 0
        ell1 = int(rng.integers(0, 1 << n))
        ell2 = ell1 if same_ell else int(rng.integers(0, 1 << n))
        eps1 = int(rng.integers(0, 4))
        eps2 = int(rng.integers(0, 4))
        a = CodewordLabel(SymMat(n, rows1), ell1, eps1)
        b = CodewordLabel(SymMat(n, rows2), ell2, eps2)
        mag = abs(pair_dot(a, b))
        r = gf2_rank(x ^ y for x, y in zip(rows1, rows2))
        expected = 2.0 ** (-r / 2.0)
        ok = abs(mag) <= tol or abs(mag - expected) <= tol
        if not ok:
            failures.append((a, b, mag, expected))
        if abs(mag - predict_dot_magnitude(a, b)) > tol:
            branch_mismatches.append((a, b, mag))
        if same_ell and mag <= tol:
            zero_with_equal_ell += 1
        if same_ell and r == n:
            full_rank_equal_ell += 1
            if mag <= tol:
                full_rank_equal_ell_zero += 1
        checked += 1
    return {
        "checked": checked,
        "failures": failures,
        "branch_mismatches": branch_mismatches,
        "zero_with_equal_ell": zero_with_equal_ell,
        "full_rank_equal_ell": full_rank_equal_ell,
        "full_rank_equal_ell_zero": full_rank_equal_ell_zero,
    }


def _random_sym_rows(rng, n: int) -> tuple:
    rows = [0] * n
    for i in range(n):
        for j in range(i, n):
            if rng.integers(0, 2):
                rows[i] |= 1 << j
                rows[j] |= 1 << i
    return tuple(rows)


def _kerdock_codeword_values(ctx: FieldContext) -> np.ndarray:
    """All N^2 * 4 Kerdock codewords as Z4 rows of length N."""
    n = ctx.n
    N = 1 << n
    ys = np.arange(N, dtype=np.uint32)
    rows = np.empty((N * N * 4, N), dtype=np.int8)
    i = 0
    for m in kerdock_set(ctx):
        qe = dense_exponents(m).astype(np.int64)
        for ell in range(N):
            lin = 2 * (np.bitwise_count(ys & np.uint32(ell)) & 1).astype(np.int64)
            base = (qe + lin) & 3
            for eps in range(4):
                rows[i] = (base + eps) & 3
                i += 1
    return rows


@dataclass
class IndependenceReport:
    n: int
    three_wise: bool
    three_half_wise: bool
    four_wise: bool
    three_half_witness: Optional[tuple] = None
    four_witness: Optional[tuple] = None


def verify_independence(n: int, ctx: Optional[FieldContext] = None) -> IndependenceReport:
    """Exhaustive k-position balance checks of the Z4 Kerdock code.

    A uniformly random codeword should be uniform on any 3 positions; on a
    4th position, conditioned on the other three, the halves {0,2} and {1,3}
    should balance (the 3.5-wise property). Both are checked over every
    position combination, with witnesses for whichever fails.
    """
    if n not in (3, 4, 5):
        raise ValueError("exhaustive independence check supports n in {3,4,5}")
    ctx = ctx or FieldContext.default(n)
    cw = _kerdock_codeword_values(ctx).astype(np.int64)
    N = 1 << n
    m = len(cw)
    three = True
    for t in combinations(range(N), 3):
        packed = (cw[:, t[0]] * 4 + cw[:, t[1]]) * 4 + cw[:, t[2]]
        if not (np.bincount(packed, minlength=64) == m // 64).all():
            three = False
            break
    three_half = True
    th_witness = None
    four = True
    four_witness = None
    for t in combinations(range(N), 4):
        packed3 = (cw[:, t[0]] * 4 + cw[:, t[1]]) * 4 + cw[:, t[2]]
        joint = np.bincount(packed3 * 4 + cw[:, t[3]], minlength=256).reshape(64, 4)
        if not (joint == m // 256).all():
            four = False
            if four_witness is None:
                four_witness = t
        if not ((joint[:, 0] == joint[:, 2]).all() and (joint[:, 1] == joint[:, 3]).all()):
            three_half = False
            if th_witness is None:
                th_witness = t
        if not three_half and not four:
            break
    return IndependenceReport(n, three, three_half and three, four, th_witness, four_witness)


def verify_gray_independence(n: int, ctx: Optional[FieldContext] = None) -> bool:
    """Whether the Gray image of the Kerdock code is 4-wise independent."""
    if n not in (3, 4):
        raise ValueError("exhaustive Gray check supports n in {3,4}")
    ctx = ctx or FieldContext.default(n)
    cw = _kerdock_codeword_values(ctx)
    bits = np.empty((len(cw), 2 << n), dtype=np.int64)
    for i, row in enumerate(cw):
        bits[i] = gray_codeword(row)
    m = len(bits)
    for t in combinations(range(2 << n), 4):
        packed = ((bits[:, t[0]] * 2 + bits[:, t[1]]) * 2 + bits[:, t[2]]) * 2 + bits[:, t[3]]
        if not (np.bincount(packed, minlength=16) == m // 16).all():
            return False
    return True


def verify_commute_equivalence(ctx: FieldContext) -> Dict[str, object]:
    """Three characterizations of Kerdock membership agree on every Hankel matrix.

    (a) the top row regenerates the matrix through the feedback recurrence,
    (b) the bilinear form commutes with multiplication by the generator,
    (c) u^T P v depends only on sqrt(uv):  u^T P v = w^T P w for w = sqrt(uv).
    Exhaustive over all 2^(2n-1) Hankel matrices; n <= 6.
    """
    n = ctx.n
    if n > 6:
        raise ValueError("exhaustive three-way check limited to n <= 6")
    size = 1 << n
    # carry-less products and sqrt(uv) lookup over all element pairs
    pm = np.empty((size, size), dtype=np.uint32)
    sq = np.empty((size, size), dtype=np.int64)
    for u in range(size):
        for v in range(size):
            pm[u, v] = poly_mul(u, v)
            sq[u, v] = ctx.sqrt(ctx.mul(u, v))
    pm_self = np.array([poly_mul(x, x) for x in range(size)], dtype=np.uint32)
    agree = True
    members = 0
    witness = None
    for diag in range(1 << (2 * n - 1)):
        mat = HankelMat(n, diag)
        a = lf_kerdock(ctx, mat.top_row).diag == diag
        b = check_commute(ctx, mat)
        bil = (np.bitwise_count(np.uint32(diag) & pm) & 1).astype(np.int64)
        qvec = (np.bitwise_count(np.uint32(diag) & pm_self) & 1).astype(np.int64)
        c = bool((bil == qvec[sq]).all())
        if not (a == b == c):
            agree = False
            if witness is None:
                witness = (diag, a, b, c)
        if a:
            members += 1
    return {"agree": agree, "members": members, "expected": size, "witness": witness}


def verify_homomorphism(ctx: FieldContext) -> Dict[str, bool]:
    """The normalized trace matrices multiply like the field itself.

    With J the inverse of the Gram matrix K_1, the map x -> K_x J satisfies
    (K_x J)(K_y J) = K_(xy) J and K_(x+y) = K_x + K_y. Exhaustive; n <= 8.
    """
    n = ctx.n
    if n > 8:
        raise ValueError("exhaustive homomorphism check limited to n <= 8")
    size = 1 << n
    k = [trace_kerdock(ctx, x).rows for x in range(size)]
    j_rows = gf2_inv(list(k[1]), n)
    kj = [gf2_matmul(k[x], j_rows) for x in range(size)]
    additive = all(
        all(ka ^ kb == kc for ka, kb, kc in zip(k[x], k[y], k[x ^ y]))
        for x in range(size)
        for y in range(size)
    )
    # batched GF(2) products of all pairs (K_x J)(K_y J)
    kj_rows = np.array(kj, dtype=np.uint32)
    bits = np.stack(
        [(kj_rows >> np.uint32(c)) & np.uint32(1) for c in range(n)], axis=2
    )  # (size, n, n): bits[x, i, c] = row i bit c
    mul_table = np.empty((size, size), dtype=np.int64)
    for x in range(size):
        for y in range(size):
            mul_table[x, y] = ctx.mul(x, y)
    multiplicative = True
    for x in range(size):
        prod = np.bitwise_xor.reduce(
            bits[x][None, :, :] * kj_rows[:, None, :], axis=2
        )  # (size, n): prod[y, i] = row i of (K_x J)(K_y J)
        expect = kj_rows[mul_table[x]]
        if not (prod == expect).all():
            multiplicative = False
            break
    return {"additive": additive, "multiplicative": multiplicative}
