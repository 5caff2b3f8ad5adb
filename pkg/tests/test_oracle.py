import numpy as np
import pytest

from kerdock.codebook import (
    CodewordLabel,
    HankelMat,
    dense_codeword,
    dense_exponents,
    gf2_rank,
    kerdock_set,
)
from kerdock.field import FieldContext
from kerdock.oracle import (
    best_k_kerdock,
    count_hankel_by_rank,
    dense_dot_table,
    dense_heavy_set,
    restricted_max_tone,
    verify_commute_equivalence,
    verify_dickson,
    verify_gray_independence,
    verify_homomorphism,
    verify_independence,
    verify_kerdock_set,
)
from kerdock.signal import fwht, make_noisy

_I = np.array([1, 1j, -1, -1j])


def test_dot_table_matches_direct_inner_products():
    rng = np.random.default_rng(0)
    n = 4
    vals = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    seen = 0
    for chunk, dots in dense_dot_table(vals, "hankel"):
        for a in (0, len(chunk) // 2):
            for ell in (0, 5):
                lab = CodewordLabel(HankelMat(n, int(chunk[a])), ell, 0)
                want = np.vdot(dense_codeword(lab), vals)
                assert abs(dots[a, ell] - want) < 1e-10
        seen += len(chunk)
    assert seen == 1 << (2 * n - 1)


def test_dot_table_kerdock_family_size():
    ctx = FieldContext.default(4)
    vals = np.zeros(16, dtype=np.complex128)
    vals[0] = 1.0
    seen = sum(len(chunk) for chunk, _ in dense_dot_table(vals, "kerdock", ctx))
    assert seen == 16


def test_heavy_set_equals_brute_force():
    n = 5
    ctx = FieldContext.default(n)
    mats = kerdock_set(ctx)
    terms = [
        (CodewordLabel(mats[3], 7, 0), 1.0),
        (CodewordLabel(mats[12], 1, 0), -0.5j),
    ]
    vals = make_noisy(n, terms, noise_energy=0.05, seed=1)
    heavy = dense_heavy_set(vals, threshold_sq=0.1, family="kerdock", ctx=ctx)
    found = {(lab.q.diag, lab.ell): c for lab, c in heavy}
    want = {}
    for m in mats:
        for ell in range(1 << n):
            lab = CodewordLabel(m, ell, 0)
            d = np.vdot(dense_codeword(lab), vals)
            if abs(d) ** 2 >= 0.1:
                want[(m.diag, ell)] = d
    assert set(found) == set(want)
    for key in want:
        assert abs(found[key] - want[key]) < 1e-10
    # planted labels clear the bar despite mutual cross-talk
    for lab, _ in terms:
        assert (lab.q.diag, lab.ell) in found


def test_restricted_max_tone_matches_manual_restriction():
    rng = np.random.default_rng(3)
    n, j = 5, 2
    vals = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    q = HankelMat(n, int(rng.integers(1 << (2 * n - 1))))
    got = restricted_max_tone(vals, q, j)
    sub = HankelMat(j, q.diag & ((1 << (2 * j - 1)) - 1))
    phases = np.conj(_I[dense_exponents(sub, j)])
    for suffix in range(1 << (n - j)):
        block = vals[suffix << j : (suffix + 1) << j]
        dots = fwht(block * phases) / np.sqrt(1 << j)
        assert abs(got[suffix] - np.max(np.abs(dots) ** 2)) < 1e-10


def test_best_k_recovers_planted_kerdock_terms():
    n = 5
    ctx = FieldContext.default(n)
    mats = kerdock_set(ctx)
    terms = [
        (CodewordLabel(mats[9], 20, 0), 1.0),
        (CodewordLabel(mats[4], 3, 0), 0.6),
        (CodewordLabel(mats[30], 31, 0), 0.3j),
    ]
    vals = make_noisy(n, terms)
    labels, coeffs, err = best_k_kerdock(ctx, vals, 3)
    got = {(lab.q.diag, lab.ell) for lab in labels}
    assert got == {(lab.q.diag, lab.ell) for lab, _ in terms}
    assert err < 1e-9
    by_key = {(lab.q.diag, lab.ell): c for lab, c in zip(labels, coeffs)}
    for lab, c in terms:
        assert abs(by_key[(lab.q.diag, lab.ell)] - c) < 1e-9


def test_best_k_error_is_monotone_in_k():
    rng = np.random.default_rng(7)
    n = 4
    ctx = FieldContext.default(n)
    vals = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    errs = [best_k_kerdock(ctx, vals, k)[2] for k in (1, 2, 4)]
    assert errs[0] >= errs[1] >= errs[2]


@pytest.mark.parametrize("n", [3, 4, 6])
def test_kerdock_set_properties(n):
    report = verify_kerdock_set(FieldContext.default(n))
    assert report == {
        "contains_zero": True,
        "nonzero_full_rank": True,
        "pairwise_sums_full_rank": True,
        "matches_trace_construction": True,
        "size_2n": True,
    }


def test_rank_histogram_counts():
    n = 4
    counts = count_hankel_by_rank(n)
    assert sum(counts.values()) == 1 << (2 * n - 1)
    assert counts[0] == 1
    # direct recount over every matrix
    direct = {}
    for diag in range(1 << (2 * n - 1)):
        r = gf2_rank(HankelMat(n, diag).rows)
        direct[r] = direct.get(r, 0) + 1
    assert counts == {r: direct.get(r, 0) for r in counts}


@pytest.mark.parametrize("n", [4, 6])
def test_low_rank_hankels_are_scarce(n):
    counts = count_hankel_by_rank(n)
    cum = 0
    for r in range(n + 1):
        cum += counts.get(r, 0)
        assert cum <= 1 << (4 * r)


def test_dickson_sampled_law_holds():
    report = verify_dickson(5, num_pairs=800, seed=0)
    assert report["checked"] == 800
    assert report["failures"] == []
    assert report["branch_mismatches"] == []
    assert report["full_rank_equal_ell"] > 0
    assert report["full_rank_equal_ell_zero"] == 0


def test_dickson_zero_at_equal_ell_happens_for_degenerate_pairs():
    # the zero branch under equal linear parts exists, just never at full rank
    report = verify_dickson(4, num_pairs=3000, seed=1)
    assert report["zero_with_equal_ell"] > 0
    assert report["full_rank_equal_ell_zero"] == 0


def test_independence_profile_odd_n():
    rep = verify_independence(3)
    assert rep.three_wise
    assert rep.three_half_wise
    assert not rep.four_wise
    assert rep.four_witness is not None


def test_independence_profile_even_n():
    rep = verify_independence(4)
    assert rep.three_wise
    assert not rep.three_half_wise
    assert rep.three_half_witness is not None


def test_gray_image_is_four_wise_independent_at_odd_n():
    assert verify_gray_independence(3)


def test_commute_equivalence_three_ways():
    eq = verify_commute_equivalence(FieldContext.default(4))
    assert eq["agree"]
    assert eq["members"] == eq["expected"] == 16
    assert eq["witness"] is None


def test_trace_matrices_multiply_like_the_field():
    rep = verify_homomorphism(FieldContext.default(4))
    assert rep == {"additive": True, "multiplicative": True}
