import io

import numpy as np
import pytest

from kerdock.codebook import CodewordLabel, HankelMat, dense_codeword, kerdock_set
from kerdock.decoder import DecoderParams
from kerdock.field import FieldContext
from kerdock.oracle import best_k_kerdock
from kerdock.pursuit import (
    PursuitParams,
    Representation,
    ResidualOracle,
    is_kerdock_label,
    read_representation,
    sparse_approx,
    write_representation,
)
from kerdock.signal import DenseOracle, SyntheticOracle, make_noisy


def _terms(n, picks, coeffs, ell_seed=0):
    ctx = FieldContext.default(n)
    mats = kerdock_set(ctx)
    rng = np.random.default_rng(ell_seed)
    return [
        (CodewordLabel(mats[p], int(rng.integers(1 << n)), 0), c)
        for p, c in zip(picks, coeffs)
    ]


def _dense(n, rep):
    return rep.evaluate(np.arange(1 << n, dtype=np.uint32))


def test_params_validation_and_defaults():
    with pytest.raises(ValueError):
        PursuitParams(k=0, eps=0.1)
    with pytest.raises(ValueError):
        PursuitParams(k=2, eps=0.0)
    with pytest.raises(ValueError):
        PursuitParams(k=2, eps=0.1, rounds=0)
    p = PursuitParams(k=3, eps=0.05)
    assert p.resolved_rounds() == 4
    assert PursuitParams(k=3, eps=0.05, rounds=2).resolved_rounds() == 2
    inner = p.resolved_inner()
    assert inner.k == 3
    assert inner.resolved_cap() == 4096  # floor dominates 64 k^3 at small k
    custom = DecoderParams(k=7)
    assert PursuitParams(k=3, eps=0.1, inner=custom).resolved_inner() is custom


def test_coherence_regime_guard():
    o = SyntheticOracle(4, [])
    with pytest.raises(ValueError):
        sparse_approx(o, PursuitParams(k=2, eps=0.1), seed=0)


def test_representation_rejects_duplicate_labels():
    lab = CodewordLabel(HankelMat(3, 5), 1, 0)
    with pytest.raises(ValueError):
        Representation([(lab, 1.0), (lab, 2.0)])


def test_representation_evaluates_term_sum():
    n = 4
    terms = _terms(n, [2, 9], [1.0, -0.5j])
    rep = Representation(terms)
    direct = sum(c * dense_codeword(lab) for lab, c in terms)
    assert np.allclose(_dense(n, rep), direct, atol=1e-12)
    assert (_dense(n, Representation()) == 0).all()


def test_residual_oracle_subtracts_the_representation():
    n = 5
    terms = _terms(n, [4], [2.0])
    vals = make_noisy(n, terms, noise_energy=0.1, seed=1)
    base = DenseOracle(vals)
    res = ResidualOracle(base, Representation(terms), norm_hint=1.0)
    got = res.query_many(np.arange(1 << n))
    want = vals - terms[0][1] * dense_codeword(terms[0][0])
    assert np.allclose(got, want, atol=1e-12)
    assert res.norm_hint == 1.0


def test_is_kerdock_label_matches_the_family():
    n = 5
    ctx = FieldContext.default(n)
    members = {m.diag for m in kerdock_set(ctx)}
    for diag in range(1 << (2 * n - 1)):
        assert is_kerdock_label(ctx, diag) == (diag in members)


def test_pursuit_recovers_exact_sparse_signal():
    n = 9
    terms = _terms(n, [3, 40, 111], [1.0, 0.5, 0.25], ell_seed=2)
    o = SyntheticOracle(n, terms)
    rep = sparse_approx(o, PursuitParams(k=3, eps=0.05), seed=0)
    got = {(lab.q.diag, lab.ell): c for lab, c in rep.terms}
    # independent dot estimates leak coherence: (k-1) 2^(-n/2) max|c| per term
    leak = 2 * 2.0 ** (-n / 2.0) * 1.0 + 1e-6
    for lab, c in terms:
        assert abs(got[(lab.q.diag, lab.ell)] - c) <= leak
    err_sq = (
        np.linalg.norm(_dense(n, rep) - sum(c * dense_codeword(l) for l, c in terms))
        ** 2
    )
    assert err_sq <= 0.05 * (1.0 + 0.25 + 0.0625)


def test_pursuit_single_term():
    n = 7
    terms = _terms(n, [12], [1.5j], ell_seed=3)
    o = SyntheticOracle(n, terms)
    rep = sparse_approx(o, PursuitParams(k=1, eps=0.05), seed=1)
    assert len(rep.terms) == 1
    lab, c = rep.terms[0]
    assert (lab.q.diag, lab.ell) == (terms[0][0].q.diag, terms[0][0].ell)
    assert abs(c - 1.5j) < 1e-6


def test_pursuit_noisy_error_within_budget():
    n = 8
    k = 2
    terms = _terms(n, [7, 60], [1.0, 0.8], ell_seed=4)
    vals = make_noisy(n, terms, noise_energy=0.4, seed=5)
    o = DenseOracle(vals)
    rep = sparse_approx(o, PursuitParams(k=k, eps=0.1), seed=2)
    err_sq = np.linalg.norm(vals - _dense(n, rep)) ** 2
    ctx = FieldContext.default(n)
    _, _, best = best_k_kerdock(ctx, vals, k)
    assert err_sq <= (1.0 + 0.1 + 6.0 * k**2 / np.sqrt(1 << n)) * best**2


def test_pursuit_respects_the_term_budget():
    n = 8
    terms = _terms(n, [1, 2, 3, 4], [1.0, 0.9, 0.8, 0.7], ell_seed=6)
    o = SyntheticOracle(n, terms, noise_energy=0.2, seed=7)
    rep = sparse_approx(o, PursuitParams(k=2, eps=0.1), seed=3)
    assert len(rep.terms) <= 2


def test_pursuit_outputs_only_kerdock_labels():
    n = 9
    ctx = FieldContext.default(n)
    terms = _terms(n, [5, 19], [1.0, 0.6], ell_seed=8)
    o = SyntheticOracle(n, terms, noise_energy=0.3, seed=9)
    rep = sparse_approx(o, PursuitParams(k=3, eps=0.1), seed=4)
    for lab, _ in rep.terms:
        assert is_kerdock_label(ctx, lab.q.diag)


def test_pursuit_is_deterministic():
    n = 8
    terms = _terms(n, [3, 40], [1.0, 0.5], ell_seed=2)
    a = sparse_approx(
        SyntheticOracle(n, terms, 0.1, seed=1), PursuitParams(k=2, eps=0.05), seed=5
    )
    b = sparse_approx(
        SyntheticOracle(n, terms, 0.1, seed=1), PursuitParams(k=2, eps=0.05), seed=5
    )
    assert [(l.q.diag, l.ell, c) for l, c in a.terms] == [
        (l.q.diag, l.ell, c) for l, c in b.terms
    ]


def test_representation_file_round_trip():
    n = 6
    terms = _terms(n, [2, 30], [1.25 - 0.5j, 0.125], ell_seed=10)
    rep = Representation(terms)
    buf = io.StringIO()
    write_representation(rep, buf)
    buf.seek(0)
    back = read_representation(buf, n)
    assert [(l.q.diag, l.ell, l.eps, c) for l, c in back.terms] == [
        (l.q.diag, l.ell, l.eps, c) for l, c in rep.terms
    ]


def test_read_representation_skips_comments_and_blanks():
    text = "# comment\n\n" + "003f 2a 1 1 -0.5\n"
    rep = read_representation(io.StringIO(text), 6)
    assert len(rep.terms) == 1
    lab, c = rep.terms[0]
    assert lab.q.diag == 0x3F and lab.ell == 0x2A and lab.eps == 1
    assert c == 1 - 0.5j
