"""Sparse approximation over the Kerdock dictionary by greedy pursuit.

Each round list-decodes the current residual, admits the heaviest new
Kerdock labels into the representation, and re-estimates every
coefficient against the original signal. The Kerdock set's pairwise
full-rank property does the heavy lifting: distinct members are nearly
orthogonal, so independently estimated coefficients are accurate to
O(k/sqrt(N)) without joint least squares, and any low-rank Hankel
neighbor the decoder drags in is discarded by a membership check rather
than by thresholding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, TextIO, Tuple

import numpy as np

from kerdock.codebook import (
    CodewordLabel,
    HankelMat,
    exponents_at,
    lf_kerdock,
    pack_hex,
    unpack_hex,
)
from kerdock.decoder import DecoderParams, list_decode_hankel
from kerdock.field import FieldContext
from kerdock.rng import child_rng
from kerdock.signal import SampleOracle, estimate_dots, estimate_sq_norm

_IPOW = np.array([1, 1j, -1, -1j], dtype=np.complex128)


@dataclass(frozen=True)
class PursuitParams:
    """Term budget k, target accuracy eps, and the inner decoder knobs.

    rounds defaults to ceil(log(1/eps)) + 1; inner defaults to the plain
    decoder at heaviness k. The coherence regime check (k at most
    sqrt(N)/6, so that mu*k <= 1/6 and per-term estimates stay inside
    half a coefficient) happens at decode time, when n is known.
    """

    k: int
    eps: float
    rounds: Optional[int] = None
    inner: Optional[DecoderParams] = None

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.eps <= 0.0:
            raise ValueError("eps must be positive")
        if self.rounds is not None and self.rounds < 1:
            raise ValueError("rounds must be at least 1")

    def resolved_rounds(self) -> int:
        if self.rounds is not None:
            return self.rounds
        return math.ceil(math.log(1.0 / self.eps)) + 1

    def resolved_inner(self) -> DecoderParams:
        if self.inner is not None:
            return self.inner
        # small-k residual decodes see noisy mid-level transients well above
        # 64 k^3 before the candidate set contracts; the floor keeps the
        # guardrail from tripping on legitimate pursuit inputs
        return DecoderParams(k=self.k, candidate_cap=max(64 * self.k**3, 4096))


@dataclass
class Representation:
    """A k-term Kerdock approximation: distinct labels with coefficients."""

    terms: List[Tuple[CodewordLabel, complex]] = field(default_factory=list)

    def __post_init__(self) -> None:
        keys = [(lab.q.diag, lab.ell, lab.eps) for lab, _ in self.terms]
        if len(set(keys)) != len(keys):
            raise ValueError("representation labels must be distinct")

    def evaluate(self, ys: np.ndarray) -> np.ndarray:
        """Sum of the terms at the given positions."""
        ys = np.asarray(ys, dtype=np.uint32)
        out = np.zeros(ys.shape, dtype=np.complex128)
        if not self.terms:
            return out
        n = self.terms[0][0].n
        root = math.sqrt(1 << n)
        for lab, c in self.terms:
            out += c * _IPOW[exponents_at(lab, ys)] / root
        return out


class ResidualOracle(SampleOracle):
    """Original signal minus the running representation, per query.

    Each query costs one base query plus O(k n^2) phase evaluations; the
    representation is never materialized. The norm hint must be supplied
    by the caller (the base hint no longer applies once terms are
    subtracted).
    """

    def __init__(
        self,
        base: SampleOracle,
        rep: Representation,
        norm_hint: float,
    ):
        super().__init__(base.n, norm_hint)
        self.base = base
        self.rep = rep

    def query_many(self, ys: np.ndarray) -> np.ndarray:
        return self.base.query_many(ys) - self.rep.evaluate(ys)


def is_kerdock_label(ctx: FieldContext, diag: int) -> bool:
    """Whether the diag is the left-multiplication matrix of its top row."""
    top = diag & ((1 << ctx.n) - 1)
    return lf_kerdock(ctx, top).diag == diag


def sparse_approx(
    oracle: SampleOracle,
    params: PursuitParams,
    seed: int = 0,
    ctx: Optional[FieldContext] = None,
) -> Representation:
    """Greedy k-term Kerdock pursuit of the signal behind the oracle.

    Round structure: decode the residual, keep only lf-Kerdock labels,
    admit the largest new coefficients up to the budget, then re-estimate
    every kept coefficient against the original oracle so errors do not
    compound. Residual norm hints for later rounds come from a sampled
    energy estimate with head-room; a residual estimated at zero ends the
    loop early.
    """
    n = oracle.n
    if ctx is None:
        ctx = FieldContext.default(n)
    if params.k > math.sqrt(1 << n) / 6.0:
        raise ValueError("k exceeds the sqrt(N)/6 coherence regime")
    inner = params.resolved_inner()
    est_samples = min(1 << n, 1 << 14)
    rep = Representation()

    for rnd in range(params.resolved_rounds()):
        if rnd == 0:
            residual: SampleOracle = oracle
        else:
            probe = ResidualOracle(oracle, rep, oracle.norm_hint)
            est = estimate_sq_norm(
                probe,
                max(256, 16 * params.k),
                seed=int(child_rng(seed, "rhint", rnd).integers(1 << 30)),
            )
            if est <= 1e-18 * max(oracle.norm_hint**2, 1.0):
                break
            residual = ResidualOracle(oracle, rep, math.sqrt(2.0 * est))
        found, _ = list_decode_hankel(
            residual, inner, seed=int(child_rng(seed, "round", rnd).integers(1 << 30))
        )
        have = {(lab.q.diag, lab.ell) for lab, _ in rep.terms}
        fresh = [
            (lab, c)
            for lab, c in found
            if (lab.q.diag, lab.ell) not in have
            and is_kerdock_label(ctx, lab.q.diag)
        ]
        fresh.sort(key=lambda t: -abs(t[1]))
        room = params.k - len(rep.terms)
        if not fresh[:room]:
            continue
        labels = [lab for lab, _ in rep.terms] + [lab for lab, _ in fresh[:room]]
        dots = estimate_dots(
            oracle,
            labels,
            est_samples,
            seed=int(child_rng(seed, "coeff", rnd).integers(1 << 30)),
        )
        rep = Representation([(lab, complex(c)) for lab, c in zip(labels, dots)])

    rep.terms.sort(key=lambda t: (-abs(t[1]) ** 2, t[0].q.diag, t[0].ell))
    return rep


def write_representation(rep: Representation, fh: TextIO) -> None:
    """One term per line: P-diag-hex ell-hex eps re(c) im(c)."""
    for lab, c in rep.terms:
        n = lab.n
        fh.write(
            f"{pack_hex(lab.q.diag, 2 * n - 1)} {pack_hex(lab.ell, n)} "
            f"{lab.eps} {c.real:.17g} {c.imag:.17g}\n"
        )


def read_representation(fh: TextIO, n: int) -> Representation:
    """Inverse of write_representation for an n-bit domain."""
    terms = []
    for line in fh:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        dh, lh, eps, re_s, im_s = line.split()
        lab = CodewordLabel(
            HankelMat(n, unpack_hex(dh, 2 * n - 1)), unpack_hex(lh, n), int(eps)
        )
        terms.append((lab, complex(float(re_s), float(im_s))))
    return Representation(terms)
