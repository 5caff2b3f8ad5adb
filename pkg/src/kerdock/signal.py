"""Signals on the hypercube and chosen-sampling oracle access.

A signal is a complex function on n-bit positions; decoders only ever touch it
through a SampleOracle, which charges one query per position served. Inner
products follow <a, b> = sum_y a(y) conj(b(y)), and codewords are the unit
vectors from the codebook module.
"""

from __future__ import annotations

from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from kerdock.codebook import CodewordLabel, dense_codeword, exponents_at
from kerdock.rng import child_rng, hashed_normals

__all__ = [
    "SampleOracle",
    "DenseOracle",
    "SyntheticOracle",
    "CachingOracle",
    "RestrictedOracle",
    "DemodulatedOracle",
    "make_noisy",
    "write_signal",
    "read_signal",
    "estimate_sq_norm",
    "estimate_dot",
    "estimate_dots",
    "fwht",
    "restrict_dense",
]

_I_POWERS = np.array([1, 1j, -1, -1j], dtype=np.complex128)


class SampleOracle:
    """Chosen-sampling access to a signal on n-bit positions.

    Subclasses implement _values(ys); query accounting lives here so every
    oracle charges exactly one query per position served.
    """

    def __init__(self, n: int, norm_hint: float):
        if n < 0:
            raise ValueError("n must be nonnegative")
        self.n = n
        self.norm_hint = float(norm_hint)
        self._count = 0

    @property
    def query_count(self) -> int:
        return self._count

    def query_many(self, ys: np.ndarray) -> np.ndarray:
        ys = np.asarray(ys, dtype=np.int64)
        if ys.size and (ys.min() < 0 or ys.max() >> self.n):
            raise ValueError("position outside domain")
        self._count += int(ys.size)
        return self._values(ys.astype(np.uint32))

    def query(self, y: int) -> complex:
        return complex(self.query_many(np.array([y]))[0])

    def _values(self, ys: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class DenseOracle(SampleOracle):
    """Oracle over a fully materialized signal vector."""

    def __init__(self, values: np.ndarray, norm_hint: Optional[float] = None):
        values = np.asarray(values, dtype=np.complex128)
        n = int(values.size - 1).bit_length()
        if values.size != 1 << n:
            raise ValueError("signal length must be a power of two")
        if norm_hint is None:
            norm_hint = float(np.linalg.norm(values))
        super().__init__(n, norm_hint)
        self.values = values

    def _values(self, ys: np.ndarray) -> np.ndarray:
        return self.values[ys]


class SyntheticOracle(SampleOracle):
    """Planted sparse signal synthesized per query, never materialized.

    The signal is sum_i c_i phi_i plus independent complex Gaussian noise of
    expected total energy noise_energy, derived statelessly from (seed, y) so
    a position always reads the same. Each query costs O(k n) word operations.
    """

    def __init__(
        self,
        n: int,
        terms: Sequence[Tuple[CodewordLabel, complex]],
        noise_energy: float = 0.0,
        seed: int = 0,
        norm_hint: Optional[float] = None,
    ):
        for label, _ in terms:
            if label.n != n:
                raise ValueError("term dimension mismatch")
        if norm_hint is None:
            norm_hint = float(
                np.sqrt(sum(abs(c) ** 2 for _, c in terms) + noise_energy)
            )
        super().__init__(n, norm_hint)
        self.terms = list(terms)
        self.noise_energy = float(noise_energy)
        self.seed = int(seed)

    def _values(self, ys: np.ndarray) -> np.ndarray:
        scale = 1.0 / np.sqrt(1 << self.n)
        out = np.zeros(ys.shape, dtype=np.complex128)
        for label, coeff in self.terms:
            out += coeff * scale * _I_POWERS[exponents_at(label, ys)]
        if self.noise_energy > 0:
            g = hashed_normals(self.seed, "plant-noise", ys)
            sigma = np.sqrt(self.noise_energy / (2 << self.n))
            out += sigma * (g[:, 0] + 1j * g[:, 1])
        return out


class CachingOracle(SampleOracle):
    """Memoizing wrapper: repeated positions are served from cache for free.

    query_count still counts every request; the wrapped oracle's own counter
    advances only on cache misses, so it measures distinct positions read.
    """

    def __init__(self, base: SampleOracle):
        super().__init__(base.n, base.norm_hint)
        self.base = base
        # dense mirror up to n = 20 (16 MB); dict beyond that
        if base.n <= 20:
            self._mirror: Optional[np.ndarray] = np.zeros(1 << base.n, dtype=np.complex128)
            self._have: Optional[np.ndarray] = np.zeros(1 << base.n, dtype=bool)
            self._store: Dict[int, complex] = {}
        else:
            self._mirror = None
            self._have = None
            self._store = {}

    @property
    def distinct_count(self) -> int:
        return self.base.query_count

    def _values(self, ys: np.ndarray) -> np.ndarray:
        flat = ys.ravel()
        if self._mirror is not None:
            need = ~self._have[flat]
            if need.any():
                uniq = np.unique(flat[need])
                self._mirror[uniq] = self.base.query_many(uniq)
                self._have[uniq] = True
            return self._mirror[flat].reshape(ys.shape)
        out = np.empty(flat.shape, dtype=np.complex128)
        missing: List[int] = []
        miss_idx: List[int] = []
        for i, y in enumerate(flat.tolist()):
            v = self._store.get(y)
            if v is None:
                missing.append(y)
                miss_idx.append(i)
            else:
                out[i] = v
        if missing:
            uniq = sorted(set(missing))
            vals = self.base.query_many(np.array(uniq, dtype=np.int64))
            table = dict(zip(uniq, vals.tolist()))
            self._store.update(table)
            for i, y in zip(miss_idx, missing):
                out[i] = table[y]
        return out.reshape(ys.shape)


class RestrictedOracle(SampleOracle):
    """Restriction to a fixed (n-j)-bit suffix: position y' reads s(y' + suffix 2^j)."""

    def __init__(self, base: SampleOracle, suffix: int, j: int):
        if not 0 <= j <= base.n:
            raise ValueError("prefix length out of range")
        if suffix >> (base.n - j):
            raise ValueError("suffix has bits beyond n-j")
        # average restricted energy is 2^(j-n) ||s||^2
        super().__init__(j, base.norm_hint * np.sqrt(2.0 ** (j - base.n)))
        self.base = base
        self.suffix = suffix
        self.j = j

    def _values(self, ys: np.ndarray) -> np.ndarray:
        return self.base.query_many(
            ys.astype(np.int64) | (self.suffix << self.j)
        )


class DemodulatedOracle(SampleOracle):
    """Pointwise product with the conjugate unit phase of a codeword label.

    Demodulating by (P, 0, 0) turns the quadratic component P of the signal
    into a pure tone: <demod(s), phi_(0,ell)> = <s, phi_(P,ell)>.
    """

    def __init__(self, base: SampleOracle, label: CodewordLabel):
        if label.n != base.n:
            raise ValueError("label dimension mismatch")
        super().__init__(base.n, base.norm_hint)
        self.base = base
        self.label = label

    def _values(self, ys: np.ndarray) -> np.ndarray:
        vals = self.base.query_many(ys.astype(np.int64))
        return vals * np.conj(_I_POWERS[exponents_at(self.label, ys)])


def make_noisy(
    n: int,
    terms: Sequence[Tuple[CodewordLabel, complex]],
    noise_energy: float = 0.0,
    seed: int = 0,
) -> np.ndarray:
    """Dense planted signal with noise rescaled to exact total energy.

    The noise vector is drawn from the stream (seed, "noise") and scaled so
    its squared norm equals noise_energy to float precision.
    """
    out = np.zeros(1 << n, dtype=np.complex128)
    for label, coeff in terms:
        if label.n != n:
            raise ValueError("term dimension mismatch")
        out += coeff * dense_codeword(label)
    if noise_energy > 0:
        rng = child_rng(seed, "noise")
        g = rng.standard_normal(2 << n)
        nu = g[0::2] + 1j * g[1::2]
        nu *= np.sqrt(noise_energy) / np.linalg.norm(nu)
        out += nu
    return out


def write_signal(path: str, values: np.ndarray) -> None:
    """Text form: 'n=<int>' header then one 're im' line per position."""
    values = np.asarray(values, dtype=np.complex128)
    n = int(values.size - 1).bit_length()
    if values.size != 1 << n:
        raise ValueError("signal length must be a power of two")
    with open(path, "w") as fh:
        fh.write(f"n={n}\n")
        for v in values:
            fh.write(f"{v.real:.17g} {v.imag:.17g}\n")


def read_signal(path: str) -> np.ndarray:
    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith("n="):
            raise ValueError("signal file must start with 'n=<int>'")
        n = int(header[2:])
        values = np.empty(1 << n, dtype=np.complex128)
        for i in range(1 << n):
            parts = fh.readline().split()
            if len(parts) != 2:
                raise ValueError(f"bad line at position {i}")
            values[i] = complex(float(parts[0]), float(parts[1]))
    return values


def _sample_positions(o: SampleOracle, samples: int, rng) -> np.ndarray:
    domain = 1 << o.n
    if samples >= domain:
        return np.arange(domain, dtype=np.int64)
    return rng.integers(0, domain, size=samples, dtype=np.int64)


def estimate_sq_norm(o: SampleOracle, samples: int, seed: int = 0) -> float:
    """Unbiased estimate of ||s||^2; exact when samples >= 2^n (each position once)."""
    ys = _sample_positions(o, samples, child_rng(seed, "sqnorm"))
    vals = o.query_many(ys)
    if ys.size == 1 << o.n:
        return float(np.sum(np.abs(vals) ** 2))
    return float((1 << o.n) * np.mean(np.abs(vals) ** 2))


def estimate_dot(
    o: SampleOracle, label: CodewordLabel, samples: int, seed: int = 0
) -> complex:
    """Unbiased estimate of <s, phi_label>; exact in exhaustive mode."""
    return estimate_dots(o, [label], samples, seed)[0]


def estimate_dots(
    o: SampleOracle, labels: Sequence[CodewordLabel], samples: int, seed: int = 0
) -> np.ndarray:
    """Dot estimates for many labels off one shared sample set."""
    ys = _sample_positions(o, samples, child_rng(seed, "dot"))
    vals = o.query_many(ys)
    exact = ys.size == 1 << o.n
    scale = 1.0 / np.sqrt(1 << o.n)
    out = np.empty(len(labels), dtype=np.complex128)
    for i, label in enumerate(labels):
        phases = np.conj(_I_POWERS[exponents_at(label, ys)]) * scale
        if exact:
            out[i] = np.sum(vals * phases)
        else:
            out[i] = (1 << o.n) * np.mean(vals * phases)
    return out


def fwht(a: np.ndarray, axis: int = -1) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform: out[l] = sum_y (-1)^(l.y) a[y]."""
    a = np.array(a, dtype=np.complex128, copy=True)
    a = np.moveaxis(a, axis, -1)
    m = a.shape[-1]
    if m & (m - 1):
        raise ValueError("length must be a power of two")
    h = 1
    while h < m:
        a = a.reshape(a.shape[:-1] + (m // (2 * h), 2, h))
        top = a[..., 0, :] + a[..., 1, :]
        bot = a[..., 0, :] - a[..., 1, :]
        a = np.stack([top, bot], axis=-2).reshape(a.shape[:-3] + (m,))
        h *= 2
    return np.moveaxis(a, -1, axis)


def restrict_dense(values: np.ndarray, j: int, suffix: int) -> np.ndarray:
    """Dense restriction: the 2^j values at positions y' + suffix 2^j."""
    return values[suffix << j : (suffix + 1) << j]
