"""Binary field arithmetic GF(2^n) on integer bitsets.

A field element is a plain int whose bit i is the coefficient of t^i in the
polynomial basis 1, t, ..., t^(n-1); no wrapper object, no hidden context.
All operations take a FieldContext that pins n and a primitive modulus h(t).
The bit vector of an element doubles as its coordinate vector in the basis
(1, xi, ..., xi^(n-1)) where xi is the class of t, so "element as vector" is
the identity on ints.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional

import numpy as np

__all__ = [
    "FieldContext",
    "poly_mul",
    "poly_mod",
    "poly_gcd",
    "poly_degree",
    "is_irreducible",
    "is_primitive",
    "primitive_poly",
    "poly_table",
    "parse_poly_line",
    "format_poly_line",
]


def poly_degree(a: int) -> int:
    """Degree of a as a polynomial over GF(2); degree of 0 is -1."""
    return a.bit_length() - 1


def poly_mul(a: int, b: int) -> int:
    """Carry-less product in GF(2)[t], no reduction."""
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def poly_mod(a: int, h: int) -> int:
    dh = poly_degree(h)
    da = poly_degree(a)
    while da >= dh:
        a ^= h << (da - dh)
        da = poly_degree(a)
    return a


def poly_gcd(a: int, b: int) -> int:
    while b:
        a, b = b, poly_mod(a, b)
    return a


def _poly_modexp_t(exp: int, h: int) -> int:
    """t^exp mod h by square and multiply."""
    result = 1
    base = poly_mod(2, h)
    while exp:
        if exp & 1:
            result = poly_mod(poly_mul(result, base), h)
        base = poly_mod(poly_mul(base, base), h)
        exp >>= 1
    return result


def _prime_factors(m: int) -> List[int]:
    """Distinct prime factors by trial division; fine for m < 2^50."""
    out = []
    d = 2
    while d * d <= m:
        if m % d == 0:
            out.append(d)
            while m % d == 0:
                m //= d
        d += 1 if d == 2 else 2
    if m > 1:
        out.append(m)
    return out


def is_irreducible(h: int, n: int) -> bool:
    """Whether h of degree n is irreducible over GF(2)."""
    if poly_degree(h) != n or n < 1:
        return False
    if n == 1:
        return True
    # t^(2^n) == t mod h, and no factor of degree n/p for prime p | n
    if _poly_modexp_t(1 << n, h) != poly_mod(2, h):
        return False
    for p in _prime_factors(n):
        g = poly_gcd(_poly_modexp_t(1 << (n // p), h) ^ poly_mod(2, h), h)
        if g != 1:
            return False
    return True


def is_primitive(h: int, n: int) -> bool:
    """Whether h is primitive: irreducible with t of multiplicative order 2^n - 1.

    The order check walks the divisors of 2^n - 1 via its prime factorization
    (trial division; n <= 24 keeps every factor small).
    """
    if not is_irreducible(h, n):
        return False
    order = (1 << n) - 1
    if _poly_modexp_t(order, h) != 1:
        return False
    for q in _prime_factors(order):
        if _poly_modexp_t(order // q, h) == 1:
            return False
    return True


def parse_poly_line(line: str) -> tuple[int, int]:
    """Parse 'n: h_0 h_1 ... h_n' into (n, h as int bitset)."""
    head, _, tail = line.partition(":")
    n = int(head.strip())
    coeffs = [int(c) for c in tail.split()]
    if len(coeffs) != n + 1:
        raise ValueError(f"expected {n + 1} coefficients, got {len(coeffs)}")
    if any(c not in (0, 1) for c in coeffs):
        raise ValueError("coefficients must be 0 or 1")
    h = 0
    for i, c in enumerate(coeffs):
        h |= c << i
    if not (h & 1) or not (h >> n) & 1:
        raise ValueError("polynomial must have h_0 = h_n = 1")
    return n, h


def format_poly_line(n: int, h: int) -> str:
    coeffs = " ".join(str((h >> i) & 1) for i in range(n + 1))
    return f"{n}: {coeffs}"


_TABLE: Optional[Dict[int, int]] = None


def poly_table() -> Dict[int, int]:
    """The shipped table of one primitive polynomial per n in [1, 24]."""
    global _TABLE
    if _TABLE is None:
        text = (
            importlib.resources.files("kerdock.data")
            .joinpath("primitive_polys.txt")
            .read_text()
        )
        table = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            n, h = parse_poly_line(line)
            table[n] = h
        _TABLE = table
    return _TABLE


def primitive_poly(n: int) -> int:
    table = poly_table()
    if n not in table:
        raise ValueError(f"no tabled primitive polynomial for n={n}")
    return table[n]


@dataclass(frozen=True)
class FieldContext:
    """GF(2^n) with a fixed primitive modulus.

    Frozen and hashable; vectorization tables are built lazily and cached in
    a side slot so sharing a context across threads is safe (idempotent
    builds, last write wins with identical content).
    """

    n: int
    h: int
    _cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    @staticmethod
    def default(n: int) -> "FieldContext":
        return FieldContext(n, primitive_poly(n))

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if poly_degree(self.h) != self.n or not (self.h & 1):
            raise ValueError("h must be monic of degree n with h_0 = 1")
        if not is_primitive(self.h, self.n):
            raise ValueError("h must be primitive: xi has to generate the units")

    @property
    def order(self) -> int:
        return 1 << self.n

    @property
    def xi(self) -> int:
        """The class of t, a multiplicative generator."""
        return poly_mod(2, self.h)

    def add(self, a: int, b: int) -> int:
        return a ^ b

    def mul(self, a: int, b: int) -> int:
        return poly_mod(poly_mul(a, b), self.h)

    def square(self, a: int) -> int:
        return self.mul(a, a)

    def pow(self, a: int, e: int) -> int:
        result = 1
        base = a
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def xi_pow(self, e: int) -> int:
        return self.pow(self.xi, e)

    def sqrt(self, a: int) -> int:
        """Unique square root, a^(2^(n-1)); inverse of squaring."""
        for _ in range(self.n - 1):
            a = self.mul(a, a)
        return a

    def trace(self, a: int) -> int:
        """Trace to GF(2) by n-1 repeated squarings; value is 0 or 1."""
        acc = a
        sq = a
        for _ in range(self.n - 1):
            sq = self.mul(sq, sq)
            acc ^= sq
        if acc not in (0, 1):
            raise AssertionError("trace landed outside GF(2); modulus not primitive?")
        return acc

    def elements(self) -> Iterable[int]:
        return range(self.order)

    # vectorized paths ----------------------------------------------------

    @property
    def trace_mask(self) -> int:
        """Bitmask m with trace(x) = parity(x & m), by linearity of trace."""
        mask = self._cache.get("trace_mask")
        if mask is None:
            mask = 0
            for i in range(self.n):
                mask |= self.trace(1 << i) << i
            self._cache["trace_mask"] = mask
        return mask

    def trace_vec(self, xs: np.ndarray) -> np.ndarray:
        """Trace of many elements at once."""
        arr = np.asarray(xs, dtype=np.uint32)
        return (np.bitwise_count(arr & np.uint32(self.trace_mask)) & 1).astype(np.uint8)

    def _tables(self) -> tuple[np.ndarray, np.ndarray]:
        tabs = self._cache.get("tables")
        if tabs is None:
            if self.n > 20:
                raise ValueError("exp/log tables limited to n <= 20")
            size = self.order
            exp = np.zeros(size - 1, dtype=np.uint32)
            log = np.zeros(size, dtype=np.int64)
            x = 1
            for i in range(size - 1):
                exp[i] = x
                log[x] = i
                x = self.mul(x, self.xi)
            if x != 1:
                raise AssertionError("xi is not a generator; modulus not primitive")
            tabs = (exp, log)
            self._cache["tables"] = tabs
        return tabs

    def mul_vec(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Elementwise field product via exp/log tables."""
        exp, log = self._tables()
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        nz = (a != 0) & (b != 0)
        out = np.zeros(np.broadcast(a, b).shape, dtype=np.uint32)
        idx = (log[a[..., None][nz[..., None]]] + log[b[..., None][nz[..., None]]]) % (
            self.order - 1
        )
        out[nz] = exp[idx]
        return out

    def square_table(self) -> np.ndarray:
        """square_table()[x] = x*x; handy for iterated squaring on arrays."""
        tab = self._cache.get("square_table")
        if tab is None:
            tab = np.array([self.mul(x, x) for x in range(self.order)], dtype=np.uint32)
            self._cache["square_table"] = tab
        return tab
