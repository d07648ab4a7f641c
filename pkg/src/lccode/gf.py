"""GF(2^q) arithmetic on indexed elements.

Field elements are indexed by integers in [0, 2^q): index i corresponds to
the binary tuple (a_0, ..., a_{q-1}) with i = sum_k a_k * 2^k, read as the
polynomial a_0 + a_1 z + ... + a_{q-1} z^{q-1}. Addition is carry-less
(XOR of indices); multiplication is polynomial multiplication reduced
modulo a prime (monic, irreducible) polynomial g(z) of degree q.

Two views of the same element set are supported:

- raw integer indices together with a :class:`GF2q` instance (the hot-path
  representation used by the decoder), and
- :class:`GFElement`, a small wrapper carrying its field, safe against
  mixing elements of different fields.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

# Minimal-weight prime polynomials, coefficient of z^k at tuple slot k.
DEFAULT_PRIME_POLYS = {
    2: (1, 1, 1),                    # z^2 + z + 1
    3: (1, 1, 0, 1),                 # z^3 + z + 1
    4: (1, 1, 0, 0, 1),              # z^4 + z + 1
    5: (1, 0, 1, 0, 0, 1),           # z^5 + z^2 + 1
    6: (1, 1, 0, 0, 0, 0, 1),        # z^6 + z + 1
    7: (1, 1, 0, 0, 0, 0, 0, 1),     # z^7 + z + 1
    8: (1, 0, 1, 1, 1, 0, 0, 0, 1),  # z^8 + z^4 + z^3 + z^2 + 1
}


def _poly_to_int(coeffs: Sequence[int]) -> int:
    v = 0
    for k, c in enumerate(coeffs):
        if c not in (0, 1):
            raise ValueError(f"polynomial coefficients must be 0/1, got {c}")
        v |= int(c) << k
    return v


def _gf2_poly_mod(a: int, b: int) -> int:
    """Remainder of a(z) / b(z) with GF(2) coefficients packed in ints."""
    db = b.bit_length() - 1
    while a.bit_length() - 1 >= db and a:
        a ^= b << (a.bit_length() - 1 - db)
    return a


def is_irreducible(coeffs: Sequence[int]) -> bool:
    """Trial division by every monic polynomial of degree <= deg/2."""
    g = _poly_to_int(coeffs)
    deg = g.bit_length() - 1
    if deg < 1:
        return False
    for d in range(1, deg // 2 + 1):
        for p in range(1 << d, 1 << (d + 1)):
            if _gf2_poly_mod(g, p) == 0:
                return False
    return True


class GF2q:
    """The field GF(2^q) with lookup-table multiplication.

    Parameters
    ----------
    q : int
        Order exponent, 2 <= q <= 8.
    poly : sequence of int, optional
        Coefficient vector of the prime polynomial g(z), length q+1,
        entries in {0, 1}, poly[k] the coefficient of z^k. Must be monic
        with constant term 1 and irreducible over GF(2). Defaults to a
        standard minimal-weight choice per q; any prime polynomial yields
        an isomorphic field.

    Immutable after construction; the tables are shared safely across
    threads.
    """

    def __init__(self, q: int, poly: Sequence[int] | None = None):
        if not 2 <= q <= 8:
            raise ValueError(f"q must be in [2, 8], got {q}")
        if poly is None:
            poly = DEFAULT_PRIME_POLYS[q]
        poly = tuple(int(c) for c in poly)
        if len(poly) != q + 1:
            raise ValueError(f"poly must have length q+1={q + 1}, got {len(poly)}")
        if poly[q] != 1:
            raise ValueError("poly must be monic (z^q coefficient 1)")
        if poly[0] != 1:
            raise ValueError("poly must have constant term 1")
        if not is_irreducible(poly):
            raise ValueError(f"poly {poly} is reducible over GF(2)")

        self.q = q
        self.size = 1 << q
        self.poly = poly
        self._poly_int = _poly_to_int(poly)

        # bits[v, k] = k-th tuple entry of element v; bipolar = 2*bits - 1.
        vs = np.arange(self.size, dtype=np.int64)
        self.bits = ((vs[:, None] >> np.arange(q)[None, :]) & 1).astype(np.uint8)
        self.bipolar = (2.0 * self.bits - 1.0).astype(np.float64)

        self.mul_table = np.empty((self.size, self.size), dtype=np.int64)
        for a in range(self.size):
            for b in range(a, self.size):
                p = self._poly_mul(a, b)
                self.mul_table[a, b] = p
                self.mul_table[b, a] = p

        # Every nonzero row of the table must be a permutation containing 1,
        # otherwise g(z) was not prime after all.
        self.inv_table = np.zeros(self.size, dtype=np.int64)
        for a in range(1, self.size):
            hits = np.nonzero(self.mul_table[a] == 1)[0]
            if hits.size != 1:
                raise ValueError(f"element {a} lacks a unique inverse under {poly}")
            self.inv_table[a] = hits[0]
        self.mul_table.setflags(write=False)
        self.inv_table.setflags(write=False)
        self.bits.setflags(write=False)
        self.bipolar.setflags(write=False)

    def _poly_mul(self, a: int, b: int) -> int:
        """Schoolbook carry-less multiply, then reduce mod g(z)."""
        acc = 0
        for k in range(self.q):
            if (b >> k) & 1:
                acc ^= a << k
        for k in range(2 * self.q - 2, self.q - 1, -1):
            if (acc >> k) & 1:
                acc ^= self._poly_int << (k - self.q)
        return acc & (self.size - 1)

    # -- arithmetic on raw indices -------------------------------------

    def add(self, a: int, b: int) -> int:
        self._check_index(a)
        self._check_index(b)
        return a ^ b

    def mul(self, a: int, b: int) -> int:
        self._check_index(a)
        self._check_index(b)
        return int(self.mul_table[a, b])

    def inv(self, a: int) -> int:
        self._check_index(a)
        if a == 0:
            raise ZeroDivisionError("zero has no multiplicative inverse")
        return int(self.inv_table[a])

    # -- tuple mappings -------------------------------------------------

    def psi(self, bits: Sequence[int]) -> int:
        """Pack a binary q-tuple (a_0, ..., a_{q-1}) into an element index."""
        if len(bits) != self.q:
            raise ValueError(f"expected a {self.q}-tuple, got length {len(bits)}")
        v = 0
        for k, b in enumerate(bits):
            if b not in (0, 1):
                raise ValueError(f"tuple entries must be 0/1, got {b}")
            v |= int(b) << k
        return v

    def psi_inv(self, v: int) -> tuple[int, ...]:
        """Unpack an element index into its binary q-tuple."""
        self._check_index(v)
        return tuple(int(x) for x in self.bits[v])

    def theta(self, symbols: Sequence[float]) -> int:
        """Map a bipolar q-tuple in {-1, +1}^q to the element of its bit image."""
        if len(symbols) != self.q:
            raise ValueError(f"expected a {self.q}-tuple, got length {len(symbols)}")
        bits = []
        for s in symbols:
            if s not in (-1, 1):
                raise ValueError(f"bipolar entries must be -1 or +1, got {s}")
            bits.append((1 + int(s)) // 2)
        return self.psi(bits)

    # -- element helpers --------------------------------------------------

    def element(self, index: int) -> "GFElement":
        return GFElement(self, index)

    def elements(self) -> list["GFElement"]:
        return [GFElement(self, i) for i in range(self.size)]

    def nonzero_indices(self) -> list[int]:
        return list(range(1, self.size))

    def _check_index(self, v: int) -> None:
        if not 0 <= v < self.size:
            raise ValueError(f"index {v} out of range for GF(2^{self.q})")

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, GF2q) and self.q == other.q and self.poly == other.poly
        )

    def __hash__(self) -> int:
        return hash((self.q, self.poly))

    def __repr__(self) -> str:
        return f"GF2q(q={self.q}, poly={self.poly})"


@dataclass(frozen=True)
class GFElement:
    """An element of a specific GF(2^q), identified by its tuple index."""

    field: GF2q
    index: int

    def __post_init__(self):
        self.field._check_index(self.index)

    def __add__(self, other: "GFElement") -> "GFElement":
        return gf_add(self, other)

    def __mul__(self, other: "GFElement") -> "GFElement":
        return gf_mul(self, other)

    def bits(self) -> tuple[int, ...]:
        return self.field.psi_inv(self.index)


def _same_field(a: GFElement, b: GFElement) -> GF2q:
    if a.field != b.field:
        raise ValueError(f"elements belong to different fields: {a.field} vs {b.field}")
    return a.field


def gf_add(a: GFElement, b: GFElement) -> GFElement:
    """Field addition: XOR of indices (componentwise tuple addition)."""
    f = _same_field(a, b)
    return GFElement(f, a.index ^ b.index)


def gf_mul(a: GFElement, b: GFElement) -> GFElement:
    """Field multiplication: polynomial product reduced mod g(z)."""
    f = _same_field(a, b)
    return GFElement(f, f.mul(a.index, b.index))
