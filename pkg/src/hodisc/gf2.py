"""Polynomials and bit-matrices over the two-element field.

Polynomials are stored as Python ints (bit ``i`` is the coefficient of
``x**i``). Matrix rows are ints as well, little-endian: bit ``l - 1`` holds
column ``l``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence


@dataclass(frozen=True, order=True)
class GF2Poly:
    """A polynomial over F2 with bit-packed coefficients."""

    bits: int

    def __post_init__(self) -> None:
        if self.bits < 0:
            raise ValueError("coefficient bits must be non-negative")

    @property
    def degree(self) -> int:
        """Degree of the polynomial; -1 for the zero polynomial."""
        return self.bits.bit_length() - 1

    def is_zero(self) -> bool:
        return self.bits == 0

    def __mul__(self, other: GF2Poly) -> GF2Poly:
        return poly_mul(self, other)

    def __pow__(self, k: int) -> GF2Poly:
        return poly_pow(self, k)

    def __str__(self) -> str:
        if self.bits == 0:
            return "0"
        terms = []
        for i in range(self.degree, -1, -1):
            if (self.bits >> i) & 1:
                terms.append("1" if i == 0 else ("x" if i == 1 else f"x^{i}"))
        return "+".join(terms)

    @classmethod
    def from_exponents(cls, *exponents: int) -> GF2Poly:
        bits = 0
        for e in exponents:
            bits ^= 1 << e
        return cls(bits)


X = GF2Poly(0b10)
ONE = GF2Poly(0b1)


def clmul(a: int, b: int) -> int:
    """Carry-less product of two bit-packed polynomials."""
    if a.bit_length() < b.bit_length():
        a, b = b, a
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def poly_mul(a: GF2Poly, b: GF2Poly) -> GF2Poly:
    return GF2Poly(clmul(a.bits, b.bits))


def poly_pow(a: GF2Poly, k: int) -> GF2Poly:
    if k < 0:
        raise ValueError("negative exponent")
    result, base = 1, a.bits
    while k:
        if k & 1:
            result = clmul(result, base)
        base = clmul(base, base)
        k >>= 1
    return GF2Poly(result)


def poly_divmod(a: int, b: int) -> tuple[int, int]:
    """Quotient and remainder of bit-packed polynomials ``a / b``."""
    if b == 0:
        raise ZeroDivisionError("division by the zero polynomial")
    db = b.bit_length() - 1
    q = 0
    while a and a.bit_length() - 1 >= db:
        shift = a.bit_length() - 1 - db
        q ^= 1 << shift
        a ^= b << shift
    return q, a


def is_irreducible(p: GF2Poly) -> bool:
    """Trial division by every polynomial of degree 1..deg(p)//2."""
    deg = p.degree
    if deg < 1:
        return False
    for cand in range(2, 1 << (deg // 2 + 1)):
        if poly_divmod(p.bits, cand)[1] == 0:
            return False
    return True


def irreducibles_up_to(count: int) -> list[GF2Poly]:
    """First ``count`` irreducible polynomials ordered by (degree, bits).

    The list starts ``x, x+1, x^2+x+1, ...``; within one degree the
    polynomials come in ascending order of their coefficient encoding.
    """
    if count < 1:
        raise ValueError("count must be positive")
    out: list[GF2Poly] = []
    bits = 2
    while len(out) < count:
        p = GF2Poly(bits)
        if is_irreducible(p):
            out.append(p)
        bits += 1
    return out


def laurent_coefficients(
    numerator_power: int, denominator: GF2Poly, power: int, length: int
) -> tuple[int, ...]:
    """Coefficients a_1..a_length of x^numerator_power / denominator^power.

    The expansion lives in F2((1/x)) as ``sum_{l>=1} a_l x^{-l}``. Computed by
    dividing ``x^(numerator_power + length)`` by the denominator power; the
    quotient's low ``length`` bits, read downwards, are the a_l.
    """
    if power < 1 or length < 1:
        raise ValueError("power and length must be positive")
    den = poly_pow(denominator, power)
    if numerator_power < 0 or numerator_power >= den.degree:
        raise ValueError(
            f"numerator power {numerator_power} must lie in [0, {den.degree})"
        )
    q, _ = poly_divmod(1 << (numerator_power + length), den.bits)
    return tuple((q >> (length - l)) & 1 for l in range(1, length + 1))


@dataclass(frozen=True)
class BinMatrix:
    """A q x n matrix over F2; ``rows[k]`` bit ``l`` is entry (k+1, l+1)."""

    rows: tuple[int, ...]
    n_cols: int

    def __post_init__(self) -> None:
        if self.n_cols < 0:
            raise ValueError("n_cols must be non-negative")
        object.__setattr__(self, "rows", tuple(int(r) for r in self.rows))
        limit = 1 << self.n_cols
        for i, r in enumerate(self.rows):
            if r < 0 or r >= limit:
                raise ValueError(f"row {i + 1} does not fit in {self.n_cols} columns")

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    @property
    def shape(self) -> tuple[int, int]:
        return self.n_rows, self.n_cols

    def entry(self, k: int, l: int) -> int:
        """Entry in row ``k``, column ``l`` (both 1-based)."""
        return (self.rows[k - 1] >> (l - 1)) & 1

    def column(self, l: int) -> int:
        """Column ``l`` as an int whose bit ``k - 1`` is entry (k, l)."""
        out = 0
        for k, r in enumerate(self.rows):
            out |= ((r >> (l - 1)) & 1) << k
        return out

    def submatrix(self, n_rows: int, n_cols: int) -> BinMatrix:
        """Upper-left ``n_rows x n_cols`` block."""
        if not (0 <= n_rows <= self.n_rows and 0 <= n_cols <= self.n_cols):
            raise ValueError("submatrix exceeds matrix dimensions")
        mask = (1 << n_cols) - 1
        return BinMatrix(tuple(r & mask for r in self.rows[:n_rows]), n_cols)

    def to_lists(self) -> list[list[int]]:
        return [[(r >> l) & 1 for l in range(self.n_cols)] for r in self.rows]

    @classmethod
    def from_lists(cls, rows: Sequence[Sequence[int]]) -> BinMatrix:
        if not rows:
            raise ValueError("matrix needs at least one row")
        n_cols = len(rows[0])
        packed = []
        for i, row in enumerate(rows):
            if len(row) != n_cols:
                raise ValueError(f"row {i + 1} has {len(row)} entries, expected {n_cols}")
            packed.append(sum((int(b) & 1) << l for l, b in enumerate(row)))
        return cls(tuple(packed), n_cols)

    @classmethod
    def identity(cls, n: int) -> BinMatrix:
        return cls(tuple(1 << i for i in range(n)), n)


def rank_rows(rows: Iterable[int]) -> int:
    """Rank over F2 of a collection of bit-packed row vectors."""
    basis: dict[int, int] = {}
    for r in rows:
        while r:
            top = r.bit_length() - 1
            pivot = basis.get(top)
            if pivot is None:
                basis[top] = r
                break
            r ^= pivot
    return len(basis)


def rank_f2(m: BinMatrix) -> int:
    """Rank of ``m`` over F2 by Gaussian elimination on packed rows."""
    return rank_rows(m.rows)


class XorBasis:
    """Incrementally built row-echelon basis keyed by leading bit."""

    __slots__ = ("pivots",)

    def __init__(self, pivots: dict[int, int] | None = None) -> None:
        self.pivots = {} if pivots is None else pivots

    def copy(self) -> XorBasis:
        return XorBasis(dict(self.pivots))

    def insert(self, r: int) -> bool:
        """Add ``r``; return False if it was already in the span."""
        pivots = self.pivots
        while r:
            top = r.bit_length() - 1
            p = pivots.get(top)
            if p is None:
                pivots[top] = r
                return True
            r ^= p
        return False

    def __len__(self) -> int:
        return len(self.pivots)
