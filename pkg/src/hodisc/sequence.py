"""Exact point generation for digital sequences over F2.

A coordinate with ``precision_q`` binary digits is stored as its integer
numerator ``v`` over ``2**precision_q``; digit ``r`` (weight ``2**-r``) is bit
``precision_q - r`` of ``v``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, TextIO

import numpy as np

from .genmat import GenMatrixSet, truncate

POINTS_MAGIC = "hodisc-points v1"
MAX_PRECISION = 62


@dataclass(frozen=True, eq=False)
class DyadicPointSet:
    """N points in [0,1)^d with coordinates ``coords / 2**precision_q``."""

    coords: np.ndarray
    precision_q: int
    clamped: int = 0

    def __post_init__(self) -> None:
        if not 1 <= self.precision_q <= MAX_PRECISION:
            raise ValueError(f"precision_q must lie in [1, {MAX_PRECISION}]")
        arr = np.array(self.coords, dtype=np.int64)
        if arr.ndim != 2:
            raise ValueError("coords must be an N x d array")
        if arr.size and (arr.min() < 0 or arr.max() >= (1 << self.precision_q)):
            raise ValueError("coordinates must lie in [0, 2**precision_q)")
        arr.setflags(write=False)
        object.__setattr__(self, "coords", arr)

    @property
    def N(self) -> int:
        return self.coords.shape[0]

    @property
    def d(self) -> int:
        return self.coords.shape[1]

    def __len__(self) -> int:
        return self.N

    def as_float(self) -> np.ndarray:
        return np.ldexp(self.coords.astype(np.float64), -self.precision_q)

    def as_fractions(self) -> list[tuple[Fraction, ...]]:
        den = 1 << self.precision_q
        return [tuple(Fraction(int(v), den) for v in row) for row in self.coords]

    def with_precision(self, q: int) -> DyadicPointSet:
        """Same points at a finer precision (``q >= precision_q``)."""
        if q < self.precision_q:
            raise ValueError("can only refine precision")
        return DyadicPointSet(self.coords << (q - self.precision_q), q, self.clamped)

    def sorted_rows(self) -> list[tuple[int, ...]]:
        """Points as a sorted list of integer tuples (multiset view)."""
        return sorted(map(tuple, self.coords.tolist()))

    def same_multiset(self, other: DyadicPointSet) -> bool:
        if self.d != other.d or self.N != other.N:
            return False
        q = max(self.precision_q, other.precision_q)
        return self.with_precision(q).sorted_rows() == other.with_precision(q).sorted_rows()

    @classmethod
    def concat(cls, parts: Sequence[DyadicPointSet]) -> DyadicPointSet:
        q = max(p.precision_q for p in parts)
        coords = np.concatenate([p.with_precision(q).coords for p in parts], axis=0)
        return cls(coords, q, sum(p.clamped for p in parts))


@dataclass(frozen=True, eq=False)
class SequenceSpec:
    """Generating matrices, output precision and an optional digital shift.

    ``shift`` holds one numerator per coordinate (same layout as point
    coordinates); it is XORed into every generated point.
    """

    matrices: GenMatrixSet
    precision_q: int | None = None
    shift: tuple[int, ...] | None = None
    _columns: tuple[tuple[int, ...], ...] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        q = self.precision_q
        if q is None:
            q = min(self.matrices.q_rows, self.matrices.order * self.matrices.n_cols)
            object.__setattr__(self, "precision_q", q)
        if not 1 <= q <= min(self.matrices.q_rows, MAX_PRECISION):
            raise ValueError(
                f"precision_q={q} must lie in [1, min(q_rows={self.matrices.q_rows}, {MAX_PRECISION})]"
            )
        if self.shift is not None:
            sh = tuple(int(v) for v in self.shift)
            if len(sh) != self.d:
                raise ValueError(f"shift needs {self.d} entries, got {len(sh)}")
            if any(v < 0 or v >= (1 << q) for v in sh):
                raise ValueError(f"shift entries must have at most {q} bits")
            object.__setattr__(self, "shift", sh)
        object.__setattr__(self, "_columns", _column_values(self.matrices, q))

    @property
    def d(self) -> int:
        return self.matrices.s

    @property
    def n_cols(self) -> int:
        return self.matrices.n_cols

    def shift_or_zero(self) -> tuple[int, ...]:
        return self.shift if self.shift is not None else (0,) * self.d


def _column_values(ms: GenMatrixSet, q: int) -> tuple[tuple[int, ...], ...]:
    """Per matrix, column l as a q-digit numerator (row r -> bit q - r)."""
    out = []
    for m in ms.matrices:
        cols = [0] * m.n_cols
        for r in range(1, q + 1):
            row = m.rows[r - 1]
            while row:
                low = row & -row
                cols[low.bit_length() - 1] |= 1 << (q - r)
                row ^= low
        out.append(tuple(cols))
    return tuple(out)


def shift_from_bits(bits: str) -> int:
    """Digit string ``"1000..."`` (digit 1 first) to a shift numerator."""
    if not bits or any(c not in "01" for c in bits):
        raise ValueError(f"invalid shift digits {bits!r}")
    return int(bits, 2)


def random_shift(d: int, q: int, seed: int) -> tuple[int, ...]:
    rng = np.random.default_rng(seed)
    return tuple(int(v) for v in rng.integers(0, 1 << q, size=d, dtype=np.int64))


def point_at(spec: SequenceSpec, k: int) -> tuple[int, ...]:
    """Numerators of the k-th point (k counted from 0)."""
    if k < 0 or k >= (1 << spec.n_cols):
        raise ValueError(f"index {k} outside [0, 2**{spec.n_cols})")
    out = []
    for cols, sh in zip(spec._columns, spec.shift_or_zero()):
        v = sh
        l = 0
        kk = k
        while kk:
            if kk & 1:
                v ^= cols[l]
            kk >>= 1
            l += 1
        out.append(v)
    return tuple(out)


def _generate(spec: SequenceSpec, start: int, stop: int) -> np.ndarray:
    idx = np.arange(start, stop, dtype=np.int64)
    coords = np.empty((idx.size, spec.d), dtype=np.int64)
    for j, (cols, sh) in enumerate(zip(spec._columns, spec.shift_or_zero())):
        v = np.full(idx.size, sh, dtype=np.int64)
        for l, c in enumerate(cols):
            if c:
                v ^= ((idx >> l) & 1) * np.int64(c)
        coords[:, j] = v
    return coords


def prefix(spec: SequenceSpec, N: int) -> DyadicPointSet:
    """The first N points in index order."""
    if N < 1 or N > (1 << spec.n_cols):
        raise ValueError(f"N={N} outside [1, 2**{spec.n_cols}]")
    return DyadicPointSet(_generate(spec, 0, N), spec.precision_q)


@dataclass(frozen=True, eq=False)
class SubnetBlock:
    """Points with indices [start, start + 2**n) as a shifted digital net."""

    n: int
    start: int
    shift: tuple[int, ...]
    points: DyadicPointSet


def dyadic_parts(N: int) -> list[int]:
    """Exponents of the binary expansion of N, largest first."""
    return [b for b in range(N.bit_length() - 1, -1, -1) if (N >> b) & 1]


def prefix_decompose(spec: SequenceSpec, N: int) -> list[SubnetBlock]:
    """Split the first N points into digitally shifted subnets.

    Blocks follow index order, so the largest block comes first; each block
    starts at a multiple of its own size, which splits the index digits into
    a varying low part and a constant high part. The high part contributes
    the block's shift.
    """
    if N < 1 or N > (1 << spec.n_cols):
        raise ValueError(f"N={N} outside [1, 2**{spec.n_cols}]")
    q = spec.precision_q
    ms = spec.matrices
    blocks = []
    start = 0
    for n_mu in dyadic_parts(N):
        shift = point_at(spec, start)
        if n_mu == 0:
            coords = np.array([shift], dtype=np.int64)
        else:
            net = truncate(ms, n_mu)
            rows = min(net.q_rows, q)
            # the net carries rows 1..order*n_mu; place them at the top of q digits
            net_spec = SequenceSpec(net, precision_q=rows)
            coords = _generate(net_spec, 0, 1 << n_mu) << (q - rows)
            coords ^= np.array(shift, dtype=np.int64)
        blocks.append(SubnetBlock(n_mu, start, shift, DyadicPointSet(coords, q)))
        start += 1 << n_mu
    return blocks


def _bit_reverse(values: np.ndarray, q: int) -> np.ndarray:
    out = np.zeros_like(values)
    v = values.copy()
    for b in range(q):
        out |= (v & 1) << (q - 1 - b)
        v >>= 1
    return out


def van_der_corput(N: int, precision_q: int | None = None) -> DyadicPointSet:
    """First N terms of the base-2 radical inverse sequence."""
    if N < 1:
        raise ValueError("N must be positive")
    q = precision_q if precision_q is not None else max(1, (N - 1).bit_length())
    if (N - 1).bit_length() > q:
        raise ValueError(f"precision {q} too small for {N} terms")
    y = _bit_reverse(np.arange(N, dtype=np.int64), q)
    return DyadicPointSet(y[:, None], q)


def symmetrized_vdc(N: int, precision_q: int = 32) -> DyadicPointSet:
    """z_{2n} = y_n, z_{2n+1} = 1 - y_n, with the value 1 clamped to 1 - 2**-q."""
    if N < 1:
        raise ValueError("N must be positive")
    half = (N + 1) // 2
    if (half - 1).bit_length() > precision_q:
        raise ValueError(f"precision {precision_q} too small for {N} terms")
    y = _bit_reverse(np.arange(half, dtype=np.int64), precision_q)
    z = np.empty(2 * half, dtype=np.int64)
    z[0::2] = y
    z[1::2] = (1 << precision_q) - y
    z = z[:N]
    top = 1 << precision_q
    clamped = int(np.count_nonzero(z == top))
    z[z == top] = top - 1
    return DyadicPointSet(z[:, None], precision_q, clamped)


def format_points(points: DyadicPointSet) -> str:
    lines = [f"{POINTS_MAGIC} d={points.d} q={points.precision_q} N={points.N}"]
    lines.extend(" ".join(str(v) for v in row) for row in points.coords.tolist())
    return "\n".join(lines) + "\n"


def write_points(points: DyadicPointSet, destination: str | os.PathLike | TextIO) -> None:
    text = format_points(points)
    if hasattr(destination, "write"):
        destination.write(text)
    else:
        with open(destination, "w", encoding="ascii") as fh:
            fh.write(text)


def parse_points(text: str) -> DyadicPointSet:
    lines = text.splitlines()
    if not lines or not lines[0].startswith(POINTS_MAGIC):
        raise ValueError(f"line 1: expected {POINTS_MAGIC!r} header")
    fields = {}
    for tok in lines[0][len(POINTS_MAGIC):].split():
        key, _, val = tok.partition("=")
        if not val.isdigit():
            raise ValueError(f"line 1: bad header field {tok!r}")
        fields[key] = int(val)
    try:
        d, q, N = fields["d"], fields["q"], fields["N"]
    except KeyError as exc:
        raise ValueError(f"line 1: header missing {exc.args[0]}") from None
    body = [ln for ln in lines[1:] if ln.strip()]
    if len(body) != N:
        raise ValueError(f"header declares N={N} but file has {len(body)} points")
    rows = []
    for i, ln in enumerate(body, start=2):
        parts = ln.split()
        if len(parts) != d:
            raise ValueError(f"line {i}: expected {d} values, got {len(parts)}")
        try:
            rows.append([int(p) for p in parts])
        except ValueError:
            raise ValueError(f"line {i}: non-integer coordinate") from None
    return DyadicPointSet(np.array(rows, dtype=np.int64).reshape(N, d), q)


def read_points(source: str | os.PathLike | TextIO) -> DyadicPointSet:
    if hasattr(source, "read"):
        return parse_points(source.read())
    with open(source, encoding="ascii") as fh:
        return parse_points(fh.read())
