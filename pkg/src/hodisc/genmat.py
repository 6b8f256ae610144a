"""Generating matrices: Tezuka-type order-1 matrices and order-2 interlacing."""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import TextIO

from .gf2 import BinMatrix, irreducibles_up_to, laurent_coefficients

MATRIX_MAGIC = "hodisc-matrices v1"


class MatrixFormatError(ValueError):
    """Malformed matrix file; carries the 1-based line and column."""

    def __init__(self, message: str, line: int, column: int = 1) -> None:
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class GenMatrixSet:
    """Generating matrices of one digital sequence, one per coordinate."""

    matrices: tuple[BinMatrix, ...]
    order: int
    t_upper: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "matrices", tuple(self.matrices))
        if not self.matrices:
            raise ValueError("need at least one matrix")
        if self.order < 1:
            raise ValueError("order must be positive")
        if self.t_upper < 0:
            raise ValueError("t_upper must be non-negative")
        shape = self.matrices[0].shape
        if any(m.shape != shape for m in self.matrices):
            raise ValueError("all matrices must share one shape")

    @property
    def s(self) -> int:
        return len(self.matrices)

    @property
    def q_rows(self) -> int:
        return self.matrices[0].n_rows

    @property
    def n_cols(self) -> int:
        return self.matrices[0].n_cols

    def zero_structure_ok(self) -> bool:
        """True iff entry (k, l) vanishes whenever k > order * l."""
        for m in self.matrices:
            for k, row in enumerate(m.rows, start=1):
                # columns l < k / order must be zero
                lmax = (k - 1) // self.order
                if row & ((1 << min(lmax, m.n_cols)) - 1):
                    return False
        return True


def tezuka_polynomials(s: int):
    """p_1 = x, p_2 = x + 1, ...: the first ``s`` irreducibles in list order."""
    return irreducibles_up_to(s)


def tezuka_matrices(s: int, q_rows: int, n_cols: int | None = None) -> GenMatrixSet:
    """Order-1 generating matrices from the Laurent expansions of x^(e-z-1)/p^i.

    Row ``k`` of matrix ``j`` uses ``i - 1, z = divmod(k - 1, e_j)``.
    """
    if n_cols is None:
        n_cols = q_rows
    if s < 1 or n_cols < 1:
        raise ValueError("s and n_cols must be positive")
    if q_rows < n_cols:
        raise ValueError(f"q_rows={q_rows} must be at least n_cols={n_cols}")
    mats = []
    t_upper = 0
    for p in tezuka_polynomials(s):
        e = p.degree
        t_upper += e - 1
        rows = []
        for k in range(1, q_rows + 1):
            i_minus_1, z = divmod(k - 1, e)
            coeffs = laurent_coefficients(e - z - 1, p, i_minus_1 + 1, n_cols)
            rows.append(sum(b << l for l, b in enumerate(coeffs)))
        mats.append(BinMatrix(tuple(rows), n_cols))
    return GenMatrixSet(tuple(mats), order=1, t_upper=t_upper)


def interlace(base: GenMatrixSet) -> GenMatrixSet:
    """Interlace 2d order-1 matrices into d order-2 matrices.

    Row 2u + v of output matrix j is row u + 1 of input matrix 2(j - 1) + v.
    """
    if base.s % 2:
        raise ValueError(f"interlacing needs an even number of matrices, got {base.s}")
    if base.q_rows < base.n_cols:
        raise ValueError("base matrices need q_rows >= n_cols")
    d = base.s // 2
    depth = min(base.q_rows, base.n_cols)
    out = []
    for j in range(d):
        a, b = base.matrices[2 * j], base.matrices[2 * j + 1]
        rows = []
        for u in range(depth):
            rows.append(a.rows[u])
            rows.append(b.rows[u])
        out.append(BinMatrix(tuple(rows), base.n_cols))
    return GenMatrixSet(tuple(out), order=2, t_upper=2 * base.t_upper + d)


def order2_matrices(d: int, n_cols: int) -> GenMatrixSet:
    """Interlaced Tezuka construction in dimension ``d`` with 2n x n matrices."""
    return interlace(tezuka_matrices(2 * d, n_cols, n_cols))


def truncate(ms: GenMatrixSet, n: int) -> GenMatrixSet:
    """Upper-left (order * n) x n blocks of every matrix."""
    if n < 1 or n > ms.n_cols or ms.order * n > ms.q_rows:
        raise ValueError(
            f"cannot truncate {ms.q_rows}x{ms.n_cols} order-{ms.order} matrices to n={n}"
        )
    mats = tuple(m.submatrix(ms.order * n, n) for m in ms.matrices)
    return GenMatrixSet(mats, ms.order, ms.t_upper)


def dump_matrices(ms: GenMatrixSet) -> str:
    lines = [
        MATRIX_MAGIC,
        f"s={ms.s} order={ms.order} q={ms.q_rows} n={ms.n_cols} t_upper={ms.t_upper}",
    ]
    for m in ms.matrices:
        lines.append("")
        for r in m.rows:
            lines.append("".join("1" if (r >> l) & 1 else "0" for l in range(m.n_cols)))
    return "\n".join(lines) + "\n"


def write_matrices(ms: GenMatrixSet, destination: str | os.PathLike | TextIO) -> None:
    text = dump_matrices(ms)
    if hasattr(destination, "write"):
        destination.write(text)
    else:
        with open(destination, "w", encoding="ascii") as fh:
            fh.write(text)


def _parse_header(line: str, lineno: int) -> dict[str, int]:
    fields: dict[str, int] = {}
    col = 1
    for tok in line.split(" "):
        if not tok:
            col += 1
            continue
        key, sep, val = tok.partition("=")
        if not sep or not val.isdigit():
            raise MatrixFormatError(f"bad header field {tok!r}", lineno, col)
        fields[key] = int(val)
        col += len(tok) + 1
    missing = {"s", "order", "q", "n", "t_upper"} - fields.keys()
    if missing:
        raise MatrixFormatError(f"header missing {sorted(missing)}", lineno)
    return fields


def parse_matrices(text: str) -> GenMatrixSet:
    lines = text.splitlines()
    if not lines or lines[0].strip() != MATRIX_MAGIC:
        raise MatrixFormatError(f"expected {MATRIX_MAGIC!r}", 1)
    if len(lines) < 2:
        raise MatrixFormatError("missing header line", 2)
    hdr = _parse_header(lines[1].strip(), 2)
    s, q, n = hdr["s"], hdr["q"], hdr["n"]
    pos = 2
    mats = []
    for j in range(s):
        if pos >= len(lines) or lines[pos].strip():
            raise MatrixFormatError(f"expected blank line before matrix {j + 1}", pos + 1)
        pos += 1
        rows = []
        for k in range(q):
            lineno = pos + 1
            if pos >= len(lines):
                raise MatrixFormatError(f"matrix {j + 1} ends after {k} of {q} rows", lineno)
            line = lines[pos].rstrip("\r")
            if len(line) != n:
                raise MatrixFormatError(
                    f"matrix {j + 1} row {k + 1} has width {len(line)}, expected {n}",
                    lineno,
                    min(len(line), n) + 1,
                )
            r = 0
            for l, ch in enumerate(line):
                if ch == "1":
                    r |= 1 << l
                elif ch != "0":
                    raise MatrixFormatError(
                        f"matrix {j + 1} row {k + 1}: invalid character {ch!r}", lineno, l + 1
                    )
            rows.append(r)
            pos += 1
        mats.append(BinMatrix(tuple(rows), n))
    if any(line.strip() for line in lines[pos:]):
        raise MatrixFormatError("trailing content after last matrix", pos + 1)
    return GenMatrixSet(tuple(mats), order=hdr["order"], t_upper=hdr["t_upper"])


def read_matrices(source: str | os.PathLike | TextIO) -> GenMatrixSet:
    if hasattr(source, "read"):
        return parse_matrices(source.read())
    with open(source, encoding="ascii") as fh:
        return parse_matrices(fh.read())

