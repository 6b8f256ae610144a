from __future__ import annotations

import io
from math import comb

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hodisc.genmat import (
    GenMatrixSet,
    MatrixFormatError,
    dump_matrices,
    interlace,
    order2_matrices,
    parse_matrices,
    read_matrices,
    tezuka_matrices,
    tezuka_polynomials,
    truncate,
    write_matrices,
)
from hodisc.gf2 import BinMatrix


def test_polynomial_order():
    assert [p.bits for p in tezuka_polynomials(4)] == [0b10, 0b11, 0b111, 0b1011]


def test_two_dimensional_case_is_identity_and_pascal():
    ms = tezuka_matrices(2, 12)
    ident, pascal = ms.matrices
    assert ident == BinMatrix.identity(12)
    assert pascal.to_lists() == [[comb(l, k) % 2 for l in range(12)] for k in range(12)]


def test_t_upper():
    assert tezuka_matrices(1, 4).t_upper == 0
    assert tezuka_matrices(2, 4).t_upper == 0
    assert tezuka_matrices(4, 6).t_upper == 3  # degrees 1, 1, 2, 3
    assert order2_matrices(1, 4).t_upper == 1
    assert order2_matrices(2, 4).t_upper == 2 * 3 + 2


def test_upper_triangular_order1():
    ms = tezuka_matrices(6, 24, 24)
    assert ms.zero_structure_ok()
    for m in ms.matrices:
        for k in range(1, 25):
            assert m.entry(k, k) == 1  # non-singular triangular blocks


def test_interlacing_rows():
    base = tezuka_matrices(4, 8, 8)
    out = interlace(base)
    assert out.s == 2 and out.order == 2 and out.q_rows == 16
    for j in range(2):
        for u in range(8):
            for v in range(2):
                assert out.matrices[j].rows[2 * u + v] == base.matrices[2 * j + v].rows[u]


def test_interlaced_zero_structure():
    for d in (1, 2, 3):
        assert order2_matrices(d, 12).zero_structure_ok()


def test_interlace_needs_even_count():
    with pytest.raises(ValueError):
        interlace(tezuka_matrices(3, 4))


def test_truncate():
    ms = order2_matrices(2, 8)
    t = truncate(ms, 3)
    assert t.q_rows == 6 and t.n_cols == 3 and t.t_upper == ms.t_upper
    assert t.matrices[1].rows == tuple(r & 0b111 for r in ms.matrices[1].rows[:6])
    with pytest.raises(ValueError):
        truncate(ms, 9)


def test_rejects_mismatched_shapes():
    with pytest.raises(ValueError):
        GenMatrixSet((BinMatrix.identity(2), BinMatrix.identity(3)), 1, 0)
    with pytest.raises(ValueError):
        tezuka_matrices(2, 3, 4)


matrix_sets = st.builds(
    lambda s, q, n, order, t, seed: GenMatrixSet(
        tuple(
            BinMatrix(tuple((seed * (k + 7) * (j + 3)) % (1 << n) for k in range(q)), n)
            for j in range(s)
        ),
        order,
        t,
    ),
    st.integers(1, 3),
    st.integers(1, 10),
    st.integers(1, 10),
    st.integers(1, 3),
    st.integers(0, 9),
    st.integers(0, 10**6),
)


@given(matrix_sets)
def test_text_roundtrip(ms):
    assert parse_matrices(dump_matrices(ms)) == ms
    buf = io.StringIO()
    write_matrices(ms, buf)
    buf.seek(0)
    assert read_matrices(buf) == ms


def test_file_roundtrip(tmp_path):
    ms = order2_matrices(2, 5)
    path = tmp_path / "m.txt"
    write_matrices(ms, path)
    assert read_matrices(path) == ms


def test_format_layout():
    text = dump_matrices(tezuka_matrices(2, 2))
    assert text.splitlines() == [
        "hodisc-matrices v1",
        "s=2 order=1 q=2 n=2 t_upper=0",
        "",
        "10",
        "01",
        "",
        "11",
        "01",
    ]


@pytest.mark.parametrize(
    "text, line, fragment",
    [
        ("nope\n", 1, "hodisc-matrices"),
        ("hodisc-matrices v1\ns=1 order=1 q=2 n=2\n", 2, "header missing"),
        ("hodisc-matrices v1\ns=1 order=1 q=2 n=2 t_upper=0\n\n10\n0x\n", 5, "invalid character"),
        ("hodisc-matrices v1\ns=1 order=1 q=2 n=2 t_upper=0\n\n10\n011\n", 5, "width 3"),
        ("hodisc-matrices v1\ns=1 order=1 q=2 n=2 t_upper=0\n\n10\n", 5, "ends after 1"),
        ("hodisc-matrices v1\ns=1 order=1 q=1 n=2 t_upper=0\n10\n", 3, "blank line"),
    ],
)
def test_parse_errors_name_the_line(text, line, fragment):
    with pytest.raises(MatrixFormatError) as info:
        parse_matrices(text)
    assert info.value.line == line
    assert fragment in str(info.value)
