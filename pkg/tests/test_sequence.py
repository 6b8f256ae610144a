from __future__ import annotations

import io
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hodisc.genmat import GenMatrixSet, order2_matrices, tezuka_matrices
from hodisc.gf2 import BinMatrix
from hodisc.sequence import (
    DyadicPointSet,
    SequenceSpec,
    dyadic_parts,
    parse_points,
    point_at,
    prefix,
    prefix_decompose,
    random_shift,
    read_points,
    shift_from_bits,
    symmetrized_vdc,
    van_der_corput,
    write_points,
)


def test_first_points_of_pascal_pair():
    pts = prefix(SequenceSpec(tezuka_matrices(2, 8)), 4)
    assert pts.as_fractions() == [
        (Fraction(0), Fraction(0)),
        (Fraction(1, 2), Fraction(1, 2)),
        (Fraction(1, 4), Fraction(3, 4)),
        (Fraction(3, 4), Fraction(1, 4)),
    ]


def test_point_at_matches_vectorized_prefix():
    spec = SequenceSpec(order2_matrices(2, 7), shift=(5, 1234))
    pts = prefix(spec, 1 << 7)
    for k in range(1 << 7):
        assert tuple(pts.coords[k]) == point_at(spec, k)


def test_default_precision():
    spec = SequenceSpec(order2_matrices(1, 4))
    assert spec.precision_q == 8
    assert prefix(spec, 16).precision_q == 8


def test_order1_net_hits_every_dyadic_point():
    # an order-1 digital (0, n, 1)-net is {k / 2^n}
    for n in range(1, 9):
        pts = prefix(SequenceSpec(tezuka_matrices(1, n)), 1 << n)
        assert sorted(pts.coords[:, 0].tolist()) == list(range(1 << n))


def test_van_der_corput_digits():
    assert van_der_corput(8).coords[:, 0].tolist() == [0, 4, 2, 6, 1, 5, 3, 7]
    assert van_der_corput(8).precision_q == 3
    assert van_der_corput(5, precision_q=4).coords[:, 0].tolist() == [0, 8, 4, 12, 2]


def test_symmetrized_van_der_corput():
    pts = symmetrized_vdc(6, precision_q=4)
    # y = 0, 1/2, 1/4 and reflections 1, 1/2, 3/4; the value 1 is clamped
    assert pts.coords[:, 0].tolist() == [0, 15, 8, 8, 4, 12]
    assert pts.clamped == 1
    assert symmetrized_vdc(5, precision_q=4).N == 5


def test_shift_helpers():
    assert shift_from_bits("1000") == 8
    with pytest.raises(ValueError):
        shift_from_bits("10a")
    assert random_shift(2, 10, 7) == random_shift(2, 10, 7)
    assert all(0 <= v < 1 << 10 for v in random_shift(3, 10, 1))


@given(st.integers(0, (1 << 12) - 1), st.integers(0, (1 << 12) - 1))
def test_digital_shift_is_xor(s1, s2):
    ms = order2_matrices(2, 6)
    plain = prefix(SequenceSpec(ms), 64).coords
    shifted = prefix(SequenceSpec(ms, shift=(s1, s2)), 64).coords
    assert np.array_equal(shifted, plain ^ np.array([s1, s2]))


def test_spec_validation():
    ms = order2_matrices(1, 4)
    with pytest.raises(ValueError):
        SequenceSpec(ms, precision_q=9)
    with pytest.raises(ValueError):
        SequenceSpec(ms, shift=(1, 2))
    with pytest.raises(ValueError):
        SequenceSpec(ms, shift=(256,))
    with pytest.raises(ValueError):
        prefix(SequenceSpec(ms), 17)


def test_dyadic_parts():
    assert dyadic_parts(13) == [3, 2, 0]
    assert dyadic_parts(1) == [0]


def test_decomposition_blocks():
    spec = SequenceSpec(order2_matrices(2, 9))
    blocks = prefix_decompose(spec, 13)
    assert [(b.n, b.start, b.points.N) for b in blocks] == [(3, 0, 8), (2, 8, 4), (0, 12, 1)]
    assert blocks[0].shift == (0, 0)
    assert blocks[1].shift == point_at(spec, 8)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 512), st.integers(0, (1 << 18) - 1), st.integers(0, (1 << 18) - 1))
def test_decomposition_is_exact_multiset(N, s1, s2):
    spec = SequenceSpec(order2_matrices(2, 9), shift=(s1, s2))
    parts = [b.points for b in prefix_decompose(spec, N)]
    assert DyadicPointSet.concat(parts).same_multiset(prefix(spec, N))


def test_decomposition_with_coarse_precision():
    # output precision below 2n truncates the subnets consistently
    spec = SequenceSpec(order2_matrices(1, 8), precision_q=5)
    for N in range(1, 257):
        parts = [b.points for b in prefix_decompose(spec, N)]
        assert DyadicPointSet.concat(parts).same_multiset(prefix(spec, N))


def test_pointset_validation_and_views():
    with pytest.raises(ValueError):
        DyadicPointSet(np.array([[4]]), 2)
    with pytest.raises(ValueError):
        DyadicPointSet(np.array([1, 2]), 2)
    with pytest.raises(ValueError):
        DyadicPointSet(np.array([[0]]), 63)
    p = DyadicPointSet(np.array([[1, 3], [2, 0]]), 2)
    assert p.N == 2 and p.d == 2
    assert p.as_float().tolist() == [[0.25, 0.75], [0.5, 0.0]]
    assert p.with_precision(4).coords.tolist() == [[4, 12], [8, 0]]
    assert p.same_multiset(DyadicPointSet(np.array([[8, 0], [4, 12]]), 4))
    with pytest.raises(ValueError):
        p.coords[0, 0] = 1


def test_point_file_roundtrip(tmp_path):
    pts = prefix(SequenceSpec(order2_matrices(2, 4)), 16)
    path = tmp_path / "p.txt"
    write_points(pts, path)
    back = read_points(path)
    assert back.precision_q == pts.precision_q
    assert np.array_equal(back.coords, pts.coords)
    buf = io.StringIO()
    write_points(pts, buf)
    assert buf.getvalue().splitlines()[0] == "hodisc-points v1 d=2 q=8 N=16"


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("garbage\n", "line 1"),
        ("hodisc-points v1 d=1 q=4\n1\n", "missing N"),
        ("hodisc-points v1 d=1 q=4 N=2\n1\n", "declares N=2"),
        ("hodisc-points v1 d=2 q=4 N=1\n1\n", "line 2: expected 2"),
        ("hodisc-points v1 d=1 q=4 N=1\nx\n", "line 2: non-integer"),
        ("hodisc-points v1 d=1 q=4 N=1\n16\n", "2**precision_q"),
    ],
)
def test_point_file_errors(text, fragment):
    with pytest.raises(ValueError, match=fragment.replace("*", r"\*")):
        parse_points(text)


def test_custom_matrices_generate():
    ms = GenMatrixSet((BinMatrix.identity(3),), 1, 0)
    pts = prefix(SequenceSpec(ms), 8)
    assert pts.coords[:, 0].tolist() == [0, 4, 2, 6, 1, 5, 3, 7]
