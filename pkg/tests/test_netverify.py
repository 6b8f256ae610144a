from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hodisc.genmat import GenMatrixSet, order2_matrices, tezuka_matrices
from hodisc.gf2 import BinMatrix, rank_rows
from hodisc.netverify import (
    check_equidistribution,
    interval_counts,
    is_order_alpha_net,
    level_vectors,
    sequence_t_value,
    t_value,
)
from hodisc.sequence import SequenceSpec, prefix


def brute_is_net(ms: GenMatrixSet, alpha: int, n: int, t: int) -> bool:
    """Every row subset per coordinate, weighted by its alpha largest indices."""
    q = alpha * n
    budget = q - t
    per_coord = []
    for m in ms.matrices:
        opts = []
        for mask in range(1 << q):
            idx = [i + 1 for i in range(q) if mask >> i & 1]
            w = sum(sorted(idx, reverse=True)[:alpha])
            if w <= budget:
                opts.append((w, [m.rows[i - 1] for i in idx]))
        per_coord.append(opts)
    for combo in itertools.product(*per_coord):
        if sum(c[0] for c in combo) > budget:
            continue
        rows = [r for c in combo for r in c[1]]
        if rank_rows(rows) != len(rows):
            return False
    return True


def brute_t(ms: GenMatrixSet, alpha: int, n: int) -> int:
    sub = GenMatrixSet(tuple(m.submatrix(alpha * n, n) for m in ms.matrices), ms.order, ms.t_upper)
    return next(t for t in range(alpha * n + 1) if brute_is_net(sub, alpha, n, t))


def test_identity_is_zero_net():
    ms = GenMatrixSet((BinMatrix.identity(6),), 1, 0)
    assert t_value(ms).t_exact == 0


def test_known_order1_values():
    assert t_value(tezuka_matrices(2, 6)).t_exact == 0
    q = t_value(tezuka_matrices(4, 6))
    assert q.t_exact <= q.t_upper == 3


@pytest.mark.parametrize("d, n_max", [(1, 5), (2, 3)])
def test_interlaced_against_brute_force(d, n_max):
    for n in range(1, n_max + 1):
        ms = order2_matrices(d, n)
        for alpha in (1, 2):
            assert t_value(ms, alpha, n).t_exact == brute_t(ms, alpha, n)


random_sets = st.builds(
    lambda d, n, alpha, seed: (d, n, alpha, seed),
    st.integers(1, 2),
    st.integers(1, 3),
    st.integers(1, 2),
    st.integers(0, 2**32 - 1),
)


@settings(max_examples=40, deadline=None)
@given(random_sets)
def test_random_matrices_against_brute_force(case):
    d, n, alpha, seed = case
    if d == 2 and alpha == 2 and n == 3:
        n = 2  # keeps the brute force below a second
    rng = np.random.default_rng(seed)
    mats = tuple(
        BinMatrix(tuple(int(r) for r in rng.integers(0, 1 << n, size=alpha * n)), n) for _ in range(d)
    )
    ms = GenMatrixSet(mats, alpha, 0)
    for t in range(alpha * n + 1):
        assert is_order_alpha_net(ms, alpha, n, t) == brute_is_net(ms, alpha, n, t)


def test_monotone_in_t():
    ms = order2_matrices(2, 6)
    res = [is_order_alpha_net(ms, 2, 6, t) for t in range(13)]
    first = res.index(True)
    assert all(res[first:])


def test_argument_checks():
    ms = order2_matrices(1, 4)
    with pytest.raises(ValueError):
        is_order_alpha_net(ms, 2, 4, 9)
    with pytest.raises(ValueError):
        is_order_alpha_net(ms, 3, 4, 0)


def test_cross_order_relation():
    # an order-2 net with parameter t is an order-1 net with parameter ceil(t/2)
    for d in (1, 2):
        ms = order2_matrices(d, 7)
        for n in range(1, 8):
            t1 = t_value(ms, 1, n).t_exact
            t2 = t_value(ms, 2, n).t_exact
            assert t1 <= -(-t2 // 2)


def test_sequence_t_value():
    assert sequence_t_value(order2_matrices(1, 6), 2, 6) == 0
    st_ = sequence_t_value(order2_matrices(2, 6), 2, 6)
    assert st_ <= order2_matrices(2, 6).t_upper


def test_level_vectors():
    assert sorted(level_vectors(2, 2)) == [(0, 2), (1, 1), (2, 0)]
    assert sorted(level_vectors(0, 2, lowest=-1)) == [(-1, -1), (-1, 0), (0, -1), (0, 0)]
    assert sorted(level_vectors(1, 1, lowest=-1)) == [(1,)]


def test_interval_counts_simple():
    pts = prefix(SequenceSpec(tezuka_matrices(2, 3)), 8)
    assert interval_counts(pts, (1, 2)).tolist() == [1] * 8
    assert interval_counts(pts, (0, 0)).tolist() == [8]


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 2), st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_rank_test_matches_box_counting(d, n, seed):
    rng = np.random.default_rng(seed)
    mats = tuple(BinMatrix(tuple(int(r) for r in rng.integers(0, 1 << n, size=n)), n) for _ in range(d))
    ms = GenMatrixSet(mats, 1, 0)
    pts = prefix(SequenceSpec(ms), 1 << n)
    for t in range(n + 1):
        assert is_order_alpha_net(ms, 1, n, t) == check_equidistribution(pts, t).passed


def test_equidistribution_report():
    pts = prefix(SequenceSpec(order2_matrices(2, 6)), 64)
    rep = check_equidistribution(pts, 3)
    assert rep.passed and rep.exact and rep.capacity == 8 and rep.level == 3
    with pytest.raises(ValueError):
        check_equidistribution(prefix(SequenceSpec(order2_matrices(2, 6)), 48), 0)
