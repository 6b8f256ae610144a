"""Net-quality certificates: budgeted rank tests and interval counting."""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import asdict, dataclass
from typing import Iterator

import numpy as np

from .genmat import GenMatrixSet, truncate
from .gf2 import XorBasis
from .sequence import DyadicPointSet


@dataclass(frozen=True)
class NetQuality:
    alpha: int
    n: int
    d: int
    t_exact: int
    t_upper: int
    checked_selections: int
    elapsed: float

    def to_json(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class _Choice:
    weight: int
    rows: tuple[int, ...]  # 1-based row indices
    tops: tuple[int, ...]  # counted indices, decreasing


def _choices(alpha: int, q: int, budget: int) -> list[_Choice]:
    """Row selections of one coordinate that are maximal for their counted indices.

    A selection's weight is the sum of its ``alpha`` largest indices; once those
    are fixed every smaller index is free, so only "all rows below the smallest
    counted index" needs testing. Selections with fewer than ``alpha`` rows
    cannot take further rows for free and are listed separately.
    """
    out = [_Choice(0, (), ())]
    top = min(q, budget)
    for size in range(1, alpha + 1):
        for tops in itertools.combinations(range(top, 0, -1), size):
            w = sum(tops)
            if w > budget:
                continue
            if size == alpha:
                rows = tuple(range(1, tops[-1])) + tops
            else:
                rows = tops
            out.append(_Choice(w, rows, tops))
    out.sort(key=lambda c: c.weight)
    return out


def _extendable(c: _Choice, alpha: int, q: int, slack: int) -> bool:
    """Whether a superset selection fits in ``slack`` extra weight."""
    if slack < 1:
        return False
    if len(c.tops) < alpha:
        smallest = c.tops[-1] if c.tops else q + 1
        return smallest > 1
    # raise the smallest counted index by one; it stays below the next one
    upper = c.tops[-2] if alpha > 1 else q + 1
    return c.tops[-1] + 1 < upper


def _check(matrices: GenMatrixSet, alpha: int, n: int, t: int) -> tuple[bool, int]:
    """Depth-first over coordinates; returns (passed, leaf selections checked)."""
    q = matrices.q_rows
    d = matrices.s
    if not 0 <= t <= alpha * n:
        raise ValueError(f"t={t} outside [0, {alpha * n}]")
    if q < alpha * n or matrices.n_cols != n:
        raise ValueError(
            f"need matrices with at least {alpha * n} rows and {n} columns, got {q}x{matrices.n_cols}"
        )
    budget = alpha * n - t
    choices = _choices(alpha, q, budget)
    rows = [m.rows for m in matrices.matrices]
    checked = 0

    def rec(j: int, basis: XorBasis, used: int, picked: tuple[_Choice, ...]) -> bool:
        nonlocal checked
        last = j == d - 1
        for c in choices:
            w = used + c.weight
            if w > budget:
                break
            if last:
                # non-maximal leaves are subsets of a leaf tested elsewhere
                slack = budget - w
                if any(_extendable(x, alpha, q, slack) for x in picked + (c,)):
                    continue
                checked += 1
            b = basis.copy()
            for i in c.rows:
                if not b.insert(rows[j][i - 1]):
                    return False
            if not last and not rec(j + 1, b, w, picked + (c,)):
                return False
        return True

    ok = rec(0, XorBasis(), 0, ())
    return ok, checked


def is_order_alpha_net(matrices: GenMatrixSet, alpha: int, n: int, t: int) -> bool:
    """Budgeted linear-independence test for an order-``alpha`` (t, n, d)-net.

    Every selection ``i_{j,nu_j} < ... < i_{j,1}`` whose ``alpha`` largest
    indices per coordinate sum to at most ``alpha * n - t`` must give
    independent rows; all chosen rows count, not only the budgeted ones.
    """
    return _check(matrices, alpha, n, t)[0]


def t_value(matrices: GenMatrixSet, alpha: int | None = None, n: int | None = None) -> NetQuality:
    """Smallest t for which the (truncated) matrices form an order-alpha net."""
    alpha = matrices.order if alpha is None else alpha
    if n is None:
        n = matrices.n_cols
    if n != matrices.n_cols or matrices.q_rows > alpha * n:
        if matrices.q_rows >= alpha * n and matrices.n_cols >= n:
            sub = tuple(m.submatrix(alpha * n, n) for m in matrices.matrices)
            matrices = GenMatrixSet(sub, matrices.order, matrices.t_upper)
        else:
            matrices = truncate(matrices, n)
    t0 = time.perf_counter()
    total = 0
    for t in range(alpha * n + 1):
        ok, checked = _check(matrices, alpha, n, t)
        total += checked
        if ok:
            return NetQuality(
                alpha, n, matrices.s, t, matrices.t_upper, total, time.perf_counter() - t0
            )
    raise AssertionError("t = alpha * n always passes")


def sequence_t_value(matrices: GenMatrixSet, alpha: int, n_max: int) -> int:
    """Smallest t such that every truncation n <= n_max with n > t/alpha passes."""
    ts = {n: t_value(matrices, alpha, n).t_exact for n in range(1, n_max + 1)}
    for t in range(alpha * n_max + 1):
        if all(ts[n] <= t for n in ts if alpha * n > t):
            return t
    return alpha * n_max


@dataclass(frozen=True)
class EquidistributionReport:
    n: int
    t: int
    alpha: int
    level: int
    capacity: int
    intervals: int
    max_count: int
    min_count: int
    passed: bool
    exact: bool

    def to_json(self) -> dict:
        return asdict(self)


def level_vectors(total: int, d: int, lowest: int = 0) -> Iterator[tuple[int, ...]]:
    """All j in {lowest, lowest+1, ...}^d with sum of max(j_i, 0) equal to ``total``."""
    if d == 1:
        if total == 0:
            yield from ((j,) for j in range(lowest, 1))
        else:
            yield (total,)
        return
    for first in range(lowest, total + 1):
        for rest in level_vectors(total - max(first, 0), d - 1, lowest):
            yield (first,) + rest


def interval_counts(points: DyadicPointSet, j: tuple[int, ...]) -> np.ndarray:
    """Point counts of all dyadic boxes on level ``j`` (j_i >= 0), flattened."""
    q = points.precision_q
    if any(ji > q for ji in j):
        raise ValueError(f"level {j} finer than precision {q}")
    key = np.zeros(points.N, dtype=np.int64)
    for i, ji in enumerate(j):
        key = (key << ji) | (points.coords[:, i] >> (q - ji))
    return np.bincount(key, minlength=1 << sum(j))


def check_equidistribution(points: DyadicPointSet, t: int, alpha: int = 1) -> EquidistributionReport:
    """Count points in every dyadic box of order ``n - ceil(t/alpha)``."""
    N = points.N
    if N < 1 or N & (N - 1):
        raise ValueError(f"point count {N} is not a power of two")
    n = N.bit_length() - 1
    k = math.ceil(t / alpha)
    if not 0 <= k <= n:
        raise ValueError(f"t={t} out of range for n={n}, alpha={alpha}")
    level = n - k
    cap = 1 << k
    lo, hi, boxes = N, 0, 0
    for j in level_vectors(level, points.d):
        counts = interval_counts(points, j)
        boxes += counts.size
        lo = min(lo, int(counts.min()))
        hi = max(hi, int(counts.max()))
    exact = lo == hi == cap
    return EquidistributionReport(
        n=n,
        t=t,
        alpha=alpha,
        level=level,
        capacity=cap,
        intervals=boxes,
        max_count=hi,
        min_count=lo,
        passed=hi <= cap,
        exact=exact,
    )
