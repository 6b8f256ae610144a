"""Discrepancy functionals of dyadic point sets.

The discrepancy function is ``D(x) = #{z in P : z in [0, x)} / N - x_1 ... x_d``.
Counting and Haar closed forms are exact on the integer coordinates; floating
point only enters quadrature, the Warnock sum fallback and the Haar-level
aggregates used for diagnostics.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from functools import lru_cache, reduce
from typing import Iterator, Sequence, Union

import numpy as np

from .netverify import level_vectors
from .sequence import DyadicPointSet

DEFAULT_MAX_CELLS = 10**7

Number = Union[int, float, Fraction]


class GuardCeilingError(RuntimeError):
    """A computation would exceed the configured cell ceiling."""


@dataclass(frozen=True)
class DiscrepancyReport:
    N: int
    d: int
    p: float | str
    value: float
    method: str
    error_bound: float
    exact: Fraction | None = None

    def to_json(self) -> dict:
        out = asdict(self)
        out["exact"] = None if self.exact is None else str(self.exact)
        return out


# --------------------------------------------------------------------------
# pointwise


def local_discrepancy(points: DyadicPointSet, x: Sequence[Number]) -> Fraction:
    """Exact D(x): fraction of points in the half-open box [0, x) minus its volume."""
    if len(x) != points.d:
        raise ValueError(f"x has {len(x)} coordinates, points have {points.d}")
    xs = [Fraction(v) for v in x]
    if any(v < 0 or v > 1 for v in xs):
        raise ValueError("x must lie in [0, 1]^d")
    q = points.precision_q
    inside = np.ones(points.N, dtype=bool)
    for i, xi in enumerate(xs):
        # z < xi  <=>  v < xi * 2^q  <=>  v < ceil(xi * 2^q)
        bound = math.ceil(xi * (1 << q))
        inside &= points.coords[:, i] < bound
    vol = Fraction(1)
    for v in xs:
        vol *= v
    return Fraction(int(inside.sum()), points.N) - vol


# --------------------------------------------------------------------------
# L2 via the Warnock double sum


def l2_squared_exact(points: DyadicPointSet) -> Fraction:
    """Exact squared L2 discrepancy as a rational number."""
    N, d, q = points.N, points.d, points.precision_q
    S = 1 << q
    v = [[int(c) for c in row] for row in points.coords.tolist()]
    single = 0
    for row in v:
        prod = 1
        for c in row:
            prod *= S * S - c * c
        single += prod
    return (
        Fraction(1, 3**d)
        - Fraction(2 * single, N * (1 << d) * S ** (2 * d))
        + Fraction(_pair_sum(points), N * N * S**d)
    )


def _pair_sum(points: DyadicPointSet) -> int:
    """Sum over ordered pairs of prod_i (2^q - max(v_ki, v_li)), exactly."""
    N, d, q = points.N, points.d, points.precision_q
    S = 1 << q
    coords = points.coords
    total = 0
    if q * d + N.bit_length() <= 62:
        block = max(1, min(N, (1 << 22) // max(N, 1)))
        for s in range(0, N, block):
            prod = np.ones((min(block, N - s), N), dtype=np.int64)
            for i in range(d):
                col = coords[:, i]
                prod *= S - np.maximum(col[s : s + block, None], col[None, :])
            total += int(prod.sum(axis=1, dtype=np.int64).astype(object).sum())
        return total
    # wide products: exact Python ints row by row
    cols = [[int(c) for c in coords[:, i]] for i in range(d)]
    for k in range(N):
        for l in range(N):
            prod = 1
            for i in range(d):
                prod *= S - max(cols[i][k], cols[i][l])
            total += prod
    return total


def l2_exact(points: DyadicPointSet) -> DiscrepancyReport:
    """L2 discrepancy from the closed-form double sum, evaluated exactly."""
    sq = l2_squared_exact(points)
    return DiscrepancyReport(
        points.N, points.d, 2.0, math.sqrt(max(sq, 0)), "closed-form", 0.0, exact=sq
    )


# --------------------------------------------------------------------------
# grids on which the counting part is constant


def _axis_breaks(points: DyadicPointSet, with_zero: bool) -> tuple[list[np.ndarray], list[np.ndarray]]:
    S = 1 << points.precision_q
    breaks, ranks = [], []
    for i in range(points.d):
        col = points.coords[:, i]
        extra = [S, 0] if with_zero else [S]
        b = np.unique(np.concatenate([col, np.array(extra, dtype=np.int64)]))
        breaks.append(b)
        ranks.append(np.searchsorted(b, col))
    return breaks, ranks


def _cumulative_strips(
    ranks: list[np.ndarray], shape: tuple[int, ...]
) -> Iterator[tuple[int, np.ndarray, np.ndarray]]:
    """Yield (a0, inclusive, previous) count arrays over the trailing axes.

    ``inclusive[a1, ...]`` counts points with r0 <= a0 and r_i <= a_i;
    ``previous`` is the same with r0 < a0.
    """
    rest = shape[1:]
    size = int(np.prod(rest)) if rest else 1
    order = np.argsort(ranks[0], kind="stable")
    r0 = ranks[0][order]
    if rest:
        flat = np.ravel_multi_index(tuple(r[order] for r in ranks[1:]), rest)
    else:
        flat = np.zeros(len(order), dtype=np.int64)
    cum = np.zeros(rest, dtype=np.int64)
    pos = 0
    for a0 in range(shape[0]):
        prev = cum
        end = pos
        while end < len(r0) and r0[end] == a0:
            end += 1
        if end > pos:
            hist = np.bincount(flat[pos:end], minlength=size).reshape(rest)
            for ax in range(len(rest)):
                hist = np.cumsum(hist, axis=ax)
            cum = prev + hist
            pos = end
        yield a0, cum, prev


# --------------------------------------------------------------------------
# star discrepancy


def _star_1d(points: DyadicPointSet, breaks: np.ndarray, ranks: np.ndarray, exact_ints: bool) -> DiscrepancyReport:
    N, q = points.N, points.precision_q
    closed = np.cumsum(np.bincount(ranks, minlength=breaks.size))
    opened = np.concatenate([[0], closed[:-1]])
    if exact_ints:
        S = np.int64(1 << q)
        best = int(max(np.max(closed * S - N * breaks), np.max(N * breaks - opened * S)))
        val = Fraction(best, N << q)
        return DiscrepancyReport(N, 1, "star", float(val), "enumeration", 0.0, exact=val)
    u = np.ldexp(breaks.astype(np.float64), -q)
    best = float(max(np.max(closed / N - u), np.max(u - opened / N)))
    return DiscrepancyReport(N, 1, "star", best, "enumeration", 4 * np.finfo(float).eps)


def star_discrepancy(points: DyadicPointSet, max_cells: int = DEFAULT_MAX_CELLS) -> DiscrepancyReport:
    """Exact sup |D| over [0,1]^d via closed and open corner candidates."""
    N, d, q = points.N, points.d, points.precision_q
    S = 1 << q
    breaks, ranks = _axis_breaks(points, with_zero=False)
    shape = tuple(len(b) for b in breaks)
    cells = int(np.prod(shape, dtype=object))
    if cells > max_cells:
        raise GuardCeilingError(f"star discrepancy grid has {cells} corners > ceiling {max_cells}")
    exact_ints = q * d + N.bit_length() + 1 <= 62
    if d == 1:
        return _star_1d(points, breaks[0], ranks[0], exact_ints)
    if exact_ints:
        rest = breaks[1:]
        scale = np.int64(S) ** d
    else:
        rest = [np.ldexp(b.astype(np.float64), -q) for b in breaks[1:]]
    vol_rest = reduce(np.multiply.outer, rest) if rest else np.array(1, dtype=np.int64)
    best = None
    for a0, incl, prev in _cumulative_strips(ranks, shape):
        # open counts: strictly below in every coordinate
        opn = prev
        for ax in range(opn.ndim):
            opn = np.concatenate(
                [np.zeros_like(np.take(opn, [0], axis=ax)), np.take(opn, range(opn.shape[ax] - 1), axis=ax)],
                axis=ax,
            )
        if exact_ints:
            vol = np.int64(breaks[0][a0]) * vol_rest
            pos = incl * scale - N * vol
            neg = N * vol - opn * scale
        else:
            vol = math.ldexp(float(breaks[0][a0]), -q) * vol_rest
            pos = incl / N - vol
            neg = vol - opn / N
        m = max(int(np.max(pos)) if exact_ints else float(np.max(pos)),
                int(np.max(neg)) if exact_ints else float(np.max(neg)))
        best = m if best is None else max(best, m)
    if exact_ints:
        val = Fraction(best, N * S**d)
        return DiscrepancyReport(N, d, "star", float(val), "enumeration", 0.0, exact=val)
    return DiscrepancyReport(N, d, "star", float(best), "enumeration", 4 * d * np.finfo(float).eps)


# --------------------------------------------------------------------------
# Lp by cellwise tensor Gauss-Legendre quadrature


@lru_cache(maxsize=None)
def _gauss(nodes: int, d: int) -> tuple[np.ndarray, np.ndarray]:
    """Tensor Gauss-Legendre nodes on [0,1]^d (shape k^d x d) and weights."""
    t, w = np.polynomial.legendre.leggauss(nodes)
    t = (t + 1) / 2
    w = w / 2
    pts = np.array(list(itertools.product(t, repeat=d)))
    wts = np.array([math.prod(c) for c in itertools.product(w, repeat=d)])
    return pts, wts


def _gl(lo: np.ndarray, hi: np.ndarray, a: np.ndarray, p: float, nodes: int) -> np.ndarray:
    """Per-cell tensor Gauss-Legendre approximation of the integral of |a - prod x|^p."""
    pts, wts = _gauss(nodes, lo.shape[1])
    width = hi - lo
    vol = np.prod(width, axis=1)
    acc = np.zeros(lo.shape[0])
    for node, w in zip(pts, wts):
        prod = np.prod(lo + width * node, axis=1)
        acc += w * np.abs(a - prod) ** p
    return acc * vol


def _smooth_cells(lo, hi, a, p, nodes) -> tuple[float, float]:
    """Cells on which ``a - prod x`` keeps one sign."""
    if lo.shape[0] == 0:
        return 0.0, 0.0
    if float(p).is_integer() and math.ceil((p + 1) / 2) <= nodes:
        # polynomial of degree p per axis: this rule is exact
        return float(np.sum(_gl(lo, hi, a, p, math.ceil((p + 1) / 2)))), 0.0
    fine = _gl(lo, hi, a, p, nodes)
    coarse = _gl(lo, hi, a, p, nodes - 1)
    return float(np.sum(fine)), float(np.sum(np.abs(fine - coarse)))


def _antideriv(u: np.ndarray, p: float) -> np.ndarray:
    return np.sign(u) * np.abs(u) ** (p + 1) / (p + 1)


def _cells_1d(lo, hi, a, p) -> float:
    """Exact: the integral of |a - x|^p over [l, h] is G(a - l) - G(a - h)."""
    return float(np.sum(_antideriv(a - lo[:, 0], p) - _antideriv(a - hi[:, 0], p)))


@lru_cache(maxsize=None)
def _graded_rule(nodes: int, levels: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre on [0, 1], refined geometrically toward both ends."""
    inner = [2.0**-k for k in range(levels, 0, -1)]
    cuts = np.array([0.0] + inner + [1 - c for c in reversed(inner)] + [1.0])
    t, w = np.polynomial.legendre.leggauss(nodes)
    half = np.diff(cuts) / 2
    mid = (cuts[:-1] + cuts[1:]) / 2
    return (mid[:, None] + half[:, None] * t).ravel(), (half[:, None] * w).ravel()


def _cells_2d_graded(lo, hi, a, p, nodes, levels: int = 12) -> tuple[float, float]:
    """Two-dimensional cells for non-integer p.

    The y-integral is closed-form; the remaining x-integrand loses smoothness
    only where ``a - x * y0`` or ``a - x * y1`` vanishes, so x is split there
    and each piece is integrated with a rule graded toward its endpoints.
    """
    l1, h1, l2, h2 = lo[:, 0], hi[:, 0], lo[:, 1], hi[:, 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        k1 = np.where(h2 > 0, a / np.where(h2 > 0, h2, 1.0), np.inf)
        k2 = np.where(l2 > 0, a / np.where(l2 > 0, l2, 1.0), np.inf)
    b1 = np.clip(np.minimum(k1, k2), l1, h1)
    b2 = np.clip(np.maximum(k1, k2), l1, h1)

    def rule(r, w):
        acc = np.zeros_like(a)
        for u, v in ((l1, b1), (b1, b2), (b2, h1)):
            length = v - u
            live = length > 0
            # empty pieces may sit at x = 0; give them a harmless abscissa
            base = np.where(live, u, 1.0)
            for node, wt in zip(r, w):
                x = base + length * node
                acc += np.where(live, wt * length * (_antideriv(a - x * l2, p) - _antideriv(a - x * h2, p)) / x, 0.0)
        return acc

    fine = rule(*_graded_rule(nodes, levels))
    coarse = rule(*_graded_rule(nodes - 1, levels))
    return float(np.sum(fine)), float(np.sum(np.abs(fine - coarse)))


def _crossed_2d(lo, hi, a, p, nodes) -> tuple[float, float]:
    """Split x1 where the inner range starts and stops straddling zero.

    Left of ``a / hi2`` the integrand is positive, right of ``a / lo2`` it is
    negative; in between the x2-integral has a closed form and the remaining
    one-dimensional integrand is smooth.
    """
    l1, h1, l2, h2 = lo[:, 0], hi[:, 0], lo[:, 1], hi[:, 1]
    with np.errstate(divide="ignore"):
        b1 = np.clip(a / h2, l1, h1)
        b2 = np.clip(np.where(l2 > 0, a / np.where(l2 > 0, l2, 1.0), np.inf), l1, h1)
    total, err = 0.0, 0.0
    for x_lo, x_hi in ((l1, b1), (b2, h1)):
        plo = np.stack([x_lo, l2], axis=1)
        phi = np.stack([x_hi, h2], axis=1)
        t, e = _smooth_cells(plo, phi, a, p, nodes)
        total += t
        err += e
    t, w = np.polynomial.legendre.leggauss(nodes)
    tc, wc = np.polynomial.legendre.leggauss(nodes - 1)
    half = (b2 - b1) / 2
    mid = (b1 + b2) / 2

    def rule(tt, ww):
        acc = np.zeros_like(a)
        for node, wt in zip(tt, ww):
            x = mid + half * node
            acc += wt * (_antideriv(a - x * l2, p) - _antideriv(a - x * h2, p)) / x
        return acc * half

    fine, coarse = rule(t, w), rule(tc, wc)
    return total + float(np.sum(fine)), err + float(np.sum(np.abs(fine - coarse)))


def _bisect(lo, hi, a, p, nodes, depth) -> tuple[float, float]:
    plo = np.prod(lo, axis=1)
    phi = np.prod(hi, axis=1)
    crossed = (plo < a) & (a < phi)
    total, err = _smooth_cells(lo[~crossed], hi[~crossed], a[~crossed], p, nodes)
    if not crossed.any():
        return total, err
    lc, hc, ac = lo[crossed], hi[crossed], a[crossed]
    if depth == 0:
        vol = np.prod(hc - lc, axis=1)
        top = np.maximum(ac - plo[crossed], phi[crossed] - ac)
        return (
            total + float(np.sum(_gl(lc, hc, ac, p, nodes))),
            err + float(np.sum(vol * top**p)),
        )
    d = lo.shape[1]
    mid = (lc + hc) / 2
    kids_lo, kids_hi = [], []
    for corner in itertools.product((False, True), repeat=d):
        c = np.array(corner)
        kids_lo.append(np.where(c, mid, lc))
        kids_hi.append(np.where(c, hc, mid))
    t, e = _bisect(np.concatenate(kids_lo), np.concatenate(kids_hi), np.tile(ac, 2**d), p, nodes, depth - 1)
    return total + t, err + e


def _integrate_cells(
    lo: np.ndarray, hi: np.ndarray, a: np.ndarray, p: float, nodes: int, depth: int
) -> tuple[float, float]:
    """Integral of |a - prod x|^p summed over cells, with an error bound."""
    if lo.shape[0] == 0:
        return 0.0, 0.0
    d = lo.shape[1]
    if d == 1:
        return _cells_1d(lo, hi, a, p), 0.0
    integer = float(p).is_integer()
    if integer and int(p) % 2 == 0:
        return _smooth_cells(lo, hi, a, p, nodes)
    if d == 2 and not integer:
        # only cells whose closure meets c/N = x*y carry a singularity
        touch = (np.prod(lo, axis=1) <= a) & (a <= np.prod(hi, axis=1))
        t1, e1 = _smooth_cells(lo[~touch], hi[~touch], a[~touch], p, nodes)
        t2, e2 = _cells_2d_graded(lo[touch], hi[touch], a[touch], p, nodes)
        return t1 + t2, e1 + e2
    crossed = (np.prod(lo, axis=1) < a) & (a < np.prod(hi, axis=1))
    total, err = _smooth_cells(lo[~crossed], hi[~crossed], a[~crossed], p, nodes)
    lc, hc, ac = lo[crossed], hi[crossed], a[crossed]
    if d == 2:
        t, e = _crossed_2d(lc, hc, ac, p, nodes)
        return total + t, err + e
    # bisection grows roughly like 2^((d-1) * depth) per crossed cell
    batch = max(1, (1 << 20) >> ((d - 1) * depth + d))
    for s in range(0, lc.shape[0], batch):
        t, e = _bisect(lc[s : s + batch], hc[s : s + batch], ac[s : s + batch], p, nodes, depth)
        total += t
        err += e
    return total, err


def _grid_cells(points: DyadicPointSet, max_cells: int, chunk: int = 1 << 18):
    """Yield (lo, hi, count) batches covering the grid cells of the point set."""
    q = points.precision_q
    breaks, ranks = _axis_breaks(points, with_zero=True)
    fb = [np.ldexp(b.astype(np.float64), -q) for b in breaks]
    shape = tuple(len(b) - 1 for b in breaks)
    cells = int(np.prod(shape, dtype=object))
    if cells > max_cells:
        raise GuardCeilingError(f"{cells} grid cells exceed the ceiling of {max_cells}")
    if points.d == 1:
        counts = np.cumsum(np.bincount(ranks[0], minlength=shape[0]))[: shape[0]]
        for s in range(0, shape[0], chunk):
            sl = slice(s, s + chunk)
            yield fb[0][:-1][sl, None], fb[0][1:][sl, None], counts[sl]
        return
    rest = shape[1:]
    if rest:
        mesh = np.meshgrid(*[np.arange(s) for s in rest], indexing="ij")
        idx_rest = [m.ravel() for m in mesh]
    else:
        idx_rest = []
    buf_lo, buf_hi, buf_c, held = [], [], [], 0
    for a0, incl, _ in _cumulative_strips(ranks, (shape[0],) + rest):
        counts = np.asarray(incl).ravel()
        m = counts.size
        lo = np.empty((m, points.d))
        hi = np.empty((m, points.d))
        lo[:, 0] = fb[0][a0]
        hi[:, 0] = fb[0][a0 + 1]
        for ax, ids in enumerate(idx_rest, start=1):
            lo[:, ax] = fb[ax][ids]
            hi[:, ax] = fb[ax][ids + 1]
        buf_lo.append(lo)
        buf_hi.append(hi)
        buf_c.append(counts)
        held += m
        if held >= chunk:
            yield np.concatenate(buf_lo), np.concatenate(buf_hi), np.concatenate(buf_c)
            buf_lo, buf_hi, buf_c, held = [], [], [], 0
    if held:
        yield np.concatenate(buf_lo), np.concatenate(buf_hi), np.concatenate(buf_c)


def lp_cellwise(
    points: DyadicPointSet,
    p: float,
    nodes_per_axis: int = 8,
    max_depth: int = 6,
    max_cells: int = DEFAULT_MAX_CELLS,
) -> DiscrepancyReport:
    """L_p discrepancy by Gauss-Legendre quadrature on the counting grid.

    On every grid cell the count is constant, so the integrand is
    ``|c/N - x_1...x_d|^p``. Cells where that is a polynomial are integrated
    with a rule of sufficient degree (no error); cells crossed by the surface
    ``c/N = x_1...x_d`` (only possible when ``p`` is not an even integer) are
    split where the sign changes: in one and two dimensions the inner
    integral is taken in closed form, in higher dimensions such cells are
    bisected up to ``max_depth`` times and what remains unresolved is
    bounded by ``volume * max|integrand|``.
    """
    if p < 1:
        raise ValueError("p must be at least 1")
    if nodes_per_axis < 2:
        raise ValueError("need at least two nodes per axis")
    N = points.N
    total, err = 0.0, 0.0
    for lo, hi, counts in _grid_cells(points, max_cells):
        t, e = _integrate_cells(lo, hi, counts / N, p, nodes_per_axis, max_depth)
        total += t
        err += e
    value = total ** (1 / p)
    bound = max((total + err) ** (1 / p) - value, value - max(total - err, 0.0) ** (1 / p))
    return DiscrepancyReport(N, points.d, float(p), value, "cellwise-quadrature", bound)


def lp_discrepancy(points: DyadicPointSet, p: float | str, **kwargs) -> DiscrepancyReport:
    """Dispatch: ``"star"``/inf to the critical-grid sup, 2 to the double sum, else quadrature."""
    if p in ("star", "inf") or (isinstance(p, float) and math.isinf(p)):
        return star_discrepancy(points, max_cells=kwargs.get("max_cells", DEFAULT_MAX_CELLS))
    p = float(p)
    if p == 2.0:
        return l2_exact(points)
    return lp_cellwise(points, p, **kwargs)


# --------------------------------------------------------------------------
# Haar coefficients


@dataclass(frozen=True)
class HaarIndex:
    """Level vector j (entries >= -1) and position m with 0 <= m_i < 2^max(j_i, 0)."""

    j: tuple[int, ...]
    m: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "j", tuple(int(v) for v in self.j))
        object.__setattr__(self, "m", tuple(int(v) for v in self.m))
        if len(self.j) != len(self.m):
            raise ValueError("j and m must have equal length")
        for ji, mi in zip(self.j, self.m):
            if ji < -1:
                raise ValueError(f"level {ji} below -1")
            if not 0 <= mi < (1 << max(ji, 0)):
                raise ValueError(f"position {mi} outside D_{ji}")

    @property
    def order(self) -> int:
        return sum(max(ji, 0) for ji in self.j)

    def interval(self) -> tuple[tuple[Fraction, Fraction], ...]:
        out = []
        for ji, mi in zip(self.j, self.m):
            if ji < 0:
                out.append((Fraction(0), Fraction(1)))
            else:
                out.append((Fraction(mi, 1 << ji), Fraction(mi + 1, 1 << ji)))
        return tuple(out)


def haar_volume_1d(j: int) -> Fraction:
    """Integral of x * h_{j,m}(x) over [0,1); independent of m."""
    return Fraction(1, 2) if j < 0 else -Fraction(1, 1 << (2 * j + 2))


def haar_count_1d(z: Fraction, j: int, m: int) -> Fraction:
    """Integral over x of 1[z < x] * h_{j,m}(x)."""
    if j < 0:
        return 1 - z
    a = Fraction(m, 1 << j)
    b = Fraction(m + 1, 1 << j)
    if z <= a or z >= b:
        return Fraction(0)
    if z < (a + b) / 2:
        return a - z
    return z - b


def haar_coefficient(points: DyadicPointSet, idx: HaarIndex) -> Fraction:
    """Exact Haar coefficient <D, h_{j,m}> from the one-dimensional closed forms."""
    if len(idx.j) != points.d:
        raise ValueError("index dimension does not match the point set")
    vol = Fraction(1)
    for ji in idx.j:
        vol *= haar_volume_1d(ji)
    acc = Fraction(0)
    for row in points.as_fractions():
        prod = Fraction(1)
        for z, ji, mi in zip(row, idx.j, idx.m):
            prod *= haar_count_1d(z, ji, mi)
            if prod == 0:
                break
        acc += prod
    return acc / points.N - vol


def _count_factors(points: DyadicPointSet, j: tuple[int, ...]) -> tuple[np.ndarray, np.ndarray]:
    """Per point: product of 1-d counting factors, and the box key on level j."""
    q = points.precision_q
    vals = points.as_float()
    prod = np.ones(points.N)
    key = np.zeros(points.N, dtype=np.int64)
    for i, ji in enumerate(j):
        z = vals[:, i]
        if ji < 0:
            prod *= 1 - z
            continue
        if ji >= q:
            # dyadic points sit on left endpoints at this resolution
            prod *= 0.0
            m = points.coords[:, i] << (ji - q)
        else:
            m = points.coords[:, i] >> (q - ji)
            a = np.ldexp(m.astype(np.float64), -ji)
            half = math.ldexp(1.0, -ji - 1)
            prod *= np.where(z < a + half, a - z, z - (a + 2 * half))
        key = (key << ji) | m
    return prod, key


@dataclass(frozen=True)
class LevelCoefficients:
    """All Haar coefficients on one level, grouped as occupied boxes plus the rest."""

    j: tuple[int, ...]
    occupied: np.ndarray  # coefficients of boxes holding at least one point
    empty_count: int  # remaining boxes, each with coefficient -volume
    volume: float

    @property
    def order(self) -> int:
        return sum(max(v, 0) for v in self.j)

    def max_abs(self) -> float:
        m = float(np.max(np.abs(self.occupied))) if self.occupied.size else 0.0
        return max(m, abs(self.volume)) if self.empty_count else m

    def power_sum(self, r: float) -> float:
        return float(np.sum(np.abs(self.occupied) ** r)) + self.empty_count * abs(self.volume) ** r


def level_coefficients(points: DyadicPointSet, j: tuple[int, ...]) -> LevelCoefficients:
    if len(j) != points.d:
        raise ValueError("level dimension does not match the point set")
    vol = math.prod(float(haar_volume_1d(ji)) for ji in j)
    order = sum(max(v, 0) for v in j)
    if order > 62:
        raise ValueError("level too fine to enumerate")
    prod, key = _count_factors(points, j)
    uniq, inv = np.unique(key, return_inverse=True)
    sums = np.bincount(inv.ravel(), weights=prod, minlength=uniq.size)
    coeffs = sums / points.N - vol
    return LevelCoefficients(j, coeffs, (1 << order) - uniq.size, vol)


def _levels(d: int, level_cap: int) -> Iterator[tuple[int, ...]]:
    return itertools.product(range(-1, level_cap + 1), repeat=d)


@dataclass(frozen=True)
class ParsevalResult:
    level_cap: int
    partial: float
    tail_bound: float
    tail_exact: bool

    def to_json(self) -> dict:
        return asdict(self)


def volume_tail(d: int, level_cap: int) -> Fraction:
    """Sum over levels with some j_i > level_cap of 2^|j| * sum_m <x_1...x_d, h>^2."""
    full = Fraction(1, 3)
    capped = Fraction(1, 4) + Fraction(1, 12) * (1 - Fraction(1, 4 ** (level_cap + 1)))
    return full**d - capped**d


def _count_tail(points: DyadicPointSet, level_cap: int) -> float:
    """Bound on the counting-part contribution beyond ``level_cap``.

    Uses ``|g_1(z, j)| <= 2^-j-1`` and at most N points per box.
    """
    q = points.precision_q
    full = 1.0 + sum(2.0 ** (-j - 2) for j in range(q))
    capped = 1.0 + sum(2.0 ** (-j - 2) for j in range(min(level_cap + 1, q)))
    return full**points.d - capped**points.d


def parseval_l2(points: DyadicPointSet, level_cap: int) -> ParsevalResult:
    """Partial Parseval sum of squared L2 discrepancy over levels j_i <= level_cap.

    Past ``precision_q - 1`` only volume terms remain, so the tail is known in
    closed form; below that a cruder bound is reported.
    """
    if level_cap < 0:
        raise ValueError("level_cap must be non-negative")
    total = 0.0
    for j in _levels(points.d, level_cap):
        lc = level_coefficients(points, j)
        total += 2.0**lc.order * lc.power_sum(2)
    vt = float(volume_tail(points.d, level_cap))
    if level_cap >= points.precision_q - 1:
        return ParsevalResult(level_cap, total, vt, True)
    bound = 2 * vt + 2 * _count_tail(points, level_cap)
    return ParsevalResult(level_cap, total, bound, False)


def littlewood_paley_bound(points: DyadicPointSet, p: float, level_cap: int) -> float:
    """Truncated Haar-side sum sum_j 2^{2|j|(1-1/pb)} (sum_m |<D,h>|^pb)^{2/pb}, pb = max(p, 2)."""
    if not 1 < p < math.inf:
        raise ValueError("p must lie in (1, inf)")
    pb = max(p, 2.0)
    total = 0.0
    for j in _levels(points.d, level_cap):
        lc = level_coefficients(points, j)
        total += 2.0 ** (2 * lc.order * (1 - 1 / pb)) * lc.power_sum(pb) ** (2 / pb)
    return total


@dataclass(frozen=True)
class DecayRow:
    level: int
    observed: float
    argmax_j: tuple[int, ...]
    reference: float
    ratio: float


def decay_reference(n: int, t: int, level: int, d: int) -> float:
    """2^(-2n+t) * (2n - t - 2|j|)^(d-1); the log factor is floored at 1."""
    return 2.0 ** (-2 * n + t) * max(2 * n - t - 2 * level, 1) ** (d - 1)


def decay_profile(
    points: DyadicPointSet, t: int, levels: Sequence[int] | None = None
) -> list[DecayRow]:
    """Largest |<D, h_{j,m}>| per order |j| against the order-2 net decay shape."""
    N = points.N
    if N & (N - 1):
        raise ValueError("decay profile needs 2^n points")
    n = N.bit_length() - 1
    admissible = [L for L in range(0, n + 1) if 2 * L + t <= 2 * n]
    if levels is None:
        levels = admissible
    rows = []
    for L in levels:
        if 2 * L + t > 2 * n:
            raise ValueError(f"level {L} violates |j| + t/2 <= n (n={n}, t={t})")
        best, arg = -1.0, ()
        for j in level_vectors(L, points.d, lowest=-1):
            m = level_coefficients(points, j).max_abs()
            if m > best:
                best, arg = m, j
        ref = decay_reference(n, t, L, points.d)
        rows.append(DecayRow(L, best, arg, ref, best / ref))
    return rows
