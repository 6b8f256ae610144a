"""Scaling scans of normalized discrepancy over growing prefixes."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .discrepancy import DiscrepancyReport, l2_exact, lp_cellwise, star_discrepancy
from .genmat import order2_matrices, tezuka_matrices
from .sequence import (
    DyadicPointSet,
    SequenceSpec,
    prefix,
    random_shift,
    symmetrized_vdc,
    van_der_corput,
)

KINDS = ("tezuka-order1", "interlaced-order2", "vdc", "vdc-sym")
DEFAULT_N_MAX_GUARD = 14
DENSE_LIMIT = 256
# a 2-d scan to 2^12 points needs about 1.7e7 grid cells
SCAN_MAX_CELLS = 1 << 25


def parse_p(value: str | float) -> float:
    """``"star"``, ``"inf"`` or a real number >= 1."""
    if isinstance(value, str) and value.lower() in ("star", "inf"):
        return math.inf
    p = float(value)
    if not (p >= 1):
        raise ValueError(f"p must be >= 1 or 'star', got {value!r}")
    return p


def p_label(p: float) -> str:
    return "star" if math.isinf(p) else f"{p:g}"


@dataclass(frozen=True)
class ScanConfig:
    d: int
    n_max: int
    p_values: tuple[float, ...]
    kind: str = "interlaced-order2"
    seed: int | None = None
    out: str | None = None
    log_power: float | None = None  # defaults to d / 2
    max_cells: int = SCAN_MAX_CELLS
    allow_large: bool = False
    threads: int = 1
    ns: tuple[int, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown sequence kind {self.kind!r}; choose from {', '.join(KINDS)}")
        if self.d < 1:
            raise ValueError("d must be positive")
        if self.kind in ("vdc", "vdc-sym") and self.d != 1:
            raise ValueError(f"{self.kind} is one-dimensional; use --d 1")
        if self.n_max < 1:
            raise ValueError("n_max must be positive")
        if self.n_max > DEFAULT_N_MAX_GUARD and not self.allow_large:
            raise ValueError(f"n_max={self.n_max} above the guard of {DEFAULT_N_MAX_GUARD}")
        if self.kind == "interlaced-order2" and 2 * self.n_max > 62:
            raise ValueError("interlaced-order2 needs 2 * n_max <= 62 digits")
        ps = tuple(parse_p(p) for p in self.p_values)
        if not ps:
            raise ValueError("need at least one p")
        object.__setattr__(self, "p_values", ps)
        if self.threads < 1:
            raise ValueError("threads must be positive")

    @property
    def exponent(self) -> float:
        return self.d / 2 if self.log_power is None else self.log_power


def scan_sizes(n_max: int) -> list[int]:
    """2..256 densely, then 2^k and 3 * 2^(k-1) up to 2^n_max."""
    top = 1 << n_max
    sizes = list(range(2, min(top, DENSE_LIMIT) + 1))
    k = DENSE_LIMIT.bit_length() - 1
    while (1 << k) < top:
        for N in (3 << (k - 1), 1 << (k + 1)):
            if DENSE_LIMIT < N <= top:
                sizes.append(N)
        k += 1
    return sorted(set(sizes))


def point_source(cfg: ScanConfig) -> Callable[[int], DyadicPointSet]:
    """Function N -> first N points of the configured sequence."""
    if cfg.kind == "vdc":
        return lambda N: van_der_corput(N, precision_q=max(cfg.n_max, 1))
    if cfg.kind == "vdc-sym":
        return lambda N: symmetrized_vdc(N)
    if cfg.kind == "tezuka-order1":
        ms = tezuka_matrices(cfg.d, cfg.n_max, cfg.n_max)
    else:
        ms = order2_matrices(cfg.d, cfg.n_max)
    shift = None
    if cfg.seed is not None:
        q = min(ms.q_rows, ms.order * ms.n_cols)
        shift = random_shift(cfg.d, q, cfg.seed)
    spec = SequenceSpec(ms, shift=shift)
    return lambda N: prefix(spec, N)


def measure(points: DyadicPointSet, p: float, max_cells: int) -> DiscrepancyReport:
    if math.isinf(p):
        return star_discrepancy(points, max_cells=max_cells)
    if p == 2:
        return l2_exact(points)
    return lp_cellwise(points, p, max_cells=max_cells)


@dataclass(frozen=True)
class ScanRow:
    N: int
    p: float
    value: float
    error_bound: float
    normalized: float
    method: str


def normalize(N: int, value: float, exponent: float) -> float:
    return N * value / math.log(N) ** exponent


def run_scan(cfg: ScanConfig) -> list[ScanRow]:
    """One row per (N, p), ordered by N then by the order of ``p_values``."""
    sizes = list(cfg.ns) if cfg.ns else scan_sizes(cfg.n_max)
    source = point_source(cfg)

    def job(N: int) -> list[ScanRow]:
        pts = source(N)
        out = []
        for p in cfg.p_values:
            r = measure(pts, p, cfg.max_cells)
            out.append(ScanRow(N, p, r.value, r.error_bound, normalize(N, r.value, cfg.exponent), r.method))
        return out

    if cfg.threads == 1:
        chunks = [job(N) for N in sizes]
    else:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            chunks = list(pool.map(job, sizes))  # map keeps submission order
    return [row for chunk in chunks for row in chunk]


def running_max(rows: Sequence[ScanRow], p: float) -> float:
    return max(r.normalized for r in rows if r.p == p)


@dataclass(frozen=True)
class ProxyResult:
    p: float
    split: int
    bottom_max: float
    top_max: float
    ratio: float
    bounded: bool


def boundedness_proxy(rows: Sequence[ScanRow], p: float, n_max: int, slack: float = 0.10) -> ProxyResult:
    """Top-half running max against bottom-half max on the log2 N scale.

    Heuristic stand-in for an O(1) bound: the statistic counts as bounded when
    its maximum over N > 2^(n_max/2) is at most ``1 + slack`` times its
    maximum over N <= 2^(n_max/2).
    """
    split = 1 << (n_max // 2)
    sel = [r for r in rows if r.p == p]
    bottom = max(r.normalized for r in sel if r.N <= split)
    top = max(r.normalized for r in sel if r.N > split)
    ratio = top / bottom
    return ProxyResult(p, split, bottom, top, ratio, ratio <= 1 + slack)


def rows_to_csv(rows: Sequence[ScanRow]) -> str:
    lines = ["N,p,value,error_bound,normalized,method"]
    for r in rows:
        lines.append(
            f"{r.N},{p_label(r.p)},{r.value!r},{r.error_bound!r},{r.normalized!r},{r.method}"
        )
    for p in dict.fromkeys(r.p for r in rows):
        lines.append(f"running_max,{p_label(p)},,,{running_max(rows, p)!r},")
    return "\n".join(lines) + "\n"


def rows_to_json(rows: Sequence[ScanRow]) -> dict:
    ps = list(dict.fromkeys(r.p for r in rows))
    return {
        "rows": [
            {
                "N": r.N,
                "p": p_label(r.p),
                "value": r.value,
                "error_bound": r.error_bound,
                "normalized": r.normalized,
                "method": r.method,
            }
            for r in rows
        ],
        "running_max": {p_label(p): running_max(rows, p) for p in ps},
    }
