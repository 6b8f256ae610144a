from __future__ import annotations

import math

import pytest

from hodisc.discrepancy import parseval_l2
from hodisc.scan import (
    ScanConfig,
    ScanRow,
    boundedness_proxy,
    normalize,
    parse_p,
    point_source,
    rows_to_csv,
    run_scan,
    scan_sizes,
)


def test_scan_sizes():
    assert scan_sizes(3) == list(range(2, 9))
    sizes = scan_sizes(10)
    assert sizes[:255] == list(range(2, 257))
    assert sizes[255:] == [384, 512, 768, 1024]


def test_parse_p():
    assert parse_p("star") == math.inf
    assert parse_p("1.5") == 1.5
    with pytest.raises(ValueError):
        parse_p("0.9")


def test_config_guards():
    with pytest.raises(ValueError):
        ScanConfig(d=1, n_max=15, p_values=(2,))
    assert ScanConfig(d=1, n_max=15, p_values=(2,), allow_large=True).n_max == 15
    with pytest.raises(ValueError):
        ScanConfig(d=1, n_max=4, p_values=(2,), kind="sobol")
    with pytest.raises(ValueError):
        ScanConfig(d=1, n_max=4, p_values=())
    assert ScanConfig(d=3, n_max=4, p_values=(2,)).exponent == 1.5


def test_proxy_on_synthetic_rows():
    flat = [ScanRow(N, 2.0, 0.0, 0.0, 1.0, "x") for N in range(2, 257)]
    assert boundedness_proxy(flat, 2.0, 8).bounded
    grow = [ScanRow(N, 2.0, 0.0, 0.0, math.log(N), "x") for N in range(2, 257)]
    res = boundedness_proxy(grow, 2.0, 8)
    assert not res.bounded and res.split == 16


def test_p2_scan_matches_parseval_within_certificate():
    cfg = ScanConfig(d=2, n_max=5, p_values=(2,))
    source = point_source(cfg)
    for row in run_scan(cfg):
        pts = source(row.N)
        cert = parseval_l2(pts, pts.precision_q - 1)
        recomputed = math.sqrt(cert.partial + cert.tail_bound)
        assert abs(normalize(row.N, recomputed, 1.0) - row.normalized) <= row.N * 1e-9
        lower = math.sqrt(cert.partial)
        assert lower <= row.value + 1e-12


def test_shifted_scan_differs_and_repeats():
    a = run_scan(ScanConfig(d=1, n_max=4, p_values=(2,), seed=3))
    b = run_scan(ScanConfig(d=1, n_max=4, p_values=(2,), seed=3))
    c = run_scan(ScanConfig(d=1, n_max=4, p_values=(2,)))
    assert rows_to_csv(a) == rows_to_csv(b) != rows_to_csv(c)


def test_tezuka_kind_runs():
    rows = run_scan(ScanConfig(d=2, n_max=3, p_values=(1, "star"), kind="tezuka-order1"))
    assert len(rows) == 2 * 7
    assert all(r.value >= 0 for r in rows)
