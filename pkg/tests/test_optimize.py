"""Key-length optimizer and rate-curve sweeps."""

import pytest

from finitekey.codes import leakage_bits
from finitekey.numerics import LogProb
from finitekey.optimize import (CSV_HEADER, RateQuery, curve_csv,
                                max_key_length, rate_curve)
from finitekey.security import ProtocolParams, total_security

EPS10 = LogProb.from_linear(1e-10)


def query(m, delta, cbar=0.5, factor=1.1):
    return RateQuery(m=m, delta=delta, eps_target=EPS10, cbar=cbar,
                     leakage_factor=factor)


def test_small_block_infeasible():
    pt = max_key_length(query(100, 0.1))
    assert pt.ell == 0 and not pt.feasible
    assert pt.eps_breakdown is None
    assert pt.to_json()["infeasible"] is True


def test_practical_block_feasible():
    pt = max_key_length(query(100_000, 0.01))
    assert pt.ell > 0
    assert 0 < pt.rate < 1
    assert pt.k_star > 0 and pt.t_star >= 34


def test_winner_revalidated_independently():
    pt = max_key_length(query(50_000, 0.02))
    assert pt.feasible
    n = pt.query.m - pt.k_star
    r = leakage_bits(n, pt.query.delta, pt.query.leakage_factor)
    params = ProtocolParams(m=pt.query.m, k=pt.k_star, delta=pt.query.delta,
                            r=r, t=pt.t_star, ell=pt.ell, cbar=pt.query.cbar)
    bd = total_security(params)
    assert bd.eps_total.log2_value <= EPS10.log2_value
    # one more key bit must break the budget (ell was maximal for k*, t*)
    params_plus = ProtocolParams(m=pt.query.m, k=pt.k_star,
                                 delta=pt.query.delta, r=r, t=pt.t_star,
                                 ell=pt.ell + 1, cbar=pt.query.cbar)
    assert total_security(params_plus).eps_total.log2_value > EPS10.log2_value
    # the key never exceeds the syndrome-and-hash-corrected budget
    assert pt.ell <= n - r - pt.t_star


def test_rate_curve_monotone_and_csv():
    ms = [2000, 10_000, 50_000]
    deltas = [0.01, 0.05]
    curve = rate_curve(ms, deltas, query(2000, 0.01))
    assert len(curve.points) == 6
    by_delta = {}
    for pt in curve.points:
        by_delta.setdefault(pt.query.delta, []).append((pt.query.m, pt.rate))
    for delta, series in by_delta.items():
        series.sort()
        rates = [r for _, r in series]
        assert all(b >= a for a, b in zip(rates, rates[1:]))
    # fixed m: rate does not increase with delta
    for m in ms:
        r001 = next(p.rate for p in curve.points
                    if p.query.m == m and p.query.delta == 0.01)
        r005 = next(p.rate for p in curve.points
                    if p.query.m == m and p.query.delta == 0.05)
        assert r005 <= r001

    csv = curve_csv(curve)
    lines = csv.strip().split("\n")
    assert lines[0] == CSV_HEADER
    assert len(lines) == 7
    first = lines[1].split(",")
    assert first[0] == "2000" and first[1] == "0.01"
    assert len(first) == 9


def test_rate_curve_deterministic():
    ms = [5000, 20_000]
    a = curve_csv(rate_curve(ms, [0.025], query(5000, 0.025)))
    b = curve_csv(rate_curve(ms, [0.025], query(5000, 0.025)))
    assert a == b


def test_empty_grid_gives_header_only():
    csv = curve_csv(rate_curve([], [], query(1000, 0.01)))
    assert csv == CSV_HEADER + "\n"


def test_query_validation():
    with pytest.raises(ValueError):
        RateQuery(m=100, delta=0.7, eps_target=EPS10, cbar=0.5)
    with pytest.raises(ValueError):
        RateQuery(m=100, delta=0.1, eps_target=LogProb(0.5), cbar=0.5)
    with pytest.raises(ValueError):
        RateQuery(m=100, delta=0.1, eps_target=EPS10, cbar=1.5)
