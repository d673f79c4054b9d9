"""Key-length maximization and rate-curve sweeps.

For a block length m and error threshold delta, find the largest final
key ell such that eps_ec + eps_pe + eps_pa stays below the target,
with the syndrome length fixed by the leakage model.  The search runs
k over a log-spaced grid with local refinement, t over a window around
ceil(log2(1/eps_target)), nu through the secrecy minimizer, and ell by
bisection (the total error is monotone in ell).
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from .codes import leakage_bits
from .numerics import LogProb
from .security import (EpsilonBreakdown, ProtocolParams, asymptotic_rate,
                       secrecy_log2, total_security)

_K_GRID_POINTS = 60
_T_BELOW = 10
_T_ABOVE = 20
_REFINE_ROUNDS = 2


@dataclass(frozen=True)
class RateQuery:
    """One optimizer invocation: block length, threshold and budget."""

    m: int
    delta: float
    eps_target: LogProb
    cbar: float
    leakage_factor: float = 1.1

    def __post_init__(self):
        if self.m < 4:
            raise ValueError("block length too small")
        if not 0.0 < self.delta < 0.5:
            raise ValueError(f"delta {self.delta} outside (0, 1/2)")
        if self.eps_target.log2_value >= 0.0:
            raise ValueError("eps target must be below 1")
        if not 0.0 < self.cbar < 1.0:
            raise ValueError(f"cbar {self.cbar} outside (0, 1)")
        if self.leakage_factor < 1.0:
            raise ValueError("leakage factor below the Shannon limit")


@dataclass(frozen=True)
class RatePoint:
    """Optimizer output for one (m, delta) query."""

    query: RateQuery
    ell: int
    rate: float
    k_star: int
    t_star: int
    nu_star: float
    eps_breakdown: EpsilonBreakdown | None

    @property
    def feasible(self) -> bool:
        return self.ell > 0

    def to_json(self) -> dict:
        out = {
            "m": self.query.m,
            "delta": self.query.delta,
            "log2_eps_target": self.query.eps_target.log2_value,
            "cbar": self.query.cbar,
            "leakage_factor": self.query.leakage_factor,
            "ell": self.ell,
            "rate": self.rate,
            "k": self.k_star,
            "t": self.t_star,
            "nu": self.nu_star,
            "infeasible": not self.feasible,
        }
        if self.eps_breakdown is not None:
            out["eps"] = self.eps_breakdown.to_json()
        return out


def _max_ell_for(q: RateQuery, k: int, t: int) -> tuple[int, float]:
    """Largest feasible ell for fixed (k, t), with the nu that attains it.

    Bisection over ell; the secrecy bound is re-minimized over nu at
    every probe, and feasibility of an ell means the full three-term
    budget fits under the target.
    """
    n = q.m - k
    r = leakage_bits(n, q.delta, q.leakage_factor)
    if r >= n:
        return -1, 0.0
    target = q.eps_target.log2_value
    log2_ec = -float(t)
    if log2_ec >= target:
        return -1, 0.0

    def feasible(ell: int) -> tuple[bool, float]:
        p = ProtocolParams(m=q.m, k=k, delta=q.delta, r=r, t=t, ell=ell,
                           cbar=q.cbar)
        nu, log2_sec = secrecy_log2(p, refine=False)
        return float(np.logaddexp2(log2_ec, log2_sec)) <= target, nu

    ok0, nu0 = feasible(0)
    if not ok0:
        return -1, 0.0
    lo, nu_lo = 0, nu0
    hi = n
    ok_hi, nu_hi = feasible(hi)
    if ok_hi:
        return hi, nu_hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        ok, nu = feasible(mid)
        if ok:
            lo, nu_lo = mid, nu
        else:
            hi = mid
    return lo, nu_lo


def _k_candidates(m: int, hints=()) -> list[int]:
    lo = min(16, max(1, m // 4))
    hi = max(lo + 1, m // 2)
    grid = np.unique(np.rint(np.geomspace(lo, hi, _K_GRID_POINTS)).astype(int))
    cands = {int(k) for k in grid if 0 < k < m - 1}
    for h in hints:
        h = int(h)
        if 0 < h < m - 1:
            cands.add(h)
    return sorted(cands)


def max_key_length(q: RateQuery, k_hints=()) -> RatePoint:
    """Maximize ell over (k, t, nu) subject to the security budget.

    Returns ell = 0 when no searched point is feasible.  The winning
    point is re-verified by a direct total_security evaluation before
    being reported.
    """
    t0 = math.ceil(-q.eps_target.log2_value)
    t_range = [t for t in range(max(1, t0 - _T_BELOW), t0 + _T_ABOVE + 1)]

    best = (0, 0, max(1, t0), 0.0)  # (ell, k, t, nu)

    def scan(k_values):
        nonlocal best
        for k in k_values:
            if not 0 < k < q.m - 1:
                continue
            for t in t_range:
                ell, nu = _max_ell_for(q, k, t)
                if ell > best[0]:
                    best = (ell, k, t, nu)

    k_grid = _k_candidates(q.m, hints=k_hints)
    scan(k_grid)

    for _ in range(_REFINE_ROUNDS):
        ell_b, k_b, _, _ = best
        if ell_b <= 0:
            break
        idx = k_grid.index(k_b) if k_b in k_grid else None
        lo = k_grid[idx - 1] if idx not in (None, 0) else max(1, k_b // 2)
        hi = k_grid[idx + 1] if idx is not None and idx + 1 < len(k_grid) else min(q.m - 2, 2 * k_b)
        local = sorted({int(v) for v in np.linspace(lo, hi, 9).round()})
        scan([k for k in local if k != k_b])

    ell, k, t, nu = best
    if ell <= 0:
        return RatePoint(query=q, ell=0, rate=0.0, k_star=0, t_star=0,
                         nu_star=0.0, eps_breakdown=None)
    n = q.m - k
    r = leakage_bits(n, q.delta, q.leakage_factor)

    # The bisection ran on the grid-only secrecy evaluation; the refined
    # minimizer can admit a few more key bits, so climb ell under it.
    def refined_ok(ell_probe: int) -> bool:
        if ell_probe > n:
            return False
        p = ProtocolParams(m=q.m, k=k, delta=q.delta, r=r, t=t,
                           ell=ell_probe, cbar=q.cbar)
        return total_security(p).eps_total.log2_value <= q.eps_target.log2_value

    step = 1
    while refined_ok(ell + step):
        ell += step
        step *= 2
    while step > 1:
        step //= 2
        if refined_ok(ell + step):
            ell += step

    params = ProtocolParams(m=q.m, k=k, delta=q.delta, r=r, t=t, ell=ell,
                            cbar=q.cbar)
    breakdown = total_security(params)
    if breakdown.eps_total.log2_value > q.eps_target.log2_value:
        raise AssertionError("re-verification of the optimum failed")
    return RatePoint(query=q, ell=ell, rate=ell / q.m, k_star=k, t_star=t,
                     nu_star=breakdown.nu, eps_breakdown=breakdown)


@dataclass
class RateCurve:
    """Sweep result: one RatePoint per (m, delta) plus crossing markers."""

    points: list[RatePoint] = field(default_factory=list)
    # per delta: smallest m on the grid whose rate reaches half the asymptote
    half_asymptote_m: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "points": [p.to_json() for p in self.points],
            "half_asymptote_m": {str(d): m for d, m in self.half_asymptote_m.items()},
        }


def rate_curve(m_values, delta_values, q_template: RateQuery) -> RateCurve:
    """Optimize every (m, delta) pair of the grid.

    m is swept in increasing order per delta, feeding each point's
    optimal k (and its scaled extrapolation) to the next point as warm
    starts, which keeps the reported curve monotone.
    """
    curve = RateCurve()
    m_sorted = sorted(int(m) for m in m_values)
    for delta in delta_values:
        hints: list[int] = []
        asym = asymptotic_rate(delta, q_template.cbar)
        crossing = None
        for m in m_sorted:
            q = RateQuery(m=m, delta=delta, eps_target=q_template.eps_target,
                          cbar=q_template.cbar,
                          leakage_factor=q_template.leakage_factor)
            point = max_key_length(q, k_hints=hints)
            curve.points.append(point)
            if point.feasible:
                grow = [point.k_star, point.k_star * 2, point.k_star * 3,
                        point.k_star * 5]
                hints = [h for h in grow if h < m_sorted[-1]]
            if crossing is None and asym > 0 and point.rate >= 0.5 * asym:
                crossing = m
        curve.half_asymptote_m[delta] = crossing
    return curve


CSV_HEADER = "m,delta,ell,rate,k,t,nu,log2_eps_total,asymptote"


def curve_csv(curve: RateCurve) -> str:
    """Render the sweep as CSV with the asymptote column appended."""
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for p in curve.points:
        asym = asymptotic_rate(p.query.delta, p.query.cbar)
        log2_total = ("" if p.eps_breakdown is None
                      else f"{p.eps_breakdown.eps_total.log2_value:.12g}")
        buf.write(
            f"{p.query.m},{p.query.delta:.12g},{p.ell},{p.rate:.12g},"
            f"{p.k_star},{p.t_star},{p.nu_star:.12g},{log2_total},{asym:.12g}\n")
    return buf.getvalue()
