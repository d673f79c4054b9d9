"""Finite-key security calculus.

Three error terms make up the distance from an ideal key-or-abort
protocol:

* correctness  eps_ec = 2^-t           (verification hash length t)
* estimation   eps_pe(nu) = 2 exp(-(m-k) k^2 nu^2 / (m (k+1)))
* extraction   eps_pa(nu) = 1/2 sqrt(2^(-(m-k)(log2(1/cbar) - h(delta+nu)) + r + t + ell))

Secrecy is the infimum of eps_pe + eps_pa over the slack nu in
(0, 1/2 - delta); total security adds eps_ec.  All arithmetic lives in
the base-2 log domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import LOG2E, LogProb, binary_entropy

_NU_EDGE = 1e-6
_GRID_POINTS = 64
_GOLDEN_TOL = 1e-9


@dataclass(frozen=True)
class ProtocolParams:
    """One protocol instance: block geometry, thresholds and leakage."""

    m: int
    k: int
    delta: float
    r: int
    t: int
    ell: int
    cbar: float

    def __post_init__(self):
        if not 0 < self.k < self.m:
            raise ValueError(f"need 0 < k < m, got k={self.k}, m={self.m}")
        if not 0.0 < self.delta < 0.5:
            raise ValueError(f"delta {self.delta} outside (0, 1/2)")
        if self.t < 1:
            raise ValueError("verification hash needs at least one bit")
        if not 0 <= self.ell <= self.n:
            raise ValueError(f"key length {self.ell} outside [0, n={self.n}]")
        if not 0.0 < self.cbar < 1.0:
            raise ValueError(f"overlap bound {self.cbar} outside (0, 1)")
        if not self.r < self.n:
            raise ValueError(f"syndrome length {self.r} must be below n={self.n}")

    @property
    def n(self) -> int:
        return self.m - self.k


@dataclass(frozen=True)
class EpsilonBreakdown:
    """Security-error decomposition at the optimizing slack nu."""

    eps_ec: LogProb
    eps_pe: LogProb
    eps_pa: LogProb
    nu: float
    eps_secrecy: LogProb
    eps_total: LogProb

    @property
    def vacuous(self) -> bool:
        """True when the bound says nothing (total >= 1)."""
        return self.eps_total.log2_value >= 0.0

    def to_json(self) -> dict:
        return {
            "log2_eps_ec": self.eps_ec.log2_value,
            "log2_eps_pe": self.eps_pe.log2_value,
            "log2_eps_pa": self.eps_pa.log2_value,
            "nu": self.nu,
            "log2_eps_secrecy": self.eps_secrecy.log2_value,
            "log2_eps_total": self.eps_total.log2_value,
            "eps_ec_decimal": self.eps_ec.decimal_sci(),
            "eps_pe_decimal": self.eps_pe.decimal_sci(),
            "eps_pa_decimal": self.eps_pa.decimal_sci(),
            "eps_secrecy_decimal": self.eps_secrecy.decimal_sci(),
            "eps_total_decimal": self.eps_total.decimal_sci(),
            "vacuous": self.vacuous,
        }


def eps_ec(t: int) -> LogProb:
    """Correctness error of the t-bit verification hash, exactly 2^-t."""
    if t < 1:
        raise ValueError("t must be >= 1")
    return LogProb(-float(t))


def _log2_eps_pe(nu: float, m: int, k: int) -> float:
    n = m - k
    return 1.0 - (n * k * k * nu * nu / (m * (k + 1.0))) * LOG2E


def eps_pe(nu: float, m: int, k: int) -> LogProb:
    """Estimation error 2 exp(-(m-k) k^2 nu^2 / (m (k+1)))."""
    if nu <= 0:
        raise ValueError("nu must be positive")
    if not 0 < k < m:
        raise ValueError(f"need 0 < k < m, got k={k}, m={m}")
    return LogProb(_log2_eps_pe(nu, m, k))


def _log2_eps_pa(nu: float, p: ProtocolParams) -> float:
    margin = math.log2(1.0 / p.cbar) - binary_entropy(p.delta + nu)
    g = p.n * margin - p.r - p.t - p.ell
    return -1.0 - 0.5 * g


def eps_pa(nu: float, p: ProtocolParams) -> LogProb:
    """Extraction error 1/2 * 2^(-g/2), g = n(log2(1/cbar) - h(delta+nu)) - r - t - ell."""
    if not 0.0 < nu < 0.5 - p.delta:
        raise ValueError(f"nu {nu} outside (0, 1/2 - delta)")
    return LogProb(_log2_eps_pa(nu, p))


def _log2_secrecy_at(nu: float, p: ProtocolParams) -> float:
    return float(np.logaddexp2(_log2_eps_pe(nu, p.m, p.k), _log2_eps_pa(nu, p)))


def _nu_grid(p: ProtocolParams, points: int = _GRID_POINTS) -> np.ndarray:
    hi = 0.5 - p.delta - _NU_EDGE
    if hi <= _NU_EDGE:
        return np.array([0.5 * (0.5 - p.delta)])
    return np.geomspace(_NU_EDGE, hi, points)


def _golden_min(f, lo: float, hi: float, tol: float = _GOLDEN_TOL):
    """Golden-section minimizer; returns the best evaluated (x, f(x))."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    best = (c, fc) if fc <= fd else (d, fd)
    while abs(b - a) > tol * max(1.0, abs(b)):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
        cand = (c, fc) if fc <= fd else (d, fd)
        if cand[1] < best[1]:
            best = cand
    return best


def _binary_entropy_vec(x: np.ndarray) -> np.ndarray:
    x = np.clip(x, 1e-300, 1.0 - 1e-16)
    return -(x * np.log2(x) + (1.0 - x) * np.log2(1.0 - x))


def secrecy_log2(p: ProtocolParams, refine: bool = True) -> tuple[float, float]:
    """(nu*, log2 of eps_pe + eps_pa at nu*) over evaluated points.

    Golden-section search plus a 64-point log-spaced safety grid; the
    returned value is always an evaluated point and therefore a valid
    instance of the infimum bound even if the objective were not
    unimodal.
    """
    grid = _nu_grid(p)
    vals = np.logaddexp2(
        1.0 - (p.n * p.k * p.k * grid * grid / (p.m * (p.k + 1.0))) * LOG2E,
        -1.0 - 0.5 * (p.n * (math.log2(1.0 / p.cbar)
                             - _binary_entropy_vec(p.delta + grid))
                      - p.r - p.t - p.ell),
    )
    i = int(np.argmin(vals))
    best_nu, best_val = float(grid[i]), float(vals[i])
    if refine:
        lo = float(grid[max(0, i - 1)])
        hi = float(grid[min(len(grid) - 1, i + 1)])
        if hi > lo:
            nu_g, val_g = _golden_min(lambda nu: _log2_secrecy_at(nu, p), lo, hi)
            if val_g < best_val:
                best_nu, best_val = nu_g, val_g
    return best_nu, best_val


def secrecy_bound(p: ProtocolParams) -> EpsilonBreakdown:
    """Minimize eps_pe(nu) + eps_pa(nu) over nu and report the split."""
    nu, _ = secrecy_log2(p)
    pe = eps_pe(nu, p.m, p.k)
    pa = eps_pa(nu, p)
    secrecy = pe + pa
    total = eps_ec(p.t) + secrecy
    return EpsilonBreakdown(eps_ec=eps_ec(p.t), eps_pe=pe, eps_pa=pa, nu=nu,
                            eps_secrecy=secrecy, eps_total=total)


def total_security(p: ProtocolParams) -> EpsilonBreakdown:
    """Full security error eps_ec + inf_nu (eps_pe + eps_pa)."""
    return secrecy_bound(p)


def asymptotic_rate(delta: float, cbar: float) -> float:
    """Infinite-block key rate log2(1/cbar) - 2 h(delta); may be negative."""
    if not 0.0 <= delta < 0.5:
        raise ValueError(f"delta {delta} outside [0, 1/2)")
    if not 0.0 < cbar < 1.0:
        raise ValueError(f"cbar {cbar} outside (0, 1)")
    return math.log2(1.0 / cbar) - 2.0 * binary_entropy(delta)
