"""Finite-key security calculus and protocol simulator for QKD."""

from .numerics import LogProb, binary_entropy, hamming_ball_log2, serfling_tail
from .security import (EpsilonBreakdown, ProtocolParams, asymptotic_rate,
                       eps_ec, eps_pa, eps_pe, secrecy_bound, total_security)
from .optimize import RateCurve, RatePoint, RateQuery, max_key_length, rate_curve

__all__ = [
    "LogProb", "binary_entropy", "hamming_ball_log2", "serfling_tail",
    "EpsilonBreakdown", "ProtocolParams", "asymptotic_rate",
    "eps_ec", "eps_pa", "eps_pe", "secrecy_bound", "total_security",
    "RateCurve", "RatePoint", "RateQuery", "max_key_length", "rate_curve",
]

__version__ = "0.1.0"
