"""Figure rendering for rate-curve sweeps.

The CSV remains the machine-readable contract; this renders the same
sweep as the familiar rate-versus-block-length picture: one curve per
error threshold on a log-x axis, dotted horizontal asymptotes, and a
marker where each curve first reaches half its asymptote.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .optimize import RateCurve
from .security import asymptotic_rate


def render_curve(curve: RateCurve, path: str) -> None:
    """Write the sweep figure to `path` (format from the extension)."""
    by_delta: dict = {}
    for p in curve.points:
        by_delta.setdefault(p.query.delta, []).append(p)

    fig, ax = plt.subplots(figsize=(7.0, 4.6))
    colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    for i, (delta, pts) in enumerate(sorted(by_delta.items())):
        pts = sorted(pts, key=lambda p: p.query.m)
        ms = [p.query.m for p in pts]
        rates = [p.rate for p in pts]
        color = colors[i % len(colors)]
        ax.semilogx(ms, rates, "-o", ms=3.5, color=color,
                    label=rf"$\delta = {delta:g}$")
        asym = asymptotic_rate(delta, pts[0].query.cbar)
        if asym > 0:
            ax.axhline(asym, color=color, linestyle=":", linewidth=1.0)
        crossing = curve.half_asymptote_m.get(delta)
        if crossing is not None:
            rate_at = next(p.rate for p in pts if p.query.m == crossing)
            ax.plot([crossing], [rate_at], marker="D", color=color,
                    markersize=7, markerfacecolor="none")
    ax.set_xlabel("block length $m$")
    ax.set_ylabel(r"key rate $\ell / m$")
    ax.set_ylim(bottom=0.0)
    ax.grid(True, which="both", alpha=0.25)
    ax.legend(loc="upper left")
    fig.tight_layout()
    fig.savefig(path, dpi=160)
    plt.close(fig)
