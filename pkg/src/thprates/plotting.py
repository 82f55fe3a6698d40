"""Figure rendering for rate curves (file output only, Agg backend)."""

from __future__ import annotations

from typing import List

from .bounds import RatePoint

_STYLES = (
    ("c_awgn", "AWGN capacity", "-", "k"),
    ("bound_new", "New lower bound", "--", "C0"),
    ("bound_original", "Original lower bound", "-.", "C1"),
    ("asymptote", "High-SNR asymptote", ":", "C2"),
    ("exact_modt", "Exact mod-t rate", "-", "C3"),
    ("mc_rate", "Monte Carlo", "", "C4"),
)


def save_rate_curve_figure(points: List[RatePoint], path: str) -> None:
    """Render the rate curves to ``path`` (format from the extension)."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    snr = [p.snr_db for p in points]
    fig, ax = plt.subplots(figsize=(7, 5))
    for attr, label, style, color in _STYLES:
        vals = [getattr(p, attr) for p in points]
        if all(v is None for v in vals):
            continue
        if style:
            ax.plot(snr, vals, style, color=color, label=label)
        else:
            ax.plot(snr, vals, "o", color=color, ms=3.5, label=label)
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("Rate (bits/channel use)")
    ax.grid(True, alpha=0.4)
    ax.legend(loc="upper left")
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
