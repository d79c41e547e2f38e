"""Figures written next to the CSV output."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .bench import BenchRow, summarize  # noqa: E402


def plot_sweep(rows: list[BenchRow], path) -> None:
    """Median max-violation against b for the engine, randomized rounding and the bound curves."""
    s = summarize(rows)
    bs = sorted(s)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(bs, [s[b]["engine"] for b in bs], "o-", label="engine")
    ax.plot(bs, [s[b]["random"] for b in bs], "s-", label="randomized rounding")
    ax.plot(bs, [s[b]["envelope_nlog"] for b in bs], "--", label=r"$\sqrt{n\log(2+m/n)}$")
    ax.plot(bs, [s[b]["bound_Lb"] for b in bs], ":", label=r"$\sqrt{Lb}+L$")
    ax.plot(bs, [s[b]["bound_delta"] for b in bs], "-.", label=r"$\sqrt{\Delta}\log n$")
    ax.set_xscale("log", base=2)
    ax.set_yscale("log")
    ax.set_xlabel("right-hand side b")
    ax.set_ylabel("max additive violation")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
