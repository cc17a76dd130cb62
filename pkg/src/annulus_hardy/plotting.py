"""Static SVG figures for the command-line reports.

Output is byte-stable across runs: the Agg backend is forced, the SVG hash
salt is pinned and the date metadata is dropped.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .errors import PreconditionError  # noqa: E402

KINDS = ("line", "loglog")


def plot_table(x, ys, path, kind="line", *, labels=None, reference=None, reference_label=None,
               xlabel="", ylabel="", title=""):
    """Draw one or more series against ``x`` and save to ``path`` as SVG.

    Parameters
    ----------
    x : sequence of float
    ys : sequence of float, or list of such sequences
    kind : {"line", "loglog"}
    reference : float, optional
        Height of a horizontal reference line.
    """
    if kind not in KINDS:
        raise PreconditionError(f"plot kind must be one of {KINDS}, got {kind!r}")
    x = list(x)
    if not x:
        raise PreconditionError("cannot plot an empty table")
    if ys and not hasattr(ys[0], "__len__"):
        ys = [ys]
    labels = labels or [None] * len(ys)

    plt.rcParams["svg.hashsalt"] = "annulus-hardy"
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    try:
        for y, label in zip(ys, labels):
            ax.plot(x, list(y), marker="." if len(x) < 50 else None, label=label)
        if reference is not None:
            ax.axhline(reference, color="0.4", linestyle="--", linewidth=1.0, label=reference_label)
        if kind == "loglog":
            ax.set_xscale("log")
            ax.set_yscale("log")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        if any(labels) or reference_label:
            ax.legend()
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
    finally:
        plt.close(fig)
    return path
