"""Rendering of sweep and preset-figure data to PNG files.

Data emission (CSV) is the primary output; these helpers draw the same
curves so a sweep or figure run leaves a quick-look image next to the
delimited files. Uses the Agg backend only; nothing opens a window.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_RC = {
    "figure.dpi": 150,
    "savefig.dpi": 150,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "grid.linewidth": 0.6,
    "legend.frameon": False,
    "lines.linewidth": 1.4,
}


def render_panels(path, panels, width: float = 6.0, panel_height: float = 3.2) -> None:
    """Stack one axes per panel; each panel is a dict with keys
    ``curves`` (list of (label, x, y)), ``xlabel``, ``ylabel`` and the
    optional ``logx``/``logy``/``title`` switches."""
    with plt.rc_context(_RC):
        fig, axes = plt.subplots(
            len(panels), 1, figsize=(width, panel_height * len(panels)), squeeze=False
        )
        for ax, panel in zip(axes[:, 0], panels):
            for label, x, y in panel["curves"]:
                ax.plot(x, y, label=label)
            if panel.get("logx"):
                ax.set_xscale("log")
            if panel.get("logy"):
                ax.set_yscale("log")
            ax.set_xlabel(panel.get("xlabel", ""))
            ax.set_ylabel(panel.get("ylabel", ""))
            if panel.get("title"):
                ax.set_title(panel["title"])
            if len(panel["curves"]) > 1:
                ax.legend(fontsize=8)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)


def render_sweep(path, table, receiver: str, benchmark: str) -> None:
    """Quick-look image for one sweep table: error curves on top, the
    benchmark ratio below."""
    panels = [
        {
            "curves": [
                (receiver, table.alpha_sq, table.p_receiver),
                (benchmark, table.alpha_sq, table.p_benchmark),
            ],
            "xlabel": "alpha^2",
            "ylabel": "error probability",
            "logy": True,
        },
        {
            "curves": [(f"{receiver} / {benchmark}", table.alpha_sq, table.ratio)],
            "xlabel": "alpha^2",
            "ylabel": "ratio",
        },
    ]
    render_panels(path, panels)
