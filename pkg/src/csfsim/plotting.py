"""Diagnostic figures written with matplotlib's SVG backend.

Figures are built on a bare ``Figure`` (no pyplot state), and the SVG
writer is pinned (fixed hash salt, no date metadata) so the same inputs give
the same bytes on every run.
"""

from __future__ import annotations

import matplotlib as mpl
import numpy as np
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.figure import Figure

STYLE = {
    "font.size": 10,
    "axes.titlesize": 11,
    "axes.labelsize": 10,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "svg.fonttype": "none",
    "svg.hashsalt": "csfsim",
    "path.simplify": False,
}

LABELS = {"tullock": "Tullock-form", "difference": "Difference-form"}


def _save_svg(fig, path):
    FigureCanvasSVG(fig)
    fig.savefig(path, format="svg", metadata={"Date": None})


def render_scatter_svg(data, fit, path):
    """Observed versus fitted win percentage, one mark per team-season row.

    The x position is the fitted CSF evaluated at the row's run totals, the y
    position is the observed ``wins / games``. The dashed diagonal marks a
    perfect prediction. The marks are grouped under SVG id ``observations``
    and the diagonal has id ``reference``.
    """
    cols = data.columns
    wins = np.asarray(cols["wins"], dtype=float)
    games = wins + cols["losses"]
    observed = wins / games
    predicted = np.asarray(fit.predict(cols["rs"], cols["ra"]), dtype=float)

    with mpl.rc_context(STYLE):
        fig = Figure(figsize=(5.5, 5.5))
        ax = fig.add_subplot()
        lo = float(min(observed.min(), predicted.min()))
        hi = float(max(observed.max(), predicted.max()))
        pad = 0.02 * (hi - lo) + 1e-3
        lo, hi = lo - pad, hi + pad
        ax.scatter(predicted, observed, s=4, alpha=0.25, linewidths=0, color="#1f4e79", gid="observations")
        ax.plot([lo, hi], [lo, hi], ls="--", lw=1.0, color="#b22222", gid="reference")
        ax.set_xlim(lo, hi)
        ax.set_ylim(lo, hi)
        ax.set_aspect("equal")
        ax.set_xlabel(f"{LABELS[fit.form]} expected win percentage ({fit.names[0]} = {fit.parameter:.4g})")
        ax.set_ylabel("Observed win percentage")
        ax.set_title(f"{len(observed):,} team-seasons, R$^2$ = {fit.r2:.3f}")
        fig.tight_layout()
        _save_svg(fig, path)
