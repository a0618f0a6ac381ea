"""
Figures for the zero scans: an SVG heatmap of the scaled minimum modulus
min_m |f_m| over a search box, with the located eigenvalues on top.
"""

# %% Package Imports
import logging

import matplotlib
matplotlib.use("Agg")
import matplotlib.colors as mcolors
import matplotlib.pyplot as plt
import numpy as np

logger = logging.getLogger(__name__)

FIGURE_SIZE = (10.24, 7.68)  # inches, 1024x768 at 100 dpi
FIGURE_DPI = 100
SVG_HASHSALT = "pytransmission"
LOW_COLOR = "#08306b"
HIGH_COLOR = "#f7fbff"


# %% Colour helpers

def create_colormap(low=LOW_COLOR, high=HIGH_COLOR):
    """Linear two-colour ramp used for the minimum-modulus heatmap."""
    return mcolors.LinearSegmentedColormap.from_list("min_modulus", [low, high])


# %% Heatmap

def min_modulus_heatmap(re_values, im_values, grid, path, zeros=(), title=None):
    """
    Write an SVG heatmap of log10 min_m |f_m| over a search box.

    Parameters:
    - re_values (array): Grid abscissae, length nx.
    - im_values (array): Grid ordinates, length ny.
    - grid (array): Levels shaped (ny, nx); -inf entries (exact zeros) are
      drawn at the lowest finite level.
    - path (str): Output .svg file.
    - zeros (iterable of complex, optional): Eigenvalues marked on top of the map.
    - title (str, optional): Axes title.

    Output is byte-stable: fixed figure size, fixed SVG hash salt and no date metadata.
    """
    grid = np.asarray(grid, dtype=float)
    finite = grid[np.isfinite(grid)]
    if finite.size == 0:
        raise ValueError("heatmap grid has no finite values")
    levels = np.where(np.isfinite(grid), grid, finite.min())

    with plt.rc_context({"svg.hashsalt": SVG_HASHSALT, "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=FIGURE_SIZE, dpi=FIGURE_DPI)
        mesh = ax.pcolormesh(re_values, im_values, levels, cmap=create_colormap(),
                             vmin=finite.min(), vmax=finite.max(), shading="auto")
        zeros = [complex(lam) for lam in zeros]
        if zeros:
            ax.scatter([lam.real for lam in zeros], [lam.imag for lam in zeros],
                       s=12, c="#d62728", marker="x", linewidths=1.0)
        ax.set_xlabel("Re lambda")
        ax.set_ylabel("Im lambda")
        if title:
            ax.set_title(title)
        fig.colorbar(mesh, ax=ax, label="log10 min |f_m|")
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    logger.info("Wrote heatmap %s (%d x %d)", path, len(re_values), len(im_values))
