#!/usr/bin/env python3
"""Render a chiral-berry grid CSV as a signed (theta, phi) heatmap.

Usage: plot_heatmap.py <grid.csv> <out.png>
"""

import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from gridframe import SchemaError, load_grid


def render_heatmap(grid_path, out_path):
    frame = load_grid(grid_path)
    values = np.real(frame.values)
    vmax = float(np.max(np.abs(values)))
    if vmax == 0.0:
        vmax = 1.0  # all-zero grid renders as the uniform mid color
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    mesh = ax.pcolormesh(
        frame.phis,
        frame.thetas,
        values,
        cmap="RdBu_r",
        vmin=-vmax,
        vmax=vmax,
        shading="nearest",
    )
    ax.set_xlabel(r"$\phi$ (rad)")
    ax.set_ylabel(r"$\theta$ (rad)")
    ax.set_title(frame.channel)
    fig.colorbar(mesh, ax=ax)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 2:
        print("usage: plot_heatmap.py <grid.csv> <out.png>", file=sys.stderr)
        return 2
    try:
        render_heatmap(argv[0], argv[1])
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
