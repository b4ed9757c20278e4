#!/usr/bin/env python3
"""Plot loop phases against latitude from a chiral-berry phase CSV.

Usage: plot_phase.py <phase.csv> <out.png>

When the report carries the isotropic-model tag, the analytic
2 pi sigma q cos(theta0) curve is overlaid.
"""

import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from gridframe import SchemaError, load_phase


def render_phase_curve(phase_path, out_path):
    rows = load_phase(phase_path)
    theta0 = np.array([r["theta0"] for r in rows])
    raw = np.array([r["raw"] for r in rows])
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    overlay = [r for r in rows if r["isotropic_q"] is not None]
    if overlay:
        sigma = overlay[0]["sigma"]
        q = overlay[0]["isotropic_q"]
        dense = np.linspace(min(theta0), max(theta0), 400)
        if len(rows) == 1:
            dense = np.linspace(0.05, np.pi - 0.05, 400)
        ax.plot(
            dense,
            2.0 * np.pi * sigma * q * np.cos(dense),
            color="0.4",
            lw=1.2,
            label=r"$2\pi\sigma q\cos\theta_0$",
        )
    ax.plot(theta0, raw, "o", ms=5, color="crimson", label="computed")
    ax.set_xlabel(r"$\theta_0$ (rad)")
    ax.set_ylabel("loop phase (rad)")
    ax.legend(loc="best")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 2:
        print("usage: plot_phase.py <phase.csv> <out.png>", file=sys.stderr)
        return 2
    try:
        render_phase_curve(argv[0], argv[1])
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
