"""Parsing helpers for the CSV schemas exported by the chiral-berry CLI."""

import csv
from dataclasses import dataclass

import numpy as np

GRID_COLUMNS = ["theta", "phi", "value_re", "value_im", "channel"]
PHASE_COLUMNS = ["theta0", "sigma", "segments", "raw", "principal", "isotropic_q"]


class SchemaError(Exception):
    """Input file does not conform to the expected CSV schema."""


@dataclass
class GridFrame:
    """Rectangular (theta, phi) grid with complex values and channel label."""

    thetas: np.ndarray
    phis: np.ndarray
    values: np.ndarray
    channel: str


def _read_rows(path, required):
    try:
        with open(path, newline="", encoding="utf-8") as handle:
            reader = csv.DictReader(handle)
            if reader.fieldnames is None or sorted(reader.fieldnames) != sorted(required):
                raise SchemaError(
                    f"{path}: expected columns {required}, got {reader.fieldnames}"
                )
            rows = list(reader)
    except (OSError, csv.Error) as exc:
        raise SchemaError(f"{path}: {exc}") from exc
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def load_grid(path):
    """Load a grid CSV; raises SchemaError on malformed or ragged input."""
    rows = _read_rows(path, GRID_COLUMNS)
    try:
        thetas = np.array([float(r["theta"]) for r in rows])
        phis = np.array([float(r["phi"]) for r in rows])
        values = np.array(
            [complex(float(r["value_re"]), float(r["value_im"])) for r in rows]
        )
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{path}: non-numeric cell ({exc})") from exc
    channels = {r["channel"] for r in rows}
    if len(channels) != 1:
        raise SchemaError(f"{path}: expected one channel, got {sorted(channels)}")
    theta_axis = np.unique(thetas)
    phi_axis = np.unique(phis)
    if len(theta_axis) * len(phi_axis) != len(rows):
        raise SchemaError(f"{path}: grid is not rectangular")
    grid = np.full((len(theta_axis), len(phi_axis)), np.nan + 0j)
    t_index = {t: i for i, t in enumerate(theta_axis)}
    p_index = {p: j for j, p in enumerate(phi_axis)}
    for theta, phi, value in zip(thetas, phis, values):
        i, j = t_index[theta], p_index[phi]
        if not np.isnan(grid[i, j].real):
            raise SchemaError(f"{path}: duplicate node ({theta}, {phi})")
        grid[i, j] = value
    if np.any(np.isnan(grid.real)):
        raise SchemaError(f"{path}: missing grid nodes")
    return GridFrame(
        thetas=theta_axis, phis=phi_axis, values=grid, channel=channels.pop()
    )


def load_phase(path):
    """Load a phase-report CSV into a list of typed rows."""
    rows = _read_rows(path, PHASE_COLUMNS)
    parsed = []
    try:
        for r in rows:
            parsed.append(
                {
                    "theta0": float(r["theta0"]),
                    "sigma": int(r["sigma"]),
                    "raw": float(r["raw"]),
                    "principal": float(r["principal"]),
                    "isotropic_q": float(r["isotropic_q"]) if r["isotropic_q"] else None,
                }
            )
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{path}: non-numeric cell ({exc})") from exc
    return parsed
