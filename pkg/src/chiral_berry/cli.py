"""Command dispatch, JSON config ingestion and bit-stable result export.

Exit codes: 0 success, 1 verification failure, 2 config error, 3 numeric
precondition violation. Complex values are exported as separate _re/_im
columns; all angles in files are radians.
"""

import argparse
import csv
import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__, algebra, berry, molecule, polarization, pumpprobe
from .errors import NotOrthogonal, OpenPath, PoleSingularity, QuadratureUnderResolved

ENV_THREADS = "CHIRAL_BERRY_THREADS"

MIN_GRID = 8

_COMPONENTS = ("x", "y", "z")


class ConfigError(Exception):
    """Malformed or inconsistent run configuration."""


# ---------------------------------------------------------------------------
# config parsing


def _parse_angle(value, name):
    if isinstance(value, bool):
        raise ConfigError(f"{name}: expected an angle, got a boolean")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, dict) and "value" in value:
        unit = value.get("unit", "rad")
        if unit == "rad":
            return float(value["value"])
        if unit == "deg":
            return float(value["value"]) * np.pi / 180.0
        raise ConfigError(f"{name}: unknown angle unit {unit!r}")
    raise ConfigError(f"{name}: expected a number (radians) or {{value, unit}}")


def _parse_complex(value, name):
    if isinstance(value, bool):
        raise ConfigError(f"{name}: expected a complex value, got a boolean")
    if isinstance(value, (int, float)):
        return complex(float(value))
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    raise ConfigError(f"{name}: expected a number or [re, im] pair")


def _parse_int(mapping, key, default, minimum, name):
    value = mapping.get(key, default)
    if not isinstance(value, int) or isinstance(value, bool):
        raise ConfigError(f"{name}: expected an integer")
    if value < minimum:
        raise ConfigError(f"{name}: must be >= {minimum}, got {value}")
    return value


def _build_model(spec):
    """Returns (model, l_max_hint, isotropic_q)."""
    if not isinstance(spec, dict) or "type" not in spec:
        raise ConfigError("model: expected an object with a 'type' field")
    kind = spec["type"]
    e_tilde = _parse_complex(spec.get("e_tilde", 1.0), "model.e_tilde")
    isotropic_q = None
    if kind == "harmonic":
        entries = spec.get("coefficients")
        if not isinstance(entries, list) or not entries:
            raise ConfigError("model.coefficients: expected a non-empty list")
        parsed = []
        for n, entry in enumerate(entries):
            try:
                component = entry["component"]
                l, m = int(entry["l"]), int(entry["m"])
                value = _parse_complex(entry["value"], f"model.coefficients[{n}].value")
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError(f"model.coefficients[{n}]: {exc}") from exc
            if component not in _COMPONENTS:
                raise ConfigError(f"model.coefficients[{n}].component must be x|y|z")
            parsed.append((component, l, m, value))
        try:
            model = molecule.HarmonicDipoleModel.from_entries(parsed, e_tilde=e_tilde)
        except ValueError as exc:
            raise ConfigError(f"model: {exc}") from exc
    elif kind == "isotropic":
        q = spec.get("q", 1.0)
        if not isinstance(q, (int, float)) or isinstance(q, bool) or q < 0:
            raise ConfigError("model.q: expected a non-negative number")
        model = molecule.isotropic_model(q=float(q), e_tilde=e_tilde)
        isotropic_q = float(q) * abs(e_tilde) ** 2
    elif kind == "uniform_circular":
        model = molecule.uniform_circular_model(e_tilde=e_tilde)
    elif kind == "chiral_demo":
        model = molecule.chiral_demo_model(e_tilde=e_tilde)
    elif kind == "zero":
        model = molecule.zero_model(e_tilde=e_tilde)
    else:
        raise ConfigError(f"model.type: unknown type {kind!r}")
    return model, model.l_max, isotropic_q


@dataclass
class RunConfig:
    raw: dict
    model: object
    l_max_hint: int
    isotropic_q: Optional[float]
    transform: Optional[np.ndarray]
    sigma: int
    pole_margin: float
    grid_n_theta: int
    grid_n_phi: int
    quadrature_degree: int
    allow_underresolved: bool
    loop: Optional[dict]
    annulus: Optional[dict]
    second_field: Optional[dict]
    seed: int
    debug_anti_holomorphic: bool

    @property
    def config_hash(self):
        canonical = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def load_config(path):
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")

    model, l_max_hint, isotropic_q = _build_model(raw.get("model"))

    transform = None
    if "transform" in raw:
        matrix = np.asarray(raw["transform"], dtype=float)
        if matrix.shape != (3, 3):
            raise ConfigError("transform: expected a 3x3 matrix")
        transform = matrix

    sigma = raw.get("sigma", 1)
    if sigma not in (-1, 1):
        raise ConfigError("sigma: must be +1 or -1")

    pole_margin = raw.get("pole_margin", polarization.DEFAULT_POLE_MARGIN)
    if not isinstance(pole_margin, (int, float)) or not 0 < pole_margin < np.pi / 4:
        raise ConfigError("pole_margin: expected a number in (0, pi/4)")

    grid = raw.get("grid", {})
    if not isinstance(grid, dict):
        raise ConfigError("grid: expected an object")
    n_theta = _parse_int(grid, "n_theta", 64, MIN_GRID, "grid.n_theta")
    n_phi = _parse_int(grid, "n_phi", 128, MIN_GRID, "grid.n_phi")

    default_degree = 2 * l_max_hint + 2
    degree = _parse_int(raw, "quadrature_degree", default_degree, 0, "quadrature_degree")
    allow_underresolved = bool(raw.get("allow_underresolved", False))

    loop = None
    if "loop" in raw:
        spec = raw["loop"]
        if not isinstance(spec, dict):
            raise ConfigError("loop: expected an object")
        segments = _parse_int(spec, "segments", 720, 4, "loop.segments")
        if "sweep" in spec:
            sweep = spec["sweep"]
            try:
                start = _parse_angle(sweep["start"], "loop.sweep.start")
                stop = _parse_angle(sweep["stop"], "loop.sweep.stop")
            except (KeyError, TypeError) as exc:
                raise ConfigError(f"loop.sweep: {exc}") from exc
            count = _parse_int(sweep, "count", 25, 2, "loop.sweep.count")
            loop = {"theta0": np.linspace(start, stop, count), "segments": segments}
        elif "theta0" in spec:
            loop = {
                "theta0": np.array([_parse_angle(spec["theta0"], "loop.theta0")]),
                "segments": segments,
            }
        elif "point" in spec:
            point = spec["point"]
            if not isinstance(point, dict):
                raise ConfigError("loop.point: expected {theta, phi}")
            try:
                loop = {
                    "theta0": np.array([_parse_angle(point["theta"], "loop.point.theta")]),
                    "phi": _parse_angle(point["phi"], "loop.point.phi"),
                    "segments": 0,
                }
            except KeyError as exc:
                raise ConfigError(f"loop.point: missing {exc}") from exc
        else:
            raise ConfigError("loop: expected 'theta0', 'sweep' or 'point'")

    annulus = None
    if "annulus" in raw:
        spec = raw["annulus"]
        if not isinstance(spec, dict):
            raise ConfigError("annulus: expected an object")
        try:
            theta1 = _parse_angle(spec["theta1"], "annulus.theta1")
            theta2 = _parse_angle(spec["theta2"], "annulus.theta2")
        except KeyError as exc:
            raise ConfigError(f"annulus: missing {exc}") from exc
        if theta1 > theta2:
            raise ConfigError("annulus: theta1 must not exceed theta2")
        annulus = {
            "theta1": theta1,
            "theta2": theta2,
            "n_theta": _parse_int(spec, "n_theta", 256, 8, "annulus.n_theta"),
            "n_phi": _parse_int(spec, "n_phi", 256, 8, "annulus.n_phi"),
            "segments": _parse_int(spec, "segments", 720, 4, "annulus.segments"),
        }

    second_field = None
    if "second_field" in raw:
        spec = raw["second_field"]
        if not isinstance(spec, dict):
            raise ConfigError("second_field: expected an object")
        dipole = spec.get("bound_dipole")
        if not isinstance(dipole, (list, tuple)) or len(dipole) != 3:
            raise ConfigError("second_field.bound_dipole: expected three complex entries")
        bound = np.array(
            [_parse_complex(v, "second_field.bound_dipole") for v in dipole]
        )
        point = spec.get("point")
        if not isinstance(point, dict):
            raise ConfigError("second_field.point: expected {theta, phi}")
        try:
            theta = _parse_angle(point["theta"], "second_field.point.theta")
            phi = _parse_angle(point["phi"], "second_field.point.phi")
        except KeyError as exc:
            raise ConfigError(f"second_field.point: missing {exc}") from exc
        second_field = {
            "bound_dipole": bound,
            "alpha": _parse_angle(spec.get("alpha", 0.0), "second_field.alpha"),
            "spectral_factor": _parse_complex(
                spec.get("spectral_factor", 1.0), "second_field.spectral_factor"
            ),
            "circular_first": bool(spec.get("circular_first", False)),
            "theta": theta,
            "phi": phi,
        }

    seed = _parse_int(raw, "seed", 0, 0, "seed")

    return RunConfig(
        raw=raw,
        model=model,
        l_max_hint=l_max_hint,
        isotropic_q=isotropic_q,
        transform=transform,
        sigma=sigma,
        pole_margin=float(pole_margin),
        grid_n_theta=n_theta,
        grid_n_phi=n_phi,
        quadrature_degree=degree,
        allow_underresolved=allow_underresolved,
        loop=loop,
        annulus=annulus,
        second_field=second_field,
        seed=seed,
        debug_anti_holomorphic=bool(raw.get("debug_anti_holomorphic", False)),
    )


# ---------------------------------------------------------------------------
# shared run machinery


def _resolve_model(config):
    """Apply the optional orthogonal transform; raises NotOrthogonal."""
    if config.transform is None:
        return config.model
    return molecule.transform_model(config.model, config.transform)


def _check_quadrature(config):
    bound = 2 * config.l_max_hint + 1
    if config.quadrature_degree < bound and not config.allow_underresolved:
        raise QuadratureUnderResolved(
            f"quadrature degree {config.quadrature_degree} is below the exactness "
            f"bound {bound}; set allow_underresolved to override"
        )


def _rule(config):
    return molecule.QuadratureRule.gauss_product(config.quadrature_degree)


def _fmt(x):
    return f"{x:.17g}"


def _chunked_rows(fn, thetas, threads):
    """Evaluate fn over row chunks of thetas; deterministic concatenation."""
    if threads <= 1 or len(thetas) < 2 * threads:
        return fn(thetas)
    chunks = [c for c in np.array_split(np.arange(len(thetas)), threads) if len(c)]
    results = [None] * len(chunks)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = {pool.submit(fn, thetas[c]): n for n, c in enumerate(chunks)}
        for future, n in futures.items():
            results[n] = future.result()
    if isinstance(results[0], tuple):
        return tuple(np.concatenate(parts, axis=0) for parts in zip(*results))
    return np.concatenate(results, axis=0)


class _Exporter:
    """Collects output files and writes the checksum manifest."""

    def __init__(self, out_dir, command, config, threads):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.command = command
        self.config = config
        self.threads = threads
        self.entries = []

    def _register(self, name, kind):
        digest = hashlib.sha256((self.out_dir / name).read_bytes()).hexdigest()
        self.entries.append({"name": name, "kind": kind, "sha256": digest})

    def write_grid(self, name, thetas, phis, values, channel):
        values = np.asarray(values)
        with open(self.out_dir / name, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(["theta", "phi", "value_re", "value_im", "channel"])
            for i, theta in enumerate(thetas):
                for j, phi in enumerate(phis):
                    v = complex(values[i, j])
                    writer.writerow([_fmt(theta), _fmt(phi), _fmt(v.real), _fmt(v.imag), channel])
        self._register(name, "grid")

    def write_table(self, name, header, rows, kind="table"):
        with open(self.out_dir / name, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(header)
            writer.writerows(rows)
        self._register(name, kind)

    def write_json(self, name, payload, kind="report"):
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
        (self.out_dir / name).write_text(text, encoding="utf-8")
        self._register(name, kind)

    def finish(self):
        manifest = {
            "run_id": f"{self.command}-{self.config.config_hash[:12]}",
            "config_hash": self.config.config_hash,
            "version": __version__,
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "seed": self.config.seed,
            "threads": self.threads,
            "files": sorted(self.entries, key=lambda e: e["name"]),
        }
        text = json.dumps(manifest, indent=2, sort_keys=True) + "\n"
        (self.out_dir / "manifest.json").write_text(text, encoding="utf-8")


# ---------------------------------------------------------------------------
# subcommands


def cmd_connection(config, out_dir, threads):
    _check_quadrature(config)
    model = _resolve_model(config)
    gram = molecule.gram_tensor(model, _rule(config))
    thetas, phis = polarization.uniform_grid(
        config.grid_n_theta, config.grid_n_phi, config.pole_margin
    )

    def rows(chunk):
        return berry.connection_pullback(
            gram, chunk[:, None], phis[None, :], config.sigma, config.pole_margin
        )

    a_theta, a_phi = _chunked_rows(rows, thetas, threads)
    export = _Exporter(out_dir, "connection", config, threads)
    export.write_grid("connection_a_theta.csv", thetas, phis, a_theta, "a_theta")
    export.write_grid("connection_a_phi.csv", thetas, phis, a_phi, "a_phi")
    export.finish()
    return 0


def cmd_curvature(config, out_dir, threads):
    _check_quadrature(config)
    model = _resolve_model(config)
    gram = molecule.gram_tensor(model, _rule(config))
    curv = berry.curvature_from_gram(gram)
    thetas, phis = polarization.uniform_grid(
        config.grid_n_theta, config.grid_n_phi, config.pole_margin
    )

    def rows(chunk):
        parts = berry.channel_densities(
            curv, chunk[:, None], phis[None, :], config.sigma, config.pole_margin
        )
        total = berry.density_from_wedge(
            curv, chunk[:, None], phis[None, :], config.sigma, config.pole_margin
        )
        return parts + (total,)

    part_xi, part_zeta, part_chi, total = _chunked_rows(rows, thetas, threads)
    grids = [
        polarization.FormDensityGrid(
            thetas=thetas, phis=phis, values=values, form=form, sigma=config.sigma
        )
        for form, values in (
            ("xi", part_xi),
            ("zeta", part_zeta),
            ("chi", part_chi),
            ("total", total),
        )
    ]

    export = _Exporter(out_dir, "curvature", config, threads)
    export.write_table(
        "curvature_tensor.csv",
        ["row", "col", "value_re", "value_im"],
        [
            [i, j, _fmt(gram[i, j].real), _fmt(gram[i, j].imag)]
            for i in range(3)
            for j in range(3)
        ],
    )
    vector_rows = []
    for channel, vec in (
        ("antisym", curv.antisym_vector),
        ("diamond", curv.diamond_vector),
        ("diagonal", curv.diagonal_vector),
    ):
        for component, value in zip(_COMPONENTS, vec):
            vector_rows.append(
                [channel, component, _fmt(value.real), _fmt(value.imag)]
            )
    export.write_table(
        "curvature_vectors.csv",
        ["channel", "component", "value_re", "value_im"],
        vector_rows,
    )
    for grid in grids:
        export.write_grid(
            f"density_{grid.form}.csv", grid.thetas, grid.phis, grid.values, grid.form
        )
    export.finish()
    return 0


def cmd_phase(config, out_dir, threads):
    if config.loop is None and config.annulus is None:
        raise ConfigError("phase command needs a 'loop' or 'annulus' section")
    _check_quadrature(config)
    model = _resolve_model(config)
    rule = _rule(config)

    phase_rows = None
    if config.loop is not None:
        overlay = "" if config.isotropic_q is None else _fmt(config.isotropic_q)
        phase_rows = []
        for theta0 in config.loop["theta0"]:
            if config.loop["segments"] == 0:
                path = berry.LoopPath(points=[[theta0, config.loop["phi"]]])
            else:
                path = berry.LoopPath.latitude_circle(theta0, config.loop["segments"])
            phase = berry.loop_phase(model, rule, path, config.sigma, config.pole_margin)
            phase_rows.append(
                [
                    _fmt(theta0),
                    config.sigma,
                    config.loop["segments"],
                    _fmt(phase.raw),
                    _fmt(phase.principal),
                    overlay,
                ]
            )
    stokes_row = None
    if config.annulus is not None:
        spec = config.annulus
        inner, outer, surface = berry.stokes_parts(
            model,
            rule,
            spec["theta1"],
            spec["theta2"],
            config.sigma,
            loop_segments=spec["segments"],
            surface_nodes=(spec["n_theta"], spec["n_phi"]),
            pole_margin=config.pole_margin,
        )
        residual = abs((outer - inner) - surface)
        stokes_row = [
            _fmt(spec["theta1"]),
            _fmt(spec["theta2"]),
            _fmt(inner),
            _fmt(outer),
            _fmt(surface),
            _fmt(residual),
        ]

    export = _Exporter(out_dir, "phase", config, threads)
    if phase_rows is not None:
        export.write_table(
            "phase.csv",
            ["theta0", "sigma", "segments", "raw", "principal", "isotropic_q"],
            phase_rows,
            kind="phase",
        )
    if stokes_row is not None:
        export.write_table(
            "stokes.csv",
            ["theta1", "theta2", "inner_raw", "outer_raw", "surface_integral", "residual"],
            [stokes_row],
        )
    export.finish()
    return 0


def cmd_pumpprobe(config, out_dir, threads):
    if config.second_field is None:
        raise ConfigError("pumpprobe command needs a 'second_field' section")
    _check_quadrature(config)
    model = _resolve_model(config)
    rule = _rule(config)
    spec = config.second_field

    point = polarization.OrientationPoint(spec["theta"], spec["phi"])
    cp = polarization.CircularPolarization(point, config.sigma)
    two_field = pumpprobe.TwoFieldConfiguration(
        circular=cp,
        linear=polarization.LinearPolarization(point, spec["alpha"]),
        spectral_factor=spec["spectral_factor"],
    )
    amplitude_model = pumpprobe.TwoPhotonAmplitudeModel(
        dipole=model,
        bound_dipole=spec["bound_dipole"],
        circular_first=spec["circular_first"],
    )
    a_e, a_eps = pumpprobe.split_connection(
        amplitude_model, rule, two_field, config.pole_margin
    )
    blocks = pumpprobe.curvature_blocks(
        amplitude_model, rule, two_field, config.pole_margin
    )

    export = _Exporter(out_dir, "pumpprobe", config, threads)
    export.write_table(
        "pumpprobe_connection.csv",
        ["field", "component", "value_re", "value_im"],
        [
            [name, comp, _fmt(vec[i].real), _fmt(vec[i].imag)]
            for name, vec in (("circular", a_e), ("linear", a_eps))
            for i, comp in enumerate(_COMPONENTS)
        ],
    )
    export.write_table(
        "pumpprobe_blocks.csv",
        ["block", "component", "value_re", "value_im"],
        [
            [name, comp, _fmt(vec[i].real), _fmt(vec[i].imag)]
            for name, vec in (
                ("circular", blocks.circular_block),
                ("linear", blocks.linear_block),
                ("cross_vector", blocks.cross_vector),
            )
            for i, comp in enumerate(_COMPONENTS)
        ],
    )
    export.write_table(
        "pumpprobe_cross_tensor.csv",
        ["row", "col", "value_re", "value_im"],
        [
            [i, j, _fmt(blocks.cross_tensor[i, j].real), _fmt(blocks.cross_tensor[i, j].imag)]
            for i in range(3)
            for j in range(3)
        ],
    )

    report = {}
    eps = two_field.linear.vector(config.pole_margin)
    coupling = abs(two_field.spectral_factor) ** 2 * abs(
        amplitude_model.bound_dipole @ eps
    ) ** 2
    if not spec["circular_first"] and coupling > 0.0:
        report["reduction_residual"] = pumpprobe.one_field_reduction_check(
            amplitude_model,
            rule,
            cp,
            alpha=spec["alpha"],
            spectral_factor=two_field.spectral_factor,
            pole_margin=config.pole_margin,
        )
    else:
        report["reduction_residual"] = None

    mirror = np.diag([1.0, -1.0, 1.0])
    mirrored = pumpprobe.TwoPhotonAmplitudeModel(
        dipole=molecule.transform_model(model, mirror),
        bound_dipole=spec["bound_dipole"],
        circular_first=spec["circular_first"],
    )
    mirrored_blocks = pumpprobe.curvature_blocks(
        mirrored, rule, two_field, config.pole_margin
    )
    expected = np.linalg.det(mirror) * (mirror @ blocks.circular_block)
    report["reflection_residual"] = float(
        np.max(np.abs(mirrored_blocks.circular_block - expected))
    )
    export.write_json("pumpprobe_report.json", report)
    export.finish()
    return 0


# ---------------------------------------------------------------------------
# verification battery


def _suite(name, residual, threshold, comparison="less"):
    if comparison == "less":
        passed = residual < threshold
    else:
        passed = residual > threshold
    return {
        "name": name,
        "residual": float(residual),
        "threshold": float(threshold),
        "comparison": comparison,
        "passed": bool(passed),
    }


def _verify_suites(config):
    rng = np.random.default_rng(config.seed)
    margin = config.pole_margin
    suites = []

    suites.append(
        _suite(
            "levi_civita_lemma",
            0.0 if algebra.symmetrized_levi_civita_identity_check() else 1.0,
            0.5,
        )
    )
    suites.append(
        _suite(
            "signed_epsilon_contraction",
            0.0 if algebra.signed_contraction_identity_check() else 1.0,
            0.5,
        )
    )
    suites.append(
        _suite(
            "antisymmetric_contraction",
            algebra.contraction_identity_residual(trials=100, seed=config.seed),
            1e-12,
        )
    )

    n_nodes = 200
    thetas = rng.uniform(margin + 1e-6, np.pi - margin - 1e-6, n_nodes)
    phis = rng.uniform(0.0, 2.0 * np.pi, n_nodes)
    r_hat, theta_hat, phi_hat = polarization.spherical_frame(thetas, phis, margin)
    frame_dev = max(
        float(np.max(np.abs(np.sum(theta_hat * phi_hat, axis=-1)))),
        float(np.max(np.abs(np.linalg.norm(theta_hat, axis=-1) - 1.0))),
        float(np.max(np.abs(np.linalg.norm(phi_hat, axis=-1) - 1.0))),
        float(np.max(np.abs(np.cross(theta_hat, phi_hat) - r_hat))),
    )
    suites.append(_suite("frame_orthonormality", frame_dev, 1e-12))

    h = 1e-5
    fd_dev = 0.0
    for sigma in (1, -1):
        de_dt, de_dp = polarization.circular_vector_derivatives(thetas, phis, sigma, margin)
        fd_t = (
            polarization.circular_vector(thetas + h, phis, sigma, margin)
            - polarization.circular_vector(thetas - h, phis, sigma, margin)
        ) / (2.0 * h)
        fd_p = (
            polarization.circular_vector(thetas, phis + h, sigma, margin)
            - polarization.circular_vector(thetas, phis - h, sigma, margin)
        ) / (2.0 * h)
        fd_dev = max(
            fd_dev,
            float(np.max(np.abs(de_dt - fd_t))),
            float(np.max(np.abs(de_dp - fd_p))),
        )
    suites.append(_suite("polarization_derivative_fd", fd_dev, 1e-8))

    proj_dev = 0.0
    for sigma in (1, -1):
        e = polarization.circular_vector(thetas, phis, sigma, margin)
        proj = polarization.projection_map(e)
        proj_dev = max(proj_dev, float(np.max(np.abs(proj - 0.5 * sigma * r_hat))))
    suites.append(_suite("projection_map", proj_dev, 1e-12))

    xi = polarization.xi_density(thetas, phis, 1, margin)
    xi_dev = float(
        np.max(np.abs(xi - 0.5 * np.cos(thetas)[:, None] * theta_hat))
    )
    suites.append(_suite("xi_analytic", xi_dev, 1e-10))

    models = [molecule.random_harmonic_model(config.seed + k, l_max=2) for k in range(20)]
    gram_dev = 0.0
    prop_dev = 0.0
    decomp_dev = 0.0
    grid_th = np.linspace(margin + 0.05, np.pi - margin - 0.05, 16)[:, None]
    grid_ph = np.linspace(0.0, 2.0 * np.pi, 16, endpoint=False)[None, :]
    for model in models:
        rule = molecule.default_rule(model)
        gram = molecule.gram_tensor(model, rule)
        exact = molecule.harmonic_gram_exact(model)
        gram_dev = max(
            gram_dev, float(np.max(np.abs(gram - exact)) / np.max(np.abs(exact)))
        )
        prop_dev = max(
            prop_dev,
            float(
                np.max(
                    np.abs(
                        molecule.propensity_vector(model, rule)
                        - molecule.propensity_from_gram(gram)
                    )
                )
            ),
        )
        curv = berry.curvature_from_gram(gram)
        d1 = berry.density_from_channels(curv, grid_th, grid_ph, config.sigma, margin)
        d2 = berry.density_from_wedge(curv, grid_th, grid_ph, config.sigma, margin)
        decomp_dev = max(decomp_dev, float(np.max(np.abs(d1 - d2))))
    suites.append(_suite("gram_oracle", gram_dev, 1e-10))
    suites.append(_suite("propensity_equivalence", prop_dev, 1e-12))
    suites.append(_suite("density_decomposition", decomp_dev, 1e-10))

    from scipy.spatial.transform import Rotation

    demo = molecule.chiral_demo_model()
    demo_rule = molecule.default_rule(demo)
    base = molecule.propensity_vector(demo, demo_rule)
    pseudo_dev = 0.0
    for _ in range(10):
        matrix = Rotation.random(random_state=rng).as_matrix()
        moved = molecule.propensity_vector(
            molecule.transform_model(demo, matrix), demo_rule
        )
        pseudo_dev = max(pseudo_dev, float(np.max(np.abs(moved - matrix @ base))))
    for axis in range(3):
        matrix = np.eye(3)
        matrix[axis, axis] = -1.0
        moved = molecule.propensity_vector(
            molecule.transform_model(demo, matrix), demo_rule
        )
        pseudo_dev = max(pseudo_dev, float(np.max(np.abs(moved + matrix @ base))))
    suites.append(_suite("propensity_pseudovector", pseudo_dev, 1e-8))

    iso = molecule.isotropic_model(q=1.0)
    iso_rule = molecule.default_rule(iso)
    iso_gram = molecule.gram_tensor(iso, iso_rule)
    a_theta, a_phi = berry.connection_pullback(
        iso_gram, thetas, phis, config.sigma, margin
    )
    iso_dev = max(
        float(np.max(np.abs(a_theta))),
        float(np.max(np.abs(a_phi - config.sigma * np.cos(thetas)))),
    )
    suites.append(_suite("isotropic_connection", iso_dev, 1e-8))

    theta0 = np.pi / 3
    phase = berry.loop_phase(
        iso, iso_rule, berry.LoopPath.latitude_circle(theta0, 256), config.sigma, margin
    )
    suites.append(
        _suite(
            "isotropic_loop_phase",
            abs(phase.raw - 2.0 * np.pi * config.sigma * np.cos(theta0)),
            1e-8,
        )
    )
    suites.append(
        _suite(
            "stokes_isotropic",
            berry.stokes_check(
                iso, iso_rule, np.pi / 4, np.pi / 2, config.sigma, pole_margin=margin
            ),
            1e-8,
        )
    )
    suites.append(
        _suite(
            "stokes_demo",
            berry.stokes_check(
                demo, demo_rule, np.pi / 4, np.pi / 2, config.sigma, pole_margin=margin
            ),
            1e-6,
        )
    )
    suites.append(
        _suite(
            "exterior_derivative",
            berry.exterior_derivative_check(
                demo, demo_rule, (1.2, 0.5), config.sigma, fd_step=1e-4, pole_margin=margin
            ),
            1e-6,
        )
    )

    point = (1.0, 0.4)
    holo_dev = 0.0
    for model in (iso, demo, molecule.uniform_circular_model(), models[0]):
        holo_dev = max(
            holo_dev,
            berry.holomorphy_check(
                model,
                point,
                config.sigma,
                anti_holomorphic=config.debug_anti_holomorphic,
                pole_margin=margin,
            ),
        )
    suites.append(_suite("holomorphy", holo_dev, 1e-8))
    suites.append(
        _suite(
            "holomorphy_detection",
            berry.holomorphy_check(
                demo, point, config.sigma, anti_holomorphic=True, pole_margin=margin
            ),
            1e-3,
            comparison="greater",
        )
    )

    pp_point = polarization.OrientationPoint(1.1, 0.9)
    cp = polarization.CircularPolarization(pp_point, config.sigma)
    bound = np.array([0.3 + 0.1j, -0.2j, 0.8])
    amp_model = pumpprobe.TwoPhotonAmplitudeModel(dipole=demo, bound_dipole=bound)
    suites.append(
        _suite(
            "pumpprobe_reduction",
            pumpprobe.one_field_reduction_check(
                amp_model, demo_rule, cp, alpha=0.3, pole_margin=margin
            ),
            1e-10,
        )
    )
    two_field = pumpprobe.TwoFieldConfiguration(
        circular=cp,
        linear=polarization.LinearPolarization(pp_point, 0.3),
    )
    zero_blocks = pumpprobe.curvature_blocks(
        pumpprobe.TwoPhotonAmplitudeModel(dipole=demo, bound_dipole=np.zeros(3)),
        demo_rule,
        two_field,
        margin,
    )
    suites.append(
        _suite(
            "pumpprobe_zero_bound",
            max(
                float(np.max(np.abs(zero_blocks.circular_block))),
                float(np.max(np.abs(zero_blocks.linear_block))),
                float(np.max(np.abs(zero_blocks.cross_tensor))),
            ),
            1e-12,
        )
    )
    real_blocks = pumpprobe.curvature_blocks(
        pumpprobe.TwoPhotonAmplitudeModel(
            dipole=demo, bound_dipole=np.array([0.4, -0.1, 0.9])
        ),
        demo_rule,
        two_field,
        margin,
    )
    suites.append(
        _suite(
            "pumpprobe_real_linear_block",
            float(np.max(np.abs(real_blocks.linear_block))),
            1e-12,
        )
    )

    model = _resolve_model(config)
    rule = _rule(config)
    gram = molecule.gram_tensor(model, rule)
    config_dev = float(
        np.max(
            np.abs(
                molecule.propensity_vector(model, rule)
                - molecule.propensity_from_gram(gram)
            )
        )
    )
    suites.append(_suite("config_model_consistency", config_dev, 1e-12))

    return suites


def cmd_verify(config, out_dir, threads):
    _check_quadrature(config)
    suites = _verify_suites(config)
    passed = all(s["passed"] for s in suites)
    export = _Exporter(out_dir, "verify", config, threads)
    export.write_json(
        "verify.json",
        {
            "passed": passed,
            "suites": suites,
        },
    )
    export.finish()
    for s in suites:
        status = "pass" if s["passed"] else "FAIL"
        print(f"{status}  {s['name']}: residual={s['residual']:.3e}")
    return 0 if passed else 1


COMMANDS = {
    "connection": cmd_connection,
    "curvature": cmd_curvature,
    "phase": cmd_phase,
    "pumpprobe": cmd_pumpprobe,
    "verify": cmd_verify,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="chiral-berry",
        description="Geometric quantities of light-driven chiral response "
        "over polarization orientations",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to the JSON run config")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
    return parser


def _resolve_threads(args):
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get(ENV_THREADS)
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError(f"{ENV_THREADS}: expected an integer, got {env!r}") from exc
    return 1


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        threads = _resolve_threads(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        config.seed = args.seed
    try:
        return COMMANDS[args.command](config, args.out, threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (PoleSingularity, NotOrthogonal, OpenPath, QuadratureUnderResolved) as exc:
        print(f"numeric precondition violated: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
