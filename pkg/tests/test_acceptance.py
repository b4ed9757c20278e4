"""Acceptance battery: one test per release criterion, each printing a
pass/fail line (run with -s to see them live)."""

import json
from contextlib import contextmanager

import numpy as np
from scipy.spatial.transform import Rotation

from chiral_berry import algebra, berry, cli, molecule as mol, polarization as pol
from chiral_berry import pumpprobe as pp

MARGIN = pol.DEFAULT_POLE_MARGIN


@contextmanager
def criterion(name):
    try:
        yield
    except AssertionError:
        print(f"FAIL  {name}")
        raise
    print(f"PASS  {name}")


def random_nodes(n, seed):
    rng = np.random.default_rng(seed)
    theta = rng.uniform(MARGIN + 1e-6, np.pi - MARGIN - 1e-6, n)
    phi = rng.uniform(0.0, 2.0 * np.pi, n)
    return theta, phi


def test_levi_civita_identities():
    with criterion("levi-civita lemma + signed contraction"):
        assert algebra.symmetrized_levi_civita_identity_check()
        assert algebra.contraction_identity_residual(trials=100, seed=0) < 1e-12


def test_polarization_geometry():
    with criterion("polarization geometry analytics"):
        theta, phi = random_nodes(1000, seed=10)
        r_hat, t_hat, _ = pol.spherical_frame(theta, phi)
        for sigma in (1, -1):
            de_dt, de_dp = pol.circular_vector_derivatives(theta, phi, sigma)
            assert np.max(np.abs(de_dt + r_hat / np.sqrt(2.0))) < 1e-10
            xi = pol.xi_density(theta, phi, sigma)
            assert np.max(np.abs(xi - 0.5 * np.cos(theta)[:, None] * t_hat)) < 1e-10
            h = 1e-5
            fd_t = (
                pol.circular_vector(theta + h, phi, sigma)
                - pol.circular_vector(theta - h, phi, sigma)
            ) / (2 * h)
            fd_p = (
                pol.circular_vector(theta, phi + h, sigma)
                - pol.circular_vector(theta, phi - h, sigma)
            ) / (2 * h)
            assert np.max(np.abs(de_dt - fd_t)) < 1e-8
            assert np.max(np.abs(de_dp - fd_p)) < 1e-8
            e = pol.circular_vector(theta, phi, sigma)
            assert np.max(np.abs(pol.projection_map(e) - 0.5 * sigma * r_hat)) < 1e-12


def test_gram_oracle():
    with criterion("gram tensor vs coefficient-contraction oracle"):
        for seed in range(20):
            model = mol.random_harmonic_model(seed, l_max=seed % 5)
            quad = mol.gram_tensor(model, mol.default_rule(model))
            exact = mol.harmonic_gram_exact(model)
            assert np.max(np.abs(quad - exact)) < 1e-10 * np.max(np.abs(exact))


def test_propensity_equivalence():
    with criterion("propensity / antisymmetric-channel equivalence"):
        for seed in range(20):
            model = mol.random_harmonic_model(seed, l_max=2, e_tilde=1.2 - 0.3j)
            rule = mol.default_rule(model)
            direct = mol.propensity_vector(model, rule)
            via_gram = mol.propensity_from_gram(mol.gram_tensor(model, rule))
            assert np.max(np.abs(direct - via_gram)) < 1e-12
        demo = mol.chiral_demo_model()
        value = mol.propensity_vector(demo, mol.default_rule(demo))
        assert np.max(np.abs(value - np.array([0.0, 0.0, -2.0]))) < 1e-12


def test_isotropic_model_analytics():
    with criterion("isotropic-model connection/curvature/phase analytics"):
        model = mol.isotropic_model(q=1.0)
        rule = mol.default_rule(model)
        gram = mol.gram_tensor(model, rule)
        theta, phi = random_nodes(300, seed=11)
        curv = berry.curvature_from_gram(gram)
        for sigma in (1, -1):
            a_theta, a_phi = berry.connection_pullback(gram, theta, phi, sigma)
            assert np.max(np.abs(a_theta)) < 1e-8
            assert np.max(np.abs(a_phi - sigma * np.cos(theta))) < 1e-8
            density = berry.density_from_channels(curv, theta, phi, sigma)
            assert np.max(np.abs(density - (-sigma * np.sin(theta)))) < 1e-8
            theta0 = np.pi / 3
            phase = berry.loop_phase(
                model, rule, berry.LoopPath.latitude_circle(theta0, 256), sigma
            )
            assert abs(phase.raw - 2.0 * np.pi * sigma * np.cos(theta0)) < 1e-8
            assert berry.stokes_check(model, rule, np.pi / 4, np.pi / 2, sigma) < 1e-8


def test_general_stokes_and_exterior_derivative():
    with criterion("demo-model Stokes + exterior-derivative consistency"):
        model = mol.chiral_demo_model()
        rule = mol.default_rule(model)
        assert (
            berry.exterior_derivative_check(model, rule, (1.2, 0.5), 1, fd_step=1e-4)
            < 1e-6
        )
        coarse = berry.exterior_derivative_check(model, rule, (1.2, 0.5), 1, fd_step=2e-3)
        fine = berry.exterior_derivative_check(model, rule, (1.2, 0.5), 1, fd_step=1e-3)
        assert 3.0 < coarse / fine < 5.0
        assert (
            berry.stokes_check(
                model, rule, np.pi / 4, np.pi / 2, 1, surface_nodes=(256, 256)
            )
            < 1e-6
        )


def test_decomposition_completeness():
    with criterion("xi/zeta/chi decomposition completeness"):
        theta, phi = random_nodes(200, seed=12)
        for seed in range(20):
            model = mol.random_harmonic_model(seed, l_max=2)
            curv = berry.curvature_tensor(model, mol.default_rule(model))
            for sigma in (1, -1):
                assembled = berry.density_from_channels(curv, theta, phi, sigma)
                direct = berry.density_from_wedge(curv, theta, phi, sigma)
                assert np.max(np.abs(assembled - direct)) < 1e-10


def test_pseudovector_law():
    with criterion("propensity pseudovector transformation law"):
        model = mol.chiral_demo_model()
        rule = mol.default_rule(model)
        base = mol.propensity_vector(model, rule)
        rng = np.random.default_rng(13)
        for _ in range(10):
            matrix = Rotation.random(random_state=rng).as_matrix()
            moved = mol.propensity_vector(mol.transform_model(model, matrix), rule)
            assert np.max(np.abs(moved - matrix @ base)) < 1e-8
        for axis in range(3):
            matrix = np.eye(3)
            matrix[axis, axis] = -1.0
            moved = mol.propensity_vector(mol.transform_model(model, matrix), rule)
            assert np.max(np.abs(moved - (-(matrix @ base)))) < 1e-8


def test_holomorphy():
    with criterion("holomorphy residual + anti-holomorphic detection"):
        point = (1.0, 0.4)
        shipped = (
            mol.isotropic_model(),
            mol.uniform_circular_model(),
            mol.chiral_demo_model(),
            mol.zero_model(),
        )
        for model in shipped:
            assert berry.holomorphy_check(model, point, fd_step=1e-6) < 1e-8
        assert (
            berry.holomorphy_check(mol.chiral_demo_model(), point, anti_holomorphic=True)
            > 1e-3
        )


def test_pump_probe_blocks():
    with criterion("pump-probe block reduction and vanishing cases"):
        model = mol.chiral_demo_model()
        rule = mol.default_rule(model)
        point = pol.OrientationPoint(1.1, 0.9)
        cp = pol.CircularPolarization(point, 1)
        bound = np.array([0.3 + 0.1j, -0.2j, 0.8])
        amp = pp.TwoPhotonAmplitudeModel(dipole=model, bound_dipole=bound)
        assert pp.one_field_reduction_check(amp, rule, cp, alpha=0.3) < 1e-10
        config = pp.TwoFieldConfiguration(
            circular=cp, linear=pol.LinearPolarization(point, 0.3)
        )
        zero = pp.curvature_blocks(
            pp.TwoPhotonAmplitudeModel(dipole=model, bound_dipole=np.zeros(3)),
            rule,
            config,
        )
        assert np.max(np.abs(zero.circular_block)) == 0.0
        assert np.max(np.abs(zero.linear_block)) == 0.0
        assert np.max(np.abs(zero.cross_tensor)) == 0.0
        real_d = pp.curvature_blocks(
            pp.TwoPhotonAmplitudeModel(
                dipole=model, bound_dipole=np.array([0.4, -0.1, 0.9])
            ),
            rule,
            config,
        )
        assert np.max(np.abs(real_d.linear_block)) < 1e-12


def test_cli_determinism(tmp_path):
    with criterion("CLI byte-identical reruns"):
        payload = {
            "model": {"type": "chiral_demo"},
            "grid": {"n_theta": 12, "n_phi": 12},
            "loop": {"theta0": np.pi / 3, "segments": 256},
            "seed": 7,
        }
        config = tmp_path / "config.json"
        config.write_text(json.dumps(payload), encoding="utf-8")
        for command in ("curvature", "phase"):
            out1 = tmp_path / f"{command}_a"
            out2 = tmp_path / f"{command}_b"
            assert cli.main([command, "--config", str(config), "--out", str(out1)]) == 0
            assert cli.main([command, "--config", str(config), "--out", str(out2)]) == 0
            paths = sorted(out1.glob("*.csv"))
            assert paths
            for path in paths:
                assert path.read_bytes() == (out2 / path.name).read_bytes()
            m1 = json.loads((out1 / "manifest.json").read_text())
            m2 = json.loads((out2 / "manifest.json").read_text())
            assert {e["name"]: e["sha256"] for e in m1["files"]} == {
                e["name"]: e["sha256"] for e in m2["files"]
            }
