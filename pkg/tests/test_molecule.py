import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from chiral_berry import molecule as mol
from chiral_berry.errors import NotOrthogonal, QuadratureUnderResolved

Y00 = 1.0 / np.sqrt(4.0 * np.pi)


def test_evaluate_single_coefficient():
    model = mol.HarmonicDipoleModel.from_entries([("z", 0, 0, 1.0)])
    theta = np.array([0.3, 1.2, 2.8])
    phi = np.array([0.0, 2.0, 4.0])
    d = model.evaluate(theta, phi)
    assert np.allclose(d[..., 2], Y00)
    assert np.allclose(d[..., :2], 0.0)


def test_evaluate_zero_model():
    d = mol.zero_model().evaluate(1.0, 2.0)
    assert np.allclose(d, 0.0)


def test_evaluate_y10_component():
    model = mol.HarmonicDipoleModel.from_entries([("x", 1, 0, 1.0)])
    theta = np.linspace(0.1, 3.0, 11)
    d = model.evaluate(theta, np.zeros_like(theta))
    expected = np.sqrt(3.0 / (4.0 * np.pi)) * np.cos(theta)
    assert np.allclose(d[..., 0], expected)


def test_evaluate_unit_matches_angles():
    model = mol.random_harmonic_model(3, l_max=3)
    theta, phi = 1.1, 2.4
    khat = mol.unit_vector(theta, phi)
    assert np.allclose(model.evaluate_unit(khat), model.evaluate(theta, phi))
    assert np.allclose(mol.evaluate_dipole(model, khat), model.evaluate(theta, phi))


def test_from_entries_validation():
    with pytest.raises(ValueError):
        mol.HarmonicDipoleModel.from_entries([("x", 1, 2, 1.0)])
    with pytest.raises(ValueError):
        mol.HarmonicDipoleModel(np.zeros((3, 2, 2), dtype=complex))


def test_quadrature_weights_sum_to_sphere():
    for degree in (0, 1, 4, 9, 16):
        rule = mol.QuadratureRule.gauss_product(degree)
        assert abs(np.sum(rule.weights) - 4.0 * np.pi) < 1e-12 * 4.0 * np.pi


def test_quadrature_integrates_harmonic_products_exactly():
    from scipy.special import sph_harm_y

    degree = 6
    rule = mol.QuadratureRule.gauss_product(degree)
    for l1, m1, l2, m2 in [(0, 0, 0, 0), (1, 1, 1, 1), (2, -1, 2, -1), (3, 2, 1, 0), (2, 2, 3, -1)]:
        if l1 + l2 > degree:
            continue
        y1 = sph_harm_y(l1, m1, rule.theta, rule.phi)
        y2 = sph_harm_y(l2, m2, rule.theta, rule.phi)
        value = np.sum(rule.weights * np.conj(y1) * y2)
        expected = 1.0 if (l1, m1) == (l2, m2) else 0.0
        assert abs(value - expected) < 1e-13


def test_gram_matches_coefficient_oracle():
    for seed in range(20):
        model = mol.random_harmonic_model(seed, l_max=seed % 5)
        rule = mol.default_rule(model)
        quad = mol.gram_tensor(model, rule)
        exact = mol.harmonic_gram_exact(model)
        scale = np.max(np.abs(exact))
        assert np.max(np.abs(quad - exact)) < 1e-10 * scale


def test_gram_uniform_circular_example():
    model = mol.uniform_circular_model()
    gram = mol.gram_tensor(model, mol.default_rule(model))
    expected = np.array([[1.0, 1.0j, 0.0], [-1.0j, 1.0, 0.0], [0.0, 0.0, 0.0]])
    assert np.max(np.abs(gram - expected)) < 1e-13


def test_gram_zero_model():
    model = mol.zero_model()
    assert np.allclose(mol.gram_tensor(model, mol.default_rule(model)), 0.0)


def test_gram_hermitian_psd():
    for seed in range(8):
        model = mol.random_harmonic_model(seed, l_max=2, e_tilde=0.5 + 0.25j)
        gram = mol.gram_tensor(model, mol.default_rule(model))
        assert np.max(np.abs(gram - gram.conj().T)) < 1e-12
        eigenvalues = np.linalg.eigvalsh(gram)
        assert eigenvalues.min() > -1e-10


def test_gram_exactness_plateau():
    model = mol.random_harmonic_model(11, l_max=3)
    rule = mol.default_rule(model)
    doubled = mol.QuadratureRule.gauss_product(2 * rule.degree)
    assert np.max(np.abs(mol.gram_tensor(model, rule) - mol.gram_tensor(model, doubled))) < 1e-12


def test_gram_warns_when_underresolved():
    model = mol.random_harmonic_model(0, l_max=2)
    rule = mol.QuadratureRule.gauss_product(3)  # bound is 2*2 + 1 = 5
    with pytest.warns(QuadratureUnderResolved):
        mol.gram_tensor(model, rule)


def test_propensity_uniform_circular():
    model = mol.uniform_circular_model()
    rule = mol.default_rule(model)
    assert np.max(np.abs(mol.propensity_vector(model, rule) - np.array([0, 0, -2.0]))) < 1e-13


def test_propensity_real_dipole_vanishes():
    # m = 0 harmonics with real coefficients give a real D(k), so D* x D = 0
    model = mol.HarmonicDipoleModel.from_entries(
        [("x", 1, 0, 0.5), ("y", 0, 0, 0.3), ("z", 2, 0, 0.8)]
    )
    rule = mol.default_rule(model)
    assert np.max(np.abs(mol.propensity_vector(model, rule))) < 1e-14


def test_propensity_two_paths_agree():
    for seed in range(10):
        model = mol.random_harmonic_model(seed, l_max=3, e_tilde=1.3 - 0.4j)
        rule = mol.default_rule(model)
        direct = mol.propensity_vector(model, rule)
        via_gram = mol.propensity_from_gram(mol.gram_tensor(model, rule))
        assert np.max(np.abs(direct - via_gram)) < 1e-12
        assert np.max(np.abs(np.imag(direct))) < 1e-12


def test_transform_identity():
    model = mol.chiral_demo_model()
    rule = mol.default_rule(model)
    moved = mol.transform_model(model, np.eye(3))
    assert np.max(np.abs(mol.propensity_vector(moved, rule) - mol.propensity_vector(model, rule))) < 1e-13


def test_transform_rotation_covariance():
    model = mol.chiral_demo_model()
    rule = mol.default_rule(model)
    base = mol.propensity_vector(model, rule)
    quarter_turn = Rotation.from_euler("z", np.pi / 2).as_matrix()
    moved = mol.propensity_vector(mol.transform_model(model, quarter_turn), rule)
    assert np.max(np.abs(moved - quarter_turn @ base)) < 1e-12
    rng = np.random.default_rng(17)
    for _ in range(5):
        matrix = Rotation.random(random_state=rng).as_matrix()
        moved = mol.propensity_vector(mol.transform_model(model, matrix), rule)
        assert np.max(np.abs(moved - matrix @ base)) < 1e-12


def test_transform_reflection_pseudovector_sign():
    model = mol.chiral_demo_model()
    rule = mol.default_rule(model)
    base = mol.propensity_vector(model, rule)
    mirror = np.diag([1.0, -1.0, 1.0])
    moved = mol.propensity_vector(mol.transform_model(model, mirror), rule)
    assert np.max(np.abs(moved - (-(mirror @ base)))) < 1e-12


def test_transform_rejects_non_orthogonal():
    with pytest.raises(NotOrthogonal):
        mol.transform_model(mol.chiral_demo_model(), np.diag([1.0, 2.0, 1.0]))
    with pytest.raises(NotOrthogonal):
        mol.transform_model(mol.chiral_demo_model(), np.zeros((2, 2)))


def test_sampled_model_closure():
    model = mol.SampledDipoleModel(
        evaluator=lambda khat: np.stack(
            [khat[..., 2] + 0j, np.zeros(khat.shape[:-1]), khat[..., 0] * 1j], axis=-1
        ),
        e_tilde=2.0,
    )
    d = model.evaluate(np.pi / 2, 0.0)
    assert np.allclose(d, [0.0, 0.0, 1.0j], atol=1e-15)


def test_isotropic_model_gram():
    model = mol.isotropic_model(q=0.7)
    gram = mol.gram_tensor(model, mol.default_rule(model))
    assert np.max(np.abs(gram - 0.7 * np.eye(3))) < 1e-13


def test_chiral_demo_propensity():
    model = mol.chiral_demo_model()
    rule = mol.default_rule(model)
    assert np.max(np.abs(mol.propensity_vector(model, rule) - np.array([0, 0, -2.0]))) < 1e-13
