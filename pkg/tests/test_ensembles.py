import numpy as np
import pytest

from fieldlab.ensembles import (
    DensityMatrix,
    EnsembleSpec,
    ensemble_from_json,
    ensemble_to_json,
    field_stream,
    mixed_ensemble,
    normalize_ensemble,
    pure_ensemble,
    quantum_state_of,
    quartic_density,
    sample_coefficients,
    sample_field,
    sample_fields,
)
from fieldlab.fields import box_state, power2
from fieldlab.grid import build_grid

from conftest import random_mixture, random_states


@pytest.fixture
def grid():
    return build_grid(-1.0, 1.0, 64)


def test_pure_ensemble_basic(grid):
    ens = pure_ensemble(box_state(grid), 0.01)
    assert ens.weights.tolist() == [1.0]
    assert ens.kappa == 0.01
    assert ens.state_matrix().shape == (1, grid.n)


def test_ensemble_rejects_bad_weights(grid):
    psi0, psi1 = random_states(grid, 2, np.random.default_rng(0))
    with pytest.raises(ValueError):
        mixed_ensemble([(0.7, psi0), (0.7, psi1)], 0.01)
    with pytest.raises(ValueError):
        mixed_ensemble([(1.5, psi0), (-0.5, psi1)], 0.01)


def test_ensemble_rejects_nonorthogonal_states(grid):
    psi = box_state(grid)
    with pytest.raises(ValueError):
        mixed_ensemble([(0.5, psi), (0.5, psi)], 0.01)


def test_ensemble_rejects_bad_kappa_and_model(grid):
    psi = box_state(grid)
    with pytest.raises(ValueError):
        pure_ensemble(psi, 0.0)
    with pytest.raises(ValueError):
        pure_ensemble(psi, 0.01, "lognormal")


def test_normalize_ensemble_sets_unit_dispersion(grid):
    ens = pure_ensemble(box_state(grid), 0.03)
    assert normalize_ensemble(ens).kappa == 1.0
    assert normalize_ensemble(ens).components == ens.components


def test_density_matrix_has_unit_trace_and_psd(grid):
    ens = random_mixture(grid, 3, 0.01, np.random.default_rng(1))
    rho = quantum_state_of(ens)
    assert np.trace(rho.entries).real == pytest.approx(1.0, abs=1e-12)
    assert np.linalg.eigvalsh(rho.entries).min() >= -1e-12
    # eigenvalues of the h-absorbed kernel are exactly the mixture weights
    eigs = np.sort(np.linalg.eigvalsh(rho.entries))[-3:]
    assert np.allclose(eigs, np.sort(ens.weights), atol=1e-12)


def test_density_matrix_validation():
    grid = build_grid(0.0, 1.0, 4)
    with pytest.raises(ValueError):
        DensityMatrix(grid, np.eye(3))
    m = np.eye(4) / 4.0
    m[0, 1] = 0.5  # breaks Hermiticity
    with pytest.raises(ValueError):
        DensityMatrix(grid, m)
    with pytest.raises(ValueError):
        DensityMatrix(grid, np.eye(4))  # trace 4


def test_diagonal_density_integrates_to_one(grid):
    ens = random_mixture(grid, 2, 0.01, np.random.default_rng(2))
    rho = quantum_state_of(ens)
    assert grid.h * rho.diagonal_density.sum() == pytest.approx(1.0, abs=1e-12)


def test_quartic_density_phase_only_vs_gaussian(grid):
    ens_p = random_mixture(grid, 2, 0.01, np.random.default_rng(3), "phase_only")
    ens_g = EnsembleSpec(ens_p.components, ens_p.kappa, "gaussian")
    mat2 = np.abs(ens_p.state_matrix()) ** 2
    assert np.allclose(quartic_density(ens_p), ens_p.weights @ (mat2 * mat2))
    v = ens_g.weights @ mat2
    assert np.allclose(quartic_density(ens_g), 2.0 * v * v)


def test_gaussian_pure_quartic_density_is_twice_squared(grid):
    psi = box_state(grid)
    ens = pure_ensemble(psi, 0.01, "gaussian")
    assert np.allclose(quartic_density(ens), 2.0 * np.abs(psi.amp) ** 4)


def test_field_stream_deterministic_and_stream_separated():
    a = field_stream(42, 0).standard_normal(8)
    b = field_stream(42, 0).standard_normal(8)
    c = field_stream(42, 1).standard_normal(8)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


@pytest.mark.parametrize("model", ["gaussian", "phase_only"])
def test_sample_fields_mean_power_matches_kappa(grid, model):
    kappa = 0.04
    ens = random_mixture(grid, 3, kappa, np.random.default_rng(4), model)
    amp = sample_fields(ens, 20000, field_stream(7))
    p2 = grid.h * np.sum(np.abs(amp) ** 2, axis=1)
    stderr = p2.std(ddof=1) / np.sqrt(p2.size)
    assert abs(p2.mean() - kappa) < 5 * stderr + 1e-12


def test_phase_only_samples_have_fixed_modulus(grid):
    ens = pure_ensemble(box_state(grid), 0.09, "phase_only")
    amp = sample_fields(ens, 100, field_stream(8))
    p2 = grid.h * np.sum(np.abs(amp) ** 2, axis=1)
    assert np.allclose(p2, 0.09, atol=1e-12)


@pytest.mark.parametrize("model", ["gaussian", "phase_only"])
def test_sample_coefficients_reproduce_fields(grid, model):
    ens = random_mixture(grid, 3, 0.02, np.random.default_rng(30), model)
    z = sample_coefficients(ens, 50, field_stream(31))
    amp = sample_fields(ens, 50, field_stream(31))
    assert z.shape == (50, 3)
    assert np.allclose(z @ ens.state_matrix(), amp, rtol=1e-12, atol=1e-15)


def test_sample_field_single_draw_matches_batch(grid):
    ens = random_mixture(grid, 2, 0.01, np.random.default_rng(5))
    phi = sample_field(ens, field_stream(9))
    batch = sample_fields(ens, 1, field_stream(9))
    assert np.array_equal(phi.amp, batch[0])
    assert power2(phi) > 0.0


def test_gaussian_covariance_matches_density_matrix(grid):
    ens = random_mixture(grid, 2, 1.0, np.random.default_rng(6), "gaussian")
    amp = sample_fields(ens, 40000, field_stream(10))
    cov = grid.h * (amp.T @ amp.conj()) / amp.shape[0]
    rho = quantum_state_of(ens).entries
    assert np.max(np.abs(cov - rho)) < 0.02


def test_ensemble_json_round_trip(grid):
    ens = random_mixture(grid, 2, 0.02, np.random.default_rng(11), "phase_only")
    back = ensemble_from_json(ensemble_to_json(ens))
    assert back.kappa == ens.kappa
    assert back.modulus_model == ens.modulus_model
    assert np.array_equal(back.state_matrix(), ens.state_matrix())
    assert np.array_equal(back.weights, ens.weights)
