import numpy as np
import pytest

from fieldlab.detection import (
    DetectorSpec,
    DiscreteObservable,
    conditional_outcome_density,
    detect_discrete,
    detect_local,
    detect_power24_region,
    detect_quadratic_region,
    mean_position,
    detection_average,
    select_weight,
    trace_probability,
)
from fieldlab.ensembles import mixed_ensemble, pure_ensemble, quantum_state_of
from fieldlab.errors import DegenerateDomainError, DegenerateFieldError
from fieldlab.fields import ComplexField, box_state, power2, power24
from fieldlab.grid import Region, build_grid, full_region

from conftest import random_mixture, random_states


@pytest.fixture
def grid():
    return build_grid(0.0, 1.0, 128)


def test_detector_spec_validation_and_json(grid):
    with pytest.raises(ValueError):
        DetectorSpec("cubic")
    det = DetectorSpec("two_plus_four", Region(((0.0, 0.5),)))
    back = DetectorSpec.from_json(det.to_json())
    assert back == det
    assert DetectorSpec.from_json({"power_law": "quadratic"}).locality is None


def test_select_weight_matches_power_integrals(grid):
    rng = np.random.default_rng(0)
    phi = ComplexField(grid, rng.normal(size=grid.n) + 1j * rng.normal(size=grid.n))
    r = Region(((0.25, 0.75),))
    assert select_weight(phi, DetectorSpec("quadratic")) == pytest.approx(power2(phi))
    assert select_weight(phi, DetectorSpec("two_plus_four", r)) == pytest.approx(power24(phi, r))


def test_conditional_outcome_density_normalizes(grid):
    rng = np.random.default_rng(1)
    phi = ComplexField(grid, rng.normal(size=grid.n) + 1j * rng.normal(size=grid.n))
    for det in (DetectorSpec("quadratic"), DetectorSpec("two_plus_four")):
        total = grid.h * sum(conditional_outcome_density(phi, j, det) for j in range(grid.n))
        assert total == pytest.approx(1.0, abs=1e-12)


def test_conditional_outcome_density_zero_weight_raises(grid):
    phi = ComplexField(grid, np.zeros(grid.n, dtype=np.complex128))
    with pytest.raises(DegenerateFieldError):
        conditional_outcome_density(phi, 0, DetectorSpec("quadratic"))


def test_conditional_outcome_density_respects_locality(grid):
    phi = ComplexField(grid, np.ones(grid.n, dtype=np.complex128))
    det = DetectorSpec("quadratic", Region(((0.5, 1.0),)))
    inside = det.locality.indices(grid)
    assert conditional_outcome_density(phi, 0, det) == 0.0
    assert conditional_outcome_density(phi, int(inside[0]), det) > 0.0


def test_quadratic_detection_equals_trace_formula(grid):
    ens = random_mixture(grid, 3, 0.01, np.random.default_rng(2))
    rho = quantum_state_of(ens)
    r = Region(((0.1, 0.4), (0.6, 0.9)))
    assert detect_quadratic_region(ens, r) == pytest.approx(trace_probability(rho, r), abs=1e-12)


def test_quadratic_detection_is_additive(grid):
    ens = random_mixture(grid, 2, 0.01, np.random.default_rng(3))
    r = Region(((0.0, 0.37),))
    total = detect_quadratic_region(ens, r) + detect_quadratic_region(ens, r.complement(grid))
    assert total == pytest.approx(1.0, abs=1e-12)


def test_power24_detection_reduces_to_born_at_small_kappa(grid):
    psi = box_state(grid)
    r = Region(((0.0, 0.5),))
    born = detect_quadratic_region(pure_ensemble(psi, 1e-9), r)
    p = detect_power24_region(pure_ensemble(psi, 1e-9, "phase_only"), r)
    assert abs(p - born) < 1e-8


def test_power24_detection_sums_to_one(grid):
    ens = random_mixture(grid, 2, 0.1, np.random.default_rng(4), "phase_only")
    r = Region(((0.0, 0.42),))
    total = detect_power24_region(ens, r) + detect_power24_region(ens, r.complement(grid))
    assert total == pytest.approx(1.0, abs=1e-12)


def test_power24_closed_form_box_state(grid):
    # constant amplitude: quartic reweighting is uniform, so Born survives exactly
    psi = box_state(grid)
    r = Region(((0.0, 0.5),))
    born = detect_quadratic_region(pure_ensemble(psi, 0.2), r)
    p = detect_power24_region(pure_ensemble(psi, 0.2, "phase_only"), r)
    assert p == pytest.approx(born, abs=1e-14)


def test_detect_local_conditional_probability(grid):
    ens = random_mixture(grid, 2, 0.01, np.random.default_rng(5))
    domain = Region(((0.0, 0.5),))
    region = Region(((0.0, 0.25),))
    p = detect_local(ens, domain, region)
    expected = detect_quadratic_region(ens, region) / detect_quadratic_region(ens, domain)
    assert p == pytest.approx(expected, rel=1e-12)
    assert detect_local(ens, domain, domain) == pytest.approx(1.0, abs=1e-12)


def test_detect_local_region_outside_domain_raises(grid):
    ens = pure_ensemble(box_state(grid), 0.01)
    with pytest.raises(ValueError):
        detect_local(ens, Region(((0.0, 0.5),)), Region(((0.4, 0.7),)))


def test_detect_local_zero_power_domain_raises(grid):
    support = Region(((0.0, 0.5),))
    ens = pure_ensemble(box_state(grid, support), 0.01)
    dead = Region(((0.6, 0.9),))
    with pytest.raises(DegenerateDomainError):
        detect_local(ens, dead, dead)


def test_discrete_observable_validation(grid):
    e0, e1 = random_states(grid, 2, np.random.default_rng(6))
    with pytest.raises(ValueError):
        DiscreteObservable((1.0, 1.0), (e0, e1))
    with pytest.raises(ValueError):
        DiscreteObservable((1.0,), (e0, e1))
    with pytest.raises(ValueError):
        DiscreteObservable((1.0, 2.0), (e0, e0))


def test_detect_discrete_eigenstate_is_certain(grid):
    e = random_states(grid, 3, np.random.default_rng(7))
    obs = DiscreteObservable((0.0, 1.0, 2.0), tuple(e))
    ens = pure_ensemble(e[1], 0.01)
    probs = detect_discrete(ens, obs)
    assert probs[1.0] == pytest.approx(1.0, abs=1e-12)
    assert probs[0.0] == pytest.approx(0.0, abs=1e-12)


def test_detect_discrete_mixture_weights(grid):
    e = random_states(grid, 3, np.random.default_rng(8))
    obs = DiscreteObservable((-1.0, 0.0, 1.0), tuple(e))
    ens = mixed_ensemble([(0.2, e[0]), (0.3, e[1]), (0.5, e[2])], 0.01)
    probs = detect_discrete(ens, obs)
    assert probs[-1.0] == pytest.approx(0.2, abs=1e-12)
    assert probs[0.0] == pytest.approx(0.3, abs=1e-12)
    assert probs[1.0] == pytest.approx(0.5, abs=1e-12)


def test_detect_discrete_incomplete_basis_raises(grid):
    e = random_states(grid, 3, np.random.default_rng(9))
    obs = DiscreteObservable((0.0, 1.0), (e[0], e[1]))
    ens = pure_ensemble(e[2], 0.01)
    with pytest.raises(ValueError):
        detect_discrete(ens, obs)


def test_mean_position_matches_operator_trace(grid):
    ens = random_mixture(grid, 3, 0.01, np.random.default_rng(10))
    rho = quantum_state_of(ens)
    x_op = np.diag(grid.points)
    assert mean_position(ens) == pytest.approx(np.trace(rho.entries @ x_op).real, abs=1e-12)


def test_detection_average_of_constant_is_one(grid):
    ens = random_mixture(grid, 2, 0.1, np.random.default_rng(11), "phase_only")
    assert detection_average(ens, np.ones(grid.n)) == pytest.approx(1.0, abs=1e-12)


def test_detection_average_indicator_matches_region_probability(grid):
    ens = random_mixture(grid, 2, 0.1, np.random.default_rng(12), "gaussian")
    r = Region(((0.2, 0.7),))
    g = r.mask(grid).astype(float)
    assert detection_average(ens, g) == pytest.approx(detect_power24_region(ens, r), rel=1e-12)


def test_full_region_probability_is_one(grid):
    ens = random_mixture(grid, 2, 0.05, np.random.default_rng(13))
    assert detect_quadratic_region(ens, full_region(grid)) == pytest.approx(1.0, abs=1e-12)
    assert detect_power24_region(ens, full_region(grid)) == pytest.approx(1.0, abs=1e-12)
