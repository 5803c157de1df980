"""Random-field ensembles and their density-matrix image.

An ensemble is a finite orthonormal mixture of normalized states with a
dispersion kappa and a modulus model:

* ``gaussian``   -- phi = sum_i zeta_i psi_i with independent circularly
  symmetric complex Gaussian coefficients, E|zeta_i|^2 = kappa * p_i;
* ``phase_only`` -- one component is drawn with probability p_i, then
  phi = sqrt(kappa) * exp(i theta) psi_i with theta uniform, so the
  field modulus is deterministic.

Both laws have zero mean and covariance kappa * sum_i p_i psi_i (x) psi_i,
so they are indistinguishable to quadratic detectors; they differ in the
fourth moment, which is what the "2+4" detection regime probes.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .fields import ComplexField, WaveFunction
from .grid import Grid1D

MODULUS_MODELS = ("gaussian", "phase_only")

WEIGHT_TOL = 1e-10
ORTHO_TOL = 1e-10

#: Fourth-moment factor E|zeta|^4 / (E|zeta|^2)^2 of the coefficient law.
#: phase_only has deterministic modulus (factor 1); circularly symmetric
#: complex Gaussian gives 2.
M4_FACTOR = {"phase_only": 1.0, "gaussian": 2.0}


@dataclass(frozen=True)
class EnsembleSpec:
    components: tuple[tuple[float, WaveFunction], ...]
    kappa: float
    modulus_model: str

    def __post_init__(self):
        if self.modulus_model not in MODULUS_MODELS:
            raise ValueError(f"unknown modulus model {self.modulus_model!r}; expected one of {MODULUS_MODELS}")
        if self.kappa <= 0:
            raise ValueError(f"dispersion must be positive, got kappa={self.kappa}")
        if not self.components:
            raise ValueError("ensemble needs at least one component")
        weights = np.array([p for p, _ in self.components])
        if np.any(weights <= 0):
            raise ValueError("component weights must be positive")
        if abs(weights.sum() - 1.0) > WEIGHT_TOL:
            raise ValueError(f"component weights must sum to 1 within {WEIGHT_TOL}, got {weights.sum()}")
        grid = self.components[0][1].grid
        states = [psi for _, psi in self.components]
        for psi in states[1:]:
            if psi.grid != grid:
                raise ValueError("all component states must live on the same grid")
        m = len(states)
        if m > 1:
            mat = np.stack([psi.amp for psi in states])
            gram = grid.h * (mat @ mat.conj().T)
            if np.max(np.abs(gram - np.eye(m))) > ORTHO_TOL:
                raise ValueError(f"component states must be pairwise orthonormal within {ORTHO_TOL}")

    @property
    def grid(self) -> Grid1D:
        return self.components[0][1].grid

    @property
    def weights(self) -> np.ndarray:
        return np.array([p for p, _ in self.components])

    @property
    def states(self) -> tuple[WaveFunction, ...]:
        return tuple(psi for _, psi in self.components)

    def state_matrix(self) -> np.ndarray:
        """Component amplitudes stacked as an (m, n) array."""
        return np.stack([psi.amp for psi in self.states])


def pure_ensemble(psi: WaveFunction, kappa: float, modulus_model: str = "gaussian") -> EnsembleSpec:
    return EnsembleSpec(((1.0, psi),), float(kappa), modulus_model)


def mixed_ensemble(components, kappa: float, modulus_model: str = "gaussian") -> EnsembleSpec:
    return EnsembleSpec(tuple((float(p), psi) for p, psi in components), float(kappa), modulus_model)


def normalize_ensemble(ens: EnsembleSpec) -> EnsembleSpec:
    """The unit-dispersion ensemble obtained by the field scaling phi -> phi/sqrt(kappa)."""
    if ens.kappa == 1.0:
        return ens
    return replace(ens, kappa=1.0)


@dataclass(frozen=True)
class DensityMatrix:
    """Discrete kernel of rho = C_mu / kappa, stored with the h factor absorbed.

    ``entries[j, k] = h * sum_i p_i psi_i(x_j) conj(psi_i(x_k))``, so the
    plain matrix trace is the discrete integral of the diagonal kernel
    (equal to 1) and plain matrix products compose operators.
    """

    grid: Grid1D
    entries: np.ndarray

    def __post_init__(self):
        entries = np.ascontiguousarray(self.entries, dtype=np.complex128)
        n = self.grid.n
        if entries.shape != (n, n):
            raise ValueError(f"density matrix has shape {entries.shape}, expected ({n}, {n})")
        if np.max(np.abs(entries - entries.conj().T)) > 1e-12:
            raise ValueError("density matrix is not Hermitian within 1e-12")
        eigs = np.linalg.eigvalsh(entries)
        if eigs.min() < -1e-10:
            raise ValueError(f"density matrix is not positive semidefinite: min eigenvalue {eigs.min()}")
        tr = np.trace(entries).real
        if abs(tr - 1.0) > 1e-10:
            raise ValueError(f"density matrix trace must be 1 within 1e-10, got {tr}")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def diagonal_density(self) -> np.ndarray:
        """Pointwise probability density rho(x_j, x_j) (trace convention divided out)."""
        return np.diag(self.entries).real / self.grid.h

    @classmethod
    def _from_valid(cls, grid: Grid1D, entries: np.ndarray) -> "DensityMatrix":
        """Construct without re-validating; for factories whose output is valid by construction."""
        entries = np.ascontiguousarray(entries, dtype=np.complex128)
        entries.setflags(write=False)
        obj = object.__new__(cls)
        object.__setattr__(obj, "grid", grid)
        object.__setattr__(obj, "entries", entries)
        return obj


def quantum_state_of(ens: EnsembleSpec) -> DensityMatrix:
    """Map an ensemble to its quantum state rho = C_mu / kappa = sum_i p_i psi_i (x) psi_i.

    The Gram form with validated weights and orthonormal states is
    Hermitian, positive semidefinite, and unit-trace by construction, so
    the eigen-decomposition check of the general constructor is skipped
    (it dominates the cost on large grids).
    """
    mat = ens.state_matrix()
    kernel = (mat.T * ens.weights) @ mat.conj()
    entries = ens.grid.h * kernel
    # make Hermiticity exact rather than within matmul rounding
    entries = 0.5 * (entries + entries.conj().T)
    return DensityMatrix._from_valid(ens.grid, entries)


def quartic_density(ens: EnsembleSpec) -> np.ndarray:
    """Pointwise fourth moment E_nu |phi(x_j)|^4 of the unit-dispersion ensemble.

    phase_only: sum_i p_i |psi_i(x)|^4.  gaussian: phi(x) is circularly
    symmetric complex Gaussian with variance v(x) = sum_i p_i |psi_i(x)|^2,
    so the fourth moment is 2 v(x)^2.
    """
    mat2 = np.abs(ens.state_matrix()) ** 2
    if ens.modulus_model == "phase_only":
        return ens.weights @ (mat2 * mat2)
    v = ens.weights @ mat2
    return 2.0 * v * v


def field_stream(seed: int, stream_id: int = 0) -> np.random.Generator:
    """Counter-based (Philox) random stream; (seed, stream_id) fully determines the draws."""
    return np.random.Generator(np.random.Philox(key=seed).jumped(stream_id))


def sample_coefficients(ens: EnsembleSpec, n_samples: int, rng: np.random.Generator) -> np.ndarray:
    """Component coefficients of ``n_samples`` draws as an (n_samples, m) array.

    The sampled field is ``coeffs @ state_matrix()``; keeping the draw in
    coefficient form lets hot paths avoid materializing the fields.  The
    draw order per sample is fixed, so a given stream position always
    yields the same field.
    """
    m = len(ens.components)
    if ens.modulus_model == "gaussian":
        scale = np.sqrt(ens.kappa * ens.weights / 2.0)
        z = rng.standard_normal((n_samples, m)) + 1j * rng.standard_normal((n_samples, m))
        return z * scale
    # phase_only: component pick, then a uniform global phase
    comp = rng.choice(m, size=n_samples, p=ens.weights) if m > 1 else np.zeros(n_samples, dtype=np.intp)
    theta = rng.uniform(0.0, 2.0 * np.pi, size=n_samples)
    z = np.zeros((n_samples, m), dtype=np.complex128)
    z[np.arange(n_samples), comp] = np.sqrt(ens.kappa) * np.exp(1j * theta)
    return z


def sample_fields(ens: EnsembleSpec, n_samples: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n_samples`` field realizations as an (n_samples, n) complex array."""
    mat = ens.state_matrix()
    z = sample_coefficients(ens, n_samples, rng)
    if mat.shape[0] == 1:
        # broadcasting beats a (n_samples, 1) @ (1, n) matmul
        return z[:, 0, None] * mat[0]
    return z @ mat


def sample_field(ens: EnsembleSpec, rng: np.random.Generator) -> ComplexField:
    """Draw a single field realization from the ensemble."""
    amp = sample_fields(ens, 1, rng)[0]
    return ComplexField(ens.grid, amp)


def ensemble_to_json(ens: EnsembleSpec) -> dict:
    states = {}
    components = []
    for i, (p, psi) in enumerate(ens.components):
        ref = f"psi{i}"
        states[ref] = psi.field.to_json()
        components.append({"weight": p, "state_ref": ref})
    return {
        "kappa": ens.kappa,
        "modulus_model": ens.modulus_model,
        "components": components,
        "states": states,
    }


def ensemble_from_json(obj: dict) -> EnsembleSpec:
    states = {ref: WaveFunction(ComplexField.from_json(fj)) for ref, fj in obj["states"].items()}
    components = tuple((float(c["weight"]), states[c["state_ref"]]) for c in obj["components"])
    return EnsembleSpec(components, float(obj["kappa"]), obj["modulus_model"])
