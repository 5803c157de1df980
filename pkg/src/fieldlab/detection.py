"""Two-step detection pipeline and its closed-form evaluation.

Detection is select-then-measure: a field is selected from the ensemble
with probability proportional to its (quadratic or "2+4") power, then an
outcome is drawn with pointwise power-proportional probability.  For the
ensemble laws supported here both steps integrate in closed form, so the
functions below are deterministic quadrature; the montecarlo module
re-derives the same numbers by simulation.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ensembles import DensityMatrix, EnsembleSpec, quartic_density
from .errors import DegenerateDomainError, DegenerateFieldError
from .fields import ComplexField, WaveFunction, inner, power2, power24
from .grid import Region

POWER_LAWS = ("quadratic", "two_plus_four")


@dataclass(frozen=True)
class DetectorSpec:
    power_law: str = "quadratic"
    locality: Region | None = None

    def __post_init__(self):
        if self.power_law not in POWER_LAWS:
            raise ValueError(f"unknown power law {self.power_law!r}; expected one of {POWER_LAWS}")

    def to_json(self) -> dict:
        obj = {"power_law": self.power_law}
        if self.locality is not None:
            obj["locality"] = self.locality.to_json()
        return obj

    @classmethod
    def from_json(cls, obj: dict) -> "DetectorSpec":
        locality = Region.from_json(obj["locality"]) if "locality" in obj and obj["locality"] else None
        return cls(obj.get("power_law", "quadratic"), locality)


def select_weight(phi: ComplexField, det: DetectorSpec) -> float:
    """Selection weight of a fixed field: its total power under the detector's law."""
    if det.power_law == "quadratic":
        return power2(phi, det.locality)
    return power24(phi, det.locality)


def conditional_outcome_density(phi: ComplexField, j0: int, det: DetectorSpec) -> float:
    """Outcome probability density at grid point ``j0`` for a fixed selected field."""
    w = select_weight(phi, det)
    if w <= 0.0:
        raise DegenerateFieldError("field has zero selection weight; no outcome density is defined")
    if det.locality is not None and not det.locality.mask(phi.grid)[j0]:
        return 0.0
    z = phi.amp[j0]
    a2 = z.real**2 + z.imag**2
    if det.power_law == "quadratic":
        return float(a2 / w)
    return float((a2 + a2 * a2) / w)


def detect_quadratic_region(ens: EnsembleSpec, region: Region) -> float:
    """Probability of an outcome in the region under quadratic detection.

    Closed form: (1/kappa) * E[pi_2(I, phi)] = sum_i p_i * int_I |psi_i|^2,
    independent of kappa and of the modulus model.
    """
    return float(sum(p * power2(psi.field, region) for p, psi in ens.components))


def trace_probability(rho: DensityMatrix, region: Region) -> float:
    """Tr(rho * I_hat) with I_hat the diagonal indicator projector of the region."""
    idx = region.indices(rho.grid)
    return float(np.diag(rho.entries).real[idx].sum())


def _quartic_integral(ens: EnsembleSpec, region: Region | None) -> float:
    """int_I of the unit-dispersion quartic moment density (m4 factor included)."""
    q = quartic_density(ens)
    if region is not None:
        q = q[region.indices(ens.grid)]
    return float(ens.grid.h * q.sum())


def detect_power24_region(ens: EnsembleSpec, region: Region) -> float:
    """Exact detection probability in the "2+4" regime.

    Ratio of the quadratic-plus-quartic moment over the region to the same
    over the full grid, in the unit-dispersion representation:
    (B_I + kappa q_I) / (1 + kappa q), with B_I the Born value and q the
    modulus-model quartic moment (carrying the Gaussian factor 2 when it
    applies).
    """
    born = detect_quadratic_region(ens, region)
    q_region = _quartic_integral(ens, region)
    q_full = _quartic_integral(ens, None)
    return float((born + ens.kappa * q_region) / (1.0 + ens.kappa * q_full))


def detect_local(ens: EnsembleSpec, domain: Region, region: Region) -> float:
    """Quadratic detection conditional on the detector domain O: p(X in I | O)."""
    grid = ens.grid
    dom_mask = domain.mask(grid)
    if np.any(region.mask(grid) & ~dom_mask):
        raise ValueError("outcome region must lie inside the detection domain")
    kappa_o = float(sum(p * power2(psi.field, domain) for p, psi in ens.components))
    if kappa_o <= 0.0:
        raise DegenerateDomainError("ensemble carries no power in the detection domain")
    num = float(sum(p * power2(psi.field, region) for p, psi in ens.components))
    return num / kappa_o


@dataclass(frozen=True)
class DiscreteObservable:
    eigenvalues: tuple[float, ...]
    eigenvectors: tuple[WaveFunction, ...]

    def __post_init__(self):
        vals = tuple(float(a) for a in self.eigenvalues)
        if len(set(vals)) != len(vals):
            raise ValueError("eigenvalues must be distinct")
        if len(vals) != len(self.eigenvectors):
            raise ValueError("need one eigenvector per eigenvalue")
        vecs = np.stack([e.amp for e in self.eigenvectors])
        grid = self.eigenvectors[0].grid
        gram = grid.h * (vecs @ vecs.conj().T)
        if np.max(np.abs(gram - np.eye(len(vals)))) > 1e-10:
            raise ValueError("eigenvectors must be pairwise orthonormal within 1e-10")
        object.__setattr__(self, "eigenvalues", vals)


def detect_discrete(ens: EnsembleSpec, observable: DiscreteObservable) -> dict[float, float]:
    """Outcome distribution of a discrete-spectrum observable: p(a) = sum_i p_i |<psi_i, e_a>|^2."""
    probs = {}
    total = 0.0
    for a, e_a in zip(observable.eigenvalues, observable.eigenvectors):
        pa = float(sum(p * abs(inner(e_a, psi)) ** 2 for p, psi in ens.components))
        probs[a] = pa
        total += pa
    if abs(total - 1.0) > 1e-8:
        raise ValueError(f"eigenbasis does not span the ensemble support: probabilities sum to {total}")
    return probs


def mean_position(ens: EnsembleSpec) -> float:
    """Mean position under quadratic detection; equals Tr(rho * x_hat)."""
    grid = ens.grid
    dens = ens.weights @ (np.abs(ens.state_matrix()) ** 2)
    return float(grid.h * np.sum(grid.points * dens))


def detection_average(ens: EnsembleSpec, weight_values: np.ndarray) -> float:
    """Average of a pointwise weight g(x) under the "2+4" detection distribution."""
    grid = ens.grid
    dens2 = ens.weights @ (np.abs(ens.state_matrix()) ** 2)
    dens4 = quartic_density(ens)
    c4 = float(grid.h * dens4.sum())
    density = (dens2 + ens.kappa * dens4) / (1.0 + ens.kappa * c4)
    return float(grid.h * np.sum(np.asarray(weight_values) * density))
