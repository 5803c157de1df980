"""Experimental Born-rule tests on two-level systems.

Two tests are implemented: double stochasticity of the transition
matrix between a pair of nondegenerate two-outcome observables, and the
interference-of-probabilities magnitude bound |cos theta| <= 1.  Both
follow from Born's rule, so either failing on data is evidence against
it.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateConfigurationError

_NORM_TOL = 1e-12


@dataclass(frozen=True)
class Qubit:
    c_plus: complex
    c_minus: complex

    def __post_init__(self):
        nsq = abs(self.c_plus) ** 2 + abs(self.c_minus) ** 2
        if abs(nsq - 1.0) > _NORM_TOL:
            raise ValueError(f"qubit amplitudes must be normalized within {_NORM_TOL}, got |c|^2 = {nsq}")

    @classmethod
    def normalize(cls, c_plus: complex, c_minus: complex) -> "Qubit":
        nrm = math.sqrt(abs(c_plus) ** 2 + abs(c_minus) ** 2)
        if nrm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return cls(c_plus / nrm, c_minus / nrm)

    def to_json(self) -> list:
        return [[self.c_plus.real, self.c_plus.imag], [self.c_minus.real, self.c_minus.imag]]


def overlap(u: Qubit, v: Qubit) -> complex:
    """<u, v>, antilinear in the first slot."""
    return u.c_plus.conjugate() * v.c_plus + u.c_minus.conjugate() * v.c_minus


@dataclass(frozen=True)
class ObservablePair:
    basis_a: tuple[Qubit, Qubit]
    basis_b: tuple[Qubit, Qubit]

    def __post_init__(self):
        for name, (e0, e1) in (("a", self.basis_a), ("b", self.basis_b)):
            if abs(overlap(e0, e1)) > _NORM_TOL:
                raise ValueError(f"basis {name} is not orthonormal within {_NORM_TOL}")

    def to_json(self) -> dict:
        return {
            "basis_a": [e.to_json() for e in self.basis_a],
            "basis_b": [e.to_json() for e in self.basis_b],
        }


@dataclass(frozen=True)
class TransitionMatrix:
    """2x2 matrix p[beta, alpha] = P(b = beta | a = alpha); columns sum to 1."""

    entries: np.ndarray

    def __post_init__(self):
        m = np.ascontiguousarray(self.entries, dtype=np.float64)
        if m.shape != (2, 2):
            raise ValueError("transition matrix must be 2x2")
        if np.any(m < -_NORM_TOL) or np.any(m > 1.0 + _NORM_TOL):
            raise ValueError("transition probabilities must lie in [0, 1]")
        if np.max(np.abs(m.sum(axis=0) - 1.0)) > _NORM_TOL:
            raise ValueError("transition matrix columns must sum to 1 (left stochastic)")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)


def transition_matrix(pair: ObservablePair) -> TransitionMatrix:
    """Born transition probabilities p[beta, alpha] = |<e_beta^b, e_alpha^a>|^2."""
    m = np.empty((2, 2))
    for i_b, eb in enumerate(pair.basis_b):
        for i_a, ea in enumerate(pair.basis_a):
            m[i_b, i_a] = abs(overlap(eb, ea)) ** 2
    return TransitionMatrix(m)


def double_stochasticity_residual(m: TransitionMatrix) -> float:
    """Max row-sum deviation from 1; zero for any Born-derived matrix."""
    return float(np.max(np.abs(m.entries.sum(axis=1) - 1.0)))


def interference_reconstruct(psi: Qubit, pair: ObservablePair, beta: int) -> tuple[float, float]:
    """Reconstruct P_psi(b = beta) from the interference decomposition.

    Returns (reconstructed probability, theta).  theta is the phase of
    the product of overlap amplitudes z_+ conj(z_-) with
    z_alpha = <e_beta^b, e_alpha^a> <e_alpha^a, psi>; the decomposition
    P = sum_alpha P(a) P(b|a) + 2 cos(theta) sqrt(prod ...) is then an
    identity.
    """
    eb = _basis_vector(pair.basis_b, beta)
    z = []
    for ea in pair.basis_a:
        term = overlap(eb, ea) * overlap(ea, psi)
        if abs(term) < 1e-15:
            raise DegenerateConfigurationError("a vanishing overlap term makes the interference phase undefined")
        z.append(term)
    theta = cmath.phase(z[0] * z[1].conjugate())
    classical = abs(z[0]) ** 2 + abs(z[1]) ** 2
    cross = 2.0 * math.cos(theta) * abs(z[0]) * abs(z[1])
    return classical + cross, theta


def interference_ratio(p_b: float, q: tuple[float, float], m: TransitionMatrix, beta: int) -> float:
    """Normalized interference magnitude; Born-consistent inputs give |cos theta| <= 1."""
    i_b = _beta_index(beta)
    q_plus, q_minus = q
    t_plus = m.entries[i_b, 0]
    t_minus = m.entries[i_b, 1]
    denom_sq = q_plus * t_plus * q_minus * t_minus
    # below ~1e-12 the cross term drowns in float rounding of p_b itself
    if denom_sq <= 0.0 or math.sqrt(denom_sq) < 1e-12:
        raise DegenerateConfigurationError("interference ratio undefined: a probability term (nearly) vanishes")
    classical = q_plus * t_plus + q_minus * t_minus
    return float(abs(p_b - classical) / (2.0 * math.sqrt(denom_sq)))


def simplified_criterion(p_plus: float, q_plus: float) -> bool:
    """Violation flag for the all-transitions-1/2 case: |p+ - 1/2| > sqrt(q+ (1 - q+))."""
    for name, v in (("p_plus", p_plus), ("q_plus", q_plus)):
        if not 0.0 < v < 1.0:
            raise ValueError(f"{name} must lie strictly inside (0, 1), got {v}")
    return abs(p_plus - 0.5) > math.sqrt(q_plus * (1.0 - q_plus))


@dataclass(frozen=True)
class HarnessResult:
    p_hat: float
    q_hat: float
    margin: float
    margin_stderr: float
    z_level: float
    significant: bool
    n_trials: int
    seed: int


def frequency_harness(true_probs: tuple[float, float], n_trials: int, seed: int, z_level: float = 3.0) -> HarnessResult:
    """Simulate counting statistics for the simplified criterion.

    true_probs = (p_plus, q_plus) are the actual outcome probabilities
    (all transition probabilities fixed at 1/2).  The harness draws
    binomial counts, estimates the criterion margin
    |p+ - 1/2| - sqrt(q+ (1 - q+)), and flags a violation when the margin
    exceeds z_level propagated standard errors.
    """
    if n_trials < 2:
        raise ValueError("need at least 2 trials per observable")
    p_true, q_true = true_probs
    rng = np.random.Generator(np.random.Philox(key=seed))
    p_hat = rng.binomial(n_trials, p_true) / n_trials
    q_hat = rng.binomial(n_trials, q_true) / n_trials

    se_p = math.sqrt(max(p_hat * (1.0 - p_hat), 1.0 / n_trials) / n_trials)
    se_q = math.sqrt(max(q_hat * (1.0 - q_hat), 1.0 / n_trials) / n_trials)
    # clamp the threshold derivative away from the q = 0, 1 endpoints
    q_c = min(max(q_hat, 1.0 / n_trials), 1.0 - 1.0 / n_trials)
    threshold = math.sqrt(q_c * (1.0 - q_c))
    d_threshold = abs(1.0 - 2.0 * q_c) / (2.0 * threshold)
    margin = abs(p_hat - 0.5) - threshold
    margin_stderr = math.sqrt(se_p**2 + (d_threshold * se_q) ** 2)
    significant = margin > z_level * margin_stderr
    return HarnessResult(p_hat, q_hat, margin, margin_stderr, z_level, bool(significant), n_trials, seed)


def _basis_vector(basis: tuple[Qubit, Qubit], beta: int) -> Qubit:
    return basis[_beta_index(beta)]


def _beta_index(beta: int) -> int:
    if beta == 1:
        return 0
    if beta == -1:
        return 1
    raise ValueError(f"beta must be +1 or -1, got {beta}")


def _random_basis(rng: np.random.Generator) -> tuple[Qubit, Qubit]:
    # direct U(2) parametrization; cheaper than a QR per case
    alpha = math.asin(math.sqrt(rng.uniform()))
    ph1, ph2, ph3 = rng.uniform(0.0, 2.0 * math.pi, size=3)
    c, s = math.cos(alpha), math.sin(alpha)
    e0 = Qubit(c * cmath.exp(1j * ph1), s * cmath.exp(1j * ph2))
    g = cmath.exp(1j * ph3)
    e1 = Qubit(-s * cmath.exp(-1j * ph2) * g, c * cmath.exp(-1j * ph1) * g)
    return e0, e1


def random_observable_pair(rng: np.random.Generator) -> ObservablePair:
    """Random pair of orthonormal bases (uniform over U(2) columns)."""
    return ObservablePair(_random_basis(rng), _random_basis(rng))


def random_qubit(rng: np.random.Generator) -> Qubit:
    return _random_basis(rng)[0]
