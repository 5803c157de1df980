"""Born-rule deviation: closed forms, step-state family, and asymptotic checks.

The first-order deviation for a pure state is

    Delta(I, Psi, kappa) = m4 * kappa * [ int_I |Psi|^4
                                          - int_I |Psi|^2 * int |Psi|^4 ],

with m4 the fourth-moment factor of the coefficient law (1 for
phase_only, 2 for gaussian).  The piecewise-constant step family with
amplitude ratio k admits the fully analytic form

    Delta = m4 * kappa * H^2 * k^2 * (1 - k^2) / (1 + k^2)^2

on the low-amplitude half, negative for k > 1 and positive for k < 1.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .detection import detection_average
from .ensembles import EnsembleSpec, M4_FACTOR, quantum_state_of, quartic_density
from .fields import ComplexField, WaveFunction, power2, power4
from .grid import Grid1D, Region, cell_centered_grid


@dataclass(frozen=True)
class StepState:
    """Piecewise-constant profile: amplitude H left of 0, k*H right of 0.

    Unit norm fixes the support length L = 2 / (H^2 (k^2 + 1)).
    """

    H: float
    k: float

    def __post_init__(self):
        if self.H <= 0 or self.k <= 0:
            raise ValueError("step state needs H > 0 and k > 0")

    @property
    def L(self) -> float:
        return 2.0 / (self.H**2 * (self.k**2 + 1.0))


def step_grid(H: float, k: float, n: int) -> Grid1D:
    """Cell-centered grid over the step state's support [-L/2, L/2].

    Cell centers never straddle the jump at 0 (n even), so the discrete
    quadrature reproduces the continuum integrals of the profile exactly.
    """
    if n % 2 != 0:
        raise ValueError("step grids need an even point count")
    L = StepState(H, k).L
    return cell_centered_grid(-L / 2.0, L / 2.0, n)


def build_step_state(H: float, k: float, grid: Grid1D) -> WaveFunction:
    """Project the step profile onto the grid and renormalize."""
    step = StepState(H, k)
    half = step.L / 2.0
    tol = 0.5 * grid.h * (1.0 + 1e-9)
    if grid.x_min > -half + tol or grid.x_max < half - tol:
        raise ValueError(f"grid [{grid.x_min}, {grid.x_max}] does not span the step support [-{half}, {half}]")
    if step.L / grid.h < 16:
        raise ValueError("grid is too coarse for the step support (need L/h >= 16)")
    x = grid.points
    amp = np.zeros(grid.n, dtype=np.complex128)
    left = (x >= -half - tol) & (x < 0.0)
    right = (x >= 0.0) & (x <= half + tol)
    amp[left] = step.H
    amp[right] = step.k * step.H
    return WaveFunction.normalize(ComplexField(grid, amp))


def delta_closed_form(psi: WaveFunction, region: Region, kappa: float, modulus_model: str = "phase_only") -> float:
    """First-order Born deviation of a pure state over the region."""
    if kappa <= 0:
        raise ValueError(f"dispersion must be positive, got kappa={kappa}")
    m4 = M4_FACTOR[modulus_model]
    q_region = power4(psi.field, region)
    q_full = power4(psi.field)
    born = power2(psi.field, region)
    return float(m4 * kappa * (q_region - born * q_full))


def delta_step_analytic(H: float, k: float, kappa: float, modulus_model: str = "phase_only") -> float:
    """Analytic deviation of the step state on the low-amplitude half [-L/2, 0]."""
    if H <= 0 or k <= 0 or kappa <= 0:
        raise ValueError("step deviation needs H, k, kappa > 0")
    m4 = M4_FACTOR[modulus_model]
    k2 = k * k
    return float(m4 * kappa * H * H * k2 * (1.0 - k2) / (1.0 + k2) ** 2)


def c4_constant(ens: EnsembleSpec) -> float:
    """Normalized quartic field moment entering the detection normalizer 1/(kappa + kappa^2 c4)."""
    return float(ens.grid.h * quartic_density(ens).sum())


@dataclass(frozen=True)
class PolynomialVariable:
    """Field variable f(phi) = <A phi, phi> + c * int |phi|^4.

    A is a plain Hermitian matrix in the grid convention where the inner
    product carries the h factor (so A = identity gives the quadratic
    power).
    """

    quadratic_kernel: np.ndarray
    quartic_weight: float = 0.0

    def __post_init__(self):
        a = np.ascontiguousarray(self.quadratic_kernel, dtype=np.complex128)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("quadratic kernel must be a square matrix")
        if np.max(np.abs(a - a.conj().T)) > 1e-12:
            raise ValueError("quadratic kernel must be Hermitian within 1e-12")
        a.setflags(write=False)
        object.__setattr__(self, "quadratic_kernel", a)

    def evaluate(self, phi: ComplexField) -> float:
        """Pointwise evaluation on a single field (used by sampling oracles)."""
        quad = phi.grid.h * np.vdot(phi.amp, self.quadratic_kernel @ phi.amp).real
        return float(quad + self.quartic_weight * power4(phi))


def classical_average(ens: EnsembleSpec, f: PolynomialVariable) -> float:
    """<f>_mu in closed form: kappa * Tr(rho A) + c * kappa^2 * c4."""
    rho = quantum_state_of(ens)
    quad = np.trace(rho.entries @ f.quadratic_kernel).real
    return float(ens.kappa * quad + f.quartic_weight * ens.kappa**2 * c4_constant(ens))


def quantum_average(rho, operator: np.ndarray) -> float:
    """von Neumann average Tr(rho A)."""
    a = np.asarray(operator, dtype=np.complex128)
    if np.max(np.abs(a - a.conj().T)) > 1e-12:
        raise ValueError("observable must be Hermitian within 1e-12")
    return float(np.trace(rho.entries @ a).real)


@dataclass(frozen=True)
class AsymptoticResult:
    exact: bool
    slope: float | None
    kappas: tuple[float, ...]
    remainders: tuple[float, ...]
    normalized_average_error: float | None


def asymptotic_check(ens: EnsembleSpec, kappas, f: PolynomialVariable) -> AsymptoticResult:
    """Check <f>_mu = kappa * Tr(rho A) + O(kappa^2) over a kappa sweep.

    Fits the log-log slope of the remainder (expected 2 when the quartic
    weight is nonzero); reports an exact-match flag when the remainder is
    below 1e-14 everywhere.  For diagonal quadratic kernels also checks
    the power-normalized average identity <f_g>_mu / <pi_24>_mu =
    detection-average of g, with f_g carrying the same pointwise weight in
    its quadratic and quartic parts.
    """
    kappas = tuple(float(kv) for kv in kappas)
    if len(kappas) < 2:
        raise ValueError("kappa sweep needs at least two points")
    if max(kappas) / min(kappas) < 100.0 * (1.0 - 1e-12):
        raise ValueError("kappa sweep must span at least two decades")
    if max(kappas) >= 0.5:
        raise ValueError("kappa sweep must stay below 0.5")

    rho = quantum_state_of(ens)
    quad = np.trace(rho.entries @ f.quadratic_kernel).real
    remainders = []
    for kv in kappas:
        ens_k = EnsembleSpec(ens.components, kv, ens.modulus_model)
        remainders.append(classical_average(ens_k, f) - kv * quad)
    remainders = tuple(float(r) for r in remainders)

    pw_err = _normalized_average_error(ens, f, kappas)

    if max(abs(r) for r in remainders) < 1e-14:
        return AsymptoticResult(True, None, kappas, remainders, pw_err)
    logs_k = np.log(np.asarray(kappas))
    logs_r = np.log(np.abs(np.asarray(remainders)))
    slope = float(np.polyfit(logs_k, logs_r, 1)[0])
    return AsymptoticResult(False, slope, kappas, remainders, pw_err)


def _normalized_average_error(ens: EnsembleSpec, f: PolynomialVariable, kappas) -> float | None:
    """Max error of the power-normalized average identity across the sweep."""
    a = f.quadratic_kernel
    if np.max(np.abs(a - np.diag(np.diag(a)))) > 0.0:
        return None
    g = np.diag(a).real
    grid = ens.grid
    dens4 = quartic_density(ens)
    c4 = float(grid.h * dens4.sum())
    err = 0.0
    for kv in kappas:
        ens_k = EnsembleSpec(ens.components, kv, ens.modulus_model)
        rho = quantum_state_of(ens_k)
        quad = float(np.trace(rho.entries @ np.diag(g)).real)
        quart = float(grid.h * np.sum(g * dens4))
        f_g_avg = kv * quad + kv**2 * quart
        pi24_avg = kv + kv**2 * c4
        err = max(err, abs(f_g_avg / pi24_avg - detection_average(ens_k, g)))
    return err
