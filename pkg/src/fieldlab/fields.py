"""Discretized complex fields, normalized states, and power quadrature.

A field is a vector of complex amplitudes on a Grid1D; its discrete
L2 norm is ``sqrt(h * sum |amp|^2)``.  The quadratic and "2+4" power
integrals over a region are the detector-facing quantities.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid1D, Region

NORM_TOL = 1e-12


@dataclass(frozen=True)
class ComplexField:
    grid: Grid1D
    amp: np.ndarray

    def __post_init__(self):
        amp = np.ascontiguousarray(self.amp, dtype=np.complex128)
        if amp.shape != (self.grid.n,):
            raise ValueError(f"amplitude vector has shape {amp.shape}, expected ({self.grid.n},)")
        if not np.all(np.isfinite(amp.view(np.float64))):
            raise ValueError("field amplitudes must be finite")
        amp.setflags(write=False)
        object.__setattr__(self, "amp", amp)

    @property
    def norm_sq(self) -> float:
        return float(self.grid.h * np.sum(self.amp.real**2 + self.amp.imag**2))

    def to_json(self) -> dict:
        return {
            "grid": self.grid.to_json(),
            "amplitudes": [[float(z.real), float(z.imag)] for z in self.amp],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ComplexField":
        grid = Grid1D.from_json(obj["grid"])
        pairs = np.asarray(obj["amplitudes"], dtype=np.float64)
        return cls(grid, pairs[:, 0] + 1j * pairs[:, 1])


@dataclass(frozen=True)
class WaveFunction:
    """A ComplexField with unit discrete L2 norm."""

    field: ComplexField

    def __post_init__(self):
        nrm = np.sqrt(self.field.norm_sq)
        if abs(nrm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized within {NORM_TOL}: ||psi|| = {nrm}")

    @property
    def grid(self) -> Grid1D:
        return self.field.grid

    @property
    def amp(self) -> np.ndarray:
        return self.field.amp

    @classmethod
    def normalize(cls, field: ComplexField) -> "WaveFunction":
        nrm = np.sqrt(field.norm_sq)
        if nrm == 0.0:
            raise ValueError("cannot normalize the zero field")
        return cls(ComplexField(field.grid, field.amp / nrm))

    @classmethod
    def from_samples(cls, grid: Grid1D, values) -> "WaveFunction":
        return cls.normalize(ComplexField(grid, np.asarray(values, dtype=np.complex128)))


def power2(phi: ComplexField, region: Region | None = None) -> float:
    """Quadratic power ``h * sum_{x_j in I} |phi(x_j)|^2``; full grid when region is None."""
    a2 = phi.amp.real**2 + phi.amp.imag**2
    if region is not None:
        a2 = a2[region.indices(phi.grid)]
    return float(phi.grid.h * a2.sum())


def power24(phi: ComplexField, region: Region | None = None) -> float:
    """"2+4" power ``h * sum_{x_j in I} (|phi|^2 + |phi|^4)``."""
    a2 = phi.amp.real**2 + phi.amp.imag**2
    if region is not None:
        a2 = a2[region.indices(phi.grid)]
    return float(phi.grid.h * (a2 + a2 * a2).sum())


def power4(phi: ComplexField, region: Region | None = None) -> float:
    """Quartic power ``h * sum_{x_j in I} |phi(x_j)|^4``."""
    a2 = phi.amp.real**2 + phi.amp.imag**2
    if region is not None:
        a2 = a2[region.indices(phi.grid)]
    return float(phi.grid.h * (a2 * a2).sum())


def inner(u: ComplexField | WaveFunction, v: ComplexField | WaveFunction) -> complex:
    """Discrete L2 inner product ``h * sum conj(u) v`` (antilinear in the first slot)."""
    ua = u.amp if isinstance(u, ComplexField) else u.field.amp
    va = v.amp if isinstance(v, ComplexField) else v.field.amp
    grid = u.grid if isinstance(u, ComplexField) else u.field.grid
    return complex(grid.h * np.vdot(ua, va))


def box_state(grid: Grid1D, support: Region | None = None) -> WaveFunction:
    """Constant-amplitude state on the support region (whole grid by default)."""
    amp = np.zeros(grid.n, dtype=np.complex128)
    if support is None:
        amp[:] = 1.0
    else:
        amp[support.indices(grid)] = 1.0
    return WaveFunction.normalize(ComplexField(grid, amp))
