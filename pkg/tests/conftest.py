import numpy as np

from fieldlab.ensembles import mixed_ensemble
from fieldlab.fields import ComplexField, WaveFunction
from fieldlab.grid import Grid1D


def random_states(grid: Grid1D, m: int, rng: np.random.Generator) -> list[WaveFunction]:
    """m pairwise-orthonormal random states on the grid (QR of a random complex matrix)."""
    z = rng.normal(size=(grid.n, m)) + 1j * rng.normal(size=(grid.n, m))
    q, _ = np.linalg.qr(z)
    return [WaveFunction(ComplexField(grid, q[:, i] / np.sqrt(grid.h))) for i in range(m)]


def random_mixture(grid: Grid1D, m: int, kappa: float, rng: np.random.Generator, modulus_model="gaussian"):
    states = random_states(grid, m, rng)
    w = rng.random(m) + 0.1
    w /= w.sum()
    return mixed_ensemble(list(zip(w, states)), kappa, modulus_model)
