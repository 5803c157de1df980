"""Pure-numpy fallback for the batched power-sum kernel."""
import numpy as np


def power_sums(amp, h, idx):
    """Per-sample region/full quadratic and quartic power sums.

    Same contract as the compiled kernel: amp is (n_samples, n) complex,
    idx holds the region's grid indices; returns (p2_region, p2_full,
    p4_region, p4_full).
    """
    a2 = amp.real**2 + amp.imag**2
    a4 = a2 * a2
    p2_full = h * a2.sum(axis=1)
    p4_full = h * a4.sum(axis=1)
    p2_region = h * a2[:, idx].sum(axis=1)
    p4_region = h * a4[:, idx].sum(axis=1)
    return p2_region, p2_full, p4_region, p4_full


def mixture_power_sums(z, mat, h, idx):
    """Power sums of phi = z @ mat, materializing the field batch.

    Same contract as the compiled kernel, which skips the (n_samples, n)
    intermediate entirely.
    """
    if z.shape[1] == 1:
        amp = z[:, 0, None] * mat[0]
    else:
        amp = z @ mat
    return power_sums(amp, h, idx)
