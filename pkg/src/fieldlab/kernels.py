"""Backend selection for the hot power-sum kernel.

The compiled extension is preferred; the numpy fallback is numerically
identical (same summation order per sample up to float association) and
is used automatically when the extension is not built.  Set the
environment variable FIELDLAB_PURE_PYTHON=1 to force the fallback.
"""
import os

import numpy as np

if os.environ.get("FIELDLAB_PURE_PYTHON"):
    from . import _powerkernels_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _powerkernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        from . import _powerkernels_py as _impl

        BACKEND = "python"


def power_sums(amp, h, idx):
    """Per-sample (p2_region, p2_full, p4_region, p4_full) for a sample batch."""
    amp = np.ascontiguousarray(amp, dtype=np.complex128)
    idx = np.ascontiguousarray(idx, dtype=np.int64)
    return _impl.power_sums(amp, float(h), idx)


def mixture_power_sums(z, mat, h, idx):
    """Power sums of the fields phi_s = sum_i z[s, i] mat[i, :].

    Equivalent to power_sums(z @ mat, ...) but the compiled backend
    never materializes the field batch.
    """
    z = np.ascontiguousarray(z, dtype=np.complex128)
    mat = np.ascontiguousarray(mat, dtype=np.complex128)
    idx = np.ascontiguousarray(idx, dtype=np.int64)
    return _impl.mixture_power_sums(z, mat, float(h), idx)
