"""Numerical laboratory for power-weighted detection of classical random fields."""

from .grid import Grid1D, Region, build_grid, cell_centered_grid, full_region
from .fields import ComplexField, WaveFunction, box_state, inner, power2, power24, power4
from .ensembles import (
    DensityMatrix,
    EnsembleSpec,
    ensemble_from_json,
    ensemble_to_json,
    field_stream,
    mixed_ensemble,
    normalize_ensemble,
    pure_ensemble,
    quantum_state_of,
    sample_coefficients,
    sample_field,
    sample_fields,
)
from .detection import (
    DetectorSpec,
    DiscreteObservable,
    conditional_outcome_density,
    detect_discrete,
    detect_local,
    detect_power24_region,
    detect_quadratic_region,
    detection_average,
    mean_position,
    select_weight,
    trace_probability,
)
from .deviation import (
    PolynomialVariable,
    StepState,
    asymptotic_check,
    build_step_state,
    c4_constant,
    classical_average,
    delta_closed_form,
    delta_step_analytic,
    quantum_average,
    step_grid,
)
from .borntests import (
    ObservablePair,
    Qubit,
    TransitionMatrix,
    double_stochasticity_residual,
    frequency_harness,
    interference_ratio,
    interference_reconstruct,
    simplified_criterion,
    transition_matrix,
)
from .montecarlo import (
    MCEstimate,
    RunConfig,
    estimate_detection,
    estimate_detection_rejection,
    estimate_selected_power,
    kappa_sweep,
)

__version__ = "0.1.0"
