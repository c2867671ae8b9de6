"""echotop: quantum echo dynamics of kicked spin systems.

Exact Loschmidt-echo simulations of single and coupled kicked tops under
residual perturbations, the semiclassical predictions for the fidelity
freeze (plateau value, crossover time, exponential/Gaussian decay), and the
classical-fidelity counterpart.
"""

__version__ = "0.1.0"

from .spin import (
    SpinRep,
    SubspaceBasis,
    build_angular_momentum,
    coherent_state,
    even_parity_subspace,
    odd_parity_subspace,
    random_state,
    rotation_y,
    symmetric_coupled_subspace,
)
from .models import (
    TopModel,
    TopParams,
    coupled_tops,
    perturbed_propagator,
    renormalized_operator,
    residual_perturbation,
    single_top,
)
from .echo import (
    CoupledStepper,
    EchoRunConfig,
    EchoSolver,
    FidelitySeries,
    InitialState,
    SpectralPropagator,
    correlation_function,
    fidelity_series,
    linear_response_fidelity,
    log_sample_times,
    mixing_time,
    plateau_statistics,
    prepare_initial_state,
    renormalized_fidelity_series,
    spectral_propagate,
)
from .semiclassics import (
    PredictionSet,
    Timescales,
    TransportRateResult,
    classical_average,
    classical_kick_z,
    classical_map,
    classical_map_inverse,
    decay_factor,
    decay_prediction,
    generating_function,
    generating_function_mc,
    kappa_cl_sq,
    plateau_prediction,
    predictions_for,
    stationary_phase_envelope,
    timescales,
    transport_rate,
    uniform_sphere,
)
from .classical_echo import (
    ClassicalEnsemble,
    EqualAreaGrid,
    classical_fidelity_series,
    gaussian_patch_ensemble,
)
from .runspec import RunSpec, RunSpecError, figure_preset, parse_and_validate, serialize
