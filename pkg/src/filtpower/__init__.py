"""Targeted matrix-free eigensolver.

Power iteration is run through a spectral filter that peaks at a chosen
energy, so the iteration converges to the eigenvalue nearest the peak
instead of the extremal one. No deflation, no factorization: only
operator applications. Includes a convergence-rate model, a peak-energy
scanner, benchmark problems with closed-form and brute-force oracles,
and a command-line interface (``filtpower``).
"""

from .analysis import (
    ConvergenceModel,
    ErrorDecayFit,
    ScanResult,
    ScanRow,
    convergence_ratio,
    fit_error_decay,
    predicted_iterations,
    scan_ep,
    scan_peak_energies,
    turning_point,
    turning_points_of,
)
from .filtering import (
    FilterConfig,
    FilterInstabilityError,
    SplitCoefficients,
    StabilityReport,
    apply_exponential_filter,
    apply_polynomial_filter,
    apply_split_filter,
    check_stability,
    filter_value,
    polynomial_response,
)
from .operators import DenseOperator, GridOperator, GridSpec, materialize, neighbor_sum
from .power import (
    IterationReport,
    IterationSettings,
    Status,
    exponential_power_solve,
    filtered_power_solve,
    normalize,
    power_solve,
    rayleigh_quotient,
)
from .problems import (
    CATALOG,
    BenchmarkProblem,
    box_1d,
    brute_force_spectrum,
    cubic_box,
    from_samples,
    harmonic,
    make_problem,
    ring,
    simple_matrix,
)

__version__ = "0.1.0"

__all__ = [
    "BenchmarkProblem",
    "CATALOG",
    "ConvergenceModel",
    "DenseOperator",
    "ErrorDecayFit",
    "FilterConfig",
    "FilterInstabilityError",
    "GridOperator",
    "GridSpec",
    "IterationReport",
    "IterationSettings",
    "ScanResult",
    "ScanRow",
    "SplitCoefficients",
    "StabilityReport",
    "Status",
    "apply_exponential_filter",
    "apply_polynomial_filter",
    "apply_split_filter",
    "box_1d",
    "brute_force_spectrum",
    "check_stability",
    "convergence_ratio",
    "cubic_box",
    "exponential_power_solve",
    "filter_value",
    "filtered_power_solve",
    "fit_error_decay",
    "from_samples",
    "harmonic",
    "make_problem",
    "materialize",
    "neighbor_sum",
    "normalize",
    "polynomial_response",
    "power_solve",
    "predicted_iterations",
    "rayleigh_quotient",
    "ring",
    "scan_ep",
    "scan_peak_energies",
    "simple_matrix",
    "turning_point",
    "turning_points_of",
    "__version__",
]
