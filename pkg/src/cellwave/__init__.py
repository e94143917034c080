"""cellwave: resting-state stability and traveling-wave branches for a
Darcy free-boundary cell motility model with membrane undercooling."""

from .errors import (
    AccuracyError,
    BranchRangeError,
    CellWaveError,
    ConfigError,
    ContinuationStalledError,
    DegenerateThresholdError,
    ForceLawError,
    GeometryError,
    NewtonConvergenceError,
    ParamError,
    ResidualError,
    SolverError,
)
from .forces import (
    ForceLaw,
    force_law_from_config,
    hill_active,
    linear_undercooling,
    tanh_undercooling,
    validate_force_law,
)
from .model import (
    ModelParams,
    RestingState,
    chi_c_star,
    resting_state,
    tw_concentration,
    tw_pressure,
)
from .solvers import arclength_continue, find_complex_roots, newton_solve
from .special import (
    QuadratureRule,
    bessel_I,
    bessel_J,
    bessel_J_roots,
    gauss_legendre,
    periodic_trapezoid,
)
from .stability import (
    EigenMode,
    ModeSpectrum,
    StabilityReport,
    classify,
    dispersion_H,
    dispersion_kernel,
    eigenmode,
    mode_spectrum,
    principal_eigenvalue_sweep,
    refine_threshold,
    threshold_slope_report,
    zero_eigenspace_dimension,
    zero_mode_basis,
)
from .waves import (
    BifurcationReport,
    Branch,
    Shape,
    TravelingWaveState,
    bifurcation_report,
    continue_branch,
    disk_shape,
    marker_normalization,
    mean_curvature,
    normal_vector,
    normal_x,
    residual_F,
    solve_at_velocity,
)

__version__ = "0.1.0"
