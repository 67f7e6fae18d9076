"""Centroid estimation for cube sections of finite-rank integral operators.

Computes the centroid of {f in Q : L_w f = y0} for step-function
responsivities w via the saddlepoint equation, with exact zonotope
membership tests, cube-section volume asymptotics, Monte-Carlo
verification oracles, and a colorimetry layer for spectral reflectance
and light-source estimation.
"""

from .errors import (
    BoundaryOrExteriorResponse,
    DependentChannels,
    DomainMismatch,
    MaxIterationsExceeded,
    NonPositiveCombination,
    NotEstimable,
    SpectroidError,
    UnsupportedDimension,
)
from .specfun import Regime, cumulant_K, laplace_P, laplace_Phat, sigma, sigma_prime
from .stepfn import (
    ResponseVector,
    StepFunction,
    apply_operator,
    common_refinement,
    gram_matrix,
    linear_combination,
    project_Pn,
    squash,
)
from .zonotope import ZonotopeModel
from .saddle import G_jacobian, G_map, SaddleResult, SolverOptions, potential_h, solve_saddlepoint
from .reparam import Reparameterization, build_equalization, equalized_responsivities, solve_shortcut
from .volume import (
    AsymptoticVolume,
    FiniteReduction,
    asymptotic_volume,
    log_phi_n,
    phi_n_at,
    reduce_to_grid,
    vol_transform,
)
from .oracle import (
    SectionSampleStats,
    empirical_centroid_vs_formula,
    hit_and_run,
    interior_start,
    irwin_hall_density,
    scaled_uniform_sum_density,
    section_volume_exact,
)
from .colorimetry import (
    EstimatorConfig,
    SpectraTable,
    build_responsivity,
    default_cmf_table,
    default_lms_matrix,
    estimate_lightsource,
    estimate_reflectance,
    hawkyard_estimate,
    residual_stats,
    synthetic_reflectance_table,
    tristimulus,
)
from .estimator import CentroidReflectanceEstimator

__version__ = "0.1.0"
