"""Scattering length of a radial pair potential, computed two independent
ways, and a mechanically verified certificate that N bosons have negative
ground-state energy whenever that length is negative."""

from .certifier import (
    BoundEvaluation,
    Certificate,
    CLFunction,
    HProfile,
    SearchConfig,
    TrialProfile,
    autocorrelation_g2,
    bound_B,
    build_h,
    build_trial_profile,
    first_term,
    search_certificate,
    threebody_sharper,
)
from .errors import (
    BoundcertError,
    ConfigError,
    DegenerateSample,
    DivergentNorm,
    IllConditioned,
    Inconsistent,
    InconsistentB,
    NoMinimizer,
    NotCertifiable,
    NotConverged,
    SearchExhausted,
    StepperFailure,
)
from .mc_oracle import MCEstimate, mc_energy, run_chain_validation
from .potential import (
    RadialPotential,
    barrier,
    gaussian,
    load_potential,
    square_well,
    sum_of_gaussians,
    tabulated,
)
from .scattering import (
    RadialGrid,
    ScatteringLength,
    ScatteringSolution,
    ShootResult,
    find_negative_b_radius,
    limit_a,
    shoot_scattering_length,
    solve_a_R,
)
from .two_body import TwoBodyResult, ground_state_energy

__version__ = "0.1.0"

__all__ = [
    "BoundcertError",
    "BoundEvaluation",
    "Certificate",
    "CLFunction",
    "ConfigError",
    "DegenerateSample",
    "DivergentNorm",
    "HProfile",
    "IllConditioned",
    "Inconsistent",
    "InconsistentB",
    "MCEstimate",
    "NoMinimizer",
    "NotCertifiable",
    "NotConverged",
    "RadialGrid",
    "RadialPotential",
    "ScatteringLength",
    "ScatteringSolution",
    "SearchConfig",
    "SearchExhausted",
    "ShootResult",
    "StepperFailure",
    "TrialProfile",
    "TwoBodyResult",
    "autocorrelation_g2",
    "barrier",
    "bound_B",
    "build_h",
    "build_trial_profile",
    "find_negative_b_radius",
    "first_term",
    "gaussian",
    "ground_state_energy",
    "limit_a",
    "load_potential",
    "mc_energy",
    "run_chain_validation",
    "search_certificate",
    "shoot_scattering_length",
    "solve_a_R",
    "square_well",
    "sum_of_gaussians",
    "tabulated",
    "threebody_sharper",
    "__version__",
]
