"""Rough-kernel fractional integrals and maximal operators on uniform grids,
with weighted Morrey/BMO norms and empirical boundedness experiments."""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    ConfigError, ConstraintViolation, DegenerateWeight, DominationViolation, EmptySubset, GridMismatch,
    InvalidAlpha, InvalidExponent, InvalidLadder, NoCoveringBall, NonFiniteWeight, NonIntegrable,
    PreconditionFailed, RoughFracError, ZeroMeasureBall, ZeroVector,
)
from .geometry import (  # noqa: F401
    Ball, BallFamily, Grid, GridFunction, OperatorParams, build_ball_family, centered_family, derive_params,
    radius_ladder,
)
from .norms import (  # noqa: F401
    NormResult, bmo_lp_oscillation, bmo_norm, morrey_norm, morrey_norm_two_weight, weighted_lp_norm,
    weighted_oscillation,
)
from .operators import (  # noqa: F401
    QuadratureSpec, centered_frac_maximal, commutator_M, commutator_T, commutator_T_abs, frac_maximal,
    frac_maximal_rough, hl_maximal, riesz_rough,
)
from .sphere import RoughKernel, eval_homogeneous, sphere_norm  # noqa: F401
from .weights import (  # noqa: F401
    Weight, WeightConstantReport, WeightPair, ap_constant, apq_constant, ball_measure, check_doubling,
    check_rh_subset, raise_weight, rh_constant,
)
