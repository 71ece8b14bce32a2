"""Sharp Sobolev, Gagliardo-Nirenberg and log-Sobolev constants on convex cones
with monomial weights: closed forms, extremals and numerical verification."""

__version__ = "0.1.0"

from .errors import (DimensionMismatchError, DivergenceError, DomainError,
                     NegativityError, NonDifferentiableError, NormalizationError,
                     ParameterError, QuadratureError, SharpIneqError, UnsupportedError)
from .special import lbeta, lgamma
from .norms import (LqNorm, ProductNorm, conjugate, dual_norm, dual_spec, euclidean,
                    format_norm, norm, norm_gradient, parse_norm, unit_ball_volume)
from .domain import WeightedDomain, half_space, log_ball_measure, parse_domain
from .quadrature import (QuadratureResult, integrate_halfline, integrate_interval,
                         integrate_tensor, monte_carlo_sigma)
from .constants import (SharpConstant, assembled_gn_constant, euclidean_gn_constant,
                        gn_constant, gn_theta, logsob_constant, sobolev_constant,
                        sobolev_l1_constant)
from .extremals import (RadialProfile, gn_extremal, indicator, logsob_extremal, perturb,
                        random_spline, sobolev_extremal, spline_profile)
from .verify import (QuotientReport, dimension_reduction_check, duality_gap_gn,
                     duality_gap_sobolev, gn_quotients, logsob_deficit, sobolev_quotient,
                     tensorization_limit, theta_solve)
from .transport import TransportMap1D, amgm_slack, transport_inequality_check, radial_brenier
from .optimize import OptimizationRun, minimize_quotient
