"""Large-scale dimension, heat-trace and singular-trace invariants of sampled spaces."""
from __future__ import annotations

from .dimension import (asymptotic_dim, asymptotic_dim_volume, doubling_constant, kolmogorov_dim,
                        rough_isometry_probe)
from .discretization import (Net, WeightedGraph, build_graph, build_net, combinatorial_distance,
                             discretization_dim_check)
from .errors import (AsydimError, ConfigError, DiscretizationError, DomainError, EstimationError,
                     NumericalError, ResourceError, SaturationWarning)
from .fitting import LIMINF, LIMSUP, DimEstimate, ScaleGrid, geometric_grid, parse_grid
from .heat import (AveragingScheme, HeatTrace, LaplacianModel, ProductLaplacianModel, heat_diagonal,
                   heat_matrix, roe_spectral_measure, roe_theta, semigroup_dim,
                   sup_kernel_volume_check)
from .metric import (MetricSpace, ball, covering_number, exact_covering_number,
                     exact_packing_number, packing_number)
from .spaces import (OscillatingProfile, StandardEnd, davies_end, end_volume, gen_lattice,
                     gen_parabolic_region, oscillating_dim_gap, oscillating_profile)
from .spectral import (GeneralizedLimitAt0, MonotoneFunction, SpectralMeasure, counting_function,
                       duality_check, eccentricity_test, novikov_shubin, power_exponent,
                       power_transform, rearrangement, singular_trace, spectral_to_theta)

__version__ = "0.1.0"
