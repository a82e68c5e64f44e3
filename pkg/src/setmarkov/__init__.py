"""Set-indexed Markov processes: lattices, kernels, samplers, checks."""

from .errors import (CapacityError, ConfigError, ConsistencyError,
                     FamilyError, HistoryError, KernelError)
from .families import (IndexFamily, MeasureSpec, ProdSet, Rect, TreeBranch,
                       additive_measure, depth_measure, lebesgue,
                       product_family, rect_family, shape_check, tree_family,
                       union_subset, weighted_lebesgue)
from .kernels import (AdditiveLevyKernel, ConvolvedDist, DiracKernel,
                      GaussianDist, GaussianMarginal, LevyKernel, OUKernel,
                      PointMass, PoissonMarginal, ProductKernel,
                      ShiftedPoisson, ShiftedStable, StableMarginal,
                      ck_residual, expectation, factor_increments,
                      feller_modulus, feller_profile, gaussian_coeffs,
                      homogeneity_gap, is_gaussian_exact, kernel_apply,
                      multiparameter_semigroup, ou_sigma, sas_standard,
                      state_dim, transition_density)
from .lattice import (Frontier, Increment, Semilattice,
                      extremal_representation, frontier,
                      incl_excl_coefficients, increment_measure,
                      increment_norm, left_neighborhood, make_increment,
                      psi_map, semilattice_closure, shift_increment,
                      simple_increment, split, union_measure, value_norm)
from .reports import CheckReport
from .sampler import (CustomLaw, FddSample, GaussianFdd, GaussianLaw,
                      PointMassLaw, gaussian_fdd_moments,
                      numbering_invariance_check, product_labels, sample_fdd,
                      sample_grid, split_seeds)
from .verify import (cmarkov_conditional_check, commuting_filtration_check,
                     flow_projection_check, gaussian_condition,
                     partial_covariance, sharp_markov_check,
                     simple_markov_shift_check, star_markov_correspondence)

__version__ = "0.1.0"
