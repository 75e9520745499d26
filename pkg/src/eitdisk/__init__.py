"""Inverse electrostatics on the unit disk.

Simulates voltage-to-current boundary data for a disk containing an
impenetrable inclusion, reconstructs the inclusion boundary by a sampling
indicator, and recovers the boundary impedance coefficient through a
boundary-integral data-completion scheme.
"""

from .annulus import (AnnulusConfig, annulus_potential, disk_potential,
                      dtn_disk, dtn_gap, gap_coefficient, gap_kernel,
                      gap_operator, inner_flux_coefficient,
                      inner_trace_coefficient, reflection_coefficient,
                      truncation_error)
from .bie import (ForwardSolution, LayerOperator, NystromMesh, double_layer,
                  dtn_matrix, fundamental_solution, modified_double_layer,
                  normal_derivative, single_layer, solve_forward)
from .completion import (CauchyPair, CompletionSystem, GammaReconstruction,
                         assemble_completion, complete_cauchy,
                         recover_gamma_averaged, recover_gamma_lsq,
                         recover_gamma_pointwise)
from .dtn import (DtnOperator, gap_from_lambda0, healthy_collocation_matrix,
                  healthy_fourier_matrix, to_real_trig_basis)
from .geometry import (BoundaryCurve, FourierData, fourier_analyze,
                       fourier_eval, sobolev_half_norm)
from .regularization import (RegStrategy, SvdFactorization, cutoff_solve,
                             discrepancy_alpha, expected_noise_norm,
                             perturb_matrix, perturb_vector, regularized_solve,
                             tikhonov_solve)
from .sampling import (FittedCurve, GridSpec, IndicatorGrid, extract_level_set,
                       fit_trig_curve, indicator, poisson_kernel, poisson_rhs,
                       scan, solve_current_gap)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
