"""Dissipative flow equations for non-Hermitian matrices and Lindbladians.

The library integrates continuous similarity transformations
dM/dl = [eta[M], M] for a family of generator schemes (pc, ipc, ppc, hpc,
gpc, r1, r2, r3 and the power-law interpolation between them), provides
the benchmark matrix families those schemes are compared on, and measures
convergence speed and band-truncation error.
"""

from .analytics import (SingleModeAnalytic, alpha_exact, closed_form_rhs_r2,
                        closed_form_rhs_r3, gamma2_zero_exact, mu_exact,
                        observable_exact)
from .flow import (DivergenceError, FlowConfig, FlowSample, FlowTrajectory,
                   StiffnessError, alternating_pc_ipc_flow, flow_rhs,
                   integrate_flow, trajectory_to_csv)
from .generators import (DEGENERACY_CUTOFF, GeneratorScheme, eta, eta_gpc,
                         eta_hpc, eta_ipc, eta_pc, eta_powerlaw, eta_ppc,
                         eta_r1, eta_r2, eta_r3)
from .linalg import (BandMask, EigensolverError, apply_band_mask, commutator,
                     eigenvalues, eigenpairs, hermitian_split,
                     load_matrix_binary, load_matrix_json, match_spectra,
                     matrix_from_json, matrix_to_json, rod,
                     save_matrix_binary, save_matrix_json, spectral_distance)
from .lindblad import (LindbladSpec, build_superoperator, sample_kossakowski,
                       su_n_basis, unvec, vec)
from .metrics import (ConvergenceReport, TruncationReport,
                      convergence_coefficient, run_campaign,
                      truncation_benchmark)
from .models import (DisorderedScatteringSpec, OrderedScatteringSpec,
                     RandomCrossoverSpec, SingleModeSpec, build_matrix,
                     build_disordered_scattering, build_ordered_scattering,
                     build_single_mode, find_strongly_dissipative,
                     impose_ordered_diagonal, lambda_sds_reference,
                     prepare_truncated, sample_random_crossover)

__version__ = "0.1.0"
