"""Average-case reductions between planted-structure detection problems,
with the statistical tests, exact oracles, and Monte Carlo harness used to
validate them at desk scale."""

from .models import (Graph, PdsParams, KpcParams, PdsStarParams, IsbmParams,
                     BcParams, BspcaParams, sample_erdos_renyi, sample_pds,
                     sample_kpc, sample_isbm, sample_biclustering,
                     sample_bspca, isbm_params_from_gamma, pds_star_null,
                     pds_star_gamma, subsample_binomial)
from .kernels import (RejectionKernelSpec, CloneSpec, rejection_kernel,
                      kernel_mu_bound, clone_density, graph_clone,
                      threshold_gaussian_matrix, densify_to_target)
from .designs import (RegularDigraph, CenteredRegularMatrix, IdentityDesign,
                      CenteredMatrixDesign, KroneckerDesign,
                      CenteredPairDesign, sample_regular_digraph,
                      sample_centered_matrix, centered_matrix,
                      calibrate_c_hat, mu_design_from_c_hat,
                      verify_operator_norm, estimate_sigma, export_design,
                      load_design)
from .reductions import (PdsStarReductionParams, derive_pds_star_params,
                         to_k_partite_submatrix, bernoulli_rotate_block,
                         reduce_kpc_to_pds_star, reduce_kpc_to_isbm,
                         isbm_signal_gamma, bc_recovery_map,
                         random_rotation_to_bspca, lift_pc_nonhomogeneous,
                         ReductionTrace)
from .inference import (TestOutcome, ValReport, sum_test, expected_f,
                        degree_second_moment_test, top_k_degrees_recover,
                        voting_cutoff, amplify_minimal_to_exact,
                        brute_force_dks, detect_via_recovery_oracle,
                        detect_via_refutation_oracle, kl_bernoulli,
                        chi2_bernoulli, tv_binomial_bound, ingster_chi2)
from .harness import (ExperimentConfig, PowerCurve, FidelityReport,
                      SupportReport, RefutationReport,
                      run_detection_experiment, run_recovery_experiment,
                      pushforward_fidelity, planted_support_report,
                      refutation_gap_experiment, phase_sweep,
                      graph_summary_stats, write_rows_csv, rows_to_csv_text,
                      recompute_errors_from_rows, CSV_COLUMNS)
from .serialize import (write_edge_list, read_edge_list, write_dense_csv,
                        read_dense_csv)
from .config import read_config, parse_config_text, write_config, write_manifest

__version__ = "0.1.0"
