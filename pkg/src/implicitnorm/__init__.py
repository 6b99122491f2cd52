"""Exact computation of implicitly defined partition norms on finitely
supported sequences, with constructive block-sequence procedures and
numeric inequality audits.

The central object is the norm defined as the unique fixed point of

    N(x) = max( sup|x_i| ,
                sup over n >= 2 and successive sets E_1 < ... < E_n of
                    (1/log2(n+1)) * sum_i N(E_i x) )

together with its layer norms, characters, witness partitions, and dual
norming functionals, all evaluated exactly (to double precision) by
dynamic programming over interval partitions of the support.
"""

from .vectors import (FinVector, Functional, Interval, OrderedPartition,
                      VectorError, WitnessTree, elementary_norms, restrict,
                      spread)
from .engine import (CharacterResult, DomainError, EngineCheckError,
                     ENGINE_VERSION, F_SYSTEM, G_SYSTEM, IntervalTables,
                     MemoTable, NormResult, NormSystem, SupportGuardError,
                     best_sum, brute_norm, build_tables, character,
                     constant_best_sum, constant_vector_norm, get_system,
                     layer_norm, log2_affine_system, norm, norm_value,
                     norming_functional, tail_layer_norm, vector_digest)
from .blocks import (BlockSequence, ExperimentReport, NotEquivalentOnFamilyError,
                     ProjectionOp, ProjectionReport, SplitProfile,
                     StabilizationState, average_split_experiment,
                     build_projection, domination_margin, equivalence_constant,
                     greedy_block_select, greedy_split, l1_average_block,
                     projection_norm_estimate, split_count_bounds,
                     stabilize_subsequence, tail_constant)
from .audits import (AuditReport, RefinementReport, Tower, TowerProductResult,
                     audit_all, audit_power, audit_product_growth_printed,
                     audit_root_power, audit_slack, audit_subadditivity, beta,
                     beta_tilde, default_nu_grid, default_xi_grid, f_log2,
                     find_min_constant, g_log2, gamma_factor,
                     refinement_margin, tower_product)

__version__ = "0.1.0"
