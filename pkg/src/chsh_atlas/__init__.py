"""CHSH-type correlation bounds on classical, Markov and quantum factor graphs."""

from ._accel import BACKEND
from .beliefs import (PAIRS, SIGN_PATTERNS, BeliefCollection, LmReport, convex_combination, corr_chsh,
                      in_lm_chsh, linear_chsh, lm_vertices, pairwise_consistency, pcc, pr_box,
                      uniform_beliefs, validate_lm)
from .errors import ChshAtlasError
from .exact_lp import LpProblem, solve_lp, solve_lp_feasibility, verify_farkas
from .extremal import (OptResult, find_quantum_monotonicity_violation, maximize_classical_chsh,
                       maximize_markov_variant, maximize_quantum_chsh, verify_markov_monotonicity,
                       verify_markov_product, verify_strictness)
from .factor_graphs import (Configuration, JointPmf, Snfg, beliefs_of, build_cycle_graph,
                            build_markov_chain, build_single_node, global_value, induced_pmf, marginal,
                            partition_function)
from .quantum import (QnfgModel, Sqmf, build_sqmf, classical_marginal, classicable, measurement_ops,
                      quantum_beliefs, validate_sqmf)
from .realizability import MembershipVerdict, decide, member_fcyc, member_markov, member_qnfg, member_snfg
from .search import SearchConfig

__version__ = "0.1.0"
